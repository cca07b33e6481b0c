#pragma once

#include <optional>

#include "topo/raster.hpp"

namespace topo {

/// Zevenbergen-Thorne partial derivatives at a cell, x east and y north,
/// in elevation units per meter.
struct SurfaceFit {
  double p = 0.0;  // dz/dx
  double q = 0.0;  // dz/dy
  double r = 0.0;  // d2z/dx2
  double s = 0.0;  // d2z/dxdy
  double t = 0.0;  // d2z/dy2
};

/// Central differences over the 3x3 window; empty when the window is
/// incomplete (raster edge or nodata).
std::optional<SurfaceFit> surface_fit(const Raster& dem, std::size_t row, std::size_t col);

/// Slope angle in radians.
Raster slope(const Raster& dem);

/// Downslope direction in degrees clockwise from north, [0, 360). Flat cells
/// are nodata.
Raster aspect(const Raster& dem);

// Curvatures use the concave-positive convention: contours curving around a
// hollow, and profiles that flatten downslope, are positive. Flat cells are 0.
double plan_curvature(const SurfaceFit& fit);
double profile_curvature(const SurfaceFit& fit);
Raster plan_curvature(const Raster& dem);
Raster profile_curvature(const Raster& dem);

/// Elevation minus the mean of valid cells whose centers lie within
/// `radius_m` (center excluded).
Raster tpi(const Raster& dem, double radius_m);

/// Convergence index in [-100, 100] from an aspect raster; negative where
/// neighbors drain towards the cell.
Raster convergence_index(const Raster& aspect_deg);

inline constexpr double kTwiTanFloor = 0.001;

/// ln(a / max(tan(slope), 0.001)) with specific catchment a = acc * cell width.
Raster twi(const Raster& acc, const Raster& slope_rad);

}  // namespace topo
