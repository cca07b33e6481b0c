#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "topo/raster.hpp"

namespace topo {

// D8 codes: 1..8 = E, SE, S, SW, W, NW, N, NE. Valid cells without a strictly
// lower neighbor are outlets (code 0); nodata DEM cells stay nodata.
inline constexpr int kOutlet = 0;

struct D8Step {
  int dr;
  int dc;
};

inline constexpr std::array<D8Step, 8> kD8Steps = {{
    {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1},
}};

inline constexpr D8Step d8_step(int code) { return kD8Steps[static_cast<std::size_t>(code - 1)]; }

/// Metric center-to-center distance for a D8 move.
double d8_distance(const GeoTransform& transform, int code);

/// Priority-flood depression filling. Every valid cell ends up with a
/// descending D8 path to the raster edge or to a nodata-adjacent cell; the
/// result is the minimal such raise. With `min_slope` > 0 each step of that
/// path drops by at least `min_slope` per cell spacing (diagonal steps by
/// `min_slope` * sqrt(2) on square cells), so flats drain.
Raster fill_sinks(const Raster& dem, double min_slope = 0.0);

/// Fill depth (filled - dem), the closed-depressions feature.
Raster closed_depressions(const Raster& dem, const Raster& filled);

/// Steepest-descent D8 codes; ties go to the lowest code.
Raster d8_flow_direction(const Raster& filled);

/// Upslope cell count including the cell itself.
Raster flow_accumulation(const Raster& flowdir);

/// 1 where acc >= threshold_cells, 0 elsewhere, nodata where acc is nodata.
Raster extract_channels(const Raster& acc, double threshold_cells);

/// 1 on cells without inflow (acc == 1).
Raster extract_ridges(const Raster& acc);

/// Exact Euclidean nearest-site transform over a 0/1 mask.
struct NearestSite {
  Raster distance;                  // meters; nodata where the mask is nodata
  std::vector<std::int64_t> site;   // flat index of the nearest mask cell, -1 for nodata
};

/// Nearest mask cell per cell. Equidistant sites are resolved towards the
/// lower `tie_elevation` when given, otherwise towards the first found.
NearestSite nearest_mask_site(const Raster& mask, const Raster* tie_elevation = nullptr);

/// Euclidean distance (meters) to the nearest mask cell center; the channel
/// network distance when `mask` holds channels.
Raster distance_to_mask(const Raster& mask);

/// max(0, dem - dem(nearest channel)).
Raster altitude_above_channel(const Raster& dem, const Raster& channel_mask);

/// max(0, dem(nearest ridge) - dem).
Raster altitude_below_ridge(const Raster& dem, const Raster& ridge_mask);

/// aacl / (aacl + abrl), 0 where both vanish.
Raster relative_slope_position(const Raster& aacl, const Raster& abrl);

}  // namespace topo
