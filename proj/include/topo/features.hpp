#pragma once

#include <string>
#include <vector>

#include "topo/raster.hpp"

namespace topo {

struct FeatureOptions {
  double min_slope = 0.01;                  // drop per cell spacing in the conditioning fill
  double channel_threshold_cells = 1112.0;  // about 1 km^2 at 30 m
  double tpi_radius_m = 500.0;
};

/// Name of the TPI feature for a radius, e.g. "tpi500".
std::string tpi_feature_name(double radius_m);

/// Every feature `compute_features` can produce, in a fixed order.
std::vector<std::string> all_feature_names(const FeatureOptions& options = {});

/// TPI500, TWI, RPS, closed depressions and flow direction.
std::vector<std::string> dataset_a_features(const FeatureOptions& options = {});

/// Conditions the DEM and derives the requested features (all when empty).
/// Unknown names raise a configuration error.
RasterSet compute_features(const Raster& dem, const FeatureOptions& options,
                           const std::vector<std::string>& names = {});

}  // namespace topo
