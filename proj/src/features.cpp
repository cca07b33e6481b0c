#include "topo/features.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>

#include "topo/error.hpp"
#include "topo/hydrology.hpp"
#include "topo/terrain.hpp"

namespace topo {

std::string tpi_feature_name(double radius_m) { return "tpi" + std::to_string(std::lround(radius_m)); }

std::vector<std::string> all_feature_names(const FeatureOptions& options) {
  return {tpi_feature_name(options.tpi_radius_m),
          "twi",
          "cnd",
          "rps",
          "closed_depressions",
          "flow_direction",
          "plan_curvature",
          "profile_curvature",
          "convergence_index",
          "slope",
          "aspect",
          "flow_accumulation",
          "aacl",
          "abrl"};
}

std::vector<std::string> dataset_a_features(const FeatureOptions& options) {
  return {tpi_feature_name(options.tpi_radius_m), "twi", "rps", "closed_depressions", "flow_direction"};
}

namespace {

// Each product is computed at most once, on first request.
class Products {
 public:
  Products(const Raster& dem, const FeatureOptions& options) : dem_(dem), options_(options) {}

  const Raster& get(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(name, make(name)).first->second;
  }

 private:
  Raster make(const std::string& name) {
    if (name == "filled") return fill_sinks(dem_, options_.min_slope);
    if (name == "filled_flat") return fill_sinks(dem_, 0.0);
    if (name == "closed_depressions") return closed_depressions(dem_, get("filled_flat"));
    if (name == "flow_direction") return d8_flow_direction(get("filled"));
    if (name == "flow_accumulation") return flow_accumulation(get("flow_direction"));
    if (name == "slope") return slope(get("filled"));
    if (name == "aspect") return aspect(get("filled"));
    if (name == "plan_curvature") return plan_curvature(get("filled"));
    if (name == "profile_curvature") return profile_curvature(get("filled"));
    if (name == "convergence_index") return convergence_index(get("aspect"));
    if (name == "twi") return twi(get("flow_accumulation"), get("slope"));
    if (name == "channels") return extract_channels(get("flow_accumulation"), options_.channel_threshold_cells);
    if (name == "ridges") return extract_ridges(get("flow_accumulation"));
    if (name == "cnd") return distance_to_mask(get("channels"));
    if (name == "aacl") return altitude_above_channel(get("filled"), get("channels"));
    if (name == "abrl") return altitude_below_ridge(get("filled"), get("ridges"));
    if (name == "rps") return relative_slope_position(get("aacl"), get("abrl"));
    if (name == tpi_feature_name(options_.tpi_radius_m)) return tpi(get("filled"), options_.tpi_radius_m);
    throw Error(ErrorKind::Configuration, "unknown feature '" + name + "'");
  }

  const Raster& dem_;
  const FeatureOptions& options_;
  std::map<std::string, Raster> cache_;
};

}  // namespace

RasterSet compute_features(const Raster& dem, const FeatureOptions& options, const std::vector<std::string>& names) {
  const std::vector<std::string> wanted = names.empty() ? all_feature_names(options) : names;
  const auto known = all_feature_names(options);
  for (const auto& n : wanted) {
    if (std::find(known.begin(), known.end(), n) == known.end()) {
      throw Error(ErrorKind::Configuration, "unknown feature '" + n + "'");
    }
  }
  Products products(dem, options);
  RasterSet out;
  for (const auto& n : wanted) out.push_back({n, products.get(n)});
  return out;
}

}  // namespace topo
