#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "topo/raster.hpp"
#include "topo/sampling.hpp"

namespace topo {

struct SyntheticOptions {
  std::size_t size = 512;
  double cell_m = 30.0;
  double relief_m = 8.0;          // sd of the smooth component
  double smoothing_cells = 10.0;  // box radius of the blur, applied three times
  double fine_relief_m = 0.2;
  double tilt = 0.6;              // metres gained per row southward
  std::size_t depressions = 320;
  double bowl_radius_min_cells = 2.0;
  double bowl_radius_max_cells = 3.0;
  double bowl_depth_min_m = 5.0;
  double bowl_depth_max_m = 9.0;
  std::size_t channel_sites = 480;
  double channel_site_distance_cells = 0.0;  // how close to a channel a swamp site may be
  double label_noise = 0.10;      // fraction of positives moved to random cells
  std::size_t chunks = 900;
  double chunk_m = 100.0;
  double channel_threshold_cells = 1112.0;
  double tpi_radius_m = 500.0;
  std::uint64_t seed = 1;
};

struct SyntheticScene {
  Raster dem;
  std::vector<SurveyRecord> positives;
  std::vector<ChunkRecord> chunks;
  std::size_t depression_sites = 0;
  std::size_t channel_sites = 0;
  std::size_t relocated = 0;
};

/// Smoothed random terrain with carved bowls. Positives are bowl centers
/// (ponds) and low-TPI cells next to channels (swamps); a fraction is moved
/// to random cells as label noise. Chunks are grid-aligned squares holding
/// no positive.
SyntheticScene make_synthetic_scene(const SyntheticOptions& options = {});

/// Writes dem.asc, positives.csv, chunks.csv and a pipeline config.json
/// (gradient boosting on the dataset-A features) into `dir`.
void write_synthetic_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace topo
