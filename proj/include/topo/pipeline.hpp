#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topo/analysis.hpp"
#include "topo/eval.hpp"
#include "topo/features.hpp"
#include "topo/learn.hpp"
#include "topo/sampling.hpp"

namespace topo {

inline constexpr const char* kToolVersion = "1.0.0";

struct PipelineConfig {
  std::filesystem::path dem;
  double dem_meters_per_unit = 1.0;
  std::filesystem::path positives;
  std::filesystem::path chunks;
  std::filesystem::path output_dir = "topo_out";
  DatasetVariant variant = DatasetVariant::A;

  FeatureOptions features;
  std::vector<std::string> candidate_features;  // empty = every feature
  ScreeningOptions screening;                   // `forced` fixes the model inputs

  double min_positive_distance_m = 100.0;
  double min_negative_distance_m = 30.0;
  double split_percentile = 80.0;

  ModelFamily family = ModelFamily::GradientBoosting;
  ModelOptions model;

  std::uint64_t seed = 42;
  std::uint64_t sampling_seed = 0;
  std::uint64_t model_seed = 0;
  std::uint64_t undersample_seed = 0;

  double threshold = 0.5;
  bool write_png = true;
  bool write_feature_rasters = false;
};

/// Seeds not given explicitly are derived from `seed`.
PipelineConfig default_pipeline_config(std::uint64_t seed = 42);

/// JSON config. Relative paths resolve against the config file's directory;
/// unknown keys and wrong types are configuration errors.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Re-derives every seed from `seed` (used by the --seed flag).
void reseed(PipelineConfig& config, std::uint64_t seed);

struct PipelineCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t negative_candidates = 0;
  std::size_t dropped_outside = 0;
  std::size_t dropped_nodata = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t test_balanced = 0;
};

struct PipelineResult {
  EvalReport report;
  Raster risk;
  ScreeningReport screening;
  TrainedModel model;
  std::vector<std::string> features;
  double split_threshold = 0.0;
  PipelineCounts counts;
};

/// ingest, fill, features, sample, screen, split, train, undersample,
/// evaluate, predict, then write every artifact and manifest.json to
/// `config.output_dir`. Errors are re-raised with the stage name.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace topo
