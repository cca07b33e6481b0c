#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topo/analysis.hpp"
#include "topo/error.hpp"
#include "topo/eval.hpp"
#include "topo/features.hpp"
#include "topo/hydrology.hpp"
#include "topo/learn.hpp"
#include "topo/pipeline.hpp"
#include "topo/raster.hpp"
#include "topo/sampling.hpp"
#include "topo/synthetic.hpp"

namespace fs = std::filesystem;
using namespace topo;

namespace {

RasterSet load_feature_dir(const fs::path& dir, const std::vector<std::string>& names) {
  RasterSet set;
  for (const auto& n : names) set.push_back({n, read_ascii_grid(dir / (n + ".asc"))});
  return set;
}

DatasetVariant variant_of(const std::string& text) {
  const auto v = parse_variant(text);
  if (!v) throw Error(ErrorKind::Configuration, "variant must be A or B, got '" + text + "'");
  return *v;
}

void print_report(const EvalReport& r) {
  auto real = [](double v) { return std::isnan(v) ? std::string("nodata") : std::to_string(v); };
  std::printf("roc_auc %s  recall %s  precision %s  specificity %s  f1 %s  (tp %zu fp %zu tn %zu fn %zu)\n",
              real(r.roc_auc).c_str(), real(r.recall).c_str(), real(r.precision).c_str(),
              real(r.specificity).c_str(), real(r.f1).c_str(), r.tp, r.fp, r.tn, r.fn);
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Configuration:
    case ErrorKind::Parameter: return 2;
    case ErrorKind::Io:
    case ErrorKind::Parse:
    case ErrorKind::Format:
    case ErrorKind::MalformedTile:
    case ErrorKind::MissingGeoreference: return 3;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topo: terrain features, survey sampling and water-site risk models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  double meters_per_unit = 1.0;
  app.add_option("--meters-per-unit", meters_per_unit, "Ground metres per coordinate unit for ASCII grids")
      ->check(CLI::PositiveNumber);

  FeatureOptions feature_opts;
  auto add_feature_flags = [&](CLI::App* cmd) {
    cmd->add_option("--min-slope", feature_opts.min_slope, "Conditioning fill gradient per cell")
        ->capture_default_str();
    cmd->add_option("--channel-threshold", feature_opts.channel_threshold_cells, "Channel contributing cells")
        ->capture_default_str();
    cmd->add_option("--tpi-radius", feature_opts.tpi_radius_m, "TPI radius in metres")->capture_default_str();
  };

  // fill
  auto* fill = app.add_subcommand("fill", "Fill depressions in a DEM");
  fs::path fill_in, fill_out;
  fill->add_option("dem", fill_in, "Input DEM (.hgt or ASCII grid)")->required();
  fill->add_option("-o,--out", fill_out, "Output ASCII grid")->required();
  fill->add_option("--min-slope", feature_opts.min_slope, "Gradient per cell spacing")->capture_default_str();

  // features
  auto* features = app.add_subcommand("features", "Derive terrain feature rasters");
  fs::path feat_dem, feat_dir;
  std::vector<std::string> feat_names;
  features->add_option("dem", feat_dem, "Input DEM")->required();
  features->add_option("-o,--out-dir", feat_dir, "Directory for <name>.asc rasters")->required();
  features->add_option("--names", feat_names, "Features to compute (default: all)")->delimiter(',');
  add_feature_flags(features);

  // sample
  auto* sample = app.add_subcommand("sample", "Build the labelled feature table from a survey");
  fs::path s_dem, s_pos, s_chunks, s_dir, s_out;
  std::string s_variant = "A";
  std::vector<std::string> s_names;
  NegativeSamplingOptions s_opts;
  s_opts.seed = 42;
  sample->add_option("--dem", s_dem, "DEM the survey refers to")->required();
  sample->add_option("--positives", s_pos, "Positive sites CSV (x,y,category)")->required();
  sample->add_option("--chunks", s_chunks, "Negative chunks CSV (min_x,min_y,max_x,max_y)")->required();
  sample->add_option("--features-dir", s_dir, "Directory written by 'features'")->required();
  sample->add_option("--names", s_names, "Feature columns (default: all)")->delimiter(',');
  sample->add_option("--variant", s_variant, "Dataset variant A or B")->capture_default_str();
  sample->add_option("--seed", s_opts.seed, "Negative sampling seed")->capture_default_str();
  sample->add_option("--min-positive-distance", s_opts.min_positive_distance_m)->capture_default_str();
  sample->add_option("--min-negative-distance", s_opts.min_negative_distance_m)->capture_default_str();
  sample->add_option("-o,--out", s_out, "Output table CSV")->required();

  // screen
  auto* screen = app.add_subcommand("screen", "Univariate tests, correlation and redundancy filter");
  fs::path sc_table, sc_out;
  ScreeningOptions sc_opts;
  screen->add_option("table", sc_table, "Feature table CSV")->required();
  screen->add_option("-o,--out", sc_out, "Report file")->required();
  screen->add_option("--p-threshold", sc_opts.p_threshold)->capture_default_str();
  screen->add_option("--r-threshold", sc_opts.r_threshold)->capture_default_str();
  screen->add_option("--bins", sc_opts.bins)->capture_default_str();
  screen->add_option("--force", sc_opts.forced, "Use exactly these features")->delimiter(',');

  // train
  auto* train = app.add_subcommand("train", "Fit a classifier");
  fs::path t_table, t_out, t_test_out;
  std::string t_family = "gradient_boosting";
  std::vector<std::string> t_features;
  double t_split = 0.0;
  std::uint64_t t_seed = 42;
  ModelOptions t_opts;
  train->add_option("table", t_table, "Training table CSV")->required();
  train->add_option("-o,--out", t_out, "Model file")->required();
  train->add_option("--family", t_family,
                    "logistic | linear_svm | random_forest | extra_trees | gradient_boosting")
      ->capture_default_str();
  train->add_option("--features", t_features, "Columns to train on (default: all)")->delimiter(',');
  train->add_option("--split", t_split, "Longitude percentile; train west of it and write the rest")
      ->check(CLI::Range(0.0, 100.0));
  train->add_option("--test-out", t_test_out, "Where to write the held-out table when --split is used");
  train->add_option("--seed", t_seed)->capture_default_str();
  train->add_option("--n-trees", t_opts.forest.n_trees, "Trees for forests and boosting")->capture_default_str();
  train->add_option("--depth", t_opts.boosting.depth, "Boosting tree depth")->capture_default_str();
  train->add_option("--learning-rate", t_opts.boosting.learning_rate)->capture_default_str();
  train->add_option("--min-samples-leaf", t_opts.boosting.min_samples_leaf)->capture_default_str();
  train->add_option("--l2", t_opts.logistic.l2)->capture_default_str();
  train->add_option("--epochs", t_opts.svm.epochs)->capture_default_str();

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a model on a labelled table");
  fs::path e_model, e_table, e_out, e_roc;
  std::uint64_t e_seed = 42;
  double e_threshold = 0.5;
  bool e_keep_all = false;
  evaluate_cmd->add_option("model", e_model, "Model file")->required();
  evaluate_cmd->add_option("table", e_table, "Test table CSV")->required();
  evaluate_cmd->add_option("-o,--out", e_out, "Report file");
  evaluate_cmd->add_option("--roc", e_roc, "ROC curve CSV");
  evaluate_cmd->add_option("--seed", e_seed, "Undersampling seed")->capture_default_str();
  evaluate_cmd->add_option("--threshold", e_threshold)->capture_default_str();
  evaluate_cmd->add_flag("--no-undersample", e_keep_all, "Score every row");

  // predict
  auto* predict = app.add_subcommand("predict", "Write a probability raster");
  fs::path p_model, p_dir, p_out, p_png;
  predict->add_option("model", p_model, "Model file")->required();
  predict->add_option("--features-dir", p_dir, "Directory of <feature>.asc rasters")->required();
  predict->add_option("-o,--out", p_out, "Output ASCII grid")->required();
  predict->add_option("--png", p_png, "Optional grayscale rendering");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from a JSON config");
  fs::path pl_config, pl_output;
  std::string pl_family, pl_variant;
  std::vector<std::string> pl_features;
  std::uint64_t pl_seed = 0;
  pipeline->add_option("config", pl_config, "Config file")->required();
  pipeline->add_option("--output", pl_output, "Override output directory");
  pipeline->add_option("--family", pl_family, "Override model family");
  pipeline->add_option("--variant", pl_variant, "Override dataset variant");
  pipeline->add_option("--features", pl_features, "Override the forced feature list")->delimiter(',');
  auto* pl_seed_opt = pipeline->add_option("--seed", pl_seed, "Override the master seed");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic DEM, survey and config");
  fs::path sy_dir;
  SyntheticOptions sy_opts;
  synth->add_option("-o,--out-dir", sy_dir, "Output directory")->required();
  synth->add_option("--seed", sy_opts.seed)->capture_default_str();
  synth->add_option("--size", sy_opts.size, "Cells per side")->capture_default_str();
  synth->add_option("--label-noise", sy_opts.label_noise)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fill) {
      write_ascii_grid(fill_sinks(read_dem(fill_in, meters_per_unit), feature_opts.min_slope), fill_out);
    } else if (*features) {
      const RasterSet set = compute_features(read_dem(feat_dem, meters_per_unit), feature_opts, feat_names);
      fs::create_directories(feat_dir);
      for (const auto& nr : set) write_ascii_grid(nr.raster, feat_dir / (nr.name + ".asc"));
      std::printf("wrote %zu rasters to %s\n", set.size(), feat_dir.c_str());
    } else if (*sample) {
      const Raster dem = read_dem(s_dem, meters_per_unit);
      const Survey survey = load_survey(s_pos, s_chunks);
      const auto positives = select_positives(survey.records, variant_of(s_variant));
      const auto negatives = generate_negatives(survey.chunks, positives, dem, s_opts);
      const auto names = s_names.empty() ? all_feature_names(feature_opts) : s_names;
      const Extraction ex = extract_features(label_points(positives, negatives.points), load_feature_dir(s_dir, names));
      write_feature_table(ex.table, s_out);
      std::printf("%zu positives, %zu negatives (%zu candidates); dropped %zu outside, %zu nodata\n",
                  positives.size(), negatives.points.size(), negatives.candidates, ex.dropped_outside,
                  ex.dropped_nodata);
    } else if (*screen) {
      const ScreeningReport report = screen_features(read_feature_table(sc_table), sc_opts);
      write_screening_report(report, sc_out);
      std::printf("selected:");
      for (const auto& s : report.selected) std::printf(" %s", s.c_str());
      std::printf("\n");
    } else if (*train) {
      FeatureTable table = read_feature_table(t_table);
      if (!t_features.empty()) table = table.select(t_features);
      if (t_split > 0.0) {
        const LongitudeSplit split = split_by_longitude(table, t_split);
        if (!t_test_out.empty()) write_feature_table(split.test, t_test_out);
        std::printf("split at x = %.17g: %zu train, %zu test\n", split.threshold, split.train.size(),
                    split.test.size());
        table = split.train;
      }
      t_opts.boosting.n_trees = t_opts.forest.n_trees;
      t_opts.svm.seed = t_opts.forest.seed = t_opts.boosting.seed = t_seed;
      const TrainedModel model = fit_model(parse_family(t_family), table, balanced_weights(table.labels()), t_opts);
      save_model(model, t_out);
    } else if (*evaluate_cmd) {
      const TrainedModel model = load_model(e_model);
      FeatureTable table = read_feature_table(e_table);
      if (!e_keep_all) table = undersample_negatives(table, e_seed);
      const auto proba = model.predict_proba(table);
      EvalReport report = evaluate(proba, table.labels(), e_threshold);
      report.seed = e_keep_all ? 0 : e_seed;
      if (!e_out.empty()) write_eval_report(report, e_out);
      if (!e_roc.empty()) write_roc_curve(roc_curve(proba, table.labels()), e_roc);
      print_report(report);
    } else if (*predict) {
      const TrainedModel model = load_model(p_model);
      const Raster risk = predict_grid(model, load_feature_dir(p_dir, model.feature_names));
      write_ascii_grid(risk, p_out);
      if (!p_png.empty()) write_probability_png(risk, p_png);
    } else if (*pipeline) {
      PipelineConfig config = load_pipeline_config(pl_config);
      if (!pl_output.empty()) config.output_dir = pl_output;
      if (!pl_family.empty()) config.family = parse_family(pl_family);
      if (!pl_variant.empty()) config.variant = variant_of(pl_variant);
      if (!pl_features.empty()) config.screening.forced = pl_features;
      if (pl_seed_opt->count() > 0) reseed(config, pl_seed);
      const PipelineResult result = run_pipeline(config);
      std::printf("features:");
      for (const auto& f : result.features) std::printf(" %s", f.c_str());
      std::printf("\n");
      print_report(result.report);
      std::printf("artifacts in %s\n", config.output_dir.c_str());
    } else if (*synth) {
      const SyntheticScene scene = make_synthetic_scene(sy_opts);
      write_synthetic_scene(scene, sy_dir);
      std::printf("%zu positives (%zu bowls, %zu channel sites, %zu relocated), %zu chunks in %s\n",
                  scene.positives.size(), scene.depression_sites, scene.channel_sites, scene.relocated,
                  scene.chunks.size(), sy_dir.c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "topo: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "topo: %s\n", e.what());
    return 1;
  }
  return 0;
}
