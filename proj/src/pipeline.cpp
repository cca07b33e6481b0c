#include "topo/pipeline.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "topo/error.hpp"
#include "topo/random.hpp"

namespace topo {

namespace {

using nlohmann::json;

template <class F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.detail());
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorKind::Io, std::string("stage '") + name + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Configuration, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw Error(ErrorKind::Configuration, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

json config_json(const PipelineConfig& c) {
  json j;
  j["dem"] = c.dem.string();
  j["dem_meters_per_unit"] = c.dem_meters_per_unit;
  j["positives"] = c.positives.string();
  j["chunks"] = c.chunks.string();
  j["output_dir"] = c.output_dir.string();
  j["variant"] = c.variant == DatasetVariant::A ? "A" : "B";
  j["features"] = {{"min_slope", c.features.min_slope},
                   {"channel_threshold_cells", c.features.channel_threshold_cells},
                   {"tpi_radius_m", c.features.tpi_radius_m},
                   {"candidates", c.candidate_features}};
  j["screening"] = {{"p_threshold", c.screening.p_threshold},
                    {"r_threshold", c.screening.r_threshold},
                    {"bins", c.screening.bins},
                    {"forced", c.screening.forced}};
  j["sampling"] = {{"min_positive_distance_m", c.min_positive_distance_m},
                   {"min_negative_distance_m", c.min_negative_distance_m}};
  j["split_percentile"] = c.split_percentile;
  const auto& m = c.model;
  j["model"] = {
      {"family", to_string(c.family)},
      {"logistic", {{"l2", m.logistic.l2}, {"max_iterations", m.logistic.max_iterations}}},
      {"svm", {{"l2", m.svm.l2}, {"epochs", m.svm.epochs}, {"initial_step", m.svm.initial_step}}},
      {"forest",
       {{"n_trees", m.forest.n_trees},
        {"max_features", m.forest.max_features},
        {"max_depth", m.forest.max_depth},
        {"min_samples_leaf", m.forest.min_samples_leaf}}},
      {"boosting",
       {{"n_trees", m.boosting.n_trees},
        {"depth", m.boosting.depth},
        {"learning_rate", m.boosting.learning_rate},
        {"min_samples_leaf", m.boosting.min_samples_leaf}}}};
  j["seed"] = c.seed;
  j["sampling_seed"] = c.sampling_seed;
  j["model_seed"] = c.model_seed;
  j["undersample_seed"] = c.undersample_seed;
  j["threshold"] = c.threshold;
  j["write_png"] = c.write_png;
  j["write_feature_rasters"] = c.write_feature_rasters;
  return j;
}

json report_json(const EvalReport& r) {
  auto real = [](double v) { return std::isnan(v) ? json("nodata") : json(v); };
  return {{"roc_auc", real(r.roc_auc)}, {"recall", real(r.recall)},       {"precision", real(r.precision)},
          {"specificity", real(r.specificity)}, {"f1", real(r.f1)},        {"tp", r.tp},
          {"fp", r.fp},                   {"tn", r.tn},                   {"fn", r.fn},
          {"n_pos", r.n_pos},             {"n_neg", r.n_neg},             {"threshold", r.threshold},
          {"seed", r.seed}};
}

void apply_seeds(PipelineConfig& c) {
  c.sampling_seed = derive_seed(c.seed, 1);
  c.model_seed = derive_seed(c.seed, 2);
  c.undersample_seed = derive_seed(c.seed, 3);
}

}  // namespace

PipelineConfig default_pipeline_config(std::uint64_t seed) {
  PipelineConfig c;
  c.seed = seed;
  apply_seeds(c);
  return c;
}

void reseed(PipelineConfig& config, std::uint64_t seed) {
  config.seed = seed;
  apply_seeds(config);
}

PipelineConfig parse_pipeline_config(const std::string& text, const std::filesystem::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j,
               {"dem", "dem_meters_per_unit", "positives", "chunks", "output_dir", "variant", "features", "screening",
                "sampling", "split_percentile", "model", "seed", "sampling_seed", "model_seed", "undersample_seed",
                "threshold", "write_png", "write_feature_rasters"},
               "config");
    PipelineConfig c = default_pipeline_config(j.value("seed", std::uint64_t{42}));
    for (const char* key : {"dem", "positives", "chunks"}) {
      if (!j.contains(key)) throw Error(ErrorKind::Configuration, std::string("config is missing '") + key + "'");
    }
    c.dem = resolve(base, j.at("dem").get<std::string>());
    c.positives = resolve(base, j.at("positives").get<std::string>());
    c.chunks = resolve(base, j.at("chunks").get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(base, j.at("output_dir").get<std::string>());
    read(j, "dem_meters_per_unit", c.dem_meters_per_unit);
    if (j.contains("variant")) {
      const auto v = parse_variant(j.at("variant").get<std::string>());
      if (!v) throw Error(ErrorKind::Configuration, "variant must be A or B");
      c.variant = *v;
    }
    if (j.contains("features")) {
      const auto& f = j.at("features");
      check_keys(f, {"min_slope", "channel_threshold_cells", "tpi_radius_m", "candidates"}, "features");
      read(f, "min_slope", c.features.min_slope);
      read(f, "channel_threshold_cells", c.features.channel_threshold_cells);
      read(f, "tpi_radius_m", c.features.tpi_radius_m);
      read(f, "candidates", c.candidate_features);
    }
    if (j.contains("screening")) {
      const auto& s = j.at("screening");
      check_keys(s, {"p_threshold", "r_threshold", "bins", "forced"}, "screening");
      read(s, "p_threshold", c.screening.p_threshold);
      read(s, "r_threshold", c.screening.r_threshold);
      read(s, "bins", c.screening.bins);
      read(s, "forced", c.screening.forced);
    }
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      check_keys(s, {"min_positive_distance_m", "min_negative_distance_m"}, "sampling");
      read(s, "min_positive_distance_m", c.min_positive_distance_m);
      read(s, "min_negative_distance_m", c.min_negative_distance_m);
    }
    read(j, "split_percentile", c.split_percentile);
    if (j.contains("model")) {
      const auto& m = j.at("model");
      check_keys(m, {"family", "logistic", "svm", "forest", "boosting"}, "model");
      if (m.contains("family")) c.family = parse_family(m.at("family").get<std::string>());
      if (m.contains("logistic")) {
        const auto& l = m.at("logistic");
        check_keys(l, {"l2", "max_iterations"}, "model.logistic");
        read(l, "l2", c.model.logistic.l2);
        read(l, "max_iterations", c.model.logistic.max_iterations);
      }
      if (m.contains("svm")) {
        const auto& s = m.at("svm");
        check_keys(s, {"l2", "epochs", "initial_step"}, "model.svm");
        read(s, "l2", c.model.svm.l2);
        read(s, "epochs", c.model.svm.epochs);
        read(s, "initial_step", c.model.svm.initial_step);
      }
      if (m.contains("forest")) {
        const auto& f = m.at("forest");
        check_keys(f, {"n_trees", "max_features", "max_depth", "min_samples_leaf"}, "model.forest");
        read(f, "n_trees", c.model.forest.n_trees);
        read(f, "max_features", c.model.forest.max_features);
        read(f, "max_depth", c.model.forest.max_depth);
        read(f, "min_samples_leaf", c.model.forest.min_samples_leaf);
      }
      if (m.contains("boosting")) {
        const auto& b = m.at("boosting");
        check_keys(b, {"n_trees", "depth", "learning_rate", "min_samples_leaf"}, "model.boosting");
        read(b, "n_trees", c.model.boosting.n_trees);
        read(b, "depth", c.model.boosting.depth);
        read(b, "learning_rate", c.model.boosting.learning_rate);
        read(b, "min_samples_leaf", c.model.boosting.min_samples_leaf);
      }
    }
    read(j, "sampling_seed", c.sampling_seed);
    read(j, "model_seed", c.model_seed);
    read(j, "undersample_seed", c.undersample_seed);
    read(j, "threshold", c.threshold);
    read(j, "write_png", c.write_png);
    read(j, "write_feature_rasters", c.write_feature_rasters);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("bad config value: ") + e.what());
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Configuration, "cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pipeline_config(text, path.parent_path());
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  stage("config", [&] {
    for (const auto* p : {&config.dem, &config.positives, &config.chunks}) {
      if (!std::filesystem::is_regular_file(*p)) {
        throw Error(ErrorKind::Configuration, "input file does not exist: " + p->string());
      }
    }
    return 0;
  });

  PipelineResult result;
  const Raster dem = stage("ingest", [&] { return read_dem(config.dem, config.dem_meters_per_unit); });
  const Survey survey = stage("ingest", [&] { return load_survey(config.positives, config.chunks); });

  const std::vector<std::string> candidates =
      config.candidate_features.empty() ? all_feature_names(config.features) : config.candidate_features;
  std::vector<std::string> needed = candidates;
  for (const auto& f : config.screening.forced) {
    if (std::find(needed.begin(), needed.end(), f) == needed.end()) needed.push_back(f);
  }
  const RasterSet rasters = stage("features", [&] { return compute_features(dem, config.features, needed); });

  const FeatureTable table = stage("sample", [&] {
    const auto positives = select_positives(survey.records, config.variant);
    NegativeSamplingOptions opts;
    opts.min_positive_distance_m = config.min_positive_distance_m;
    opts.min_negative_distance_m = config.min_negative_distance_m;
    opts.seed = config.sampling_seed;
    const NegativeSample negatives = generate_negatives(survey.chunks, positives, dem, opts);
    result.counts.positives = positives.size();
    result.counts.negatives = negatives.points.size();
    result.counts.negative_candidates = negatives.candidates;
    Extraction ex = extract_features(label_points(positives, negatives.points), rasters);
    result.counts.dropped_outside = ex.dropped_outside;
    result.counts.dropped_nodata = ex.dropped_nodata;
    return std::move(ex.table);
  });

  result.screening = stage("screen", [&] { return screen_features(table, config.screening); });
  result.features = result.screening.selected;
  if (result.features.empty()) {
    throw Error(ErrorKind::Configuration, "stage 'screen': no feature passed screening");
  }

  const LongitudeSplit split =
      stage("split", [&] { return split_by_longitude(table.select(result.features), config.split_percentile); });
  result.split_threshold = split.threshold;
  result.counts.train = split.train.size();
  result.counts.test = split.test.size();

  result.model = stage("train", [&] {
    ModelOptions opts = config.model;
    opts.svm.seed = config.model_seed;
    opts.forest.seed = config.model_seed;
    opts.boosting.seed = config.model_seed;
    return fit_model(config.family, split.train, balanced_weights(split.train.labels()), opts);
  });

  const FeatureTable balanced = stage("undersample", [&] { return undersample_negatives(split.test, config.undersample_seed); });
  result.counts.test_balanced = balanced.size();

  result.report = stage("evaluate", [&] {
    EvalReport r = evaluate(result.model.predict_proba(balanced), balanced.labels(), config.threshold);
    r.seed = config.undersample_seed;
    return r;
  });

  result.risk = stage("predict", [&] { return predict_grid(result.model, rasters); });

  stage("write", [&] {
    const auto& out = config.output_dir;
    std::filesystem::create_directories(out);
    std::vector<std::string> artifacts;
    auto note = [&](const std::string& name) {
      artifacts.push_back(name);
      return out / name;
    };
    write_feature_table(table, note("samples.csv"));
    write_screening_report(result.screening, note("screening.txt"));
    save_model(result.model, note("model.json"));
    write_eval_report(result.report, note("eval.txt"));
    const auto proba = result.model.predict_proba(balanced);
    write_roc_curve(roc_curve(proba, balanced.labels()), note("roc.csv"));
    write_ascii_grid(result.risk, note("risk.asc"));
    if (config.write_png) write_probability_png(result.risk, note("risk.png"));
    if (config.write_feature_rasters) {
      std::filesystem::create_directories(out / "features");
      for (const auto& nr : rasters) write_ascii_grid(nr.raster, note("features/" + nr.name + ".asc"));
    }

    json manifest;
    manifest["tool"] = "topo";
    manifest["version"] = kToolVersion;
    manifest["model_format_version"] = 1;
    manifest["config"] = config_json(config);
    manifest["seeds"] = {{"master", config.seed},
                         {"sampling", config.sampling_seed},
                         {"model", config.model_seed},
                         {"undersample", config.undersample_seed}};
    const auto& c = result.counts;
    manifest["counts"] = {{"positives", c.positives},
                          {"negatives", c.negatives},
                          {"negative_candidates", c.negative_candidates},
                          {"dropped_outside", c.dropped_outside},
                          {"dropped_nodata", c.dropped_nodata},
                          {"train", c.train},
                          {"test", c.test},
                          {"test_balanced", c.test_balanced}};
    manifest["split_threshold"] = result.split_threshold;
    manifest["selected_features"] = result.features;
    manifest["metrics"] = report_json(result.report);
    manifest["artifacts"] = artifacts;
    std::ofstream m(out / "manifest.json");
    if (!m) throw Error(ErrorKind::Io, "cannot write " + (out / "manifest.json").string());
    m << manifest.dump(2) << '\n';
    return 0;
  });
  return result;
}

}  // namespace topo
