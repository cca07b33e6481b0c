#include "topo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <png.h>

#include "topo/error.hpp"
#include "topo/random.hpp"

namespace topo {

namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts check_scores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::Shape, "scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                                      std::to_string(labels.size()) + ")");
  }
  ClassCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::isnan(scores[i])) throw Error(ErrorKind::Parameter, "score " + std::to_string(i) + " is NaN");
    (labels[i] == 1 ? c.pos : c.neg) += 1;
  }
  if (c.pos == 0 || c.neg == 0) throw Error(ErrorKind::Class, "ROC needs both classes");
  return c;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(num) / static_cast<double>(den);
}

bool same_real(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_scores(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Ranks are 1-based; a tie block of ranks i+1..j gets their mean.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in_block = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      pos_in_block += labels[order[j]] == 1 ? 1 : 0;
      ++j;
    }
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    rank_sum += mid * static_cast<double>(pos_in_block);
    i = j;
  }
  const double np = static_cast<double>(c.pos), nn = static_cast<double>(c.neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_scores(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> curve{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    curve.push_back({s, ratio(fp, c.neg), ratio(tp, c.pos)});
  }
  return curve;
}

bool EvalReport::operator==(const EvalReport& o) const {
  return same_real(roc_auc, o.roc_auc) && same_real(recall, o.recall) && same_real(precision, o.precision) &&
         same_real(specificity, o.specificity) && same_real(f1, o.f1) && tp == o.tp && fp == o.fp && tn == o.tn &&
         fn == o.fn && n_pos == o.n_pos && n_neg == o.n_neg && same_real(threshold, o.threshold) && seed == o.seed;
}

EvalReport confusion_metrics(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorKind::Shape, "predictions and labels differ in length (" + std::to_string(predictions.size()) +
                                      " vs " + std::to_string(labels.size()) + ")");
  }
  EvalReport r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] == 1, said = predictions[i] == 1;
    if (truth && said) ++r.tp;
    else if (truth) ++r.fn;
    else if (said) ++r.fp;
    else ++r.tn;
  }
  r.n_pos = r.tp + r.fn;
  r.n_neg = r.tn + r.fp;
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.specificity = ratio(r.tn, r.tn + r.fp);
  if (std::isnan(r.precision) || std::isnan(r.recall)) {
    r.f1 = std::numeric_limits<double>::quiet_NaN();
  } else if (r.precision + r.recall == 0.0) {
    r.f1 = 0.0;
  } else {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

EvalReport evaluate(std::span<const double> probabilities, std::span<const int> labels, double threshold) {
  std::vector<int> predicted(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) predicted[i] = probabilities[i] >= threshold ? 1 : 0;
  EvalReport r = confusion_metrics(predicted, labels);
  r.roc_auc = roc_auc(probabilities, labels);
  r.threshold = threshold;
  return r;
}

FeatureTable undersample_negatives(const FeatureTable& table, std::uint64_t seed) {
  std::vector<std::size_t> negatives;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.rows()[i].sample.label == 1) ++n_pos;
    else negatives.push_back(i);
  }
  if (negatives.size() < n_pos) {
    throw Error(ErrorKind::Sampling, "cannot undersample: " + std::to_string(negatives.size()) +
                                         " negatives for " + std::to_string(n_pos) + " positives");
  }
  std::vector<char> keep(table.size(), 0);
  for (std::size_t i = 0; i < table.size(); ++i) keep[i] = table.rows()[i].sample.label == 1 ? 1 : 0;
  if (negatives.size() == n_pos) {
    for (std::size_t i : negatives) keep[i] = 1;
  } else {
    Rng rng(seed);
    // Partial Fisher-Yates: the first n_pos slots become the sample.
    for (std::size_t k = 0; k < n_pos; ++k) {
      std::swap(negatives[k], negatives[k + rng.index(negatives.size() - k)]);
      keep[negatives[k]] = 1;
    }
  }
  FeatureTable out(table.feature_names());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (keep[i]) out.add(table.rows()[i]);
  }
  return out;
}

Raster predict_grid(const TrainedModel& model, const RasterSet& rasters) {
  std::vector<const Raster*> inputs;
  for (const auto& name : model.feature_names) inputs.push_back(&find_raster(rasters, name));
  if (inputs.empty()) throw Error(ErrorKind::Configuration, "model has no features");
  for (const Raster* r : inputs) require_same_grid(*inputs.front(), *r, "feature rasters");
  Raster out = Raster::like(*inputs.front(), kDefaultNodata);
  std::vector<double> x(inputs.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    bool valid = true;
    for (std::size_t j = 0; j < inputs.size() && valid; ++j) {
      valid = !inputs[j]->is_nodata(i);
      x[j] = (*inputs[j])[i];
    }
    out[i] = valid ? model.predict_proba(x) : out.nodata();
  }
  return out;
}

namespace {

std::string format_real(double v) {
  if (std::isnan(v)) return "nodata";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& text) {
  if (text == "nodata") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument(text);
  return v;
}

}  // namespace

void write_eval_report(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "roc_auc = " << format_real(r.roc_auc) << '\n'
      << "recall = " << format_real(r.recall) << '\n'
      << "precision = " << format_real(r.precision) << '\n'
      << "specificity = " << format_real(r.specificity) << '\n'
      << "f1 = " << format_real(r.f1) << '\n'
      << "tp = " << r.tp << '\n'
      << "fp = " << r.fp << '\n'
      << "tn = " << r.tn << '\n'
      << "fn = " << r.fn << '\n'
      << "n_pos = " << r.n_pos << '\n'
      << "n_neg = " << r.n_neg << '\n'
      << "threshold = " << format_real(r.threshold) << '\n'
      << "seed = " << r.seed << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

EvalReport read_eval_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::Parse, path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  try {
    EvalReport r;
    r.roc_auc = parse_real(get("roc_auc"));
    r.recall = parse_real(get("recall"));
    r.precision = parse_real(get("precision"));
    r.specificity = parse_real(get("specificity"));
    r.f1 = parse_real(get("f1"));
    r.tp = std::stoull(get("tp"));
    r.fp = std::stoull(get("fp"));
    r.tn = std::stoull(get("tn"));
    r.fn = std::stoull(get("fn"));
    r.n_pos = std::stoull(get("n_pos"));
    r.n_neg = std::stoull(get("n_neg"));
    r.threshold = parse_real(get("threshold"));
    r.seed = std::stoull(get("seed"));
    return r;
  } catch (const std::logic_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": bad value (" + e.what() + ")");
  }
}

void write_roc_curve(const std::vector<RocPoint>& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve) {
    out << (std::isinf(p.threshold) ? std::string("inf") : format_real(p.threshold)) << ',' << format_real(p.fpr)
        << ',' << format_real(p.tpr) << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

void write_probability_png(const Raster& probability, const std::filesystem::path& path) {
  if (probability.empty()) throw Error(ErrorKind::EmptyInput, "cannot render an empty raster");
  // Allocated before setjmp so a libpng longjmp skips no destructor.
  std::vector<png_byte> row(probability.cols() * 2);
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error(ErrorKind::Io, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorKind::Io, "libpng failed writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(probability.cols()), static_cast<png_uint_32>(probability.rows()),
               8, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < probability.rows(); ++r) {
    for (std::size_t c = 0; c < probability.cols(); ++c) {
      if (probability.is_nodata(r, c)) {
        row[2 * c] = 0;
        row[2 * c + 1] = 0;
      } else {
        const double p = std::clamp(probability(r, c), 0.0, 1.0);
        row[2 * c] = static_cast<png_byte>(std::lround(p * 255.0));
        row[2 * c + 1] = 255;
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace topo
