#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "topo/learn.hpp"
#include "topo/raster.hpp"
#include "topo/sampling.hpp"

namespace topo {

/// Mann-Whitney AUC with midranks for ties. Needs both classes.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double threshold;  // predicted positive when score >= threshold
  double fpr;
  double tpr;
};

/// One point per distinct score, from the highest threshold down, plus the
/// (inf, 0, 0) origin.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
  double roc_auc = std::numeric_limits<double>::quiet_NaN();
  double recall = std::numeric_limits<double>::quiet_NaN();
  double precision = std::numeric_limits<double>::quiet_NaN();  // NaN when tp + fp == 0
  double specificity = std::numeric_limits<double>::quiet_NaN();
  double f1 = std::numeric_limits<double>::quiet_NaN();
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t n_pos = 0, n_neg = 0;
  double threshold = 0.5;
  std::uint64_t seed = 0;

  bool operator==(const EvalReport&) const;
};

/// Counts and ratios from 0/1 predictions. Undefined ratios are NaN.
EvalReport confusion_metrics(std::span<const int> predictions, std::span<const int> labels);

/// Threshold metrics at `threshold` plus the AUC of the probabilities.
EvalReport evaluate(std::span<const double> probabilities, std::span<const int> labels, double threshold = 0.5);

/// Keeps every positive and a seeded uniform sample of as many negatives,
/// in their original order.
FeatureTable undersample_negatives(const FeatureTable& table, std::uint64_t seed);

/// Per-cell probability; nodata wherever any input raster is nodata.
Raster predict_grid(const TrainedModel& model, const RasterSet& rasters);

/// `key = value` lines; NaN ratios are written as `nodata`.
void write_eval_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_eval_report(const std::filesystem::path& path);

void write_roc_curve(const std::vector<RocPoint>& curve, const std::filesystem::path& path);

/// 8-bit grayscale with alpha: probability 0 is black, 1 is white, nodata
/// is transparent.
void write_probability_png(const Raster& probability, const std::filesystem::path& path);

}  // namespace topo
