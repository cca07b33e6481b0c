#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topo/sampling.hpp"

namespace topo {

struct UnivariateFit {
  double coef = 0.0;     // slope on the standardized feature
  double std_error = 0.0;
  double z = 0.0;
  double p_value = 1.0;     // two-sided Wald
  double lr_p_value = 1.0;  // likelihood-ratio test against the intercept-only model
  bool separated = false;
  int iterations = 0;
};

/// Intercept + slope logistic regression of `labels` on the standardized
/// feature, fitted by IRLS. Perfectly separated data is flagged and gets
/// P = 0. Requires at least two samples of each class.
UnivariateFit univariate_logistic(std::span<const double> feature, std::span<const int> labels);

/// Sample Pearson correlation; NaN when either column has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Symmetric matrix with unit diagonal; NaN off-diagonal entries for
/// zero-variance columns.
Eigen::MatrixXd pearson_matrix(const FeatureTable& table);

/// Mutual information (nats) between the feature discretized into at most
/// `bins` equal-frequency bins (ties kept together) and the binary label.
double mutual_information(std::span<const double> feature, std::span<const int> labels, int bins = 10);

/// Shannon entropy (nats) of the label distribution.
double label_entropy(std::span<const int> labels);

/// Walks pairs by descending |r| and, for every pair above the threshold with
/// both members still present, drops the one with lower MI.
std::vector<std::string> redundancy_filter(const std::vector<std::string>& names, const Eigen::MatrixXd& r,
                                           std::span<const double> mi, double r_threshold = 0.85);

struct FeatureScreen {
  std::string name;
  UnivariateFit fit;
  double mutual_information = 0.0;
};

struct ScreeningOptions {
  double p_threshold = 0.05;
  double r_threshold = 0.85;
  int bins = 10;
  std::vector<std::string> forced;  // when set, selection is exactly this list
};

struct ScreeningReport {
  std::vector<FeatureScreen> features;
  Eigen::MatrixXd pearson;
  std::vector<std::string> significant;
  std::vector<std::string> selected;
  ScreeningOptions options;
};

ScreeningReport screen_features(const FeatureTable& table, const ScreeningOptions& options = {});

/// `key = value` records, one per line.
void write_screening_report(const ScreeningReport& report, const std::filesystem::path& path);

}  // namespace topo
