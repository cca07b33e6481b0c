#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "topo/sampling.hpp"
#include "topo/tree.hpp"

namespace topo {

enum class ModelFamily { Logistic, LinearSvm, RandomForest, ExtraTrees, GradientBoosting };

std::string to_string(ModelFamily family);
/// Accepts the snake_case names used by `to_string`.
ModelFamily parse_family(std::string_view text);

struct ClassWeights {
  double positive = 1.0;
  double negative = 1.0;
  double of(int label) const { return label == 1 ? positive : negative; }
};

/// w_c = n / (2 n_c). A single class raises ErrorKind::Class.
ClassWeights balanced_weights(std::span<const int> labels);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // population sd, 1 for constant columns

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply(std::span<const double> x) const;
};

/// Dense design matrix with 0/1 targets and per-row class weights.
struct TrainingData {
  Eigen::MatrixXd x;
  std::vector<double> y;
  std::vector<double> w;

  std::size_t rows() const { return y.size(); }
};

TrainingData training_data(const FeatureTable& table, const ClassWeights& weights);

/// Weighted-mean negative log-likelihood plus l2/2 |w|^2 over
/// theta = (w_1..w_k, bias). The bias is not penalized.
class LogisticObjective {
 public:
  LogisticObjective(const Eigen::MatrixXd& x, std::span<const double> y, std::span<const double> w, double l2);

  double value(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const;

 private:
  const Eigen::MatrixXd& x_;
  std::span<const double> y_;
  std::span<const double> w_;
  double l2_;
  double w_total_ = 0.0;
};

struct LogisticOptions {
  double l2 = 1e-4;
  int max_iterations = 200;
  double tolerance = 1e-8;  // on the gradient norm
};

struct SvmOptions {
  double l2 = 1e-4;
  int epochs = 50;
  double initial_step = 0.5;
  std::uint64_t seed = 0;
};

struct ForestOptions {
  int n_trees = 200;
  std::size_t max_features = 0;  // 0 = round(sqrt(k))
  int max_depth = -1;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;
};

struct BoostingOptions {
  int n_trees = 200;
  int depth = 3;
  double learning_rate = 0.1;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  ModelFamily family = ModelFamily::Logistic;
  std::vector<std::string> feature_names;

  // Linear families operate on standardized inputs.
  Standardizer standardizer;
  std::vector<double> weights;
  double bias = 0.0;
  double platt_a = 1.0;  // SVM: p = sigmoid(a * score + b)
  double platt_b = 0.0;

  // Ensembles.
  std::vector<DecisionTree> trees;
  double initial_score = 0.0;
  double learning_rate = 1.0;

  /// Objective per Newton iteration (logistic), per epoch at the averaged
  /// iterate (SVM) or weighted training deviance per stage (boosting).
  std::vector<double> history;

  std::size_t dimension() const { return feature_names.size(); }

  /// Linear score w.z + b, or the boosted log-odds, or the forest mean.
  double decision_score(std::span<const double> x) const;
  /// Shape error when `x` does not match the feature list.
  double predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
  /// Columns are looked up by name; a missing column is a configuration error.
  std::vector<double> predict_proba(const FeatureTable& table) const;
};

TrainedModel fit_logistic(const FeatureTable& train, const ClassWeights& weights, const LogisticOptions& options = {});
TrainedModel fit_linear_svm(const FeatureTable& train, const ClassWeights& weights, const SvmOptions& options = {});
TrainedModel fit_random_forest(const FeatureTable& train, const ClassWeights& weights, const ForestOptions& options = {});
TrainedModel fit_extra_trees(const FeatureTable& train, const ClassWeights& weights, const ForestOptions& options = {});
TrainedModel fit_gradient_boosting(const FeatureTable& train, const ClassWeights& weights,
                                   const BoostingOptions& options = {});

/// Options for every family in one place, as read from a config file.
struct ModelOptions {
  LogisticOptions logistic;
  SvmOptions svm;
  ForestOptions forest;
  BoostingOptions boosting;
};

TrainedModel fit_model(ModelFamily family, const FeatureTable& train, const ClassWeights& weights,
                       const ModelOptions& options);

/// JSON container tagged with a magic string and format version.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

double sigmoid(double z);

}  // namespace topo
