#include "topo/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "topo/error.hpp"
#include "topo/random.hpp"

namespace topo {

namespace {

constexpr const char* kModelMagic = "topo-model";
constexpr int kModelVersion = 1;

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::Logistic: return "logistic";
    case ModelFamily::LinearSvm: return "linear_svm";
    case ModelFamily::RandomForest: return "random_forest";
    case ModelFamily::ExtraTrees: return "extra_trees";
    case ModelFamily::GradientBoosting: return "gradient_boosting";
  }
  return "unknown";
}

ModelFamily parse_family(std::string_view text) {
  for (auto f : {ModelFamily::Logistic, ModelFamily::LinearSvm, ModelFamily::RandomForest, ModelFamily::ExtraTrees,
                 ModelFamily::GradientBoosting}) {
    if (text == to_string(f)) return f;
  }
  throw Error(ErrorKind::Configuration, "unknown model family '" + std::string(text) + "'");
}

ClassWeights balanced_weights(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t n = labels.size();
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::Class, "balanced weights need both classes (" + std::to_string(pos) + " positive, " +
                                      std::to_string(neg) + " negative)");
  }
  return {static_cast<double>(n) / (2.0 * static_cast<double>(pos)),
          static_cast<double>(n) / (2.0 * static_cast<double>(neg))};
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).sum() / n;
    const double var = (x.col(j).array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    s.mean.push_back(mean);
    s.scale.push_back(sd > 0.0 && std::isfinite(sd) ? sd : 1.0);
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto u = static_cast<std::size_t>(j);
    z.col(j) = (x.col(j).array() - mean[u]) / scale[u];
  }
  return z;
}

Eigen::VectorXd Standardizer::apply(std::span<const double> x) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) z(static_cast<Eigen::Index>(j)) = (x[j] - mean[j]) / scale[j];
  return z;
}

TrainingData training_data(const FeatureTable& table, const ClassWeights& weights) {
  if (table.empty()) throw Error(ErrorKind::EmptyInput, "training table has no rows");
  const auto n = static_cast<Eigen::Index>(table.size());
  const auto k = static_cast<Eigen::Index>(table.feature_names().size());
  TrainingData data;
  data.x.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows()[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) data.x(i, j) = row.values[static_cast<std::size_t>(j)];
    data.y.push_back(row.sample.label == 1 ? 1.0 : 0.0);
    data.w.push_back(weights.of(row.sample.label));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Logistic objective and Newton solver

LogisticObjective::LogisticObjective(const Eigen::MatrixXd& x, std::span<const double> y, std::span<const double> w,
                                     double l2)
    : x_(x), y_(y), w_(w), l2_(l2) {
  for (double v : w_) w_total_ += v;
}

double LogisticObjective::value(const Eigen::VectorXd& theta) const {
  const Eigen::Index k = x_.cols();
  const Eigen::VectorXd eta = (x_ * theta.head(k)).array() + theta(k);
  double loss = 0.0;
  for (std::size_t i = 0; i < y_.size(); ++i) {
    const double z = eta(static_cast<Eigen::Index>(i));
    loss += w_[i] * (softplus(z) - y_[i] * z);
  }
  return loss / w_total_ + 0.5 * l2_ * theta.head(k).squaredNorm();
}

Eigen::VectorXd LogisticObjective::gradient(const Eigen::VectorXd& theta) const {
  const Eigen::Index k = x_.cols();
  const Eigen::VectorXd eta = (x_ * theta.head(k)).array() + theta(k);
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    resid(i) = w_[u] * (sigmoid(eta(i)) - y_[u]) / w_total_;
  }
  Eigen::VectorXd g(k + 1);
  g.head(k) = x_.transpose() * resid + l2_ * theta.head(k);
  g(k) = resid.sum();
  return g;
}

Eigen::MatrixXd LogisticObjective::hessian(const Eigen::VectorXd& theta) const {
  const Eigen::Index k = x_.cols();
  const Eigen::Index n = x_.rows();
  const Eigen::VectorXd eta = (x_ * theta.head(k)).array() + theta(k);
  Eigen::MatrixXd aug(n, k + 1);
  aug.leftCols(k) = x_;
  aug.col(k).setOnes();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = sigmoid(eta(i));
    d(i) = w_[static_cast<std::size_t>(i)] * p * (1.0 - p) / w_total_;
  }
  Eigen::MatrixXd h = aug.transpose() * d.asDiagonal() * aug;
  for (Eigen::Index j = 0; j < k; ++j) h(j, j) += l2_;
  return h;
}

namespace {

Eigen::VectorXd newton_logistic(const LogisticObjective& objective, Eigen::Index dims, const LogisticOptions& options,
                                std::vector<double>& history) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dims + 1);
  double value = objective.value(theta);
  double grad_norm = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    history.push_back(value);
    const Eigen::VectorXd g = objective.gradient(theta);
    grad_norm = g.norm();
    if (grad_norm < options.tolerance) return theta;
    const Eigen::VectorXd step = objective.hessian(theta).ldlt().solve(-g);
    const double slope = g.dot(step);
    double t = 1.0;
    Eigen::VectorXd next = theta + step;
    double next_value = objective.value(next);
    // Close to the optimum the objective changes below rounding, so the
    // full Newton step is taken as is.
    while (grad_norm > 1e-6 && next_value > value + 1e-4 * t * slope && t > 1e-10) {
      t *= 0.5;
      next = theta + t * step;
      next_value = objective.value(next);
    }
    theta = next;
    value = next_value;
  }
  const Eigen::VectorXd g = objective.gradient(theta);
  if (g.norm() < options.tolerance) return theta;
  std::ostringstream msg;
  msg << "logistic fit did not converge in " << options.max_iterations << " iterations (gradient norm " << g.norm()
      << ")";
  throw Error(ErrorKind::Convergence, msg.str());
}

void check_classes(const TrainingData& data) {
  std::size_t pos = 0;
  for (double y : data.y) pos += y > 0.5 ? 1 : 0;
  if (pos == 0 || pos == data.rows()) throw Error(ErrorKind::Class, "training table must contain both classes");
}

}  // namespace

TrainedModel fit_logistic(const FeatureTable& train, const ClassWeights& weights, const LogisticOptions& options) {
  TrainingData data = training_data(train, weights);
  check_classes(data);
  TrainedModel model;
  model.family = ModelFamily::Logistic;
  model.feature_names = train.feature_names();
  model.standardizer = Standardizer::fit(data.x);
  const Eigen::MatrixXd z = model.standardizer.apply(data.x);
  const LogisticObjective objective(z, data.y, data.w, options.l2);
  const Eigen::VectorXd theta = newton_logistic(objective, z.cols(), options, model.history);
  model.weights.assign(theta.data(), theta.data() + z.cols());
  model.bias = theta(z.cols());
  return model;
}

// ---------------------------------------------------------------------------
// Linear SVM

namespace {

double svm_objective(const Eigen::MatrixXd& z, const TrainingData& data, const Eigen::VectorXd& w, double b,
                     double l2, double w_total) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double sign = data.y[u] > 0.5 ? 1.0 : -1.0;
    loss += data.w[u] * std::max(0.0, 1.0 - sign * (z.row(i).dot(w) + b));
  }
  return loss / w_total + 0.5 * l2 * w.squaredNorm();
}

}  // namespace

TrainedModel fit_linear_svm(const FeatureTable& train, const ClassWeights& weights, const SvmOptions& options) {
  TrainingData data = training_data(train, weights);
  check_classes(data);
  if (options.epochs < 1) throw Error(ErrorKind::Parameter, "svm needs at least one epoch");
  TrainedModel model;
  model.family = ModelFamily::LinearSvm;
  model.feature_names = train.feature_names();
  model.standardizer = Standardizer::fit(data.x);
  const Eigen::MatrixXd z = model.standardizer.apply(data.x);
  const std::size_t n = data.rows();
  const Eigen::Index k = z.cols();

  double w_total = 0.0;
  for (double v : data.w) w_total += v;
  const double mean_w = w_total / static_cast<double>(n);

  // Each epoch runs a shuffled subgradient pass from the current point and
  // proposes the average of its iterates. A proposal that raises the
  // objective is discarded and the step halved, so the recorded objective
  // never increases.
  Eigen::VectorXd w_cur = Eigen::VectorXd::Zero(k);
  double b_cur = 0.0;
  double current = svm_objective(z, data, w_cur, b_cur, options.l2, w_total);
  double scale = 1.0;
  Rng rng(options.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double step = scale * options.initial_step / std::sqrt(1.0 + epoch);
    Eigen::VectorXd w = w_cur, w_avg = Eigen::VectorXd::Zero(k);
    double b = b_cur, b_avg = 0.0;
    rng.shuffle(order);
    std::size_t t = 0;
    for (std::size_t i : order) {
      const auto row = static_cast<Eigen::Index>(i);
      const double sign = data.y[i] > 0.5 ? 1.0 : -1.0;
      const double c = data.w[i] / mean_w;
      const bool active = sign * (z.row(row).dot(w) + b) < 1.0;
      w *= 1.0 - step * options.l2;
      if (active) {
        w += step * c * sign * z.row(row).transpose();
        b += step * c * sign;
      }
      ++t;
      const double alpha = 1.0 / static_cast<double>(t);
      w_avg += alpha * (w - w_avg);
      b_avg += alpha * (b - b_avg);
    }
    const double proposed = svm_objective(z, data, w_avg, b_avg, options.l2, w_total);
    if (!std::isfinite(proposed)) throw Error(ErrorKind::Convergence, "svm objective diverged");
    if (proposed <= current) {
      w_cur = w_avg;
      b_cur = b_avg;
      current = proposed;
    } else {
      scale *= 0.5;
    }
    model.history.push_back(current);
  }
  const Eigen::VectorXd& w_avg = w_cur;
  const double b_avg = b_cur;
  model.weights.assign(w_avg.data(), w_avg.data() + k);
  model.bias = b_avg;

  // One-dimensional logistic fit of labels on training scores.
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(n), 1);
  scores.col(0) = z * w_avg;
  scores.array() += b_avg;
  const LogisticObjective calib(scores, data.y, data.w, 1e-4);
  std::vector<double> ignored;
  const Eigen::VectorXd ab = newton_logistic(calib, 1, LogisticOptions{}, ignored);
  model.platt_a = ab(0);
  model.platt_b = ab(1);
  return model;
}

// ---------------------------------------------------------------------------
// Tree ensembles

namespace {

std::size_t sqrt_features(std::size_t requested, std::size_t k) {
  if (requested > 0) return std::min(requested, k);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(k)))));
}

TrainedModel fit_forest(const FeatureTable& train, const ClassWeights& weights, const ForestOptions& options,
                        bool extra) {
  const TrainingData data = training_data(train, weights);
  if (options.n_trees < 1) throw Error(ErrorKind::Parameter, "forest needs at least one tree");
  TrainedModel model;
  model.family = extra ? ModelFamily::ExtraTrees : ModelFamily::RandomForest;
  model.feature_names = train.feature_names();
  const std::size_t n = data.rows();
  TreeParams params;
  params.max_depth = options.max_depth;
  params.min_samples_leaf = options.min_samples_leaf;
  params.max_features = sqrt_features(options.max_features, static_cast<std::size_t>(data.x.cols()));
  params.mode = extra ? SplitMode::RandomThreshold : SplitMode::BestMidpoint;
  params.random_thresholds = 1;

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (int t = 0; t < options.n_trees; ++t) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(t)));
    if (extra) {
      model.trees.push_back(fit_tree(data.x, data.y, data.w, all, params, rng));
      continue;
    }
    std::vector<double> count(n, 0.0);
    for (std::size_t draw = 0; draw < n; ++draw) count[rng.index(n)] += 1.0;
    std::vector<std::size_t> rows;
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (count[i] > 0.0) {
        rows.push_back(i);
        w[i] = data.w[i] * count[i];
      }
    }
    model.trees.push_back(fit_tree(data.x, data.y, w, rows, params, rng));
  }
  return model;
}

}  // namespace

TrainedModel fit_random_forest(const FeatureTable& train, const ClassWeights& weights, const ForestOptions& options) {
  return fit_forest(train, weights, options, false);
}

TrainedModel fit_extra_trees(const FeatureTable& train, const ClassWeights& weights, const ForestOptions& options) {
  return fit_forest(train, weights, options, true);
}

TrainedModel fit_gradient_boosting(const FeatureTable& train, const ClassWeights& weights,
                                   const BoostingOptions& options) {
  const TrainingData data = training_data(train, weights);
  check_classes(data);
  if (options.n_trees < 0) throw Error(ErrorKind::Parameter, "boosting needs a non-negative tree count");
  if (!(options.learning_rate > 0.0)) throw Error(ErrorKind::Parameter, "learning rate must be positive");
  TrainedModel model;
  model.family = ModelFamily::GradientBoosting;
  model.feature_names = train.feature_names();
  model.learning_rate = options.learning_rate;

  const std::size_t n = data.rows();
  double w_total = 0.0, w_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w_total += data.w[i];
    w_pos += data.w[i] * data.y[i];
  }
  model.initial_score = std::log(w_pos / (w_total - w_pos));

  std::vector<double> f(n, model.initial_score), resid(n), hess(n);
  auto deviance = [&] {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += data.w[i] * (softplus(f[i]) - data.y[i] * f[i]);
    return 2.0 * d / w_total;
  };
  model.history.push_back(deviance());

  TreeParams params;
  params.max_depth = options.depth;
  params.min_samples_leaf = options.min_samples_leaf;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<int> leaf(n);

  for (int stage = 0; stage < options.n_trees; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(f[i]);
      resid[i] = data.y[i] - p;
      hess[i] = p * (1.0 - p);
    }
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(stage)));
    DecisionTree tree = fit_tree(data.x, resid, data.w, all, params, rng);
    auto& nodes = tree.nodes();
    std::vector<double> num(nodes.size(), 0.0), den(nodes.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd row = data.x.row(static_cast<Eigen::Index>(i));
      leaf[i] = tree.leaf_index(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
      num[static_cast<std::size_t>(leaf[i])] += data.w[i] * resid[i];
      den[static_cast<std::size_t>(leaf[i])] += data.w[i] * hess[i];
    }
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (nodes[j].feature >= 0) continue;
      nodes[j].value = den[j] > 1e-150 ? num[j] / den[j] : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) f[i] += options.learning_rate * nodes[static_cast<std::size_t>(leaf[i])].value;
    model.trees.push_back(std::move(tree));
    model.history.push_back(deviance());
  }
  return model;
}

TrainedModel fit_model(ModelFamily family, const FeatureTable& train, const ClassWeights& weights,
                       const ModelOptions& options) {
  switch (family) {
    case ModelFamily::Logistic: return fit_logistic(train, weights, options.logistic);
    case ModelFamily::LinearSvm: return fit_linear_svm(train, weights, options.svm);
    case ModelFamily::RandomForest: return fit_random_forest(train, weights, options.forest);
    case ModelFamily::ExtraTrees: return fit_extra_trees(train, weights, options.forest);
    case ModelFamily::GradientBoosting: return fit_gradient_boosting(train, weights, options.boosting);
  }
  throw Error(ErrorKind::InternalInvariant, "unhandled model family");
}

// ---------------------------------------------------------------------------
// Prediction

double TrainedModel::decision_score(std::span<const double> x) const {
  if (x.size() != feature_names.size()) {
    throw Error(ErrorKind::Shape, "model expects " + std::to_string(feature_names.size()) + " features, got " +
                                      std::to_string(x.size()));
  }
  switch (family) {
    case ModelFamily::Logistic:
    case ModelFamily::LinearSvm: {
      double s = bias;
      for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * (x[j] - standardizer.mean[j]) / standardizer.scale[j];
      return s;
    }
    case ModelFamily::RandomForest:
    case ModelFamily::ExtraTrees: {
      double s = 0.0;
      for (const auto& t : trees) s += t.predict(x);
      return trees.empty() ? 0.5 : s / static_cast<double>(trees.size());
    }
    case ModelFamily::GradientBoosting: {
      double s = initial_score;
      for (const auto& t : trees) s += learning_rate * t.predict(x);
      return s;
    }
  }
  throw Error(ErrorKind::InternalInvariant, "unhandled model family");
}

double TrainedModel::predict_proba(std::span<const double> x) const {
  const double s = decision_score(x);
  switch (family) {
    case ModelFamily::Logistic: return sigmoid(s);
    case ModelFamily::LinearSvm: return sigmoid(platt_a * s + platt_b);
    case ModelFamily::RandomForest:
    case ModelFamily::ExtraTrees: return std::clamp(s, 0.0, 1.0);
    case ModelFamily::GradientBoosting: return sigmoid(s);
  }
  return s;
}

std::vector<double> TrainedModel::predict_proba(const FeatureTable& table) const {
  std::vector<std::size_t> columns;
  for (const auto& name : feature_names) columns.push_back(table.index_of(name));
  std::vector<double> out;
  out.reserve(table.size());
  std::vector<double> x(columns.size());
  for (const auto& row : table.rows()) {
    for (std::size_t j = 0; j < columns.size(); ++j) x[j] = row.values[columns[j]];
    out.push_back(predict_proba(x));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json tree_to_json(const DecisionTree& tree) {
  json j;
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value;
  for (const auto& n : tree.nodes()) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  j["feature"] = feature;
  j["threshold"] = threshold;
  j["left"] = left;
  j["right"] = right;
  j["value"] = value;
  return j;
}

DecisionTree tree_from_json(const json& j, std::size_t dims) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const std::size_t m = feature.size();
  if (m == 0 || threshold.size() != m || left.size() != m || right.size() != m || value.size() != m) {
    throw Error(ErrorKind::Format, "tree arrays have inconsistent lengths");
  }
  std::vector<TreeNode> nodes(m);
  for (std::size_t i = 0; i < m; ++i) {
    nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
    if (feature[i] >= 0) {
      const bool ok = static_cast<std::size_t>(feature[i]) < dims && left[i] > static_cast<int>(i) &&
                      right[i] > static_cast<int>(i) && static_cast<std::size_t>(left[i]) < m &&
                      static_cast<std::size_t>(right[i]) < m;
      if (!ok) throw Error(ErrorKind::Format, "tree node " + std::to_string(i) + " is malformed");
    }
  }
  return DecisionTree(std::move(nodes));
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  json j;
  j["magic"] = kModelMagic;
  j["version"] = kModelVersion;
  j["family"] = to_string(model.family);
  j["feature_names"] = model.feature_names;
  j["standardizer"] = {{"mean", model.standardizer.mean}, {"scale", model.standardizer.scale}};
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["platt"] = {model.platt_a, model.platt_b};
  j["initial_score"] = model.initial_score;
  j["learning_rate"] = model.learning_rate;
  j["history"] = model.history;
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);

  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write model " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing model " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open model " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": not a model file (" + e.what() + ")");
  }
  if (!j.is_object() || !j.contains("magic") || j["magic"] != kModelMagic) {
    throw Error(ErrorKind::Format, path.string() + ": missing model magic");
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kModelVersion) {
      throw Error(ErrorKind::Format, path.string() + ": unsupported model version " + std::to_string(version));
    }
    TrainedModel model;
    model.family = parse_family(j.at("family").get<std::string>());
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    model.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    const auto platt = j.at("platt").get<std::vector<double>>();
    if (platt.size() != 2) throw Error(ErrorKind::Format, "platt parameters must be a pair");
    model.platt_a = platt[0];
    model.platt_b = platt[1];
    model.initial_score = j.at("initial_score").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.history = j.at("history").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) model.trees.push_back(tree_from_json(t, model.feature_names.size()));

    const std::size_t k = model.feature_names.size();
    const bool linear = model.family == ModelFamily::Logistic || model.family == ModelFamily::LinearSvm;
    if (linear && (model.weights.size() != k || model.standardizer.mean.size() != k ||
                   model.standardizer.scale.size() != k)) {
      throw Error(ErrorKind::Format, path.string() + ": linear parameters do not match the feature list");
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Format) throw;
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

}  // namespace topo
