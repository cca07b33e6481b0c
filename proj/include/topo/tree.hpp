#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "topo/random.hpp"

namespace topo {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // rows with x[feature] <= threshold
  int right = -1;
  double value = 0.0;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }

  int leaf_index(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return nodes_[static_cast<std::size_t>(leaf_index(x))].value; }
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
};

enum class SplitMode {
  BestMidpoint,     // every midpoint between sorted distinct values
  RandomThreshold,  // `random_thresholds` uniform draws in (min, max) per feature
};

struct TreeParams {
  int max_depth = -1;  // -1 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // features tried per split; 0 = all
  SplitMode mode = SplitMode::BestMidpoint;
  int random_thresholds = 1;
};

/// Greedy CART on weighted targets. The split score S_L^2/W_L + S_R^2/W_R
/// (S = weighted target sum, W = weight) is the weighted Gini decrease for
/// 0/1 targets and the squared-error decrease for real targets, so one
/// builder serves classification and boosting. Leaves hold S/W: the weighted
/// positive fraction for 0/1 targets. Zero-gain splits are allowed so
/// interactions such as XOR can be found.
DecisionTree fit_tree(const Eigen::MatrixXd& x, std::span<const double> target, std::span<const double> weight,
                      std::span<const std::size_t> rows, const TreeParams& params, Rng& rng);

}  // namespace topo
