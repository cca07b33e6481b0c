#include "topo/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace topo {

int DecisionTree::leaf_index(std::span<const double> x) const {
  int node = 0;
  while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return node;
}

int DecisionTree::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes_[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -std::numeric_limits<double>::infinity();
};

class Builder {
 public:
  Builder(const Eigen::MatrixXd& x, std::span<const double> target, std::span<const double> weight,
          const TreeParams& params, Rng& rng)
      : x_(x), target_(target), weight_(weight), params_(params), rng_(rng),
        features_(static_cast<std::size_t>(x.cols())) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(rows, 0, rows.size(), 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  int grow(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double w = 0.0, s = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i = rows[k];
      w += weight_[i];
      s += weight_[i] * target_[i];
      lo = std::min(lo, target_[i]);
      hi = std::max(hi, target_[i]);
    }
    nodes_[static_cast<std::size_t>(id)].value = w > 0.0 ? s / w : 0.0;

    const std::size_t n = end - begin;
    const bool pure = lo == hi;
    const bool deep = params_.max_depth >= 0 && depth >= params_.max_depth;
    if (pure || deep || n < 2 * std::max<std::size_t>(params_.min_samples_leaf, 1)) return id;

    const Split split = find_split(rows, begin, end, w, s);
    if (split.feature < 0) return id;

    const auto mid = std::partition(rows.begin() + static_cast<long>(begin), rows.begin() + static_cast<long>(end),
                                    [&](std::size_t i) { return x_(static_cast<Eigen::Index>(i), split.feature) <= split.threshold; });
    const std::size_t cut = static_cast<std::size_t>(mid - rows.begin());
    const int left = grow(rows, begin, cut, depth + 1);
    const int right = grow(rows, cut, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  Split find_split(const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end, double w_total,
                   double s_total) {
    const std::size_t k = features_.size();
    const std::size_t tries = params_.max_features == 0 ? k : std::min(params_.max_features, k);
    // Partial Fisher-Yates: the first `tries` entries are this node's sample.
    // If none of them splits, the remaining features are tried in turn.
    for (std::size_t i = 0; i < tries && tries < k; ++i) {
      std::swap(features_[i], features_[i + rng_.index(k - i)]);
    }
    Split best;
    for (std::size_t fi = 0; fi < k; ++fi) {
      if (fi >= tries && best.feature >= 0) break;
      const int f = static_cast<int>(features_[fi]);
      const Split candidate = params_.mode == SplitMode::BestMidpoint
                                  ? best_midpoint(rows, begin, end, f, w_total, s_total)
                                  : random_threshold(rows, begin, end, f, w_total, s_total);
      if (candidate.feature >= 0 && candidate.score > best.score) best = candidate;
    }
    return best;
  }

  Split best_midpoint(const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end, int f,
                      double w_total, double s_total) {
    sorted_.clear();
    for (std::size_t k = begin; k < end; ++k) {
      sorted_.emplace_back(x_(static_cast<Eigen::Index>(rows[k]), f), rows[k]);
    }
    std::sort(sorted_.begin(), sorted_.end());
    const std::size_t n = sorted_.size();
    const std::size_t min_leaf = std::max<std::size_t>(params_.min_samples_leaf, 1);
    Split best;
    double wl = 0.0, sl = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const std::size_t i = sorted_[k].second;
      wl += weight_[i];
      sl += weight_[i] * target_[i];
      const double a = sorted_[k].first, b = sorted_[k + 1].first;
      if (a == b) continue;
      if (k + 1 < min_leaf || n - k - 1 < min_leaf) continue;
      const double wr = w_total - wl, sr = s_total - sl;
      if (!(wl > 0.0) || !(wr > 0.0)) continue;
      const double score = sl * sl / wl + sr * sr / wr;
      if (score > best.score) {
        double t = a + (b - a) / 2.0;
        if (!(t < b)) t = a;
        best = {f, t, score};
      }
    }
    return best;
  }

  Split random_threshold(const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end, int f,
                         double w_total, double s_total) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = begin; k < end; ++k) {
      const double v = x_(static_cast<Eigen::Index>(rows[k]), f);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    Split best;
    if (!(hi > lo)) return best;
    const std::size_t min_leaf = std::max<std::size_t>(params_.min_samples_leaf, 1);
    for (int draw = 0; draw < std::max(1, params_.random_thresholds); ++draw) {
      double t = rng_.uniform(lo, hi);
      if (!(t < hi)) t = lo;
      double wl = 0.0, sl = 0.0;
      std::size_t nl = 0;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = rows[k];
        if (x_(static_cast<Eigen::Index>(i), f) <= t) {
          wl += weight_[i];
          sl += weight_[i] * target_[i];
          ++nl;
        }
      }
      const std::size_t nr = (end - begin) - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double wr = w_total - wl, sr = s_total - sl;
      if (!(wl > 0.0) || !(wr > 0.0)) continue;
      const double score = sl * sl / wl + sr * sr / wr;
      if (score > best.score) best = {f, t, score};
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const double> target_;
  std::span<const double> weight_;
  const TreeParams& params_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, std::size_t>> sorted_;
};

}  // namespace

DecisionTree fit_tree(const Eigen::MatrixXd& x, std::span<const double> target, std::span<const double> weight,
                      std::span<const std::size_t> rows, const TreeParams& params, Rng& rng) {
  Builder builder(x, target, weight, params, rng);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

}  // namespace topo
