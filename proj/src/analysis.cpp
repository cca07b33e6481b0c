#include "topo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "topo/error.hpp"

namespace topo {

namespace {

void require_two_per_class(std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  for (int y : labels) (y ? pos : neg)++;
  if (pos < 2 || neg < 2) {
    throw Error(ErrorKind::Class, "need at least two samples of each class (got " + std::to_string(pos) +
                                      " positive, " + std::to_string(neg) + " negative)");
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

UnivariateFit univariate_logistic(std::span<const double> feature, std::span<const int> labels) {
  if (feature.size() != labels.size()) throw Error(ErrorKind::Shape, "feature and label lengths differ");
  require_two_per_class(labels);
  const std::size_t n = feature.size();

  const double mu = mean_of(feature);
  double ss = 0.0;
  for (double v : feature) ss += (v - mu) * (v - mu);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  UnivariateFit fit;
  if (!(sd > 0.0)) {
    fit.std_error = std::numeric_limits<double>::infinity();
    return fit;
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (feature[i] - mu) / sd;

  // Complete or quasi-complete separation has no finite MLE.
  double max_neg = -INFINITY, min_neg = INFINITY, max_pos = -INFINITY, min_pos = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i]) {
      max_pos = std::max(max_pos, x[i]);
      min_pos = std::min(min_pos, x[i]);
    } else {
      max_neg = std::max(max_neg, x[i]);
      min_neg = std::min(min_neg, x[i]);
    }
  }
  if (max_neg <= min_pos || max_pos <= min_neg) {
    fit.separated = true;
    fit.coef = (max_neg <= min_pos ? 1.0 : -1.0) * std::numeric_limits<double>::infinity();
    fit.std_error = std::numeric_limits<double>::infinity();
    fit.z = fit.coef;
    fit.p_value = 0.0;
    fit.lr_p_value = 0.0;
    return fit;
  }

  const double prior = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / static_cast<double>(n);
  double b0 = std::log(prior / (1.0 - prior));
  double b1 = 0.0;
  double i00 = 0, i01 = 0, i11 = 0;
  for (fit.iterations = 1; fit.iterations <= 100; ++fit.iterations) {
    double g0 = 0, g1 = 0;
    i00 = i01 = i11 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x[i])));
      const double w = p * (1.0 - p);
      g0 += labels[i] - p;
      g1 += (labels[i] - p) * x[i];
      i00 += w;
      i01 += w * x[i];
      i11 += w * x[i] * x[i];
    }
    const double det = i00 * i11 - i01 * i01;
    if (!(det > 0.0)) break;
    const double d0 = (i11 * g0 - i01 * g1) / det;
    const double d1 = (i00 * g1 - i01 * g0) / det;
    b0 += d0;
    b1 += d1;
    if (std::max(std::fabs(d0), std::fabs(d1)) < 1e-8) break;
  }
  // Fisher information and log-likelihoods at the final estimate.
  i00 = i01 = i11 = 0;
  double loglik = 0.0;
  const double null_logit = std::log(prior / (1.0 - prior));
  double null_loglik = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = b0 + b1 * x[i];
    const double p = 1.0 / (1.0 + std::exp(-eta));
    const double w = p * (1.0 - p);
    i00 += w;
    i01 += w * x[i];
    i11 += w * x[i] * x[i];
    loglik += labels[i] * eta - std::log1p(std::exp(eta));
    null_loglik += labels[i] * null_logit - std::log1p(std::exp(null_logit));
  }
  fit.lr_p_value = std::erfc(std::sqrt(std::max(0.0, loglik - null_loglik)));
  const double det = i00 * i11 - i01 * i01;
  fit.coef = b1;
  fit.std_error = det > 0.0 ? std::sqrt(i00 / det) : std::numeric_limits<double>::infinity();
  fit.z = fit.coef / fit.std_error;
  fit.p_value = std::erfc(std::fabs(fit.z) / std::sqrt(2.0));
  return fit;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Shape, "pearson: length mismatch");
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Eigen::MatrixXd pearson_matrix(const FeatureTable& table) {
  const std::size_t k = table.feature_names().size();
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < k; ++j) cols.push_back(table.column(j));
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = pearson(cols[i], cols[j]);
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return r;
}

double label_entropy(std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const double n = static_cast<double>(labels.size());
  const double p = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / n;
  double h = 0.0;
  for (double q : {p, 1.0 - p}) {
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

double mutual_information(std::span<const double> feature, std::span<const int> labels, int bins) {
  if (feature.size() != labels.size()) throw Error(ErrorKind::Shape, "mutual_information: length mismatch");
  if (bins < 1) throw Error(ErrorKind::Parameter, "bins must be >= 1");
  const std::size_t n = feature.size();
  if (n < 2) return 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return feature[a] < feature[b]; });

  // A run of equal values goes to the bin of its first rank.
  std::vector<double> joint(static_cast<std::size_t>(bins) * 2, 0.0);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end < n && feature[order[end]] == feature[order[start]]) ++end;
    const auto bin = static_cast<std::size_t>((start * static_cast<std::size_t>(bins)) / n);
    for (std::size_t k = start; k < end; ++k) joint[bin * 2 + (labels[order[k]] ? 1 : 0)] += 1.0;
    start = end;
  }

  const double total = static_cast<double>(n);
  double py[2] = {0, 0};
  for (std::size_t b = 0; b < static_cast<std::size_t>(bins); ++b) {
    py[0] += joint[b * 2];
    py[1] += joint[b * 2 + 1];
  }
  double mi = 0.0;
  for (std::size_t b = 0; b < static_cast<std::size_t>(bins); ++b) {
    const double pb = (joint[b * 2] + joint[b * 2 + 1]) / total;
    for (int y = 0; y < 2; ++y) {
      const double pby = joint[b * 2 + static_cast<std::size_t>(y)] / total;
      if (pby > 0.0) mi += pby * std::log(pby / (pb * (py[y] / total)));
    }
  }
  return std::max(0.0, mi);
}

std::vector<std::string> redundancy_filter(const std::vector<std::string>& names, const Eigen::MatrixXd& r,
                                           std::span<const double> mi, double r_threshold) {
  const std::size_t k = names.size();
  if (static_cast<std::size_t>(r.rows()) != k || static_cast<std::size_t>(r.cols()) != k || mi.size() != k) {
    throw Error(ErrorKind::Shape, "redundancy_filter: inputs disagree in size");
  }
  struct Pair {
    double abs_r;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = std::fabs(r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      if (std::isfinite(v) && v > r_threshold) pairs.push_back({v, i, j});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.abs_r > b.abs_r; });
  std::vector<char> keep(k, 1);
  for (const auto& p : pairs) {
    if (!keep[p.i] || !keep[p.j]) continue;
    keep[mi[p.j] > mi[p.i] ? p.i : p.j] = 0;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (keep[i]) out.push_back(names[i]);
  }
  return out;
}

ScreeningReport screen_features(const FeatureTable& table, const ScreeningOptions& options) {
  const auto labels = table.labels();
  ScreeningReport report;
  report.options = options;
  report.pearson = pearson_matrix(table);
  for (std::size_t j = 0; j < table.feature_names().size(); ++j) {
    const auto column = table.column(j);
    report.features.push_back({table.feature_names()[j], univariate_logistic(column, labels),
                               mutual_information(column, labels, options.bins)});
  }

  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < report.features.size(); ++j) {
    if (report.features[j].fit.p_value < options.p_threshold) {
      idx.push_back(j);
      report.significant.push_back(report.features[j].name);
    }
  }
  if (!options.forced.empty()) {
    for (const auto& name : options.forced) table.index_of(name);
    report.selected = options.forced;
    return report;
  }
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  std::vector<double> mi;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    mi.push_back(report.features[idx[a]].mutual_information);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          report.pearson(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[b]));
    }
  }
  report.selected = redundancy_filter(report.significant, sub, mi, options.r_threshold);
  return report;
}

void write_screening_report(const ScreeningReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
  };
  out << "p_threshold = " << num(report.options.p_threshold) << "\n";
  out << "r_threshold = " << num(report.options.r_threshold) << "\n";
  out << "mi_bins = " << report.options.bins << "\n";
  for (const auto& f : report.features) {
    const std::string key = "feature." + f.name + ".";
    out << key << "coef = " << num(f.fit.coef) << "\n";
    out << key << "stderr = " << num(f.fit.std_error) << "\n";
    out << key << "z = " << num(f.fit.z) << "\n";
    out << key << "p_value = " << num(f.fit.p_value) << "\n";
    out << key << "lr_p_value = " << num(f.fit.lr_p_value) << "\n";
    out << key << "separated = " << (f.fit.separated ? "true" : "false") << "\n";
    out << key << "mutual_information = " << num(f.mutual_information) << "\n";
  }
  for (std::size_t i = 0; i < report.features.size(); ++i) {
    for (std::size_t j = i + 1; j < report.features.size(); ++j) {
      out << "pearson." << report.features[i].name << "." << report.features[j].name << " = "
          << num(report.pearson(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << "\n";
    }
  }
  out << "significant = " << join(report.significant) << "\n";
  out << "selected = " << join(report.selected) << "\n";
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace topo
