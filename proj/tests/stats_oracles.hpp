#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace topo::oracle {

/// Kolmogorov-Smirnov distance between the sample and Uniform(0, 1).
inline double ks_uniform(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - sample[i], sample[i] - static_cast<double>(i) / n));
  }
  return d;
}

/// Log-likelihood of an intercept+slope logistic model.
inline double logistic_loglik(const std::vector<double>& x, const std::vector<int>& y, double b0, double b1) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eta = b0 + b1 * x[i];
    ll += y[i] * eta - std::log1p(std::exp(eta));
  }
  return ll;
}

/// Maximizes the logistic log-likelihood by plain gradient ascent.
inline std::pair<double, double> logistic_mle_by_ascent(const std::vector<double>& x, const std::vector<int>& y) {
  double b0 = 0, b1 = 0;
  const double n = static_cast<double>(x.size());
  for (int it = 0; it < 200000; ++it) {
    double g0 = 0, g1 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x[i])));
      g0 += y[i] - p;
      g1 += (y[i] - p) * x[i];
    }
    b0 += 4.0 * g0 / n;
    b1 += 4.0 * g1 / n;
  }
  return {b0, b1};
}

}  // namespace topo::oracle
