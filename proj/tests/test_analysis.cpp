#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "stats_oracles.hpp"
#include "support.hpp"
#include "topo/analysis.hpp"
#include "topo/error.hpp"

using namespace topo;

namespace {

std::vector<int> balanced_labels(std::size_t n) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
  return y;
}

FeatureTable make_table(const std::vector<std::vector<double>>& columns, const std::vector<int>& labels) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < columns.size(); ++j) names.push_back("f" + std::to_string(j));
  FeatureTable t(names);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    FeatureRow row{{{static_cast<double>(i), 0.0}, labels[i]}, {}};
    for (const auto& c : columns) row.values.push_back(c[i]);
    t.add(row);
  }
  return t;
}

}  // namespace

TEST_CASE("univariate logistic: permuted labels give near-uniform P-values") {
  Rng rng(2);
  std::vector<double> x(400);
  for (double& v : x) v = rng.normal();
  auto y = balanced_labels(x.size());
  std::vector<double> ps;
  for (int perm = 0; perm < 200; ++perm) {
    rng.shuffle(y);
    ps.push_back(univariate_logistic(x, y).p_value);
  }
  std::vector<double> sorted = ps;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[99] + sorted[100]);
  CHECK(median >= 0.3);
  CHECK(median <= 0.7);
  CHECK(oracle::ks_uniform(ps) < 0.1);
}

TEST_CASE("univariate logistic: strong separation gives tiny P, confirmed by likelihood ratio") {
  // At gap 3 the Wald statistic saturates (Hauck-Donner): the likelihood-ratio
  // P-value carries the significance there; at gap 1 both are tiny.
  Rng rng(10);
  for (double gap : {3.0, 1.0}) {
    std::vector<double> x;
    std::vector<int> y;
    for (int i = 0; i < 500; ++i) {
      y.push_back(i % 2);
      x.push_back((i % 2 ? gap : -gap) + rng.normal());
    }
    const auto fit = univariate_logistic(x, y);
    CHECK(fit.lr_p_value < 1e-6);
    if (gap == 1.0) CHECK(fit.p_value < 1e-6);
    if (gap == 3.0) CHECK(fit.p_value < 0.05);
    if (fit.separated) continue;
    // Independent route: likelihood-ratio test from a gradient-ascent MLE on
    // the standardized feature.
    double mu = 0, ss = 0;
    for (double v : x) mu += v;
    mu /= 500;
    for (double v : x) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / 499);
    std::vector<double> z;
    for (double v : x) z.push_back((v - mu) / sd);
    const auto [b0, b1] = oracle::logistic_mle_by_ascent(z, y);
    CHECK(fit.coef == doctest::Approx(b1).epsilon(1e-3));
    const double lr = 2 * (oracle::logistic_loglik(z, y, b0, b1) - oracle::logistic_loglik(z, y, 0.0, 0.0));
    CHECK(std::erfc(std::sqrt(lr / 2)) < 1e-6);
    CHECK(fit.lr_p_value == doctest::Approx(std::erfc(std::sqrt(lr / 2))).epsilon(1e-2).scale(1e-300));
  }
}

TEST_CASE("univariate logistic edge cases") {
  const std::vector<double> constant(20, 3.0);
  const auto fit = univariate_logistic(constant, balanced_labels(20));
  CHECK(fit.coef == 0.0);
  CHECK(fit.p_value == 1.0);

  std::vector<double> split;
  for (int i = 0; i < 20; ++i) split.push_back(i % 2 ? 10.0 + i : -10.0 - i);
  const auto sep = univariate_logistic(split, balanced_labels(20));
  CHECK(sep.separated);
  CHECK(sep.p_value == 0.0);

  CHECK_THROWS_AS(univariate_logistic(std::vector<double>{1, 2, 3}, std::vector<int>{1, 0, 0}), Error);
  CHECK_THROWS_AS(univariate_logistic(std::vector<double>{1, 2}, std::vector<int>{1, 0, 0}), Error);
}

TEST_CASE("statistics invariants on random tables") {
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 30 + rng.index(200);
    std::vector<int> y(n);
    for (auto& v : y) v = rng.uniform() < 0.4 ? 1 : 0;
    y[0] = y[1] = 1;
    y[2] = y[3] = 0;
    std::vector<std::vector<double>> cols(4, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      cols[0][i] = rng.normal() + 0.8 * y[i];
      cols[1][i] = 0.7 * cols[0][i] + rng.normal();
      cols[2][i] = std::round(rng.uniform(0, 5));
      cols[3][i] = rng.uniform(-1, 1);
    }
    const FeatureTable table = make_table(cols, y);
    const Eigen::MatrixXd r = pearson_matrix(table);
    for (int i = 0; i < 4; ++i) {
      CHECK(r(i, i) == 1.0);
      for (int j = 0; j < 4; ++j) {
        CHECK(r(i, j) == r(j, i));
        CHECK(std::fabs(r(i, j)) <= 1.0);
      }
    }
    // P-value is invariant to affine rescaling of the feature.
    std::vector<double> scaled;
    for (double v : cols[0]) scaled.push_back(-250.0 * v + 17.0);
    CHECK(std::fabs(univariate_logistic(scaled, y).p_value - univariate_logistic(cols[0], y).p_value) <= 1e-6);
    const double h = label_entropy(y);
    for (const auto& c : cols) {
      const double mi = mutual_information(c, y);
      CHECK(mi >= 0.0);
      CHECK(mi <= h + 1e-9);
      const double p = univariate_logistic(c, y).p_value;
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
    const auto kept = redundancy_filter(table.feature_names(), r, std::vector<double>{0.3, 0.2, 0.1, 0.0}, 0.5);
    for (const auto& a : kept) {
      for (const auto& b : kept) {
        if (a == b) continue;
        const auto ia = table.index_of(a), ib = table.index_of(b);
        CHECK(std::fabs(r(static_cast<Eigen::Index>(ia), static_cast<Eigen::Index>(ib))) <= 0.5);
      }
    }
  }
}

TEST_CASE("pearson identities") {
  Rng rng(1);
  std::vector<double> x(50), neg, affine;
  for (double& v : x) v = rng.normal();
  for (double v : x) {
    neg.push_back(-v);
    affine.push_back(2 * v + 3);
  }
  CHECK(pearson(x, x) == doctest::Approx(1.0));
  CHECK(pearson(x, neg) == doctest::Approx(-1.0));
  CHECK(pearson(x, affine) == doctest::Approx(1.0));
  CHECK(std::isnan(pearson(x, std::vector<double>(50, 2.0))));
}

TEST_CASE("mutual information examples") {
  Rng rng(3);
  std::vector<double> x(10000);
  for (double& v : x) v = rng.normal();
  auto y = balanced_labels(x.size());
  rng.shuffle(y);
  CHECK(mutual_information(x, y) < 0.01);

  std::vector<double> same(y.begin(), y.end());
  CHECK(mutual_information(same, y) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(mutual_information(std::vector<double>(100, 1.0), balanced_labels(100)) == 0.0);
}

TEST_CASE("redundancy filter") {
  Rng rng(4);
  const std::size_t n = 2000;
  std::vector<int> y(n);
  std::vector<double> x(n), copy(n), noisy(n), other(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-3.0 * x[i])) ? 1 : 0;
    copy[i] = x[i];
    noisy[i] = x[i] + 0.45 * rng.normal();
    other[i] = rng.normal();
  }
  {
    const FeatureTable t = make_table({x, copy}, y);
    const auto mi = std::vector<double>{mutual_information(x, y), mutual_information(copy, y)};
    CHECK(redundancy_filter(t.feature_names(), pearson_matrix(t), mi).size() == 1);
  }
  {
    const FeatureTable t = make_table({x, other}, y);
    const auto mi = std::vector<double>{mutual_information(x, y), mutual_information(other, y)};
    CHECK(redundancy_filter(t.feature_names(), pearson_matrix(t), mi).size() == 2);
  }
  {
    // Analogue of a channel-distance feature strongly tracking slope position.
    const FeatureTable t = make_table({x, noisy}, y);
    const double r = pearson(x, noisy);
    CHECK(r > 0.85);
    const double mi_x = mutual_information(x, y), mi_noisy = mutual_information(noisy, y);
    CHECK(mi_noisy < mi_x);
    const auto kept = redundancy_filter(t.feature_names(), pearson_matrix(t), std::vector<double>{mi_x, mi_noisy});
    CHECK(kept == std::vector<std::string>{"f0"});
  }
}

TEST_CASE("screen_features selects significant, non-redundant features") {
  Rng rng(5);
  const std::size_t n = 1500;
  std::vector<int> y(n);
  std::vector<double> x(n), noisy(n), junk(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-2.0 * x[i])) ? 1 : 0;
    noisy[i] = x[i] + 0.3 * rng.normal();
    junk[i] = rng.normal();
  }
  const FeatureTable t = make_table({x, noisy, junk}, y);
  const auto report = screen_features(t);
  CHECK(report.features.size() == 3);
  CHECK(std::find(report.significant.begin(), report.significant.end(), "f2") == report.significant.end());
  CHECK(report.selected == std::vector<std::string>{"f0"});

  ScreeningOptions forced;
  forced.forced = {"f2", "f1"};
  CHECK(screen_features(t, forced).selected == forced.forced);
  forced.forced = {"missing"};
  CHECK_THROWS_AS(screen_features(t, forced), Error);

  topo::testing::TempDir dir;
  write_screening_report(report, dir / "screen.txt");
  std::ifstream in(dir / "screen.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("feature.f0.p_value = ") != std::string::npos);
  CHECK(text.find("selected = f0\n") != std::string::npos);
}
