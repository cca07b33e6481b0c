// Standalone acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "datasets.hpp"
#include "oracles.hpp"
#include "stats_oracles.hpp"
#include "support.hpp"
#include "topo/analysis.hpp"
#include "topo/hydrology.hpp"
#include "topo/learn.hpp"
#include "topo/pipeline.hpp"
#include "topo/synthetic.hpp"
#include "topo/terrain.hpp"
#include "topo/tree.hpp"

using namespace topo;
using namespace topo::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Collects failed checks; the first few are kept for the report line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (notes_.size() < 3) notes_.push_back(what);
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream out;
    out << (total_ - failed_) << "/" << total_ << " checks";
    for (const auto& n : notes_) out << "; " << n;
    return out.str();
  }

 private:
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> notes_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

bool equal_cells(const Raster& got, const std::vector<double>& want) {
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i] != want[i]) return false;
  }
  return true;
}

Raster sample_surface(std::size_t rows, std::size_t cols, double cell, const std::function<double(double, double)>& z) {
  Raster dem(rows, cols, {0.0, cell * static_cast<double>(rows), cell, cell});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto p = cell_center(dem, r, c);
      dem(r, c) = z(p.x, p.y);
    }
  }
  return dem;
}

bool close(double got, double want, double tol) {
  return std::fabs(got - want) <= tol * std::max(1.0, std::fabs(want));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome hydrology_oracles() {
  const auto start = Clock::now();
  Checks checks;
  Rng rng(20240601);
  for (int trial = 0; trial < 200; ++trial) {
    const Raster dem = random_dem(20, 20, rng, trial % 4 == 0 ? 0.05 : 0.0);
    const Raster filled = fill_sinks(dem, 0.0);
    checks.expect(equal_cells(filled, oracle::fill(dem, 0.0)), "fill differs on DEM " + std::to_string(trial));
    const Raster dir = d8_flow_direction(filled);
    checks.expect(equal_cells(flow_accumulation(dir), oracle::accumulation(dir)),
                  "accumulation differs on DEM " + std::to_string(trial));

    Raster mask(20, 20, dem.transform(), 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = dem.is_nodata(i) ? mask.nodata() : (rng.uniform() < 0.05 ? 1.0 : 0.0);
    }
    std::size_t anchor = rng.index(mask.size());
    mask[anchor] = 1.0;
    const Raster d = distance_to_mask(mask);
    const auto want = oracle::nearest(mask, nullptr);
    bool same = true;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask.is_nodata(i)) {
        same = same && d.is_nodata(i);
      } else {
        same = same && d[i] == want.distance[i];
      }
    }
    checks.expect(same, "distance differs on DEM " + std::to_string(trial));
  }
  const double elapsed = seconds_since(start);
  checks.expect(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
  return {checks.ok(), "200 DEMs, " + checks.summary() + ", " + fmt(elapsed) + " s"};
}

Outcome analytic_derivatives() {
  Checks checks;
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const double cell = trial % 2 ? 1.0 : 0.5;
    const double d = rng.uniform(-5, 5), e = rng.uniform(-5, 5);
    const Raster plane = sample_surface(5, 5, cell, [&](double x, double y) { return d * x + e * y + 3.0; });
    const double g = std::sqrt(d * d + e * e);
    checks.expect(close(slope(plane)(2, 2), std::atan(g), 1e-9), "plane slope");
    checks.expect(std::fabs(plan_curvature(plane)(2, 2)) <= 1e-9, "plane plan curvature");
    checks.expect(std::fabs(profile_curvature(plane)(2, 2)) <= 1e-9, "plane profile curvature");

    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), cc = rng.uniform(-1, 1);
    auto z = [&](double x, double y) { return a * x * x + b * x * y + cc * y * y + d * x + e * y; };
    const Raster quad = sample_surface(5, 5, cell, z);
    const auto pt = cell_center(quad, 2, 2);
    const double p = 2 * a * pt.x + b * pt.y + d, q = b * pt.x + 2 * cc * pt.y + e;
    const double r = 2 * a, s = b, t = 2 * cc;
    const double g2 = p * p + q * q;
    const double plan = (q * q * r - 2 * p * q * s + p * p * t) / std::pow(g2, 1.5);
    const double prof = (p * p * r + 2 * p * q * s + q * q * t) / (g2 * std::pow(1 + g2, 1.5));
    checks.expect(close(slope(quad)(2, 2), std::atan(std::sqrt(g2)), 1e-9), "quadratic slope");
    checks.expect(close(plan_curvature(quad)(2, 2), plan, 1e-9), "quadratic plan curvature");
    checks.expect(close(profile_curvature(quad)(2, 2), prof, 1e-9), "quadratic profile curvature");
  }

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 3 + rng.index(30), cols = 3 + rng.index(30);
    const double level = rng.uniform(-100, 3000);
    const Raster flat(rows, cols, {0, 30.0 * static_cast<double>(rows), 30, 30}, level);
    const Raster tp = tpi(flat, 30.0 * (2 + static_cast<double>(rng.index(15))));
    bool zero = true;
    for (std::size_t i = 0; i < tp.size(); ++i) zero = zero && (tp.is_nodata(i) || tp[i] == 0.0);
    checks.expect(zero, "TPI nonzero on a constant raster");
  }

  const GeoTransform gt{0, 30, 30, 30};
  for (int i = 0; i < 1000; ++i) {
    Raster acc(1, 3, gt), slp(1, 3, gt);
    const double base_acc = 1 + static_cast<double>(rng.index(5000));
    const double base_slope = rng.uniform(std::atan(0.0011), 1.5);
    acc[0] = base_acc;
    slp[0] = base_slope;
    acc[1] = base_acc + 1 + static_cast<double>(rng.index(100));
    slp[1] = base_slope;
    acc[2] = base_acc;
    slp[2] = std::min(1.55, base_slope + rng.uniform(1e-3, 0.3));
    const Raster w = twi(acc, slp);
    checks.expect(w[1] > w[0], "TWI not increasing in accumulation");
    checks.expect(w[2] < w[0], "TWI not decreasing in slope");
  }
  return {checks.ok(), "planes, quadratics, constant TPI and 1000 TWI pairs: " + checks.summary()};
}

Outcome statistics() {
  Checks checks;
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 30 + rng.index(200);
    std::vector<int> y(n);
    for (auto& v : y) v = rng.uniform() < 0.4 ? 1 : 0;
    y[0] = y[1] = 1;
    y[2] = y[3] = 0;
    std::vector<std::vector<double>> rows(n, std::vector<double>(4));
    std::vector<std::vector<double>> cols(4, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      cols[0][i] = rng.normal() + 0.8 * y[i];
      cols[1][i] = 0.7 * cols[0][i] + rng.normal();
      cols[2][i] = std::round(rng.uniform(0, 5));
      cols[3][i] = rng.uniform(-1, 1);
      for (std::size_t j = 0; j < 4; ++j) rows[i][j] = cols[j][i];
    }
    const FeatureTable table = table_from_rows(rows, y);
    const Eigen::MatrixXd r = pearson_matrix(table);
    for (int i = 0; i < 4; ++i) {
      checks.expect(r(i, i) == 1.0, "pearson diagonal");
      for (int j = 0; j < 4; ++j) {
        checks.expect(r(i, j) == r(j, i) && std::fabs(r(i, j)) <= 1.0, "pearson symmetry or range");
      }
    }
    std::vector<double> scaled;
    for (double v : cols[0]) scaled.push_back(-250.0 * v + 17.0);
    checks.expect(std::fabs(univariate_logistic(scaled, y).p_value - univariate_logistic(cols[0], y).p_value) <= 1e-6,
                  "P-value changes under affine rescaling");
    const double h = label_entropy(y);
    for (const auto& c : cols) {
      const double mi = mutual_information(c, y);
      checks.expect(mi >= 0.0 && mi <= h + 1e-9, "MI outside [0, H(y)]");
      const double p = univariate_logistic(c, y).p_value;
      checks.expect(p >= 0.0 && p <= 1.0, "P-value outside [0, 1]");
    }
  }

  std::vector<double> x(400);
  for (double& v : x) v = rng.normal();
  std::vector<int> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  std::vector<double> ps;
  for (int perm = 0; perm < 200; ++perm) {
    rng.shuffle(y);
    ps.push_back(univariate_logistic(x, y).p_value);
  }
  const double ks = oracle::ks_uniform(ps);
  checks.expect(ks < 0.1, "KS statistic " + fmt(ks));
  return {checks.ok(), "100 tables, " + checks.summary() + ", permutation KS = " + fmt(ks)};
}

Outcome learners() {
  const auto start = Clock::now();
  Checks checks;
  Rng rng(4040);

  for (int set = 0; set < 5; ++set) {
    const FeatureTable t = noisy_mixture(300, 3, rng, 0.5);
    const auto weights = balanced_weights(t.labels());
    const TrainingData data = training_data(t, weights);
    const Eigen::MatrixXd z = Standardizer::fit(data.x).apply(data.x);
    const LogisticObjective obj(z, data.y, data.w, 1e-4);
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::VectorXd theta(4);
      for (Eigen::Index j = 0; j < 4; ++j) theta(j) = rng.normal();
      const Eigen::VectorXd g = obj.gradient(theta);
      for (Eigen::Index j = 0; j < 4; ++j) {
        const double step = 1e-6;
        Eigen::VectorXd up = theta, down = theta;
        up(j) += step;
        down(j) -= step;
        const double fd = (obj.value(up) - obj.value(down)) / (2 * step);
        checks.expect(std::fabs(fd - g(j)) <= 1e-5 * std::max(std::fabs(g(j)), 1e-3), "logistic gradient");
      }
    }
  }

  for (int set = 0; set < 5; ++set) {
    const FeatureTable t = noisy_mixture(300, 2 + static_cast<std::size_t>(set % 3), rng, 0.3 * (set + 1));
    BoostingOptions bo;
    bo.learning_rate = 0.1;
    bo.seed = static_cast<std::uint64_t>(set);
    const auto m = fit_gradient_boosting(t, balanced_weights(t.labels()), bo);
    bool monotone = m.history.size() == static_cast<std::size_t>(bo.n_trees) + 1;
    for (std::size_t s = 1; s < m.history.size(); ++s) monotone = monotone && m.history[s] <= m.history[s - 1];
    checks.expect(monotone, "deviance rose on dataset " + std::to_string(set));
  }

  const FeatureTable train = blobs(400, rng);
  const FeatureTable test = blobs(400, rng);
  const auto cw = balanced_weights(train.labels());
  ForestOptions fo;
  fo.seed = 11;
  BoostingOptions bo;
  bo.seed = 11;
  std::string accs;
  const std::vector<std::pair<std::string, TrainedModel>> ensembles{
      {"rf", fit_random_forest(train, cw, fo)},
      {"et", fit_extra_trees(train, cw, fo)},
      {"gbc", fit_gradient_boosting(train, cw, bo)}};
  for (const auto& [name, model] : ensembles) {
    const double acc = accuracy(model.predict_proba(test), test);
    accs += " " + name + "=" + fmt(acc);
    checks.expect(acc >= 0.95, name + " blobs accuracy " + fmt(acc));
  }

  std::vector<std::vector<double>> corners{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  const FeatureTable ct = table_from_rows(corners, {1, 0, 0, 1});
  const TrainingData cd = training_data(ct, {});
  std::vector<std::size_t> crow{0, 1, 2, 3};
  TreeParams depth2;
  depth2.max_depth = 2;
  const auto ctree = fit_tree(cd.x, cd.y, cd.w, crow, depth2, rng);
  bool corners_ok = true;
  for (std::size_t i = 0; i < 4; ++i) corners_ok = corners_ok && ctree.predict(corners[i]) == ct.labels()[i];
  checks.expect(corners_ok, "depth-2 tree misses XOR corners");

  const FeatureTable xt = xor_table(400, rng);
  const TrainingData xd = training_data(xt, {});
  std::vector<std::size_t> rows(xt.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const auto deep = fit_tree(xd.x, xd.y, xd.w, rows, TreeParams{}, rng);
  std::vector<double> tree_proba;
  for (const auto& row : xt.rows()) tree_proba.push_back(deep.predict(row.values));
  checks.expect(accuracy(tree_proba, xt) == 1.0, "tree does not fit continuous XOR");

  BoostingOptions fifty;
  fifty.n_trees = 50;
  const auto g = fit_gradient_boosting(xt, balanced_weights(xt.labels()), fifty);
  const double gacc = accuracy(g.predict_proba(xt), xt);
  checks.expect(gacc == 1.0, "GBC XOR accuracy " + fmt(gacc));

  const double elapsed = seconds_since(start);
  checks.expect(elapsed < 120.0, "runtime " + fmt(elapsed) + " s");
  return {checks.ok(), checks.summary() + ", blobs" + accs + ", " + fmt(elapsed) + " s"};
}

Outcome protocol() {
  Checks checks;
  Rng rng(5151);
  for (int trial = 0; trial < 30; ++trial) {
    const Raster dem(60, 60, {0.0, 1800.0, 30.0, 30.0}, 1.0);
    std::vector<ChunkRecord> chunks;
    for (int i = 0; i < 15; ++i) {
      const double x = rng.uniform(0, 1700), y = rng.uniform(0, 1700);
      chunks.push_back({x, y, x + 100, y + 100});
    }
    std::vector<GeoPoint> positives;
    for (int i = 0; i < 20; ++i) positives.push_back({rng.uniform(0, 1800), rng.uniform(0, 1800)});
    NegativeSamplingOptions opt;
    opt.seed = static_cast<std::uint64_t>(trial);
    const auto got = generate_negatives(chunks, positives, dem, opt);
    for (std::size_t i = 0; i < got.points.size(); ++i) {
      const GeoPoint& n = got.points[i];
      bool far = true;
      for (const auto& p : positives) far = far && std::hypot(n.x - p.x, n.y - p.y) >= 100.0;
      checks.expect(far, "negative within 100 m of a positive");
      bool spaced = true;
      for (std::size_t j = i + 1; j < got.points.size(); ++j) {
        spaced = spaced && std::hypot(n.x - got.points[j].x, n.y - got.points[j].y) >= 30.0;
      }
      checks.expect(spaced, "negatives closer than 30 m");
      checks.expect(std::any_of(chunks.begin(), chunks.end(), [&](const ChunkRecord& c) { return c.contains(n); }),
                    "negative outside every chunk");
    }
  }

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(300);
    std::vector<std::vector<double>> rows;
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(std::round(rng.uniform(-50, 50) * 4) / 4);
      rows.push_back({static_cast<double>(i)});
    }
    FeatureTable t({"id"});
    for (std::size_t i = 0; i < n; ++i) t.add({{{xs[i], 0.0}, static_cast<int>(i % 2)}, rows[i]});
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double pct = trial % 2 ? 80.0 : 50.0 + static_cast<double>(rng.index(45));
    const auto rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n) / 100.0));
    const double threshold = sorted[std::max<std::size_t>(rank, 1) - 1];
    if (sorted.front() == threshold) continue;  // empty training side, rejected by design
    const auto split = split_by_longitude(t, pct);
    bool ok = split.threshold == threshold && split.train.size() + split.test.size() == n;
    std::vector<double> want_train, want_test, got_train, got_test;
    for (std::size_t i = 0; i < n; ++i) (xs[i] < threshold ? want_train : want_test).push_back(static_cast<double>(i));
    for (const auto& r : split.train.rows()) got_train.push_back(r.values[0]);
    for (const auto& r : split.test.rows()) got_test.push_back(r.values[0]);
    std::sort(got_train.begin(), got_train.end());
    std::sort(got_test.begin(), got_test.end());
    ok = ok && got_train == want_train && got_test == want_test;
    checks.expect(ok, "split differs from the sort oracle at n=" + std::to_string(n));
  }

  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(2000);
    std::vector<int> labels(n);
    for (auto& v : labels) v = rng.uniform() < rng.uniform() ? 1 : 0;
    labels[0] = 1;
    labels[1] = 0;
    const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const auto neg = static_cast<double>(n) - pos;
    const auto w = balanced_weights(labels);
    checks.expect(w.positive == static_cast<double>(n) / (2.0 * pos), "positive weight");
    checks.expect(w.negative == static_cast<double>(n) / (2.0 * neg), "negative weight");
    checks.expect(close(w.positive * pos, w.negative * neg, 1e-12), "class totals unequal");
  }
  return {checks.ok(), checks.summary()};
}

struct EndToEnd {
  Outcome outcome;
  EvalReport report;
  std::filesystem::path output;
};

EndToEnd synthetic_run(const TempDir& dir, const std::string& out_name, bool with_baseline) {
  const auto start = Clock::now();
  Checks checks;
  PipelineConfig config = load_pipeline_config(dir / "config.json");
  config.output_dir = dir / out_name;
  const auto gbc = run_pipeline(config);
  const EvalReport& r = gbc.report;
  std::string detail = "GBC roc=" + fmt(r.roc_auc) + " recall=" + fmt(r.recall) + " precision=" + fmt(r.precision) +
                       " specificity=" + fmt(r.specificity);
  checks.expect(r.roc_auc >= 0.85, "ROC " + fmt(r.roc_auc));
  checks.expect(r.recall >= 0.85, "recall " + fmt(r.recall));
  if (with_baseline) {
    PipelineConfig base = config;
    base.output_dir = dir / (out_name + "_baseline");
    base.screening.forced = {"slope"};
    base.family = ModelFamily::Logistic;
    const auto lr = run_pipeline(base);
    detail += ", slope-only logistic roc=" + fmt(lr.report.roc_auc);
    checks.expect(r.roc_auc - lr.report.roc_auc >= 0.05, "margin over baseline " + fmt(r.roc_auc - lr.report.roc_auc));
  }
  const double elapsed = seconds_since(start);
  checks.expect(elapsed < 300.0, "runtime " + fmt(elapsed) + " s");
  detail += ", " + fmt(elapsed) + " s";
  if (!checks.ok()) detail += " (" + checks.summary() + ")";
  return {{checks.ok(), detail}, r, config.output_dir};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  auto guarded = [&](int id, const std::string& name, const std::function<Outcome()>& body) {
    try {
      report(id, name, body());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, "hydrology oracles", hydrology_oracles);
  guarded(2, "analytic derivatives", analytic_derivatives);
  guarded(3, "statistics", statistics);
  guarded(4, "learners", learners);
  guarded(5, "protocol fidelity", protocol);

  TempDir dir;
  std::optional<EndToEnd> first;
  guarded(6, "synthetic end-to-end", [&] {
    write_synthetic_scene(make_synthetic_scene(), dir.path());
    first = synthetic_run(dir, "run1", true);
    return first->outcome;
  });
  guarded(7, "determinism", [&]() -> Outcome {
    if (!first) return {false, "criterion 6 did not produce a run to compare"};
    const EndToEnd second = synthetic_run(dir, "run2", false);
    Checks checks;
    checks.expect(second.report == first->report, "EvalReports differ");
    for (const char* name : {"risk.asc", "risk.png", "eval.txt"}) {
      const std::string a = slurp(first->output / name), b = slurp(second.output / name);
      checks.expect(!a.empty() && a == b, std::string(name) + " differs");
    }
    return {checks.ok(), "second run: " + checks.summary()};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
