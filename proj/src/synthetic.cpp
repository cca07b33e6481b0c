#include "topo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "topo/error.hpp"
#include "topo/features.hpp"
#include "topo/hydrology.hpp"
#include "topo/random.hpp"
#include "topo/terrain.hpp"

namespace topo {

namespace {

// One pass of a (2r+1)-wide box filter along rows then columns, clamping at
// the edges.
void box_blur(std::vector<double>& v, std::size_t n, long r) {
  std::vector<double> tmp(v.size());
  auto at = [n](long i) { return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1)); };
  const double norm = 1.0 / static_cast<double>(2 * r + 1);
  for (std::size_t row = 0; row < n; ++row) {
    double sum = 0.0;
    for (long k = -r; k <= r; ++k) sum += v[row * n + at(k)];
    for (std::size_t c = 0; c < n; ++c) {
      tmp[row * n + c] = sum * norm;
      const long cl = static_cast<long>(c);
      sum += v[row * n + at(cl + r + 1)] - v[row * n + at(cl - r)];
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    double sum = 0.0;
    for (long k = -r; k <= r; ++k) sum += tmp[at(k) * n + c];
    for (std::size_t row = 0; row < n; ++row) {
      v[row * n + c] = sum * norm;
      const long rl = static_cast<long>(row);
      sum += tmp[at(rl + r + 1) * n + c] - tmp[at(rl - r) * n + c];
    }
  }
}

std::vector<double> smooth_field(std::size_t n, double radius, double sd, Rng& rng) {
  const long r = std::max(1L, std::lround(radius));
  const std::size_t pad = static_cast<std::size_t>(3 * r);
  const std::size_t m = n + 2 * pad;
  std::vector<double> big(m * m);
  for (auto& x : big) x = rng.normal();
  for (int pass = 0; pass < 3; ++pass) box_blur(big, m, r);
  std::vector<double> out(n * n);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t c = 0; c < n; ++c) out[row * n + c] = big[(row + pad) * m + c + pad];
  }
  double mean = 0.0, var = 0.0;
  for (double x : out) mean += x;
  mean /= static_cast<double>(out.size());
  for (double x : out) var += (x - mean) * (x - mean);
  const double scale = sd / std::sqrt(var / static_cast<double>(out.size()));
  for (double& x : out) x = (x - mean) * scale;
  return out;
}

bool far_from(const std::vector<CellIndex>& taken, CellIndex c, double min_cells) {
  for (const auto& t : taken) {
    const double dr = static_cast<double>(t.row) - static_cast<double>(c.row);
    const double dc = static_cast<double>(t.col) - static_cast<double>(c.col);
    if (dr * dr + dc * dc < min_cells * min_cells) return false;
  }
  return true;
}

}  // namespace

SyntheticScene make_synthetic_scene(const SyntheticOptions& options) {
  const std::size_t n = options.size;
  if (n < 32) throw Error(ErrorKind::Parameter, "synthetic scene needs at least 32x32 cells");
  if (options.label_noise < 0.0 || options.label_noise > 1.0) {
    throw Error(ErrorKind::Parameter, "label noise must lie in [0, 1]");
  }
  Rng terrain_rng(derive_seed(options.seed, 1));
  Rng site_rng(derive_seed(options.seed, 2));
  Rng chunk_rng(derive_seed(options.seed, 3));

  const double extent = static_cast<double>(n) * options.cell_m;
  const GeoTransform gt{0.0, extent, options.cell_m, options.cell_m, 1.0, 1.0};
  SyntheticScene scene;
  scene.dem = Raster(n, n, gt, 0.0);

  const auto broad = smooth_field(n, options.smoothing_cells, options.relief_m, terrain_rng);
  const auto fine = smooth_field(n, 2.0, options.fine_relief_m, terrain_rng);
  for (std::size_t i = 0; i < n * n; ++i) {
    const double row = static_cast<double>(i / n);
    scene.dem[i] = 200.0 + broad[i] + fine[i] + options.tilt * row;
  }

  // Carve bowls whose centers become pond sites.
  std::vector<CellIndex> bowls;
  const std::size_t margin = 8;
  for (std::size_t attempt = 0; bowls.size() < options.depressions && attempt < 50 * options.depressions;
       ++attempt) {
    const CellIndex c{margin + site_rng.index(n - 2 * margin), margin + site_rng.index(n - 2 * margin)};
    if (!far_from(bowls, c, 12.0)) continue;
    bowls.push_back(c);
    const double radius = site_rng.uniform(options.bowl_radius_min_cells, options.bowl_radius_max_cells);
    const double depth = site_rng.uniform(options.bowl_depth_min_m, options.bowl_depth_max_m);
    const long reach = static_cast<long>(std::ceil(radius));
    for (long dr = -reach; dr <= reach; ++dr) {
      for (long dc = -reach; dc <= reach; ++dc) {
        const double d = std::hypot(static_cast<double>(dr), static_cast<double>(dc)) / radius;
        if (d >= 1.0) continue;
        const auto row = static_cast<std::size_t>(static_cast<long>(c.row) + dr);
        const auto col = static_cast<std::size_t>(static_cast<long>(c.col) + dc);
        scene.dem(row, col) -= depth * (1.0 - d * d);
      }
    }
  }
  std::vector<CellIndex> sites;
  for (const auto& b : bowls) {
    scene.positives.push_back({cell_center(scene.dem, b.row, b.col), Category::Pond});
    sites.push_back(b);
  }
  scene.depression_sites = bowls.size();

  // Near-channel cells in the lowest quarter of TPI become swamp sites.
  const Raster filled = fill_sinks(scene.dem, 0.01);
  const Raster acc = flow_accumulation(d8_flow_direction(filled));
  const Raster channels = extract_channels(acc, options.channel_threshold_cells);
  const Raster cnd = distance_to_mask(channels);
  const Raster position = tpi(scene.dem, options.tpi_radius_m);
  std::vector<std::size_t> near;
  std::vector<double> near_tpi;
  for (std::size_t i = 0; i < n * n; ++i) {
    const std::size_t r = i / n, c = i % n;
    if (r < margin || c < margin || r >= n - margin || c >= n - margin) continue;
    if (!cnd.is_nodata(i) && cnd[i] <= options.cell_m * options.channel_site_distance_cells && !position.is_nodata(i)) {
      near.push_back(i);
      near_tpi.push_back(position[i]);
    }
  }
  if (!near.empty()) {
    std::vector<double> sorted = near_tpi;
    std::sort(sorted.begin(), sorted.end());
    const double cut = sorted[sorted.size() / 4];
    std::vector<std::size_t> low;
    for (std::size_t k = 0; k < near.size(); ++k) {
      if (near_tpi[k] <= cut) low.push_back(near[k]);
    }
    site_rng.shuffle(low);
    std::size_t added = 0;
    for (std::size_t i : low) {
      if (added == options.channel_sites) break;
      const CellIndex c{i / n, i % n};
      if (!far_from(sites, c, 3.0)) continue;
      sites.push_back(c);
      scene.positives.push_back({cell_center(scene.dem, c.row, c.col), Category::Swamp});
      ++added;
    }
    scene.channel_sites = added;
  }

  // Label noise: relocate a seeded subset of positives to random cells.
  const std::size_t moves =
      static_cast<std::size_t>(std::lround(options.label_noise * static_cast<double>(scene.positives.size())));
  std::vector<std::size_t> order(scene.positives.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  site_rng.shuffle(order);
  for (std::size_t k = 0; k < moves; ++k) {
    const CellIndex c{site_rng.index(n), site_rng.index(n)};
    scene.positives[order[k]] = {cell_center(scene.dem, c.row, c.col), Category::Puddle};
  }
  scene.relocated = moves;

  // Surveyed empty chunks on a grid aligned to the chunk size.
  const auto per_side = static_cast<std::size_t>(std::floor(extent / options.chunk_m));
  std::vector<char> used(per_side * per_side, 0);
  for (const auto& p : scene.positives) {
    const auto cx = static_cast<std::size_t>(p.point.x / options.chunk_m);
    const auto cy = static_cast<std::size_t>(p.point.y / options.chunk_m);
    if (cx < per_side && cy < per_side) used[cy * per_side + cx] = 1;
  }
  std::vector<std::size_t> free_cells;
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) free_cells.push_back(k);
  }
  chunk_rng.shuffle(free_cells);
  free_cells.resize(std::min(free_cells.size(), options.chunks));
  std::sort(free_cells.begin(), free_cells.end());
  for (std::size_t k : free_cells) {
    const double x0 = static_cast<double>(k % per_side) * options.chunk_m;
    const double y0 = static_cast<double>(k / per_side) * options.chunk_m;
    scene.chunks.push_back({x0, y0, x0 + options.chunk_m, y0 + options.chunk_m});
  }
  return scene;
}

void write_synthetic_scene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_ascii_grid(scene.dem, dir / "dem.asc");
  write_positives(scene.positives, dir / "positives.csv");
  write_chunks(scene.chunks, dir / "chunks.csv");

  // Leaves of at least 10 rows keep heavily weighted positives from being
  // memorized one by one.
  nlohmann::json config = {
      {"dem", "dem.asc"},
      {"positives", "positives.csv"},
      {"chunks", "chunks.csv"},
      {"output_dir", "out"},
      {"variant", "A"},
      {"screening", {{"forced", dataset_a_features()}}},
      {"model", {{"family", "gradient_boosting"}, {"boosting", {{"min_samples_leaf", 10}}}}},
      {"seed", 42}};
  std::ofstream out(dir / "config.json");
  if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / "config.json").string());
  out << config.dump(2) << '\n';
}

}  // namespace topo
