#include "topo/hydrology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>

#include "topo/error.hpp"

namespace topo {

double d8_distance(const GeoTransform& transform, int code) {
  const D8Step step = d8_step(code);
  const double dx = step.dc * transform.cell_width_m();
  const double dy = step.dr * transform.cell_height_m();
  return std::sqrt(dx * dx + dy * dy);
}

namespace {

bool has_nodata_neighbor(const Raster& r, std::size_t row, std::size_t col) {
  for (const auto& s : kD8Steps) {
    const long nr = static_cast<long>(row) + s.dr;
    const long nc = static_cast<long>(col) + s.dc;
    if (!r.in_bounds(nr, nc)) return true;
    if (r.is_nodata(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc))) return true;
  }
  return false;
}

}  // namespace

Raster fill_sinks(const Raster& dem, double min_slope) {
  if (!(min_slope >= 0.0) || !std::isfinite(min_slope)) {
    throw Error(ErrorKind::Parameter, "min_slope must be a finite value >= 0");
  }
  const std::size_t rows = dem.rows();
  const std::size_t cols = dem.cols();
  const auto& t = dem.transform();
  const double spacing = std::min(t.cell_width_m(), t.cell_height_m());
  std::array<double, 8> rise{};
  for (int k = 1; k <= 8; ++k) rise[k - 1] = min_slope * (d8_distance(t, k) / spacing);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<double> level(dem.size(), std::numeric_limits<double>::infinity());
  std::vector<char> closed(dem.size(), 0);

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (!dem.is_nodata(i) && has_nodata_neighbor(dem, r, c)) {
        level[i] = dem[i];
        open.emplace(dem[i], i);
      }
    }
  }
  if (open.empty()) throw Error(ErrorKind::EmptyInput, "fill_sinks: raster has no valid cells");

  // Dijkstra over the max-plus path cost max(z, upstream + rise): the final
  // level of a cell is its lowest spill level towards any seed.
  Raster out = Raster::like(dem, dem.nodata());
  while (!open.empty()) {
    const auto [value, i] = open.top();
    open.pop();
    if (closed[i] || value != level[i]) continue;
    closed[i] = 1;
    out[i] = value;
    const long r = static_cast<long>(i / cols);
    const long c = static_cast<long>(i % cols);
    for (int k = 0; k < 8; ++k) {
      const long nr = r + kD8Steps[k].dr;
      const long nc = c + kD8Steps[k].dc;
      if (!dem.in_bounds(nr, nc)) continue;
      const std::size_t j = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
      if (closed[j] || dem.is_nodata(j)) continue;
      const double candidate = std::max(dem[j], value + rise[k]);
      if (candidate < level[j]) {
        level[j] = candidate;
        open.emplace(candidate, j);
      }
    }
  }
  return out;
}

Raster closed_depressions(const Raster& dem, const Raster& filled) {
  require_same_grid(dem, filled, "closed_depressions");
  Raster depth = Raster::like(dem, dem.nodata());
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (dem.is_nodata(i) || filled.is_nodata(i)) continue;
    depth[i] = std::max(0.0, filled[i] - dem[i]);
  }
  return depth;
}

Raster d8_flow_direction(const Raster& filled) {
  const std::size_t cols = filled.cols();
  std::array<double, 8> dist{};
  for (int k = 1; k <= 8; ++k) dist[k - 1] = d8_distance(filled.transform(), k);

  Raster dir = Raster::like(filled, filled.nodata());
  for (std::size_t r = 0; r < filled.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (filled.is_nodata(i)) continue;
      int best_code = kOutlet;
      double best_gradient = 0.0;
      for (int k = 0; k < 8; ++k) {
        const long nr = static_cast<long>(r) + kD8Steps[k].dr;
        const long nc = static_cast<long>(c) + kD8Steps[k].dc;
        if (!filled.in_bounds(nr, nc)) continue;
        const std::size_t j = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
        if (filled.is_nodata(j)) continue;
        const double drop = filled[i] - filled[j];
        if (drop <= 0.0) continue;
        const double gradient = drop / dist[k];
        if (gradient > best_gradient) {
          best_gradient = gradient;
          best_code = k + 1;
        }
      }
      dir[i] = best_code;
    }
  }
  return dir;
}

namespace {

// Flat index of the cell `i` drains to, or npos for outlets.
constexpr std::size_t kNoTarget = std::numeric_limits<std::size_t>::max();

std::size_t flow_target(const Raster& flowdir, std::size_t i) {
  const double v = flowdir[i];
  const int code = static_cast<int>(v);
  if (code == kOutlet) return kNoTarget;
  if (code < 1 || code > 8 || static_cast<double>(code) != v) {
    throw Error(ErrorKind::InternalInvariant, "invalid D8 code " + std::to_string(v));
  }
  const long r = static_cast<long>(i / flowdir.cols()) + d8_step(code).dr;
  const long c = static_cast<long>(i % flowdir.cols()) + d8_step(code).dc;
  if (!flowdir.in_bounds(r, c)) {
    throw Error(ErrorKind::InternalInvariant, "D8 code points outside the raster");
  }
  const std::size_t j = static_cast<std::size_t>(r) * flowdir.cols() + static_cast<std::size_t>(c);
  if (flowdir.is_nodata(j)) {
    throw Error(ErrorKind::InternalInvariant, "D8 code points into a nodata cell");
  }
  return j;
}

}  // namespace

Raster flow_accumulation(const Raster& flowdir) {
  const std::size_t n = flowdir.size();
  std::vector<std::size_t> target(n, kNoTarget);
  std::vector<std::uint32_t> inflow(n, 0);
  std::size_t valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flowdir.is_nodata(i)) continue;
    ++valid;
    target[i] = flow_target(flowdir, i);
    if (target[i] != kNoTarget) ++inflow[target[i]];
  }

  Raster acc = Raster::like(flowdir, flowdir.nodata());
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (flowdir.is_nodata(i)) continue;
    acc[i] = 1.0;
    if (inflow[i] == 0) ready.push_back(i);
  }
  std::size_t processed = 0;
  while (!ready.empty()) {
    const std::size_t i = ready.front();
    ready.pop_front();
    ++processed;
    const std::size_t j = target[i];
    if (j == kNoTarget) continue;
    acc[j] += acc[i];
    if (--inflow[j] == 0) ready.push_back(j);
  }
  if (processed != valid) {
    throw Error(ErrorKind::InternalInvariant,
                "flow directions contain a cycle (" + std::to_string(valid - processed) +
                    " cells never drained); was the DEM filled?");
  }
  return acc;
}

Raster extract_channels(const Raster& acc, double threshold_cells) {
  if (!(threshold_cells >= 1.0)) {
    throw Error(ErrorKind::Parameter, "channel threshold must be >= 1 cell");
  }
  Raster mask = Raster::like(acc, acc.nodata());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (!acc.is_nodata(i)) mask[i] = acc[i] >= threshold_cells ? 1.0 : 0.0;
  }
  return mask;
}

Raster extract_ridges(const Raster& acc) {
  Raster mask = Raster::like(acc, acc.nodata());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (!acc.is_nodata(i)) mask[i] = acc[i] == 1.0 ? 1.0 : 0.0;
  }
  return mask;
}

NearestSite nearest_mask_site(const Raster& mask, const Raster* tie_elevation) {
  if (tie_elevation) require_same_grid(mask, *tie_elevation, "nearest_mask_site");
  const std::size_t rows = mask.rows();
  const std::size_t cols = mask.cols();
  auto is_site = [&](std::size_t i) { return !mask.is_nodata(i) && mask[i] != 0.0; };
  auto lower_site = [&](std::int64_t a, std::int64_t b) {
    // True when site `a` should win a distance tie against `b`.
    if (!tie_elevation) return false;
    return (*tie_elevation)[static_cast<std::size_t>(a)] <
           (*tie_elevation)[static_cast<std::size_t>(b)];
  };

  // Pass 1: nearest site row within each column (-1 when the column is empty).
  std::vector<long> column_site(rows * cols, -1);
  bool any = false;
  for (std::size_t c = 0; c < cols; ++c) {
    long last = -1;
    for (std::size_t r = 0; r < rows; ++r) {
      if (is_site(r * cols + c)) last = static_cast<long>(r);
      column_site[r * cols + c] = last;
    }
    long next = -1;
    for (std::size_t r = rows; r-- > 0;) {
      if (is_site(r * cols + c)) {
        next = static_cast<long>(r);
        any = true;
      }
      if (next < 0) continue;
      long& best = column_site[r * cols + c];
      const long rr = static_cast<long>(r);
      if (best < 0 || next - rr < rr - best) {
        best = next;
      } else if (next - rr == rr - best &&
                 lower_site(next * static_cast<long>(cols) + static_cast<long>(c),
                            best * static_cast<long>(cols) + static_cast<long>(c))) {
        best = next;
      }
    }
  }
  if (!any) throw Error(ErrorKind::NoChannel, "mask contains no cells");

  // Pass 2: scan outwards along each row; a column k cells away cannot beat
  // the current best once (k*dx)^2 exceeds it.
  const double dx = mask.transform().cell_width_m();
  const double dy = mask.transform().cell_height_m();
  NearestSite result{Raster::like(mask, mask.nodata()), std::vector<std::int64_t>(mask.size(), -1)};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (mask.is_nodata(i)) continue;
      double best = std::numeric_limits<double>::infinity();
      std::int64_t best_site = -1;
      auto consider = [&](long cc, double ddx) {
        const long sr = column_site[r * cols + static_cast<std::size_t>(cc)];
        if (sr < 0) return;
        const double ddy = static_cast<double>(sr - static_cast<long>(r)) * dy;
        const double d2 = ddx * ddx + ddy * ddy;
        const std::int64_t site = sr * static_cast<std::int64_t>(cols) + cc;
        if (d2 < best || (d2 == best && lower_site(site, best_site))) {
          best = d2;
          best_site = site;
        }
      };
      for (long k = 0;; ++k) {
        const double ddx = static_cast<double>(k) * dx;
        if (ddx * ddx > best) break;
        const long left = static_cast<long>(c) - k;
        const long right = static_cast<long>(c) + k;
        if (left < 0 && right >= static_cast<long>(cols)) break;
        if (left >= 0) consider(left, static_cast<double>(left - static_cast<long>(c)) * dx);
        if (k > 0 && right < static_cast<long>(cols)) {
          consider(right, static_cast<double>(right - static_cast<long>(c)) * dx);
        }
      }
      result.distance[i] = std::sqrt(best);
      result.site[i] = best_site;
    }
  }
  return result;
}

Raster distance_to_mask(const Raster& mask) { return nearest_mask_site(mask).distance; }

namespace {

Raster altitude_offset(const Raster& dem, const Raster& mask, bool above, ErrorKind empty_kind) {
  require_same_grid(dem, mask, above ? "altitude_above_channel" : "altitude_below_ridge");
  // Sites must carry an elevation, so nodata DEM cells are removed from the mask.
  Raster sites = mask;
  bool any = false;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (dem.is_nodata(i)) {
      sites.set_nodata(i);
    } else if (!sites.is_nodata(i) && sites[i] != 0.0) {
      any = true;
    }
  }
  if (!any) {
    throw Error(empty_kind, above ? "channel mask is empty" : "ridge mask is empty");
  }
  const NearestSite nearest = nearest_mask_site(sites, &dem);
  Raster out = Raster::like(dem, dem.nodata());
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (dem.is_nodata(i) || nearest.site[i] < 0) continue;
    const double base = dem[static_cast<std::size_t>(nearest.site[i])];
    out[i] = std::max(0.0, above ? dem[i] - base : base - dem[i]);
  }
  return out;
}

}  // namespace

Raster altitude_above_channel(const Raster& dem, const Raster& channel_mask) {
  return altitude_offset(dem, channel_mask, true, ErrorKind::NoChannel);
}

Raster altitude_below_ridge(const Raster& dem, const Raster& ridge_mask) {
  return altitude_offset(dem, ridge_mask, false, ErrorKind::NoRidge);
}

Raster relative_slope_position(const Raster& aacl, const Raster& abrl) {
  require_same_grid(aacl, abrl, "relative_slope_position");
  Raster rps = Raster::like(aacl, aacl.nodata());
  for (std::size_t i = 0; i < aacl.size(); ++i) {
    if (aacl.is_nodata(i) || abrl.is_nodata(i)) continue;
    const double total = aacl[i] + abrl[i];
    rps[i] = total > 0.0 ? aacl[i] / total : 0.0;
  }
  return rps;
}

}  // namespace topo
