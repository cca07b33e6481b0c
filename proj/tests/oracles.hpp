#pragma once

// Slow reference implementations used only by tests. They follow the textbook
// definitions directly and share no code with the library algorithms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "topo/raster.hpp"

namespace topo::oracle {

inline constexpr int kNbr[8][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}};

/// Planchon-Darboux: start at +inf away from edge seeds and lower each cell to
/// max(z, min over neighbors of (W + rise)) until nothing changes.
inline std::vector<double> fill(const Raster& dem, double min_slope) {
  const long rows = static_cast<long>(dem.rows());
  const long cols = static_cast<long>(dem.cols());
  const double dx = dem.transform().cell_width_m();
  const double dy = dem.transform().cell_height_m();
  const double spacing = std::min(dx, dy);
  auto valid = [&](long r, long c) { return r >= 0 && c >= 0 && r < rows && c < cols && !dem.is_nodata(r * cols + c); };
  std::vector<double> w(dem.size(), std::numeric_limits<double>::infinity());
  std::vector<char> seed(dem.size(), 0);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (!valid(r, c)) continue;
      bool edge = false;
      for (auto& k : kNbr) edge = edge || !valid(r + k[0], c + k[1]);
      if (edge) {
        seed[r * cols + c] = 1;
        w[r * cols + c] = dem[r * cols + c];
      }
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) {
        const long i = r * cols + c;
        if (!valid(r, c) || seed[i]) continue;
        double lowest = std::numeric_limits<double>::infinity();
        for (auto& k : kNbr) {
          if (!valid(r + k[0], c + k[1])) continue;
          const double ddx = k[1] * dx, ddy = k[0] * dy;
          const double rise = min_slope * (std::sqrt(ddx * ddx + ddy * ddy) / spacing);
          lowest = std::min(lowest, w[(r + k[0]) * cols + c + k[1]] + rise);
        }
        const double v = std::max(dem[i], lowest);
        if (v < w[i]) {
          w[i] = v;
          changed = true;
        }
      }
    }
  }
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (dem.is_nodata(i)) w[i] = dem.nodata();
  }
  return w;
}

/// Steepest-descent neighbor by exhaustive comparison: code 1..8, 0 when no
/// neighbor is lower.
inline int steepest(const Raster& z, long r, long c) {
  const double dx = z.transform().cell_width_m();
  const double dy = z.transform().cell_height_m();
  int best = 0;
  double best_g = 0;
  for (int k = 0; k < 8; ++k) {
    const long rr = r + kNbr[k][0], cc = c + kNbr[k][1];
    if (!z.in_bounds(rr, cc) || z.is_nodata(rr, cc)) continue;
    const double g = (z(r, c) - z(rr, cc)) / std::hypot(kNbr[k][1] * dx, kNbr[k][0] * dy);
    if (g > 0 && (best == 0 || g > best_g)) {
      best = k + 1;
      best_g = g;
    }
  }
  return best;
}

/// Recursive memoized upstream count.
inline std::vector<double> accumulation(const Raster& dir) {
  const long rows = static_cast<long>(dir.rows());
  const long cols = static_cast<long>(dir.cols());
  std::vector<double> memo(dir.size(), -1);
  std::function<double(long, long)> count = [&](long r, long c) -> double {
    double& m = memo[r * cols + c];
    if (m >= 0) return m;
    double total = 1;
    for (int k = 0; k < 8; ++k) {
      const long ur = r - kNbr[k][0], uc = c - kNbr[k][1];
      if (ur < 0 || uc < 0 || ur >= rows || uc >= cols || dir.is_nodata(ur * cols + uc)) continue;
      if (static_cast<int>(dir(ur, uc)) == k + 1) total += count(ur, uc);
    }
    return m = total;
  };
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (dir.is_nodata(r * cols + c)) {
        memo[r * cols + c] = dir.nodata();
      } else {
        count(r, c);
      }
    }
  }
  return memo;
}

/// Minimum distance to any mask cell, plus the winning site under the
/// lower-elevation tie rule.
struct Nearest {
  std::vector<double> distance;
  std::vector<long> site;
};

inline Nearest nearest(const Raster& mask, const Raster* elevation) {
  const long rows = static_cast<long>(mask.rows());
  const long cols = static_cast<long>(mask.cols());
  const double dx = mask.transform().cell_width_m();
  const double dy = mask.transform().cell_height_m();
  std::vector<long> sites;
  for (long i = 0; i < rows * cols; ++i) {
    if (!mask.is_nodata(i) && mask[i] != 0.0) sites.push_back(i);
  }
  Nearest out{std::vector<double>(mask.size(), -1), std::vector<long>(mask.size(), -1)};
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (mask.is_nodata(r * cols + c)) continue;
      double best = std::numeric_limits<double>::infinity();
      long best_site = -1;
      for (long s : sites) {
        const double ddx = static_cast<double>(s % cols - c) * dx;
        const double ddy = static_cast<double>(s / cols - r) * dy;
        const double d2 = ddx * ddx + ddy * ddy;
        if (d2 < best || (d2 == best && elevation && (*elevation)[s] < (*elevation)[best_site])) {
          best = d2;
          best_site = s;
        }
      }
      out.distance[r * cols + c] = std::sqrt(best);
      out.site[r * cols + c] = best_site;
    }
  }
  return out;
}

/// TPI by enumerating every cell of the raster and testing disk membership.
inline std::vector<double> tpi(const Raster& dem, double radius_m) {
  const long rows = static_cast<long>(dem.rows());
  const long cols = static_cast<long>(dem.cols());
  const double dx = dem.transform().cell_width_m();
  const double dy = dem.transform().cell_height_m();
  std::vector<double> out(dem.size(), dem.nodata());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (dem.is_nodata(r * cols + c)) continue;
      double sum = 0;
      long n = 0;
      for (long rr = 0; rr < rows; ++rr) {
        for (long cc = 0; cc < cols; ++cc) {
          if ((rr == r && cc == c) || dem.is_nodata(rr * cols + cc)) continue;
          const double ddx = static_cast<double>(cc - c) * dx, ddy = static_cast<double>(rr - r) * dy;
          if (ddx * ddx + ddy * ddy <= radius_m * radius_m) {
            sum += dem(rr, cc);
            ++n;
          }
        }
      }
      if (n > 0) out[r * cols + c] = dem(r, c) - sum / static_cast<double>(n);
    }
  }
  return out;
}

}  // namespace topo::oracle
