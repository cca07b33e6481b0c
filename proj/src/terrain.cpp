#include "topo/terrain.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "topo/error.hpp"

namespace topo {

std::optional<SurfaceFit> surface_fit(const Raster& dem, std::size_t row, std::size_t col) {
  if (row == 0 || col == 0 || row + 1 >= dem.rows() || col + 1 >= dem.cols()) return std::nullopt;
  double z[3][3];
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const std::size_t rr = row + static_cast<std::size_t>(dr + 1) - 1;
      const std::size_t cc = col + static_cast<std::size_t>(dc + 1) - 1;
      if (dem.is_nodata(rr, cc)) return std::nullopt;
      z[dr + 1][dc + 1] = dem(rr, cc);
    }
  }
  // z[0][*] is the northern row.
  const double dx = dem.transform().cell_width_m();
  const double dy = dem.transform().cell_height_m();
  const double zc = z[1][1], ze = z[1][2], zw = z[1][0], zn = z[0][1], zs = z[2][1];
  SurfaceFit fit;
  fit.p = (ze - zw) / (2.0 * dx);
  fit.q = (zn - zs) / (2.0 * dy);
  fit.r = (ze - 2.0 * zc + zw) / (dx * dx);
  fit.t = (zn - 2.0 * zc + zs) / (dy * dy);
  fit.s = (z[0][2] - z[0][0] - z[2][2] + z[2][0]) / (4.0 * dx * dy);
  return fit;
}

namespace {

template <typename F>
Raster map_fit(const Raster& dem, F&& f) {
  Raster out = Raster::like(dem, dem.nodata());
  for (std::size_t r = 0; r < dem.rows(); ++r) {
    for (std::size_t c = 0; c < dem.cols(); ++c) {
      if (auto fit = surface_fit(dem, r, c)) {
        if (auto v = f(*fit)) out(r, c) = *v;
      }
    }
  }
  return out;
}

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double bearing_deg(double east, double north) {
  double b = std::atan2(east, north) * kDegPerRad;
  if (b < 0.0) b += 360.0;
  if (b >= 360.0) b -= 360.0;
  return b;
}

}  // namespace

Raster slope(const Raster& dem) {
  return map_fit(dem, [](const SurfaceFit& f) -> std::optional<double> {
    return std::atan(std::sqrt(f.p * f.p + f.q * f.q));
  });
}

Raster aspect(const Raster& dem) {
  return map_fit(dem, [](const SurfaceFit& f) -> std::optional<double> {
    if (f.p == 0.0 && f.q == 0.0) return std::nullopt;
    return bearing_deg(-f.p, -f.q);
  });
}

double plan_curvature(const SurfaceFit& f) {
  const double g2 = f.p * f.p + f.q * f.q;
  if (g2 == 0.0) return 0.0;
  return (f.q * f.q * f.r - 2.0 * f.p * f.q * f.s + f.p * f.p * f.t) / std::pow(g2, 1.5);
}

double profile_curvature(const SurfaceFit& f) {
  const double g2 = f.p * f.p + f.q * f.q;
  if (g2 == 0.0) return 0.0;
  return (f.p * f.p * f.r + 2.0 * f.p * f.q * f.s + f.q * f.q * f.t) /
         (g2 * std::pow(1.0 + g2, 1.5));
}

Raster plan_curvature(const Raster& dem) {
  return map_fit(dem, [](const SurfaceFit& f) -> std::optional<double> {
    return plan_curvature(f);
  });
}

Raster profile_curvature(const Raster& dem) {
  return map_fit(dem, [](const SurfaceFit& f) -> std::optional<double> {
    return profile_curvature(f);
  });
}

Raster tpi(const Raster& dem, double radius_m) {
  const double dx = dem.transform().cell_width_m();
  const double dy = dem.transform().cell_height_m();
  if (!(radius_m >= std::min(dx, dy))) {
    throw Error(ErrorKind::Parameter, "TPI radius must be at least one cell");
  }
  const std::size_t rows = dem.rows();
  const std::size_t cols = dem.cols();

  // Half-width of the disk for each row offset.
  const long reach_rows = static_cast<long>(std::floor(radius_m / dy));
  const double radius2 = radius_m * radius_m;
  std::vector<long> half_width(static_cast<std::size_t>(2 * reach_rows + 1), -1);
  for (long dr = -reach_rows; dr <= reach_rows; ++dr) {
    const double ddy = static_cast<double>(dr) * dy;
    long w = -1;
    for (long dc = 0;; ++dc) {
      const double ddx = static_cast<double>(dc) * dx;
      if (ddx * ddx + ddy * ddy > radius2) break;
      w = dc;
    }
    half_width[static_cast<std::size_t>(dr + reach_rows)] = w;
  }

  // Row prefix sums of valid values and valid counts. Values are offsets from
  // one reference elevation so that flat ground sums to exact zeros.
  double ref = 0.0;
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (!dem.is_nodata(i)) {
      ref = dem[i];
      break;
    }
  }
  const std::size_t stride = cols + 1;
  std::vector<double> sum(rows * stride, 0.0);
  std::vector<long> count(rows * stride, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const bool ok = !dem.is_nodata(r, c);
      sum[r * stride + c + 1] = sum[r * stride + c] + (ok ? dem(r, c) - ref : 0.0);
      count[r * stride + c + 1] = count[r * stride + c] + (ok ? 1 : 0);
    }
  }

  Raster out = Raster::like(dem, dem.nodata());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (dem.is_nodata(r, c)) continue;
      double total = 0.0;
      long n = 0;
      for (long dr = -reach_rows; dr <= reach_rows; ++dr) {
        const long rr = static_cast<long>(r) + dr;
        const long w = half_width[static_cast<std::size_t>(dr + reach_rows)];
        if (rr < 0 || rr >= static_cast<long>(rows) || w < 0) continue;
        const long lo = std::max(0L, static_cast<long>(c) - w);
        const long hi = std::min(static_cast<long>(cols) - 1, static_cast<long>(c) + w);
        const std::size_t base = static_cast<std::size_t>(rr) * stride;
        total += sum[base + static_cast<std::size_t>(hi) + 1] - sum[base + static_cast<std::size_t>(lo)];
        n += count[base + static_cast<std::size_t>(hi) + 1] - count[base + static_cast<std::size_t>(lo)];
      }
      const double z = dem(r, c) - ref;
      total -= z;
      n -= 1;
      if (n > 0) out(r, c) = z - total / static_cast<double>(n);
    }
  }
  return out;
}

Raster convergence_index(const Raster& aspect_deg) {
  const double dx = aspect_deg.transform().cell_width_m();
  const double dy = aspect_deg.transform().cell_height_m();
  static constexpr int kOffsets[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                         {0, 1},   {1, -1}, {1, 0},  {1, 1}};
  // Bearing from each neighbor towards the center cell.
  double towards_center[8];
  for (int k = 0; k < 8; ++k) {
    const int dr = kOffsets[k][0];
    const int dc = kOffsets[k][1];
    towards_center[k] = bearing_deg(-dc * dx, dr * dy);
  }

  Raster out = Raster::like(aspect_deg, aspect_deg.nodata());
  for (std::size_t r = 0; r < aspect_deg.rows(); ++r) {
    for (std::size_t c = 0; c < aspect_deg.cols(); ++c) {
      double total = 0.0;
      int n = 0;
      for (int k = 0; k < 8; ++k) {
        const long rr = static_cast<long>(r) + kOffsets[k][0];
        const long cc = static_cast<long>(c) + kOffsets[k][1];
        if (!aspect_deg.in_bounds(rr, cc)) continue;
        const std::size_t j = static_cast<std::size_t>(rr) * aspect_deg.cols() + static_cast<std::size_t>(cc);
        if (aspect_deg.is_nodata(j)) continue;
        double diff = std::fmod(std::fabs(aspect_deg[j] - towards_center[k]), 360.0);
        if (diff > 180.0) diff = 360.0 - diff;
        total += diff;
        ++n;
      }
      if (n >= 2) out(r, c) = (total / n - 90.0) * (100.0 / 90.0);
    }
  }
  return out;
}

Raster twi(const Raster& acc, const Raster& slope_rad) {
  require_same_grid(acc, slope_rad, "twi");
  const auto& t = acc.transform();
  const double width = std::sqrt(t.cell_width_m() * t.cell_height_m());
  Raster out = Raster::like(acc, acc.nodata());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc.is_nodata(i) || slope_rad.is_nodata(i)) continue;
    const double a = acc[i] * width;
    out[i] = std::log(a / std::max(std::tan(slope_rad[i]), kTwiTanFloor));
  }
  return out;
}

}  // namespace topo
