#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace topo {

/// North-up affine placement of a grid. Cell (0,0) is the north-west cell;
/// rows advance southward.
///
/// `meters_per_unit_x/y` convert planar units to meters. They are 1 for
/// projected grids and the local meters-per-degree for geographic grids, so
/// every metric threshold (TPI radius, sampling distances) works in meters.
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size_x = 1.0;
  double cell_size_y = 1.0;
  double meters_per_unit_x = 1.0;
  double meters_per_unit_y = 1.0;

  double cell_width_m() const { return cell_size_x * meters_per_unit_x; }
  double cell_height_m() const { return cell_size_y * meters_per_unit_y; }

  bool operator==(const GeoTransform&) const = default;
};

/// Meters per degree of longitude and latitude at `latitude_deg` on the
/// WGS84 ellipsoid.
std::pair<double, double> meters_per_degree(double latitude_deg);

struct GeoPoint {
  double x = 0.0;
  double y = 0.0;
};

struct CellIndex {
  std::size_t row = 0;
  std::size_t col = 0;

  bool operator==(const CellIndex&) const = default;
};

inline constexpr double kDefaultNodata = -9999.0;

class Raster {
 public:
  Raster() = default;
  Raster(std::size_t rows, std::size_t cols, GeoTransform transform, double fill = 0.0,
         double nodata = kDefaultNodata);
  Raster(std::size_t rows, std::size_t cols, GeoTransform transform, std::vector<double> values,
         double nodata = kDefaultNodata);

  /// Same shape, transform and nodata sentinel as `like`, every cell `fill`.
  static Raster like(const Raster& like, double fill = 0.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const GeoTransform& transform() const { return transform_; }
  double nodata() const { return nodata_; }

  double operator()(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }
  double& operator()(std::size_t row, std::size_t col) { return values_[row * cols_ + col]; }
  double operator[](std::size_t index) const { return values_[index]; }
  double& operator[](std::size_t index) { return values_[index]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool is_nodata_value(double v) const { return !std::isfinite(v) || v == nodata_; }
  bool is_nodata(std::size_t index) const { return is_nodata_value(values_[index]); }
  bool is_nodata(std::size_t row, std::size_t col) const { return is_nodata(row * cols_ + col); }
  void set_nodata(std::size_t index) { values_[index] = nodata_; }

  bool in_bounds(long row, long col) const {
    return row >= 0 && col >= 0 && static_cast<std::size_t>(row) < rows_ &&
           static_cast<std::size_t>(col) < cols_;
  }

  bool same_grid(const Raster& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && transform_ == other.transform_;
  }

  std::size_t valid_count() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  GeoTransform transform_{};
  std::vector<double> values_;
  double nodata_ = kDefaultNodata;
};

/// Center of cell (row, col). Throws Bounds for out-of-range indices.
GeoPoint cell_center(const Raster& raster, std::size_t row, std::size_t col);

/// Cell containing `point` (floor mapping, west/north edges inclusive).
/// Throws OutOfExtent when the point lies outside the raster.
CellIndex locate(const Raster& raster, GeoPoint point);

/// Euclidean distance in meters between two points in the raster's units.
double metric_distance(const GeoTransform& transform, GeoPoint a, GeoPoint b);

/// Throws Shape unless `b` shares the grid of `a`.
void require_same_grid(const Raster& a, const Raster& b, const char* what);

// SRTM .hgt tiles. The tile name (e.g. N06W002) carries the georeference.
Raster read_hgt(const std::filesystem::path& path, int arc_seconds);

/// Parses the south-west corner of an SRTM tile name such as "N06W002".
std::pair<int, int> parse_hgt_tile_name(const std::string& stem);

/// Writes `raster` as a big-endian int16 tile (values rounded, nodata as -32768).
void write_hgt(const Raster& raster, const std::filesystem::path& path);

// ESRI ASCII grid.
Raster read_ascii_grid(const std::filesystem::path& path, double meters_per_unit = 1.0);
void write_ascii_grid(const Raster& raster, const std::filesystem::path& path);

/// Reads `.hgt` (resolution from the file size) or ESRI ASCII by extension.
Raster read_dem(const std::filesystem::path& path, double meters_per_unit = 1.0);

}  // namespace topo

namespace topo {

/// A feature raster tagged with the name used in feature tables and models.
struct NamedRaster {
  std::string name;
  Raster raster;
};

using RasterSet = std::vector<NamedRaster>;

/// Looks up `name`; throws Configuration when absent.
const Raster& find_raster(const RasterSet& set, const std::string& name);

}  // namespace topo
