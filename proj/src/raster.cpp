#include "topo/raster.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "topo/error.hpp"

namespace topo {

Raster::Raster(std::size_t rows, std::size_t cols, GeoTransform transform, double fill,
               double nodata)
    : Raster(rows, cols, transform, std::vector<double>(rows * cols, fill), nodata) {}

Raster::Raster(std::size_t rows, std::size_t cols, GeoTransform transform,
               std::vector<double> values, double nodata)
    : rows_(rows), cols_(cols), transform_(transform), values_(std::move(values)),
      nodata_(nodata) {
  if (values_.size() != rows * cols) {
    throw Error(ErrorKind::Shape, "value count " + std::to_string(values_.size()) +
                                      " does not match " + std::to_string(rows) + "x" +
                                      std::to_string(cols));
  }
  if (!(transform.cell_size_x > 0.0) || !(transform.cell_size_y > 0.0)) {
    throw Error(ErrorKind::Parameter, "cell sizes must be positive (north-up rasters only)");
  }
  if (!(transform.meters_per_unit_x > 0.0) || !(transform.meters_per_unit_y > 0.0)) {
    throw Error(ErrorKind::Parameter, "meters-per-unit factors must be positive");
  }
}

Raster Raster::like(const Raster& like, double fill) {
  return Raster(like.rows_, like.cols_, like.transform_, fill, like.nodata_);
}

std::size_t Raster::valid_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(),
                                                [this](double v) { return !is_nodata_value(v); }));
}

std::pair<double, double> meters_per_degree(double latitude_deg) {
  // Series expansion of the WGS84 meridian and parallel arc lengths.
  const double phi = latitude_deg * std::numbers::pi / 180.0;
  const double lat_m = 111132.92 - 559.82 * std::cos(2 * phi) + 1.175 * std::cos(4 * phi) -
                       0.0023 * std::cos(6 * phi);
  const double lon_m =
      111412.84 * std::cos(phi) - 93.5 * std::cos(3 * phi) + 0.118 * std::cos(5 * phi);
  return {lon_m, lat_m};
}

GeoPoint cell_center(const Raster& raster, std::size_t row, std::size_t col) {
  if (row >= raster.rows() || col >= raster.cols()) {
    throw Error(ErrorKind::Bounds, "cell (" + std::to_string(row) + "," + std::to_string(col) +
                                       ") outside " + std::to_string(raster.rows()) + "x" +
                                       std::to_string(raster.cols()));
  }
  const auto& t = raster.transform();
  return {t.origin_x + (static_cast<double>(col) + 0.5) * t.cell_size_x,
          t.origin_y - (static_cast<double>(row) + 0.5) * t.cell_size_y};
}

CellIndex locate(const Raster& raster, GeoPoint point) {
  const auto& t = raster.transform();
  const double fc = std::floor((point.x - t.origin_x) / t.cell_size_x);
  const double fr = std::floor((t.origin_y - point.y) / t.cell_size_y);
  if (!std::isfinite(fc) || !std::isfinite(fr) || fc < 0 || fr < 0 ||
      fc >= static_cast<double>(raster.cols()) || fr >= static_cast<double>(raster.rows())) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "point (" << point.x << ", " << point.y << ") outside raster extent";
    throw Error(ErrorKind::OutOfExtent, msg.str());
  }
  return {static_cast<std::size_t>(fr), static_cast<std::size_t>(fc)};
}

double metric_distance(const GeoTransform& transform, GeoPoint a, GeoPoint b) {
  const double dx = (a.x - b.x) * transform.meters_per_unit_x;
  const double dy = (a.y - b.y) * transform.meters_per_unit_y;
  return std::sqrt(dx * dx + dy * dy);
}

void require_same_grid(const Raster& a, const Raster& b, const char* what) {
  if (!a.same_grid(b)) {
    throw Error(ErrorKind::Shape, std::string(what) + ": rasters differ in shape or placement");
  }
}

// --- SRTM HGT -------------------------------------------------------------

std::pair<int, int> parse_hgt_tile_name(const std::string& stem) {
  auto fail = [&] {
    return Error(ErrorKind::MissingGeoreference,
                 "cannot derive tile corner from name '" + stem + "' (expected e.g. N06W002)");
  };
  if (stem.size() < 7) throw fail();
  const char ns = static_cast<char>(std::toupper(static_cast<unsigned char>(stem[0])));
  const char ew = static_cast<char>(std::toupper(static_cast<unsigned char>(stem[3])));
  if ((ns != 'N' && ns != 'S') || (ew != 'E' && ew != 'W')) throw fail();
  for (std::size_t i : {1u, 2u, 4u, 5u, 6u}) {
    if (!std::isdigit(static_cast<unsigned char>(stem[i]))) throw fail();
  }
  int lat = std::stoi(stem.substr(1, 2));
  int lon = std::stoi(stem.substr(4, 3));
  if (lat > 90 || lon > 180) throw fail();
  return {ns == 'S' ? -lat : lat, ew == 'W' ? -lon : lon};
}

namespace {

constexpr std::int16_t kHgtVoid = -32768;

std::size_t hgt_side(int arc_seconds) {
  if (arc_seconds == 1) return 3601;
  if (arc_seconds == 3) return 1201;
  throw Error(ErrorKind::Parameter, "arc_seconds must be 1 or 3");
}

}  // namespace

Raster read_hgt(const std::filesystem::path& path, int arc_seconds) {
  const std::size_t n = hgt_side(arc_seconds);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() != 2 * n * n) {
    throw Error(ErrorKind::MalformedTile, path.string() + " has " + std::to_string(bytes.size()) +
                                              " bytes, expected " + std::to_string(2 * n * n));
  }
  const auto [lat, lon] = parse_hgt_tile_name(path.stem().string());

  // Samples sit on whole arc-second posts; cell (0,0) is centered on the
  // tile's north-west corner.
  const double step = 1.0 / static_cast<double>(n - 1);
  const auto [mx, my] = meters_per_degree(lat + 0.5);
  GeoTransform transform{lon - 0.5 * step, lat + 1 + 0.5 * step, step, step, mx, my};

  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    const auto raw = static_cast<std::int16_t>(
        static_cast<std::uint16_t>((static_cast<unsigned>(bytes[2 * i]) << 8) | bytes[2 * i + 1]));
    values[i] = raw == kHgtVoid ? kDefaultNodata : static_cast<double>(raw);
  }
  return Raster(n, n, transform, std::move(values), kDefaultNodata);
}

void write_hgt(const Raster& raster, const std::filesystem::path& path) {
  if (raster.rows() != raster.cols() || (raster.rows() != 1201 && raster.rows() != 3601)) {
    throw Error(ErrorKind::Shape, "HGT tiles are 1201x1201 or 3601x3601");
  }
  std::vector<unsigned char> bytes(2 * raster.size());
  for (std::size_t i = 0; i < raster.size(); ++i) {
    std::int16_t v = kHgtVoid;
    if (!raster.is_nodata(i)) {
      v = static_cast<std::int16_t>(std::clamp(std::lround(raster[i]), -32767L, 32767L));
    }
    const auto u = static_cast<std::uint16_t>(v);
    bytes[2 * i] = static_cast<unsigned char>(u >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(u & 0xFF);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

// --- ESRI ASCII grid ------------------------------------------------------

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = first + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Raster read_ascii_grid(const std::filesystem::path& path, double meters_per_unit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  auto next_token = [&]() -> std::string_view {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    return std::string_view(text).substr(start, pos - start);
  };

  std::map<std::string, double> header;
  while (true) {
    const std::size_t mark = pos;
    std::string_view key = next_token();
    static const std::array<const char*, 10> known = {
        "ncols", "nrows", "xllcorner", "yllcorner", "xllcenter",
        "yllcenter", "cellsize", "dx", "dy", "nodata_value"};
    const std::string key_lower = lower(std::string(key));
    if (key.empty() || std::find_if(known.begin(), known.end(), [&](const char* k) {
                         return key_lower == k;
                       }) == known.end()) {
      pos = mark;
      break;
    }
    std::string_view value = next_token();
    double parsed = 0.0;
    if (!parse_double(value, parsed)) {
      throw Error(ErrorKind::Parse, path.string() + ": bad value for header key '" +
                                        std::string(key) + "'");
    }
    header[key_lower] = parsed;
  }

  auto require = [&](const char* key) {
    auto it = header.find(key);
    if (it == header.end()) {
      throw Error(ErrorKind::Parse, path.string() + ": missing header key '" + key + "'");
    }
    return it->second;
  };
  auto either = [&](const char* corner, const char* center, double half) {
    if (header.count(center)) return header[center] - half;
    return require(corner);
  };

  const double ncols = require("ncols");
  const double nrows = require("nrows");
  double dx = 0.0, dy = 0.0;
  if (header.count("dx") && header.count("dy")) {
    dx = header["dx"];
    dy = header["dy"];
  } else {
    dx = dy = require("cellsize");
  }
  if (!(dx > 0.0) || !(dy > 0.0)) {
    throw Error(ErrorKind::Parse, path.string() + ": cell size must be positive (north-up only)");
  }
  if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows)) {
    throw Error(ErrorKind::Parse, path.string() + ": invalid grid dimensions");
  }
  const double xll = either("xllcorner", "xllcenter", 0.5 * dx);
  const double yll = either("yllcorner", "yllcenter", 0.5 * dy);
  const double nodata = header.count("nodata_value") ? header["nodata_value"] : kDefaultNodata;

  const auto rows = static_cast<std::size_t>(nrows);
  const auto cols = static_cast<std::size_t>(ncols);
  std::vector<double> values;
  values.reserve(rows * cols);
  for (std::string_view token = next_token(); !token.empty(); token = next_token()) {
    double v = 0.0;
    if (!parse_double(token, v)) {
      throw Error(ErrorKind::Parse, path.string() + ": non-numeric cell value '" +
                                        std::string(token) + "'");
    }
    values.push_back(v);
  }
  if (values.size() != rows * cols) {
    throw Error(ErrorKind::Parse, path.string() + ": expected " + std::to_string(rows * cols) +
                                      " values, found " + std::to_string(values.size()));
  }
  GeoTransform transform{xll, yll + static_cast<double>(rows) * dy, dx, dy, meters_per_unit,
                         meters_per_unit};
  return Raster(rows, cols, transform, std::move(values), nodata);
}

void write_ascii_grid(const Raster& raster, const std::filesystem::path& path) {
  if (raster.empty()) throw Error(ErrorKind::EmptyInput, "refusing to write an empty raster");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());

  const auto& t = raster.transform();
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "ncols " << raster.cols() << "\n";
  out << "nrows " << raster.rows() << "\n";
  out << "xllcorner " << fmt(t.origin_x) << "\n";
  out << "yllcorner " << fmt(t.origin_y - static_cast<double>(raster.rows()) * t.cell_size_y)
      << "\n";
  if (t.cell_size_x == t.cell_size_y) {
    out << "cellsize " << fmt(t.cell_size_x) << "\n";
  } else {
    out << "dx " << fmt(t.cell_size_x) << "\n";
    out << "dy " << fmt(t.cell_size_y) << "\n";
  }
  out << "NODATA_value " << fmt(raster.nodata()) << "\n";

  std::string line;
  for (std::size_t r = 0; r < raster.rows(); ++r) {
    line.clear();
    for (std::size_t c = 0; c < raster.cols(); ++c) {
      const double v = raster.is_nodata(r, c) ? raster.nodata() : raster(r, c);
      const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
      if (c) line.push_back(' ');
      line.append(buf, static_cast<std::size_t>(n));
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Raster read_dem(const std::filesystem::path& path, double meters_per_unit) {
  if (lower(path.extension().string()) == ".hgt") {
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(path, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot stat " + path.string());
    return read_hgt(path, bytes == 2ull * 1201 * 1201 ? 3 : 1);
  }
  return read_ascii_grid(path, meters_per_unit);
}

}  // namespace topo

namespace topo {

const Raster& find_raster(const RasterSet& set, const std::string& name) {
  for (const auto& named : set) {
    if (named.name == name) return named.raster;
  }
  throw Error(ErrorKind::Configuration, "no raster named '" + name + "'");
}

}  // namespace topo
