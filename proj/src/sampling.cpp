#include "topo/sampling.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "topo/error.hpp"
#include "topo/random.hpp"

namespace topo {

namespace {

struct CategoryName {
  Category category;
  const char* name;
};

constexpr std::array<CategoryName, 10> kCategoryNames = {{
    {Category::Tracks, "tracks"},
    {Category::Swamp, "swamp"},
    {Category::Puddle, "puddle"},
    {Category::Pool, "pool"},
    {Category::Pond, "pond"},
    {Category::Fringe, "fringe"},
    {Category::Footprint, "footprint"},
    {Category::Construction, "construction"},
    {Category::DrainageCanal, "drainage_canal"},
    {Category::Other, "other"},
}};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

double parse_number(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line) + ": bad number '" + text + "'");
  }
  return v;
}

/// Reads a delimited file, checking the header and field count. Blank lines
/// are skipped; the callback gets (fields, line number).
template <typename F>
void read_delimited(const std::filesystem::path& path, const std::vector<std::string>& header,
                    F&& on_row) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!seen_header) {
      std::vector<std::string> got;
      for (auto& f : fields) got.push_back(lower(f));
      if (got != header) {
        std::string want;
        for (auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) +
                                          ": expected header '" + want + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, found " +
                                        std::to_string(fields.size()));
    }
    on_row(fields, line_no);
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void open_for_write(std::ofstream& out, const std::filesystem::path& path) {
  out.open(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace

std::optional<Category> parse_category(std::string_view text) {
  std::string key = lower(trim(text));
  std::replace(key.begin(), key.end(), ' ', '_');
  for (const auto& entry : kCategoryNames) {
    if (key == entry.name) return entry.category;
  }
  return std::nullopt;
}

const char* to_string(Category category) {
  for (const auto& entry : kCategoryNames) {
    if (entry.category == category) return entry.name;
  }
  return "other";
}

std::vector<SurveyRecord> read_positives(const std::filesystem::path& path) {
  std::vector<SurveyRecord> records;
  read_delimited(path, {"x", "y", "category"}, [&](const std::vector<std::string>& f, std::size_t line) {
    const auto category = parse_category(f[2]);
    if (!category) {
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line) +
                                        ": unknown category '" + f[2] + "'");
    }
    records.push_back({{parse_number(f[0], path, line), parse_number(f[1], path, line)}, *category});
  });
  return records;
}

std::vector<ChunkRecord> read_chunks(const std::filesystem::path& path) {
  std::vector<ChunkRecord> chunks;
  read_delimited(path, {"min_x", "min_y", "max_x", "max_y"},
                 [&](const std::vector<std::string>& f, std::size_t line) {
                   ChunkRecord chunk{parse_number(f[0], path, line), parse_number(f[1], path, line),
                                     parse_number(f[2], path, line), parse_number(f[3], path, line)};
                   if (!(chunk.max_x > chunk.min_x) || !(chunk.max_y > chunk.min_y)) {
                     throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line) +
                                                       ": chunk max must exceed min on both axes");
                   }
                   chunks.push_back(chunk);
                 });
  return chunks;
}

void write_positives(const std::vector<SurveyRecord>& records, const std::filesystem::path& path) {
  std::ofstream out;
  open_for_write(out, path);
  out << "x,y,category\n";
  for (const auto& r : records) {
    out << format_number(r.point.x) << ',' << format_number(r.point.y) << ',' << to_string(r.category) << '\n';
  }
}

void write_chunks(const std::vector<ChunkRecord>& chunks, const std::filesystem::path& path) {
  std::ofstream out;
  open_for_write(out, path);
  out << "min_x,min_y,max_x,max_y\n";
  for (const auto& c : chunks) {
    out << format_number(c.min_x) << ',' << format_number(c.min_y) << ',' << format_number(c.max_x)
        << ',' << format_number(c.max_y) << '\n';
  }
}

Survey load_survey(const std::filesystem::path& positives_path, const std::filesystem::path& chunks_path) {
  return {read_positives(positives_path), read_chunks(chunks_path)};
}

std::optional<DatasetVariant> parse_variant(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "a") return DatasetVariant::A;
  if (key == "b") return DatasetVariant::B;
  return std::nullopt;
}

bool in_variant(Category category, DatasetVariant variant) {
  switch (category) {
    case Category::Swamp:
    case Category::Puddle:
    case Category::Pool:
    case Category::Pond:
    case Category::Fringe:
      return true;
    case Category::DrainageCanal:
    case Category::Tracks:
    case Category::Footprint:
      return variant == DatasetVariant::B;
    case Category::Construction:
    case Category::Other:
      return false;
  }
  return false;
}

std::vector<GeoPoint> select_positives(const std::vector<SurveyRecord>& records, DatasetVariant variant) {
  std::vector<GeoPoint> points;
  for (const auto& r : records) {
    if (in_variant(r.category, variant)) points.push_back(r.point);
  }
  return points;
}

namespace {

/// Uniform bucket grid over metric coordinates for radius queries.
class PointIndex {
 public:
  PointIndex(const GeoTransform& transform, double radius_m)
      : transform_(transform), bucket_(std::max(radius_m, 1e-9)), radius_m_(radius_m) {}

  void insert(GeoPoint p) {
    points_.push_back(p);
    buckets_[key(bx(p), by(p))].push_back(points_.size() - 1);
  }

  /// True when some stored point is closer than the radius.
  bool any_within(GeoPoint p) const {
    const long cx = bx(p), cy = by(p);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = buckets_.find(key(cx + dx, cy + dy));
        if (it == buckets_.end()) continue;
        for (std::size_t idx : it->second) {
          if (metric_distance(transform_, p, points_[idx]) < radius_m_) return true;
        }
      }
    }
    return false;
  }

 private:
  long bx(GeoPoint p) const { return static_cast<long>(std::floor(p.x * transform_.meters_per_unit_x / bucket_)); }
  long by(GeoPoint p) const { return static_cast<long>(std::floor(p.y * transform_.meters_per_unit_y / bucket_)); }
  static std::uint64_t key(long x, long y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint32_t>(y);
  }

  GeoTransform transform_;
  double bucket_;
  double radius_m_;
  std::vector<GeoPoint> points_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace

NegativeSample generate_negatives(const std::vector<ChunkRecord>& chunks,
                                  const std::vector<GeoPoint>& positives, const Raster& dem,
                                  const NegativeSamplingOptions& options) {
  if (chunks.empty()) throw Error(ErrorKind::Configuration, "no negative chunks supplied");
  if (!(options.min_positive_distance_m >= 0) || !(options.min_negative_distance_m >= 0)) {
    throw Error(ErrorKind::Parameter, "sampling distances must be >= 0");
  }
  const auto& t = dem.transform();

  std::set<std::size_t> cells;
  for (const auto& chunk : chunks) {
    const double c0 = std::floor((chunk.min_x - t.origin_x) / t.cell_size_x - 0.5);
    const double c1 = std::ceil((chunk.max_x - t.origin_x) / t.cell_size_x - 0.5);
    const double r0 = std::floor((t.origin_y - chunk.max_y) / t.cell_size_y - 0.5);
    const double r1 = std::ceil((t.origin_y - chunk.min_y) / t.cell_size_y - 0.5);
    const long col_lo = std::max(0L, static_cast<long>(c0));
    const long col_hi = std::min(static_cast<long>(dem.cols()) - 1, static_cast<long>(c1));
    const long row_lo = std::max(0L, static_cast<long>(r0));
    const long row_hi = std::min(static_cast<long>(dem.rows()) - 1, static_cast<long>(r1));
    for (long r = row_lo; r <= row_hi; ++r) {
      for (long c = col_lo; c <= col_hi; ++c) {
        const auto rr = static_cast<std::size_t>(r), cc = static_cast<std::size_t>(c);
        if (dem.is_nodata(rr, cc)) continue;
        if (chunk.contains(cell_center(dem, rr, cc))) cells.insert(rr * dem.cols() + cc);
      }
    }
  }

  std::vector<std::size_t> order(cells.begin(), cells.end());
  Rng rng(options.seed);
  rng.shuffle(order);

  PointIndex near_positive(t, options.min_positive_distance_m);
  for (const auto& p : positives) near_positive.insert(p);
  PointIndex near_negative(t, options.min_negative_distance_m);

  NegativeSample sample;
  sample.candidates = order.size();
  for (std::size_t idx : order) {
    const GeoPoint p = cell_center(dem, idx / dem.cols(), idx % dem.cols());
    if (near_positive.any_within(p) || near_negative.any_within(p)) continue;
    near_negative.insert(p);
    sample.points.push_back(p);
  }
  return sample;
}

std::vector<LabeledPoint> label_points(const std::vector<GeoPoint>& positives,
                                       const std::vector<GeoPoint>& negatives) {
  std::vector<LabeledPoint> points;
  points.reserve(positives.size() + negatives.size());
  for (const auto& p : positives) points.push_back({p, 1});
  for (const auto& p : negatives) points.push_back({p, 0});
  return points;
}

// --- FeatureTable ---------------------------------------------------------

FeatureTable::FeatureTable(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

void FeatureTable::add(FeatureRow row) {
  if (row.values.size() != names_.size()) {
    throw Error(ErrorKind::Shape, "row has " + std::to_string(row.values.size()) + " values for " +
                                      std::to_string(names_.size()) + " features");
  }
  rows_.push_back(std::move(row));
}

std::size_t FeatureTable::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorKind::Configuration, "table has no feature '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::vector<double> FeatureTable::column(std::size_t feature) const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) out.push_back(row.values.at(feature));
  return out;
}

std::vector<int> FeatureTable::labels() const {
  std::vector<int> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) out.push_back(row.sample.label);
  return out;
}

std::size_t FeatureTable::count_label(int label) const {
  return static_cast<std::size_t>(std::count_if(rows_.begin(), rows_.end(),
                                                [&](const FeatureRow& r) { return r.sample.label == label; }));
}

FeatureTable FeatureTable::select(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(index_of(n));
  FeatureTable out(names);
  for (const auto& row : rows_) {
    FeatureRow r{row.sample, {}};
    for (std::size_t i : idx) r.values.push_back(row.values[i]);
    out.rows_.push_back(std::move(r));
  }
  return out;
}

void write_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out;
  open_for_write(out, path);
  out << "x,y,label";
  for (const auto& n : table.feature_names()) out << ',' << n;
  out << '\n';
  for (const auto& row : table.rows()) {
    out << format_number(row.sample.point.x) << ',' << format_number(row.sample.point.y) << ','
        << row.sample.label;
    for (double v : row.values) out << ',' << format_number(v);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::optional<FeatureTable> table;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!table) {
      if (fields.size() < 3 || lower(fields[0]) != "x" || lower(fields[1]) != "y" ||
          lower(fields[2]) != "label") {
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) +
                                          ": expected header 'x,y,label,<features...>'");
      }
      table.emplace(std::vector<std::string>(fields.begin() + 3, fields.end()));
      continue;
    }
    if (fields.size() != table->feature_names().size() + 3) {
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": wrong field count");
    }
    FeatureRow row;
    row.sample.point = {parse_number(fields[0], path, line_no), parse_number(fields[1], path, line_no)};
    const double label = parse_number(fields[2], path, line_no);
    if (label != 0.0 && label != 1.0) {
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": label must be 0 or 1");
    }
    row.sample.label = static_cast<int>(label);
    for (std::size_t i = 3; i < fields.size(); ++i) row.values.push_back(parse_number(fields[i], path, line_no));
    table->add(std::move(row));
  }
  if (!table) throw Error(ErrorKind::Parse, path.string() + ": empty feature table file");
  return *table;
}

Extraction extract_features(const std::vector<LabeledPoint>& points, const RasterSet& rasters) {
  if (rasters.empty()) throw Error(ErrorKind::Configuration, "no feature rasters supplied");
  for (const auto& named : rasters) require_same_grid(rasters.front().raster, named.raster, "extract_features");
  std::vector<std::string> names;
  for (const auto& named : rasters) names.push_back(named.name);

  Extraction result{FeatureTable(names)};
  const Raster& grid = rasters.front().raster;
  for (const auto& point : points) {
    CellIndex cell;
    try {
      cell = locate(grid, point.point);
    } catch (const Error&) {
      ++result.dropped_outside;
      continue;
    }
    FeatureRow row{point, {}};
    bool ok = true;
    for (const auto& named : rasters) {
      if (named.raster.is_nodata(cell.row, cell.col)) {
        ok = false;
        break;
      }
      row.values.push_back(named.raster(cell.row, cell.col));
    }
    if (!ok) {
      ++result.dropped_nodata;
      continue;
    }
    result.table.add(std::move(row));
  }
  if (result.table.empty()) {
    throw Error(ErrorKind::EmptyInput, "every sample point was dropped (" +
                                           std::to_string(result.dropped_outside) + " outside, " +
                                           std::to_string(result.dropped_nodata) + " on nodata)");
  }
  return result;
}

LongitudeSplit split_by_longitude(const FeatureTable& table, double percentile) {
  if (table.empty()) throw Error(ErrorKind::Split, "cannot split an empty table");
  if (!(percentile > 0.0) || !(percentile <= 100.0)) {
    throw Error(ErrorKind::Parameter, "percentile must be in (0, 100]");
  }
  std::vector<double> xs;
  for (const auto& row : table.rows()) xs.push_back(row.sample.point.x);
  std::sort(xs.begin(), xs.end());
  const auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(xs.size()) / 100.0));
  const double threshold = xs[std::max<std::size_t>(rank, 1) - 1];

  LongitudeSplit split{FeatureTable(table.feature_names()), FeatureTable(table.feature_names()), threshold};
  for (const auto& row : table.rows()) {
    (row.sample.point.x < threshold ? split.train : split.test).add(row);
  }
  if (split.train.empty() || split.test.empty()) {
    throw Error(ErrorKind::Split, "longitude threshold leaves an empty " +
                                      std::string(split.train.empty() ? "train" : "test") + " set");
  }
  return split;
}

}  // namespace topo
