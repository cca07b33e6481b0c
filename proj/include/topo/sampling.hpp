#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topo/raster.hpp"

namespace topo {

enum class Category {
  Tracks,
  Swamp,
  Puddle,
  Pool,
  Pond,
  Fringe,
  Footprint,
  Construction,
  DrainageCanal,
  Other,
};

std::optional<Category> parse_category(std::string_view text);
const char* to_string(Category category);

struct SurveyRecord {
  GeoPoint point;
  Category category = Category::Other;
};

/// A surveyed 100 m chunk in which no water was found, as a rectangle in the
/// DEM's coordinates.
struct ChunkRecord {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(GeoPoint p) const { return p.x >= min_x && p.x < max_x && p.y >= min_y && p.y < max_y; }
};

struct Survey {
  std::vector<SurveyRecord> records;
  std::vector<ChunkRecord> chunks;
};

// Text formats: positives `x,y,category`, chunks `min_x,min_y,max_x,max_y`,
// each with that header line.
std::vector<SurveyRecord> read_positives(const std::filesystem::path& path);
std::vector<ChunkRecord> read_chunks(const std::filesystem::path& path);
void write_positives(const std::vector<SurveyRecord>& records, const std::filesystem::path& path);
void write_chunks(const std::vector<ChunkRecord>& chunks, const std::filesystem::path& path);
Survey load_survey(const std::filesystem::path& positives_path, const std::filesystem::path& chunks_path);

/// Dataset A keeps natural water (swamp, puddle, pool, pond, fringe); B adds
/// drainage canals, tracks and footprints.
enum class DatasetVariant { A, B };

std::optional<DatasetVariant> parse_variant(std::string_view text);
bool in_variant(Category category, DatasetVariant variant);
std::vector<GeoPoint> select_positives(const std::vector<SurveyRecord>& records, DatasetVariant variant);

struct NegativeSamplingOptions {
  double min_positive_distance_m = 100.0;
  double min_negative_distance_m = 30.0;
  std::uint64_t seed = 0;
};

struct NegativeSample {
  std::vector<GeoPoint> points;
  std::size_t candidates = 0;  // distinct valid cell centers inside the chunks
};

/// Cell centers inside negative chunks, accepted greedily in seeded-shuffle
/// order subject to both distance constraints.
NegativeSample generate_negatives(const std::vector<ChunkRecord>& chunks,
                                  const std::vector<GeoPoint>& positives, const Raster& dem,
                                  const NegativeSamplingOptions& options);

struct LabeledPoint {
  GeoPoint point;
  int label = 0;  // 1 = water site, 0 = negative
};

std::vector<LabeledPoint> label_points(const std::vector<GeoPoint>& positives,
                                       const std::vector<GeoPoint>& negatives);

struct FeatureRow {
  LabeledPoint sample;
  std::vector<double> values;
};

class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::vector<std::string> feature_names);

  const std::vector<std::string>& feature_names() const { return names_; }
  const std::vector<FeatureRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  /// Throws Shape unless `row.values` matches the feature list.
  void add(FeatureRow row);

  std::size_t index_of(const std::string& name) const;
  std::vector<double> column(std::size_t feature) const;
  std::vector<int> labels() const;
  std::size_t count_label(int label) const;

  /// Same rows restricted (and reordered) to `names`.
  FeatureTable select(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> names_;
  std::vector<FeatureRow> rows_;
};

/// Serialized with header `x,y,label,<features...>`.
void write_feature_table(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_feature_table(const std::filesystem::path& path);

struct Extraction {
  FeatureTable table;
  std::size_t dropped_outside = 0;
  std::size_t dropped_nodata = 0;
};

/// Samples each raster at the cell containing each point. Rows outside the
/// extent or touching nodata are dropped and counted.
Extraction extract_features(const std::vector<LabeledPoint>& points, const RasterSet& rasters);

struct LongitudeSplit {
  FeatureTable train;
  FeatureTable test;
  double threshold = 0.0;
};

/// Nearest-rank percentile of x; x < threshold trains, x >= threshold tests.
LongitudeSplit split_by_longitude(const FeatureTable& table, double percentile = 80.0);

}  // namespace topo
