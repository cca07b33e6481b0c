#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "topo/random.hpp"
#include "topo/raster.hpp"

namespace topo::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("topo_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline GeoTransform grid30(double origin_y = 0.0) { return {0.0, origin_y, 30.0, 30.0, 1.0, 1.0}; }

/// Random integer-valued DEM, optionally with nodata holes.
inline Raster random_dem(std::size_t rows, std::size_t cols, Rng& rng, double nodata_fraction = 0.0,
                         int levels = 20) {
  Raster dem(rows, cols, grid30(30.0 * static_cast<double>(rows)));
  for (std::size_t i = 0; i < dem.size(); ++i) {
    dem[i] = rng.uniform() < nodata_fraction ? dem.nodata()
                                             : static_cast<double>(rng.index(static_cast<std::size_t>(levels)));
  }
  return dem;
}

}  // namespace topo::testing
