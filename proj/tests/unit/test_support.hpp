#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "elastoref/grid.hpp"

namespace elastoref::testing {

inline Grid2D random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                          double hi = 1.0, double da = 1.0, double dl = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Grid2D g(GridGeometry{rows, cols, da, dl});
  for (double& v : g.values()) v = dist(rng);
  return g;
}

template <typename F>
Grid2D grid_from(const GridGeometry& geo, F&& f) {
  Grid2D g(geo);
  for (std::size_t i = 0; i < geo.rows; ++i)
    for (std::size_t j = 0; j < geo.cols; ++j) g(i, j) = f(i, j);
  return g;
}

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("elastoref_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

}  // namespace elastoref::testing
