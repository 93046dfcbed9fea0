#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include "elastoref/grid.hpp"
#include "elastoref/metrics.hpp"

namespace elastoref::io {

/// "EFG1" | rows u32 | cols u32 | axial f64 | lateral f64 | rows*cols f32,
/// all little-endian, payload row-major.
inline constexpr char kGridMagic[4] = {'E', 'F', 'G', '1'};
inline constexpr std::size_t kGridHeaderBytes = 4 + 4 + 4 + 8 + 8;

void write_grid(const Grid2D& g, const std::filesystem::path& path);
Grid2D read_grid(const std::filesystem::path& path);

std::string encode_grid(const Grid2D& g);
Grid2D decode_grid(const std::string& bytes);

/// Stores the pair as <dir>/axial.efg and <dir>/lateral.efg.
void write_displacement(const DisplacementField& field, const std::filesystem::path& dir);
DisplacementField read_displacement(const std::filesystem::path& dir);

/// Stores the pair as <dir>/e11.efg and <dir>/e22.efg.
void write_strains(const StrainPair& strains, const std::filesystem::path& dir);
StrainPair read_strains(const std::filesystem::path& dir);

/// Fixed [lo, hi] window; nullopt means the grid's own min/max.
using PgmRange = std::optional<std::pair<double, double>>;

std::string encode_pgm(const Grid2D& g, const PgmRange& range = std::nullopt);
void render_pgm(const Grid2D& g, const std::filesystem::path& path, const PgmRange& range = std::nullopt);

std::string encode_histogram_csv(const EprHistogram& h);
void write_histogram_csv(const EprHistogram& h, const std::filesystem::path& path);
/// Recovers edges and counts; in_range_fraction is not stored in the CSV.
EprHistogram read_histogram_csv(const std::filesystem::path& path);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace elastoref::io
