#include "elastoref/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "elastoref/error.hpp"

namespace elastoref::io {
namespace {

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

template <typename U>
U get_le(const std::string& in, std::size_t offset) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    v |= static_cast<U>(static_cast<unsigned char>(in[offset + b])) << (8 * b);
  }
  return v;
}

void require_bytes(const std::string& bytes, std::size_t offset, std::size_t n, const char* what) {
  if (bytes.size() < offset + n) {
    throw FormatError(std::string("truncated EFG1 file: missing ") + what, bytes.size());
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

std::string encode_grid(const Grid2D& g) {
  const GridGeometry& geo = g.geometry();
  if (geo.rows > std::numeric_limits<std::uint32_t>::max() || geo.cols > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("grid too large for EFG1");
  }
  std::string out;
  out.reserve(kGridHeaderBytes + 4 * g.size());
  out.append(kGridMagic, 4);
  put_le(out, static_cast<std::uint32_t>(geo.rows));
  put_le(out, static_cast<std::uint32_t>(geo.cols));
  put_le(out, std::bit_cast<std::uint64_t>(geo.axial_spacing));
  put_le(out, std::bit_cast<std::uint64_t>(geo.lateral_spacing));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double v = g.values()[k];
    if (!(std::abs(v) <= static_cast<double>(std::numeric_limits<float>::max()))) {
      throw ParameterError("value at index " + std::to_string(k) + " does not fit a 32-bit float");
    }
    put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

Grid2D decode_grid(const std::string& bytes) {
  require_bytes(bytes, 0, 4, "magic");
  if (std::memcmp(bytes.data(), kGridMagic, 4) != 0) throw FormatError("bad magic, expected \"EFG1\"", 0);
  require_bytes(bytes, 4, 8, "dimensions");
  const auto rows = get_le<std::uint32_t>(bytes, 4);
  const auto cols = get_le<std::uint32_t>(bytes, 8);
  require_bytes(bytes, 12, 16, "spacings");
  GridGeometry geo{rows, cols, std::bit_cast<double>(get_le<std::uint64_t>(bytes, 12)),
                   std::bit_cast<double>(get_le<std::uint64_t>(bytes, 20))};
  try {
    geo.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid header: ") + e.what(), 4);
  }

  const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
  const std::uint64_t expected = kGridHeaderBytes + 4 * count;
  if (bytes.size() < expected) {
    throw FormatError("truncated payload: header declares " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " values (" + std::to_string(expected) + " bytes), file has " +
                          std::to_string(bytes.size()),
                      bytes.size());
  }
  if (bytes.size() > expected) throw FormatError("trailing bytes after payload", expected);

  std::vector<double> values(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::size_t offset = kGridHeaderBytes + 4 * k;
    const float f = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
    if (!std::isfinite(f)) throw FormatError("non-finite payload value", offset);
    values[k] = f;
  }
  return Grid2D(geo, std::move(values));
}

void write_grid(const Grid2D& g, const std::filesystem::path& path) { write_file(path, encode_grid(g)); }

Grid2D read_grid(const std::filesystem::path& path) {
  try {
    return decode_grid(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

void write_displacement(const DisplacementField& field, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_grid(field.axial, dir / "axial.efg");
  write_grid(field.lateral, dir / "lateral.efg");
}

DisplacementField read_displacement(const std::filesystem::path& dir) {
  return {read_grid(dir / "axial.efg"), read_grid(dir / "lateral.efg")};
}

void write_strains(const StrainPair& strains, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_grid(strains.axial, dir / "e11.efg");
  write_grid(strains.lateral, dir / "e22.efg");
}

StrainPair read_strains(const std::filesystem::path& dir) {
  return {read_grid(dir / "e11.efg"), read_grid(dir / "e22.efg")};
}

std::string encode_pgm(const Grid2D& g, const PgmRange& range) {
  double lo = 0.0;
  double hi = 0.0;
  if (range) {
    lo = range->first;
    hi = range->second;
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
      throw ParameterError("PGM window needs lo < hi, got [" + format_double(lo) + ", " + format_double(hi) + "]");
    }
  } else {
    lo = g.min();
    hi = g.max();
  }

  std::string out = "P5\n" + std::to_string(g.cols()) + " " + std::to_string(g.rows()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    unsigned char px = 128;
    if (hi > lo) {
      const double t = std::clamp((g.values()[k] - lo) / (hi - lo), 0.0, 1.0);
      px = static_cast<unsigned char>(std::lround(255.0 * t));
    }
    out[header + k] = static_cast<char>(px);
  }
  return out;
}

void render_pgm(const Grid2D& g, const std::filesystem::path& path, const PgmRange& range) {
  write_file(path, encode_pgm(g, range));
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("cannot format double");
  return {buf.data(), end};
}

std::string encode_histogram_csv(const EprHistogram& h) {
  if (h.bin_edges.size() != h.counts.size() + 1) throw DimensionError("histogram edges and counts disagree");
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out += format_double(h.bin_edges[b]) + "," + format_double(h.bin_edges[b + 1]) + "," +
           std::to_string(h.counts[b]) + "\n";
  }
  return out;
}

void write_histogram_csv(const EprHistogram& h, const std::filesystem::path& path) {
  write_file(path, encode_histogram_csv(h));
}

EprHistogram read_histogram_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string header = "bin_lo,bin_hi,count\n";
  if (text.compare(0, header.size(), header) != 0) throw FormatError(path.string() + ": bad CSV header", 0);

  EprHistogram h;
  std::size_t pos = header.size();
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) throw FormatError(path.string() + ": unterminated line", pos);
    const char* p = text.data() + pos;
    const char* e = text.data() + eol;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    auto r1 = std::from_chars(p, e, lo);
    if (r1.ec != std::errc{} || r1.ptr == e || *r1.ptr != ',') throw FormatError(path.string() + ": bad bin_lo", pos);
    auto r2 = std::from_chars(r1.ptr + 1, e, hi);
    if (r2.ec != std::errc{} || r2.ptr == e || *r2.ptr != ',') throw FormatError(path.string() + ": bad bin_hi", pos);
    auto r3 = std::from_chars(r2.ptr + 1, e, count);
    if (r3.ec != std::errc{} || r3.ptr != e) throw FormatError(path.string() + ": bad count", pos);
    if (h.bin_edges.empty()) {
      h.bin_edges.push_back(lo);
    } else if (h.bin_edges.back() != lo) {
      throw FormatError(path.string() + ": bins are not contiguous", pos);
    }
    h.bin_edges.push_back(hi);
    h.counts.push_back(count);
    pos = eol + 1;
  }
  return h;
}

}  // namespace elastoref::io
