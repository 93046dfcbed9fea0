#include "elastoref/stencil.hpp"

#include <cmath>
#include <string>

#include "elastoref/error.hpp"

namespace elastoref {
namespace {

void require_stencil_margin(const Grid2D& g, const char* op) {
  if (g.rows() < 3 || g.cols() < 3) {
    throw DimensionError(std::string(op) + ": grid must be at least 3x3");
  }
}

// Resolves index p in [-inf, n) x (n, inf) for a 1-D line read through `at`.
template <typename At>
double extended(At&& at, long p, long n, EdgeMode edge) {
  if (p >= 0 && p < n) return at(p);
  if (edge == EdgeMode::replicate) return at(p < 0 ? 0 : n - 1);
  if (p < 0) return 2.0 * at(0) - extended(at, -p, n, edge);
  return 2.0 * at(n - 1) - extended(at, 2 * (n - 1) - p, n, edge);
}

// Convolves `src` (stride-addressed line of length n) into `dst`.
void convolve_line(const double* src, std::size_t src_stride, double* dst, std::size_t dst_stride,
                   long n, const std::vector<double>& kernel, EdgeMode edge) {
  const long radius = static_cast<long>(kernel.size() / 2);
  auto at = [&](long p) { return src[static_cast<std::size_t>(p) * src_stride]; };
  for (long p = 0; p < n; ++p) {
    double acc = 0.0;
    if (p - radius >= 0 && p + radius < n) {
      for (long t = -radius; t <= radius; ++t) acc += kernel[t + radius] * at(p + t);
    } else {
      for (long t = -radius; t <= radius; ++t) acc += kernel[t + radius] * extended(at, p + t, n, edge);
    }
    dst[static_cast<std::size_t>(p) * dst_stride] = acc;
  }
}

}  // namespace

Grid2D gradient_axial(const Grid2D& g) {
  require_stencil_margin(g, "gradient_axial");
  const std::size_t rows = g.rows();
  const std::size_t cols = g.cols();
  const double h = g.geometry().axial_spacing;
  Grid2D out(g.geometry());
  for (std::size_t j = 0; j < cols; ++j) {
    out(0, j) = (g(1, j) - g(0, j)) / h;
    out(rows - 1, j) = (g(rows - 1, j) - g(rows - 2, j)) / h;
  }
  for (std::size_t i = 1; i + 1 < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = (g(i + 1, j) - g(i - 1, j)) / (2.0 * h);
  return out;
}

Grid2D gradient_lateral(const Grid2D& g) {
  require_stencil_margin(g, "gradient_lateral");
  const std::size_t cols = g.cols();
  const double h = g.geometry().lateral_spacing;
  Grid2D out(g.geometry());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    out(i, 0) = (g(i, 1) - g(i, 0)) / h;
    for (std::size_t j = 1; j + 1 < cols; ++j) out(i, j) = (g(i, j + 1) - g(i, j - 1)) / (2.0 * h);
    out(i, cols - 1) = (g(i, cols - 1) - g(i, cols - 2)) / h;
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("gaussian sigma must be >= 0, got " + std::to_string(sigma));
  }
  if (sigma == 0.0) return {1.0};
  const long radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long t = -radius; t <= radius; ++t) {
    const double w = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));
    k[t + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

Grid2D gaussian_filter(const Grid2D& g, double sigma, EdgeMode edge) {
  const auto kernel = gaussian_kernel(sigma);
  if (kernel.size() == 1) return g;

  const std::size_t rows = g.rows();
  const std::size_t cols = g.cols();
  // Axial pass, then lateral pass.
  Grid2D tmp(g.geometry());
  const double* src = g.values().data();
  double* mid = tmp.values().data();
  for (std::size_t j = 0; j < cols; ++j)
    convolve_line(src + j, cols, mid + j, cols, static_cast<long>(rows), kernel, edge);

  Grid2D out(g.geometry());
  double* dst = out.values().data();
  for (std::size_t i = 0; i < rows; ++i)
    convolve_line(mid + i * cols, 1, dst + i * cols, 1, static_cast<long>(cols), kernel, edge);
  return out;
}

double sample_extended(const Grid2D& g, long i, long j, EdgeMode edge) {
  const long rows = static_cast<long>(g.rows());
  const long cols = static_cast<long>(g.cols());
  if (i >= 0 && i < rows) {
    auto at = [&](long p) { return g(static_cast<std::size_t>(i), static_cast<std::size_t>(p)); };
    return extended(at, j, cols, edge);
  }
  // Resolve the row first, each row sample itself extended along j.
  auto row_at = [&](long p) { return sample_extended(g, p, j, edge); };
  return extended(row_at, i, rows, edge);
}

}  // namespace elastoref
