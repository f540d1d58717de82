#include <algorithm>
#include <cmath>

#include "artss/simd/kernels.hpp"

namespace artss::simd {
namespace {

void correlate_scalar(const double* padded, const double* weights,
                      std::size_t taps, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) acc += weights[k] * padded[i + k];
    out[i] = acc;
  }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_into_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void max_into_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] < x[i] ? x[i] : y[i];
}

void scale_clamp_scalar(double* x, std::size_t n, double factor, double lo,
                        double hi) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i] * factor;
    x[i] = std::min(std::max(v, lo), hi);
  }
}

void soft_threshold_scalar(double* x, std::size_t n, double tau) {
  for (std::size_t i = 0; i < n; ++i) {
    const double shrunk = std::max(std::fabs(x[i]) - tau, 0.0);
    x[i] = std::copysign(shrunk, x[i]);
  }
}

void u8_to_unit_scalar(const std::uint8_t* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(in[i]) / 255.0;
}

OverlapCount count_overlap_scalar(const std::uint8_t* a, const std::uint8_t* b,
                                  std::size_t n) {
  OverlapCount c;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pa = a[i] != 0;
    const bool pb = b[i] != 0;
    c.intersection += (pa && pb) ? 1 : 0;
    c.union_count += (pa || pb) ? 1 : 0;
  }
  return c;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = a[i] - b[i];
    s += r * r;
  }
  return s;
}

double sum_huber_scalar(const double* a, const double* b, std::size_t n,
                        double delta) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::fabs(a[i] - b[i]);
    s += r <= delta ? 0.5 * r * r : delta * r - 0.5 * delta * delta;
  }
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      Isa::kScalar,          correlate_scalar,      axpy_scalar,
      add_into_scalar,       max_into_scalar,       scale_clamp_scalar,
      soft_threshold_scalar, u8_to_unit_scalar,     count_overlap_scalar,
      sum_abs_diff_scalar,   sum_sq_diff_scalar,    sum_huber_scalar,
  };
  return table;
}

}  // namespace artss::simd
