// AVX2 variants. This file alone is compiled with -mavx2; callers reach it
// only through the dispatch table after a CPUID check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "artss/simd/kernels.hpp"

namespace artss::simd {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double hsum(__m256d v) {
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void correlate_avx2(const double* padded, const double* weights,
                    std::size_t taps, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < taps; ++k) {
      const __m256d w = _mm256_set1_pd(weights[k]);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(w, _mm256_loadu_pd(padded + i + k)));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) acc += weights[k] * padded[i + k];
    out[i] = acc;
  }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void add_into_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(y + i,
                     _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

void max_into_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    // max_pd(a, b) is a > b ? a : b, matching `y < x ? x : y`.
    _mm256_storeu_pd(y + i,
                     _mm256_max_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = y[i] < x[i] ? x[i] : y[i];
}

void scale_clamp_avx2(double* x, std::size_t n, double factor, double lo,
                      double hi) {
  const __m256d vf = _mm256_set1_pd(factor);
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(x + i), vf);
    _mm256_storeu_pd(x + i, _mm256_min_pd(vhi, _mm256_max_pd(vlo, v)));
  }
  for (; i < n; ++i) {
    const double v = x[i] * factor;
    x[i] = std::min(std::max(v, lo), hi);
  }
}

void soft_threshold_avx2(double* x, std::size_t n, double tau) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(x + i);
    __m256d shrunk = _mm256_max_pd(zero, _mm256_sub_pd(abs_pd(v), vtau));
    shrunk = _mm256_andnot_pd(sign, shrunk);
    _mm256_storeu_pd(x + i, _mm256_or_pd(shrunk, _mm256_and_pd(sign, v)));
  }
  for (; i < n; ++i) {
    const double shrunk = std::max(std::fabs(x[i]) - tau, 0.0);
    x[i] = std::copysign(shrunk, x[i]);
  }
}

void u8_to_unit_avx2(const std::uint8_t* in, double* out, std::size_t n) {
  const __m256d denom = _mm256_set1_pd(255.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    std::int32_t packed;
    std::memcpy(&packed, in + i, sizeof(packed));
    const __m128i wide = _mm_cvtepu8_epi32(_mm_cvtsi32_si128(packed));
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_cvtepi32_pd(wide), denom));
  }
  for (; i < n; ++i) out[i] = static_cast<double>(in[i]) / 255.0;
}

OverlapCount count_overlap_avx2(const std::uint8_t* a, const std::uint8_t* b,
                                std::size_t n) {
  OverlapCount c;
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    // Bit set where the byte is zero.
    const unsigned za = static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, zero)));
    const unsigned zb = static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(vb, zero)));
    c.intersection += static_cast<std::uint64_t>(__builtin_popcount(~za & ~zb));
    c.union_count += static_cast<std::uint64_t>(__builtin_popcount(~(za & zb)));
  }
  for (; i < n; ++i) {
    const bool pa = a[i] != 0;
    const bool pb = b[i] != 0;
    c.intersection += (pa && pb) ? 1 : 0;
    c.union_count += (pa || pb) ? 1 : 0;
  }
  return c;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, abs_pd(r));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(r, r));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double r = a[i] - b[i];
    s += r * r;
  }
  return s;
}

double sum_huber_avx2(const double* a, const double* b, std::size_t n,
                      double delta) {
  const __m256d vdelta = _mm256_set1_pd(delta);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d knee = _mm256_set1_pd(0.5 * delta * delta);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d r =
        abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    const __m256d quad = _mm256_mul_pd(_mm256_mul_pd(half, r), r);
    const __m256d lin = _mm256_sub_pd(_mm256_mul_pd(vdelta, r), knee);
    const __m256d inside = _mm256_cmp_pd(r, vdelta, _CMP_LE_OQ);
    acc = _mm256_add_pd(acc, _mm256_blendv_pd(lin, quad, inside));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double r = std::fabs(a[i] - b[i]);
    s += r <= delta ? 0.5 * r * r : delta * r - 0.5 * delta * delta;
  }
  return s;
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{
      Isa::kAvx2,          correlate_avx2,      axpy_avx2,
      add_into_avx2,       max_into_avx2,       scale_clamp_avx2,
      soft_threshold_avx2, u8_to_unit_avx2,     count_overlap_avx2,
      sum_abs_diff_avx2,   sum_sq_diff_avx2,    sum_huber_avx2,
  };
  return table;
}

}  // namespace artss::simd
