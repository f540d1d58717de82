#pragma once

// Data-parallel inner loops used by the image, pooling and metric code.
//
// Every kernel has a scalar reference implementation and, where the build
// and CPU allow it, an AVX2 variant. The variant is picked once at startup
// from CPUID; ARTSS_SIMD=scalar in the environment forces the reference path.
//
// Elementwise kernels are bit-identical across variants (same operation
// order, no FMA). Reductions (sum_*) may differ in the last bits because
// lanes are summed in a different order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace artss::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

struct OverlapCount {
  std::uint64_t intersection = 0;
  std::uint64_t union_count = 0;
};

struct KernelTable {
  Isa isa;
  // out[i] = sum_k weights[k] * padded[i + k]; padded has n + taps - 1 values.
  void (*correlate)(const double* padded, const double* weights,
                    std::size_t taps, double* out, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[i] += x[i]
  void (*add_into)(const double* x, double* y, std::size_t n);
  // y[i] = max(y[i], x[i])
  void (*max_into)(const double* x, double* y, std::size_t n);
  // x[i] = clamp(x[i] * factor, lo, hi)
  void (*scale_clamp)(double* x, std::size_t n, double factor, double lo,
                      double hi);
  // x[i] = sign(x[i]) * max(|x[i]| - tau, 0)
  void (*soft_threshold)(double* x, std::size_t n, double tau);
  // out[i] = in[i] / 255
  void (*u8_to_unit)(const std::uint8_t* in, double* out, std::size_t n);
  // counts of (a && b) and (a || b) over nonzero bytes
  OverlapCount (*count_overlap)(const std::uint8_t* a, const std::uint8_t* b,
                                std::size_t n);
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  // sum of 0.5 r^2 (|r| <= delta) or delta |r| - 0.5 delta^2, r = a - b
  double (*sum_huber)(const double* a, const double* b, std::size_t n,
                      double delta);
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();

bool isa_available(Isa isa);
Isa detected_isa();
Isa active_isa();
// Switches the process-wide variant. Throws artss::Error if unavailable.
void set_active_isa(Isa isa);
const KernelTable& kernels();

// Span-based front ends over the active table.
void correlate(std::span<const double> padded, std::span<const double> weights,
               std::span<double> out);
void axpy(double a, std::span<const double> x, std::span<double> y);
void add_into(std::span<const double> x, std::span<double> y);
void max_into(std::span<const double> x, std::span<double> y);
void scale_clamp(std::span<double> x, double factor, double lo, double hi);
void soft_threshold(std::span<double> x, double tau);
void u8_to_unit(std::span<const std::uint8_t> in, std::span<double> out);
OverlapCount count_overlap(std::span<const std::uint8_t> a,
                           std::span<const std::uint8_t> b);
double sum_abs_diff(std::span<const double> a, std::span<const double> b);
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
double sum_huber(std::span<const double> a, std::span<const double> b,
                 double delta);

}  // namespace artss::simd
