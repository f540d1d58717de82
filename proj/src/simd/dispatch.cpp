#include <atomic>
#include <cstdlib>
#include <string>

#include "artss/error.hpp"
#include "artss/simd/kernels.hpp"

namespace artss::simd {

#if defined(ARTSS_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(ARTSS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
  return isa == Isa::kScalar ? &scalar_kernels() : avx2_kernels();
}

Isa initial_isa() {
  if (const char* forced = std::getenv("ARTSS_SIMD")) {
    if (std::string(forced) == "scalar") return Isa::kScalar;
  }
  return detected_isa();
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{table_for(initial_isa())};
  return table;
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    fail(ErrorKind::kValidation, std::string(what) + ": length mismatch (" +
                                     std::to_string(a) + " vs " +
                                     std::to_string(b) + ")");
  }
}

}  // namespace

std::string_view isa_name(Isa isa) {
  return isa == Isa::kScalar ? "scalar" : "avx2";
}

const KernelTable* avx2_kernels() {
#if defined(ARTSS_HAVE_AVX2)
  if (cpu_has_avx2()) return &avx2_kernel_table();
#endif
  return nullptr;
}

bool isa_available(Isa isa) { return table_for(isa) != nullptr; }

Isa detected_isa() { return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar; }

Isa active_isa() { return active_table().load()->isa; }

void set_active_isa(Isa isa) {
  const KernelTable* table = table_for(isa);
  if (table == nullptr) {
    fail(ErrorKind::kValidation,
         "SIMD variant '" + std::string(isa_name(isa)) + "' is not available");
  }
  active_table().store(table);
}

const KernelTable& kernels() { return *active_table().load(); }

void correlate(std::span<const double> padded, std::span<const double> weights,
               std::span<double> out) {
  if (weights.empty() || padded.size() + 1 < weights.size() ||
      padded.size() - weights.size() + 1 != out.size()) {
    fail(ErrorKind::kValidation, "correlate: padded length must be out + taps - 1");
  }
  kernels().correlate(padded.data(), weights.data(), weights.size(), out.data(),
                      out.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "axpy");
  kernels().axpy(a, x.data(), y.data(), x.size());
}

void add_into(std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "add_into");
  kernels().add_into(x.data(), y.data(), x.size());
}

void max_into(std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "max_into");
  kernels().max_into(x.data(), y.data(), x.size());
}

void scale_clamp(std::span<double> x, double factor, double lo, double hi) {
  kernels().scale_clamp(x.data(), x.size(), factor, lo, hi);
}

void soft_threshold(std::span<double> x, double tau) {
  kernels().soft_threshold(x.data(), x.size(), tau);
}

void u8_to_unit(std::span<const std::uint8_t> in, std::span<double> out) {
  check_sizes(in.size(), out.size(), "u8_to_unit");
  kernels().u8_to_unit(in.data(), out.data(), in.size());
}

OverlapCount count_overlap(std::span<const std::uint8_t> a,
                           std::span<const std::uint8_t> b) {
  check_sizes(a.size(), b.size(), "count_overlap");
  return kernels().count_overlap(a.data(), b.data(), a.size());
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "sum_abs_diff");
  return kernels().sum_abs_diff(a.data(), b.data(), a.size());
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "sum_sq_diff");
  return kernels().sum_sq_diff(a.data(), b.data(), a.size());
}

double sum_huber(std::span<const double> a, std::span<const double> b,
                 double delta) {
  check_sizes(a.size(), b.size(), "sum_huber");
  return kernels().sum_huber(a.data(), b.data(), a.size(), delta);
}

}  // namespace artss::simd
