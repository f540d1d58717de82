#include "artss/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "artss/error.hpp"
#include "artss/simd/kernels.hpp"

namespace artss {
namespace {

__extension__ typedef unsigned __int128 u128;
__extension__ typedef __int128 i128;

// Largest pixel count for which (s0 N - S n0)^2 * n0 n1 stays below 2^128.
constexpr std::uint64_t kExactOtsuLimit = 800000;


// Symmetric reflection: ... c b a | a b c ... | c b a ...
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

struct Offset {
  int dx;
  int dy;
};

std::vector<Offset> disk_offsets(int radius) {
  std::vector<Offset> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) out.push_back({dx, dy});
    }
  }
  return out;
}

// Out-of-frame pixels are neutral: ignored by both erosion and dilation,
// which keeps the two operators adjoint on the bounded frame.
BinaryMask morph(const BinaryMask& mask, int radius, bool dilation) {
  if (radius < 0) fail(ErrorKind::kValidation, "structuring element radius must be >= 0");
  const auto offsets = disk_offsets(radius);
  BinaryMask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      bool value = !dilation;
      for (const Offset& o : offsets) {
        const int nx = x + o.dx;
        const int ny = y + o.dy;
        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
        const bool on = mask.at(nx, ny) != 0;
        if (dilation && on) {
          value = true;
          break;
        }
        if (!dilation && !on) {
          value = false;
          break;
        }
      }
      out.at(x, y) = value ? 1 : 0;
    }
  }
  return out;
}

struct HaarLevel {
  int w = 0;  // size of each band
  int h = 0;
  std::vector<double> horizontal;
  std::vector<double> vertical;
  std::vector<double> diagonal;
};

double median_abs(std::vector<double> values) {
  if (values.empty()) return 0.0;
  for (double& v : values) v = std::fabs(v);
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Error in_stage(const char* stage, const Error& e) {
  return Error(e.kind(), std::string("stage '") + stage + "': " + e.what());
}

}  // namespace

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(ErrorKind::kValidation, "gaussian sigma must be > 0, got " + std::to_string(sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

CanonicalImage gaussian_smooth(const CanonicalImage& img, double sigma) {
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = img.width;
  const int h = img.height;

  CanonicalImage horiz(w, h);
  std::vector<double> padded(static_cast<std::size_t>(w + 2 * radius));
  for (int y = 0; y < h; ++y) {
    const auto src = img.row(y);
    for (int i = 0; i < w + 2 * radius; ++i) {
      padded[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(reflect_index(i - radius, w))];
    }
    simd::correlate(padded, kernel, horiz.row(y));
  }

  CanonicalImage out(w, h);
  out.orientation_applied = img.orientation_applied;
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    for (int k = 0; k < static_cast<int>(kernel.size()); ++k) {
      const int sy = reflect_index(y + k - radius, h);
      simd::axpy(kernel[static_cast<std::size_t>(k)], horiz.row(sy), dst);
    }
  }
  simd::scale_clamp(out.pixels, 1.0, 0.0, 1.0);
  return out;
}

int max_wavelet_levels(int width, int height) {
  const int m = std::min(width, height);
  int levels = 0;
  while ((2 << levels) <= m) ++levels;
  return levels;
}

CanonicalImage wavelet_denoise(const CanonicalImage& img, int levels) {
  const int max_levels = max_wavelet_levels(img.width, img.height);
  if (levels < 1 || levels > max_levels) {
    fail(ErrorKind::kValidation, "wavelet levels must be in [1, " +
                                     std::to_string(max_levels) + "], got " +
                                     std::to_string(levels));
  }
  const int block = 1 << levels;
  const int pw = (img.width + block - 1) / block * block;
  const int ph = (img.height + block - 1) / block * block;

  std::vector<double> approx(static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph));
  for (int y = 0; y < ph; ++y) {
    const int sy = reflect_index(y, img.height);
    for (int x = 0; x < pw; ++x) {
      approx[static_cast<std::size_t>(y) * pw + x] = img.at(reflect_index(x, img.width), sy);
    }
  }

  std::vector<HaarLevel> pyramid;
  int cw = pw;
  int ch = ph;
  for (int l = 0; l < levels; ++l) {
    HaarLevel lv;
    lv.w = cw / 2;
    lv.h = ch / 2;
    const std::size_t n = static_cast<std::size_t>(lv.w) * static_cast<std::size_t>(lv.h);
    lv.horizontal.resize(n);
    lv.vertical.resize(n);
    lv.diagonal.resize(n);
    std::vector<double> next(n);
    for (int j = 0; j < lv.h; ++j) {
      for (int i = 0; i < lv.w; ++i) {
        const double a = approx[static_cast<std::size_t>(2 * j) * cw + 2 * i];
        const double b = approx[static_cast<std::size_t>(2 * j) * cw + 2 * i + 1];
        const double c = approx[static_cast<std::size_t>(2 * j + 1) * cw + 2 * i];
        const double d = approx[static_cast<std::size_t>(2 * j + 1) * cw + 2 * i + 1];
        const std::size_t k = static_cast<std::size_t>(j) * lv.w + i;
        next[k] = (a + b + c + d) / 2.0;
        lv.horizontal[k] = (a - b + c - d) / 2.0;
        lv.vertical[k] = (a + b - c - d) / 2.0;
        lv.diagonal[k] = (a - b - c + d) / 2.0;
      }
    }
    approx = std::move(next);
    cw = lv.w;
    ch = lv.h;
    pyramid.push_back(std::move(lv));
  }

  const double sigma_hat = median_abs(pyramid.front().diagonal) / 0.6745;
  const double n_pixels = static_cast<double>(img.width) * static_cast<double>(img.height);
  const double tau = sigma_hat * std::sqrt(2.0 * std::log(n_pixels));
  for (HaarLevel& lv : pyramid) {
    simd::soft_threshold(lv.horizontal, tau);
    simd::soft_threshold(lv.vertical, tau);
    simd::soft_threshold(lv.diagonal, tau);
  }

  for (int l = levels - 1; l >= 0; --l) {
    const HaarLevel& lv = pyramid[static_cast<std::size_t>(l)];
    const int ow = lv.w * 2;
    std::vector<double> up(static_cast<std::size_t>(ow) * static_cast<std::size_t>(lv.h * 2));
    for (int j = 0; j < lv.h; ++j) {
      for (int i = 0; i < lv.w; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * lv.w + i;
        const double s = approx[k];
        const double hd = lv.horizontal[k];
        const double vd = lv.vertical[k];
        const double dd = lv.diagonal[k];
        up[static_cast<std::size_t>(2 * j) * ow + 2 * i] = (s + hd + vd + dd) / 2.0;
        up[static_cast<std::size_t>(2 * j) * ow + 2 * i + 1] = (s - hd + vd - dd) / 2.0;
        up[static_cast<std::size_t>(2 * j + 1) * ow + 2 * i] = (s + hd - vd - dd) / 2.0;
        up[static_cast<std::size_t>(2 * j + 1) * ow + 2 * i + 1] = (s - hd - vd + dd) / 2.0;
      }
    }
    approx = std::move(up);
  }

  CanonicalImage out(img.width, img.height);
  out.orientation_applied = img.orientation_applied;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      out.at(x, y) = std::clamp(approx[static_cast<std::size_t>(y) * pw + x], 0.0, 1.0);
    }
  }
  return out;
}

int intensity_bin(double v) {
  const long b = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<int>(b);
}

Histogram intensity_histogram(const CanonicalImage& img) {
  Histogram hist{};
  for (double v : img.pixels) ++hist[static_cast<std::size_t>(intensity_bin(v))];
  return hist;
}

OtsuResult otsu(const Histogram& hist) {
  std::uint64_t total = 0;
  std::uint64_t total_sum = 0;
  double total_sq = 0.0;
  int populated = 0;
  for (int i = 0; i < kHistogramBins; ++i) {
    const std::uint64_t n = hist[static_cast<std::size_t>(i)];
    total += n;
    total_sum += n * static_cast<std::uint64_t>(i);
    total_sq += static_cast<double>(n) * i * i;
    if (n > 0) ++populated;
  }
  if (populated < 2) {
    fail(ErrorKind::kThreshold, "image has fewer than two distinct intensity levels; no separable classes");
  }

  // n0 n1 (m0 - m1)^2 = (s0 N - S n0)^2 / (n0 n1). Candidates are compared as
  // exact fractions while the products fit in 128 bits.
  const bool exact = total <= kExactOtsuLimit;
  const double nt = static_cast<double>(total);
  OtsuResult best;
  best.between_class_variance = -1.0;
  u128 best_num = 0;
  u128 best_den = 1;
  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (int t = 1; t < kHistogramBins; ++t) {
    const std::uint64_t c = hist[static_cast<std::size_t>(t - 1)];
    n0 += c;
    s0 += c * static_cast<std::uint64_t>(t - 1);
    const std::uint64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const double diff = static_cast<double>(s0) / static_cast<double>(n0) -
                        static_cast<double>(total_sum - s0) / static_cast<double>(n1);
    const double var_b = static_cast<double>(n0) * static_cast<double>(n1) * (diff * diff) / (nt * nt);
    bool better = false;
    if (exact) {
      const i128 d = static_cast<i128>(s0) * static_cast<i128>(total) -
                     static_cast<i128>(total_sum) * static_cast<i128>(n0);
      const u128 mag = static_cast<u128>(d < 0 ? -d : d);
      const u128 num = mag * mag;
      const u128 den = static_cast<u128>(n0) * n1;
      better = best.between_class_variance < 0.0 || num * best_den > best_num * den;
      if (better) {
        best_num = num;
        best_den = den;
      }
    } else {
      better = var_b > best.between_class_variance;
    }
    if (better) {
      best.between_class_variance = var_b;
      best.threshold_bin = t;
    }
  }
  best.threshold = best.threshold_bin / 255.0;
  const double mean = static_cast<double>(total_sum) / nt;
  const double var_total = total_sq / nt - mean * mean;
  best.separability = var_total > 0.0 ? std::min(1.0, best.between_class_variance / var_total) : 0.0;
  return best;
}

BinaryMask threshold(const CanonicalImage& img, double min_separability) {
  const OtsuResult r = otsu(intensity_histogram(img));
  if (min_separability > 0.0 && r.separability < min_separability) {
    fail(ErrorKind::kThreshold, "intensity classes are not separable (separability " +
                                    std::to_string(r.separability) + " < " +
                                    std::to_string(min_separability) + ")");
  }
  BinaryMask mask(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    mask.pixels[i] = intensity_bin(img.pixels[i]) >= r.threshold_bin ? 1 : 0;
  }
  return mask;
}

BinaryMask erode(const BinaryMask& mask, int radius) { return morph(mask, radius, false); }
BinaryMask dilate(const BinaryMask& mask, int radius) { return morph(mask, radius, true); }
BinaryMask open(const BinaryMask& mask, int radius) { return dilate(erode(mask, radius), radius); }
BinaryMask close(const BinaryMask& mask, int radius) { return erode(dilate(mask, radius), radius); }

ComponentLabels label_components(const BinaryMask& mask) {
  ComponentLabels out;
  out.labels.assign(mask.pixels.size(), 0);
  out.sizes.push_back(0);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * mask.width + x;
      if (mask.pixels[idx] == 0 || out.labels[idx] != 0) continue;
      const int label = static_cast<int>(out.sizes.size());
      std::size_t size = 0;
      out.labels[idx] = label;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        ++size;
        constexpr int kDx[] = {1, -1, 0, 0};
        constexpr int kDy[] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const int nx = cx + kDx[d];
          const int ny = cy + kDy[d];
          if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
          const std::size_t n = static_cast<std::size_t>(ny) * mask.width + nx;
          if (mask.pixels[n] != 0 && out.labels[n] == 0) {
            out.labels[n] = label;
            queue.emplace_back(nx, ny);
          }
        }
      }
      out.sizes.push_back(size);
    }
  }
  return out;
}

BinaryMask largest_component(const BinaryMask& mask) {
  const ComponentLabels cc = label_components(mask);
  BinaryMask out(mask.width, mask.height);
  if (cc.count() == 0) return out;
  int best = 1;
  for (int l = 2; l <= cc.count(); ++l) {
    if (cc.sizes[static_cast<std::size_t>(l)] > cc.sizes[static_cast<std::size_t>(best)]) best = l;
  }
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = cc.labels[i] == best ? 1 : 0;
  }
  return out;
}

namespace {

// Background reachable from the frame border through 8-connected moves.
std::vector<std::uint8_t> outside_background(const BinaryMask& mask) {
  std::vector<std::uint8_t> reached(mask.pixels.size(), 0);
  std::deque<std::pair<int, int>> queue;
  auto seed = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * mask.width + x;
    if (mask.pixels[i] == 0 && !reached[i]) {
      reached[i] = 1;
      queue.emplace_back(x, y);
    }
  };
  for (int x = 0; x < mask.width; ++x) {
    seed(x, 0);
    seed(x, mask.height - 1);
  }
  for (int y = 0; y < mask.height; ++y) {
    seed(0, y);
    seed(mask.width - 1, y);
  }
  while (!queue.empty()) {
    const auto [cx, cy] = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = cx + dx;
        const int ny = cy + dy;
        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
        seed(nx, ny);
      }
    }
  }
  return reached;
}

}  // namespace

BinaryMask fill_holes(const BinaryMask& mask) {
  const auto reached = outside_background(mask);
  BinaryMask out = mask;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    if (out.pixels[i] == 0 && !reached[i]) out.pixels[i] = 1;
  }
  return out;
}

int count_holes(const BinaryMask& mask) {
  const auto reached = outside_background(mask);
  // Label unreached background with 8-connectivity.
  std::vector<std::uint8_t> seen(mask.pixels.size(), 0);
  int holes = 0;
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * mask.width + x;
      if (mask.pixels[i] != 0 || reached[i] || seen[i]) continue;
      ++holes;
      seen[i] = 1;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
            const std::size_t n = static_cast<std::size_t>(ny) * mask.width + nx;
            if (mask.pixels[n] == 0 && !seen[n]) {
              seen[n] = 1;
              queue.emplace_back(nx, ny);
            }
          }
        }
      }
    }
  }
  return holes;
}

BinaryMask open_by_reconstruction(const BinaryMask& mask, int radius) {
  const BinaryMask marker = erode(mask, radius);
  const ComponentLabels comp = label_components(mask);
  std::vector<std::uint8_t> keep(comp.sizes.size(), 0);
  for (std::size_t i = 0; i < marker.pixels.size(); ++i) {
    if (marker.pixels[i]) keep[static_cast<std::size_t>(comp.labels[i])] = 1;
  }
  BinaryMask out(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.pixels.size(); ++i) {
    out.pixels[i] = mask.pixels[i] && keep[static_cast<std::size_t>(comp.labels[i])] ? 1 : 0;
  }
  return out;
}

BinaryMask refine(const BinaryMask& mask, int disk_radius) {
  constexpr int kMaxPasses = 32;
  BinaryMask current = mask;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const BinaryMask opened = open_by_reconstruction(current, disk_radius);
    if (opened.count() == 0) {
      fail(ErrorKind::kRefinement, "mask is empty after opening; no hand found");
    }
    BinaryMask next = fill_holes(largest_component(close(opened, disk_radius)));
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

double default_sigma(int width) { return 1.5 * static_cast<double>(width) / 640.0; }

BinaryMask generate_mask(const ImageRecord& img, const MaskParams& params,
                         MaskProvenance* provenance) {
  const CanonicalImage canonical = to_canonical(img);
  const double sigma = params.sigma.value_or(default_sigma(img.width));

  CanonicalImage smoothed;
  try {
    smoothed = gaussian_smooth(canonical, sigma);
  } catch (const Error& e) {
    throw in_stage("gaussian_smooth", e);
  }
  CanonicalImage denoised;
  try {
    denoised = wavelet_denoise(smoothed, params.wavelet_levels);
  } catch (const Error& e) {
    throw in_stage("wavelet_denoise", e);
  }
  OtsuResult otsu_result;
  BinaryMask raw;
  try {
    otsu_result = otsu(intensity_histogram(denoised));
    raw = threshold(denoised);
  } catch (const Error& e) {
    throw in_stage("threshold", e);
  }
  BinaryMask refined;
  try {
    if (otsu_result.separability < params.min_separability) {
      fail(ErrorKind::kRefinement,
           "no hand found: intensity separability " + std::to_string(otsu_result.separability) +
               " is below " + std::to_string(params.min_separability));
    }
    refined = refine(raw, params.disk_radius);
  } catch (const Error& e) {
    throw in_stage("refine", e);
  }
  if (provenance != nullptr) {
    *provenance = MaskProvenance{sigma,
                                 params.wavelet_levels,
                                 params.disk_radius,
                                 params.min_separability,
                                 otsu_result.threshold,
                                 otsu_result.separability};
  }
  return refined;
}

}  // namespace artss
