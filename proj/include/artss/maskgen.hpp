#pragma once

// Classical hand-mask generation: Gaussian smoothing, Haar wavelet
// shrinkage, Otsu thresholding and morphological refinement.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "artss/core_model.hpp"
#include "artss/imgproc.hpp"

namespace artss {

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t count() const;

  bool operator==(const BinaryMask&) const = default;
};

// Normalized taps of radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

// Separable convolution with symmetric (edge-repeating) border reflection.
CanonicalImage gaussian_smooth(const CanonicalImage& img, double sigma);

// Haar decomposition to `levels`, soft shrinkage of every detail band with
// the universal threshold sigma_hat * sqrt(2 ln N), where sigma_hat is the
// median absolute finest diagonal detail over 0.6745. Dimensions are padded
// by reflection to a multiple of 2^levels and cropped back.
CanonicalImage wavelet_denoise(const CanonicalImage& img, int levels);
int max_wavelet_levels(int width, int height);

inline constexpr int kHistogramBins = 256;
using Histogram = std::array<std::uint64_t, kHistogramBins>;

// Bin of a [0, 1] value on the 256-level grid (round(v * 255)).
int intensity_bin(double v);
Histogram intensity_histogram(const CanonicalImage& img);

struct OtsuResult {
  int threshold_bin = 0;  // foreground is bin >= threshold_bin
  double threshold = 0.0;  // threshold_bin / 255
  double between_class_variance = 0.0;
  // between-class / total variance, in [0, 1]
  double separability = 0.0;
};

// Exhaustive scan over cut points with running class sums; the first
// maximum wins ties. Throws a threshold error when fewer than two bins are
// populated.
OtsuResult otsu(const Histogram& hist);

// Otsu foreground (values >= threshold). When min_separability > 0 and the
// histogram's separability is lower, the image is rejected as having no
// separable classes.
BinaryMask threshold(const CanonicalImage& img, double min_separability = 0.0);

BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask open(const BinaryMask& mask, int radius);
BinaryMask close(const BinaryMask& mask, int radius);
// Keeps, unchanged, every 4-connected component that survives erosion.
BinaryMask open_by_reconstruction(const BinaryMask& mask, int radius);

// 4-connected labels (0 = background, components numbered from 1 in scan
// order) and per-label pixel counts (index 0 unused).
struct ComponentLabels {
  std::vector<int> labels;
  std::vector<std::size_t> sizes;
  int count() const { return static_cast<int>(sizes.size()) - 1; }
};
ComponentLabels label_components(const BinaryMask& mask);

// Largest 4-connected component; ties go to the first in scan order.
BinaryMask largest_component(const BinaryMask& mask);
// Sets background pixels not 8-connected to the border.
BinaryMask fill_holes(const BinaryMask& mask);
// Number of background regions not 8-connected to the border.
int count_holes(const BinaryMask& mask);

inline constexpr int kDefaultDiskRadius = 2;

// Opening by reconstruction, closing, largest component and hole filling,
// repeated until the mask stops changing, so refine(refine(m)) == refine(m).
BinaryMask refine(const BinaryMask& mask, int disk_radius = kDefaultDiskRadius);

inline constexpr double kDefaultMinSeparability = 0.8;

struct MaskParams {
  std::optional<double> sigma;  // default: 1.5 px scaled by width / 640
  int wavelet_levels = 2;
  int disk_radius = kDefaultDiskRadius;
  // Otsu between-class / total variance below this means no hand is
  // present; structureless images land near 0.64, hands well above 0.9.
  double min_separability = kDefaultMinSeparability;
};

double default_sigma(int width);

struct MaskProvenance {
  double sigma = 0.0;
  int wavelet_levels = 0;
  int disk_radius = 0;
  double min_separability = 0.0;
  double otsu_threshold = 0.0;
  double separability = 0.0;
};

BinaryMask generate_mask(const ImageRecord& img, const MaskParams& params = {},
                         MaskProvenance* provenance = nullptr);

}  // namespace artss
