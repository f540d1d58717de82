#pragma once

// Resize, intensity normalization, orientation estimation and reorientation
// to the canonical pose (hand long axis vertical, 90 degrees).

#include <span>
#include <vector>

#include "artss/core_model.hpp"

namespace artss {

// Real-valued image in [0, 1], row-major.
struct CanonicalImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
  double orientation_applied = 0.0;  // degrees, counter-clockwise

  CanonicalImage() = default;
  CanonicalImage(int w, int h, double fill = 0.0)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::span<double> row(int y) {
    return {pixels.data() + static_cast<std::size_t>(y) * width,
            static_cast<std::size_t>(width)};
  }
  std::span<const double> row(int y) const {
    return {pixels.data() + static_cast<std::size_t>(y) * width,
            static_cast<std::size_t>(width)};
  }
};

enum class Interpolation { kBilinear, kNearest };

inline constexpr double kDefaultForegroundThreshold = 0.1;

// Normalizes 8-bit intensities by 1/255 without resampling.
CanonicalImage to_canonical(const ImageRecord& img);

// Half-pixel-centred resampling of a raw buffer, edge samples clamped. No
// size floor, so it also serves crop extraction.
std::vector<double> resample(std::span<const double> src, int src_w, int src_h,
                             int dst_w, int dst_h,
                             Interpolation mode = Interpolation::kBilinear);

// Bilinear resize of an 8-bit record to target dims (both >= 32), with
// values normalized by 1/255.
CanonicalImage resize(const ImageRecord& img, int target_w, int target_h,
                      Interpolation mode = Interpolation::kBilinear);

// Principal-axis angle of the intensity-weighted foreground (pixels above
// `fg_threshold`), in [0, 180). 0 is horizontal, 90 vertical; angles grow
// counter-clockwise as seen on screen.
double estimate_orientation(const CanonicalImage& img,
                            double fg_threshold = kDefaultForegroundThreshold);

// Rotates counter-clockwise (on screen) by `degrees` about the image centre,
// keeping the input dimensions. Samples outside the source read as `fill`.
// orientation_applied accumulates the rotation.
CanonicalImage rotate(const CanonicalImage& img, double degrees,
                      Interpolation mode = Interpolation::kBilinear,
                      double fill = 0.0);

// Rotates by (90 - current) so the long axis ends up vertical.
CanonicalImage reorient(const CanonicalImage& img, double current_degrees,
                        Interpolation mode = Interpolation::kBilinear);

// Same rotation applied to a normalized box in a width x height frame; the
// result is the axis-aligned hull of the rotated corners (unclamped).
BoundingBox rotate_box(const BoundingBox& box, double degrees, int width,
                       int height);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Forward map of rotate() for a continuous point (pixel i spans [i, i+1)).
Point2 rotate_point(Point2 p, double degrees, int width, int height);

// cos/sin of an angle in degrees, exact at multiples of 90.
void cos_sin_degrees(double degrees, double& c, double& s);

}  // namespace artss
