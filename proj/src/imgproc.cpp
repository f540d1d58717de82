#include "artss/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "artss/error.hpp"
#include "artss/simd/kernels.hpp"

namespace artss {
namespace {

struct Taps {
  int i0;
  int i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

// Source taps for destination index `d` along one axis, half-pixel centres,
// clamped to the edge.
Taps axis_taps(int d, int src_n, int dst_n) {
  const double scale = static_cast<double>(src_n) / static_cast<double>(dst_n);
  double s = (static_cast<double>(d) + 0.5) * scale - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_n - 1));
  const int i0 = static_cast<int>(std::floor(s));
  const int i1 = std::min(i0 + 1, src_n - 1);
  return Taps{i0, i1, s - i0};
}

int nearest_index(int d, int src_n, int dst_n) {
  const double scale = static_cast<double>(src_n) / static_cast<double>(dst_n);
  const double s = (static_cast<double>(d) + 0.5) * scale;
  return std::clamp(static_cast<int>(std::floor(s)), 0, src_n - 1);
}

double normalize_degrees_180(double deg) {
  double r = std::fmod(deg, 180.0);
  if (r < 0.0) r += 180.0;
  if (r >= 180.0) r -= 180.0;
  return r;
}

}  // namespace

void cos_sin_degrees(double degrees, double& c, double& s) {
  const double q = degrees / 90.0;
  if (q == std::round(q)) {
    const long k = ((static_cast<long>(std::round(q)) % 4) + 4) % 4;
    static constexpr double kCos[] = {1.0, 0.0, -1.0, 0.0};
    static constexpr double kSin[] = {0.0, 1.0, 0.0, -1.0};
    c = kCos[k];
    s = kSin[k];
    return;
  }
  const double rad = degrees * std::numbers::pi / 180.0;
  c = std::cos(rad);
  s = std::sin(rad);
}

CanonicalImage to_canonical(const ImageRecord& img) {
  validate(img);
  CanonicalImage out(img.width, img.height);
  simd::u8_to_unit(img.pixels, out.pixels);
  return out;
}

std::vector<double> resample(std::span<const double> src, int src_w, int src_h,
                             int dst_w, int dst_h, Interpolation mode) {
  if (src_w < 1 || src_h < 1 || dst_w < 1 || dst_h < 1) {
    fail(ErrorKind::kValidation, "resample: dimensions must be positive");
  }
  if (src.size() != static_cast<std::size_t>(src_w) * static_cast<std::size_t>(src_h)) {
    fail(ErrorKind::kValidation, "resample: buffer does not match dimensions");
  }
  std::vector<double> out(static_cast<std::size_t>(dst_w) * static_cast<std::size_t>(dst_h));
  auto at = [&](int x, int y) { return src[static_cast<std::size_t>(y) * src_w + x]; };

  if (mode == Interpolation::kNearest) {
    std::vector<int> xs(static_cast<std::size_t>(dst_w));
    for (int x = 0; x < dst_w; ++x) xs[static_cast<std::size_t>(x)] = nearest_index(x, src_w, dst_w);
    for (int y = 0; y < dst_h; ++y) {
      const int sy = nearest_index(y, src_h, dst_h);
      for (int x = 0; x < dst_w; ++x) {
        out[static_cast<std::size_t>(y) * dst_w + x] = at(xs[static_cast<std::size_t>(x)], sy);
      }
    }
    return out;
  }

  std::vector<Taps> xt(static_cast<std::size_t>(dst_w));
  for (int x = 0; x < dst_w; ++x) xt[static_cast<std::size_t>(x)] = axis_taps(x, src_w, dst_w);
  for (int y = 0; y < dst_h; ++y) {
    const Taps ty = axis_taps(y, src_h, dst_h);
    for (int x = 0; x < dst_w; ++x) {
      const Taps& tx = xt[static_cast<std::size_t>(x)];
      const double top = at(tx.i0, ty.i0) * (1.0 - tx.w1) + at(tx.i1, ty.i0) * tx.w1;
      const double bottom = at(tx.i0, ty.i1) * (1.0 - tx.w1) + at(tx.i1, ty.i1) * tx.w1;
      out[static_cast<std::size_t>(y) * dst_w + x] = top * (1.0 - ty.w1) + bottom * ty.w1;
    }
  }
  return out;
}

CanonicalImage resize(const ImageRecord& img, int target_w, int target_h,
                      Interpolation mode) {
  if (target_w < kMinImageSide || target_h < kMinImageSide) {
    fail(ErrorKind::kValidation,
         "resize target " + std::to_string(target_w) + "x" +
             std::to_string(target_h) + " is below the minimum side of " +
             std::to_string(kMinImageSide));
  }
  validate(img);
  // Interpolate raw intensities, then scale, so an identity resize yields
  // exactly value / 255.
  std::vector<double> raw(img.pixels.begin(), img.pixels.end());
  CanonicalImage out;
  out.width = target_w;
  out.height = target_h;
  if (target_w == img.width && target_h == img.height) {
    out.pixels = std::move(raw);
  } else {
    out.pixels = resample(raw, img.width, img.height, target_w, target_h, mode);
  }
  for (double& v : out.pixels) v = std::clamp(v / 255.0, 0.0, 1.0);
  return out;
}

double estimate_orientation(const CanonicalImage& img, double fg_threshold) {
  double mass = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double v = img.at(x, y);
      if (v > fg_threshold) {
        mass += v;
        sx += v * x;
        sy += v * y;
      }
    }
  }
  if (mass <= 0.0) {
    fail(ErrorKind::kEstimation, "no foreground above threshold " +
                                     std::to_string(fg_threshold));
  }
  const double mx = sx / mass;
  const double my = sy / mass;
  double m20 = 0.0;
  double m02 = 0.0;
  double m11 = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double v = img.at(x, y);
      if (v > fg_threshold) {
        const double dx = x - mx;
        const double dy = y - my;
        m20 += v * dx * dx;
        m02 += v * dy * dy;
        m11 += v * dx * dy;
      }
    }
  }
  // Rows grow downward, so the screen-space cross moment is -m11.
  const double theta = 0.5 * std::atan2(-2.0 * m11, m20 - m02);
  return normalize_degrees_180(theta * 180.0 / std::numbers::pi);
}

CanonicalImage rotate(const CanonicalImage& img, double degrees,
                      Interpolation mode, double fill) {
  double c = 1.0;
  double s = 0.0;
  cos_sin_degrees(degrees, c, s);
  CanonicalImage out(img.width, img.height, fill);
  out.orientation_applied = img.orientation_applied + degrees;
  const double cx = 0.5 * (img.width - 1);
  const double cy = 0.5 * (img.height - 1);

  auto sample = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return fill;
    return img.at(x, y);
  };

  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      // Inverse map of an on-screen counter-clockwise rotation.
      const double sx = cx + c * dx - s * dy;
      const double sy = cy + s * dx + c * dy;
      double v;
      if (mode == Interpolation::kNearest) {
        v = sample(static_cast<int>(std::lround(sx)), static_cast<int>(std::lround(sy)));
      } else {
        const double fx = std::floor(sx);
        const double fy = std::floor(sy);
        const int x0 = static_cast<int>(fx);
        const int y0 = static_cast<int>(fy);
        const double ax = sx - fx;
        const double ay = sy - fy;
        const double top = sample(x0, y0) * (1.0 - ax) + sample(x0 + 1, y0) * ax;
        const double bottom = sample(x0, y0 + 1) * (1.0 - ax) + sample(x0 + 1, y0 + 1) * ax;
        v = top * (1.0 - ay) + bottom * ay;
      }
      out.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

CanonicalImage reorient(const CanonicalImage& img, double current_degrees,
                        Interpolation mode) {
  if (!(current_degrees >= 0.0 && current_degrees < 180.0)) {
    fail(ErrorKind::kValidation, "orientation " + std::to_string(current_degrees) +
                                     " outside [0, 180)");
  }
  const double delta = 90.0 - current_degrees;
  if (delta == 0.0) {
    CanonicalImage out = img;
    out.orientation_applied = 0.0;
    return out;
  }
  CanonicalImage out = rotate(img, delta, mode);
  out.orientation_applied = delta;
  return out;
}

Point2 rotate_point(Point2 p, double degrees, int width, int height) {
  double c = 1.0;
  double s = 0.0;
  cos_sin_degrees(degrees, c, s);
  const double cx = 0.5 * width;
  const double cy = 0.5 * height;
  const double dx = p.x - cx;
  const double dy = p.y - cy;
  // Forward map; inverse of the sampling transform in rotate().
  return Point2{cx + c * dx + s * dy, cy - s * dx + c * dy};
}

BoundingBox rotate_box(const BoundingBox& box, double degrees, int width,
                       int height) {
  if (degrees == 0.0) return box;
  const double w = width;
  const double h = height;
  const Point2 corners[] = {
      {box.x0() * w, box.y0() * h},
      {box.x1() * w, box.y0() * h},
      {box.x0() * w, box.y1() * h},
      {box.x1() * w, box.y1() * h},
  };
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const Point2& p : corners) {
    const Point2 q = rotate_point(p, degrees, width, height);
    x0 = std::min(x0, q.x);
    y0 = std::min(y0, q.y);
    x1 = std::max(x1, q.x);
    y1 = std::max(y1, q.y);
  }
  return box_from_corners(x0 / w, y0 / h, x1 / w, y1 / h);
}

}  // namespace artss
