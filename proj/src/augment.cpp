#include "artss/augment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "artss/error.hpp"
#include "artss/simd/kernels.hpp"

namespace artss {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

void validate(const AugmentConfig& c) {
  auto check = [](bool ok, const char* what) {
    if (!ok) fail(ErrorKind::kValidation, std::string("augment config: ") + what);
  };
  check(c.rotation_range >= 0.0 && c.rotation_range < 180.0, "rotation_range must be in [0, 180)");
  check(c.width_shift_range >= 0.0 && c.width_shift_range <= 1.0, "width_shift_range must be in [0, 1]");
  check(c.height_shift_range >= 0.0 && c.height_shift_range <= 1.0, "height_shift_range must be in [0, 1]");
  check(c.flip_probability >= 0.0 && c.flip_probability <= 1.0, "flip_probability must be in [0, 1]");
  check(c.brightness_min > 0.0 && c.brightness_min <= c.brightness_max, "brightness range must satisfy 0 < min <= max");
  check(c.min_visible_fraction >= 0.0 && c.min_visible_fraction <= 1.0, "min_visible_fraction must be in [0, 1]");
}

AugmentConfig parse_augment_config(std::string_view text) {
  AugmentConfig c;
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    std::string line(text.substr(start, nl - start));
    start = nl + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto real = [&]() {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || value.empty() || !std::isfinite(v)) {
        fail(ErrorKind::kParse, "line " + std::to_string(line_no) + ": '" + key + "' is not a number");
      }
      return v;
    };
    if (key == "rotation_range") c.rotation_range = real();
    else if (key == "width_shift_range") c.width_shift_range = real();
    else if (key == "height_shift_range") c.height_shift_range = real();
    else if (key == "flip_probability") c.flip_probability = real();
    else if (key == "brightness_min") c.brightness_min = real();
    else if (key == "brightness_max") c.brightness_max = real();
    else if (key == "min_visible_fraction") c.min_visible_fraction = real();
    else if (key == "horizontal_flip") {
      if (value == "true" || value == "1") c.horizontal_flip = true;
      else if (value == "false" || value == "0") c.horizontal_flip = false;
      else fail(ErrorKind::kParse, "line " + std::to_string(line_no) + ": horizontal_flip must be true or false");
    } else {
      fail(ErrorKind::kSchema, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (nl == text.size()) break;
  }
  validate(c);
  return c;
}

std::string format_augment_config(const AugmentConfig& c) {
  std::string out;
  out += "rotation_range = " + shortest(c.rotation_range) + "\n";
  out += "width_shift_range = " + shortest(c.width_shift_range) + "\n";
  out += "height_shift_range = " + shortest(c.height_shift_range) + "\n";
  out += std::string("horizontal_flip = ") + (c.horizontal_flip ? "true" : "false") + "\n";
  out += "flip_probability = " + shortest(c.flip_probability) + "\n";
  out += "brightness_min = " + shortest(c.brightness_min) + "\n";
  out += "brightness_max = " + shortest(c.brightness_max) + "\n";
  out += "min_visible_fraction = " + shortest(c.min_visible_fraction) + "\n";
  return out;
}

AugmentParams sample_augment_params(Rng& rng, const AugmentConfig& c) {
  AugmentParams p;
  p.rotation_deg = rng.uniform(-c.rotation_range, c.rotation_range);
  p.shift_x = rng.uniform(-c.width_shift_range, c.width_shift_range);
  p.shift_y = rng.uniform(-c.height_shift_range, c.height_shift_range);
  const bool coin = rng.bernoulli(c.flip_probability);
  p.flip = c.horizontal_flip && coin;
  p.brightness = rng.uniform(c.brightness_min, c.brightness_max);
  return p;
}

Point2 augment_point(Point2 p, const AugmentParams& params, int width, int height) {
  Point2 q = rotate_point(p, params.rotation_deg, width, height);
  q.x += params.shift_x * width;
  q.y += params.shift_y * height;
  if (params.flip) q.x = width - q.x;
  return q;
}

std::optional<BoundingBox> augment_box(const BoundingBox& box,
                                       const AugmentParams& params, int width,
                                       int height, double min_visible_fraction) {
  BoundingBox moved = rotate_box(box, params.rotation_deg, width, height);
  moved.cx += params.shift_x;
  moved.cy += params.shift_y;
  if (params.flip) moved.cx = 1.0 - moved.cx;
  const BoundingBox clamped = clamp_to_frame(moved);
  const double full = moved.area();
  if (clamped.w <= 0.0 || clamped.h <= 0.0 || full <= 0.0 ||
      clamped.area() < min_visible_fraction * full) {
    return std::nullopt;
  }
  return clamped;
}

AugmentResult apply_augmentation(const CanonicalImage& img,
                                 std::span<const JointDetection> boxes,
                                 const AugmentParams& params,
                                 const AugmentConfig& config) {
  const int w = img.width;
  const int h = img.height;
  AugmentResult result;
  result.params = params;
  result.image = CanonicalImage(w, h);
  result.image.orientation_applied = img.orientation_applied;

  // Inverse of augment_point: unflip, unshift, rotate back.
  const AugmentParams undo_rotation{-params.rotation_deg, 0.0, 0.0, false, 1.0};
  auto sample = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return img.at(x, y);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Point2 p{x + 0.5, y + 0.5};
      if (params.flip) p.x = w - p.x;
      p.x -= params.shift_x * w;
      p.y -= params.shift_y * h;
      const Point2 s = augment_point(p, undo_rotation, w, h);
      const double sx = s.x - 0.5;
      const double sy = s.y - 0.5;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const double ax = sx - fx;
      const double ay = sy - fy;
      const double top = sample(x0, y0) * (1.0 - ax) + sample(x0 + 1, y0) * ax;
      const double bottom = sample(x0, y0 + 1) * (1.0 - ax) + sample(x0 + 1, y0 + 1) * ax;
      result.image.at(x, y) = top * (1.0 - ay) + bottom * ay;
    }
  }
  simd::scale_clamp(result.image.pixels, params.brightness, 0.0, 1.0);

  for (const JointDetection& det : boxes) {
    const auto moved = augment_box(det.box, params, w, h, config.min_visible_fraction);
    if (!moved) continue;
    JointDetection out = det;
    out.box = *moved;
    if (params.flip) out.side = flip_side(det.side);
    result.boxes.push_back(std::move(out));
  }
  result.all_boxes_dropped = !boxes.empty() && result.boxes.empty();
  return result;
}

AugmentResult augment(const CanonicalImage& img,
                      std::span<const JointDetection> boxes, std::uint64_t seed,
                      const AugmentConfig& config) {
  validate(config);
  Rng rng(seed);
  return apply_augmentation(img, boxes, sample_augment_params(rng, config), config);
}

}  // namespace artss
