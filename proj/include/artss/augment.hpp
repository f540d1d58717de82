#pragma once

// Seeded geometric and photometric augmentation; boxes follow the pixels.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "artss/core_model.hpp"
#include "artss/imgproc.hpp"
#include "artss/rng.hpp"

namespace artss {

// Defaults are the training-time settings: rotation up to 10 degrees, shifts
// up to 20% of each dimension, horizontal flip, brightness in [0.7, 1.2].
// Pixel values are expected already rescaled by 1/255.
struct AugmentConfig {
  double rotation_range = 10.0;
  double width_shift_range = 0.2;
  double height_shift_range = 0.2;
  bool horizontal_flip = true;
  double flip_probability = 0.5;
  double brightness_min = 0.7;
  double brightness_max = 1.2;
  // Boxes keeping less than this fraction of their transformed area inside
  // the frame are dropped.
  double min_visible_fraction = 0.25;

  bool operator==(const AugmentConfig&) const = default;
};

void validate(const AugmentConfig& config);

// `key = value` lines, '#' comments. Unknown keys are a schema error.
AugmentConfig parse_augment_config(std::string_view text);
std::string format_augment_config(const AugmentConfig& config);

struct AugmentParams {
  double rotation_deg = 0.0;  // counter-clockwise on screen
  double shift_x = 0.0;       // fraction of width, positive moves right
  double shift_y = 0.0;       // fraction of height, positive moves down
  bool flip = false;
  double brightness = 1.0;

  bool operator==(const AugmentParams&) const = default;
};

// Draw order: rotation, shift x, shift y, flip, brightness.
AugmentParams sample_augment_params(Rng& rng, const AugmentConfig& config = {});

// Continuous-coordinate forward map (pixel i spans [i, i+1)).
Point2 augment_point(Point2 p, const AugmentParams& params, int width, int height);

// Transformed, clamped box, or nullopt when too little of it stays visible.
std::optional<BoundingBox> augment_box(const BoundingBox& box,
                                       const AugmentParams& params, int width,
                                       int height, double min_visible_fraction);

struct AugmentResult {
  CanonicalImage image;
  std::vector<JointDetection> boxes;
  AugmentParams params;
  // Input had boxes but every one was dropped.
  bool all_boxes_dropped = false;
};

AugmentResult apply_augmentation(const CanonicalImage& img,
                                 std::span<const JointDetection> boxes,
                                 const AugmentParams& params,
                                 const AugmentConfig& config = {});

AugmentResult augment(const CanonicalImage& img,
                      std::span<const JointDetection> boxes, std::uint64_t seed,
                      const AugmentConfig& config = {});

}  // namespace artss
