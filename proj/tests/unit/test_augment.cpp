#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "artss/augment.hpp"
#include "artss/error.hpp"

namespace artss {
namespace {

CanonicalImage ramp(int w, int h) {
  CanonicalImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.at(x, y) = 0.5 * (x + 2 * y % 7) / (w + 7.0);
  }
  return img;
}

JointDetection joint(JointClass c, HandSide s, BoundingBox b) {
  JointDetection d;
  d.image_id = "p";
  d.joint = c;
  d.side = s;
  d.box = b;
  return d;
}

TEST(AugmentSampling, DefaultRanges) {
  Rng rng(99);
  bool flipped = false;
  bool unflipped = false;
  for (int i = 0; i < 2000; ++i) {
    const auto p = sample_augment_params(rng);
    EXPECT_GE(p.rotation_deg, -10.0);
    EXPECT_LE(p.rotation_deg, 10.0);
    EXPECT_GE(p.shift_x, -0.2);
    EXPECT_LE(p.shift_x, 0.2);
    EXPECT_GE(p.shift_y, -0.2);
    EXPECT_LE(p.shift_y, 0.2);
    EXPECT_GE(p.brightness, 0.7);
    EXPECT_LE(p.brightness, 1.2);
    (p.flip ? flipped : unflipped) = true;
  }
  EXPECT_TRUE(flipped);
  EXPECT_TRUE(unflipped);
}

TEST(AugmentSampling, FlipDisabled) {
  AugmentConfig c;
  c.horizontal_flip = false;
  Rng rng(1);
  for (int i = 0; i < 500; ++i) EXPECT_FALSE(sample_augment_params(rng, c).flip);
}

TEST(Augment, DeterministicForSeed) {
  const auto img = ramp(48, 40);
  const std::vector<JointDetection> boxes{joint(JointClass::kPIP2, HandSide::kLeft, {0.4, 0.5, 0.2, 0.2})};
  const auto a = augment(img, boxes, 1234);
  const auto b = augment(img, boxes, 1234);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.image.pixels, b.image.pixels);
  EXPECT_EQ(a.boxes, b.boxes);
  EXPECT_NE(augment(img, boxes, 1235).params, a.params);
}

TEST(Augment, FlipOnlyMirrorsBoxesAndPixels) {
  const auto img = ramp(40, 32);
  const std::vector<JointDetection> boxes{
      joint(JointClass::kMCP3, HandSide::kLeft, {0.3, 0.6, 0.1, 0.2}),
      joint(JointClass::kWrist, HandSide::kRight, {0.71, 0.4, 0.15, 0.05})};
  AugmentParams p;
  p.flip = true;
  const auto r = apply_augmentation(img, boxes, p);
  ASSERT_EQ(r.boxes.size(), 2u);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    EXPECT_NEAR(r.boxes[i].box.cx, 1.0 - boxes[i].box.cx, 1e-12);
    EXPECT_EQ(r.boxes[i].box.w, boxes[i].box.w);
    EXPECT_NEAR(r.boxes[i].box.cy, boxes[i].box.cy, 1e-12);
    EXPECT_EQ(r.boxes[i].side, flip_side(boxes[i].side));
  }
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 40; ++x) EXPECT_NEAR(r.image.at(x, y), img.at(39 - x, y), 1e-12);
  }
}

TEST(Augment, IdentityParams) {
  const auto img = ramp(30, 30);
  const std::vector<JointDetection> boxes{joint(JointClass::kPI, HandSide::kLeft, {0.5, 0.5, 0.2, 0.2})};
  const auto r = apply_augmentation(img, boxes, AugmentParams{});
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(r.image.pixels[i], img.pixels[i], 1e-12);
  ASSERT_EQ(r.boxes.size(), 1u);
  EXPECT_NEAR(r.boxes[0].box.cx, 0.5, 1e-12);
  EXPECT_NEAR(r.boxes[0].box.w, 0.2, 1e-12);
}

TEST(Augment, RotationMovesBoxCentreLikeExplicitMap) {
  const int w = 200;
  const int h = 160;
  AugmentParams p;
  p.rotation_deg = 10.0;
  const double t = 10.0 * std::numbers::pi / 180.0;
  for (BoundingBox b : {BoundingBox{0.5, 0.5, 0.1, 0.1}, BoundingBox{0.35, 0.6, 0.08, 0.12},
                        BoundingBox{0.7, 0.3, 0.05, 0.05}}) {
    const auto moved = augment_box(b, p, w, h, 0.0);
    ASSERT_TRUE(moved);
    // Counter-clockwise on screen with y pointing down.
    const double dx = b.cx * w - 0.5 * w;
    const double dy = b.cy * h - 0.5 * h;
    const double ex = 0.5 * w + std::cos(t) * dx + std::sin(t) * dy;
    const double ey = 0.5 * h - std::sin(t) * dx + std::cos(t) * dy;
    EXPECT_NEAR(moved->cx * w, ex, 1e-6);
    EXPECT_NEAR(moved->cy * h, ey, 1e-6);
    EXPECT_GE(moved->w, b.w);
  }
}

TEST(Augment, ShiftMovesPixelsAndBoxes) {
  const auto img = ramp(50, 50);
  AugmentParams p;
  p.shift_x = 0.2;
  p.shift_y = -0.1;
  const std::vector<JointDetection> boxes{joint(JointClass::kPIP1, HandSide::kLeft, {0.4, 0.5, 0.1, 0.1})};
  const auto r = apply_augmentation(img, boxes, p);
  EXPECT_NEAR(r.image.at(30, 20), img.at(20, 25), 1e-12);
  EXPECT_EQ(r.image.at(5, 5), 0.0);
  ASSERT_EQ(r.boxes.size(), 1u);
  EXPECT_NEAR(r.boxes[0].box.cx, 0.6, 1e-12);
  EXPECT_NEAR(r.boxes[0].box.cy, 0.4, 1e-12);
}

TEST(Augment, BoxesLeavingFrameAreDropped) {
  const auto img = ramp(40, 40);
  AugmentParams p;
  p.shift_x = 0.2;
  const std::vector<JointDetection> boxes{
      joint(JointClass::kPIP1, HandSide::kLeft, {0.95, 0.5, 0.1, 0.1}),
      joint(JointClass::kPIP2, HandSide::kLeft, {0.5, 0.5, 0.1, 0.1})};
  const auto r = apply_augmentation(img, boxes, p);
  ASSERT_EQ(r.boxes.size(), 1u);
  EXPECT_EQ(r.boxes[0].joint, JointClass::kPIP2);
  EXPECT_FALSE(r.all_boxes_dropped);
  const std::vector<JointDetection> gone{boxes[0]};
  EXPECT_TRUE(apply_augmentation(img, gone, p).all_boxes_dropped);
}

TEST(Augment, PartiallyVisibleBoxIsClamped) {
  AugmentParams p;
  p.shift_x = 0.1;
  const auto moved = augment_box({0.9, 0.5, 0.2, 0.2}, p, 100, 100, 0.25);
  ASSERT_TRUE(moved);
  EXPECT_NEAR(moved->x1(), 1.0, 1e-12);
  EXPECT_NEAR(moved->w, 0.1, 1e-12);
}

TEST(Augment, BrightnessScalesAndClamps) {
  CanonicalImage img(8, 8, 0.5);
  img.at(0, 0) = 0.9;
  AugmentParams p;
  p.brightness = 1.2;
  const auto r = apply_augmentation(img, {}, p);
  EXPECT_NEAR(r.image.at(3, 3), 0.6, 1e-12);
  EXPECT_EQ(r.image.at(0, 0), 1.0);
}

TEST(AugmentConfig, ParseFormatRoundTrip) {
  AugmentConfig c;
  c.rotation_range = 5.5;
  c.horizontal_flip = false;
  c.brightness_min = 0.8;
  EXPECT_EQ(parse_augment_config(format_augment_config(c)), c);
  EXPECT_EQ(parse_augment_config("# defaults\n\n"), AugmentConfig{});
}

TEST(AugmentConfig, Errors) {
  EXPECT_THROW(parse_augment_config("rotation = 3"), Error);
  EXPECT_THROW(parse_augment_config("rotation_range"), Error);
  EXPECT_THROW(parse_augment_config("rotation_range = abc"), Error);
  EXPECT_THROW(parse_augment_config("brightness_min = 2\nbrightness_max = 1"), Error);
  try {
    parse_augment_config("colour = 1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
  }
}

}  // namespace
}  // namespace artss
