#pragma once

// Shared domain types: images, joints, boxes, scores.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace artss {

// Ceiling for a whole-image TSS over two hands: 16 joints x (5 + 4) x 2.
inline constexpr double kDefaultTssCeiling = 288.0;
inline constexpr int kMinImageSide = 32;

enum class Gender { kFemale, kMale };
enum class HandSide { kLeft, kRight };
enum class FrameSide { kLeft, kRight, kBoth };

// The per-hand joint taxonomy. The numeric values are the annotation class
// indices and must not be reordered.
enum class JointClass : std::uint8_t {
  kPI = 0,
  kPIP1 = 1,
  kPIP2 = 2,
  kPIP3 = 3,
  kPIP4 = 4,
  kMCP0 = 5,
  kMCP1 = 6,
  kMCP2 = 7,
  kMCP3 = 8,
  kMCP4 = 9,
  kWrist = 10,
};

inline constexpr int kJointClassCount = 11;
inline constexpr int kJointSlotsPerPatient = 2 * kJointClassCount;

std::string_view joint_class_name(JointClass c);
std::optional<JointClass> joint_class_from_index(int index);
std::optional<JointClass> joint_class_from_name(std::string_view name);
inline int joint_class_index(JointClass c) { return static_cast<int>(c); }
const std::array<JointClass, kJointClassCount>& all_joint_classes();

std::string_view hand_side_name(HandSide s);
inline HandSide flip_side(HandSide s) {
  return s == HandSide::kLeft ? HandSide::kRight : HandSide::kLeft;
}
std::string_view frame_side_name(FrameSide s);
std::optional<FrameSide> frame_side_from_name(std::string_view name);
std::string_view gender_name(Gender g);
std::optional<Gender> gender_from_name(std::string_view name);

// Canonical slot of a (class, side) pair: left PI..WRIST, then right.
inline int canonical_slot(JointClass c, HandSide s) {
  return (s == HandSide::kLeft ? 0 : kJointClassCount) + joint_class_index(c);
}

// 8-bit grayscale raster, row-major.
struct ImageRecord {
  std::string id;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  std::optional<double> age;
  std::optional<Gender> gender;
  FrameSide side = FrameSide::kBoth;

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

// Throws a validation error unless id is non-empty, both sides are at least
// kMinImageSide and the pixel buffer matches the dimensions.
void validate(const ImageRecord& img);

// Normalized center-format box.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double x0() const { return cx - 0.5 * w; }
  double y0() const { return cy - 0.5 * h; }
  double x1() const { return cx + 0.5 * w; }
  double y1() const { return cy + 0.5 * h; }
  double area() const { return w * h; }

  bool operator==(const BoundingBox&) const = default;
};

void validate(const BoundingBox& box);
BoundingBox box_from_corners(double x0, double y0, double x1, double y1);
// Intersection with the unit square; w or h may become 0.
BoundingBox clamp_to_frame(const BoundingBox& box);

struct JointDetection {
  std::string image_id;
  JointClass joint = JointClass::kPI;
  HandSide side = HandSide::kLeft;
  BoundingBox box;
  std::optional<double> confidence;  // absent for ground truth

  bool operator==(const JointDetection&) const = default;
};

void validate(const JointDetection& det);

struct SharpScore {
  std::string image_id;
  std::optional<double> reader_a;
  std::optional<double> reader_b;
  double tss = 0.0;

  bool operator==(const SharpScore&) const = default;
};

void validate(const SharpScore& score, double ceiling = kDefaultTssCeiling);

// Mean of two integer reader totals. Exact: any integer pair in range has
// a half-integer mean that is representable as a double.
double average_readers(int reader_a, int reader_b,
                       double ceiling = kDefaultTssCeiling);

}  // namespace artss
