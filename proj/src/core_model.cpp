#include "artss/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "artss/error.hpp"

namespace artss {
namespace {

constexpr std::array<std::string_view, kJointClassCount> kJointNames = {
    "PI",    "PIP_1", "PIP_2", "PIP_3", "PIP_4", "MCP_0",
    "MCP_1", "MCP_2", "MCP_3", "MCP_4", "WRIST",
};

std::string num(double v) {
  std::string s = std::to_string(v);
  return s;
}

}  // namespace

std::string_view joint_class_name(JointClass c) {
  return kJointNames[static_cast<std::size_t>(c)];
}

std::optional<JointClass> joint_class_from_index(int index) {
  if (index < 0 || index >= kJointClassCount) return std::nullopt;
  return static_cast<JointClass>(index);
}

std::optional<JointClass> joint_class_from_name(std::string_view name) {
  for (int i = 0; i < kJointClassCount; ++i) {
    if (kJointNames[static_cast<std::size_t>(i)] == name) {
      return static_cast<JointClass>(i);
    }
  }
  return std::nullopt;
}

const std::array<JointClass, kJointClassCount>& all_joint_classes() {
  static const auto classes = [] {
    std::array<JointClass, kJointClassCount> out{};
    for (int i = 0; i < kJointClassCount; ++i) out[static_cast<std::size_t>(i)] = static_cast<JointClass>(i);
    return out;
  }();
  return classes;
}

std::string_view hand_side_name(HandSide s) {
  return s == HandSide::kLeft ? "left" : "right";
}

std::string_view frame_side_name(FrameSide s) {
  switch (s) {
    case FrameSide::kLeft: return "left";
    case FrameSide::kRight: return "right";
    case FrameSide::kBoth: return "both";
  }
  return "both";
}

std::optional<FrameSide> frame_side_from_name(std::string_view name) {
  if (name == "left" || name == "L") return FrameSide::kLeft;
  if (name == "right" || name == "R") return FrameSide::kRight;
  if (name == "both") return FrameSide::kBoth;
  return std::nullopt;
}

std::string_view gender_name(Gender g) {
  return g == Gender::kFemale ? "female" : "male";
}

std::optional<Gender> gender_from_name(std::string_view name) {
  if (name == "female" || name == "F" || name == "f") return Gender::kFemale;
  if (name == "male" || name == "M" || name == "m") return Gender::kMale;
  return std::nullopt;
}

void validate(const ImageRecord& img) {
  if (img.id.empty()) fail(ErrorKind::kValidation, "image id is empty");
  if (img.width < kMinImageSide || img.height < kMinImageSide) {
    fail(ErrorKind::kValidation,
         "image '" + img.id + "' is " + std::to_string(img.width) + "x" +
             std::to_string(img.height) + "; both sides must be >= " +
             std::to_string(kMinImageSide));
  }
  if (img.pixels.size() !=
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
    fail(ErrorKind::kValidation,
         "image '" + img.id + "' pixel buffer does not match its dimensions");
  }
  if (img.age && !(*img.age >= 0.0)) {
    fail(ErrorKind::kValidation, "image '" + img.id + "' has a negative age");
  }
}

void validate(const BoundingBox& box) {
  auto check_unit = [](double v, const char* field, bool allow_zero) {
    const bool ok = std::isfinite(v) && v <= 1.0 && (allow_zero ? v >= 0.0 : v > 0.0);
    if (!ok) {
      fail(ErrorKind::kValidation,
           std::string("box field '") + field + "' out of range: " + num(v));
    }
  };
  check_unit(box.cx, "cx", true);
  check_unit(box.cy, "cy", true);
  check_unit(box.w, "w", false);
  check_unit(box.h, "h", false);
}

BoundingBox box_from_corners(double x0, double y0, double x1, double y1) {
  return BoundingBox{0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
}

BoundingBox clamp_to_frame(const BoundingBox& box) {
  if (box.x0() >= 0.0 && box.y0() >= 0.0 && box.x1() <= 1.0 && box.y1() <= 1.0) return box;
  const double x0 = std::clamp(box.x0(), 0.0, 1.0);
  const double y0 = std::clamp(box.y0(), 0.0, 1.0);
  const double x1 = std::clamp(box.x1(), 0.0, 1.0);
  const double y1 = std::clamp(box.y1(), 0.0, 1.0);
  return box_from_corners(x0, y0, std::max(x0, x1), std::max(y0, y1));
}

void validate(const JointDetection& det) {
  validate(det.box);
  if (det.confidence) {
    const double c = *det.confidence;
    if (!(c >= 0.0 && c <= 1.0)) {
      fail(ErrorKind::kValidation, "field 'confidence' out of range: " + num(c));
    }
  }
}

void validate(const SharpScore& score, double ceiling) {
  if (score.image_id.empty()) fail(ErrorKind::kValidation, "score id is empty");
  auto check = [&](double v, const char* field) {
    if (!(v >= 0.0 && v <= ceiling)) {
      fail(ErrorKind::kValidation, "score '" + score.image_id + "': field '" +
                                       field + "' out of range [0, " +
                                       num(ceiling) + "]: " + num(v));
    }
  };
  check(score.tss, "tss");
  if (score.reader_a) check(*score.reader_a, "reader_a");
  if (score.reader_b) check(*score.reader_b, "reader_b");
  if (score.reader_a && score.reader_b &&
      score.tss != 0.5 * (*score.reader_a + *score.reader_b)) {
    fail(ErrorKind::kValidation,
         "score '" + score.image_id + "': tss is not the mean of the readers");
  }
}

double average_readers(int reader_a, int reader_b, double ceiling) {
  auto check = [&](int v, const char* reader) {
    if (v < 0 || static_cast<double>(v) > ceiling) {
      fail(ErrorKind::kValidation, std::string(reader) + " score " +
                                       std::to_string(v) +
                                       " outside [0, " + num(ceiling) + "]");
    }
  };
  check(reader_a, "reader_a");
  check(reader_b, "reader_b");
  return (static_cast<double>(reader_a) + static_cast<double>(reader_b)) / 2.0;
}

}  // namespace artss
