#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "artss/core_model.hpp"

namespace artss {

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  bool operator==(const PrPoint&) const = default;
};

struct ClassReport {
  JointClass joint = JointClass::kPI;
  std::optional<double> ap;  // nullopt when the class has no ground truth
  std::vector<PrPoint> pr_curve;
  std::uint64_t n_pos = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  bool operator==(const ClassReport&) const = default;
};

struct RegressionBlock {
  std::size_t n = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double huber = 0.0;
  double huber_delta = 1.0;
  bool operator==(const RegressionBlock&) const = default;
};

// Index kJointClassCount is the background row/column.
inline constexpr int kConfusionSize = kJointClassCount + 1;
using ConfusionMatrix =
    std::array<std::array<std::uint64_t, kConfusionSize>, kConfusionSize>;

struct EvalReport {
  double iou_threshold = 0.5;
  bool interpolated_ap = false;
  std::vector<ClassReport> per_class;  // one entry per JointClass, in order
  std::optional<double> map_score;
  double accuracy = 0.0;
  ConfusionMatrix confusion{};  // [predicted][ground truth]
  std::optional<RegressionBlock> regression;
  bool operator==(const EvalReport&) const = default;
};

}  // namespace artss
