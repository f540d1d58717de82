#pragma once

// Detection scoring: IoU, greedy matching, precision at each true positive
// (non-interpolated AP), mAP, confusion counts and joint accuracy.

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "artss/core_model.hpp"
#include "artss/maskgen.hpp"
#include "artss/report.hpp"

namespace artss {

// Boxes are clamped to the frame first. Empty union gives 0.
double iou(const BoundingBox& a, const BoundingBox& b);
// Masks must share dimensions.
double iou(const BinaryMask& a, const BinaryMask& b);

using Region = std::variant<BoundingBox, BinaryMask>;
// Throws a validation error when the kinds differ.
double iou(const Region& a, const Region& b);

inline constexpr double kDefaultIouThreshold = 0.5;

struct MatchPair {
  std::size_t prediction = 0;    // index into the prediction list
  std::size_t ground_truth = 0;  // index into the ground-truth list
  double iou = 0.0;
  bool operator==(const MatchPair&) const = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // in prediction rank order
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_ground_truths;
};

// Prediction indices by descending confidence; equal confidences keep input
// order.
std::vector<std::size_t> confidence_order(std::span<const JointDetection> predictions);

// One image, one class. Each prediction in rank order takes the unmatched
// ground truth with the highest IoU >= threshold; IoU ties go to the lower
// ground-truth index.
MatchResult match(std::span<const JointDetection> predictions,
                  std::span<const JointDetection> ground_truths,
                  double iou_threshold = kDefaultIouThreshold);

// Ranked true-positive flags for one class across a dataset; predictions and
// ground truths are grouped by image_id and matched per image.
struct RankedOutcomes {
  std::vector<bool> true_positive;  // by descending confidence
  std::uint64_t n_pos = 0;
};
RankedOutcomes rank_outcomes(std::span<const JointDetection> predictions,
                             std::span<const JointDetection> ground_truths,
                             double iou_threshold = kDefaultIouThreshold);

// (1 / N_pos) * sum of precision at the rank of each true positive;
// unmatched ground truths add 0. nullopt when N_pos is 0.
std::optional<double> ap_from_ranked(const std::vector<bool>& true_positive,
                                     std::uint64_t n_pos);
// All-point interpolated AP (area under the monotone precision envelope).
std::optional<double> interpolated_ap_from_ranked(const std::vector<bool>& true_positive,
                                                  std::uint64_t n_pos);
std::vector<PrPoint> pr_curve(const std::vector<bool>& true_positive, std::uint64_t n_pos);

std::optional<double> average_precision(std::span<const JointDetection> predictions,
                                        std::span<const JointDetection> ground_truths,
                                        double iou_threshold = kDefaultIouThreshold,
                                        bool interpolated = false);

// Unweighted mean over defined entries; protocol error if none is defined.
double mean_average_precision(std::span<const std::optional<double>> per_class_ap);

enum class AccuracyDefinition {
  kMatchedGroundTruth,    // TP / N_pos
  kCriticalSuccessIndex,  // TP / (TP + FP + FN)
};

struct DetectionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t n_pos = 0;
};

// Protocol error when N_pos is 0.
double detection_accuracy(const DetectionCounts& counts,
                          AccuracyDefinition definition = AccuracyDefinition::kMatchedGroundTruth);

struct DetectionEvalOptions {
  double iou_threshold = kDefaultIouThreshold;
  bool interpolated_ap = false;
  // Predictions below this confidence are left out of the confusion matrix.
  double confusion_confidence = 0.25;
  AccuracyDefinition accuracy = AccuracyDefinition::kMatchedGroundTruth;
};

// Class-agnostic matching per image; [predicted][ground truth] with the
// background at index kJointClassCount.
ConfusionMatrix confusion_matrix(std::span<const JointDetection> predictions,
                                 std::span<const JointDetection> ground_truths,
                                 double iou_threshold, double min_confidence);

EvalReport evaluate_detections(std::span<const JointDetection> predictions,
                               std::span<const JointDetection> ground_truths,
                               const DetectionEvalOptions& options = {});

}  // namespace artss
