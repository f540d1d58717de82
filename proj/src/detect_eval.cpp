#include "artss/detect_eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "artss/error.hpp"
#include "artss/simd/kernels.hpp"

namespace artss {
namespace {

struct ImageGroup {
  std::vector<std::size_t> predictions;
  std::vector<std::size_t> ground_truths;
};

// Picks the best unmatched ground truth for `box`; returns -1 if none clears
// the threshold.
long best_ground_truth(const BoundingBox& box, std::span<const JointDetection> gts,
                       std::span<const std::size_t> candidates,
                       const std::vector<bool>& taken, double threshold,
                       double& best_iou) {
  long best = -1;
  best_iou = -1.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (taken[k]) continue;
    const double v = iou(box, gts[candidates[k]].box);
    if (v >= threshold && v > best_iou) {
      best_iou = v;
      best = static_cast<long>(k);
    }
  }
  return best;
}

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    fail(ErrorKind::kValidation, "IoU threshold must be in (0, 1], got " + std::to_string(t));
  }
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
  const BoundingBox ca = clamp_to_frame(a);
  const BoundingBox cb = clamp_to_frame(b);
  const double ix = std::max(0.0, std::min(ca.x1(), cb.x1()) - std::max(ca.x0(), cb.x0()));
  const double iy = std::max(0.0, std::min(ca.y1(), cb.y1()) - std::max(ca.y0(), cb.y0()));
  const double inter = ix * iy;
  const double area_a = (ca.x1() - ca.x0()) * (ca.y1() - ca.y0());
  const double area_b = (cb.x1() - cb.x0()) * (cb.y1() - cb.y0());
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height) {
    fail(ErrorKind::kValidation, "mask IoU needs equal dimensions (" +
                                     std::to_string(a.width) + "x" + std::to_string(a.height) +
                                     " vs " + std::to_string(b.width) + "x" +
                                     std::to_string(b.height) + ")");
  }
  const simd::OverlapCount c = simd::count_overlap(a.pixels, b.pixels);
  if (c.union_count == 0) return 0.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_count);
}

double iou(const Region& a, const Region& b) {
  if (a.index() != b.index()) fail(ErrorKind::kValidation, "IoU between a box and a mask is undefined");
  if (const auto* box = std::get_if<BoundingBox>(&a)) return iou(*box, std::get<BoundingBox>(b));
  return iou(std::get<BinaryMask>(a), std::get<BinaryMask>(b));
}

std::vector<std::size_t> confidence_order(std::span<const JointDetection> predictions) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence.value_or(0.0) > predictions[b].confidence.value_or(0.0);
  });
  return order;
}

MatchResult match(std::span<const JointDetection> predictions,
                  std::span<const JointDetection> ground_truths,
                  double iou_threshold) {
  check_threshold(iou_threshold);
  MatchResult r;
  std::vector<std::size_t> all(ground_truths.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<bool> taken(ground_truths.size(), false);
  for (std::size_t p : confidence_order(predictions)) {
    double best_iou = 0.0;
    const long g = best_ground_truth(predictions[p].box, ground_truths, all, taken, iou_threshold, best_iou);
    if (g < 0) {
      r.unmatched_predictions.push_back(p);
    } else {
      taken[static_cast<std::size_t>(g)] = true;
      r.pairs.push_back(MatchPair{p, static_cast<std::size_t>(g), best_iou});
    }
  }
  for (std::size_t g = 0; g < ground_truths.size(); ++g) {
    if (!taken[g]) r.unmatched_ground_truths.push_back(g);
  }
  return r;
}

RankedOutcomes rank_outcomes(std::span<const JointDetection> predictions,
                             std::span<const JointDetection> ground_truths,
                             double iou_threshold) {
  check_threshold(iou_threshold);
  std::map<std::string, std::vector<std::size_t>> gts_by_image;
  for (std::size_t g = 0; g < ground_truths.size(); ++g) {
    gts_by_image[ground_truths[g].image_id].push_back(g);
  }
  std::map<std::string, std::vector<bool>> taken;
  for (const auto& [image, list] : gts_by_image) taken[image].assign(list.size(), false);

  RankedOutcomes out;
  out.n_pos = ground_truths.size();
  for (std::size_t p : confidence_order(predictions)) {
    const auto it = gts_by_image.find(predictions[p].image_id);
    if (it == gts_by_image.end()) {
      out.true_positive.push_back(false);
      continue;
    }
    auto& flags = taken[it->first];
    double best_iou = 0.0;
    const long g = best_ground_truth(predictions[p].box, ground_truths, it->second, flags, iou_threshold, best_iou);
    if (g >= 0) flags[static_cast<std::size_t>(g)] = true;
    out.true_positive.push_back(g >= 0);
  }
  return out;
}

std::optional<double> ap_from_ranked(const std::vector<bool>& true_positive, std::uint64_t n_pos) {
  if (n_pos == 0) return std::nullopt;
  double sum = 0.0;
  std::uint64_t hits = 0;
  for (std::size_t rank = 0; rank < true_positive.size(); ++rank) {
    if (!true_positive[rank]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  return sum / static_cast<double>(n_pos);
}

std::vector<PrPoint> pr_curve(const std::vector<bool>& true_positive, std::uint64_t n_pos) {
  std::vector<PrPoint> curve;
  if (n_pos == 0) return curve;
  std::uint64_t hits = 0;
  for (std::size_t rank = 0; rank < true_positive.size(); ++rank) {
    if (true_positive[rank]) ++hits;
    curve.push_back(PrPoint{static_cast<double>(hits) / static_cast<double>(n_pos),
                            static_cast<double>(hits) / static_cast<double>(rank + 1)});
  }
  return curve;
}

std::optional<double> interpolated_ap_from_ranked(const std::vector<bool>& true_positive,
                                                  std::uint64_t n_pos) {
  if (n_pos == 0) return std::nullopt;
  std::vector<PrPoint> curve = pr_curve(true_positive, n_pos);
  for (std::size_t i = curve.size(); i-- > 1;) {
    curve[i - 1].precision = std::max(curve[i - 1].precision, curve[i].precision);
  }
  double area = 0.0;
  double prev_recall = 0.0;
  for (const PrPoint& p : curve) {
    area += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return area;
}

std::optional<double> average_precision(std::span<const JointDetection> predictions,
                                        std::span<const JointDetection> ground_truths,
                                        double iou_threshold, bool interpolated) {
  const RankedOutcomes r = rank_outcomes(predictions, ground_truths, iou_threshold);
  return interpolated ? interpolated_ap_from_ranked(r.true_positive, r.n_pos)
                      : ap_from_ranked(r.true_positive, r.n_pos);
}

double mean_average_precision(std::span<const std::optional<double>> per_class_ap) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& ap : per_class_ap) {
    if (!ap) continue;
    sum += *ap;
    ++n;
  }
  if (n == 0) fail(ErrorKind::kProtocol, "mAP needs at least one class with ground truth");
  return sum / static_cast<double>(n);
}

double detection_accuracy(const DetectionCounts& counts, AccuracyDefinition definition) {
  if (counts.n_pos == 0) fail(ErrorKind::kProtocol, "detection accuracy is undefined without ground truth");
  if (definition == AccuracyDefinition::kMatchedGroundTruth) {
    return static_cast<double>(counts.tp) / static_cast<double>(counts.n_pos);
  }
  const std::uint64_t denom = counts.tp + counts.fp + counts.fn;
  return denom == 0 ? 0.0 : static_cast<double>(counts.tp) / static_cast<double>(denom);
}

ConfusionMatrix confusion_matrix(std::span<const JointDetection> predictions,
                                 std::span<const JointDetection> ground_truths,
                                 double iou_threshold, double min_confidence) {
  check_threshold(iou_threshold);
  ConfusionMatrix m{};
  std::map<std::string, std::vector<std::size_t>> gts_by_image;
  std::map<std::string, std::vector<std::size_t>> preds_by_image;
  for (std::size_t g = 0; g < ground_truths.size(); ++g) gts_by_image[ground_truths[g].image_id].push_back(g);
  for (std::size_t p : confidence_order(predictions)) {
    if (predictions[p].confidence.value_or(0.0) >= min_confidence) {
      preds_by_image[predictions[p].image_id].push_back(p);
    }
  }
  std::map<std::string, bool> images;
  for (const auto& [k, v] : gts_by_image) images[k] = true;
  for (const auto& [k, v] : preds_by_image) images[k] = true;
  constexpr std::size_t kBackground = kJointClassCount;
  for (const auto& [image, unused] : images) {
    const auto& gts = gts_by_image[image];
    std::vector<bool> taken(gts.size(), false);
    for (std::size_t p : preds_by_image[image]) {
      double best_iou = 0.0;
      const long g = best_ground_truth(predictions[p].box, ground_truths, gts, taken, iou_threshold, best_iou);
      const auto pc = static_cast<std::size_t>(joint_class_index(predictions[p].joint));
      if (g < 0) {
        ++m[pc][kBackground];
      } else {
        taken[static_cast<std::size_t>(g)] = true;
        ++m[pc][static_cast<std::size_t>(joint_class_index(ground_truths[gts[static_cast<std::size_t>(g)]].joint))];
      }
    }
    for (std::size_t k = 0; k < gts.size(); ++k) {
      if (!taken[k]) ++m[kBackground][static_cast<std::size_t>(joint_class_index(ground_truths[gts[k]].joint))];
    }
  }
  return m;
}

EvalReport evaluate_detections(std::span<const JointDetection> predictions,
                               std::span<const JointDetection> ground_truths,
                               const DetectionEvalOptions& options) {
  for (const auto& p : predictions) {
    if (!p.confidence) fail(ErrorKind::kValidation, "prediction on '" + p.image_id + "' has no confidence");
  }
  EvalReport report;
  report.iou_threshold = options.iou_threshold;
  report.interpolated_ap = options.interpolated_ap;
  DetectionCounts total;
  std::vector<std::optional<double>> aps;
  for (JointClass c : all_joint_classes()) {
    std::vector<JointDetection> preds;
    std::vector<JointDetection> gts;
    for (const auto& p : predictions) if (p.joint == c) preds.push_back(p);
    for (const auto& g : ground_truths) if (g.joint == c) gts.push_back(g);
    const RankedOutcomes r = rank_outcomes(preds, gts, options.iou_threshold);
    const std::vector<bool>& view = r.true_positive;
    ClassReport cr;
    cr.joint = c;
    cr.n_pos = r.n_pos;
    cr.tp = static_cast<std::uint64_t>(std::count(view.begin(), view.end(), true));
    cr.fp = view.size() - cr.tp;
    cr.fn = cr.n_pos - cr.tp;
    cr.ap = options.interpolated_ap ? interpolated_ap_from_ranked(view, r.n_pos) : ap_from_ranked(view, r.n_pos);
    cr.pr_curve = pr_curve(view, r.n_pos);
    aps.push_back(cr.ap);
    total.tp += cr.tp;
    total.fp += cr.fp;
    total.fn += cr.fn;
    total.n_pos += cr.n_pos;
    report.per_class.push_back(std::move(cr));
  }
  if (std::any_of(aps.begin(), aps.end(), [](const auto& a) { return a.has_value(); })) {
    report.map_score = mean_average_precision(aps);
  }
  report.accuracy = total.n_pos > 0 ? detection_accuracy(total, options.accuracy) : 0.0;
  report.confusion = confusion_matrix(predictions, ground_truths, options.iou_threshold,
                                      options.confusion_confidence);
  return report;
}

}  // namespace artss
