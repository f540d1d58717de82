#pragma once

// Reference implementations written independently of the library, used as
// test oracles.

#include <optional>
#include <span>
#include <vector>

#include "artss/core_model.hpp"
#include "artss/maskgen.hpp"

namespace artss::testing {

// Counts lattice cells (grid x grid over the unit square) whose centres lie
// inside each box.
double raster_box_iou(const BoundingBox& a, const BoundingBox& b, int grid);

// True-positive flags in global rank order. Matching is found per image by
// enumerating every injective assignment and keeping the one that is
// lexicographically best in rank order (matched, higher IoU, lower GT index).
std::vector<bool> brute_force_outcomes(std::span<const JointDetection> predictions,
                                       std::span<const JointDetection> ground_truths,
                                       double iou_threshold);

// (1 / N_pos) * sum over k of the precision at the rank of the k-th true
// positive; nullopt when there is no ground truth.
std::optional<double> brute_force_ap(std::span<const JointDetection> predictions,
                                     std::span<const JointDetection> ground_truths,
                                     double iou_threshold);

// Threshold bin minimizing the within-class sum of squares, compared as exact
// fractions; first minimum wins.
int exhaustive_otsu(const Histogram& hist);

double direct_huber(double residual, double delta);

}  // namespace artss::testing
