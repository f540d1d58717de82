#pragma once

// Reference TSS predictor: ridge regression on pooled joint-crop features.
//
// Feature layout for a sequence with L slots (dimension 11 * L + 11):
//   slot s, s = 0..L-1, 11 values each:
//     [0] mean  [1] variance  [2..9] 8-bin histogram (fractions)
//     [10] Otsu foreground fraction (0 for crops with a single level)
//   padded slots are all zero
//   last 11 values: mean of the valid slots' feature rows

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "artss/seqbuild.hpp"

namespace artss {

inline constexpr std::size_t kCropFeatureCount = 11;
inline constexpr int kFeatureHistogramBins = 8;
inline constexpr std::string_view kBaselineSchema = "artss-baseline-v1";
inline constexpr double kDefaultRidgeLambda = 1e-2;

std::size_t feature_dimension(std::size_t slots);

std::vector<double> crop_features(std::span<const double> crop);
// Throws a pooling error when no slot is valid.
std::vector<double> featurize(const JointSequence& seq);

struct BaselineModel {
  std::string schema{kBaselineSchema};
  double lambda = 0.0;
  double intercept = 0.0;
  std::vector<double> weights;
  bool operator==(const BaselineModel&) const = default;
};

// Minimizes ||y - b - X w||^2 + lambda ||w||^2 with an unpenalized intercept,
// solved by column-pivoted QR on the centred system. A rank-deficient system
// at lambda = 0 is a conditioning error.
BaselineModel fit(std::span<const std::vector<double>> features,
                  std::span<const double> targets, double lambda);

double predict_raw(const BaselineModel& model, std::span<const double> features);
// predict_raw clamped to [0, kDefaultTssCeiling].
double predict(const BaselineModel& model, std::span<const double> features);

std::string format_model_json(const BaselineModel& model);
BaselineModel parse_model_json(std::string_view text);

}  // namespace artss
