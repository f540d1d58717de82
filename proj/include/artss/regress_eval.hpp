#pragma once

// TSS regression scoring (MAE, RMSE, Huber) and the per-fold table with an
// arithmetic-mean Average column.

#include <span>
#include <string>
#include <vector>

#include "artss/core_model.hpp"
#include "artss/report.hpp"

namespace artss {

inline constexpr double kDefaultHuberDelta = 1.0;

struct PairedScores {
  std::vector<std::string> ids;  // sorted
  std::vector<double> predictions;
  std::vector<double> targets;
};

// Joins predictions to ground truth by image id. Any id present on only one
// side, or twice on one side, is a pairing error that lists the ids.
PairedScores pair_scores(std::span<const SharpScore> predictions,
                         std::span<const SharpScore> ground_truth);
// Keeps only the listed ids (which must all be paired).
PairedScores subset(const PairedScores& paired, std::span<const std::string> ids);

double mae(std::span<const double> predictions, std::span<const double> targets);
double rmse(std::span<const double> predictions, std::span<const double> targets);
// Mean over pairs of 0.5 r^2 (|r| <= delta) or delta |r| - 0.5 delta^2.
double huber(std::span<const double> predictions, std::span<const double> targets,
             double delta = kDefaultHuberDelta);

// Single-pair loss and its derivative with respect to the prediction.
double huber_loss(double residual, double delta);
double huber_gradient(double prediction, double target, double delta);

RegressionBlock regression_metrics(const PairedScores& paired,
                                   double delta = kDefaultHuberDelta);

struct FoldMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double huber = 0.0;
  bool operator==(const FoldMetrics&) const = default;
};

struct FoldTable {
  std::string model;
  std::vector<FoldMetrics> folds;
  FoldMetrics average;
};

// Protocol error unless exactly `expected_folds` folds are supplied.
FoldTable fold_report(std::span<const FoldMetrics> folds, std::string model = "",
                      std::size_t expected_folds = 3);

// `model,metric,fold_1,...,fold_k,average` with rows MAE, RMSE and
// Huber Loss, fixed `decimals` places (2 by default, like published tables).
std::string format_fold_table_csv(const FoldTable& table, int decimals = 2);
std::string format_fold_table_json(const FoldTable& table);

}  // namespace artss
