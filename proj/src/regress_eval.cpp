#include "artss/regress_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "artss/annot_io.hpp"
#include "artss/error.hpp"
#include "artss/simd/kernels.hpp"
#include "json.hpp"

namespace artss {
namespace {

void check_paired(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kPairing, "prediction count " + std::to_string(a.size()) +
                                  " does not match ground-truth count " +
                                  std::to_string(b.size()));
  }
  if (a.empty()) fail(ErrorKind::kPairing, "no paired scores");
}

std::string join_ids(const std::set<std::string>& ids) {
  std::string out;
  std::size_t shown = 0;
  for (const auto& id : ids) {
    if (shown == 20) {
      out += ", ... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    out += (out.empty() ? "" : ", ") + id;
    ++shown;
  }
  return out;
}

}  // namespace

PairedScores pair_scores(std::span<const SharpScore> predictions,
                         std::span<const SharpScore> ground_truth) {
  std::map<std::string, double> pred;
  std::map<std::string, double> gt;
  std::set<std::string> duplicated;
  for (const auto& p : predictions) {
    if (!pred.emplace(p.image_id, p.tss).second) duplicated.insert(p.image_id);
  }
  for (const auto& g : ground_truth) {
    if (!gt.emplace(g.image_id, g.tss).second) duplicated.insert(g.image_id);
  }
  if (!duplicated.empty()) fail(ErrorKind::kPairing, "duplicate ids: " + join_ids(duplicated));
  std::set<std::string> unpaired;
  for (const auto& [id, v] : pred) if (!gt.contains(id)) unpaired.insert(id);
  for (const auto& [id, v] : gt) if (!pred.contains(id)) unpaired.insert(id);
  if (!unpaired.empty()) fail(ErrorKind::kPairing, "unpaired ids: " + join_ids(unpaired));
  if (pred.empty()) fail(ErrorKind::kPairing, "no paired scores");

  PairedScores out;
  for (const auto& [id, v] : pred) {
    out.ids.push_back(id);
    out.predictions.push_back(v);
    out.targets.push_back(gt.at(id));
  }
  return out;
}

PairedScores subset(const PairedScores& paired, std::span<const std::string> ids) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < paired.ids.size(); ++i) index[paired.ids[i]] = i;
  std::set<std::string> wanted(ids.begin(), ids.end());
  std::set<std::string> missing;
  PairedScores out;
  for (const auto& id : wanted) {
    const auto it = index.find(id);
    if (it == index.end()) {
      missing.insert(id);
      continue;
    }
    out.ids.push_back(id);
    out.predictions.push_back(paired.predictions[it->second]);
    out.targets.push_back(paired.targets[it->second]);
  }
  if (!missing.empty()) fail(ErrorKind::kPairing, "ids without paired scores: " + join_ids(missing));
  return out;
}

double mae(std::span<const double> predictions, std::span<const double> targets) {
  check_paired(predictions, targets);
  return simd::sum_abs_diff(targets, predictions) / static_cast<double>(predictions.size());
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  check_paired(predictions, targets);
  return std::sqrt(simd::sum_sq_diff(targets, predictions) / static_cast<double>(predictions.size()));
}

double huber(std::span<const double> predictions, std::span<const double> targets, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    fail(ErrorKind::kValidation, "huber delta must be > 0, got " + std::to_string(delta));
  }
  check_paired(predictions, targets);
  return simd::sum_huber(targets, predictions, delta) / static_cast<double>(predictions.size());
}

double huber_loss(double residual, double delta) {
  if (!(delta > 0.0)) fail(ErrorKind::kValidation, "huber delta must be > 0");
  const double r = std::fabs(residual);
  return r <= delta ? 0.5 * r * r : delta * r - 0.5 * delta * delta;
}

double huber_gradient(double prediction, double target, double delta) {
  if (!(delta > 0.0)) fail(ErrorKind::kValidation, "huber delta must be > 0");
  return std::clamp(prediction - target, -delta, delta);
}

RegressionBlock regression_metrics(const PairedScores& paired, double delta) {
  RegressionBlock b;
  b.n = paired.ids.size();
  b.mae = mae(paired.predictions, paired.targets);
  b.rmse = rmse(paired.predictions, paired.targets);
  b.huber = huber(paired.predictions, paired.targets, delta);
  b.huber_delta = delta;
  return b;
}

FoldTable fold_report(std::span<const FoldMetrics> folds, std::string model,
                      std::size_t expected_folds) {
  if (folds.size() != expected_folds) {
    fail(ErrorKind::kProtocol, "fold table needs " + std::to_string(expected_folds) +
                                   " folds, got " + std::to_string(folds.size()));
  }
  FoldTable t;
  t.model = std::move(model);
  t.folds.assign(folds.begin(), folds.end());
  for (const auto& f : folds) {
    if (!std::isfinite(f.mae) || !std::isfinite(f.rmse) || !std::isfinite(f.huber)) {
      fail(ErrorKind::kProtocol, "fold table has a missing (non-finite) value");
    }
    t.average.mae += f.mae;
    t.average.rmse += f.rmse;
    t.average.huber += f.huber;
  }
  const double n = static_cast<double>(folds.size());
  t.average.mae /= n;
  t.average.rmse /= n;
  t.average.huber /= n;
  return t;
}

std::string format_fold_table_csv(const FoldTable& table, int decimals) {
  std::string out = "model,metric";
  for (std::size_t i = 0; i < table.folds.size(); ++i) out += ",fold_" + std::to_string(i + 1);
  out += ",average\n";
  auto row = [&](const char* metric, double FoldMetrics::*field) {
    out += table.model + "," + metric;
    for (const auto& f : table.folds) out += "," + format_fixed(f.*field, decimals);
    out += "," + format_fixed(table.average.*field, decimals) + "\n";
  };
  row("MAE", &FoldMetrics::mae);
  row("RMSE", &FoldMetrics::rmse);
  row("Huber Loss", &FoldMetrics::huber);
  return out;
}

std::string format_fold_table_json(const FoldTable& table) {
  nlohmann::json j;
  j["model"] = table.model;
  auto metrics = [](const FoldMetrics& f) {
    return nlohmann::json{{"mae", round6(f.mae)}, {"rmse", round6(f.rmse)}, {"huber", round6(f.huber)}};
  };
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : table.folds) folds.push_back(metrics(f));
  j["folds"] = std::move(folds);
  j["average"] = metrics(table.average);
  return j.dump(2) + "\n";
}

}  // namespace artss
