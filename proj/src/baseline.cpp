#include "artss/baseline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "artss/error.hpp"
#include "artss/maskgen.hpp"
#include "json.hpp"

namespace artss {

std::size_t feature_dimension(std::size_t slots) {
  return kCropFeatureCount * slots + kCropFeatureCount;
}

std::vector<double> crop_features(std::span<const double> crop) {
  if (crop.empty()) fail(ErrorKind::kValidation, "empty crop");
  std::vector<double> f(kCropFeatureCount, 0.0);
  const double n = static_cast<double>(crop.size());
  double sum = 0.0;
  for (double v : crop) sum += v;
  const double mean = sum / n;
  double var = 0.0;
  for (double v : crop) var += (v - mean) * (v - mean);
  f[0] = mean;
  f[1] = var / n;

  Histogram hist{};
  for (double v : crop) {
    const double c = std::clamp(v, 0.0, 1.0);
    const int b = std::min(kFeatureHistogramBins - 1, static_cast<int>(c * kFeatureHistogramBins));
    f[2 + b] += 1.0;
    ++hist[intensity_bin(c)];
  }
  for (int b = 0; b < kFeatureHistogramBins; ++b) f[2 + b] /= n;

  const auto populated = std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
  if (populated >= 2) {
    const int t = otsu(hist).threshold_bin;
    std::uint64_t fg = 0;
    for (int b = t; b < kHistogramBins; ++b) fg += hist[b];
    f[10] = static_cast<double>(fg) / n;
  }
  return f;
}

std::vector<double> featurize(const JointSequence& seq) {
  const std::size_t slots = seq.slots();
  std::vector<double> rows(slots * kCropFeatureCount, 0.0);
  for (std::size_t s = 0; s < slots; ++s) {
    if (!seq.validity_mask[s]) continue;
    const auto f = crop_features(seq.crop(s));
    std::copy(f.begin(), f.end(), rows.begin() + s * kCropFeatureCount);
  }
  const auto pooled = masked_pool(rows, seq.validity_mask, kCropFeatureCount, PoolMode::kMean);
  rows.insert(rows.end(), pooled.begin(), pooled.end());
  return rows;
}

BaselineModel fit(std::span<const std::vector<double>> features,
                  std::span<const double> targets, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    fail(ErrorKind::kValidation, "ridge lambda must be >= 0");
  }
  if (features.size() != targets.size()) {
    fail(ErrorKind::kValidation, "feature rows (" + std::to_string(features.size()) +
                                     ") and targets (" + std::to_string(targets.size()) +
                                     ") differ in count");
  }
  if (features.empty()) fail(ErrorKind::kValidation, "no training samples");
  const auto n = static_cast<Eigen::Index>(features.size());
  const auto d = static_cast<Eigen::Index>(features.front().size());
  if (d == 0) fail(ErrorKind::kValidation, "zero-dimensional features");

  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = features[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != d) {
      fail(ErrorKind::kValidation, "feature row " + std::to_string(i) + " has dimension " +
                                       std::to_string(row.size()) + ", expected " +
                                       std::to_string(d));
    }
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = row[static_cast<std::size_t>(j)];
    y(i) = targets[static_cast<std::size_t>(i)];
  }
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  x.rowwise() -= x_mean;
  y.array() -= y_mean;

  Eigen::VectorXd w;
  if (lambda > 0.0) {
    Eigen::MatrixXd a(n + d, d);
    a.topRows(n) = x;
    a.bottomRows(d) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + d);
    b.head(n) = y;
    w = a.colPivHouseholderQr().solve(b);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < d) {
      fail(ErrorKind::kConditioning,
           "design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
               std::to_string(d) + "); use lambda > 0");
    }
    w = qr.solve(y);
  }
  if (!w.allFinite()) fail(ErrorKind::kConditioning, "ridge solve produced non-finite weights");

  BaselineModel m;
  m.lambda = lambda;
  m.weights.assign(w.data(), w.data() + w.size());
  m.intercept = y_mean - x_mean.dot(w);
  return m;
}

double predict_raw(const BaselineModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size()) {
    fail(ErrorKind::kValidation, "feature dimension " + std::to_string(features.size()) +
                                     " does not match model dimension " +
                                     std::to_string(model.weights.size()));
  }
  double acc = model.intercept;
  for (std::size_t i = 0; i < features.size(); ++i) acc += model.weights[i] * features[i];
  return acc;
}

double predict(const BaselineModel& model, std::span<const double> features) {
  const double v = predict_raw(model, features);
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, kDefaultTssCeiling);
}

std::string format_model_json(const BaselineModel& model) {
  nlohmann::json j;
  j["schema"] = model.schema;
  j["lambda"] = model.lambda;
  j["intercept"] = model.intercept;
  j["dimension"] = model.weights.size();
  j["weights"] = model.weights;
  return j.dump(1) + "\n";
}

BaselineModel parse_model_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("model JSON: ") + e.what());
  }
  try {
    BaselineModel m;
    m.schema = j.at("schema").get<std::string>();
    if (m.schema != kBaselineSchema) {
      fail(ErrorKind::kSchema, "unsupported model schema '" + m.schema + "', expected '" +
                                   std::string(kBaselineSchema) + "'");
    }
    m.lambda = j.at("lambda").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    if (j.at("dimension").get<std::size_t>() != m.weights.size()) {
      fail(ErrorKind::kSchema, "model dimension does not match weight count");
    }
    if (!std::isfinite(m.intercept) ||
        !std::all_of(m.weights.begin(), m.weights.end(), [](double v) { return std::isfinite(v); })) {
      fail(ErrorKind::kSchema, "model has non-finite parameters");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("model JSON: ") + e.what());
  }
}

}  // namespace artss
