#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "artss/baseline.hpp"
#include "artss/error.hpp"
#include "artss/rng.hpp"

namespace artss {
namespace {

double objective(const BaselineModel& m, const std::vector<std::vector<double>>& x,
                 const std::vector<double>& y, double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - predict_raw(m, x[i]);
    s += r * r;
  }
  for (double w : m.weights) s += lambda * w * w;
  return s;
}

struct LinearSet {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  std::vector<double> w;
  double b = 0.0;
};

LinearSet linear_set(Rng& rng, std::size_t n, std::size_t d, double noise = 0.0) {
  LinearSet s;
  s.w.resize(d);
  for (auto& v : s.w) v = rng.uniform(-3, 3);
  s.b = rng.uniform(20, 40);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (auto& v : row) v = rng.uniform(-1, 1);
    s.y.push_back(s.b + std::inner_product(row.begin(), row.end(), s.w.begin(), 0.0) + noise * rng.normal());
    s.x.push_back(std::move(row));
  }
  return s;
}

JointSequence sequence(Rng& rng, std::size_t slots, int crop) {
  JointSequence s;
  s.image_id = "p";
  s.crop_width = crop;
  s.crop_height = crop;
  s.validity_mask.assign(slots, 0);
  s.crops.assign(slots * static_cast<std::size_t>(crop * crop), 0.0);
  for (std::size_t k = 0; k < slots; ++k) {
    if (!rng.bernoulli(0.7)) continue;
    s.validity_mask[k] = 1;
    for (std::size_t i = 0; i < s.crop_size(); ++i) s.crops[k * s.crop_size() + i] = rng.uniform01();
  }
  if (s.valid_count() == 0) {
    s.validity_mask[0] = 1;
    std::fill_n(s.crops.begin(), s.crop_size(), 0.5);
  }
  return s;
}

TEST(CropFeatures, ConstantCrop) {
  const std::vector<double> c(64, 0.5);
  const auto f = crop_features(c);
  ASSERT_EQ(f.size(), kCropFeatureCount);
  EXPECT_EQ(f[0], 0.5);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[10], 0.0);
  EXPECT_NEAR(std::accumulate(f.begin() + 2, f.begin() + 10, 0.0), 1.0, 1e-15);
}

TEST(CropFeatures, HistogramSumsToOne) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> c(1 + rng.index(300));
    for (auto& v : c) v = rng.uniform01();
    const auto f = crop_features(c);
    EXPECT_NEAR(std::accumulate(f.begin() + 2, f.begin() + 10, 0.0), 1.0, 1e-12);
    EXPECT_GE(f[10], 0.0);
    EXPECT_LE(f[10], 1.0);
  }
  const std::vector<double> two{0.0, 0.0, 1.0, 1.0};
  const auto f = crop_features(two);
  EXPECT_EQ(f[0], 0.5);
  EXPECT_EQ(f[1], 0.25);
  EXPECT_EQ(f[10], 0.5);
}

TEST(Featurize, LayoutAndPaddingInvariance) {
  Rng rng(2);
  const auto s = sequence(rng, 22, 8);
  const auto f = featurize(s);
  ASSERT_EQ(f.size(), feature_dimension(22));
  EXPECT_EQ(feature_dimension(22), 22u * 11u + 11u);
  for (std::size_t k = 0; k < 22; ++k) {
    if (s.validity_mask[k]) continue;
    for (std::size_t j = 0; j < kCropFeatureCount; ++j) EXPECT_EQ(f[k * kCropFeatureCount + j], 0.0);
  }
  auto junk = s;
  for (std::size_t k = 0; k < 22; ++k) {
    if (junk.validity_mask[k]) continue;
    for (std::size_t i = 0; i < junk.crop_size(); ++i) junk.crops[k * junk.crop_size() + i] = 0.9;
  }
  EXPECT_EQ(featurize(junk), f);
  JointSequence empty = s;
  std::fill(empty.validity_mask.begin(), empty.validity_mask.end(), 0);
  EXPECT_THROW(featurize(empty), Error);
}

TEST(Fit, RecoversExactLinearModel) {
  Rng rng(3);
  const auto s = linear_set(rng, 60, 8);
  const auto m = fit(s.x, s.y, 0.0);
  for (std::size_t j = 0; j < s.w.size(); ++j) EXPECT_NEAR(m.weights[j], s.w[j], 1e-9);
  EXPECT_NEAR(m.intercept, s.b, 1e-9);
  for (std::size_t i = 0; i < s.x.size(); ++i) EXPECT_LT(std::abs(predict_raw(m, s.x[i]) - s.y[i]), 1e-8);
}

TEST(Fit, HugeLambdaShrinksWeights) {
  Rng rng(4);
  const auto s = linear_set(rng, 40, 5);
  const auto m = fit(s.x, s.y, 1e12);
  for (double w : m.weights) EXPECT_LT(std::abs(w), 1e-8);
  EXPECT_NEAR(m.intercept, std::accumulate(s.y.begin(), s.y.end(), 0.0) / 40.0, 1e-6);
}

TEST(Fit, RidgeObjectiveIsStationary) {
  Rng rng(5);
  const auto s = linear_set(rng, 50, 6, 0.5);
  const double lambda = 0.7;
  const auto m = fit(s.x, s.y, lambda);
  const double h = 1e-5;
  double norm2 = 0.0;
  for (std::size_t j = 0; j <= m.weights.size(); ++j) {
    auto up = m;
    auto down = m;
    if (j == m.weights.size()) {
      up.intercept += h;
      down.intercept -= h;
    } else {
      up.weights[j] += h;
      down.weights[j] -= h;
    }
    const double g = (objective(up, s.x, s.y, lambda) - objective(down, s.x, s.y, lambda)) / (2 * h);
    norm2 += g * g;
  }
  EXPECT_LT(std::sqrt(norm2), 1e-6);
}

TEST(Fit, DeterministicAndRankChecked) {
  Rng rng(6);
  const auto s = linear_set(rng, 30, 4, 0.1);
  EXPECT_EQ(fit(s.x, s.y, 0.01), fit(s.x, s.y, 0.01));
  auto dup = s.x;
  for (auto& row : dup) row[3] = row[2];
  try {
    fit(dup, s.y, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConditioning);
  }
  EXPECT_NO_THROW(fit(dup, s.y, 0.1));
  const std::vector<double> short_y(5, 1.0);
  EXPECT_THROW(fit(s.x, short_y, 0.1), Error);
  EXPECT_THROW(fit(s.x, s.y, -1.0), Error);
}

TEST(Predict, InterceptAndClamp) {
  BaselineModel m;
  m.intercept = 12.0;
  m.weights.assign(3, 0.0);
  EXPECT_EQ(predict(m, std::vector<double>{1, 2, 3}), 12.0);
  m.intercept = -3.0;
  EXPECT_EQ(predict_raw(m, std::vector<double>{1, 2, 3}), -3.0);
  EXPECT_EQ(predict(m, std::vector<double>{1, 2, 3}), 0.0);
  m.intercept = 500.0;
  EXPECT_EQ(predict(m, std::vector<double>{1, 2, 3}), 288.0);
  EXPECT_THROW(predict(m, std::vector<double>{1, 2}), Error);
}

TEST(Predict, LinearSyntheticHeldOut) {
  Rng rng(7);
  std::vector<std::vector<double>> x;
  for (int i = 0; i < 400; ++i) x.push_back(featurize(sequence(rng, 6, 6)));
  std::vector<double> w(x[0].size());
  for (auto& v : w) v = rng.uniform(-20, 20);
  std::vector<double> y;
  for (const auto& row : x) y.push_back(100.0 + std::inner_product(row.begin(), row.end(), w.begin(), 0.0));
  const std::vector<std::vector<double>> train(x.begin(), x.begin() + 300);
  const std::vector<double> train_y(y.begin(), y.begin() + 300);
  const auto m = fit(train, train_y, 1e-8);
  double err = 0.0;
  for (std::size_t i = 300; i < 400; ++i) err += std::abs(predict(m, x[i]) - y[i]);
  EXPECT_LT(err / 100.0, 0.1);
}

TEST(ModelJson, RoundTripAndSchema) {
  Rng rng(8);
  const auto s = linear_set(rng, 20, 3, 0.3);
  const auto m = fit(s.x, s.y, 0.5);
  const auto text = format_model_json(m);
  EXPECT_EQ(parse_model_json(text), m);
  EXPECT_NE(text.find(std::string(kBaselineSchema)), std::string::npos);
  EXPECT_THROW(parse_model_json("{}"), Error);
  std::string wrong = text;
  wrong.replace(wrong.find("v1"), 2, "v9");
  EXPECT_THROW(parse_model_json(wrong), Error);
}

}  // namespace
}  // namespace artss
