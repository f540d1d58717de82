#pragma once

// Subcommand implementations behind the `artss` binary. Every command takes
// a plain options struct so tests can drive it without argv.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "artss/annot_io.hpp"
#include "artss/error.hpp"
#include "artss/augment.hpp"
#include "artss/baseline.hpp"
#include "artss/detect_eval.hpp"
#include "artss/imgproc.hpp"
#include "artss/maskgen.hpp"
#include "artss/regress_eval.hpp"

namespace artss::app {

namespace fs = std::filesystem;

struct Global {
  int jobs = 1;
  std::uint64_t seed = 0;
};

struct PreprocessOptions {
  fs::path manifest;
  fs::path out;
  int target_w = 640;
  int target_h = 640;
  Interpolation interpolation = Interpolation::kBilinear;
};

struct MaskOptions {
  fs::path in;
  fs::path out;
  MaskParams params;
};

struct EvalSegOptions {
  fs::path pred;
  fs::path gt;
  fs::path out;  // empty: JSON to stdout
};

struct EvalDetOptions {
  fs::path pred;
  fs::path gt;
  fs::path out;  // empty: JSON to stdout
  DetectionEvalOptions eval;
};

struct BuildSeqOptions {
  fs::path det;
  fs::path img;
  fs::path out;
  int crop_size = kDefaultCropSize;
  std::optional<int> max_length;
};

struct AugmentOptions {
  fs::path in;
  fs::path out;
  fs::path labels;  // empty: look next to each image
  fs::path config;
  int count = 1;
};

struct SplitOptions {
  fs::path manifest;
  fs::path out;
  std::string protocol = "auto";  // auto, study or scaled
};

struct EvalTssOptions {
  fs::path pred;
  fs::path gt;
  fs::path folds;
  fs::path out;  // empty: stdout
  double huber_delta = kDefaultHuberDelta;
  std::string model = "model";
};

struct SplitSelection {
  fs::path split;
  std::string subset = "all";  // all, train, val or test
};

struct BaselineFitOptions {
  fs::path seq;
  fs::path scores;
  fs::path out;
  double lambda = kDefaultRidgeLambda;
  SplitSelection select;
};

struct BaselinePredictOptions {
  fs::path seq;
  fs::path model;
  fs::path out;
  SplitSelection select;
};

struct ReportDistOptions {
  fs::path manifest;
  fs::path out;
  int bins = 20;
};

struct RunAllOptions {
  fs::path manifest;
  fs::path out;
  fs::path labels;  // empty: <manifest dir>/labels
  int target_w = 640;
  int target_h = 640;
  int crop_size = kDefaultCropSize;
  double lambda = kDefaultRidgeLambda;
  double huber_delta = kDefaultHuberDelta;
  MaskParams mask;
};

// Text a command would print to stdout (empty when it wrote files only).
using Output = std::string;

Output cmd_preprocess(const PreprocessOptions& o, const Global& g);
Output cmd_mask(const MaskOptions& o, const Global& g);
Output cmd_eval_seg(const EvalSegOptions& o, const Global& g);
Output cmd_eval_det(const EvalDetOptions& o, const Global& g);
Output cmd_build_seq(const BuildSeqOptions& o, const Global& g);
Output cmd_augment(const AugmentOptions& o, const Global& g);
Output cmd_split(const SplitOptions& o, const Global& g);
Output cmd_eval_tss(const EvalTssOptions& o, const Global& g);
Output cmd_baseline_fit(const BaselineFitOptions& o, const Global& g);
Output cmd_baseline_predict(const BaselinePredictOptions& o, const Global& g);
Output cmd_report_dist(const ReportDistOptions& o, const Global& g);
Output cmd_run_all(const RunAllOptions& o, const Global& g);

// Gaussian kernel density with Silverman's bandwidth, evaluated at `at`.
std::vector<double> kernel_density(const std::vector<double>& samples,
                                   const std::vector<double>& at);

// Parses `WxH`.
std::pair<int, int> parse_size(const std::string& text);

}  // namespace artss::app

namespace artss::app {

// An error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace artss::app
