#include "cli.hpp"

#include <filesystem>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"

namespace artss::app {
namespace {

void report_error(std::ostream& err, const std::string& kind, const std::string& stage,
                  const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"kind", kind}, {"stage", stage}, {"message", message}};
  err << j.dump() << '\n';
}

void add_mask_params(CLI::App* cmd, MaskParams& p, double& sigma) {
  cmd->add_option("--sigma", sigma, "Gaussian sigma in pixels (default 1.5 * width / 640)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--wavelet-levels", p.wavelet_levels, "Haar decomposition levels")
      ->check(CLI::Range(1, 16))->capture_default_str();
  cmd->add_option("--disk", p.disk_radius, "Structuring disk radius")
      ->check(CLI::Range(0, 64))->capture_default_str();
  cmd->add_option("--min-separability", p.min_separability,
                  "Reject images whose Otsu separability is lower")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
}

void add_selection(CLI::App* cmd, SplitSelection& s) {
  cmd->add_option("--split", s.split, "Split JSON restricting the sequences")->check(CLI::ExistingFile);
  cmd->add_option("--subset", s.subset, "Which ids of --split to use")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radiograph joint analysis toolkit", "artss"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from an INI/TOML file; flags win");
  Global global;
  app.add_option("--jobs,-j", global.jobs, "Worker threads")
      ->envname("ARTSS_JOBS")->check(CLI::Range(1, 1024))->capture_default_str();
  app.add_option("--seed", global.seed, "Seed for every random stage")
      ->envname("ARTSS_SEED")->capture_default_str();

  std::string target_size = "640x640";
  std::string interp = "bilinear";
  double sigma = 0.0;

  PreprocessOptions pre;
  auto* c_pre = app.add_subcommand("preprocess", "Resize, normalize and reorient manifest images");
  c_pre->add_option("--manifest", pre.manifest)->required()->check(CLI::ExistingFile)->envname("ARTSS_MANIFEST");
  c_pre->add_option("--out", pre.out)->required()->envname("ARTSS_OUT");
  c_pre->add_option("--target-size", target_size, "WxH")->capture_default_str();
  c_pre->add_option("--interp", interp)->check(CLI::IsMember({"bilinear", "nearest"}))->capture_default_str();

  MaskOptions mask;
  auto* c_mask = app.add_subcommand("mask", "Generate hand masks");
  c_mask->add_option("--in", mask.in)->required()->check(CLI::ExistingDirectory);
  c_mask->add_option("--out", mask.out)->required()->envname("ARTSS_OUT");
  add_mask_params(c_mask, mask.params, sigma);

  EvalSegOptions seg;
  auto* c_seg = app.add_subcommand("eval-seg", "Mask IoU per image and mean");
  c_seg->add_option("--pred", seg.pred)->required()->check(CLI::ExistingDirectory);
  c_seg->add_option("--gt", seg.gt)->required()->check(CLI::ExistingDirectory);
  c_seg->add_option("--out", seg.out, "Report file (default stdout)");

  EvalDetOptions det;
  bool interp_ap = false;
  std::string accuracy = "matched";
  auto* c_det = app.add_subcommand("eval-det", "Joint detection AP, mAP, accuracy and confusion");
  c_det->add_option("--pred", det.pred)->required()->check(CLI::ExistingDirectory);
  c_det->add_option("--gt", det.gt)->required()->check(CLI::ExistingDirectory);
  c_det->add_option("--out", det.out, "Report directory (default JSON on stdout)");
  c_det->add_option("--iou-thresh", det.eval.iou_threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  c_det->add_flag("--interp-ap", interp_ap, "All-point interpolated AP");
  c_det->add_option("--accuracy", accuracy, "matched = TP/N_pos, csi = TP/(TP+FP+FN)")
      ->check(CLI::IsMember({"matched", "csi"}))->capture_default_str();
  c_det->add_option("--confusion-confidence", det.eval.confusion_confidence)
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();

  BuildSeqOptions seq;
  int max_len = 0;
  auto* c_seq = app.add_subcommand("build-seq", "Build per-patient joint-crop sequences");
  c_seq->add_option("--det", seq.det)->required()->check(CLI::ExistingDirectory);
  c_seq->add_option("--img", seq.img)->required()->check(CLI::ExistingDirectory);
  c_seq->add_option("--out", seq.out)->required();
  c_seq->add_option("--crop-size", seq.crop_size)->check(CLI::Range(1, 4096))->capture_default_str();
  c_seq->add_option("--max-len", max_len, "Slots per sequence (default: positional layout)")
      ->check(CLI::Range(1, 1 << 20));

  AugmentOptions aug;
  auto* c_aug = app.add_subcommand("augment", "Seeded augmentation of images and boxes");
  c_aug->add_option("--in", aug.in)->required()->check(CLI::ExistingDirectory);
  c_aug->add_option("--out", aug.out)->required()->envname("ARTSS_OUT");
  c_aug->add_option("--count", aug.count)->check(CLI::Range(1, 100000))->capture_default_str();
  c_aug->add_option("--labels", aug.labels, "Annotation directory (default: next to images)")
      ->check(CLI::ExistingDirectory);
  c_aug->add_option("--augment-config", aug.config, "key=value augmentation ranges")->check(CLI::ExistingFile);
  c_aug->add_option("--seed", global.seed)->capture_default_str();

  SplitOptions split;
  auto* c_split = app.add_subcommand("split", "Cross-validation folds and external test split");
  c_split->add_option("--manifest", split.manifest)->required()->check(CLI::ExistingFile)->envname("ARTSS_MANIFEST");
  c_split->add_option("--out", split.out)->required()->envname("ARTSS_OUT");
  c_split->add_option("--protocol", split.protocol)
      ->check(CLI::IsMember({"auto", "study", "scaled"}))->capture_default_str();
  c_split->add_option("--seed", global.seed)->capture_default_str();

  EvalTssOptions tss;
  auto* c_tss = app.add_subcommand("eval-tss", "MAE, RMSE and Huber loss of TSS predictions");
  c_tss->add_option("--pred", tss.pred)->required()->check(CLI::ExistingFile);
  c_tss->add_option("--gt", tss.gt)->required()->check(CLI::ExistingFile);
  c_tss->add_option("--huber-delta", tss.huber_delta)->check(CLI::PositiveNumber)->capture_default_str();
  c_tss->add_option("--folds", tss.folds, "Directory of fold_k.json; scores each fold's val ids")
      ->check(CLI::ExistingDirectory);
  c_tss->add_option("--model", tss.model, "Model name for the table")->capture_default_str();
  c_tss->add_option("--out", tss.out, "Output file, or directory with --folds (default stdout)");

  BaselineFitOptions bfit;
  auto* c_fit = app.add_subcommand("baseline-fit", "Fit the ridge baseline on sequences");
  c_fit->add_option("--seq", bfit.seq)->required()->check(CLI::ExistingFile);
  c_fit->add_option("--scores", bfit.scores)->required()->check(CLI::ExistingFile);
  c_fit->add_option("--out", bfit.out)->required();
  c_fit->add_option("--lambda", bfit.lambda)->check(CLI::NonNegativeNumber)->capture_default_str();
  add_selection(c_fit, bfit.select);

  BaselinePredictOptions bpred;
  auto* c_pred = app.add_subcommand("baseline-predict", "Predict TSS with a fitted baseline");
  c_pred->add_option("--seq", bpred.seq)->required()->check(CLI::ExistingFile);
  c_pred->add_option("--model", bpred.model)->required()->check(CLI::ExistingFile);
  c_pred->add_option("--out", bpred.out, "Score CSV (default stdout)");
  add_selection(c_pred, bpred.select);

  ReportDistOptions dist;
  auto* c_dist = app.add_subcommand("report-dist", "Age and TSS histograms as SVG");
  c_dist->add_option("--manifest", dist.manifest)->required()->check(CLI::ExistingFile)->envname("ARTSS_MANIFEST");
  c_dist->add_option("--out", dist.out)->required();
  c_dist->add_option("--bins", dist.bins)->check(CLI::Range(1, 1000))->capture_default_str();

  RunAllOptions run;
  auto* c_run = app.add_subcommand("run-all", "Full pipeline with the baseline predictor");
  c_run->add_option("--manifest", run.manifest)->required()->check(CLI::ExistingFile)->envname("ARTSS_MANIFEST");
  c_run->add_option("--out", run.out)->required()->envname("ARTSS_OUT");
  c_run->add_option("--seed", global.seed)->capture_default_str();
  c_run->add_option("--labels", run.labels, "Ground-truth boxes (default <manifest dir>/labels)")
      ->check(CLI::ExistingDirectory);
  c_run->add_option("--target-size", target_size, "WxH")->capture_default_str();
  c_run->add_option("--crop-size", run.crop_size)->check(CLI::Range(1, 4096))->capture_default_str();
  c_run->add_option("--lambda", run.lambda)->check(CLI::NonNegativeNumber)->capture_default_str();
  c_run->add_option("--huber-delta", run.huber_delta)->check(CLI::PositiveNumber)->capture_default_str();
  add_mask_params(c_run, run.mask, sigma);

  std::string stage = "cli";
  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e, out, err);
      report_error(err, "usage", stage, e.what());
      return 2;
    }
    CLI::App* cmd = app.get_subcommands().front();
    stage = cmd->get_name();
    if (sigma > 0.0) {
      mask.params.sigma = sigma;
      run.mask.sigma = sigma;
    }
    if (max_len > 0) seq.max_length = max_len;
    det.eval.interpolated_ap = interp_ap;
    det.eval.accuracy = accuracy == "csi" ? AccuracyDefinition::kCriticalSuccessIndex
                                          : AccuracyDefinition::kMatchedGroundTruth;
    pre.interpolation = interp == "nearest" ? Interpolation::kNearest : Interpolation::kBilinear;
    const auto [tw, th] = parse_size(target_size);
    pre.target_w = run.target_w = tw;
    pre.target_h = run.target_h = th;

    Output text;
    if (cmd == c_pre) text = cmd_preprocess(pre, global);
    else if (cmd == c_mask) text = cmd_mask(mask, global);
    else if (cmd == c_seg) text = cmd_eval_seg(seg, global);
    else if (cmd == c_det) text = cmd_eval_det(det, global);
    else if (cmd == c_seq) text = cmd_build_seq(seq, global);
    else if (cmd == c_aug) text = cmd_augment(aug, global);
    else if (cmd == c_split) text = cmd_split(split, global);
    else if (cmd == c_tss) text = cmd_eval_tss(tss, global);
    else if (cmd == c_fit) text = cmd_baseline_fit(bfit, global);
    else if (cmd == c_pred) text = cmd_baseline_predict(bpred, global);
    else if (cmd == c_dist) text = cmd_report_dist(dist, global);
    else if (cmd == c_run) text = cmd_run_all(run, global);
    out << text;
    out.flush();
    return 0;
  } catch (const StageError& e) {
    report_error(err, std::string(error_kind_name(e.kind())), stage + "/" + e.stage(), e.what());
  } catch (const Error& e) {
    report_error(err, std::string(error_kind_name(e.kind())), stage, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, "io", stage, e.what());
  } catch (const std::exception& e) {
    report_error(err, "internal", stage, e.what());
  }
  return 1;
}

}  // namespace artss::app
