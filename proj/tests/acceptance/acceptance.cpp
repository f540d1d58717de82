// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "app/cli.hpp"
#include "artss/annot_io.hpp"
#include "artss/augment.hpp"
#include "artss/baseline.hpp"
#include "artss/detect_eval.hpp"
#include "artss/error.hpp"
#include "artss/maskgen.hpp"
#include "artss/regress_eval.hpp"
#include "artss/rng.hpp"
#include "artss/seqbuild.hpp"
#include "oracles.hpp"
#include "phantom.hpp"

namespace fs = std::filesystem;
using namespace artss;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const std::string kFixture = ARTSS_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("artss_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "artss");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o;
  std::ostringstream e;
  const int code = app::run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_text_file(e.path());
  }
  return out;
}

// Corners on a 1/16 lattice inside the unit square.
BoundingBox lattice_box(Rng& rng) {
  const double x0 = static_cast<double>(rng.index(14)) / 16.0;
  const double y0 = static_cast<double>(rng.index(14)) / 16.0;
  const double w = static_cast<double>(1 + rng.index(std::min<std::uint64_t>(5, 16 - 16 * x0))) / 16.0;
  const double h = static_cast<double>(1 + rng.index(std::min<std::uint64_t>(5, 16 - 16 * y0))) / 16.0;
  return box_from_corners(x0, y0, x0 + w, y0 + h);
}

JointDetection detection(const std::string& img, BoundingBox b, std::optional<double> conf) {
  JointDetection d;
  d.image_id = img;
  d.box = b;
  d.confidence = conf;
  return d;
}

Outcome metric_oracle() {
  const auto t0 = Clock::now();
  Rng rng(20240101);
  const int cases = 1500;
  double worst = 0.0;
  int mismatches = 0;
  for (int c = 0; c < cases; ++c) {
    const std::size_t n_gt = rng.index(5);
    const std::size_t n_pred = rng.index(7);
    const int images = 1 + static_cast<int>(rng.index(2));
    std::vector<JointDetection> gts;
    for (std::size_t g = 0; g < n_gt; ++g) {
      gts.push_back(detection("im" + std::to_string(rng.index(images)), lattice_box(rng), std::nullopt));
    }
    std::vector<JointDetection> preds;
    for (std::size_t p = 0; p < n_pred; ++p) {
      auto d = detection("im" + std::to_string(rng.index(images)), lattice_box(rng),
                         static_cast<double>(rng.index(6)) / 5.0);
      if (!gts.empty() && rng.bernoulli(0.6)) {
        const auto& g = gts[rng.index(gts.size())];
        d.image_id = g.image_id;
        d.box = g.box;
        if (rng.bernoulli(0.5)) {
          d.box.cx = std::clamp(d.box.cx + (static_cast<double>(rng.index(3)) - 1.0) / 16.0, d.box.w / 2, 1 - d.box.w / 2);
        }
      }
      preds.push_back(d);
    }
    const auto ours = average_precision(preds, gts, 0.5);
    const auto oracle = testing::brute_force_ap(preds, gts, 0.5);
    if (ours.has_value() != oracle.has_value()) {
      ++mismatches;
      continue;
    }
    if (ours) {
      const double d = std::abs(*ours - *oracle);
      worst = std::max(worst, d);
      if (d > 1e-12) ++mismatches;
    }
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 10.0,
          std::to_string(cases) + " cases, " + std::to_string(mismatches) + " mismatches, max |diff| " +
              fmt(worst) + ", " + fmt(t) + " s (limit 10 s)"};
}

Outcome iou_properties() {
  Rng rng(77);
  int bad_sym = 0, bad_id = 0, bad_disjoint = 0, bad_raster = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = lattice_box(rng);
    const auto b = lattice_box(rng);
    if (iou(a, b) != iou(b, a)) ++bad_sym;
    if (iou(a, a) != 1.0) ++bad_id;
    BoundingBox far = b;
    far.cx = a.x1() + 0.5 * far.w + static_cast<double>(rng.index(3)) / 16.0;
    if (far.x1() <= 1.0 && iou(a, far) != 0.0) ++bad_disjoint;
    const double d = std::abs(iou(a, b) - testing::raster_box_iou(a, b, 64));
    worst = std::max(worst, d);
    if (d > 1e-9) ++bad_raster;
  }
  return {bad_sym + bad_id + bad_disjoint + bad_raster == 0,
          "1000 pairs: symmetry " + std::to_string(bad_sym) + ", identity " + std::to_string(bad_id) +
              ", disjoint " + std::to_string(bad_disjoint) + ", raster " + std::to_string(bad_raster) +
              " failures, max raster |diff| " + fmt(worst)};
}

Outcome huber_checks() {
  std::vector<std::string> problems;
  const std::pair<double, double> branch[] = {{0.5, 0.125}, {1.0, 0.5}, {2.0, 1.5}};
  for (const auto& [r, want] : branch) {
    if (huber_loss(r, 1.0) != want) problems.push_back("L(" + fmt(r) + ") = " + fmt(huber_loss(r, 1.0)));
  }
  for (double delta : {0.25, 1.0, 7.5}) {
    const double knee = 0.5 * delta * delta;
    const double lo = huber_loss(delta * (1 - 1e-12), delta);
    const double hi = huber_loss(delta * (1 + 1e-12), delta);
    if (std::abs(lo - knee) > 1e-9 * knee || std::abs(hi - knee) > 1e-9 * knee) {
      problems.push_back("knee discontinuity at delta " + fmt(delta));
    }
  }
  Rng rng(5);
  double worst_grad = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double delta = rng.uniform(0.1, 5.0);
    const double y = rng.uniform(0, 288);
    const double f = y + rng.uniform(-10, 10);
    const double h = 1e-6;
    const double fd = (huber_loss(f + h - y, delta) - huber_loss(f - h - y, delta)) / (2 * h);
    worst_grad = std::max(worst_grad, std::abs(fd - huber_gradient(f, y, delta)));
  }
  if (worst_grad > 1e-6) problems.push_back("gradient error " + fmt(worst_grad));
  std::vector<double> p(200), t(200);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = rng.uniform(0, 100);
    t[i] = rng.uniform(0, 100);
  }
  const double half_mse = 0.5 * std::pow(rmse(p, t), 2);
  const double rel = std::abs(huber(p, t, 1e9) - half_mse) / half_mse;
  if (rel > 1e-6) problems.push_back("large-delta limit off by " + fmt(rel));
  std::string detail = "branches 0.125/0.5/1.5, knee continuity, max gradient error " + fmt(worst_grad) +
                       ", half-MSE limit relative error " + fmt(rel);
  for (const auto& s : problems) detail += "; " + s;
  return {problems.empty(), detail};
}

Outcome table_arithmetic() {
  const std::vector<FoldMetrics> vit{{0.99, 0.89, 0.85}, {0.92, 0.94, 0.87}, {0.94, 0.98, 0.89}};
  const auto csv = format_fold_table_csv(fold_report(vit, "Vision Transformer"));
  const bool stable = csv == format_fold_table_csv(fold_report(vit, "Vision Transformer"));
  const bool mae = csv.find("Vision Transformer,MAE,0.99,0.92,0.94,0.95\n") != std::string::npos;
  const bool hub = csv.find("Vision Transformer,Huber Loss,0.85,0.87,0.89,0.87\n") != std::string::npos;
  return {stable && mae && hub, std::string("MAE average ") + (mae ? "0.95" : "wrong") + ", Huber average " +
                                    (hub ? "0.87" : "wrong") + ", CSV " + (stable ? "byte-stable" : "unstable")};
}

Outcome split_protocol() {
  const fs::path root = scratch("split");
  const std::string manifest = kFixture + "/manifest970.csv";
  std::string out;
  std::string err;
  bool ok = run({"split", "--manifest", manifest, "--out", (root / "a").string(), "--seed", "42", "-j", "1"}, &out, &err) == 0;
  ok = ok && run({"split", "--manifest", manifest, "--out", (root / "b").string(), "--seed", "42", "-j", "2"}) == 0;
  ok = ok && run({"split", "--manifest", manifest, "--out", (root / "c").string(), "--seed", "42", "-j", "1"}) == 0;
  if (!ok) return {false, "split command failed: " + err};
  bool sizes = true;
  for (int k = 1; k <= 3; ++k) {
    const auto s = parse_split_json(read_text_file(root / "a" / ("fold_" + std::to_string(k) + ".json")));
    sizes = sizes && s.train_ids.size() == 452 && s.val_ids.size() == 227 && s.test_ids.size() == 291;
  }
  const auto ext = parse_split_json(read_text_file(root / "a" / "external_test.json"));
  sizes = sizes && ext.test_ids.size() == 291;
  const auto ta = tree(root / "a");
  const bool same = ta == tree(root / "b") && ta == tree(root / "c");
  fs::remove_all(root);
  return {sizes && same, std::string("folds 452/227, test 291: ") + (sizes ? "yes" : "no") +
                             "; identical across runs and --jobs 1/2: " + (same ? "yes" : "no")};
}

Outcome padding_invariance() {
  Rng rng(606);
  int bad_pool = 0;
  int bad_mask = 0;
  for (int i = 0; i < 100; ++i) {
    const int size = 40 + static_cast<int>(rng.index(40));
    CanonicalImage img(size, size);
    for (auto& v : img.pixels) v = rng.uniform01();
    std::vector<JointDetection> dets;
    for (HandSide s : {HandSide::kLeft, HandSide::kRight}) {
      for (JointClass c : all_joint_classes()) {
        if (!rng.bernoulli(0.6)) continue;
        JointDetection d;
        d.image_id = "p";
        d.joint = c;
        d.side = s;
        d.box = {rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)};
        dets.push_back(d);
      }
    }
    if (dets.empty()) continue;
    const auto seq = build_sequence(img, dets, kJointSlotsPerPatient, 4 + static_cast<int>(rng.index(8)));
    if (seq.valid_count() != dets.size()) ++bad_mask;
    auto wide = extend_padding(seq, seq.slots() + 1 + rng.index(50));
    for (std::size_t k = 0; k < wide.slots(); ++k) {
      if (wide.validity_mask[k]) continue;
      for (std::size_t j = 0; j < wide.crop_size(); ++j) wide.crops[k * wide.crop_size() + j] = rng.uniform(-5, 5);
    }
    if (wide.valid_count() != dets.size()) ++bad_mask;
    for (PoolMode mode : {PoolMode::kMean, PoolMode::kMax}) {
      const auto a = masked_pool(seq, mode);
      const auto b = masked_pool(wide, mode);
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (std::abs(a[j] - b[j]) > 1e-12) {
          ++bad_pool;
          break;
        }
      }
    }
    const auto fa = featurize(seq);
    const auto fb = featurize(extend_padding(seq, seq.slots()));
    if (fa != fb) ++bad_pool;
  }
  return {bad_pool == 0 && bad_mask == 0,
          "100 sequences: pooled-output differences " + std::to_string(bad_pool) + ", mask-count mismatches " +
              std::to_string(bad_mask)};
}

BinaryMask random_blobs(Rng& rng) {
  const int w = 24 + static_cast<int>(rng.index(41));
  const int h = 24 + static_cast<int>(rng.index(41));
  BinaryMask m(w, h);
  const int blobs = 1 + static_cast<int>(rng.index(5));
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform(0, w);
    const double cy = rng.uniform(0, h);
    const double rx = rng.uniform(2, w / 3.0);
    const double ry = rng.uniform(2, h / 3.0);
    const bool rect = rng.bernoulli(0.4);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = (x - cx) / rx;
        const double dy = (y - cy) / ry;
        const bool in = rect ? (std::abs(dx) <= 1 && std::abs(dy) <= 1) : dx * dx + dy * dy <= 1;
        if (in) m.at(x, y) = 1;
      }
    }
  }
  const double flip = rng.uniform(0.0, 0.08);
  for (auto& p : m.pixels) {
    if (rng.bernoulli(flip)) p ^= 1;
  }
  return m;
}

Outcome mask_pipeline() {
  const auto t0 = Clock::now();
  Rng rng(2718);
  double worst_iou = 1.0;
  int low = 0;
  int bad_shape = 0;
  for (int i = 0; i < 20; ++i) {
    const auto spec = testing::random_phantom_spec(rng);
    const auto ph = testing::render_phantom(spec, "ph" + std::to_string(i));
    const auto mask = generate_mask(ph.image);
    const double v = iou(mask, ph.truth);
    worst_iou = std::min(worst_iou, v);
    if (v < 0.90) ++low;
    if (label_components(mask).count() != 1 || count_holes(mask) != 0) ++bad_shape;
  }
  int not_idempotent = 0;
  int rejected = 0;
  int bad_reject = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_blobs(rng);
    BinaryMask once;
    try {
      once = refine(m);
    } catch (const Error& e) {
      ++rejected;
      if (e.kind() != ErrorKind::kRefinement || open_by_reconstruction(m, kDefaultDiskRadius).count() != 0) ++bad_reject;
      continue;
    }
    if (refine(once) != once) ++not_idempotent;
    if (label_components(once).count() != 1 || count_holes(once) != 0) ++bad_shape;
  }
  const double t = seconds_since(t0);
  const bool pass = low == 0 && not_idempotent == 0 && bad_shape == 0 && bad_reject == 0 && t < 60.0;
  return {pass, "20 phantoms, min IoU " + fmt(worst_iou, 4) + " (" + std::to_string(low) + " below 0.90); " +
                    "1000 random masks: " + std::to_string(not_idempotent) + " not idempotent, " +
                    std::to_string(rejected) + " empty after opening (refinement error), " +
                    std::to_string(bad_shape) + " multi-component or holed outputs; " + fmt(t) + " s (limit 60 s)"};
}

Outcome augmentation_ranges() {
  Rng rng(4242);
  int out_of_range = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = sample_augment_params(rng);
    if (p.rotation_deg < -10.0 || p.rotation_deg > 10.0 || p.shift_x < -0.2 || p.shift_x > 0.2 ||
        p.shift_y < -0.2 || p.shift_y > 0.2 || p.brightness < 0.7 || p.brightness > 1.2) {
      ++out_of_range;
    }
  }
  double worst = 0.0;
  int bad_side = 0;
  const CanonicalImage img(64, 48, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const auto box = lattice_box(rng);
    BoundingBox b{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), 0.0, 0.0};
    b.w = rng.uniform(0.01, 2 * std::min(b.cx, 1 - b.cx));
    b.h = rng.uniform(0.01, 2 * std::min(b.cy, 1 - b.cy));
    AugmentParams p;
    p.flip = true;
    for (const auto& src : {box, b}) {
      JointDetection d;
      d.image_id = "x";
      d.box = src;
      d.side = rng.bernoulli(0.5) ? HandSide::kLeft : HandSide::kRight;
      const std::vector<JointDetection> in{d};
      const auto r = apply_augmentation(img, in, p);
      if (r.boxes.size() != 1 || r.boxes[0].side == d.side) {
        ++bad_side;
        continue;
      }
      worst = std::max(worst, std::abs(r.boxes[0].box.cx - (1.0 - src.cx)));
      if (r.boxes[0].box.w != src.w) worst = std::max(worst, std::abs(r.boxes[0].box.w - src.w));
    }
  }
  return {out_of_range == 0 && worst <= 1e-12 && bad_side == 0,
          "10000 draws, " + std::to_string(out_of_range) + " out of range; flip max |cx' - (1 - cx)| " + fmt(worst) +
              ", side not toggled " + std::to_string(bad_side)};
}

Outcome otsu_equivalence() {
  Rng rng(99);
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    Histogram h{};
    const double density = rng.uniform(0.02, 1.0);
    int populated = 0;
    for (auto& c : h) {
      if (rng.bernoulli(density)) c = rng.index(501);
      populated += c > 0;
    }
    while (populated < 2) {
      auto& c = h[rng.index(kHistogramBins)];
      if (c == 0) {
        c = 1 + rng.index(500);
        ++populated;
      }
    }
    if (otsu(h).threshold_bin != testing::exhaustive_otsu(h)) ++mismatches;
  }
  return {mismatches == 0, "100 random histograms, " + std::to_string(mismatches) + " threshold mismatches"};
}

Outcome end_to_end() {
  const fs::path root = scratch("run_all");
  const auto t0 = Clock::now();
  std::string out;
  std::string err;
  const int code = run({"run-all", "--manifest", kFixture + "/synthetic12/manifest.csv", "--out", root.string(),
                        "--seed", "1", "-j", "1"}, &out, &err);
  const double t = seconds_since(t0);
  const bool report = fs::exists(root / "tss_table.csv") && !fs::exists(root / "_INCOMPLETE") &&
                      out.find("Huber Loss") != std::string::npos;
  fs::remove_all(root);

  Rng rng(1001);
  std::vector<std::vector<double>> x;
  for (int i = 0; i < 500; ++i) {
    JointSequence s;
    s.image_id = "s" + std::to_string(i);
    s.crop_width = s.crop_height = 6;
    s.validity_mask.assign(6, 0);
    s.crops.assign(6 * 36, 0.0);
    for (std::size_t k = 0; k < 6; ++k) {
      if (k > 0 && !rng.bernoulli(0.7)) continue;
      s.validity_mask[k] = 1;
      for (std::size_t j = 0; j < 36; ++j) s.crops[k * 36 + j] = rng.uniform01();
    }
    x.push_back(featurize(s));
  }
  std::vector<double> w(x[0].size());
  for (auto& v : w) v = rng.uniform(-4, 4);
  std::vector<double> y;
  for (const auto& row : x) {
    double v = 144.0;
    for (std::size_t j = 0; j < row.size(); ++j) v += w[j] * row[j];
    y.push_back(v);
  }
  const std::vector<std::vector<double>> train(x.begin(), x.begin() + 400);
  const std::vector<double> ty(y.begin(), y.begin() + 400);
  const auto model = fit(train, ty, 1e-8);
  double err_sum = 0.0;
  for (std::size_t i = 400; i < x.size(); ++i) err_sum += std::abs(predict(model, x[i]) - y[i]);
  const double held_out = err_sum / 100.0;
  return {code == 0 && report && t < 120.0 && held_out < 0.1,
          "run-all exit " + std::to_string(code) + (report ? " with TSS table" : " without TSS table") + " in " +
              fmt(t) + " s (limit 120 s); baseline held-out MAE on linear set " + fmt(held_out) + " (limit 0.1)" +
              (code != 0 ? "; " + err : "")};
}

// Parser robustness

std::string mutate(const std::string& seed, Rng& rng) {
  std::string s = seed;
  const int edits = 1 + static_cast<int>(rng.index(6));
  static const std::string alphabet = "0123456789.,-+eE \n\t\"{}[]:_abcXYZnaif#=\r";
  for (int e = 0; e < edits; ++e) {
    const auto op = rng.index(6);
    const std::size_t pos = s.empty() ? 0 : rng.index(s.size() + 1);
    switch (op) {
      case 0:
        if (!s.empty() && pos < s.size()) s[pos] = static_cast<char>(rng.index(256));
        break;
      case 1:
        s.insert(pos, 1, alphabet[rng.index(alphabet.size())]);
        break;
      case 2:
        if (!s.empty() && pos < s.size()) s.erase(pos, 1 + rng.index(std::min<std::size_t>(8, s.size() - pos)));
        break;
      case 3:
        s.resize(pos);
        break;
      case 4: {
        if (s.empty()) break;
        const std::size_t a = rng.index(s.size());
        const std::size_t len = 1 + rng.index(std::min<std::size_t>(16, s.size() - a));
        s.insert(pos, s.substr(a, len));
        break;
      }
      default:
        if (!s.empty() && pos < s.size()) s[pos] = alphabet[rng.index(alphabet.size())];
    }
  }
  return s;
}

std::string random_bytes(Rng& rng) {
  std::string s(rng.index(200), '\0');
  for (auto& c : s) c = static_cast<char>(rng.index(256));
  return s;
}

struct FuzzStats {
  int accepted = 0;
  int rejected = 0;
  int foreign = 0;
  std::string example;
};

FuzzStats fuzz(const std::string& seed, const std::function<void(const std::string&)>& parse, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  FuzzStats st;
  for (int i = 0; i < 10000; ++i) {
    const std::string input = i % 10 == 0 ? random_bytes(rng) : mutate(seed, rng);
    try {
      parse(input);
      ++st.accepted;
    } catch (const Error&) {
      ++st.rejected;
    } catch (const std::exception& e) {
      ++st.foreign;
      if (st.example.empty()) st.example = e.what();
    }
  }
  return st;
}

EvalReport small_report() {
  std::vector<JointDetection> gt;
  std::vector<JointDetection> pred;
  gt.push_back(detection("a", {0.3, 0.3, 0.1, 0.1}, std::nullopt));
  pred.push_back(detection("a", {0.31, 0.3, 0.1, 0.1}, 0.8));
  pred.push_back(detection("a", {0.7, 0.7, 0.1, 0.1}, 0.4));
  auto r = evaluate_detections(pred, gt);
  r.regression = RegressionBlock{3, 1.5, 2.0, 1.0, 1.0};
  return r;
}

JointSequence random_sequence(Rng& rng) {
  JointSequence s;
  s.image_id = "p" + std::to_string(rng.index(1000));
  s.crop_width = 1 + static_cast<int>(rng.index(4));
  s.crop_height = 1 + static_cast<int>(rng.index(4));
  const std::size_t slots = rng.index(6);
  s.validity_mask.resize(slots);
  for (auto& m : s.validity_mask) m = static_cast<std::uint8_t>(rng.index(2));
  s.crops.resize(slots * s.crop_size());
  for (auto& v : s.crops) v = rng.uniform01();
  return s;
}

Outcome parser_robustness() {
  const auto t0 = Clock::now();
  std::vector<std::pair<std::string, FuzzStats>> results;

  results.emplace_back("annotations", fuzz("0 0.5 0.5 0.1 0.1\n10 0.5 0.9 0.2 0.1\n3 0.25 0.75 0.05 0.05\n",
                                           [](const std::string& s) { parse_annotations(s, "x", AnnotationKind::kGroundTruth); }, 1));
  results.emplace_back("predictions", fuzz("0 0.5 0.5 0.1 0.1 0.9\n10 0.5 0.9 0.2 0.1 0.25\n",
                                           [](const std::string& s) { parse_annotations(s, "x", AnnotationKind::kPrediction); }, 2));
  results.emplace_back("scores", fuzz("id,reader_a,reader_b\np1,30,34\np2,0,0\n\"p,3\",10,12\n",
                                      [](const std::string& s) { parse_scores(s); }, 3));
  results.emplace_back("manifest",
                       fuzz("id,path,age,gender,side,reader_a,reader_b,orientation_deg\n"
                            "p1,img/p1.png,54,female,left,30,34,88.5\np2,img/p2.png,,,both,,,\n",
                            [](const std::string& s) { parse_manifest(s); }, 4));
  results.emplace_back("report", fuzz(format_report(small_report(), ReportFormat::kJson),
                                      [](const std::string& s) { parse_report_json(s); }, 5));
  results.emplace_back("split", fuzz(format_split_json(DatasetSplit{1, {"a", "b"}, {"c"}, {"d"}}),
                                     [](const std::string& s) { parse_split_json(s); }, 6));
  BaselineModel model;
  model.lambda = 0.01;
  model.intercept = 3.5;
  model.weights = {0.5, -1.25, 2.0};
  results.emplace_back("model", fuzz(format_model_json(model), [](const std::string& s) { parse_model_json(s); }, 7));
  results.emplace_back("augment config", fuzz(format_augment_config(AugmentConfig{}),
                                              [](const std::string& s) { parse_augment_config(s); }, 8));
  Rng seq_rng(9);
  const std::vector<JointSequence> seqs{random_sequence(seq_rng), random_sequence(seq_rng)};
  results.emplace_back("sequences", fuzz(serialize_sequences(seqs),
                                         [](const std::string& s) { deserialize_sequences(s); }, 9));

  // Round trips of valid in-memory values.
  int round_trip_failures = 0;
  Rng rng(10);
  for (int i = 0; i < 300; ++i) {
    std::vector<JointDetection> dets(rng.index(10));
    for (auto& d : dets) {
      d.image_id = "x";
      d.joint = static_cast<JointClass>(rng.index(kJointClassCount));
      d.box = {rng.uniform01(), rng.uniform01(), rng.uniform01(), rng.uniform01()};
      d.confidence = rng.uniform01();
    }
    if (parse_annotations(format_annotations(dets), "x", AnnotationKind::kPrediction) != dets) ++round_trip_failures;

    std::vector<SharpScore> scores;
    for (int k = 0; k < 5; ++k) {
      const int a = static_cast<int>(rng.index(289));
      const int b = static_cast<int>(rng.index(289));
      scores.push_back({"p" + std::to_string(k), static_cast<double>(a), static_cast<double>(b), average_readers(a, b)});
    }
    if (parse_scores(format_scores(scores)) != scores) ++round_trip_failures;

    std::vector<ManifestEntry> m(1 + rng.index(4));
    for (std::size_t k = 0; k < m.size(); ++k) {
      m[k].id = "id" + std::to_string(k);
      m[k].path = "dir/img " + std::to_string(k) + ".png";
      if (rng.bernoulli(0.7)) m[k].age = rng.uniform(18, 90);
      if (rng.bernoulli(0.7)) m[k].gender = rng.bernoulli(0.5) ? Gender::kFemale : Gender::kMale;
      m[k].side = static_cast<FrameSide>(rng.index(3));
      if (rng.bernoulli(0.7)) {
        m[k].reader_a = static_cast<int>(rng.index(289));
        m[k].reader_b = static_cast<int>(rng.index(289));
      }
      if (rng.bernoulli(0.5)) m[k].orientation_deg = rng.uniform(0, 180);
    }
    if (parse_manifest(format_manifest(m)) != m) ++round_trip_failures;

    DatasetSplit sp;
    if (rng.bernoulli(0.75)) sp.fold = 1 + static_cast<int>(rng.index(3));
    for (std::size_t k = rng.index(5); k > 0; --k) sp.train_ids.push_back("t" + std::to_string(rng.index(100)));
    for (std::size_t k = rng.index(5); k > 0; --k) sp.val_ids.push_back("v" + std::to_string(rng.index(100)));
    for (std::size_t k = rng.index(5); k > 0; --k) sp.test_ids.push_back("e" + std::to_string(rng.index(100)));
    if (parse_split_json(format_split_json(sp)) != sp) ++round_trip_failures;

    BaselineModel bm;
    bm.lambda = rng.uniform(0, 10);
    bm.intercept = rng.uniform(-100, 100);
    bm.weights.resize(rng.index(20));
    for (auto& v : bm.weights) v = rng.normal();
    if (parse_model_json(format_model_json(bm)) != bm) ++round_trip_failures;

    AugmentConfig ac;
    ac.rotation_range = rng.uniform(0, 45);
    ac.width_shift_range = rng.uniform01();
    ac.height_shift_range = rng.uniform01();
    ac.horizontal_flip = rng.bernoulli(0.5);
    ac.flip_probability = rng.uniform01();
    ac.brightness_min = rng.uniform(0.1, 1.0);
    ac.brightness_max = ac.brightness_min + rng.uniform(0, 1);
    ac.min_visible_fraction = rng.uniform01();
    if (parse_augment_config(format_augment_config(ac)) != ac) ++round_trip_failures;

    std::vector<JointSequence> sq(rng.index(4));
    for (auto& s : sq) s = random_sequence(rng);
    if (deserialize_sequences(serialize_sequences(sq)) != sq) ++round_trip_failures;
  }
  const EvalReport rep = small_report();
  if (parse_report_json(format_report(rep, ReportFormat::kJson)) != quantize(rep)) ++round_trip_failures;

  int foreign = 0;
  std::string detail;
  for (const auto& [name, st] : results) {
    foreign += st.foreign;
    detail += name + " " + std::to_string(st.rejected) + "/" + std::to_string(st.accepted);
    if (st.foreign) detail += " (" + std::to_string(st.foreign) + " stray exceptions: " + st.example + ")";
    detail += ", ";
  }
  const double t = seconds_since(t0);
  return {foreign == 0 && round_trip_failures == 0,
          "10000 inputs per parser, rejected/accepted: " + detail + "round-trip failures " +
              std::to_string(round_trip_failures) + ", " + fmt(t) + " s"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {1, "AP matches brute-force enumeration", metric_oracle},
      {2, "IoU properties", iou_properties},
      {3, "Huber loss", huber_checks},
      {4, "fold table arithmetic", table_arithmetic},
      {5, "split protocol", split_protocol},
      {6, "padding invariance", padding_invariance},
      {7, "mask pipeline", mask_pipeline},
      {8, "augmentation ranges and flip", augmentation_ranges},
      {9, "Otsu equivalence", otsu_equivalence},
      {10, "end to end", end_to_end},
      {11, "parser robustness", parser_robustness},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("unexpected exception: ") + e.what()};
    }
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
