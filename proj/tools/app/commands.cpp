#include "commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "artss/image_io.hpp"
#include "artss/rng.hpp"
#include "artss/seqbuild.hpp"
#include "artss/splits.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "svg.hpp"

namespace artss::app {
namespace {

using json = nlohmann::json;

constexpr const char* kIncompleteMarker = "_INCOMPLETE";

// Creates the directory and marks it incomplete until commit().
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    if (dir_.empty()) fail(ErrorKind::kValidation, "output directory is empty");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::kIo, "cannot create directory " + dir_.string() + ": " + ec.message());
    write_file_atomic(dir_ / kIncompleteMarker, "incomplete: a stage failed or is still running\n");
  }
  fs::path operator/(const std::string& name) const { return dir_ / name; }
  const fs::path& path() const { return dir_; }
  void commit() {
    std::error_code ec;
    fs::remove(dir_ / kIncompleteMarker, ec);
  }

 private:
  fs::path dir_;
};

template <class F>
auto in_stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<fs::path> list_files(const fs::path& dir, std::initializer_list<std::string_view> exts) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::kIo, "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower(entry.path().extension().string());
    if (std::find(exts.begin(), exts.end(), ext) != exts.end()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  return list_files(dir, {".png", ".jpg", ".jpeg"});
}

std::map<std::string, fs::path> by_stem(const std::vector<fs::path>& files) {
  std::map<std::string, fs::path> out;
  for (const auto& f : files) {
    if (!out.emplace(f.stem().string(), f).second) {
      fail(ErrorKind::kValidation, "two files share the stem '" + f.stem().string() + "'");
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& items, std::size_t limit = 20) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i == limit) {
      out += ", ... (" + std::to_string(items.size()) + " total)";
      break;
    }
    out += (i ? ", " : "") + items[i];
  }
  return out;
}

template <class A, class B>
void require_same_keys(const std::map<std::string, A>& a, const std::map<std::string, B>& b,
                       const char* a_name, const char* b_name) {
  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
  for (const auto& [k, v] : a) if (!b.contains(k)) only_a.push_back(k);
  for (const auto& [k, v] : b) if (!a.contains(k)) only_b.push_back(k);
  if (only_a.empty() && only_b.empty()) return;
  std::string msg = "unpaired files:";
  if (!only_a.empty()) msg += std::string(" only in ") + a_name + ": " + join(only_a) + ";";
  if (!only_b.empty()) msg += std::string(" only in ") + b_name + ": " + join(only_b) + ";";
  fail(ErrorKind::kPairing, msg);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

ImageRecord to_record(const std::string& id, const CanonicalImage& img) {
  ImageRecord rec;
  rec.id = id;
  rec.width = img.width;
  rec.height = img.height;
  rec.pixels.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    rec.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
  }
  return rec;
}

json num(double v) { return json(round6(v)); }

// preprocess

struct Preprocessed {
  std::string id;
  CanonicalImage image;
  std::string source;
  double current = 90.0;
};

Preprocessed preprocess_entry(const ManifestEntry& e, const fs::path& base, int w, int h,
                              Interpolation interp) {
  ImageRecord rec = read_gray_image(resolve(base, e.path));
  rec.id = e.id;
  const CanonicalImage resized = resize(rec, w, h, interp);
  Preprocessed out;
  out.id = e.id;
  if (e.orientation_deg) {
    out.current = *e.orientation_deg;
    out.source = "manifest";
  } else {
    try {
      out.current = estimate_orientation(resized);
      out.source = "moments";
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::kEstimation) throw;
      out.current = 90.0;
      out.source = "fallback";
    }
  }
  out.image = reorient(resized, out.current, interp);
  return out;
}

std::vector<Preprocessed> preprocess_all(const std::vector<ManifestEntry>& entries,
                                         const fs::path& base, int w, int h,
                                         Interpolation interp, int jobs) {
  std::vector<Preprocessed> out(entries.size());
  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = preprocess_entry(entries[i], base, w, h, interp);
    } catch (const Error& e) {
      throw Error(e.kind(), "image '" + entries[i].id + "': " + e.what());
    }
  });
  return out;
}

std::string orientation_log(const std::vector<Preprocessed>& images) {
  std::string out = "id,source,current_deg,applied_deg\n";
  for (const auto& p : images) {
    out += p.id + "," + p.source + "," + format_fixed(p.current) + "," +
           format_fixed(p.image.orientation_applied) + "\n";
  }
  return out;
}

// mask

json params_json(const MaskParams& p) {
  json j;
  j["sigma"] = p.sigma ? num(*p.sigma) : json(nullptr);
  j["wavelet_levels"] = p.wavelet_levels;
  j["disk_radius"] = p.disk_radius;
  j["min_separability"] = num(p.min_separability);
  return j;
}

json provenance_json(const MaskProvenance& p, const BinaryMask& mask) {
  json j;
  j["sigma"] = num(p.sigma);
  j["otsu_threshold"] = num(p.otsu_threshold);
  j["separability"] = num(p.separability);
  j["foreground_fraction"] =
      num(static_cast<double>(mask.count()) / static_cast<double>(mask.pixels.size()));
  return j;
}

struct MaskRun {
  std::vector<BinaryMask> masks;
  std::vector<MaskProvenance> provenance;
};

MaskRun mask_all(const std::vector<ImageRecord>& records, const MaskParams& params, int jobs) {
  MaskRun run;
  run.masks.resize(records.size());
  run.provenance.resize(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    try {
      run.masks[i] = generate_mask(records[i], params, &run.provenance[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "image '" + records[i].id + "': " + e.what());
    }
  });
  return run;
}

std::string mask_sidecar(const MaskParams& params, const MaskProvenance& p, const BinaryMask& mask) {
  json j = provenance_json(p, mask);
  j["params"] = params_json(params);
  j["wavelet_levels"] = p.wavelet_levels;
  j["disk_radius"] = p.disk_radius;
  return j.dump(2) + "\n";
}

void write_masks(const fs::path& dir, const std::vector<std::string>& ids, const MaskRun& run,
                 const MaskParams& params, int jobs) {
  parallel_for(ids.size(), jobs, [&](std::size_t i) {
    write_mask_png(dir / (ids[i] + ".png"), run.masks[i]);
    write_file_atomic(dir / (ids[i] + ".mask.json"), mask_sidecar(params, run.provenance[i], run.masks[i]));
  });
}

std::string provenance_document(const std::vector<std::string>& ids, const MaskRun& run,
                                const MaskParams& params) {
  json doc;
  doc["params"] = params_json(params);
  json images = json::object();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    images[ids[i]] = provenance_json(run.provenance[i], run.masks[i]);
  }
  doc["images"] = std::move(images);
  return doc.dump(2) + "\n";
}

// detections

std::vector<JointDetection> parse_detection_file(const fs::path& path) {
  try {
    return parse_annotation_file(path, AnnotationKind::kGroundTruth);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kParse) throw;
    return parse_annotation_file(path, AnnotationKind::kPrediction);
  }
}

std::map<std::string, std::vector<JointDetection>> load_detection_dir(const fs::path& dir,
                                                                      std::optional<AnnotationKind> kind) {
  std::map<std::string, std::vector<JointDetection>> out;
  for (const auto& f : list_files(dir, {".txt"})) {
    out[f.stem().string()] = kind ? parse_annotation_file(f, *kind) : parse_detection_file(f);
  }
  return out;
}

std::string pr_curve_csv(const EvalReport& r) {
  std::string out = "class,point,recall,precision\n";
  for (const auto& c : r.per_class) {
    for (std::size_t i = 0; i < c.pr_curve.size(); ++i) {
      out += std::string(joint_class_name(c.joint)) + "," + std::to_string(i) + "," +
             format_fixed(c.pr_curve[i].recall) + "," + format_fixed(c.pr_curve[i].precision) + "\n";
    }
  }
  return out;
}

std::string pr_curve_svg(const EvalReport& r) {
  Panel p;
  p.title = "Precision-recall by joint class";
  p.x_label = "recall";
  p.y_label = "precision";
  p.y_max = 1.05;
  for (const auto& c : r.per_class) {
    if (c.pr_curve.empty()) continue;
    Series s;
    s.label = std::string(joint_class_name(c.joint)) +
              (c.ap ? " AP " + format_fixed(*c.ap, 3) : std::string(" AP NA"));
    s.x.push_back(0.0);
    s.y.push_back(c.pr_curve.front().precision);
    for (const auto& pt : c.pr_curve) {
      s.x.push_back(pt.recall);
      s.y.push_back(pt.precision);
    }
    p.lines.push_back(std::move(s));
  }
  return render_svg({p});
}

// sequences and baseline

std::vector<JointSequence> read_sequences(const fs::path& path) {
  return deserialize_sequences(read_text_file(path));
}

std::vector<JointSequence> select_sequences(std::vector<JointSequence> seqs, const SplitSelection& sel) {
  if (sel.split.empty()) {
    if (sel.subset != "all") fail(ErrorKind::kValidation, "--subset needs --split");
    return seqs;
  }
  const DatasetSplit split = parse_split_json(read_text_file(sel.split));
  std::vector<std::string> ids;
  if (sel.subset == "train") ids = split.train_ids;
  else if (sel.subset == "val") ids = split.val_ids;
  else if (sel.subset == "test") ids = split.test_ids;
  else if (sel.subset == "all") {
    ids = split.train_ids;
    ids.insert(ids.end(), split.val_ids.begin(), split.val_ids.end());
    ids.insert(ids.end(), split.test_ids.begin(), split.test_ids.end());
  } else {
    fail(ErrorKind::kValidation, "unknown subset '" + sel.subset + "'");
  }
  std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<JointSequence> out;
  for (auto& s : seqs) {
    if (wanted.erase(s.image_id)) out.push_back(std::move(s));
  }
  if (!wanted.empty()) {
    fail(ErrorKind::kPairing, "split ids without a sequence: " +
                                  join(std::vector<std::string>(wanted.begin(), wanted.end())));
  }
  return out;
}

std::vector<std::vector<double>> featurize_all(const std::vector<JointSequence>& seqs, int jobs) {
  std::vector<std::vector<double>> out(seqs.size());
  parallel_for(seqs.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = featurize(seqs[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "sequence '" + seqs[i].image_id + "': " + e.what());
    }
  });
  return out;
}

std::vector<double> targets_for(const std::vector<JointSequence>& seqs,
                                const std::map<std::string, double>& scores) {
  std::vector<double> y;
  std::vector<std::string> missing;
  for (const auto& s : seqs) {
    const auto it = scores.find(s.image_id);
    if (it == scores.end()) missing.push_back(s.image_id);
    else y.push_back(it->second);
  }
  if (!missing.empty()) fail(ErrorKind::kPairing, "sequences without a score: " + join(missing));
  return y;
}

std::vector<SharpScore> predict_all(const BaselineModel& model, const std::vector<JointSequence>& seqs,
                                    int jobs) {
  const auto features = featurize_all(seqs, jobs);
  std::vector<SharpScore> out(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    out[i].image_id = seqs[i].image_id;
    out[i].tss = predict(model, features[i]);
  }
  return out;
}

FoldMetrics metrics_of(const PairedScores& paired, double delta) {
  const RegressionBlock b = regression_metrics(paired, delta);
  return {b.mae, b.rmse, b.huber};
}

std::string regression_json(const RegressionBlock& b) {
  json j;
  j["n"] = b.n;
  j["mae"] = num(b.mae);
  j["rmse"] = num(b.rmse);
  j["huber"] = num(b.huber);
  j["huber_delta"] = num(b.huber_delta);
  return j.dump(2) + "\n";
}

std::vector<SharpScore> filter_scores(const std::vector<SharpScore>& scores, const std::set<std::string>& ids) {
  std::vector<SharpScore> out;
  for (const auto& s : scores) {
    if (ids.contains(s.image_id)) out.push_back(s);
  }
  return out;
}

// distributions

Panel histogram_panel(const std::string& title, const std::string& x_label,
                      const std::vector<double>& values, int bins) {
  Panel p;
  p.title = title;
  p.x_label = x_label;
  p.y_label = "count";
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  p.bars.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) p.bars.edges[static_cast<std::size_t>(b)] = lo + width * b;
  p.bars.heights.assign(static_cast<std::size_t>(bins), 0.0);
  for (double v : values) {
    const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
    p.bars.heights[static_cast<std::size_t>(b)] += 1.0;
  }
  Series density;
  density.label = "density";
  constexpr int kPoints = 200;
  for (int i = 0; i < kPoints; ++i) density.x.push_back(lo + (hi - lo) * i / (kPoints - 1));
  const auto kde = kernel_density(values, density.x);
  const double scale = static_cast<double>(values.size()) * width;
  for (double d : kde) density.y.push_back(d * scale);
  p.lines.push_back(std::move(density));
  p.x_min = lo;
  p.x_max = hi;
  double top = *std::max_element(p.bars.heights.begin(), p.bars.heights.end());
  top = std::max(top, *std::max_element(p.lines[0].y.begin(), p.lines[0].y.end()));
  p.y_max = top * 1.1;
  return p;
}

}  // namespace

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  int w = 0;
  int h = 0;
  char tail = 0;
  if (x == std::string::npos ||
      std::sscanf(text.c_str(), "%d%*[xX]%d%c", &w, &h, &tail) != 2) {
    fail(ErrorKind::kValidation, "size must look like WxH, got '" + text + "'");
  }
  if (w < kMinImageSide || h < kMinImageSide) {
    fail(ErrorKind::kValidation, "target size " + text + " is below " +
                                     std::to_string(kMinImageSide) + " pixels");
  }
  return {w, h};
}

std::vector<double> kernel_density(const std::vector<double>& samples, const std::vector<double>& at) {
  std::vector<double> out(at.size(), 0.0);
  if (samples.empty()) return out;
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  const double sd = samples.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < sorted.size() ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac : sorted[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  double h = 0.9 * spread * std::pow(n, -0.2);
  if (!(h > 0.0)) h = 1.0;
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * M_PI));
  for (std::size_t i = 0; i < at.size(); ++i) {
    double acc = 0.0;
    for (double v : samples) {
      const double z = (at[i] - v) / h;
      acc += std::exp(-0.5 * z * z);
    }
    out[i] = acc * norm;
  }
  return out;
}

Output cmd_preprocess(const PreprocessOptions& o, const Global& g) {
  const auto entries = parse_manifest_file(o.manifest);
  OutputDir out(o.out);
  const auto images = preprocess_all(entries, o.manifest.parent_path(), o.target_w, o.target_h,
                                     o.interpolation, g.jobs);
  parallel_for(images.size(), g.jobs, [&](std::size_t i) {
    write_png(out / (images[i].id + ".png"), images[i].image);
  });
  write_file_atomic(out / "orientation.csv", orientation_log(images));
  out.commit();
  return {};
}

Output cmd_mask(const MaskOptions& o, const Global& g) {
  const auto files = list_images(o.in);
  std::vector<ImageRecord> records(files.size());
  std::vector<std::string> ids(files.size());
  parallel_for(files.size(), g.jobs, [&](std::size_t i) {
    records[i] = read_gray_image(files[i]);
    ids[i] = records[i].id;
  });
  OutputDir out(o.out);
  const MaskRun run = mask_all(records, o.params, g.jobs);
  write_masks(out.path(), ids, run, o.params, g.jobs);
  write_file_atomic(out / "provenance.json", provenance_document(ids, run, o.params));
  out.commit();
  return {};
}

Output cmd_eval_seg(const EvalSegOptions& o, const Global& g) {
  const auto pred = by_stem(list_files(o.pred, {".png"}));
  const auto gt = by_stem(list_files(o.gt, {".png"}));
  require_same_keys(pred, gt, "pred", "gt");
  if (gt.empty()) fail(ErrorKind::kPairing, "no masks to compare");
  std::vector<std::pair<std::string, fs::path>> items(gt.begin(), gt.end());
  std::vector<double> ious(items.size());
  parallel_for(items.size(), g.jobs, [&](std::size_t i) {
    const BinaryMask a = read_mask(pred.at(items[i].first));
    const BinaryMask b = read_mask(items[i].second);
    try {
      ious[i] = iou(a, b);
    } catch (const Error& e) {
      throw Error(e.kind(), "mask '" + items[i].first + "': " + e.what());
    }
  });
  json doc;
  json per_image = json::object();
  double sum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    per_image[items[i].first] = num(ious[i]);
    sum += ious[i];
  }
  doc["n"] = items.size();
  doc["mean_iou"] = num(sum / static_cast<double>(items.size()));
  doc["per_image"] = std::move(per_image);
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) return text;
  write_file_atomic(o.out, text);
  return {};
}

Output cmd_eval_det(const EvalDetOptions& o, const Global&) {
  const auto gt = load_detection_dir(o.gt, AnnotationKind::kGroundTruth);
  const auto pred = load_detection_dir(o.pred, AnnotationKind::kPrediction);
  std::vector<std::string> orphan;
  for (const auto& [stem, v] : pred) if (!gt.contains(stem)) orphan.push_back(stem);
  if (!orphan.empty()) {
    fail(ErrorKind::kPairing, "prediction files without ground truth: " + join(orphan));
  }
  std::vector<JointDetection> all_gt;
  std::vector<JointDetection> all_pred;
  for (const auto& [stem, v] : gt) all_gt.insert(all_gt.end(), v.begin(), v.end());
  for (const auto& [stem, v] : pred) all_pred.insert(all_pred.end(), v.begin(), v.end());
  const EvalReport report = evaluate_detections(all_pred, all_gt, o.eval);
  if (o.out.empty()) return format_report(report, ReportFormat::kJson);
  OutputDir out(o.out);
  write_report(report, out / "report.json", ReportFormat::kJson);
  write_report(report, out / "report.csv", ReportFormat::kCsv);
  write_file_atomic(out / "pr_curves.csv", pr_curve_csv(report));
  write_file_atomic(out / "pr_curves.svg", pr_curve_svg(report));
  out.commit();
  return {};
}

Output cmd_build_seq(const BuildSeqOptions& o, const Global& g) {
  const auto detections = load_detection_dir(o.det, std::nullopt);
  const auto images = by_stem(list_images(o.img));
  std::vector<std::string> missing;
  for (const auto& [stem, v] : detections) if (!images.contains(stem)) missing.push_back(stem);
  if (!missing.empty()) fail(ErrorKind::kPairing, "detections without an image: " + join(missing));

  std::vector<std::string> stems;
  for (const auto& [stem, v] : detections) stems.push_back(stem);
  std::vector<CanonicalImage> loaded(stems.size());
  parallel_for(stems.size(), g.jobs, [&](std::size_t i) {
    loaded[i] = to_canonical(read_gray_image(images.at(stems[i])));
  });
  std::map<std::string, CanonicalImage> frames;
  for (std::size_t i = 0; i < stems.size(); ++i) frames.emplace(stems[i], std::move(loaded[i]));

  std::map<std::string, std::vector<JointDetection>> patients;
  for (const auto& [stem, v] : detections) {
    auto& list = patients[patient_from_stem(stem)];
    list.insert(list.end(), v.begin(), v.end());
  }
  if (patients.empty()) fail(ErrorKind::kProtocol, "no detection files in " + o.det.string());
  std::vector<std::string> ids;
  std::vector<std::vector<JointDetection>> lists;
  for (auto& [id, v] : patients) {
    ids.push_back(id);
    lists.push_back(std::move(v));
  }
  const int length = o.max_length ? *o.max_length : positional_sequence_length(lists);
  std::vector<JointSequence> seqs(ids.size());
  parallel_for(ids.size(), g.jobs, [&](std::size_t i) {
    try {
      seqs[i] = build_sequence(frames, ids[i], lists[i], length, o.crop_size);
    } catch (const Error& e) {
      throw Error(e.kind(), "patient '" + ids[i] + "': " + e.what());
    }
  });
  write_file_atomic(o.out, serialize_sequences(seqs));
  return {};
}

Output cmd_augment(const AugmentOptions& o, const Global& g) {
  if (o.count < 1) fail(ErrorKind::kValidation, "--count must be >= 1");
  const AugmentConfig cfg = o.config.empty() ? AugmentConfig{} : parse_augment_config(read_text_file(o.config));
  validate(cfg);
  const auto files = list_images(o.in);
  OutputDir out(o.out);
  const std::size_t copies = static_cast<std::size_t>(o.count);
  const std::size_t total = files.size() * copies;
  std::vector<std::string> log_rows(total);
  parallel_for(total, g.jobs, [&](std::size_t k) {
    const fs::path& file = files[k / copies];
    const int copy = static_cast<int>(k % copies);
    const ImageRecord rec = read_gray_image(file);
    const fs::path label = (o.labels.empty() ? file.parent_path() : o.labels) / (rec.id + ".txt");
    std::vector<JointDetection> boxes;
    if (fs::exists(label)) boxes = parse_annotation_file(label, AnnotationKind::kGroundTruth);
    const std::uint64_t seed = derive_seed(g.seed, rec.id, static_cast<std::uint64_t>(copy));
    const AugmentResult r = augment(to_canonical(rec), boxes, seed, cfg);

    const std::string patient = patient_from_stem(rec.id);
    std::string name = patient + "_aug" + std::to_string(copy);
    if (patient != rec.id) {
      const HandSide side = side_from_stem(rec.id);
      name += (r.params.flip ? flip_side(side) : side) == HandSide::kRight ? "_R" : "_L";
    }
    write_png(out / (name + ".png"), r.image);
    write_file_atomic(out / (name + ".txt"), format_annotations(r.boxes));
    log_rows[k] = name + "," + rec.id + "," + std::to_string(copy) + "," + std::to_string(seed) +
                  "," + format_fixed(r.params.rotation_deg) + "," + format_fixed(r.params.shift_x) +
                  "," + format_fixed(r.params.shift_y) + "," + (r.params.flip ? "1" : "0") + "," +
                  format_fixed(r.params.brightness) + "," + std::to_string(boxes.size()) + "," +
                  std::to_string(r.boxes.size()) + "\n";
  });
  std::string log =
      "id,source,copy,seed,rotation_deg,shift_x,shift_y,flip,brightness,boxes_in,boxes_out\n";
  for (const auto& row : log_rows) log += row;
  write_file_atomic(out / "augment_log.csv", log);
  out.commit();
  return {};
}

Output cmd_split(const SplitOptions& o, const Global& g) {
  const auto entries = parse_manifest_file(o.manifest);
  std::vector<std::string> ids;
  for (const auto& e : entries) ids.push_back(e.id);
  SplitProtocol protocol;
  if (o.protocol == "study" || (o.protocol == "auto" && ids.size() == study_protocol().expected_ids)) {
    protocol = study_protocol();
  } else if (o.protocol == "scaled" || o.protocol == "auto") {
    protocol = scaled_protocol(ids.size());
  } else {
    fail(ErrorKind::kValidation, "unknown protocol '" + o.protocol + "'");
  }
  const SplitSet set = make_splits(ids, g.seed, protocol);
  OutputDir out(o.out);
  std::string summary;
  json log;
  log["seed"] = g.seed;
  log["ids"] = ids.size();
  log["test_count"] = protocol.test_count;
  json folds = json::array();
  for (const auto& f : set.folds) {
    write_file_atomic(out / ("fold_" + std::to_string(*f.fold) + ".json"), format_split_json(f));
    folds.push_back({{"fold", *f.fold}, {"train", f.train_ids.size()}, {"val", f.val_ids.size()}});
    summary += "fold " + std::to_string(*f.fold) + ": train " + std::to_string(f.train_ids.size()) +
               " val " + std::to_string(f.val_ids.size()) + "\n";
  }
  write_file_atomic(out / "external_test.json", format_split_json(set.external_test));
  summary += "external test: " + std::to_string(set.external_test.test_ids.size()) + "\n";
  log["folds"] = std::move(folds);
  log["duplicated_val_ids"] = set.duplicated_val_ids;
  write_file_atomic(out / "split_log.json", log.dump(2) + "\n");
  out.commit();
  return summary;
}

Output cmd_eval_tss(const EvalTssOptions& o, const Global&) {
  const auto pred = parse_scores_file(o.pred);
  const auto gt = parse_scores_file(o.gt);
  if (o.folds.empty()) {
    const std::string text = regression_json(regression_metrics(pair_scores(pred, gt), o.huber_delta));
    if (o.out.empty()) return text;
    write_file_atomic(o.out, text);
    return {};
  }
  std::vector<DatasetSplit> splits;
  for (const auto& f : list_files(o.folds, {".json"})) {
    if (f.filename().string().rfind("fold_", 0) != 0) continue;
    splits.push_back(parse_split_json(read_text_file(f)));
  }
  std::sort(splits.begin(), splits.end(),
            [](const DatasetSplit& a, const DatasetSplit& b) { return a.fold < b.fold; });
  std::vector<FoldMetrics> metrics;
  for (const auto& s : splits) {
    const std::set<std::string> ids(s.val_ids.begin(), s.val_ids.end());
    const auto p = filter_scores(pred, ids);
    const auto t = filter_scores(gt, ids);
    std::vector<std::string> missing;
    std::set<std::string> have_p;
    std::set<std::string> have_t;
    for (const auto& x : p) have_p.insert(x.image_id);
    for (const auto& x : t) have_t.insert(x.image_id);
    for (const auto& id : ids) {
      if (!have_p.contains(id) || !have_t.contains(id)) missing.push_back(id);
    }
    if (!missing.empty()) {
      fail(ErrorKind::kPairing, "fold " + std::to_string(s.fold.value_or(0)) +
                                    " validation ids without paired scores: " + join(missing));
    }
    metrics.push_back(metrics_of(pair_scores(p, t), o.huber_delta));
  }
  const FoldTable table = fold_report(metrics, o.model);
  if (o.out.empty()) return format_fold_table_csv(table);
  OutputDir out(o.out);
  write_file_atomic(out / "tss_table.csv", format_fold_table_csv(table));
  write_file_atomic(out / "tss_table.json", format_fold_table_json(table));
  out.commit();
  return {};
}

Output cmd_baseline_fit(const BaselineFitOptions& o, const Global& g) {
  const auto seqs = select_sequences(read_sequences(o.seq), o.select);
  std::map<std::string, double> scores;
  for (const auto& s : parse_scores_file(o.scores)) scores[s.image_id] = s.tss;
  const auto y = targets_for(seqs, scores);
  const auto x = featurize_all(seqs, g.jobs);
  const BaselineModel model = fit(x, y, o.lambda);
  write_file_atomic(o.out, format_model_json(model));
  return {};
}

Output cmd_baseline_predict(const BaselinePredictOptions& o, const Global& g) {
  const BaselineModel model = parse_model_json(read_text_file(o.model));
  const auto seqs = select_sequences(read_sequences(o.seq), o.select);
  const std::string text = format_scores(predict_all(model, seqs, g.jobs));
  if (o.out.empty()) return text;
  write_file_atomic(o.out, text);
  return {};
}

Output cmd_report_dist(const ReportDistOptions& o, const Global&) {
  if (o.bins < 1) fail(ErrorKind::kValidation, "--bins must be >= 1");
  const auto entries = parse_manifest_file(o.manifest);
  std::vector<double> ages;
  std::vector<double> tss;
  for (const auto& e : entries) {
    if (e.age) ages.push_back(*e.age);
    if (const auto t = e.tss()) tss.push_back(*t);
  }
  std::vector<Panel> panels;
  if (!ages.empty()) panels.push_back(histogram_panel("Age distribution", "age (years)", ages, o.bins));
  if (!tss.empty()) panels.push_back(histogram_panel("TSS distribution", "total Sharp score", tss, o.bins));
  if (panels.empty()) fail(ErrorKind::kValidation, "manifest has neither ages nor reader scores");
  write_file_atomic(o.out, render_svg(panels));
  return {};
}

Output cmd_run_all(const RunAllOptions& o, const Global& g) {
  const auto entries = in_stage("manifest", [&] { return parse_manifest_file(o.manifest); });
  const fs::path base = o.manifest.parent_path();
  const fs::path labels = o.labels.empty() ? base / "labels" : o.labels;
  OutputDir out(o.out);

  // Canonical images and orientation log.
  const auto images = in_stage("preprocess", [&] {
    auto imgs = preprocess_all(entries, base, o.target_w, o.target_h, Interpolation::kBilinear, g.jobs);
    fs::create_directories(out / "preprocessed");
    parallel_for(imgs.size(), g.jobs, [&](std::size_t i) {
      write_png(out.path() / "preprocessed" / (imgs[i].id + ".png"), imgs[i].image);
    });
    write_file_atomic(out.path() / "preprocessed" / "orientation.csv", orientation_log(imgs));
    return imgs;
  });

  // Hand masks, applied to the canonical images.
  std::vector<std::string> ids;
  for (const auto& p : images) ids.push_back(p.id);
  std::map<std::string, CanonicalImage> frames;
  in_stage("mask", [&] {
    std::vector<ImageRecord> records(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) records[i] = to_record(ids[i], images[i].image);
    const MaskRun run = mask_all(records, o.mask, g.jobs);
    fs::create_directories(out / "masks");
    write_masks(out.path() / "masks", ids, run, o.mask, g.jobs);
    write_file_atomic(out.path() / "masks" / "provenance.json", provenance_document(ids, run, o.mask));
    for (std::size_t i = 0; i < images.size(); ++i) {
      CanonicalImage masked = images[i].image;
      for (std::size_t k = 0; k < masked.pixels.size(); ++k) {
        if (!run.masks[i].pixels[k]) masked.pixels[k] = 0.0;
      }
      frames.emplace(ids[i], std::move(masked));
    }
  });

  // Joint boxes follow the reorientation, then become per-patient sequences.
  std::vector<std::string> patients;
  std::vector<JointSequence> seqs;
  in_stage("build-seq", [&] {
    std::map<std::string, std::vector<JointDetection>> by_patient;
    std::vector<std::string> missing;
    for (const auto& p : images) {
      const fs::path file = labels / (p.id + ".txt");
      if (!fs::exists(file)) {
        missing.push_back(p.id);
        continue;
      }
      auto& list = by_patient[patient_from_stem(p.id)];
      for (auto d : parse_annotation_file(file, AnnotationKind::kGroundTruth)) {
        d.box = rotate_box(d.box, p.image.orientation_applied, p.image.width, p.image.height);
        list.push_back(d);
      }
    }
    if (!missing.empty()) fail(ErrorKind::kPairing, "images without a label file: " + join(missing));
    std::vector<std::vector<JointDetection>> lists;
    for (auto& [id, v] : by_patient) {
      patients.push_back(id);
      lists.push_back(std::move(v));
    }
    const int length = positional_sequence_length(lists);
    seqs.resize(patients.size());
    parallel_for(patients.size(), g.jobs, [&](std::size_t i) {
      try {
        seqs[i] = build_sequence(frames, patients[i], lists[i], length, o.crop_size);
      } catch (const Error& e) {
        throw Error(e.kind(), "patient '" + patients[i] + "': " + e.what());
      }
    });
    write_file_atomic(out / "sequences.bin", serialize_sequences(seqs));
  });

  std::map<std::string, double> scores;
  for (const auto& e : entries) {
    if (const auto t = e.tss()) scores.emplace(patient_from_stem(e.id), *t);
  }

  const SplitSet split = in_stage("split", [&] {
    const SplitProtocol protocol = patients.size() == study_protocol().expected_ids
                                       ? study_protocol()
                                       : scaled_protocol(patients.size());
    auto s = make_splits(patients, g.seed, protocol);
    fs::create_directories(out / "splits");
    for (const auto& f : s.folds) {
      write_file_atomic(out.path() / "splits" / ("fold_" + std::to_string(*f.fold) + ".json"),
                        format_split_json(f));
    }
    write_file_atomic(out.path() / "splits" / "external_test.json", format_split_json(s.external_test));
    return s;
  });

  const FoldTable table = in_stage("baseline", [&] {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < patients.size(); ++i) index[patients[i]] = i;
    const auto features = featurize_all(seqs, g.jobs);
    auto gather = [&](const std::vector<std::string>& wanted, std::vector<std::vector<double>>& x,
                      std::vector<double>& y) {
      std::vector<std::string> unscored;
      for (const auto& id : wanted) {
        const auto s = scores.find(id);
        if (s == scores.end()) {
          unscored.push_back(id);
          continue;
        }
        x.push_back(features[index.at(id)]);
        y.push_back(s->second);
      }
      if (!unscored.empty()) fail(ErrorKind::kPairing, "patients without reader scores: " + join(unscored));
    };
    fs::create_directories(out / "baseline");
    std::vector<FoldMetrics> metrics;
    std::vector<SharpScore> truth;
    for (const auto& id : split.external_test.test_ids) truth.push_back({id, std::nullopt, std::nullopt, scores.at(id)});
    for (const auto& f : split.folds) {
      std::vector<std::vector<double>> x;
      std::vector<double> y;
      gather(f.train_ids, x, y);
      const BaselineModel model = fit(x, y, o.lambda);
      const std::string k = std::to_string(*f.fold);
      write_file_atomic(out.path() / "baseline" / ("model_fold_" + k + ".json"), format_model_json(model));
      std::vector<SharpScore> preds;
      for (const auto& id : split.external_test.test_ids) {
        preds.push_back({id, std::nullopt, std::nullopt, predict(model, features[index.at(id)])});
      }
      write_file_atomic(out.path() / "baseline" / ("predictions_fold_" + k + ".csv"), format_scores(preds));
      metrics.push_back(metrics_of(pair_scores(preds, truth), o.huber_delta));
    }
    return fold_report(metrics, "baseline");
  });

  write_file_atomic(out / "tss_table.csv", format_fold_table_csv(table));
  write_file_atomic(out / "tss_table.json", format_fold_table_json(table));
  out.commit();
  return format_fold_table_csv(table);
}

}  // namespace artss::app
