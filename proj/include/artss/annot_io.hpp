#pragma once

// Text formats at the boundary with external models and datasets:
//
//   annotation   one box per line: `class cx cy w h`, normalized, class 0-10
//   prediction   `class cx cy w h confidence`
//   scores CSV   `id,reader_a,reader_b`, `id,tss` or `id,reader_a,reader_b,tss`
//   manifest CSV `id,path,age,gender,side,reader_a,reader_b[,orientation_deg]`
//   report       JSON (sorted keys) or CSV, numbers rounded to 6 decimals
//   split JSON   {"fold":1,"train":[...],"val":[...],"test":[...]}
//
// Parsers throw artss::Error (parse errors carry the line number, range
// violations the field name). Writers are atomic: temp file, then rename.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "artss/core_model.hpp"
#include "artss/report.hpp"
#include "artss/splits.hpp"

namespace artss {

enum class AnnotationKind { kGroundTruth, kPrediction };

// `<id>_L` / `<id>_R` name the left / right crop of a patient's radiograph.
HandSide side_from_stem(std::string_view stem);
std::string patient_from_stem(std::string_view stem);

std::vector<JointDetection> parse_annotations(std::string_view text,
                                              const std::string& image_id,
                                              AnnotationKind kind,
                                              HandSide side = HandSide::kLeft);
// Image id and side come from the file stem.
std::vector<JointDetection> parse_annotation_file(
    const std::filesystem::path& path, AnnotationKind kind);
// Writes confidence when present on the first detection (all or none).
std::string format_annotations(std::span<const JointDetection> detections);

std::vector<SharpScore> parse_scores(std::string_view text,
                                     double ceiling = kDefaultTssCeiling);
std::vector<SharpScore> parse_scores_file(const std::filesystem::path& path,
                                          double ceiling = kDefaultTssCeiling);
std::string format_scores(std::span<const SharpScore> scores);

struct ManifestEntry {
  std::string id;
  std::string path;
  std::optional<double> age;
  std::optional<Gender> gender;
  FrameSide side = FrameSide::kBoth;
  std::optional<int> reader_a;
  std::optional<int> reader_b;
  std::optional<double> orientation_deg;

  // Averaged readers, or nullopt when either is missing.
  std::optional<double> tss() const;
  bool operator==(const ManifestEntry&) const = default;
};

std::vector<ManifestEntry> parse_manifest(std::string_view text);
std::vector<ManifestEntry> parse_manifest_file(const std::filesystem::path& path);
std::string format_manifest(std::span<const ManifestEntry> entries);

enum class ReportFormat { kJson, kCsv };

std::string format_report(const EvalReport& report, ReportFormat format);
EvalReport parse_report_json(std::string_view text);
void write_report(const EvalReport& report, const std::filesystem::path& path,
                  ReportFormat format);
// Values as they appear after a JSON write (rounded to 6 decimals).
EvalReport quantize(const EvalReport& report);
double round6(double v);

std::string format_split_json(const DatasetSplit& split);
DatasetSplit parse_split_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// Fixed-point formatting used by all reports ("%.<decimals>f").
std::string format_fixed(double v, int decimals = 6);

}  // namespace artss
