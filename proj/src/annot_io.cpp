#include "artss/annot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "artss/error.hpp"

namespace artss {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t b = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > b) out.emplace_back(line.substr(b, i - b));
  }
  return out;
}

// RFC-4180-ish: quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv(std::string_view line, int line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && trim(cur).empty()) {
      quoted = true;
      was_quoted = true;
      cur.clear();
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) fail(ErrorKind::kParse, "line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string line_prefix(int line_no) { return "line " + std::to_string(line_no) + ": "; }

double parse_real(std::string_view token, int line_no, const char* field) {
  double v = 0.0;
  const char* b = token.data();
  const char* e = token.data() + token.size();
  if (!token.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || token.empty()) {
    fail(ErrorKind::kParse, line_prefix(line_no) + "field '" + field +
                                "' is not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(v)) {
    fail(ErrorKind::kValidation, line_prefix(line_no) + "field '" + field + "' is not finite");
  }
  return v;
}

long long parse_integer(std::string_view token, int line_no, const char* field) {
  long long v = 0;
  const char* b = token.data();
  const char* e = token.data() + token.size();
  if (!token.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || token.empty()) {
    fail(ErrorKind::kParse, line_prefix(line_no) + "field '" + field +
                                "' is not an integer: '" + std::string(token) + "'");
  }
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void check_unit(double v, int line_no, const char* field, bool allow_zero) {
  const bool ok = v <= 1.0 && (allow_zero ? v >= 0.0 : v > 0.0);
  if (!ok) {
    fail(ErrorKind::kValidation, line_prefix(line_no) + "field '" + field +
                                     "' out of range: " + shortest(v));
  }
}

std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!idx.emplace(header[i], i).second) {
      fail(ErrorKind::kSchema, "duplicate column '" + header[i] + "'");
    }
  }
  return idx;
}

json number(double v) { return json(round6(v)); }

}  // namespace

HandSide side_from_stem(std::string_view stem) {
  if (stem.size() > 2 && stem.substr(stem.size() - 2) == "_R") return HandSide::kRight;
  return HandSide::kLeft;
}

std::string patient_from_stem(std::string_view stem) {
  if (stem.size() > 2 && (stem.substr(stem.size() - 2) == "_R" ||
                          stem.substr(stem.size() - 2) == "_L")) {
    return std::string(stem.substr(0, stem.size() - 2));
  }
  return std::string(stem);
}

std::vector<JointDetection> parse_annotations(std::string_view text,
                                              const std::string& image_id,
                                              AnnotationKind kind,
                                              HandSide side) {
  std::vector<JointDetection> out;
  const auto lines = split_lines(text);
  const std::size_t expected = kind == AnnotationKind::kPrediction ? 6 : 5;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    const auto tokens = split_ws(lines[li]);
    if (tokens.empty()) continue;
    if (tokens.size() != expected) {
      fail(ErrorKind::kParse, line_prefix(line_no) + "expected " +
                                  std::to_string(expected) + " fields, got " +
                                  std::to_string(tokens.size()));
    }
    const long long cls = parse_integer(tokens[0], line_no, "class");
    if (cls < 0 || cls >= kJointClassCount) {
      fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'class' out of range [0, 10]: " +
                                       tokens[0]);
    }
    JointDetection det;
    det.image_id = image_id;
    det.joint = static_cast<JointClass>(cls);
    det.side = side;
    det.box.cx = parse_real(tokens[1], line_no, "cx");
    det.box.cy = parse_real(tokens[2], line_no, "cy");
    det.box.w = parse_real(tokens[3], line_no, "w");
    det.box.h = parse_real(tokens[4], line_no, "h");
    check_unit(det.box.cx, line_no, "cx", true);
    check_unit(det.box.cy, line_no, "cy", true);
    check_unit(det.box.w, line_no, "w", false);
    check_unit(det.box.h, line_no, "h", false);
    if (kind == AnnotationKind::kPrediction) {
      const double conf = parse_real(tokens[5], line_no, "confidence");
      check_unit(conf, line_no, "confidence", true);
      det.confidence = conf;
    }
    out.push_back(std::move(det));
  }
  return out;
}

std::vector<JointDetection> parse_annotation_file(const std::filesystem::path& path,
                                                  AnnotationKind kind) {
  const std::string stem = path.stem().string();
  try {
    return parse_annotations(read_text_file(path), stem, kind, side_from_stem(stem));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string format_annotations(std::span<const JointDetection> detections) {
  std::string out;
  const bool with_conf = !detections.empty() && detections.front().confidence.has_value();
  for (const auto& d : detections) {
    out += std::to_string(joint_class_index(d.joint));
    for (double v : {d.box.cx, d.box.cy, d.box.w, d.box.h}) {
      out += ' ';
      out += shortest(v);
    }
    if (with_conf) {
      out += ' ';
      out += shortest(d.confidence.value_or(0.0));
    }
    out += '\n';
  }
  return out;
}

std::vector<SharpScore> parse_scores(std::string_view text, double ceiling) {
  const auto lines = split_lines(text);
  std::size_t li = 0;
  while (li < lines.size() && trim(lines[li]).empty()) ++li;
  if (li == lines.size()) fail(ErrorKind::kSchema, "score file has no header");
  const auto header = split_csv(lines[li], static_cast<int>(li) + 1);
  const auto idx = header_index(header);
  const bool has_readers = idx.contains("reader_a") && idx.contains("reader_b");
  const bool has_tss = idx.contains("tss");
  if (!idx.contains("id") || (!has_readers && !has_tss)) {
    fail(ErrorKind::kSchema,
         "score header must be 'id,reader_a,reader_b' or 'id,tss'");
  }

  std::vector<SharpScore> out;
  std::set<std::string> seen;
  for (++li; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty()) continue;
    const auto f = split_csv(lines[li], line_no);
    if (f.size() != header.size()) {
      fail(ErrorKind::kParse, line_prefix(line_no) + "expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(f.size()));
    }
    SharpScore s;
    s.image_id = f[idx.at("id")];
    if (s.image_id.empty()) fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'id' is empty");
    if (!seen.insert(s.image_id).second) {
      fail(ErrorKind::kValidation, line_prefix(line_no) + "duplicate id '" + s.image_id + "'");
    }
    auto reader = [&](const char* name) -> std::optional<int> {
      const std::string& tok = f[idx.at(name)];
      if (tok.empty()) return std::nullopt;
      const long long v = parse_integer(tok, line_no, name);
      if (v < 0 || static_cast<double>(v) > ceiling) {
        fail(ErrorKind::kValidation, line_prefix(line_no) + "field '" + name +
                                         "' out of range: " + tok);
      }
      return static_cast<int>(v);
    };
    std::optional<int> a;
    std::optional<int> b;
    if (has_readers) {
      a = reader("reader_a");
      b = reader("reader_b");
      if (a) s.reader_a = *a;
      if (b) s.reader_b = *b;
    }
    std::optional<double> tss;
    if (has_tss && !f[idx.at("tss")].empty()) tss = parse_real(f[idx.at("tss")], line_no, "tss");
    if (a && b) {
      const double avg = average_readers(*a, *b, ceiling);
      if (tss && *tss != avg) {
        fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'tss' disagrees with the reader mean");
      }
      s.tss = avg;
    } else if (tss) {
      s.tss = *tss;
    } else {
      fail(ErrorKind::kSchema, line_prefix(line_no) + "no tss and fewer than two reader scores");
    }
    if (!(s.tss >= 0.0 && s.tss <= ceiling)) {
      fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'tss' out of range: " + shortest(s.tss));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SharpScore> parse_scores_file(const std::filesystem::path& path, double ceiling) {
  try {
    return parse_scores(read_text_file(path), ceiling);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string format_scores(std::span<const SharpScore> scores) {
  const bool all_readers = !scores.empty() && std::all_of(scores.begin(), scores.end(), [](const SharpScore& s) {
    return s.reader_a && s.reader_b;
  });
  const bool any_readers = std::any_of(scores.begin(), scores.end(), [](const SharpScore& s) {
    return s.reader_a || s.reader_b;
  });
  std::string out;
  auto reader = [](const std::optional<double>& r) {
    return r ? std::to_string(static_cast<long long>(*r)) : std::string();
  };
  if (all_readers) {
    out = "id,reader_a,reader_b\n";
    for (const auto& s : scores) {
      out += csv_field(s.image_id) + "," + reader(s.reader_a) + "," + reader(s.reader_b) + "\n";
    }
  } else if (any_readers) {
    out = "id,reader_a,reader_b,tss\n";
    for (const auto& s : scores) {
      out += csv_field(s.image_id) + "," + reader(s.reader_a) + "," + reader(s.reader_b) + "," +
             shortest(s.tss) + "\n";
    }
  } else {
    out = "id,tss\n";
    for (const auto& s : scores) out += csv_field(s.image_id) + "," + shortest(s.tss) + "\n";
  }
  return out;
}

std::optional<double> ManifestEntry::tss() const {
  if (!reader_a || !reader_b) return std::nullopt;
  return average_readers(*reader_a, *reader_b);
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t li = 0;
  while (li < lines.size() && trim(lines[li]).empty()) ++li;
  if (li == lines.size()) fail(ErrorKind::kSchema, "manifest has no header");
  const auto header = split_csv(lines[li], static_cast<int>(li) + 1);
  const auto idx = header_index(header);
  for (const char* col : {"id", "path", "age", "gender", "side", "reader_a", "reader_b"}) {
    if (!idx.contains(col)) fail(ErrorKind::kSchema, std::string("manifest is missing column '") + col + "'");
  }
  const bool has_orientation = idx.contains("orientation_deg");

  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  for (++li; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty()) continue;
    const auto f = split_csv(lines[li], line_no);
    if (f.size() != header.size()) {
      fail(ErrorKind::kParse, line_prefix(line_no) + "expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(f.size()));
    }
    ManifestEntry e;
    e.id = f[idx.at("id")];
    if (e.id.empty()) fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'id' is empty");
    if (!seen.insert(e.id).second) {
      fail(ErrorKind::kValidation, line_prefix(line_no) + "duplicate id '" + e.id + "'");
    }
    e.path = f[idx.at("path")];
    if (const auto& a = f[idx.at("age")]; !a.empty()) {
      e.age = parse_real(a, line_no, "age");
      if (*e.age < 0.0) fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'age' is negative");
    }
    if (const auto& g = f[idx.at("gender")]; !g.empty()) {
      e.gender = gender_from_name(g);
      if (!e.gender) fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'gender' must be female or male");
    }
    if (const auto& s = f[idx.at("side")]; !s.empty()) {
      const auto side = frame_side_from_name(s);
      if (!side) fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'side' must be left, right or both");
      e.side = *side;
    }
    for (const char* col : {"reader_a", "reader_b"}) {
      const auto& tok = f[idx.at(col)];
      if (tok.empty()) continue;
      const long long v = parse_integer(tok, line_no, col);
      if (v < 0 || static_cast<double>(v) > kDefaultTssCeiling) {
        fail(ErrorKind::kValidation, line_prefix(line_no) + "field '" + col + "' out of range: " + tok);
      }
      (std::string_view(col) == "reader_a" ? e.reader_a : e.reader_b) = static_cast<int>(v);
    }
    if (has_orientation) {
      if (const auto& o = f[idx.at("orientation_deg")]; !o.empty()) {
        e.orientation_deg = parse_real(o, line_no, "orientation_deg");
        if (*e.orientation_deg < 0.0 || *e.orientation_deg >= 180.0) {
          fail(ErrorKind::kValidation, line_prefix(line_no) + "field 'orientation_deg' outside [0, 180)");
        }
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> parse_manifest_file(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_text_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string format_manifest(std::span<const ManifestEntry> entries) {
  const bool has_orientation = std::any_of(entries.begin(), entries.end(), [](const ManifestEntry& e) {
    return e.orientation_deg.has_value();
  });
  std::string out = "id,path,age,gender,side,reader_a,reader_b";
  if (has_orientation) out += ",orientation_deg";
  out += '\n';
  for (const auto& e : entries) {
    out += csv_field(e.id) + "," + csv_field(e.path) + ",";
    out += e.age ? shortest(*e.age) : "";
    out += ",";
    out += e.gender ? std::string(gender_name(*e.gender)) : "";
    out += "," + std::string(frame_side_name(e.side)) + ",";
    out += e.reader_a ? std::to_string(*e.reader_a) : "";
    out += ",";
    out += e.reader_b ? std::to_string(*e.reader_b) : "";
    if (has_orientation) {
      out += ",";
      out += e.orientation_deg ? shortest(*e.orientation_deg) : "";
    }
    out += '\n';
  }
  return out;
}

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s(buf);
  if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

EvalReport quantize(const EvalReport& report) {
  EvalReport q = report;
  q.iou_threshold = round6(q.iou_threshold);
  q.accuracy = round6(q.accuracy);
  if (q.map_score) q.map_score = round6(*q.map_score);
  for (auto& c : q.per_class) {
    if (c.ap) c.ap = round6(*c.ap);
    for (auto& p : c.pr_curve) {
      p.recall = round6(p.recall);
      p.precision = round6(p.precision);
    }
  }
  if (q.regression) {
    q.regression->mae = round6(q.regression->mae);
    q.regression->rmse = round6(q.regression->rmse);
    q.regression->huber = round6(q.regression->huber);
    q.regression->huber_delta = round6(q.regression->huber_delta);
  }
  return q;
}

std::string format_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    std::string out = "class,metric,value\n";
    for (const auto& c : report.per_class) {
      const std::string name(joint_class_name(c.joint));
      out += name + ",ap," + (c.ap ? format_fixed(*c.ap) : std::string("NA")) + "\n";
      out += name + ",n_pos," + std::to_string(c.n_pos) + "\n";
      out += name + ",tp," + std::to_string(c.tp) + "\n";
      out += name + ",fp," + std::to_string(c.fp) + "\n";
      out += name + ",fn," + std::to_string(c.fn) + "\n";
    }
    out += "ALL,map," + (report.map_score ? format_fixed(*report.map_score) : std::string("NA")) + "\n";
    out += "ALL,accuracy," + format_fixed(report.accuracy) + "\n";
    out += "ALL,iou_threshold," + format_fixed(report.iou_threshold) + "\n";
    out += std::string("ALL,interpolated_ap,") + (report.interpolated_ap ? "1" : "0") + "\n";
    if (report.regression) {
      const auto& r = *report.regression;
      out += "TSS,n," + std::to_string(r.n) + "\n";
      out += "TSS,mae," + format_fixed(r.mae) + "\n";
      out += "TSS,rmse," + format_fixed(r.rmse) + "\n";
      out += "TSS,huber," + format_fixed(r.huber) + "\n";
      out += "TSS,huber_delta," + format_fixed(r.huber_delta) + "\n";
    }
    return out;
  }

  json j;
  j["iou_threshold"] = number(report.iou_threshold);
  j["interpolated_ap"] = report.interpolated_ap;
  j["map"] = report.map_score ? number(*report.map_score) : json(nullptr);
  j["accuracy"] = number(report.accuracy);
  json classes = json::object();
  for (const auto& c : report.per_class) {
    json cj;
    cj["ap"] = c.ap ? number(*c.ap) : json(nullptr);
    cj["n_pos"] = c.n_pos;
    cj["tp"] = c.tp;
    cj["fp"] = c.fp;
    cj["fn"] = c.fn;
    json pr = json::array();
    for (const auto& p : c.pr_curve) pr.push_back(json::array({number(p.recall), number(p.precision)}));
    cj["pr_curve"] = std::move(pr);
    classes[std::string(joint_class_name(c.joint))] = std::move(cj);
  }
  j["classes"] = std::move(classes);
  json labels = json::array();
  for (JointClass c : all_joint_classes()) labels.push_back(std::string(joint_class_name(c)));
  labels.push_back("background");
  json conf = json::array();
  for (const auto& row : report.confusion) conf.push_back(json(row));
  j["confusion"] = {{"labels", labels}, {"matrix", conf}, {"axes", "predicted x ground_truth"}};
  if (report.regression) {
    const auto& r = *report.regression;
    j["regression"] = {{"n", r.n},
                       {"mae", number(r.mae)},
                       {"rmse", number(r.rmse)},
                       {"huber", number(r.huber)},
                       {"huber_delta", number(r.huber_delta)}};
  }
  return j.dump(2) + "\n";
}

EvalReport parse_report_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    EvalReport r;
    r.iou_threshold = j.at("iou_threshold").get<double>();
    r.interpolated_ap = j.at("interpolated_ap").get<bool>();
    if (!j.at("map").is_null()) r.map_score = j.at("map").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    const json& classes = j.at("classes");
    for (JointClass c : all_joint_classes()) {
      const std::string name(joint_class_name(c));
      if (!classes.contains(name)) continue;
      const json& cj = classes.at(name);
      ClassReport cr;
      cr.joint = c;
      if (!cj.at("ap").is_null()) cr.ap = cj.at("ap").get<double>();
      cr.n_pos = cj.at("n_pos").get<std::uint64_t>();
      cr.tp = cj.at("tp").get<std::uint64_t>();
      cr.fp = cj.at("fp").get<std::uint64_t>();
      cr.fn = cj.at("fn").get<std::uint64_t>();
      for (const json& p : cj.at("pr_curve")) {
        cr.pr_curve.push_back(PrPoint{p.at(0).get<double>(), p.at(1).get<double>()});
      }
      r.per_class.push_back(std::move(cr));
    }
    const json& matrix = j.at("confusion").at("matrix");
    if (matrix.size() != kConfusionSize) fail(ErrorKind::kSchema, "confusion matrix has wrong size");
    for (std::size_t p = 0; p < kConfusionSize; ++p) {
      if (matrix.at(p).size() != kConfusionSize) fail(ErrorKind::kSchema, "confusion matrix has wrong size");
      for (std::size_t g = 0; g < kConfusionSize; ++g) {
        r.confusion[p][g] = matrix.at(p).at(g).get<std::uint64_t>();
      }
    }
    if (j.contains("regression")) {
      const json& rj = j.at("regression");
      RegressionBlock b;
      b.n = rj.at("n").get<std::size_t>();
      b.mae = rj.at("mae").get<double>();
      b.rmse = rj.at("rmse").get<double>();
      b.huber = rj.at("huber").get<double>();
      b.huber_delta = rj.at("huber_delta").get<double>();
      r.regression = b;
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("report JSON: ") + e.what());
  }
}

void write_report(const EvalReport& report, const std::filesystem::path& path,
                  ReportFormat format) {
  write_file_atomic(path, format_report(report, format));
}

std::string format_split_json(const DatasetSplit& split) {
  nlohmann::ordered_json j;
  if (split.fold) j["fold"] = *split.fold;
  else j["fold"] = "EXTERNAL_TEST";
  j["train"] = split.train_ids;
  j["val"] = split.val_ids;
  j["test"] = split.test_ids;
  return j.dump() + "\n";
}

DatasetSplit parse_split_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    DatasetSplit s;
    const json& fold = j.at("fold");
    if (fold.is_string()) {
      if (fold.get<std::string>() != "EXTERNAL_TEST") fail(ErrorKind::kSchema, "unknown fold tag");
    } else {
      s.fold = fold.get<int>();
    }
    s.train_ids = j.at("train").get<std::vector<std::string>>();
    s.val_ids = j.at("val").get<std::vector<std::string>>();
    s.test_ids = j.at("test").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("split JSON: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::kIo, "cannot read '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorKind::kIo, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::kIo, "cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace artss
