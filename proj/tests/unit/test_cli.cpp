#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "app/cli.hpp"
#include "artss/annot_io.hpp"
#include "json.hpp"

namespace artss {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "artss");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = app::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("artss_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& s) const { return path_ / s; }
  std::string str(const std::string& s) const { return (path_ / s).string(); }

 private:
  fs::path path_;
};

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_text_file(e.path());
  }
  return out;
}

const std::string kFixture = ARTSS_FIXTURE_DIR;

TEST(Cli, SplitOnFullSizeManifest) {
  TempDir t;
  const auto a = cli({"split", "--manifest", kFixture + "/manifest970.csv", "--out", t.str("a"), "--seed", "42"});
  ASSERT_EQ(a.code, 0) << a.err;
  for (int k = 1; k <= 3; ++k) {
    EXPECT_NE(a.out.find("fold " + std::to_string(k) + ": train 452 val 227"), std::string::npos) << a.out;
    const auto s = parse_split_json(read_text_file(t / ("a/fold_" + std::to_string(k) + ".json")));
    EXPECT_EQ(s.train_ids.size(), 452u);
    EXPECT_EQ(s.val_ids.size(), 227u);
    EXPECT_EQ(s.test_ids.size(), 291u);
  }
  EXPECT_NE(a.out.find("external test: 291"), std::string::npos);
  const auto b = cli({"split", "--manifest", kFixture + "/manifest970.csv", "--out", t.str("b"), "--seed", "42", "-j", "2"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(tree(t / "a"), tree(t / "b"));
  EXPECT_FALSE(fs::exists(t / "a/_INCOMPLETE"));
}

TEST(Cli, EvalDetIdenticalFilesArePerfect) {
  TempDir t;
  fs::create_directories(t / "gt");
  fs::create_directories(t / "pred");
  for (const auto& e : fs::directory_iterator(kFixture + "/synthetic12/labels")) {
    fs::copy_file(e.path(), t / ("gt/" + e.path().filename().string()));
    auto dets = parse_annotation_file(e.path(), AnnotationKind::kGroundTruth);
    for (auto& d : dets) d.confidence = 1.0;
    write_file_atomic(t / ("pred/" + e.path().filename().string()), format_annotations(dets));
  }
  const auto r = cli({"eval-det", "--pred", t.str("pred"), "--gt", t.str("gt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = parse_report_json(r.out);
  ASSERT_TRUE(report.map_score);
  EXPECT_EQ(*report.map_score, 1.0);
  EXPECT_EQ(report.accuracy, 1.0);

  const auto w = cli({"eval-det", "--pred", t.str("pred"), "--gt", t.str("gt"), "--out", t.str("rep")});
  ASSERT_EQ(w.code, 0) << w.err;
  for (const char* f : {"report.json", "report.csv", "pr_curves.csv", "pr_curves.svg"}) {
    EXPECT_TRUE(fs::exists(t / (std::string("rep/") + f))) << f;
  }
}

TEST(Cli, EvalTssTableAndPairingError) {
  TempDir t;
  write_file_atomic(t / "gt.csv", "id,tss\na,1\nb,3\n");
  write_file_atomic(t / "pred.csv", "id,tss\na,0\nb,0\n");
  const auto ok = cli({"eval-tss", "--pred", t.str("pred.csv"), "--gt", t.str("gt.csv")});
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto j = nlohmann::json::parse(ok.out);
  EXPECT_EQ(j["mae"].get<double>(), 2.0);

  write_file_atomic(t / "bad.csv", "id,tss\na,0\nzz,0\n");
  const auto bad = cli({"eval-tss", "--pred", t.str("bad.csv"), "--gt", t.str("gt.csv")});
  EXPECT_EQ(bad.code, 1);
  const auto e = nlohmann::json::parse(bad.err);
  EXPECT_EQ(e["error"]["kind"], "pairing");
  EXPECT_EQ(e["error"]["stage"], "eval-tss");
  EXPECT_NE(e["error"]["message"].get<std::string>().find("zz"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"split", "--bogus"}).code, 2);
  const auto missing = cli({"split", "--manifest", "/nonexistent/m.csv", "--out", "/tmp/x"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(nlohmann::json::parse(missing.err)["error"]["kind"], "usage");
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, FailedStageLeavesMarker) {
  TempDir t;
  write_file_atomic(t / "m.csv", "id,path,age,gender,side,reader_a,reader_b\np,missing.png,40,F,both,1,1\n");
  const auto r = cli({"run-all", "--manifest", t.str("m.csv"), "--out", t.str("out")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(nlohmann::json::parse(r.err)["error"]["stage"], "run-all/preprocess");
  EXPECT_TRUE(fs::exists(t / "out/_INCOMPLETE"));
}

TEST(Cli, RunAllOnFixtureIsIdempotentAndJobsIndependent) {
  TempDir t;
  const std::string m = kFixture + "/synthetic12/manifest.csv";
  const auto a = cli({"run-all", "--manifest", m, "--out", t.str("a"), "--seed", "5", "-j", "1"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("baseline,Huber Loss,"), std::string::npos);
  EXPECT_TRUE(fs::exists(t / "a/tss_table.csv"));
  EXPECT_TRUE(fs::exists(t / "a/masks/p01.mask.json"));
  EXPECT_FALSE(fs::exists(t / "a/_INCOMPLETE"));
  const auto b = cli({"run-all", "--manifest", m, "--out", t.str("b"), "--seed", "5", "-j", "3"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(tree(t / "a"), tree(t / "b"));
  const auto c = cli({"run-all", "--manifest", m, "--out", t.str("a"), "--seed", "5", "-j", "2"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(tree(t / "a"), tree(t / "b"));
}

TEST(Cli, AugmentIsSeeded) {
  TempDir t;
  const std::string in = kFixture + "/synthetic12/images";
  const std::string labels = kFixture + "/synthetic12/labels";
  const auto a = cli({"augment", "--in", in, "--labels", labels, "--out", t.str("a"), "--seed", "9", "--count", "2"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = cli({"augment", "--in", in, "--labels", labels, "--out", t.str("b"), "--seed", "9", "--count", "2", "-j", "2"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(tree(t / "a"), tree(t / "b"));
  EXPECT_TRUE(fs::exists(t / "a/augment_log.csv"));
}

TEST(Cli, ReportDistWritesSvg) {
  TempDir t;
  const auto r = cli({"report-dist", "--manifest", kFixture + "/synthetic12/manifest.csv", "--out", t.str("d.svg")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto svg = read_text_file(t / "d.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u) << svg.substr(0, 80);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

}  // namespace
}  // namespace artss
