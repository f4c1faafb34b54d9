// Drives the hdrvqa binary end to end on a small synthetic corpus.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>
#include <json.hpp>

#include "hdrvqa/csv.h"
#include "hdrvqa/niqe.h"
#include "hdrvqa/stats.h"
#include "hdrvqa/synth.h"
#include "test_support.h"

namespace hdrvqa {
namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& path) {
  const std::string s = slurp(path);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    const VideoMeta meta = synth_meta(192, 192);
    std::ofstream list(file("list.csv")), scores(file("scores.csv"));
    list << "video_id,path\n";
    scores << "video_id,score,content_id,device_id\n";
    for (const auto& c : mini_corpus_plan(6, 2, 3)) {
      const std::string name = c.video_id + ".yuv";
      write_video(file(name), synth_clip(c.content_seed, meta, 10, c.distortion), meta);
      std::ofstream(file(name + ".json")) << meta_to_json(meta).dump() << '\n';
      list << c.video_id << ',' << name << '\n';
      scores << c.video_id << ',' << format_double(c.mos) << ',' << c.content_id << ",1\n";
      ids_.push_back(c.video_id);
    }
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static std::string file(const std::string& name) { return dir_->file(name); }

  static RunResult run(const std::string& args) {
    static int counter = 0;
    const std::string out = file("stdout" + std::to_string(counter));
    const std::string err = file("stderr" + std::to_string(counter++));
    const std::string cmd =
        std::string("'") + HDRVQA_TOOL_PATH + "' " + args + " >'" + out + "' 2>'" + err + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // Extracts the corpus once per layout and caches the feature file.
  static std::string features(const std::string& layout) {
    const std::string path = file("feat_" + layout + ".csv");
    if (!fs::exists(path)) {
      const RunResult r = run("extract --list '" + file("list.csv") + "' --layout " + layout +
                              " --threads 2 -o '" + path + "'");
      EXPECT_EQ(r.code, 0) << r.err;
    }
    return path;
  }

  static inline testing::TempDir* dir_ = nullptr;
  static inline std::vector<std::string> ids_;
};

const char* kSmallGrid = " --set regressor.n_estimators=10,20 --set regressor.folds=3";

TEST_F(CliTest, HelpListsConfigKeys) {
  const RunResult r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* key : {"patchmax.patch_size", "hdrmax.delta", "stchips.temporal_a", "regressor.trials"}) {
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
  }
}

TEST_F(CliTest, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("extract -i '" + file("c0_d0.yuv") + "'").code, 2);  // no --out
  const RunResult r = run("extract -i '" + file("c0_d0.yuv") + "' --set patchmax.colour=3 -o '" +
                          file("x.csv") + "'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("patchmax.colour"), std::string::npos);
}

TEST_F(CliTest, ProbeReportsFrames) {
  const RunResult r = run("probe -i '" + file("c0_d1.yuv") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["video_id"], "c0_d1");
  EXPECT_EQ(j["frames"].get<int>(), 10);
  EXPECT_EQ(j["out_of_range_luma"].get<int>(), 0);
}

TEST_F(CliTest, ExtractIsIdenticalAcrossThreadCounts) {
  const auto start = std::chrono::steady_clock::now();
  const std::string list = file("list.csv");
  const RunResult a = run("extract --list '" + list + "' --threads 1 -o '" + file("t1.csv") + "'");
  const RunResult b = run("extract --list '" + list + "' --threads 4 -o '" + file("t4.csv") + "'");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(file("t1.csv")), slurp(file("t4.csv")));
  // Header: layout line, four bank lines, column names.
  EXPECT_EQ(count_lines(file("t1.csv")), 6 + ids_.size());
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::minutes(5));
}

TEST_F(CliTest, SummaryLayoutWidth) {
  const CsvTable t = read_csv(features("summary"));
  EXPECT_EQ(t.header.size(), 254u);
  EXPECT_EQ(t.rows.size(), ids_.size());
}

TEST_F(CliTest, TrainedModelIsIdenticalAcrossThreadCounts) {
  const std::string feats = features("full");
  const std::string base = "train-model --features '" + feats + "' --scores '" + file("scores.csv") + "'" +
                           kSmallGrid;
  const RunResult a = run(base + " --seed 5 --threads 1 -o '" + file("m1.bin") + "'");
  const RunResult b = run(base + " --seed 5 --threads 3 -o '" + file("m3.bin") + "'");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string m1 = slurp(file("m1.bin"));
  EXPECT_FALSE(m1.empty());
  EXPECT_EQ(m1, slurp(file("m3.bin")));

  const RunResult c = run(base + " --seed 6 -o '" + file("m6.bin") + "'");
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(m1, slurp(file("m6.bin")));
}

TEST_F(CliTest, PredictChecksLayout) {
  const std::string full = features("full");
  const std::string summary = features("summary");
  ASSERT_EQ(run("train-model --features '" + full + "' --scores '" + file("scores.csv") + "'" + kSmallGrid +
                " -o '" + file("pm.bin") + "'")
                .code,
            0);
  const RunResult ok = run("predict --model '" + file("pm.bin") + "' --features '" + full + "' -o '" +
                           file("pred.csv") + "'");
  ASSERT_EQ(ok.code, 0) << ok.err;
  const CsvTable p = read_csv(file("pred.csv"));
  EXPECT_EQ(p.rows.size(), ids_.size());

  const RunResult bad = run("predict --model '" + file("pm.bin") + "' --features '" + summary + "' -o '" +
                            file("pred2.csv") + "'");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("layout"), std::string::npos) << bad.err;
}

TEST_F(CliTest, DeviceAugmentedModel) {
  const std::string full = features("full");
  ASSERT_EQ(run("train-model --tv --features '" + full + "' --scores '" + file("scores.csv") + "'" +
                kSmallGrid + " -o '" + file("tv.bin") + "'")
                .code,
            0);
  std::ofstream(file("devices.csv")) << "video_id,device_id\n" << ids_[0] << ",1\n" << ids_[0] << ",2\n";
  const RunResult r = run("predict --model '" + file("tv.bin") + "' --features '" + full + "' --devices '" +
                          file("devices.csv") + "' -o '" + file("tvpred.csv") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_csv(file("tvpred.csv")).rows.size(), 2u);
  // Without the device column the layouts differ.
  EXPECT_EQ(run("predict --model '" + file("tv.bin") + "' --features '" + full + "' -o '" + file("x.csv") + "'")
                .code,
            2);
}

TEST_F(CliTest, MissingScoreNamesTheVideo) {
  std::ifstream in(file("scores.csv"));
  std::ofstream out(file("partial.csv"));
  std::string line;
  std::getline(in, line);
  out << line << '\n';
  while (std::getline(in, line)) {
    if (line.rfind(ids_[3] + ",", 0) != 0) out << line << '\n';
  }
  out.close();
  const RunResult r = run("train-model --features '" + features("full") + "' --scores '" + file("partial.csv") +
                          "'" + kSmallGrid + " -o '" + file("p.bin") + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(ids_[3]), std::string::npos) << r.err;
}

TEST_F(CliTest, EvaluateWritesReports) {
  const RunResult r = run("evaluate --features '" + features("summary") + "' --scores '" + file("scores.csv") +
                          "' --trials 4 --no-cv --set regressor.n_estimators=20 --set regressor.train_ratio=0.5 --out-dir '" + file("eval") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("SRCC"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(file("eval/summary.json")));
  EXPECT_EQ(j["trials"].get<int>(), 4);
  EXPECT_EQ(count_lines(file("eval/trials.csv")), 5u);
  EXPECT_TRUE(fs::exists(file("eval/scatter.csv")));
}

TEST_F(CliTest, MosRecoversScores) {
  const auto p = testing::planted_scores(17, 30, 12);
  p.table.write_csv(file("raw.csv"));
  std::ofstream refs(file("refs.csv"));
  refs << "video_id,reference_id\n";
  // Every video needs a reference; v000 is its own.
  for (int v = 0; v < 30; ++v) refs << fmt::format("v{:03d},v{:03d}\n", v, v - v % 10);
  refs.close();
  const RunResult r = run("mos --scores '" + file("raw.csv") + "' -o '" + file("mos.csv") + "' --subjects-out '" +
                          file("subj.csv") + "' --references '" + file("refs.csv") + "' --dmos-out '" +
                          file("dmos.csv") + "' --consistency --trials 10 --threads 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_GT(j["internal_correlation"]["1"].get<double>(), 0.8);
  const CsvTable mos = read_csv(file("mos.csv"));
  ASSERT_EQ(mos.rows.size(), 30u);
  std::vector<double> psi;
  for (const auto& row : mos.rows) psi.push_back(parse_double(row[2], "mos"));
  EXPECT_GT(plcc(psi, p.psi), 0.99);
  EXPECT_EQ(read_csv(file("subj.csv")).rows.size(), 12u);
  const CsvTable d = read_csv(file("dmos.csv"));
  ASSERT_EQ(d.rows.size(), 30u);
  EXPECT_EQ(parse_double(d.rows[0][3], "dmos"), 0.0);
}

TEST_F(CliTest, MergeFitsAndApplies) {
  std::ofstream a(file("anchors.csv"));
  a << "src_score,dst_score\n";
  for (int k = 0; k < 10; ++k) a << 10 * k << ',' << 20 + 5 * k << '\n';
  a.close();
  std::ofstream(file("apply.csv")) << "video_id,score\nx,45\n";
  const RunResult r = run("merge --anchors '" + file("anchors.csv") + "' -o '" + file("map.json") + "' --apply '" +
                          file("apply.csv") + "' --apply-out '" + file("mapped.csv") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(file("map.json")));
  EXPECT_LT(j["rmse"].get<double>(), 1.0);
  const CsvTable m = read_csv(file("mapped.csv"));
  ASSERT_EQ(m.rows.size(), 1u);
  EXPECT_NEAR(parse_double(m.rows[0][1], "mapped"), 42.5, 1.5);
}

TEST_F(CliTest, DescriptorsOneRowPerVideo) {
  const RunResult r = run("descriptors --list '" + file("list.csv") + "' -o '" + file("desc.csv") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const CsvTable t = read_csv(file("desc.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"video_id", "si", "ti", "colorfulness", "avg_luminance"}));
  EXPECT_EQ(t.rows.size(), ids_.size());
}

TEST_F(CliTest, FullReferenceScores) {
  const RunResult self = run("fr --reference '" + file("c1_d0.yuv") + "' --distorted '" + file("c1_d0.yuv") + "'");
  ASSERT_EQ(self.code, 0) << self.err;
  const auto js = nlohmann::json::parse(self.out);
  EXPECT_EQ(js["psnr"].get<double>(), 100.0);
  EXPECT_NEAR(js["ssim"].get<double>(), 1.0, 1e-12);
  const RunResult d = run("fr --reference '" + file("c1_d0.yuv") + "' --distorted '" + file("c1_d1.yuv") +
                          "' -o '" + file("fr.csv") + "'");
  ASSERT_EQ(d.code, 0) << d.err;
  const auto jd = nlohmann::json::parse(d.out);
  EXPECT_LT(jd["psnr"].get<double>(), 100.0);
  EXPECT_LT(jd["ssim"].get<double>(), 1.0);
  EXPECT_EQ(count_lines(file("fr.csv")), 11u);
}

TEST_F(CliTest, NiqeTrainWritesLoadableModel) {
  const RunResult r = run("niqe-train -i '" + file("c0_d0.yuv") + "' -i '" + file("c2_d0.yuv") + "' -o '" +
                          file("niqe.json") + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const NiqePristineModel m = load_niqe_model(file("niqe.json"));
  EXPECT_EQ(m.mu.size(), 36u);
  const RunResult e = run("extract -i '" + file("c3_d1.yuv") + "' --niqe-model '" + file("niqe.json") + "' -o '" +
                          file("own.csv") + "'");
  EXPECT_EQ(e.code, 0) << e.err;
}

}  // namespace
}  // namespace hdrvqa
