#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "recall_oracle.hpp"
#include "test_support.hpp"
#include "wildannot/cli.hpp"
#include "wildannot/io.hpp"
#include "wildannot/parallel.hpp"
#include "wildannot/pr_eval.hpp"
#include "wildannot/render.hpp"
#include "wildannot/synth.hpp"

namespace wildannot {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json json_of(const CliRun& r) { return nlohmann::json::parse(r.out); }

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    n += e.is_regular_file() && e.path().extension() == ext;
  }
  return n;
}

// Plane scene with a 10 s trajectory.
fs::path ten_second_sequence(const fs::path& dir) {
  const SyntheticScene scene = gen_plane({.extent = 20.0, .spacing = 0.25});
  const Trajectory traj = straight_trajectory({-4, 0, 2}, {4, 0, 2}, 0.0, 10.0, 10.0);
  return export_scene(dir, "P-01", scene, traj, forward_looking_rig(160, 120, 80.0),
                      frame_times(0.0, 3, 15.0));
}

void edit_manifest(const fs::path& manifest, const std::function<void(nlohmann::json&)>& fn) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(manifest));
  fn(j);
  write_text_file(manifest, j.dump(2));
}

TEST(Cli, HelpListsDefaults) {
  const CliRun sub = run({"submaps", "--help"});
  EXPECT_EQ(sub.code, kExitOk);
  EXPECT_NE(sub.out.find("--radius FLOAT [30]"), std::string::npos) << sub.out;
  EXPECT_NE(sub.out.find("--window FLOAT [1]"), std::string::npos);
  EXPECT_NE(sub.out.find("--stride FLOAT [0.5]"), std::string::npos);

  const CliRun st = run({"stats", "--help"});
  EXPECT_NE(st.out.find("[0.01]"), std::string::npos) << st.out;
  EXPECT_NE(st.out.find("--seed"), std::string::npos);

  const CliRun ev = run({"eval", "--help"});
  EXPECT_NE(ev.out.find("[vpr]"), std::string::npos) << ev.out;
  EXPECT_NE(ev.out.find("[intra]"), std::string::npos);
  EXPECT_NE(ev.out.find("[1,5]"), std::string::npos);
  EXPECT_NE(ev.out.find("[600]"), std::string::npos);

  const CliRun an = run({"annotate", "--help"});
  for (const char* flag : {"--gamma", "--crop-radius", "--normal-radius", "--min-neighbors",
                           "--normals-cache", "--debug-dump"}) {
    EXPECT_NE(an.out.find(flag), std::string::npos) << flag;
  }
  EXPECT_NE(run({"depth-eval", "--help"}).out.find("--delta1-literal"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"submaps"}).code, kExitUsage);
  const CliRun missing = run({"annotate", "-m", "/nonexistent/manifest.json", "-o", "/tmp/x"});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("/nonexistent/manifest.json"), std::string::npos);
}

TEST(Cli, MissingTrajectoryNamesPath) {
  const fs::path dir = testing::make_temp_dir("cli_missing");
  const CliRun s = run({"synth", "--kind", "sphere", "-o", dir.string()});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  fs::remove(dir / "trajectory.csv");
  const CliRun r = run({"annotate", "-m", (dir / "manifest.json").string(), "-o", (dir / "out").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find((dir / "trajectory.csv").string()), std::string::npos) << r.err;
}

TEST(Cli, AnnotateWritesFramesDeterministically) {
  const fs::path dir = testing::make_temp_dir("cli_annotate");
  ASSERT_EQ(run({"synth", "--kind", "sphere", "-o", (dir / "in").string(), "--frames", "10"}).code,
            kExitOk);
  const std::string manifest = (dir / "in" / "manifest.json").string();
  const CliRun a = run({"annotate", "-m", manifest, "-o", (dir / "a").string()});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(json_of(a)["frames_written"], 10);
  EXPECT_GT(json_of(a)["stage_totals"]["after_ghpr"].get<std::size_t>(), 0u);
  EXPECT_EQ(count_files(dir / "a" / "S-01" / "depth", ".png"), 10u);
  EXPECT_EQ(count_files(dir / "a" / "S-01" / "normal", ".png"), 10u);
  EXPECT_TRUE(fs::exists(dir / "a" / "S-01" / "frames.json"));

  ASSERT_EQ(run({"-j", "1", "annotate", "-m", manifest, "-o", (dir / "b").string()}).code, kExitOk);
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path other = dir / "b" / fs::relative(e.path(), dir / "a");
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(testing::file_digest(e.path()), testing::file_digest(other)) << other;
  }

  // A positive gamma is rejected before any work.
  EXPECT_EQ(run({"annotate", "-m", manifest, "-o", (dir / "c").string(), "--gamma", "0.5"}).code,
            kExitUsage);
}

TEST(Cli, SubmapsDefaultsAndPrecedence) {
  const fs::path dir = testing::make_temp_dir("cli_submaps");
  const fs::path manifest = ten_second_sequence(dir / "in");
  const CliRun r = run({"submaps", "-m", manifest.string(), "-o", (dir / "a").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(count_files(dir / "a" / "P-01", ".ply"), 21u);
  const auto index = nlohmann::json::parse(read_text_file(dir / "a" / "P-01" / "submaps.json"));
  EXPECT_EQ(index["radius"], 30.0);
  EXPECT_EQ(index["time_window"], 1.0);
  EXPECT_EQ(index["stride"], 0.5);
  EXPECT_EQ(index["submaps"].size(), 21u);

  EXPECT_EQ(run({"submaps", "-m", manifest.string(), "-o", (dir / "z").string(), "--stride", "0"}).code,
            kExitUsage);

  // Manifest config beats the default ...
  edit_manifest(manifest, [](nlohmann::json& j) { j["config"]["submap_stride"] = 1.0; });
  ASSERT_EQ(run({"submaps", "-m", manifest.string(), "-o", (dir / "b").string()}).code, kExitOk);
  EXPECT_EQ(count_files(dir / "b" / "P-01", ".ply"), 11u);
  // ... and the flag beats the manifest.
  ASSERT_EQ(run({"submaps", "-m", manifest.string(), "-o", (dir / "c").string(), "--stride", "2"}).code,
            kExitOk);
  EXPECT_EQ(count_files(dir / "c" / "P-01", ".ply"), 6u);
}

TEST(Cli, DeclaredStatsMismatchWarns) {
  const fs::path dir = testing::make_temp_dir("cli_declared");
  const fs::path manifest = ten_second_sequence(dir / "in");
  edit_manifest(manifest, [](nlohmann::json& j) { j["declared_stats"]["submap_count"] = 99; });
  ::testing::internal::CaptureStderr();
  const CliRun r = run({"submaps", "-m", manifest.string(), "-o", (dir / "a").string()});
  const std::string log = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(log.find("99"), std::string::npos) << log;
}

class CliEval : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::make_temp_dir("cli_eval");
    std::mt19937_64 rng(7);
    set_ = testing::random_descriptor_set(
        rng, 400, 8, {"V-01", "V-02", "V-03", "V-04", "K-01", "K-02", "K-03", "K-04"}, false);
    write_descriptors(dir_ / "q.wdsc", set_);
  }
  fs::path dir_;
  DescriptorSet set_;
};

TEST_F(CliEval, SelfRetrieval) {
  const CliRun r = run({"eval", "--queries", (dir_ / "q.wdsc").string(), "--exclusion-window", "0",
                     "-o", (dir_ / "out").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = json_of(r);
  EXPECT_EQ(j["positive_threshold"], 25.0);
  EXPECT_EQ(j["rows"].size(), 8u);
  EXPECT_EQ(j["average"]["R@1"], 100.0);
  EXPECT_EQ(j["average"]["R@5"], 100.0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "recall_vpr_intra.json"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "recall_vpr_intra.csv"));
}

TEST_F(CliEval, TaskThresholdsAndFold) {
  const CliRun lpr = run({"eval", "--queries", (dir_ / "q.wdsc").string(), "--task", "lpr"});
  ASSERT_EQ(lpr.code, kExitOk) << lpr.err;
  EXPECT_EQ(json_of(lpr)["positive_threshold"], 3.0);

  const CliRun fold = run({"eval", "--queries", (dir_ / "q.wdsc").string(), "--mode", "inter",
                        "--fold", "2", "-o", (dir_ / "out").string()});
  ASSERT_EQ(fold.code, kExitOk) << fold.err;
  const auto j = json_of(fold);
  EXPECT_EQ(j["fold"], 2);
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["query"], "V-02");
  EXPECT_EQ(j["rows"][0]["database"], "K-02");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "recall_vpr_inter_fold2.json"));

  // Matches the library on the same subsets.
  const auto test = [](const std::string& l) { return l == "V-02" || l == "K-02"; };
  EvalConfig config;
  config.mode = EvalMode::kInter;
  const RecallReport ref =
      evaluate_recall(set_.filter_labels(test), set_.filter_labels(test), config);
  EXPECT_EQ(j["rows"], ref.to_json()["rows"]);

  EXPECT_EQ(run({"eval", "--queries", (dir_ / "q.wdsc").string(), "--fold", "5"}).code, kExitUsage);
}

TEST_F(CliEval, CrossModalSchema) {
  const CliRun r = run({"eval", "--queries", (dir_ / "q.wdsc").string(), "--database",
                     (dir_ / "q.wdsc").string(), "--task", "cmpr"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = json_of(r);
  EXPECT_EQ(j["mode"], "cross_modal");
  EXPECT_EQ(j["columns"]["Venman"]["R@1"], 100.0);
  EXPECT_EQ(j["columns"]["Karawatha"]["R@1"], 100.0);
  EXPECT_EQ(j["columns"]["Average"]["R@1"], 100.0);
  EXPECT_EQ(run({"eval", "--queries", (dir_ / "q.wdsc").string(), "--task", "cmpr"}).code,
            kExitUsage);
}

TEST_F(CliEval, MalformedInputs) {
  std::mt19937_64 rng(8);
  write_descriptors(dir_ / "d16.wdsc", testing::random_descriptor_set(rng, 20, 16, {"V-01"}, false));
  EXPECT_EQ(run({"eval", "--queries", (dir_ / "q.wdsc").string(), "--database",
                 (dir_ / "d16.wdsc").string()})
                .code,
            kExitUsage);
  std::ofstream(dir_ / "bad.wdsc") << "garbage";
  EXPECT_EQ(run({"eval", "--queries", (dir_ / "bad.wdsc").string()}).code, kExitUsage);
  EXPECT_EQ(run({"eval", "--queries", (dir_ / "q.wdsc").string(), "--task", "xyz"}).code,
            kExitUsage);
}

class CliDepth : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::make_temp_dir("cli_depth");
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0), d(1.0, 30.0);
    fs::create_directories(dir_ / "gt" / "S-01" / "depth");
    for (int k = 0; k < 3; ++k) {
      DepthFrame f(64, 48);
      for (std::size_t i = 0; i < f.depth.size(); ++i) {
        f.valid[i] = u(rng) < 0.5;
        if (f.valid[i]) f.depth[i] = static_cast<float>(d(rng));
      }
      write_binary_file(dir_ / "gt" / "S-01" / "depth" / (std::to_string(k) + ".png"),
                        encode_depth(f));
    }
  }
  fs::path dir_;
};

TEST_F(CliDepth, SelfComparisonIsPerfect) {
  const CliRun r = run({"depth-eval", "--pred", (dir_ / "gt").string(), "--gt", (dir_ / "gt").string(),
                     "-o", (dir_ / "m.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = json_of(r);
  EXPECT_EQ(j["pairs"], 3);
  EXPECT_EQ(j["aggregate"]["delta1"], 1.0);
  EXPECT_EQ(j["aggregate"]["abs_rel"], 0.0);
  EXPECT_EQ(j["aggregate"]["rmse"], 0.0);
  EXPECT_TRUE(j["sequences"].contains("S-01"));
  EXPECT_TRUE(fs::exists(dir_ / "m.json"));
}

TEST_F(CliDepth, MismatchedSizeIsSkipped) {
  fs::copy(dir_ / "gt", dir_ / "pred", fs::copy_options::recursive);
  write_binary_file(dir_ / "pred" / "S-01" / "depth" / "1.png", encode_depth(DepthFrame(32, 24)));
  ::testing::internal::CaptureStderr();
  const CliRun r = run({"depth-eval", "--pred", (dir_ / "pred").string(), "--gt",
                     (dir_ / "gt").string()});
  const std::string log = ::testing::internal::GetCapturedStderr();
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(json_of(r)["pairs"], 2);
  EXPECT_EQ(json_of(r)["skipped"].size(), 1u);
  EXPECT_NE(log.find("1.png"), std::string::npos) << log;
}

TEST_F(CliDepth, NoPairsIsAnError) {
  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(run({"depth-eval", "--pred", (dir_ / "empty").string(), "--gt", (dir_ / "gt").string()})
                .code,
            kExitUsage);
}

TEST_F(CliDepth, StatsOutputsAndDeterminism) {
  const CliRun a = run({"stats", "--depth-dir", (dir_ / "gt").string(), "-o", (dir_ / "a").string(),
                     "--rate", "0.5", "--seed", "3"});
  const CliRun b = run({"stats", "--depth-dir", (dir_ / "gt").string(), "-o", (dir_ / "b").string(),
                     "--rate", "0.5", "--seed", "3"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(testing::file_digest(dir_ / "a" / "depth_distribution.csv"),
            testing::file_digest(dir_ / "b" / "depth_distribution.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "depth_quantiles.json"));
  EXPECT_EQ(json_of(a)["frames"], 3);
  EXPECT_EQ(run({"stats", "--depth-dir", (dir_ / "gt").string(), "-o", (dir_ / "c").string(),
                 "--rate", "0"})
                .code,
            kExitUsage);
}

TEST(Cli, JobsFlagAndEnvironment) {
  const fs::path dir = testing::make_temp_dir("cli_jobs");
  ::setenv("WILDANNOT_JOBS", "3", 1);
  ASSERT_EQ(run({"synth", "--kind", "sphere", "-o", (dir / "a").string()}).code, kExitOk);
  EXPECT_EQ(num_jobs(), 3);
  ASSERT_EQ(run({"--jobs", "2", "synth", "--kind", "sphere", "-o", (dir / "b").string()}).code,
            kExitOk);
  EXPECT_EQ(num_jobs(), 2);
  ::unsetenv("WILDANNOT_JOBS");
  set_num_jobs(0);
}

}  // namespace
}  // namespace wildannot
