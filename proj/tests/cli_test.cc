#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.h"
#include "rs2gs/io.h"

namespace rs2gs {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rs2gs_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"rs2gs"};
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return RunCli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }
  std::string P(const std::string& name) const { return (dir_ / name).string(); }
  static std::string Slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, StaticSceneMirrorsTheFirstImage) {
  ASSERT_EQ(Run({"synth", "--omega-deg", "0", "--sigma-px", "0", "--points", "20", "--out-dir",
                 dir_.string()}),
            0)
      << err_.str();
  const auto corrs = ReadCorrespondences(P("scene_corrs.csv"));
  ASSERT_EQ(corrs.size(), 20u);
  for (const auto& c : corrs) {
    EXPECT_EQ(c.second.u, -c.first.u);
    EXPECT_EQ(c.second.v, -c.first.v);
  }
}

TEST_F(CliTest, SynthMatchesGoldenFile) {
  ASSERT_EQ(Run({"synth", "--motion", "rot", "--omega-deg", "15", "--sigma-px", "0.5", "--seed",
                 "7", "--out-dir", dir_.string()}),
            0);
  EXPECT_EQ(Slurp(P("scene_corrs.csv")),
            Slurp(std::string(RS2GS_TEST_DATA_DIR) + "/synth_rot_seed7_corrs.csv"));
}

TEST_F(CliTest, SynthIsBitReproducible) {
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(Run({"synth", "--seed", "9", "--outlier-fraction", "0.1", "--out-dir", P(sub)}), 0);
  }
  EXPECT_EQ(Slurp(P("a/scene_corrs.csv")), Slurp(P("b/scene_corrs.csv")));
  EXPECT_EQ(Slurp(P("a/scene_meta.txt")), Slurp(P("b/scene_meta.txt")));
  ASSERT_EQ(Run({"synth", "--seed", "10", "--out-dir", P("c")}), 0);
  EXPECT_NE(Slurp(P("a/scene_corrs.csv")), Slurp(P("c/scene_corrs.csv")));
}

TEST_F(CliTest, MetadataEchoesDefaults) {
  ASSERT_EQ(Run({"synth", "--out-dir", dir_.string()}), 0);
  const std::string meta = Slurp(P("scene_meta.txt"));
  for (const char* line : {"sigma_px=0.5\n", "points=100\n", "focal_px=1000\n", "seed=0\n",
                           "outlier_fraction=0\n"}) {
    EXPECT_NE(meta.find(line), std::string::npos) << line;
  }
}

TEST_F(CliTest, SolveRecoversRotation) {
  ASSERT_EQ(Run({"synth", "--motion", "rot", "--omega-deg", "20", "--trans-frac", "0",
                 "--sigma-px", "0", "--seed", "4", "--out-dir", dir_.string()}),
            0);
  ASSERT_EQ(Run({"solve", "--corrs", P("scene_corrs.csv"), "--solver", "rot", "--out",
                 P("m.txt"), "--mask", P("mask.txt"), "--undistorted", P("u.csv")}),
            0)
      << err_.str();
  EXPECT_NE(out_.str().find("inliers 100/100"), std::string::npos) << out_.str();
  const MotionEstimate gt = ReadMotion(P("scene_gt_motion.txt"));
  const MotionEstimate est = ReadMotion(P("m.txt"));
  EXPECT_LE((est.omega - gt.omega).norm(), 1e-3 * gt.omega.norm());
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Run({"solve", "--bogus"}), 2);
  EXPECT_NE(err_.str().find("Usage"), std::string::npos);
  EXPECT_EQ(Run({}), 2);
  EXPECT_EQ(Run({"synth", "--motion", "wobble"}), 2);
  EXPECT_EQ(Run({"solve", "--corrs", "x.csv", "--variant", "v9"}), 2);
  EXPECT_EQ(Run({"synth", "--min-depth", "5", "--max-depth", "4"}), 2);
  EXPECT_EQ(Run({"synth", "--help"}), 0);
  EXPECT_NE(out_.str().find("[0.5]"), std::string::npos) << "defaults shown in help";
}

TEST_F(CliTest, RuntimeFailuresExitOne) {
  EXPECT_EQ(Run({"solve", "--corrs", P("missing.csv")}), 1);
  EXPECT_NE(err_.str().find("IoError"), std::string::npos) << err_.str();
  ASSERT_EQ(Run({"synth", "--render", "--width", "64", "--height", "48", "--focal", "30",
                 "--omega-deg", "5", "--trans-frac", "0.02", "--out-dir", dir_.string()}),
            0);
  EXPECT_EQ(Run({"rectify", "--mode", "translation", "--motion", P("scene_gt_motion.txt"),
                 "--image1", P("scene_rs1.pgm"), "--image2", P("scene_rs2.pgm"), "--flow12",
                 P("nope.rsflow"), "--flow21", P("scene_flow21.rsflow"), "--out-dir",
                 P("out")}),
            1);
  EXPECT_EQ(Run({"rectify", "--mode", "translation", "--motion", P("scene_gt_motion.txt"),
                 "--image1", P("scene_rs1.pgm"), "--image2", P("scene_rs2.pgm"), "--out-dir",
                 P("out")}),
            1);
}

TEST_F(CliTest, RectifyWritesOutputs) {
  ASSERT_EQ(Run({"synth", "--render", "--width", "64", "--height", "48", "--focal", "30",
                 "--omega-deg", "5", "--trans-frac", "0.02", "--out-dir", dir_.string()}),
            0);
  const std::vector<std::string> common = {"--motion", P("scene_gt_motion.txt"), "--image1",
                                           P("scene_rs1.pgm"), "--image2", P("scene_rs2.pgm"),
                                           "--focal", "30"};
  std::vector<std::string> rot = {"rectify", "--mode", "rotation", "--out-dir", P("r")};
  rot.insert(rot.end(), common.begin(), common.end());
  ASSERT_EQ(Run(rot), 0) << err_.str();
  for (const char* f : {"gs1.pgm", "gs2.pgm", "fused.pgm"}) EXPECT_TRUE(fs::exists(P("r") + "/" + f));
  std::vector<std::string> tr = {"rectify", "--mode", "translation", "--out-dir", P("t"),
                                 "--flow12", P("scene_flow12.rsflow"), "--flow21",
                                 P("scene_flow21.rsflow")};
  tr.insert(tr.end(), common.begin(), common.end());
  ASSERT_EQ(Run(tr), 0) << err_.str();
  for (const char* f : {"gs.pgm", "depth1.pgm", "depth2.pgm", "depth_fused.pgm", "mask1.pgm",
                        "mask2.pgm"}) {
    EXPECT_TRUE(fs::exists(P("t") + "/" + f)) << f;
  }
}

TEST_F(CliTest, BenchmarkCsvIsThreadIndependent) {
  const std::vector<std::string> base = {"benchmark", "--levels", "0,15", "--ratios", "0,0.02",
                                         "--seeds", "2", "--scenes-per-seed", "1", "--points",
                                         "25", "--iters", "10"};
  auto with = [&](const std::string& threads, const std::string& out) {
    auto a = base;
    a.insert(a.end(), {"--threads", threads, "--out", out});
    return a;
  };
  ASSERT_EQ(Run(with("1", P("a.csv"))), 0) << err_.str();
  ASSERT_EQ(Run(with("4", P("b.csv"))), 0);
  EXPECT_EQ(Slurp(P("a.csv")), Slurp(P("b.csv")));
  Metadata meta;
  const auto recs = ReadBenchmarkCsv(P("a.csv"), &meta);
  EXPECT_FALSE(recs.empty());
  for (const auto& r : recs) EXPECT_EQ(r.runtime_us, 0.0);
  bool has_seed = false;
  for (const auto& [k, v] : meta) has_seed |= k == "seed";
  EXPECT_TRUE(has_seed);
}

}  // namespace
}  // namespace rs2gs
