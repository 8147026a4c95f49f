#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "rs2gs/experiment.h"
#include "rs2gs/synth.h"

namespace rs2gs {
namespace {

TEST(Tags, RoundTrip) {
  for (MotionModel m : {MotionModel::kTx, MotionModel::kTxy, MotionModel::kTxyz,
                        MotionModel::kRotation, MotionModel::kSixDof,
                        MotionModel::kSixDofBaseline}) {
    MotionModel back;
    ASSERT_TRUE(ParseSolverTag(SolverTag(m), &back));
    EXPECT_EQ(back, m);
  }
  for (Variant v : {Variant::kV1, Variant::kV2, Variant::kV3, Variant::kInterp}) {
    Variant back;
    ASSERT_TRUE(ParseVariantTag(VariantTag(v), &back));
    EXPECT_EQ(back, v);
  }
  MotionModel m;
  Variant v;
  EXPECT_FALSE(ParseSolverTag("7dof", &m));
  EXPECT_FALSE(ParseVariantTag("v4", &v));
  EXPECT_EQ(SolverTag(MotionModel::kSixDofBaseline), "6dof-baseline");
}

TEST(Summarize, OrderStatistics) {
  const ErrorStats s = Summarize({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.p90, 3.7);
  EXPECT_DOUBLE_EQ(Summarize({7.0}).p90, 7.0);
  EXPECT_TRUE(std::isnan(Summarize({}).median));
}

TEST(SceneSeed, DistinctAcrossTheGrid) {
  std::set<uint64_t> seen;
  for (int p = 0; p < 7; ++p) {
    for (int s = 0; s < 20; ++s) {
      for (int k = 0; k < 5; ++k) seen.insert(SceneSeed(0, p, s, k));
    }
  }
  EXPECT_EQ(seen.size(), 7u * 20u * 5u);
  EXPECT_NE(SceneSeed(0, 1, 2, 3), SceneSeed(1, 1, 2, 3));
}

SceneConfig GeneralScene(uint64_t seed) {
  SceneConfig c;
  c.num_points = 60;
  c.motion = SceneMotion::kGeneral;
  c.omega_deg = 20;
  c.trans_frac = 0.05;
  c.seed = seed;
  return c;
}

TEST(RunTrial, InterpIsTheMidpoint) {
  const SyntheticScene s = GenerateScene(GeneralScene(3));
  const TrialResult r = RunTrial(s, {MotionModel::kSixDof, Variant::kInterp, {}});
  ASSERT_EQ(r.errors_px.size(), s.correspondences.size());
  for (size_t i = 0; i < s.correspondences.size(); ++i) {
    const ImagePoint mid = InterpolatedGs(s.correspondences[i], s.rig);
    EXPECT_NEAR(r.errors_px[i],
                (mid.vec() - s.gs[i].first.vec()).norm() * s.camera.focal, 1e-9);
  }
}

TEST(RunTrial, SkipsOutliersAndBeatsInterpolation) {
  SceneConfig c = GeneralScene(5);
  c.outlier_fraction = 0.2;
  const SyntheticScene s = GenerateScene(c);
  int inliers = 0;
  for (uint8_t o : s.is_outlier) inliers += !o;
  const TrialResult wt = RunTrial(s, {MotionModel::kSixDof, Variant::kV2, {}});
  const TrialResult in = RunTrial(s, {MotionModel::kSixDof, Variant::kInterp, {}});
  EXPECT_EQ(static_cast<int>(wt.errors_px.size()), inliers);
  EXPECT_FALSE(wt.failed);
  EXPECT_GT(wt.runtime_us, 0.0);
  EXPECT_LT(Summarize(wt.errors_px).median, Summarize(in.errors_px).median);
}

SweepConfig SmallSweep(int threads) {
  SweepConfig c;
  c.omega_levels_deg = {0, 30};
  c.baseline_ratios = {0, 0.05};
  c.seeds = 3;
  c.scenes_per_seed = 1;
  c.points = 25;
  c.ransac.iterations = 10;
  c.threads = threads;
  return c;
}

TEST(Sweep, IndependentOfThreadCount) {
  const auto a = VelocitySweep(SmallSweep(1));
  const auto b = VelocitySweep(SmallSweep(4));
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].solver, b[i].solver);
    EXPECT_EQ(a[i].variant, b[i].variant);
    EXPECT_EQ(a[i].median_px, b[i].median_px);
    EXPECT_EQ(a[i].p90_px, b[i].p90_px);
  }
}

TEST(Sweep, RecordLayout) {
  const SweepConfig c = SmallSweep(2);
  const auto v = VelocitySweep(c);
  ASSERT_EQ(v.size(), 2u * 3u * DefaultVelocityRuns().size());
  EXPECT_EQ(v.front().omega_deg, 0.0);
  EXPECT_EQ(v.back().omega_deg, 30.0);
  EXPECT_DOUBLE_EQ(v.back().trans_frac, 0.1);
  EXPECT_EQ(v.back().solver, "interp");
  EXPECT_EQ(v.back().seed, 2u);
  const auto b = BaselineSweep(c);
  ASSERT_EQ(b.size(), 2u * 3u * DefaultBaselineRuns().size());
  for (const auto& r : b) {
    EXPECT_EQ(r.omega_deg, c.baseline_omega_deg);
    EXPECT_EQ(r.trans_frac, c.baseline_trans_frac);
    EXPECT_EQ(r.runtime_us, 0.0);
  }
  EXPECT_EQ(b.back().baseline_ratio, 0.05);
}

TEST(Sweep, MetadataCoversTheConfig) {
  const Metadata m = SweepMetadata(SmallSweep(1));
  auto value = [&](const std::string& k) {
    for (const auto& [key, v] : m) {
      if (key == k) return v;
    }
    return std::string("<missing>");
  };
  EXPECT_EQ(value("omega_levels_deg"), "0;30");
  EXPECT_EQ(value("iterations"), "10");
  EXPECT_EQ(value("sigma_px"), "0.5");
  EXPECT_EQ(value("seed"), "0");
}

}  // namespace
}  // namespace rs2gs
