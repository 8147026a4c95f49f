#include <algorithm>
#include <cmath>
#include <optional>

#include <gtest/gtest.h>

#include "rs2gs/error.h"
#include "rs2gs/robust.h"
#include "rs2gs/synth.h"
#include "test_scenes.h"

namespace rs2gs {
namespace {

using testing::DirectionError;
using testing::MinimalConfig;

std::optional<ErrorCode> CodeOf(const auto& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

SyntheticScene Scene(SceneMotion motion, double deg, double frac, int n, uint64_t seed,
                     double outliers = 0.0, GenerationMode mode = GenerationMode::kLinearized) {
  SceneConfig c = MinimalConfig(motion, deg, frac, n, seed);
  c.outlier_fraction = outliers;
  c.mode = mode;
  return GenerateScene(c);
}

TEST(Scoring, DefaultsPerModel) {
  EXPECT_EQ(DefaultScoring(MotionModel::kRotation), Scoring::kRsHomography);
  EXPECT_EQ(DefaultScoring(MotionModel::kSixDof), Scoring::kEpipolarSampson);
  EXPECT_EQ(DefaultScoring(MotionModel::kTxy), Scoring::kEpipolarSampson);
}

TEST(Scoring, ExactDataScoresZero) {
  const auto rot = Scene(SceneMotion::kRotation, 20, 0, 30, 1, 0, GenerationMode::kExact);
  const auto gen = Scene(SceneMotion::kGeneral, 20, 0.05, 30, 2, 0, GenerationMode::kExact);
  for (const auto& c : rot.correspondences) {
    EXPECT_LT(ScoringResidual(c, rot.motion, rot.rig, Scoring::kRsHomography), 1e-12);
  }
  for (const auto& c : gen.correspondences) {
    EXPECT_LT(ScoringResidual(c, gen.motion, gen.rig, Scoring::kEpipolarSampson), 1e-12);
  }
}

TEST(RansacConfig, Validate) {
  RansacConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.iterations = 0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kInvalidArgument);
  c = {};
  c.inlier_threshold = 0.0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kInvalidArgument);
}

TEST(FitGlobalV2, NoiselessRotationAllInliers) {
  const auto s = Scene(SceneMotion::kRotation, 20, 0, 100, 3, 0, GenerationMode::kExact);
  const RobustEstimate r = FitGlobalV2(s.correspondences, MotionModel::kRotation, s.rig, {});
  EXPECT_EQ(r.inlier_count, 100);
  EXPECT_LT((r.motion.omega - s.motion.omega).norm(), 1e-9 * s.motion.omega.norm());
  EXPECT_LT(r.score, 1e-20);
}

TEST(FitGlobalV2, SixDofRejectsOutliers) {
  // Exact data: LO refines the exact model, so GT is its optimum.
  const auto s = Scene(SceneMotion::kGeneral, 15, 0.05, 200, 4, 0.3, GenerationMode::kExact);
  RansacConfig cfg;
  cfg.seed = 9;
  const RobustEstimate r = FitGlobalV2(s.correspondences, MotionModel::kSixDof, s.rig, cfg);
  int true_inliers = 0, flagged_outliers = 0, outliers = 0;
  for (size_t i = 0; i < s.correspondences.size(); ++i) {
    if (s.is_outlier[i]) {
      ++outliers;
      flagged_outliers += !r.inlier_mask[i];
    } else {
      true_inliers += r.inlier_mask[i];
    }
  }
  EXPECT_EQ(true_inliers, 200 - outliers);
  EXPECT_GE(flagged_outliers, 0.95 * outliers);
  EXPECT_LT((r.motion.omega - s.motion.omega).norm(), 1e-6 * s.motion.omega.norm());
  EXPECT_LT(DirectionError(r.motion.t, s.motion.t), 1e-6);
}

TEST(FitGlobalV2, DeterministicAndTraceMonotone) {
  const auto s = Scene(SceneMotion::kGeneral, 10, 0.05, 120, 5, 0.2);
  RansacConfig cfg;
  cfg.seed = 42;
  cfg.iterations = 60;
  const RobustEstimate a = FitGlobalV2(s.correspondences, MotionModel::kSixDof, s.rig, cfg);
  const RobustEstimate b = FitGlobalV2(s.correspondences, MotionModel::kSixDof, s.rig, cfg);
  EXPECT_EQ(a.motion.omega, b.motion.omega);
  EXPECT_EQ(a.motion.t, b.motion.t);
  EXPECT_EQ(a.inlier_mask, b.inlier_mask);
  EXPECT_EQ(a.trace, b.trace);
  ASSERT_EQ(a.trace.size(), 60u);
  for (size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i], a.trace[i - 1]);
  EXPECT_EQ(a.trace.back(), a.score);
}

TEST(FitGlobalV2, InsufficientAndNoModel) {
  const auto s = Scene(SceneMotion::kGeneral, 10, 0.05, 4, 6);
  EXPECT_EQ(CodeOf([&] { FitGlobalV2(s.correspondences, MotionModel::kSixDof, s.rig, {}); }),
            ErrorCode::kInsufficientCorrespondences);
  // Raw rows equal: TXY has no motion signal in any sample.
  std::vector<Correspondence> flat(10, {{0.1, 0.3}, {-0.1, 0.3}});
  EXPECT_EQ(CodeOf([&] { FitGlobalV2(flat, MotionModel::kTxy, RigConfig{}, {}); }),
            ErrorCode::kNoModelFound);
}

TEST(FitGlobalV2, NoisyInlierRateAndSoundness) {
  SceneConfig c = MinimalConfig(SceneMotion::kGeneral, 15, 0.05, 300, 13);
  c.mode = GenerationMode::kExact;
  c.sigma_px = 0.5;
  const auto s = GenerateScene(c);
  RansacConfig cfg;
  const RobustEstimate r = FitGlobalV2(s.correspondences, MotionModel::kSixDof, s.rig, cfg);
  EXPECT_GE(r.inlier_count, 0.99 * 300);
  const Scoring sc = DefaultScoring(MotionModel::kSixDof);
  for (size_t i = 0; i < s.correspondences.size(); ++i) {
    if (r.inlier_mask[i]) {
      EXPECT_LE(ScoringResidual(s.correspondences[i], r.motion, s.rig, sc), cfg.inlier_threshold);
    }
  }
}

TEST(FitGlobalV2, TranslationCannotFitRotation) {
  SceneConfig c = MinimalConfig(SceneMotion::kRotation, 25, 0, 200, 14);
  c.mode = GenerationMode::kExact;
  c.sigma_px = 0.5;
  const auto s = GenerateScene(c);
  const RobustEstimate txy = FitGlobalV2(s.correspondences, MotionModel::kTxy, s.rig, {});
  const RobustEstimate full = FitGlobalV2(s.correspondences, MotionModel::kSixDof, s.rig, {});
  EXPECT_GT(txy.score, full.score);
  EXPECT_LT(txy.inlier_count, full.inlier_count);
}

TEST(FitHybridV3, SixDofInitIsV2) {
  const auto s = Scene(SceneMotion::kGeneral, 10, 0.05, 80, 7, 0.2);
  RansacConfig cfg;
  cfg.seed = 3;
  const RobustEstimate a = FitGlobalV2(s.correspondences, MotionModel::kSixDof, s.rig, cfg);
  const RobustEstimate b = FitHybridV3(s.correspondences, MotionModel::kSixDof, s.rig, cfg);
  EXPECT_EQ(a.motion.omega, b.motion.omega);
  EXPECT_EQ(a.motion.t, b.motion.t);
  EXPECT_EQ(a.score, b.score);
  EXPECT_EQ(a.inlier_mask, b.inlier_mask);
}

TEST(FitHybridV3, RotationInitRejected) {
  const auto s = Scene(SceneMotion::kGeneral, 10, 0.05, 20, 8);
  EXPECT_EQ(CodeOf([&] { FitHybridV3(s.correspondences, MotionModel::kRotation, s.rig, {}); }),
            ErrorCode::kInvalidArgument);
}

TEST(FitHybridV3, TranslationInitEstimatesFullMotion) {
  const auto s = Scene(SceneMotion::kGeneral, 10, 0.05, 150, 10, 0.2);
  RansacConfig cfg;
  cfg.seed = 1;
  const RobustEstimate r = FitHybridV3(s.correspondences, MotionModel::kTxy, s.rig, cfg);
  EXPECT_EQ(r.motion.model, MotionModel::kSixDof);
  EXPECT_FALSE(r.motion.scale_known);
  EXPECT_NEAR(r.motion.t.x() + r.motion.t.y(), 1.0, 1e-12);
  EXPECT_GT(r.inlier_count, 0);
  ASSERT_EQ(r.trace.size(), 200u);
  for (size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
}

TEST(FitHybridV3, TxyzInitConvergesOnPureTranslation) {
  const auto s = Scene(SceneMotion::kTxyz, 0, 0.1, 100, 15, 0, GenerationMode::kExact);
  const RobustEstimate r = FitHybridV3(s.correspondences, MotionModel::kTxyz, s.rig, {});
  EXPECT_EQ(r.inlier_count, 100);
  EXPECT_LT(r.motion.omega.norm(), 1e-9);
  EXPECT_LT(DirectionError(r.motion.t, s.motion.t), 1e-8);
}

TEST(FitLocalV1, PureTxyIsExact) {
  const auto s = Scene(SceneMotion::kTxy, 0, 0.1, 50, 11, 0, GenerationMode::kExact);
  const LocalFit f = FitLocalV1(s.correspondences, MotionModel::kTxy, s.rig, 0);
  ASSERT_EQ(f.undistorted.size(), 50u);
  for (size_t i = 0; i < 50; ++i) {
    EXPECT_LT((f.undistorted[i].vec() - s.gs[i].first.vec()).norm() * s.camera.focal, 1e-8);
    EXPECT_LT(DirectionError(f.motions[i].t, s.motion.t), 1e-8);
  }
}

TEST(FitLocalV1, RotationPerCorrespondence) {
  const auto s = Scene(SceneMotion::kRotation, 10, 0, 40, 12);
  const LocalFit a = FitLocalV1(s.correspondences, MotionModel::kRotation, s.rig, 5);
  const LocalFit b = FitLocalV1(s.correspondences, MotionModel::kRotation, s.rig, 5);
  ASSERT_EQ(a.motions.size(), 40u);
  for (size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(a.motions[i].omega, b.motions[i].omega);
    EXPECT_LT((a.motions[i].omega - s.motion.omega).norm(), 1e-6 * s.motion.omega.norm());
  }
}

TEST(FitLocalV1, FailedSamplesKeepObservation) {
  std::vector<Correspondence> flat(3, {{0.1, 0.3}, {-0.1, 0.3}});
  const LocalFit f = FitLocalV1(flat, MotionModel::kTxy, RigConfig{}, 0);
  ASSERT_EQ(f.undistorted.size(), 3u);
  EXPECT_EQ(f.undistorted[0].u, 0.1);
  EXPECT_EQ(f.undistorted[0].v, 0.3);
}

// A dense grid of correspondences under a static rig plus a motion-like
// displacement growing with u.
std::vector<Correspondence> Grid(int nu, int nv) {
  std::vector<Correspondence> out;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double u = -1.4 + 2.8 * i / (nu - 1), v = -0.95 + 1.9 * j / (nv - 1);
      out.push_back({{u, v}, {-u - 0.01 * u * u, -v}});
    }
  }
  return out;
}

TEST(Preselect, ExcludesCenterBandAndHitsTarget) {
  const PinholeCamera cam;
  const auto corrs = Grid(60, 60);
  PreselectConfig cfg;
  cfg.target_count = 300;
  const auto idx = PreselectCorrespondences(corrs, cam, RigConfig{}, cfg);
  EXPECT_EQ(idx.size(), 300u);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(std::adjacent_find(idx.begin(), idx.end()), idx.end());
  const double band = 0.05 * cam.frame_rows();
  for (size_t i : idx) EXPECT_GE(std::abs(corrs[i].first.v), band);
  EXPECT_EQ(idx, PreselectCorrespondences(corrs, cam, RigConfig{}, cfg));
}

TEST(Preselect, SmallStrataTakenWhole) {
  const PinholeCamera cam;
  std::vector<Correspondence> corrs;
  // 1000 points with small temporal displacement, 10 with large.
  for (int i = 0; i < 1000; ++i) corrs.push_back({{0.001 * i, 0.2}, {-0.001 * i, -0.2}});
  for (int i = 0; i < 10; ++i) corrs.push_back({{0.01 * i, 0.9}, {-0.01 * i, -0.9}});
  PreselectConfig cfg;
  cfg.target_count = 100;
  cfg.displacement_bins = 1;
  const auto idx = PreselectCorrespondences(corrs, cam, RigConfig{}, cfg);
  EXPECT_EQ(idx.size(), 100u);
  EXPECT_EQ(std::count_if(idx.begin(), idx.end(), [](size_t i) { return i >= 1000; }), 10);
}

TEST(Preselect, FewerThanTargetReturnsAll) {
  const auto corrs = Grid(5, 6);
  PreselectConfig cfg;
  cfg.target_count = 1000;
  EXPECT_EQ(PreselectCorrespondences(corrs, PinholeCamera{}, RigConfig{}, cfg).size(), 30u);
}

TEST(Preselect, EmptyAfterFiltering) {
  std::vector<Correspondence> corrs(5, {{0.3, 0.01}, {-0.3, -0.01}});
  EXPECT_EQ(CodeOf([&] { PreselectCorrespondences(corrs, PinholeCamera{}); }),
            ErrorCode::kEmptyAfterFiltering);
}

}  // namespace
}  // namespace rs2gs
