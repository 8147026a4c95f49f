#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rs2gs/error.h"
#include "rs2gs/rotation.h"
#include "rs2gs/solvers.h"
#include "rs2gs/synth.h"
#include "rs2gs/trajectory.h"
#include "test_scenes.h"

namespace rs2gs {
namespace {

using testing::MinimalConfig;

MotionEstimate SomeMotion() {
  MotionEstimate m;
  m.omega = Vec3(0.05, -0.12, 0.08);
  m.t = Vec3(0.2, -0.1, 0.15);
  return m;
}

TEST(ProjectGs, OnAxisPoint) {
  const ProjectedPair p = ProjectGs(Vec3(0, 0, 5), RigConfig{});
  EXPECT_EQ(p.first.u, 0.0);
  EXPECT_EQ(p.first.v, 0.0);
  EXPECT_EQ(p.second.u, 0.0);
  EXPECT_EQ(p.second.v, 0.0);
}

TEST(ProjectGs, SecondCameraIsFlipped) {
  const ProjectedPair p = ProjectGs(Vec3(1, 2, 5), RigConfig{});
  EXPECT_DOUBLE_EQ(p.first.u, 0.2);
  EXPECT_DOUBLE_EQ(p.first.v, 0.4);
  EXPECT_DOUBLE_EQ(p.second.u, -0.2);
  EXPECT_DOUBLE_EQ(p.second.v, -0.4);
}

TEST(ProjectGs, BaselineShiftsSecondCamera) {
  // Camera 2 maps X to R_r (X + b).
  RigConfig rig;
  rig.relative_rotation = Mat3::Identity();
  rig.baseline = Vec3(0.1, 0, 0);
  const ProjectedPair p = ProjectGs(Vec3(1, 2, 5), rig);
  EXPECT_NEAR(p.second.u, 0.22, 1e-15);
  EXPECT_NEAR(p.second.v, 0.4, 1e-15);
}

TEST(ProjectGs, BehindCamera) {
  try {
    ProjectGs(Vec3(0, 0, -1), RigConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveDepth);
  }
}

TEST(ProjectRs, ZeroMotionEqualsGs) {
  const Vec3 X(0.7, -0.4, 6.0);
  const ProjectedPair gs = ProjectGs(X, RigConfig{});
  const ProjectedPair rs = ProjectRs(X, MotionEstimate{}, RigConfig{});
  EXPECT_EQ(gs.first.u, rs.first.u);
  EXPECT_EQ(gs.first.v, rs.first.v);
  EXPECT_EQ(gs.second.u, rs.second.u);
  EXPECT_EQ(gs.second.v, rs.second.v);
}

TEST(ProjectRs, SatisfiesImplicitRowEquation) {
  const RigConfig rig;
  const MotionEstimate m = SomeMotion();
  const Vec3 X(1.1, -0.8, 5.0);
  const ProjectedPair p = ProjectRs(X, m, rig);
  const RowPose p1 = PoseAt(m, p.first.v);
  const Vec3 x1 = p1.rotation * X + p1.translation;
  EXPECT_LE(std::abs(x1.y() / x1.z() - p.first.v), 1e-10);
  EXPECT_LE(std::abs(x1.x() / x1.z() - p.first.u), 1e-10);
  const RowPose p2 = PoseAt(m, p.second.v);
  const Vec3 x2 = rig.relative_rotation * (p2.rotation * X + p2.translation);
  EXPECT_LE(std::abs(x2.y() / x2.z() - p.second.v), 1e-10);
}

TEST(ProjectRs, PureTxMirrorsRowsAndInterpolates) {
  MotionEstimate m;
  m.t = Vec3(0.3, 0, 0);
  const RigConfig rig;
  for (const Vec3& X : {Vec3(1, 2, 5), Vec3(-2, 0.5, 8), Vec3(0.3, -1.5, 4)}) {
    const ProjectedPair rs = ProjectRs(X, m, rig);
    const ProjectedPair gs = ProjectGs(X, rig);
    EXPECT_NEAR(rs.second.v, -rs.first.v, 1e-12);
    // Interpolation in the aligned frame: u_g = (u - u') / 2 for raw u'.
    EXPECT_NEAR(0.5 * (rs.first.u - rs.second.u), gs.first.u, 1e-12);
  }
}

TEST(ProjectRs, LinearizedModeSatisfiesSolverConstraint) {
  const RigConfig rig;
  ProjectionOptions opt;
  opt.mode = GenerationMode::kLinearized;
  const double rows = PinholeCamera{}.frame_rows();
  MotionEstimate m;
  m.omega = Vec3(1, 2, -1).normalized() * (30.0 * std::numbers::pi / 180.0 / rows);
  m.t = Vec3(0.3, -0.2, 0.1) * (0.1 * 4.0 / rows);
  for (const Vec3& X : {Vec3(1, 2, 5), Vec3(-2, 0.5, 8), Vec3(0.3, -1.5, 4)}) {
    const ProjectedPair p = ProjectRs(X, m, rig, opt);
    EXPECT_LE(std::abs(EpipolarResidual({p.first, p.second}, m, rig, true)), 1e-12);
  }
}

TEST(ProjectRs, RigSymmetry) {
  // Swapping the cameras is the same rig seen from camera 2: world R_r X,
  // motion conjugated by R_r, relative rotation R_r^T.
  const RigConfig rig;
  RigConfig swapped;
  swapped.relative_rotation = rig.relative_rotation.transpose();
  const MotionEstimate m = SomeMotion();
  MotionEstimate mc = m;
  mc.omega = rig.relative_rotation * m.omega;
  mc.t = rig.relative_rotation * m.t;
  const Vec3 X(0.4, -0.9, 6.0);
  const ProjectedPair a = ProjectRs(X, m, rig);
  const ProjectedPair b = ProjectRs(rig.relative_rotation * X, mc, swapped);
  EXPECT_NEAR(a.first.u, b.second.u, 1e-12);
  EXPECT_NEAR(a.first.v, b.second.v, 1e-12);
  EXPECT_NEAR(a.second.u, b.first.u, 1e-12);
  EXPECT_NEAR(a.second.v, b.first.v, 1e-12);
}

TEST(ProjectRs, KnotMotionWithEqualKnotsMatchesConstantMotion) {
  const MotionEstimate m = SomeMotion();
  const KnotMotion km = KnotMotion::Uniform(m, 3, -1.0, 1.0);
  const Vec3 X(0.5, 0.5, 5.0);
  const ProjectedPair a = ProjectRs(X, m, RigConfig{});
  const ProjectedPair b = ProjectRs(X, km, RigConfig{});
  EXPECT_EQ(a.first.u, b.first.u);
  EXPECT_EQ(a.second.v, b.second.v);
}

TEST(GenerateScene, Deterministic) {
  SceneConfig c = MinimalConfig(SceneMotion::kGeneral, 20, 0.05, 200, 42);
  c.sigma_px = 0.5;
  c.outlier_fraction = 0.2;
  const SyntheticScene a = GenerateScene(c), b = GenerateScene(c);
  ASSERT_EQ(a.correspondences.size(), b.correspondences.size());
  for (size_t i = 0; i < a.correspondences.size(); ++i) {
    EXPECT_EQ(a.correspondences[i].first.u, b.correspondences[i].first.u);
    EXPECT_EQ(a.correspondences[i].second.v, b.correspondences[i].second.v);
    EXPECT_EQ(a.is_outlier[i], b.is_outlier[i]);
  }
  EXPECT_EQ(a.motion.omega, b.motion.omega);
}

TEST(GenerateScene, NoiseLevelInNormalizedUnits) {
  SceneConfig c = MinimalConfig(SceneMotion::kGeneral, 10, 0.05, 5000, 3);
  c.sigma_px = 0.5;
  const SyntheticScene s = GenerateScene(c);
  double sum2 = 0.0;
  for (size_t i = 0; i < s.clean.size(); ++i) {
    sum2 += std::pow(s.correspondences[i].first.u - s.clean[i].first.u, 2);
  }
  const double sigma = std::sqrt(sum2 / s.clean.size());
  EXPECT_NEAR(sigma, 5e-4, 0.05 * 5e-4);
}

TEST(GenerateScene, NoiselessLinearizedSceneIsExact) {
  const SyntheticScene s = GenerateScene(MinimalConfig(SceneMotion::kGeneral, 30, 0.1, 300, 9));
  EXPECT_EQ(s.points.size(), 300u);
  for (const auto& c : s.correspondences) {
    EXPECT_LE(std::abs(EpipolarResidual(c, s.motion, s.rig, true)), 1e-12);
  }
}

TEST(GenerateScene, VelocityUnits) {
  SceneConfig c = MinimalConfig(SceneMotion::kGeneral, 15, 0.1, 50, 1);
  c.baseline_ratio = 0.05;
  const SyntheticScene s = GenerateScene(c);
  const double rows = c.camera.frame_rows();
  EXPECT_NEAR(s.motion.omega.norm() * rows, 15.0 * std::numbers::pi / 180.0, 1e-12);
  EXPECT_NEAR(s.motion.t.norm() * rows, 0.1 * s.min_depth, 1e-12);
  EXPECT_NEAR(s.rig.baseline.norm(), 0.05 * s.min_depth, 1e-12);
  EXPECT_TRUE(s.motion.scale_known);
}

TEST(GenerateScene, OutlierFraction) {
  SceneConfig c = MinimalConfig(SceneMotion::kGeneral, 15, 0.1, 100, 1);
  c.outlier_fraction = 0.3;
  const SyntheticScene s = GenerateScene(c);
  int n = 0;
  for (auto o : s.is_outlier) n += o;
  EXPECT_EQ(n, 30);
}

TEST(GenerateScene, EmptyScene) {
  SceneConfig c;
  c.num_points = 0;
  try {
    GenerateScene(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyScene);
  }
}

TEST(GenerateScene, ImportedPoints) {
  SceneConfig c;
  c.points = {Vec3(0, 0, 3), Vec3(1, 1, 7)};
  const SyntheticScene s = GenerateScene(c);
  EXPECT_EQ(s.points.size(), 2u);
  EXPECT_EQ(s.min_depth, 3.0);
}

TEST(UndistortionError, GroundTruthIsExact) {
  SceneConfig c = MinimalConfig(SceneMotion::kGeneral, 25, 0.1, 200, 5);
  c.mode = GenerationMode::kExact;
  const SyntheticScene s = GenerateScene(c);
  for (size_t i = 0; i < s.points.size(); ++i) {
    EXPECT_LE(UndistortionError(s.correspondences[i], s.motion, s.rig, s.gs[i].first, s.camera),
              1e-8);
  }
}

TEST(UndistortionError, ZeroEstimateMeasuresRawDisplacement) {
  const SyntheticScene s = GenerateScene(MinimalConfig(SceneMotion::kGeneral, 25, 0.1, 50, 6));
  for (size_t i = 0; i < s.points.size(); ++i) {
    const double raw =
        s.camera.focal * (s.correspondences[i].first.vec() - s.gs[i].first.vec()).norm();
    EXPECT_NEAR(UndistortionError(s.correspondences[i], MotionEstimate{}, s.rig,
                                  s.gs[i].first, s.camera), raw, 1e-9);
  }
}

TEST(UndistortionError, InterpolationIsTheAlignedMidpoint) {
  const Correspondence c{{0.3, 0.1}, {0.1, 0.2}};
  const ImagePoint m = InterpolatedGs(c, RigConfig{});
  EXPECT_DOUBLE_EQ(m.u, 0.5 * (0.3 - 0.1));
  EXPECT_DOUBLE_EQ(m.v, 0.5 * (0.1 - 0.2));
}

TEST(Render, RsOfStaticRigIsGs) {
  PinholeCamera cam{40.0, 64, 48};
  const Texture tex = Texture::Procedural(3, 0.3);
  const Raster gs = RenderGs(tex, cam);
  const Raster rs = RenderRs(tex, 5.0, MotionEstimate{}, RigConfig{}, cam, false);
  for (size_t i = 0; i < gs.samples.size(); ++i) EXPECT_NEAR(gs.samples[i], rs.samples[i], 1e-6);
  EXPECT_EQ(rs.valid_count(), 64 * 48);
}

TEST(Render, PlaneFlowMatchesProjection) {
  PinholeCamera cam{40.0, 64, 48};
  MotionEstimate m;
  m.t = Vec3(0.4, 0, 0);
  const FlowField f = PlaneFlow(5.0, m, RigConfig{}, cam, false);
  int valid = 0;
  for (int y = 0; y < cam.height; y += 7) {
    for (int x = 0; x < cam.width; x += 5) {
      const size_t i = f.index(x, y);
      if (!f.valid[i]) continue;
      ++valid;
      // Pure t_x: the target row mirrors the source row.
      const ImagePoint p = cam.ToNormalized(x, y);
      const ImagePoint q = cam.ToNormalized(x + f.flow[i].x(), y + f.flow[i].y());
      EXPECT_NEAR(q.v, -p.v, 1e-10);
    }
  }
  EXPECT_GT(valid, 20);
}

}  // namespace
}  // namespace rs2gs
