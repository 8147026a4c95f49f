#include "rs2gs/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "rs2gs/error.h"
#include "rs2gs/rectify.h"
#include "rs2gs/rotation.h"
#include "rs2gs/solvers.h"

namespace rs2gs {
namespace {

// Camera-frame point of X for the given camera at row time tau.
template <typename PoseFn>
Vec3 CameraPoint(const Vec3& X, const PoseFn& pose, const RigConfig& rig,
                 bool second, double tau) {
  const RowPose p = pose(tau);
  const Vec3 Xc = p.rotation * X + p.translation;
  return second ? Vec3(rig.relative_rotation * (Xc + rig.baseline)) : Xc;
}

template <typename PoseFn>
ImagePoint SolveRow(const Vec3& X, const PoseFn& pose, const RigConfig& rig,
                    bool second, const ProjectionOptions& options) {
  Vec3 Xc = CameraPoint(X, pose, rig, second, 0.0);
  if (!(Xc.z() > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDepth, "point behind the camera");
  }
  // v = f(v) with f(v) = pi(pose(v) X)_y, accelerated by Aitken's delta^2
  // (Steffensen) so slow or oscillating contractions still converge.
  auto f = [&](double v, Vec3* out) {
    *out = CameraPoint(X, pose, rig, second, rig.RowTime(v));
    if (!(out->z() > 0.0)) {
      throw Error(ErrorCode::kNonPositiveDepth, "point behind the camera");
    }
    return out->y() / out->z();
  };
  double v = Xc.y() / Xc.z();
  Vec3 X1, X2;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double v1 = f(v, &X1);
    if (std::abs(v1 - v) <= options.tolerance) return {X1.x() / X1.z(), v1};
    const double v2 = f(v1, &X2);
    if (std::abs(v2 - v1) <= options.tolerance) return {X2.x() / X2.z(), v2};
    const double den = v2 - 2.0 * v1 + v;
    const double aitken = v - (v1 - v) * (v1 - v) / den;
    v = (den != 0.0 && std::isfinite(aitken)) ? aitken : v2;
  }
  throw Error(ErrorCode::kNoConvergence, "row fixed point did not converge");
}

// Moves the camera-2 observation onto the linearized model. With t = 0 and
// b = 0 that is u' ~ R_r (I + v'W)(I - vW) u; otherwise u'^T E_lin(v, v') u = 0
// solved by Newton along the epipolar-line normal.
ImagePoint LinearizeSecond(const ImagePoint& first, ImagePoint second,
                           const MotionEstimate& motion, const RigConfig& rig,
                           const ProjectionOptions& options) {
  const Vec3 u = first.homogeneous();
  const double tau = rig.RowTime(first.v);
  const Mat3 W = SkewSymmetric<double>(motion.omega);
  const Mat3& Rr = rig.relative_rotation;
  const Mat3 I = Mat3::Identity();
  if (motion.t.squaredNorm() == 0.0 && rig.baseline.squaredNorm() == 0.0) {
    for (int it = 0; it < options.max_iterations; ++it) {
      const double tau2 = rig.RowTime(second.v);
      const Vec3 h = Rr * (I + tau2 * W) * (I - tau * W) * u;
      if (!(h.z() > 0.0)) {
        throw Error(ErrorCode::kNonPositiveDepth, "linearized point behind camera");
      }
      const ImagePoint next = ImagePoint::FromHomogeneous(h);
      const double step = std::abs(next.v - second.v) + std::abs(next.u - second.u);
      second = next;
      if (step <= options.tolerance) return second;
    }
    throw Error(ErrorCode::kNoConvergence, "linearized homography did not converge");
  }
  const Mat3 Tx = SkewSymmetric<double>(motion.t);
  const Mat3 Bx = SkewSymmetric<double>(rig.baseline);
  auto E = [&](double tau2) -> Mat3 {
    const Mat3 M = I + (tau2 - tau) * W;
    return Rr * (tau2 * Tx * M - tau * M * Tx + Bx * M);
  };
  auto dE = [&](double tau2) -> Mat3 {
    const Mat3 M = I + (tau2 - tau) * W;
    return Rr * (Tx * M + tau2 * Tx * W - tau * W * Tx + Bx * W);
  };
  auto gradient = [&](const ImagePoint& p, double* f) -> Vec2 {
    const double tau2 = rig.RowTime(p.v);
    const Vec3 l = E(tau2) * u;
    *f = p.homogeneous().dot(l);
    return Vec2(l.x(), l.y() + p.homogeneous().dot(dE(tau2) * u));
  };
  double f;
  Vec2 n = gradient(second, &f);
  if (!(n.norm() > 0.0)) return second;
  n.normalize();
  const ImagePoint start = second;
  double s = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const ImagePoint p{start.u + s * n.x(), start.v + s * n.y()};
    const Vec2 g = gradient(p, &f);
    const double slope = g.dot(n);
    if (slope == 0.0) break;
    const double step = f / slope;
    s -= step;
    if (std::abs(step) <= 1e-15) return {start.u + s * n.x(), start.v + s * n.y()};
  }
  throw Error(ErrorCode::kNoConvergence, "linearized epipolar projection did not converge");
}

// Point of the plane Z = plane_depth (camera-1 GS frame) seen by pixel (x, y)
// of the RS camera: X = R^T (lambda d - o).
bool PlanePoint(double plane_depth, const MotionEstimate& motion, const RigConfig& rig,
                const PinholeCamera& camera, bool second, int x, int y, Vec3* X) {
  const ImagePoint p = camera.ToNormalized(x, y);
  const RowPose pose = PoseAt(motion, rig.RowTime(p.v));
  const Mat3 Rt = pose.rotation.transpose();
  const Vec3 o = second ? Vec3(pose.translation + rig.baseline) : pose.translation;
  const Vec3 d = second ? Vec3(rig.relative_rotation.transpose() * p.homogeneous())
                        : p.homogeneous();
  const Vec3 Rtd = Rt * d;
  const Vec3 Rto = Rt * o;
  if (!(Rtd.z() > 0.0)) return false;
  const double lambda = (plane_depth + Rto.z()) / Rtd.z();
  if (!(lambda > 0.0)) return false;
  *X = lambda * Rtd - Rto;
  return true;
}

Vec3 RandomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

}  // namespace

ProjectedPair ProjectGs(const Vec3& X, const RigConfig& rig) {
  const Vec3 X2 = rig.relative_rotation * (X + rig.baseline);
  if (!(X.z() > 0.0) || !(X2.z() > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDepth, "point behind a camera");
  }
  return {ImagePoint::FromHomogeneous(X), ImagePoint::FromHomogeneous(X2)};
}

ProjectedPair ProjectRs(const Vec3& X, const MotionEstimate& motion,
                        const RigConfig& rig, const ProjectionOptions& options) {
  auto pose = [&](double tau) { return PoseAt(motion, tau); };
  ProjectedPair out{SolveRow(X, pose, rig, false, options),
                    SolveRow(X, pose, rig, true, options)};
  if (options.mode == GenerationMode::kLinearized) {
    out.second = LinearizeSecond(out.first, out.second, motion, rig, options);
  }
  return out;
}

ImagePoint ProjectRsCamera(const Vec3& X, const MotionEstimate& motion,
                           const RigConfig& rig, bool second,
                           const ProjectionOptions& options) {
  auto pose = [&](double tau) { return PoseAt(motion, tau); };
  return SolveRow(X, pose, rig, second, options);
}

ProjectedPair ProjectRs(const Vec3& X, const KnotMotion& motion,
                        const RigConfig& rig, const ProjectionOptions& options) {
  motion.Validate();
  auto pose = [&](double tau) { return motion.PoseAt(tau); };
  return {SolveRow(X, pose, rig, false, options), SolveRow(X, pose, rig, true, options)};
}

SyntheticScene GenerateScene(const SceneConfig& config) {
  if (config.num_points <= 0 && config.points.empty()) {
    throw Error(ErrorCode::kEmptyScene, "scene needs at least one point");
  }
  if (!(config.min_depth > 0.0) || config.max_depth < config.min_depth) {
    throw Error(ErrorCode::kInvalidArgument, "bad depth range");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  const PinholeCamera& cam = config.camera;
  const double rows = cam.frame_rows();

  SyntheticScene scene;
  scene.camera = cam;
  scene.noise_sigma_px = config.sigma_px;
  scene.seed = config.seed;

  // Motion first: its random draws must not depend on the point count.
  const Vec3 axis = config.omega_axis.squaredNorm() > 0.0
                        ? Vec3(config.omega_axis.normalized()) : RandomUnit(rng);
  Vec3 dir = RandomUnit(rng);
  if (config.t_direction.squaredNorm() > 0.0) dir = config.t_direction.normalized();
  switch (config.motion) {
    case SceneMotion::kTx: dir = Vec3(dir.x() >= 0.0 ? 1.0 : -1.0, 0.0, 0.0); break;
    case SceneMotion::kTxy:
      dir.z() = 0.0;
      dir = dir.squaredNorm() > 0.0 ? Vec3(dir.normalized()) : Vec3::UnitX();
      break;
    default: break;
  }
  const bool rotates = config.motion == SceneMotion::kRotation ||
                       config.motion == SceneMotion::kGeneral;
  const bool translates = config.motion != SceneMotion::kRotation;

  std::vector<Vec3> candidates = config.points;
  const bool procedural = candidates.empty();
  double min_depth = config.min_depth;
  if (!procedural) {
    min_depth = std::numeric_limits<double>::infinity();
    for (const Vec3& X : candidates) min_depth = std::min(min_depth, X.z());
    if (!(min_depth > 0.0)) {
      throw Error(ErrorCode::kNonPositiveDepth, "imported point behind camera 1");
    }
  }
  scene.min_depth = min_depth;

  MotionEstimate& gt = scene.motion;
  gt.model = MotionModel::kSixDof;
  gt.scale_known = true;
  gt.omega = rotates ? Vec3(config.omega_deg * std::numbers::pi / 180.0 / rows * axis)
                     : Vec3::Zero();
  gt.t = translates ? Vec3(config.trans_frac * min_depth / rows * dir) : Vec3::Zero();
  scene.rig.baseline = config.baseline_ratio * min_depth * config.baseline_direction.normalized();

  ProjectionOptions options;
  options.mode = config.mode;
  const double sigma = config.sigma_px / cam.focal;
  auto accept = [&](const Vec3& X) {
    ProjectedPair rs, gs;
    try {
      gs = ProjectGs(X, scene.rig);
      rs = ProjectRs(X, gt, scene.rig, options);
    } catch (const Error&) {
      return false;
    }
    if (procedural && (!cam.InFrame(rs.first) || !cam.InFrame(rs.second))) return false;
    scene.points.push_back(X);
    scene.gs.push_back(gs);
    scene.clean.push_back({rs.first, rs.second});
    return true;
  };
  if (procedural) {
    const int max_draws = 1000 * config.num_points;
    for (int draw = 0; draw < max_draws &&
                       static_cast<int>(scene.points.size()) < config.num_points;
         ++draw) {
      const ImagePoint p = cam.ToNormalized(unit(rng) * (cam.width - 1),
                                            unit(rng) * (cam.height - 1));
      const double z = config.min_depth + unit(rng) * (config.max_depth - config.min_depth);
      accept(Vec3(p.u * z, p.v * z, z));
    }
  } else {
    for (const Vec3& X : candidates) accept(X);
  }
  if (scene.points.empty()) {
    throw Error(ErrorCode::kEmptyScene, "no point survived projection");
  }

  const int n = static_cast<int>(scene.points.size());
  const int outliers =
      static_cast<int>(std::lround(std::clamp(config.outlier_fraction, 0.0, 1.0) * n));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  scene.is_outlier.assign(n, 0);
  for (int k = 0; k < outliers; ++k) scene.is_outlier[order[k]] = 1;
  scene.correspondences = scene.clean;
  for (int i = 0; i < n; ++i) {
    Correspondence& c = scene.correspondences[i];
    if (sigma > 0.0) {
      c.first.u += sigma * normal(rng);
      c.first.v += sigma * normal(rng);
      c.second.u += sigma * normal(rng);
      c.second.v += sigma * normal(rng);
    }
    if (scene.is_outlier[i]) {
      c.second = cam.ToNormalized(unit(rng) * (cam.width - 1), unit(rng) * (cam.height - 1));
    }
  }
  return scene;
}

double UndistortionError(const Correspondence& corr, const MotionEstimate& estimate,
                         const RigConfig& rig, const ImagePoint& gt,
                         const PinholeCamera& camera) {
  const ImagePoint p = UndistortFeature(corr, estimate, rig);
  return camera.focal * (p.vec() - gt.vec()).norm();
}

ImagePoint InterpolatedGs(const Correspondence& corr, const RigConfig& rig) {
  const ImagePoint flipped = ImagePoint::FromHomogeneous(rig.AlignSecond(corr.second));
  return {0.5 * (corr.first.u + flipped.u), 0.5 * (corr.first.v + flipped.v)};
}

Texture Texture::Procedural(uint64_t seed, double scale) {
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Wave> waves;
  double total = 0.0;
  for (int k = 0; k < 12; ++k) {
    const double wavelength = scale * (1.0 + 3.0 * unit(rng));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const double kmag = 2.0 * std::numbers::pi / wavelength;
    const double amp = 0.5 + unit(rng);
    waves.push_back({kmag * std::cos(angle), kmag * std::sin(angle),
                     2.0 * std::numbers::pi * unit(rng), amp});
    total += amp;
  }
  Texture t;
  t.value = [waves, total](double x, double y) {
    double s = 0.0;
    for (const Wave& w : waves) s += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
    return 0.5 + 0.4 * s / total;
  };
  return t;
}

Raster RenderGs(const Texture& texture, const PinholeCamera& camera) {
  Raster out(camera.width, camera.height, 1);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const ImagePoint p = camera.ToNormalized(x, y);
      out.at(x, y) = static_cast<float>(texture.value(p.u, p.v));
    }
  }
  return out;
}

Raster RenderRs(const Texture& texture, double plane_depth, const MotionEstimate& motion,
                const RigConfig& rig, const PinholeCamera& camera, bool second_camera) {
  Raster out(camera.width, camera.height, 1, 0.0f, false);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      Vec3 X;
      if (!PlanePoint(plane_depth, motion, rig, camera, second_camera, x, y, &X)) continue;
      out.at(x, y) = static_cast<float>(texture.value(X.x() / plane_depth, X.y() / plane_depth));
      out.valid[out.index(x, y)] = 1;
    }
  }
  return out;
}

FlowField PlaneFlow(double plane_depth, const MotionEstimate& motion,
                    const RigConfig& rig, const PinholeCamera& camera,
                    bool from_second) {
  FlowField flow(camera.width, camera.height);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const size_t i = flow.index(x, y);
      flow.valid[i] = 0;
      Vec3 X;
      if (!PlanePoint(plane_depth, motion, rig, camera, from_second, x, y, &X)) continue;
      try {
        const ImagePoint q = ProjectRsCamera(X, motion, rig, !from_second);
        if (!camera.InFrame(q)) continue;
        flow.flow[i] = camera.ToPixel(q) - Vec2(x, y);
        flow.valid[i] = 1;
      } catch (const Error&) {
      }
    }
  }
  return flow;
}

}  // namespace rs2gs
