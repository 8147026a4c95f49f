#include "rs2gs/solvers.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "rs2gs/error.h"
#include "rs2gs/polysolve.h"
#include "rs2gs/rotation.h"
#include "rs2gs/trajectory.h"

namespace rs2gs {
namespace {

SolverResult SortedResult(std::vector<MotionEstimate> candidates,
                          std::vector<double> residuals) {
  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return residuals[a] < residuals[b]; });
  SolverResult out;
  for (size_t i : order) {
    out.candidates.push_back(candidates[i]);
    out.residuals.push_back(residuals[i]);
  }
  return out;
}

double RmsLinearResidual(std::span<const Correspondence> corrs,
                         const MotionEstimate& motion, const RigConfig& rig) {
  double sum = 0.0;
  for (const auto& c : corrs) {
    const double r = EpipolarResidual(c, motion, rig, true);
    sum += r * r;
  }
  return std::sqrt(sum / std::max<size_t>(corrs.size(), 1));
}

void RequireCount(std::span<const Correspondence> corrs, size_t n) {
  if (corrs.size() < n) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "solver needs " + std::to_string(n) + " correspondences");
  }
}

}  // namespace

InstantPosePair InstantPose(const MotionEstimate& motion, const RigConfig& rig,
                            double v, double v_prime) {
  const RowPose p1 = PoseAt(motion, rig.RowTime(v));
  const RowPose p2 = PoseAt(motion, rig.RowTime(v_prime));
  const RowPose rel = RelativePose(p1, p2, rig.relative_rotation, rig.baseline);
  return {rel.rotation, rel.translation};
}

Mat3 InstantEssential(const MotionEstimate& motion, const RigConfig& rig,
                      double v, double v_prime, bool linearized) {
  if (!linearized) {
    const InstantPosePair pose = InstantPose(motion, rig, v, v_prime);
    return SkewSymmetric<double>(pose.tvec) * pose.R;
  }
  const double tau = rig.RowTime(v);
  const double tau2 = rig.RowTime(v_prime);
  const Mat3& Rr = rig.relative_rotation;
  const Mat3 Ri = Rr * LinearizedRotation(motion.omega, tau2 - tau);
  return tau2 * SkewSymmetric<double>(Rr * motion.t) * Ri -
         tau * Ri * SkewSymmetric<double>(motion.t) +
         SkewSymmetric<double>(Rr * rig.baseline) * Ri;
}

double EpipolarResidual(const Correspondence& corr, const MotionEstimate& motion,
                        const RigConfig& rig, bool linearized) {
  const Mat3 E = InstantEssential(motion, rig, corr.first.v, corr.second.v, linearized);
  return corr.second.homogeneous().dot(E * corr.first.homogeneous());
}

double SampsonDistance(const Correspondence& corr, const MotionEstimate& motion,
                       const RigConfig& rig) {
  const Mat3 E = InstantEssential(motion, rig, corr.first.v, corr.second.v, false);
  const Vec3 x1 = corr.first.homogeneous();
  const Vec3 x2 = corr.second.homogeneous();
  const Vec3 l2 = E * x1;
  const Vec3 l1 = E.transpose() * x2;
  const double r = x2.dot(l2);
  const double den = l2.head<2>().squaredNorm() + l1.head<2>().squaredNorm();
  if (!(den > 0.0)) return 0.0;
  return std::abs(r) / std::sqrt(den);
}

Eigen::Matrix<double, 4, 4> EpipolarPencilRow(const Correspondence& corr,
                                              const RigConfig& rig) {
  const Vec3 u = corr.first.homogeneous();
  const Vec3 ub = rig.AlignSecond(corr.second);
  const double tau = rig.RowTime(corr.first.v);
  const double tau2 = rig.RowTime(corr.second.v);
  const double d = tau2 - tau;
  const Mat3 Su = SkewSymmetric<double>(u);
  const Mat3 Sb = SkewSymmetric<double>(ub);
  const Vec3 n = u.cross(ub);
  const Mat3 K = tau2 * Sb * Su - tau * Su * Sb;
  Eigen::Matrix<double, 4, 4> P;
  // c(w) = d (n + K w)
  P.block<1, 3>(0, 0) = d * n.transpose();
  P.block<3, 3>(1, 0) = d * K.transpose();
  // beta(w) = b . (n + d [ub]_x [u]_x w)
  const Vec3& b = rig.baseline;
  P(0, 3) = b.dot(n);
  P.block<3, 1>(1, 3) = d * (Sb * Su).transpose() * b;
  return P;
}

TranslationPoint SolveTx(const Correspondence& corr, const RigConfig& rig,
                         double row_tolerance) {
  const Vec3 ub = rig.AlignSecond(corr.second);
  const ImagePoint flipped = ImagePoint::FromHomogeneous(ub);
  if (std::abs(corr.first.v - flipped.v) > row_tolerance) {
    throw Error(ErrorCode::kInconsistentRows,
                "rows do not mirror each other; not a pure t_x pair");
  }
  const double d = rig.RowTime(corr.first.v) - rig.RowTime(corr.second.v);
  if (std::abs(d) < 1e-12) {
    throw Error(ErrorCode::kDegenerateRows, "pair on simultaneous rows");
  }
  TranslationPoint out;
  out.t_over_depth = Vec3((corr.first.u - flipped.u) / d, 0.0, 0.0);
  out.gs = {corr.first.u - rig.RowTime(corr.first.v) * out.t_over_depth.x(),
            corr.first.v};
  return out;
}

TranslationPoint SolveTxy(const Correspondence& corr, const RigConfig& rig) {
  const ImagePoint flipped = ImagePoint::FromHomogeneous(rig.AlignSecond(corr.second));
  const double d = rig.RowTime(corr.first.v) - rig.RowTime(corr.second.v);
  if (std::abs(d) < 1e-12) {
    throw Error(ErrorCode::kDegenerateRows, "pair on simultaneous rows");
  }
  TranslationPoint out;
  out.t_over_depth = Vec3((corr.first.u - flipped.u) / d,
                          (corr.first.v - flipped.v) / d, 0.0);
  const double tau = rig.RowTime(corr.first.v);
  out.gs = {corr.first.u - tau * out.t_over_depth.x(),
            corr.first.v - tau * out.t_over_depth.y()};
  return out;
}

SolverResult SolveTxyz(std::span<const Correspondence> corrs, const RigConfig& rig) {
  RequireCount(corrs, 2);
  Eigen::Matrix<double, 6, 7> A = Eigen::Matrix<double, 6, 7>::Zero();
  for (int i = 0; i < 2; ++i) {
    const Correspondence& c = corrs[i];
    const double d = rig.RowTime(c.first.v) - rig.RowTime(c.second.v);
    A.block<3, 3>(3 * i, 0) = -d * Mat3::Identity();
    A.block<3, 1>(3 * i, 3 + 2 * i) = c.first.homogeneous();
    A.block<3, 1>(3 * i, 4 + 2 * i) = -rig.AlignSecond(c.second);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  int null_dim = 1;
  for (int k = 0; k < sv.size(); ++k) {
    if (sv[k] <= 1e-10 * sv[0]) ++null_dim;
  }
  const Eigen::MatrixXd N = svd.matrixV().rightCols(null_dim);
  MotionEstimate m = MotionEstimate::Zero(MotionModel::kTxyz);
  m.scale_known = false;
  if (null_dim > 1) {
    if (N.topRows(3).norm() > 1e-9) {
      throw Error(ErrorCode::kRankDeficient, "translation null space is not 1-D");
    }
    return {{m}, {0.0}};
  }
  Eigen::VectorXd z = N.col(0);
  const Eigen::Vector4d lambda = z.segment<4>(3);
  if ((lambda.array() <= 0.0).all()) {
    z = -z;
  } else if (!(lambda.array() > 0.0).all()) {
    throw Error(ErrorCode::kCheiralityFailure, "depths of mixed sign");
  }
  z /= z[3];
  m.t = z.head<3>();
  // Per-constraint residual in the lambda_1 = 1 gauge.
  return {{m}, {(A * z).cwiseAbs().maxCoeff()}};
}

std::vector<Polynomial> RotationEquations(std::span<const Correspondence> corrs,
                                          const RigConfig& rig) {
  std::vector<Polynomial> eqs;
  for (const Correspondence& c : corrs) {
    const Vec3 u = c.first.homogeneous();
    const Vec3 ub = rig.AlignSecond(c.second).normalized();
    const double tau = rig.RowTime(c.first.v);
    const double tau2 = rig.RowTime(c.second.v);
    const Vec3 a1 = ub.unitOrthogonal();
    const Vec3 a2 = ub.cross(a1);
    for (const Vec3& a : {a1, a2}) {
      // a . (I + tau2 W)(I - tau W) u
      //   = a.u + (tau2 - tau) w.(u x a) - tau tau2 [(a.w)(u.w) - (a.u) w.w]
      Polynomial p;
      p[0] = a.dot(u);
      const Vec3 lin = (tau2 - tau) * u.cross(a);
      for (int k = 0; k < 3; ++k) p[1 + k] = lin[k];
      const Mat3 S = -tau * tau2 *
                     (0.5 * (a * u.transpose() + u * a.transpose()) -
                      a.dot(u) * Mat3::Identity());
      p[4] = S(0, 0);
      p[5] = 2.0 * S(0, 1);
      p[6] = 2.0 * S(0, 2);
      p[7] = S(1, 1);
      p[8] = 2.0 * S(1, 2);
      p[9] = S(2, 2);
      eqs.push_back(p);
    }
  }
  return eqs;
}

SolverResult SolveRotation(std::span<const Correspondence> corrs, const RigConfig& rig) {
  RequireCount(corrs, 2);
  const std::vector<Polynomial> eqs = RotationEquations(corrs.first(2), rig);
  // Static pairs: no constant terms, w = 0 is a root and the quadratic parts
  // share the factor u.w (roots at infinity), so answer directly.
  double constant = 0.0, scale = 0.0;
  for (const Polynomial& e : eqs) {
    constant = std::max(constant, std::abs(e[0]));
    scale = std::max(scale, e.MaxAbsCoefficient());
  }
  if (constant <= 1e-14 * scale) {
    return {{MotionEstimate::Zero(MotionModel::kRotation)}, {0.0}};
  }
  // Keep the three equations whose linear parts are most independent.
  Eigen::Matrix<double, 3, 4> L;
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 3; ++k) L(k, i) = eqs[i][1 + k];
  }
  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 3, 4>> qr(L);
  PolySystem sys;
  for (int j = 0; j < 3; ++j) sys.equations.push_back(eqs[qr.colsPermutation().indices()[j]]);
  std::vector<MotionEstimate> candidates;
  std::vector<double> residuals;
  for (const Vec3& w : Solve3Q3(sys)) {
    MotionEstimate m = MotionEstimate::Zero(MotionModel::kRotation);
    m.omega = w;
    double r = 0.0;
    for (const auto& e : eqs) r += std::pow(e.Evaluate(w), 2);
    candidates.push_back(m);
    residuals.push_back(std::sqrt(r / eqs.size()));
  }
  return SortedResult(std::move(candidates), std::move(residuals));
}

SolverResult Solve6Dof(std::span<const Correspondence> corrs, const RigConfig& rig) {
  RequireCount(corrs, 5);
  AffinePencil M(5, 3);
  for (int i = 0; i < 5; ++i) {
    const auto P = EpipolarPencilRow(corrs[i], rig);
    // t = (1 - x, x, y): t.c = x (c2 - c1) + y c3 + c1
    M.at(i, 0) = P.col(1) - P.col(0);
    M.at(i, 1) = P.col(2);
    M.at(i, 2) = P.col(0);
  }
  // Static data (aligned second point equals the first everywhere): the
  // minors are homogeneous in w, so w = 0 is a multiple root and any t fits.
  double constant = 0.0, scale = 0.0;
  for (const Eigen::Vector4d& e : M.entries) {
    constant = std::max(constant, std::abs(e[0]));
    scale = std::max(scale, e.cwiseAbs().maxCoeff());
  }
  if (constant <= 1e-14 * scale) {
    MotionEstimate m = MotionEstimate::Zero(MotionModel::kSixDof);
    m.scale_known = false;
    m.t = Vec3(1.0, 0.0, 0.0);
    return {{m}, {RmsLinearResidual(corrs.first(5), m, rig)}};
  }
  const std::vector<PencilRoot> roots = SolvePencilSystem(M);
  std::vector<MotionEstimate> candidates;
  std::vector<double> residuals;
  for (const PencilRoot& root : roots) {
    const Eigen::VectorXd& z = root.null_vector;
    if (std::abs(z[2]) < 1e-10) continue;
    const double x = z[0] / z[2], y = z[1] / z[2];
    MotionEstimate m = MotionEstimate::Zero(MotionModel::kSixDof);
    m.scale_known = false;
    m.omega = root.w;
    m.t = Vec3(1.0 - x, x, y);
    m = NormalizeGauge(m);
    candidates.push_back(m);
    residuals.push_back(RmsLinearResidual(corrs.first(5), m, rig));
  }
  if (!roots.empty() && candidates.empty()) {
    throw Error(ErrorCode::kGaugeDegenerate,
                "every root has t_x + t_y = 0 (pure forward motion?)");
  }
  return SortedResult(std::move(candidates), std::move(residuals));
}

SolverResult Solve6DofBaseline(std::span<const Correspondence> corrs,
                               const RigConfig& rig) {
  RequireCount(corrs, 6);
  if (rig.baseline.squaredNorm() == 0.0) {
    SolverResult r = Solve6Dof(corrs.first(5), rig);
    for (auto& m : r.candidates) m.model = MotionModel::kSixDofBaseline;
    return r;
  }
  AffinePencil M(6, 4);
  for (int i = 0; i < 6; ++i) {
    const auto P = EpipolarPencilRow(corrs[i], rig);
    for (int k = 0; k < 4; ++k) M.at(i, k) = P.col(k);
  }
  std::vector<MotionEstimate> candidates;
  std::vector<double> residuals;
  for (const BaselineRoot& root : SolveBaselineSystem(M)) {
    MotionEstimate m = MotionEstimate::Zero(MotionModel::kSixDofBaseline);
    m.omega = root.omega;
    m.t = root.t;
    candidates.push_back(m);
    residuals.push_back(RmsLinearResidual(corrs.first(6), m, rig));
  }
  return SortedResult(std::move(candidates), std::move(residuals));
}

int MinimalSampleSize(MotionModel model) {
  switch (model) {
    case MotionModel::kTx:
    case MotionModel::kTxy: return 1;
    case MotionModel::kTxyz:
    case MotionModel::kRotation: return 2;
    case MotionModel::kSixDof: return 5;
    case MotionModel::kSixDofBaseline: return 6;
  }
  return 5;
}

SolverResult SolveMinimal(MotionModel model, std::span<const Correspondence> corrs,
                          const RigConfig& rig) {
  switch (model) {
    case MotionModel::kTx:
    case MotionModel::kTxy: {
      RequireCount(corrs, 1);
      const TranslationPoint p =
          model == MotionModel::kTx
              ? SolveTx(corrs[0], rig, std::numeric_limits<double>::infinity())
              : SolveTxy(corrs[0], rig);
      MotionEstimate m = MotionEstimate::Zero(model);
      m.scale_known = false;
      m.t = p.t_over_depth;
      return {{NormalizeGauge(m)}, {0.0}};
    }
    case MotionModel::kTxyz: return SolveTxyz(corrs, rig);
    case MotionModel::kRotation: return SolveRotation(corrs, rig);
    case MotionModel::kSixDof: return Solve6Dof(corrs, rig);
    case MotionModel::kSixDofBaseline: return Solve6DofBaseline(corrs, rig);
  }
  return {};
}

}  // namespace rs2gs
