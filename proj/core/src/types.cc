#include "rs2gs/types.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rs2gs/error.h"
#include "rs2gs/rotation.h"
#include "rs2gs/trajectory.h"

namespace rs2gs {

bool ImagePoint::finite() const { return std::isfinite(u) && std::isfinite(v); }

void RigConfig::Validate() const {
  const Mat3& R = relative_rotation;
  if (!R.allFinite() || !baseline.allFinite() ||
      !std::isfinite(row_time_origin)) {
    throw Error(ErrorCode::kInvalidArgument, "rig has non-finite entries");
  }
  if ((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12 ||
      std::abs(R.determinant() - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument,
                "relative rotation is not orthonormal with det 1");
  }
}

std::string_view MotionModelTag(MotionModel model) {
  switch (model) {
    case MotionModel::kTx: return "TX";
    case MotionModel::kTxy: return "TXY";
    case MotionModel::kTxyz: return "TXYZ";
    case MotionModel::kRotation: return "ROT";
    case MotionModel::kSixDof: return "SIXDOF";
    case MotionModel::kSixDofBaseline: return "SIXDOF_BASELINE";
  }
  return "SIXDOF";
}

bool ParseMotionModelTag(std::string_view tag, MotionModel* model) {
  for (MotionModel m :
       {MotionModel::kTx, MotionModel::kTxy, MotionModel::kTxyz,
        MotionModel::kRotation, MotionModel::kSixDof,
        MotionModel::kSixDofBaseline}) {
    if (MotionModelTag(m) == tag) {
      *model = m;
      return true;
    }
  }
  return false;
}

MotionEstimate NormalizeGauge(const MotionEstimate& motion) {
  if (motion.scale_known) return motion;
  if (motion.model != MotionModel::kSixDof && motion.model != MotionModel::kSixDofBaseline &&
      motion.model != MotionModel::kTxy) {
    return motion;
  }
  MotionEstimate out = motion;
  const double norm = motion.t.norm();
  if (norm == 0.0) return out;
  const double sum = motion.t.x() + motion.t.y();
  if (std::abs(sum) > 1e-3 * norm) {
    out.t = motion.t / sum;
  } else {
    out.t = motion.t / norm;
  }
  return out;
}

MotionEstimate ConstrainToModel(const MotionEstimate& motion) {
  MotionEstimate out = motion;
  switch (motion.model) {
    case MotionModel::kTx:
      out.omega.setZero();
      out.t.y() = 0.0;
      out.t.z() = 0.0;
      break;
    case MotionModel::kTxy:
      out.omega.setZero();
      out.t.z() = 0.0;
      break;
    case MotionModel::kTxyz:
      out.omega.setZero();
      break;
    case MotionModel::kRotation:
      out.t.setZero();
      break;
    case MotionModel::kSixDof:
    case MotionModel::kSixDofBaseline:
      break;
  }
  return out;
}

Mat3 RotationFromAxisAngle(const Vec3& w, double alpha) {
  return AngleAxisToRotation<double>(alpha * w);
}

Mat3 LinearizedRotation(const Vec3& w, double alpha) {
  return Mat3::Identity() + alpha * SkewSymmetric<double>(w);
}

Vec3 RotationToAngleAxis(const Mat3& R) {
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(c);
  const Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < 1e-8) return 0.5 * axis;
  return theta / (2.0 * std::sin(theta)) * axis;
}

KnotMotion KnotMotion::Uniform(const MotionEstimate& motion, int knot_count,
                               double row_min, double row_max) {
  if (knot_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "knot_count must be >= 1");
  }
  KnotMotion km;
  for (int k = 0; k < knot_count; ++k) {
    const double s = knot_count == 1 ? 0.5 : double(k) / (knot_count - 1);
    km.knots.push_back({row_min + s * (row_max - row_min), motion.omega, motion.t});
  }
  return km;
}

void KnotMotion::Validate() const {
  if (knots.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "knot motion without knots");
  }
  for (size_t k = 1; k < knots.size(); ++k) {
    if (!(knots[k].row > knots[k - 1].row)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "knot rows must be strictly increasing");
    }
  }
}

void KnotMotion::Locate(double row, int* left, double* alpha) const {
  const int n = static_cast<int>(knots.size());
  if (n == 1 || row <= knots.front().row) {
    *left = 0;
    *alpha = 0.0;
    return;
  }
  if (row >= knots.back().row) {
    *left = n - 2;
    *alpha = 1.0;
    return;
  }
  int k = 0;
  while (k + 1 < n - 1 && row > knots[k + 1].row) ++k;
  *left = k;
  *alpha = (row - knots[k].row) / (knots[k + 1].row - knots[k].row);
}

void KnotMotion::MotionAt(double row, Vec3* omega, Vec3* t) const {
  int k;
  double a;
  Locate(row, &k, &a);
  if (knots.size() == 1) {
    *omega = knots[0].omega;
    *t = knots[0].t;
    return;
  }
  *omega = knots[k].omega + a * (knots[k + 1].omega - knots[k].omega);
  *t = knots[k].t + a * (knots[k + 1].t - knots[k].t);
}

RowPose KnotMotion::PoseAt(double tau) const {
  Vec3 omega, t;
  MotionAt(tau, &omega, &t);
  return ConstantVelocityPose<double>(omega, t, tau);
}

RowPose PoseAt(const MotionEstimate& motion, double tau) {
  return ConstantVelocityPose<double>(motion.omega, motion.t, tau);
}

}  // namespace rs2gs
