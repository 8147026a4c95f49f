#ifndef RS2GS_TRAJECTORY_H_
#define RS2GS_TRAJECTORY_H_

#include <vector>

#include "rs2gs/rotation.h"
#include "rs2gs/types.h"

namespace rs2gs {

// Rig pose at one row time: a world point X maps to rotation * X + translation
// in camera 1 (camera 2 additionally applies R_r and the baseline).
template <typename T>
struct RowPoseT {
  Eigen::Matrix<T, 3, 3> rotation;
  Eigen::Matrix<T, 3, 1> translation;
};
using RowPose = RowPoseT<double>;

template <typename T>
RowPoseT<T> ConstantVelocityPose(const Eigen::Matrix<T, 3, 1>& omega,
                                 const Eigen::Matrix<T, 3, 1>& t, T tau) {
  return {AngleAxisToRotation<T>(tau * omega), tau * t};
}

// Relative pose mapping camera-1 coordinates at row time tau1 to camera-2
// coordinates at row time tau2, for arbitrary rig poses.
template <typename T>
RowPoseT<T> RelativePose(const RowPoseT<T>& pose1, const RowPoseT<T>& pose2,
                         const Eigen::Matrix<T, 3, 3>& relative_rotation,
                         const Eigen::Matrix<T, 3, 1>& baseline) {
  RowPoseT<T> rel;
  rel.rotation =
      relative_rotation * pose2.rotation * pose1.rotation.transpose();
  rel.translation = relative_rotation * (pose2.translation + baseline) -
                    rel.rotation * pose1.translation;
  return rel;
}

struct Knot {
  double row = 0.0;
  Vec3 omega = Vec3::Zero();
  Vec3 t = Vec3::Zero();
};

// Piecewise-linear motion over the row axis. The pose at row time tau is
// (exp(tau [omega(tau)]_x), tau * t(tau)) with omega, t interpolated between
// knots and held constant beyond the outer knots.
struct KnotMotion {
  std::vector<Knot> knots;

  // Evenly spaced knots over [row_min, row_max], all set to `motion`.
  static KnotMotion Uniform(const MotionEstimate& motion, int knot_count,
                            double row_min, double row_max);

  // Throws InvalidArgument unless rows are strictly increasing.
  void Validate() const;

  // Interpolation weights: index of the left knot and the blend factor.
  void Locate(double row, int* left, double* alpha) const;

  void MotionAt(double row, Vec3* omega, Vec3* t) const;
  RowPose PoseAt(double tau) const;
};

// Pose of a constant-velocity estimate at row time tau.
RowPose PoseAt(const MotionEstimate& motion, double tau);

}  // namespace rs2gs

#endif  // RS2GS_TRAJECTORY_H_
