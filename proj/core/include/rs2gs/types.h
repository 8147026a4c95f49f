#ifndef RS2GS_TYPES_H_
#define RS2GS_TYPES_H_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace rs2gs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// A calibrated image observation. The row coordinate v doubles as the
// capture time of the observation: rows are read out at unit speed in
// normalized coordinates, and v = 0 is the principal-point row.
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;

  Vec3 homogeneous() const { return Vec3(u, v, 1.0); }
  Vec2 vec() const { return Vec2(u, v); }
  bool finite() const;

  static ImagePoint FromHomogeneous(const Vec3& x) {
    return {x.x() / x.z(), x.y() / x.z()};
  }
};

// `second` is expressed in camera 2's own frame; the relative rotation of the
// rig is never baked into stored coordinates.
struct Correspondence {
  ImagePoint first;
  ImagePoint second;
};

struct RigConfig {
  Mat3 relative_rotation = Eigen::Vector3d(-1.0, -1.0, 1.0).asDiagonal();
  // Camera 2 projects as [R_r R(v') | R_r (v' t + baseline)].
  Vec3 baseline = Vec3::Zero();
  double row_time_origin = 0.0;

  // Throws InvalidArgument unless relative_rotation is a rotation to 1e-12.
  void Validate() const;

  double RowTime(double v) const { return v - row_time_origin; }

  // Camera-2 observation rotated back into camera 1's axes and
  // dehomogenized: the "flipped" point used by the translation solvers.
  Vec3 AlignSecond(const ImagePoint& second) const {
    return relative_rotation.transpose() * second.homogeneous();
  }
};

enum class MotionModel { kTx, kTxy, kTxyz, kRotation, kSixDof, kSixDofBaseline };

std::string_view MotionModelTag(MotionModel model);
// Parses "TX", "TXY", "TXYZ", "ROT", "SIXDOF", "SIXDOF_BASELINE".
bool ParseMotionModelTag(std::string_view tag, MotionModel* model);

// Angular velocity omega (axis-angle, radians per normalized row) and
// translational velocity t (scene units per normalized row).
struct MotionEstimate {
  Vec3 omega = Vec3::Zero();
  Vec3 t = Vec3::Zero();
  bool scale_known = true;
  MotionModel model = MotionModel::kSixDof;

  static MotionEstimate Zero(MotionModel model = MotionModel::kSixDof) {
    MotionEstimate m;
    m.model = model;
    return m;
  }
};

// Applies the translation gauge of scale-free SIXDOF(_BASELINE) and TXY
// estimates: t_x + t_y = 1 when that sum is well conditioned, unit norm
// otherwise.
// Other models and scale-known estimates are returned unchanged.
MotionEstimate NormalizeGauge(const MotionEstimate& motion);

// Zeroes components the model tag excludes (e.g. TXY => omega = 0, t_z = 0).
MotionEstimate ConstrainToModel(const MotionEstimate& motion);

// Relative pose between row v of camera 1 and row v' of camera 2.
struct InstantPosePair {
  Mat3 R = Mat3::Identity();
  Vec3 tvec = Vec3::Zero();
};

}  // namespace rs2gs

#endif  // RS2GS_TYPES_H_
