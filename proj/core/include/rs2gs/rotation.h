#ifndef RS2GS_ROTATION_H_
#define RS2GS_ROTATION_H_

#include <cmath>

#include <Eigen/Core>

#include "rs2gs/types.h"

namespace rs2gs {

template <typename T>
Eigen::Matrix<T, 3, 3> SkewSymmetric(const Eigen::Matrix<T, 3, 1>& w) {
  Eigen::Matrix<T, 3, 3> K;
  K << T(0), -w(2), w(1),
       w(2), T(0), -w(0),
       -w(1), w(0), T(0);
  return K;
}

// exp([aa]_x) by the Rodrigues formula. Templated so that the refinement
// residuals can be differentiated with dual numbers; the small-angle branch
// keeps first derivatives exact at the origin.
template <typename T>
Eigen::Matrix<T, 3, 3> AngleAxisToRotation(const Eigen::Matrix<T, 3, 1>& aa) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Eigen::Matrix<T, 3, 3> K = SkewSymmetric(aa);
  const Eigen::Matrix<T, 3, 3> I = Eigen::Matrix<T, 3, 3>::Identity();
  const T theta2 = aa.squaredNorm();
  if (theta2 > T(1e-20)) {
    const T theta = sqrt(theta2);
    const T half_sin = sin(theta / T(2));
    const T a = sin(theta) / theta;
    const T b = T(2) * half_sin * half_sin / theta2;
    return I + a * K + b * K * K;
  }
  return I + K + T(0.5) * K * K;
}

// R_w(alpha) = exp(alpha [w]_x). A zero axis gives the identity.
Mat3 RotationFromAxisAngle(const Vec3& w, double alpha);

// First-order rotation I + alpha [w]_x; not orthonormal in general.
Mat3 LinearizedRotation(const Vec3& w, double alpha);

// Inverse of AngleAxisToRotation for angles below pi.
Vec3 RotationToAngleAxis(const Mat3& R);

}  // namespace rs2gs

#endif  // RS2GS_ROTATION_H_
