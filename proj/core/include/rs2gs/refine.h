#ifndef RS2GS_REFINE_H_
#define RS2GS_REFINE_H_

#include <span>

#include <Eigen/Core>

#include "rs2gs/trajectory.h"
#include "rs2gs/types.h"

namespace rs2gs {

// Damped Gauss-Newton: damping x10 on a rejected step, /10 on an accepted
// one. Stops when the relative cost decrease of an accepted step falls below
// relative_tolerance, the step is below 1e-12 relative, or no damping gives
// descent; hitting max_iterations leaves converged = false and returns the
// best parameters seen.
struct RefineOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-10;
  double initial_damping = 1e-3;
  // > 0: truncated quadratic, residuals beyond this (normalized units) cost
  // truncation^2 and carry no gradient. Used inside LO-RANSAC.
  double truncation = 0.0;
};

struct RefineResult {
  MotionEstimate motion;
  double initial_cost = 0.0;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct KnotRefineResult {
  KnotMotion motion;
  double initial_cost = 0.0;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Sum of squared image-1 reprojection errors u - pi(H^T u') with
// H = R_r R_w(v') R_w(v)^T (exact rotations). Residuals are stacked (du, dv)
// per correspondence; the Jacobian is with respect to omega (n x 3).
double RotationCost(std::span<const Correspondence> corrs, const RigConfig& rig,
                    const Vec3& omega, Eigen::VectorXd* residuals = nullptr,
                    Eigen::MatrixXd* jacobian = nullptr);

// Sum of squared signed Sampson distances under the exact instantaneous E of
// each row pair. Jacobian columns: omega, then t.
double SampsonCost(std::span<const Correspondence> corrs, const RigConfig& rig,
                   const Vec3& omega, const Vec3& t, Eigen::VectorXd* residuals = nullptr,
                   Eigen::MatrixXd* jacobian = nullptr);

// Multi-knot versions of the two costs; rotation_only selects the first.
// Jacobian columns: knot by knot, omega then (unless rotation_only) t.
double KnotCost(std::span<const Correspondence> corrs, const RigConfig& rig,
                const KnotMotion& motion, bool rotation_only,
                Eigen::VectorXd* residuals = nullptr, Eigen::MatrixXd* jacobian = nullptr);

// Requires init.model == ROT (InvalidArgument otherwise).
RefineResult RefineRotation(std::span<const Correspondence> corrs, const MotionEstimate& init,
                            const RigConfig& rig = {}, const RefineOptions& options = {});

// Sampson refinement of the translation-bearing models. Components the model
// excludes stay fixed (TX: t_x, TXY: t_x, t_y, TXYZ: t, SIXDOF*: omega and t).
// Scale-free estimates are taken without the rig baseline (their t has no
// scale to combine it with) and re-gauged after every step: t_x + t_y = 1
// for SIXDOF and TXY, the initial |t| for TX and TXYZ.
RefineResult Refine6Dof(std::span<const Correspondence> corrs, const MotionEstimate& init,
                        const RigConfig& rig = {}, const RefineOptions& options = {});

// RefineRotation for ROT, Refine6Dof otherwise.
RefineResult Refine(std::span<const Correspondence> corrs, const MotionEstimate& init,
                    const RigConfig& rig = {}, const RefineOptions& options = {});

// Knots evenly spaced over [row_min, row_max] (row times), all initialized
// to init; minimizes the rotation cost for ROT and the Sampson cost
// otherwise. knot_count in [1, 5].
KnotRefineResult RefineMultiKnot(std::span<const Correspondence> corrs,
                                 const MotionEstimate& init, int knot_count, double row_min,
                                 double row_max, const RigConfig& rig = {},
                                 const RefineOptions& options = {});

}  // namespace rs2gs

#endif  // RS2GS_REFINE_H_
