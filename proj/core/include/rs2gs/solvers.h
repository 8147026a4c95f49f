#ifndef RS2GS_SOLVERS_H_
#define RS2GS_SOLVERS_H_

#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rs2gs/polynomial.h"
#include "rs2gs/types.h"

namespace rs2gs {

// Relative pose between row v of camera 1 and row v' of camera 2:
// R = R_r R_w(v') R_w(v)^T, t = R_r (v' t + b) - R v t (row times relative to
// the rig's time origin).
InstantPosePair InstantPose(const MotionEstimate& motion, const RigConfig& rig,
                            double v, double v_prime);

// E(v, v') such that u'^T E u = 0. Exact: [t_rel]_x R_rel. Linearized:
// v' [R_r t]_x R_i - v R_i [t]_x + [R_r b]_x R_i with
// R_i = R_r (I + (v' - v) [w]_x).
Mat3 InstantEssential(const MotionEstimate& motion, const RigConfig& rig,
                      double v, double v_prime, bool linearized);

double EpipolarResidual(const Correspondence& corr, const MotionEstimate& motion,
                        const RigConfig& rig, bool linearized);

// Sampson distance (normalized units) with the exact instantaneous E.
double SampsonDistance(const Correspondence& corr, const MotionEstimate& motion,
                       const RigConfig& rig);

// Linearized epipolar residual as an affine form in t with w-affine
// coefficients: r = t . c(w) + beta(w). Column k < 3 holds c_k, column 3
// holds beta; each entry is (const, d/dw_x, d/dw_y, d/dw_z).
Eigen::Matrix<double, 4, 4> EpipolarPencilRow(const Correspondence& corr,
                                              const RigConfig& rig);

struct SolverResult {
  std::vector<MotionEstimate> candidates;
  std::vector<double> residuals;  // ascending
};

// GS point and velocity-to-depth ratio of one correspondence.
struct TranslationPoint {
  ImagePoint gs;
  Vec3 t_over_depth = Vec3::Zero();
};

// Pure t_x: GS point by interpolating x between the first observation and the
// R_r-aligned second one; throws InconsistentRows when |v + v'| exceeds
// row_tolerance (the rows must mirror each other) and DegenerateRows at v = 0.
TranslationPoint SolveTx(const Correspondence& corr, const RigConfig& rig = {},
                         double row_tolerance = 1e-6);

// Pure (t_x, t_y): closed form with lambda = lambda'. Throws DegenerateRows
// when v = v' (simultaneous rows carry no motion signal).
TranslationPoint SolveTxy(const Correspondence& corr, const RigConfig& rig = {});

// Full translation up to scale from two correspondences via the 6x7 null
// space, gauge lambda_1 = 1, sign fixed so all depths are positive.
SolverResult SolveTxyz(std::span<const Correspondence> corrs, const RigConfig& rig = {});

// The four quadrics in w of two pure-rotation correspondences: for each,
// a_k . (I + v'[w]_x)(I - v[w]_x) u = 0 over an orthonormal pair a_k
// perpendicular to the aligned second point.
std::vector<Polynomial> RotationEquations(std::span<const Correspondence> corrs,
                                          const RigConfig& rig);
SolverResult SolveRotation(std::span<const Correspondence> corrs,
                           const RigConfig& rig = {});

// Linearized 6DOF, t = (1 - x, x, y) up to scale, <= 10 candidates.
SolverResult Solve6Dof(std::span<const Correspondence> corrs,
                       const RigConfig& rig = {});

// Known baseline, metric t, <= 20 candidates; b = 0 falls back to Solve6Dof.
SolverResult Solve6DofBaseline(std::span<const Correspondence> corrs,
                               const RigConfig& rig);

int MinimalSampleSize(MotionModel model);

// Dispatches on the model. TX and TXY return one candidate from the first
// correspondence (t = t/lambda of that point, TX ignores row mismatch).
SolverResult SolveMinimal(MotionModel model, std::span<const Correspondence> corrs,
                          const RigConfig& rig);

}  // namespace rs2gs

#endif  // RS2GS_SOLVERS_H_
