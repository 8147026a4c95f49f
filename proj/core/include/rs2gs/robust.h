#ifndef RS2GS_ROBUST_H_
#define RS2GS_ROBUST_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rs2gs/camera.h"
#include "rs2gs/types.h"

namespace rs2gs {

// EPIPOLAR_SAMPSON: |Sampson distance| under the exact instantaneous E.
// RS_HOMOGRAPHY: image-1 reprojection error of the row-pair rotation; the
// only meaningful choice for ROT, whose E vanishes.
enum class Scoring { kEpipolarSampson, kRsHomography };

Scoring DefaultScoring(MotionModel model);

// Residual (normalized units) of one correspondence. Scale-free estimates
// are scored without the rig baseline.
double ScoringResidual(const Correspondence& corr, const MotionEstimate& motion,
                       const RigConfig& rig, Scoring scoring);

struct RansacConfig {
  int iterations = 200;
  double inlier_threshold = 2e-3;  // 2 px at f = 1000
  int local_opt_rounds = 5;
  uint64_t seed = 0;
  std::optional<Scoring> scoring;  // default: DefaultScoring(model)

  // Throws InvalidArgument unless iterations >= 1 and threshold > 0.
  void Validate() const;
};

struct RobustEstimate {
  MotionEstimate motion;
  std::vector<uint8_t> inlier_mask;
  int inlier_count = 0;
  // MSAC cost: sum over all correspondences of min(r^2, threshold^2).
  double score = 0.0;
  // Best score after each iteration (non-increasing).
  std::vector<double> trace;
  int degenerate_samples = 0;
};

// v1: per correspondence, (minimal - 1) random partners, solve, undistort
// that correspondence alone. No outlier rejection. TX/TXY use the
// per-correspondence closed form; multiple candidates are ranked by the
// residual on the minimal set, ties by smallest |omega|. A correspondence
// whose samples all fail (10 draws) keeps its first observation.
struct LocalFit {
  std::vector<MotionEstimate> motions;
  std::vector<ImagePoint> undistorted;
};
LocalFit FitLocalV1(std::span<const Correspondence> corrs, MotionModel model,
                    const RigConfig& rig, uint64_t seed);

// v2: LO-RANSAC over a sample schedule drawn up front from the seed. A new
// best hypothesis is locally optimized: up to local_opt_rounds refinements
// (truncated at the threshold) on its inliers, re-thresholded after each.
// Throws InsufficientCorrespondences, NoModelFound.
RobustEstimate FitGlobalV2(std::span<const Correspondence> corrs, MotionModel model,
                           const RigConfig& rig, const RansacConfig& config);

// v3: samples with init_model's solver, scores and locally optimizes every
// hypothesis as a full 6DOF motion. init_model = SIXDOF is exactly v2.
// ROT is rejected (InvalidArgument): its hypotheses have t = 0.
RobustEstimate FitHybridV3(std::span<const Correspondence> corrs, MotionModel init_model,
                           const RigConfig& rig, const RansacConfig& config);

struct PreselectConfig {
  int target_count = 500;
  double center_band_fraction = 0.05;  // half-width, fraction of image height
  int time_bins = 4;                   // over |v - v'|
  int displacement_bins = 4;           // over |u - R_r^T u'| (static map removed)
  uint64_t seed = 0;
};

// Balanced subset of a dense correspondence set: drops the center band
// (|v| below the half-width), bins the rest on an equal-width grid of
// temporal displacement x displacement magnitude and draws the target count
// as evenly as the strata allow. Returns sorted indices into corrs.
// Throws EmptyAfterFiltering.
std::vector<size_t> PreselectCorrespondences(std::span<const Correspondence> corrs,
                                             const PinholeCamera& camera,
                                             const RigConfig& rig = {},
                                             const PreselectConfig& config = {});

}  // namespace rs2gs

#endif  // RS2GS_ROBUST_H_
