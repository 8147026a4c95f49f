#ifndef RS2GS_EXPERIMENT_H_
#define RS2GS_EXPERIMENT_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "rs2gs/io.h"
#include "rs2gs/robust.h"
#include "rs2gs/synth.h"
#include "rs2gs/types.h"

namespace rs2gs {

// CLI/CSV solver tags: tx, txy, txyz, rot, 6dof, 6dof-baseline.
std::string_view SolverTag(MotionModel model);
bool ParseSolverTag(std::string_view tag, MotionModel* model);

// v1/v2/v3 robust variants; kInterp is the err-interp baseline (midpoint of
// the two observations, no solver).
enum class Variant { kV1, kV2, kV3, kInterp };
std::string_view VariantTag(Variant variant);  // v1, v2, v3, interp
bool ParseVariantTag(std::string_view tag, Variant* variant);

struct TrialSpec {
  MotionModel solver = MotionModel::kSixDof;
  Variant variant = Variant::kV2;
  RansacConfig ransac;
};

struct TrialResult {
  // Undistortion error (pixels) of every non-outlier correspondence.
  std::vector<double> errors_px;
  double runtime_us = 0.0;
  // The estimator threw (e.g. NoModelFound); errors are those of the zero
  // motion, i.e. the raw rolling-shutter displacement.
  bool failed = false;
};

// Fits the scene with the spec and scores the undistorted first-image
// points against the scene's GS projections. Scale-free estimates are
// undistorted without the rig baseline, as they were estimated.
TrialResult RunTrial(const SyntheticScene& scene, const TrialSpec& spec);

struct ErrorStats {
  double median = 0.0;
  double mean = 0.0;
  double p90 = 0.0;
};
// Order statistics by linear interpolation between closest ranks. Empty
// input gives NaN.
ErrorStats Summarize(std::vector<double> values);

struct SolverVariant {
  MotionModel solver;
  Variant variant;
};

struct SweepConfig {
  // Velocity sweep: one motion level drives both velocities, omega = level
  // deg/frame and |t| = level / max_omega_deg * max_trans_frac.
  std::vector<double> omega_levels_deg = {0, 5, 10, 15, 20, 25, 30};
  double max_omega_deg = 30.0;
  double max_trans_frac = 0.1;
  // Baseline sweep at a fixed motion level; |b| = ratio * min depth along x.
  std::vector<double> baseline_ratios = {0.0, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05};
  double baseline_omega_deg = 15.0;
  double baseline_trans_frac = 0.05;

  std::vector<SolverVariant> runs;  // empty: DefaultVelocityRuns / DefaultBaselineRuns
  int seeds = 20;                   // one record per seed and sweep point
  int scenes_per_seed = 5;
  int points = 100;
  double sigma_px = 0.5;
  double outlier_fraction = 0.0;
  double min_depth = 4.0;
  double max_depth = 12.0;
  PinholeCamera camera;
  RansacConfig ransac;
  uint64_t seed = 0;
  bool timing = false;  // runtime_us stays 0 unless set (keeps output bit-reproducible)
  int threads = 0;      // 0: hardware concurrency
};

// 6dof/rot/txyz/txy in v1 and v2, v3 from txyz and txy, and err-interp.
std::vector<SolverVariant> DefaultVelocityRuns();
// Zero-baseline solvers (v2), the known-baseline solver (v2), err-interp.
std::vector<SolverVariant> DefaultBaselineRuns();

// Scene seed of (sweep point, seed index, scene index); identical across
// runs so every solver sees the same scenes.
uint64_t SceneSeed(uint64_t base, int point, int seed_index, int scene);

// Records ordered by sweep point, then seed, then run. Deterministic for a
// fixed config regardless of thread count.
std::vector<BenchmarkRecord> VelocitySweep(const SweepConfig& config);
std::vector<BenchmarkRecord> BaselineSweep(const SweepConfig& config);

// Every numeric setting of the sweep as `# key=value` metadata.
Metadata SweepMetadata(const SweepConfig& config);

}  // namespace rs2gs

#endif  // RS2GS_EXPERIMENT_H_
