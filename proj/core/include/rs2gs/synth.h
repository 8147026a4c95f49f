#ifndef RS2GS_SYNTH_H_
#define RS2GS_SYNTH_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "rs2gs/camera.h"
#include "rs2gs/raster.h"
#include "rs2gs/trajectory.h"
#include "rs2gs/types.h"

namespace rs2gs {

struct ProjectedPair {
  ImagePoint first;
  ImagePoint second;  // camera 2's own frame
};

// kExact: exp-map rotations in both cameras. kLinearized: camera 1 exact,
// camera 2 moved onto the first-order constraint the minimal solvers use
// (the linearized RS homography when t = 0 and b = 0, the linearized
// epipolar constraint otherwise), so ground truth is an exact solver root.
enum class GenerationMode { kExact, kLinearized };

struct ProjectionOptions {
  GenerationMode mode = GenerationMode::kExact;
  int max_iterations = 50;
  double tolerance = 1e-14;  // rows, normalized
};

// Global-shutter projection of X into both cameras (pose at row time 0).
ProjectedPair ProjectGs(const Vec3& X, const RigConfig& rig);

// Rolling-shutter projection: in each camera the row v solves
// v = pi(pose(v) X)_y, iterated from the GS row.
ProjectedPair ProjectRs(const Vec3& X, const MotionEstimate& motion,
                        const RigConfig& rig, const ProjectionOptions& options = {});
// One camera only (exact mode): camera 2 when `second`.
ImagePoint ProjectRsCamera(const Vec3& X, const MotionEstimate& motion,
                           const RigConfig& rig, bool second,
                           const ProjectionOptions& options = {});
// Time-varying motion; always exact mode.
ProjectedPair ProjectRs(const Vec3& X, const KnotMotion& motion,
                        const RigConfig& rig, const ProjectionOptions& options = {});

enum class SceneMotion { kRotation, kTx, kTxy, kTxyz, kGeneral };

// Velocities are given per frame (one frame = camera.frame_rows() rows) and
// converted to per-row units: omega = deg2rad(omega_deg) / frame_rows, |t| =
// trans_frac * min_depth / frame_rows.
struct SceneConfig {
  int num_points = 100;
  SceneMotion motion = SceneMotion::kGeneral;
  double omega_deg = 0.0;   // angular speed per frame
  double trans_frac = 0.0;  // translation per frame, fraction of min depth
  // Zero => random direction drawn from the seed.
  Vec3 omega_axis = Vec3::Zero();
  Vec3 t_direction = Vec3::Zero();
  double min_depth = 4.0;
  double max_depth = 12.0;
  double sigma_px = 0.0;
  double outlier_fraction = 0.0;
  double baseline_ratio = 0.0;  // |b| / min depth
  Vec3 baseline_direction = Vec3::UnitX();
  GenerationMode mode = GenerationMode::kExact;
  PinholeCamera camera;
  // When set, used instead of the procedural point shell.
  std::vector<Vec3> points;
  uint64_t seed = 0;
};

struct SyntheticScene {
  std::vector<Vec3> points;
  MotionEstimate motion;  // ground truth, scale known
  RigConfig rig;
  PinholeCamera camera;
  double noise_sigma_px = 0.0;
  double min_depth = 0.0;
  uint64_t seed = 0;
  std::vector<Correspondence> correspondences;  // noisy, with outliers
  std::vector<Correspondence> clean;            // before noise/outliers
  std::vector<ProjectedPair> gs;                // ground-truth GS points
  std::vector<uint8_t> is_outlier;
};

// Bit-reproducible for a fixed config (seed included). Points are drawn
// uniformly over the image with depth uniform in [min_depth, max_depth];
// points that leave either frame or fail to project are redrawn.
SyntheticScene GenerateScene(const SceneConfig& config);

// Pixel distance at the declared focal length between the GS point the
// estimate predicts for corr (rectify's UndistortFeature) and gt.
double UndistortionError(const Correspondence& corr, const MotionEstimate& estimate,
                         const RigConfig& rig, const ImagePoint& gt,
                         const PinholeCamera& camera);

// Midpoint of the first observation and the R_r-aligned second one: the
// interpolation baseline that ignores motion.
ImagePoint InterpolatedGs(const Correspondence& corr, const RigConfig& rig);

// Smooth procedural texture over the normalized image plane of camera 1's
// GS view, values in [0.1, 0.9].
struct Texture {
  std::function<double(double, double)> value;
  static Texture Procedural(uint64_t seed, double scale = 1.0);
};

// Images of a fronto-parallel textured plane at depth `plane_depth` (in
// camera 1's GS frame). Render the GS view of camera 1, or the RS view of
// either camera under constant-velocity motion; rays missing the plane are
// invalid.
Raster RenderGs(const Texture& texture, const PinholeCamera& camera);
Raster RenderRs(const Texture& texture, double plane_depth,
                const MotionEstimate& motion, const RigConfig& rig,
                const PinholeCamera& camera, bool second_camera);

// Ground-truth dense flow between the RS views of the plane: for each pixel
// of the source camera, the displacement (pixels) to where the same plane
// point appears in the other camera. Pixels whose ray misses the plane or
// whose target leaves the frame are invalid.
FlowField PlaneFlow(double plane_depth, const MotionEstimate& motion,
                    const RigConfig& rig, const PinholeCamera& camera,
                    bool from_second);

}  // namespace rs2gs

#endif  // RS2GS_SYNTH_H_
