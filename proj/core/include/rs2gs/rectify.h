#ifndef RS2GS_RECTIFY_H_
#define RS2GS_RECTIFY_H_

#include <span>
#include <utility>
#include <vector>

#include "rs2gs/camera.h"
#include "rs2gs/raster.h"
#include "rs2gs/types.h"

namespace rs2gs {

// lambda u_g = R_w(v)^T u for an observation of camera 1. Throws
// BehindCamera if the ray turns away from the image plane.
ImagePoint UndistortPointRotation(const ImagePoint& p, const Vec3& omega,
                                  const RigConfig& rig = {});

// Midpoint of the two viewing rays at their rows' poses, in the GS frame
// (camera 1 at row time 0). Throws DegenerateBaseline when |v - v'| <=
// min_row_gap or the rays are parallel, BehindCamera for negative depths.
Vec3 TriangulateRowPair(const Correspondence& corr, const MotionEstimate& motion,
                        const RigConfig& rig, double min_row_gap = 0.0);

// GS position of the first observation under the estimate: rotation models
// use UndistortPointRotation; translation and 6DOF models solve the inverse
// depth of the first ray from the pair (least squares, closed form) and
// project it at row time 0. Without parallax the inverse depth is 0 and the
// mapping reduces to the rotation-only one.
ImagePoint UndistortFeature(const Correspondence& corr, const MotionEstimate& estimate,
                            const RigConfig& rig);
std::vector<ImagePoint> UndistortFeatures(std::span<const Correspondence> corrs,
                                          const MotionEstimate& estimate,
                                          const RigConfig& rig);

enum class WarpDirection { kForward, kBackward };

// RS image -> GS image in camera 1's GS frame. For second_camera the source
// is camera 2's raw image, so both outputs share one frame and can be fused.
// Backward: per output pixel iterate the source row (cap 20, 1e-6 px) and
// sample bilinearly; forward: bilinear splatting. Unreachable pixels invalid.
Raster WarpImageRotation(const Raster& image, const Vec3& omega,
                         const PinholeCamera& camera, WarpDirection direction,
                         const RigConfig& rig = {}, bool second_camera = false);

// GS image (camera 1's frame) -> RS image of camera 1 or 2: the inverse of
// the backward warp.
Raster RedistortImageRotation(const Raster& gs, const Vec3& omega,
                              const PinholeCamera& camera, const RigConfig& rig = {},
                              bool second_camera = false);

// Average where both are valid, copy where one is. DimensionMismatch.
Raster FuseWarped(const Raster& first, const Raster& second);

struct FlowFilterConfig {
  double consistency_px = 1.0;
  // Allowed displacement (after removing the static R_r pixel map) grows
  // linearly with the distance from the middle row.
  double gate_offset_px = 2.0;
  double gate_slope = 0.25;  // px per px of row distance
};

// Forward-backward check plus the row gate on `forward`; failures become
// invalid. from_second: `forward` starts in camera 2's image (flow21), so the
// static map is R_r^T instead of R_r.
FlowField FilterFlow(const FlowField& forward, const FlowField& backward,
                     const PinholeCamera& camera, const RigConfig& rig = {},
                     const FlowFilterConfig& config = {}, bool from_second = false);

struct DepthConfig {
  double center_band_fraction = 0.05;  // half-width, fraction of image height
};

// Two depth maps in camera 1's GS frame, one per flow direction: every valid
// flow vector is triangulated and its depth splatted (z-buffered) onto the
// 2x2 pixels around the GS projection. The center band stays invalid.
std::pair<DepthMap, DepthMap> BuildDepthMaps(const FlowField& flow12,
                                             const FlowField& flow21,
                                             const MotionEstimate& motion,
                                             const RigConfig& rig,
                                             const PinholeCamera& camera,
                                             const DepthConfig& config = {});

// Nearer depth wins; within `margin` (relative) both sources are allowed.
// first.source is kFirst or kNone, second.source is kSecond or kNone.
std::pair<OcclusionMask, OcclusionMask> BuildOcclusionMasks(const DepthMap& d1,
                                                            const DepthMap& d2,
                                                            double margin = 0.02);

// Per pixel the nearer of the two valid depths.
DepthMap FuseDepth(const DepthMap& d1, const DepthMap& d2);

struct GsRender {
  Raster image;
  std::vector<uint8_t> interpolated;  // 1 where the center-band fallback was used
};

// Back-projects each fused-depth pixel, projects it into the allowed source
// image(s) with the implicit RS row solve and samples bilinearly. Inside the
// center band (and everywhere for zero motion) the two inputs are simply
// interpolated.
GsRender RenderGsTranslation(const Raster& image1, const Raster& image2,
                             const DepthMap& fused, const OcclusionMask& mask1,
                             const OcclusionMask& mask2, const MotionEstimate& motion,
                             const RigConfig& rig, const PinholeCamera& camera,
                             const DepthConfig& config = {});

}  // namespace rs2gs

#endif  // RS2GS_RECTIFY_H_
