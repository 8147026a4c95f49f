#include "rs2gs/rectify.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rs2gs/error.h"
#include "rs2gs/rotation.h"
#include "rs2gs/synth.h"
#include "rs2gs/trajectory.h"

namespace rs2gs {
namespace {

void RequireSameSize(int w1, int h1, int w2, int h2) {
  if (w1 != w2 || h1 != h2) {
    throw Error(ErrorCode::kDimensionMismatch, "inputs differ in size");
  }
}

bool IsStatic(const MotionEstimate& m, const RigConfig& rig) {
  return m.omega.squaredNorm() == 0.0 && m.t.squaredNorm() == 0.0 &&
         rig.baseline.squaredNorm() == 0.0;
}

// Pixel where GS direction g appears in the RS image (camera 1 or 2):
// fixed point on the source row.
bool SourceOfGsPixel(const Vec3& g, const Vec3& omega, const RigConfig& rig,
                     const PinholeCamera& camera, bool second, Vec2* pixel) {
  const Mat3 M = second ? rig.relative_rotation : Mat3::Identity();
  Vec3 x = M * g;
  if (!(x.z() > 0.0)) return false;
  double v = x.y() / x.z();
  const double tol = 1e-6 / camera.focal;
  for (int it = 0; it < 20; ++it) {
    x = M * RotationFromAxisAngle(omega, rig.RowTime(v)) * g;
    if (!(x.z() > 0.0)) return false;
    const double next = x.y() / x.z();
    const bool done = std::abs(next - v) <= tol;
    v = next;
    if (done) {
      *pixel = camera.ToPixel({x.x() / x.z(), v});
      return true;
    }
  }
  return false;
}

// GS direction of an RS pixel under pure rotation.
bool GsOfSourcePixel(const ImagePoint& p, const Vec3& omega, const RigConfig& rig,
                     bool second, ImagePoint* g) {
  const Mat3 M = second ? rig.relative_rotation : Mat3::Identity();
  const Vec3 x = RotationFromAxisAngle(omega, rig.RowTime(p.v)).transpose() *
                 M.transpose() * p.homogeneous();
  if (!(x.z() > 0.0)) return false;
  *g = ImagePoint::FromHomogeneous(x);
  return true;
}

Vec2 StaticMap(int x, int y, const PinholeCamera& camera, const Mat3& R) {
  const Vec3 p = R * camera.ToNormalized(x, y).homogeneous();
  return camera.ToPixel(ImagePoint::FromHomogeneous(p));
}

bool SampleFlow(const FlowField& f, double x, double y, Vec2* out) {
  if (!(x >= 0.0 && y >= 0.0 && x <= f.width - 1 && y <= f.height - 1)) return false;
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, f.width - 1), y1 = std::min(y0 + 1, f.height - 1);
  const double fx = x - x0, fy = y - y0;
  const size_t i00 = f.index(x0, y0), i10 = f.index(x1, y0), i01 = f.index(x0, y1),
               i11 = f.index(x1, y1);
  if (!f.valid[i00] || !f.valid[i10] || !f.valid[i01] || !f.valid[i11]) return false;
  *out = (1 - fy) * ((1 - fx) * f.flow[i00] + fx * f.flow[i10]) +
         fy * ((1 - fx) * f.flow[i01] + fx * f.flow[i11]);
  return true;
}

void SplatDepth(DepthMap* map, const PinholeCamera& camera, const Vec3& X) {
  if (!(X.z() > 0.0)) return;
  const Vec2 q = camera.ToPixel(ImagePoint::FromHomogeneous(X));
  const int x0 = static_cast<int>(std::floor(q.x()));
  const int y0 = static_cast<int>(std::floor(q.y()));
  for (int y = y0; y <= y0 + 1; ++y) {
    for (int x = x0; x <= x0 + 1; ++x) {
      if (x < 0 || y < 0 || x >= map->width || y >= map->height) continue;
      const size_t i = map->index(x, y);
      if (!map->valid[i] || X.z() < map->depth[i]) {
        map->depth[i] = X.z();
        map->valid[i] = 1;
      }
    }
  }
}

}  // namespace

ImagePoint UndistortPointRotation(const ImagePoint& p, const Vec3& omega,
                                  const RigConfig& rig) {
  ImagePoint g;
  if (!GsOfSourcePixel(p, omega, rig, false, &g)) {
    throw Error(ErrorCode::kBehindCamera, "undistorted ray behind the camera");
  }
  return g;
}

Vec3 TriangulateRowPair(const Correspondence& corr, const MotionEstimate& motion,
                        const RigConfig& rig, double min_row_gap) {
  const double tau = rig.RowTime(corr.first.v);
  const double tau2 = rig.RowTime(corr.second.v);
  if (min_row_gap > 0.0 && std::abs(tau - tau2) <= min_row_gap) {
    throw Error(ErrorCode::kDegenerateBaseline, "rows too close in time");
  }
  const RowPose p1 = PoseAt(motion, tau);
  const RowPose p2 = PoseAt(motion, tau2);
  // X = o1 + lambda a = o2 + lambda' b
  const Vec3 a = p1.rotation.transpose() * corr.first.homogeneous();
  const Vec3 o1 = -p1.rotation.transpose() * p1.translation;
  const Vec3 b = p2.rotation.transpose() * rig.AlignSecond(corr.second);
  const Vec3 o2 = -p2.rotation.transpose() * (p2.translation + rig.baseline);
  const Vec3 rhs = o2 - o1;
  const double aa = a.dot(a), bb = b.dot(b), ab = a.dot(b);
  const double det = aa * bb - ab * ab;
  if (!(det > 1e-14 * aa * bb) || !(rhs.squaredNorm() > 0.0)) {
    throw Error(ErrorCode::kDegenerateBaseline, "rays are parallel or share a center");
  }
  const double ra = a.dot(rhs), rb = b.dot(rhs);
  const double lambda = (bb * ra - ab * rb) / det;
  const double lambda2 = (ab * ra - aa * rb) / det;
  if (!(lambda > 0.0) || !(lambda2 > 0.0)) {
    throw Error(ErrorCode::kBehindCamera, "triangulated point behind a camera");
  }
  return 0.5 * (o1 + lambda * a + o2 + lambda2 * b);
}

ImagePoint UndistortFeature(const Correspondence& corr, const MotionEstimate& estimate,
                            const RigConfig& rig) {
  if (estimate.model == MotionModel::kRotation ||
      (estimate.t.squaredNorm() == 0.0 && rig.baseline.squaredNorm() == 0.0)) {
    return UndistortPointRotation(corr.first, estimate.omega, rig);
  }
  // Camera-1 ray X = lambda R1^T (u - rho tau t), rho = 1 / lambda. Camera 2
  // sees R u + rho (tau' t + b - tau R t) along its aligned ray a'; rho is the
  // least-squares solution of a' x (...) = 0. rho t is invariant to the scale
  // and sign of t, and the GS error stays bounded as the parallax vanishes.
  const double tau = rig.RowTime(corr.first.v);
  const double tau2 = rig.RowTime(corr.second.v);
  const RowPose p1 = PoseAt(estimate, tau);
  const RowPose p2 = PoseAt(estimate, tau2);
  const Mat3 R = p2.rotation * p1.rotation.transpose();
  const Vec3 u = corr.first.homogeneous();
  const Vec3 a2 = rig.AlignSecond(corr.second);
  const Vec3 c = a2.cross(R * u);
  const Vec3 d = a2.cross(p2.translation + rig.baseline - R * p1.translation);
  double rho = d.squaredNorm() > 0.0 ? -c.dot(d) / d.squaredNorm() : 0.0;
  if (!std::isfinite(rho)) rho = 0.0;
  // Metric estimates fix the sign: a point behind the rig goes to infinity.
  if (estimate.scale_known && rho < 0.0) rho = 0.0;
  const Vec3 g = p1.rotation.transpose() * (u - rho * p1.translation);
  if (!(g.z() > 0.0)) return UndistortPointRotation(corr.first, estimate.omega, rig);
  return ImagePoint::FromHomogeneous(g);
}

std::vector<ImagePoint> UndistortFeatures(std::span<const Correspondence> corrs,
                                          const MotionEstimate& estimate,
                                          const RigConfig& rig) {
  std::vector<ImagePoint> out;
  out.reserve(corrs.size());
  for (const auto& c : corrs) out.push_back(UndistortFeature(c, estimate, rig));
  return out;
}

Raster WarpImageRotation(const Raster& image, const Vec3& omega,
                         const PinholeCamera& camera, WarpDirection direction,
                         const RigConfig& rig, bool second_camera) {
  RequireSameSize(image.width, image.height, camera.width, camera.height);
  const int W = image.width, H = image.height, C = image.channels;
  Raster out(W, H, C, 0.0f, false);
  if (direction == WarpDirection::kBackward) {
    std::vector<float> value(C);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        Vec2 src;
        if (!SourceOfGsPixel(camera.ToNormalized(x, y).homogeneous(), omega, rig, camera,
                             second_camera, &src)) {
          continue;
        }
        if (!image.Sample(src.x(), src.y(), value.data())) continue;
        for (int c = 0; c < C; ++c) out.at(x, y, c) = value[c];
        out.valid[out.index(x, y)] = 1;
      }
    }
    return out;
  }
  std::vector<double> acc(static_cast<size_t>(W) * H * C, 0.0);
  std::vector<double> weight(static_cast<size_t>(W) * H, 0.0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (!image.is_valid(x, y)) continue;
      ImagePoint g;
      if (!GsOfSourcePixel(camera.ToNormalized(x, y), omega, rig, second_camera, &g)) {
        continue;
      }
      const Vec2 q = camera.ToPixel(g);
      const int x0 = static_cast<int>(std::floor(q.x()));
      const int y0 = static_cast<int>(std::floor(q.y()));
      const double fx = q.x() - x0, fy = q.y() - y0;
      for (int dy = 0; dy <= 1; ++dy) {
        for (int dx = 0; dx <= 1; ++dx) {
          const int xx = x0 + dx, yy = y0 + dy;
          if (xx < 0 || yy < 0 || xx >= W || yy >= H) continue;
          const double w = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
          if (w <= 0.0) continue;
          const size_t i = out.index(xx, yy);
          weight[i] += w;
          for (int c = 0; c < C; ++c) acc[i * C + c] += w * image.at(x, y, c);
        }
      }
    }
  }
  for (size_t i = 0; i < weight.size(); ++i) {
    if (weight[i] < 0.25) continue;
    for (int c = 0; c < C; ++c) out.samples[i * C + c] = static_cast<float>(acc[i * C + c] / weight[i]);
    out.valid[i] = 1;
  }
  return out;
}

Raster RedistortImageRotation(const Raster& gs, const Vec3& omega,
                              const PinholeCamera& camera, const RigConfig& rig,
                              bool second_camera) {
  RequireSameSize(gs.width, gs.height, camera.width, camera.height);
  Raster out(gs.width, gs.height, gs.channels, 0.0f, false);
  std::vector<float> value(gs.channels);
  for (int y = 0; y < gs.height; ++y) {
    for (int x = 0; x < gs.width; ++x) {
      ImagePoint g;
      if (!GsOfSourcePixel(camera.ToNormalized(x, y), omega, rig, second_camera, &g)) {
        continue;
      }
      const Vec2 q = camera.ToPixel(g);
      if (!gs.Sample(q.x(), q.y(), value.data())) continue;
      for (int c = 0; c < gs.channels; ++c) out.at(x, y, c) = value[c];
      out.valid[out.index(x, y)] = 1;
    }
  }
  return out;
}

Raster FuseWarped(const Raster& first, const Raster& second) {
  RequireSameSize(first.width, first.height, second.width, second.height);
  if (first.channels != second.channels) {
    throw Error(ErrorCode::kDimensionMismatch, "channel counts differ");
  }
  const int C = first.channels;
  Raster out(first.width, first.height, C, 0.0f, false);
  for (size_t i = 0; i < out.valid.size(); ++i) {
    const bool a = first.valid[i], b = second.valid[i];
    if (!a && !b) continue;
    for (int c = 0; c < C; ++c) {
      const float fa = first.samples[i * C + c], fb = second.samples[i * C + c];
      out.samples[i * C + c] = a && b ? 0.5f * (fa + fb) : (a ? fa : fb);
    }
    out.valid[i] = 1;
  }
  return out;
}

FlowField FilterFlow(const FlowField& forward, const FlowField& backward,
                     const PinholeCamera& camera, const RigConfig& rig,
                     const FlowFilterConfig& config, bool from_second) {
  RequireSameSize(forward.width, forward.height, backward.width, backward.height);
  RequireSameSize(forward.width, forward.height, camera.width, camera.height);
  const Mat3 R = from_second ? Mat3(rig.relative_rotation.transpose())
                             : rig.relative_rotation;
  FlowField out = forward;
  for (int y = 0; y < forward.height; ++y) {
    const double allowed = config.gate_offset_px + config.gate_slope * std::abs(y - camera.cy());
    for (int x = 0; x < forward.width; ++x) {
      const size_t i = forward.index(x, y);
      if (!forward.valid[i]) continue;
      const Vec2 q = Vec2(x, y) + forward.flow[i];
      Vec2 back;
      bool ok = SampleFlow(backward, q.x(), q.y(), &back) &&
                (forward.flow[i] + back).norm() <= config.consistency_px;
      ok = ok && (q - StaticMap(x, y, camera, R)).norm() <= allowed;
      if (!ok) out.valid[i] = 0;
    }
  }
  return out;
}

std::pair<DepthMap, DepthMap> BuildDepthMaps(const FlowField& flow12,
                                             const FlowField& flow21,
                                             const MotionEstimate& motion,
                                             const RigConfig& rig,
                                             const PinholeCamera& camera,
                                             const DepthConfig& config) {
  RequireSameSize(flow12.width, flow12.height, camera.width, camera.height);
  RequireSameSize(flow21.width, flow21.height, camera.width, camera.height);
  DepthMap d1(camera.width, camera.height), d2(camera.width, camera.height);
  const double band = config.center_band_fraction * camera.height;
  auto add = [&](DepthMap* map, const Vec2& p1, const Vec2& p2) {
    if (std::abs(p1.y() - camera.cy()) < band) return;
    const Correspondence corr{camera.ToNormalized(p1.x(), p1.y()),
                              camera.ToNormalized(p2.x(), p2.y())};
    try {
      SplatDepth(map, camera, TriangulateRowPair(corr, motion, rig));
    } catch (const Error&) {
    }
  };
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const size_t i = flow12.index(x, y);
      if (flow12.valid[i]) add(&d1, Vec2(x, y), Vec2(x, y) + flow12.flow[i]);
      if (flow21.valid[i]) add(&d2, Vec2(x, y) + flow21.flow[i], Vec2(x, y));
    }
  }
  return {std::move(d1), std::move(d2)};
}

std::pair<OcclusionMask, OcclusionMask> BuildOcclusionMasks(const DepthMap& d1,
                                                            const DepthMap& d2,
                                                            double margin) {
  RequireSameSize(d1.width, d1.height, d2.width, d2.height);
  OcclusionMask m1(d1.width, d1.height), m2(d1.width, d1.height);
  for (size_t i = 0; i < d1.depth.size(); ++i) {
    bool use1 = d1.valid[i], use2 = d2.valid[i];
    if (use1 && use2) {
      const double near = std::min(d1.depth[i], d2.depth[i]);
      if (std::abs(d1.depth[i] - d2.depth[i]) > margin * near) {
        use1 = d1.depth[i] < d2.depth[i];
        use2 = !use1;
      }
    }
    if (use1) m1.source[i] = SourceSelect::kFirst;
    if (use2) m2.source[i] = SourceSelect::kSecond;
  }
  return {std::move(m1), std::move(m2)};
}

DepthMap FuseDepth(const DepthMap& d1, const DepthMap& d2) {
  RequireSameSize(d1.width, d1.height, d2.width, d2.height);
  DepthMap out(d1.width, d1.height);
  for (size_t i = 0; i < out.depth.size(); ++i) {
    if (d1.valid[i] && d2.valid[i]) {
      out.depth[i] = std::min(d1.depth[i], d2.depth[i]);
    } else if (d1.valid[i] || d2.valid[i]) {
      out.depth[i] = d1.valid[i] ? d1.depth[i] : d2.depth[i];
    } else {
      continue;
    }
    out.valid[i] = 1;
  }
  return out;
}

GsRender RenderGsTranslation(const Raster& image1, const Raster& image2,
                             const DepthMap& fused, const OcclusionMask& mask1,
                             const OcclusionMask& mask2, const MotionEstimate& motion,
                             const RigConfig& rig, const PinholeCamera& camera,
                             const DepthConfig& config) {
  RequireSameSize(image1.width, image1.height, camera.width, camera.height);
  RequireSameSize(image2.width, image2.height, camera.width, camera.height);
  RequireSameSize(fused.width, fused.height, camera.width, camera.height);
  RequireSameSize(mask1.width, mask1.height, camera.width, camera.height);
  RequireSameSize(mask2.width, mask2.height, camera.width, camera.height);
  if (image1.channels != image2.channels) {
    throw Error(ErrorCode::kDimensionMismatch, "channel counts differ");
  }
  const int C = image1.channels;
  GsRender out{Raster(camera.width, camera.height, C, 0.0f, false),
               std::vector<uint8_t>(static_cast<size_t>(camera.width) * camera.height, 0)};
  const bool interpolate_all = IsStatic(motion, rig);
  const double band = config.center_band_fraction * camera.height;
  std::vector<float> a(C), b(C);
  auto emit = [&](int x, int y, bool ha, bool hb) {
    if (!ha && !hb) return;
    for (int c = 0; c < C; ++c) {
      out.image.at(x, y, c) = ha && hb ? 0.5f * (a[c] + b[c]) : (ha ? a[c] : b[c]);
    }
    out.image.valid[out.image.index(x, y)] = 1;
  };
  for (int y = 0; y < camera.height; ++y) {
    const bool in_band = interpolate_all || std::abs(y - camera.cy()) < band;
    for (int x = 0; x < camera.width; ++x) {
      const size_t i = out.image.index(x, y);
      if (in_band) {
        const Vec2 q = StaticMap(x, y, camera, rig.relative_rotation);
        emit(x, y, image1.Sample(x, y, a.data()), image2.Sample(q.x(), q.y(), b.data()));
        out.interpolated[i] = 1;
        continue;
      }
      if (!fused.valid[i]) continue;
      const Vec3 X = fused.depth[i] * camera.ToNormalized(x, y).homogeneous();
      auto sample = [&](const Raster& img, bool second, float* v) {
        try {
          const Vec2 q = camera.ToPixel(ProjectRsCamera(X, motion, rig, second));
          return img.Sample(q.x(), q.y(), v);
        } catch (const Error&) {
          return false;
        }
      };
      const bool ha = mask1.source[i] == SourceSelect::kFirst && sample(image1, false, a.data());
      const bool hb = mask2.source[i] == SourceSelect::kSecond && sample(image2, true, b.data());
      emit(x, y, ha, hb);
    }
  }
  return out;
}

}  // namespace rs2gs
