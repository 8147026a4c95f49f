#ifndef RS2GS_RASTER_H_
#define RS2GS_RASTER_H_

#include <cstdint>
#include <vector>

#include "rs2gs/types.h"

namespace rs2gs {

// Row-major image with samples in [0, 1] and a per-pixel validity mask
// (invalid pixels carry 0 and are "alpha 0" on output).
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> samples;
  std::vector<uint8_t> valid;

  Raster() = default;
  Raster(int w, int h, int c, float fill = 0.0f, bool is_valid = true)
      : width(w), height(h), channels(c),
        samples(static_cast<size_t>(w) * h * c, fill),
        valid(static_cast<size_t>(w) * h, is_valid ? 1 : 0) {}

  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  float& at(int x, int y, int c = 0) { return samples[index(x, y) * channels + c]; }
  float at(int x, int y, int c = 0) const { return samples[index(x, y) * channels + c]; }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
  int valid_count() const;

  // Bilinear sample at pixel coordinates; false if any of the four taps is
  // outside the image or invalid.
  bool Sample(double x, double y, float* out) const;
};

struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<Vec2> flow;  // pixels; meaningless where invalid
  std::vector<uint8_t> valid;

  FlowField() = default;
  FlowField(int w, int h)
      : width(w), height(h), flow(static_cast<size_t>(w) * h, Vec2::Zero()),
        valid(static_cast<size_t>(w) * h, 1) {}
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // X_3 in scene units
  std::vector<uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w), height(h), depth(static_cast<size_t>(w) * h, 0.0),
        valid(static_cast<size_t>(w) * h, 0) {}
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

enum class SourceSelect : uint8_t { kNone = 0, kFirst = 1, kSecond = 2, kBoth = 3 };

// Which input image may supply each output pixel. kBoth means the depths
// agreed within the margin and the sources are averaged.
struct OcclusionMask {
  int width = 0;
  int height = 0;
  std::vector<SourceSelect> source;

  OcclusionMask() = default;
  OcclusionMask(int w, int h)
      : width(w), height(h), source(static_cast<size_t>(w) * h, SourceSelect::kNone) {}
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

// Peak signal-to-noise ratio (peak 1) over pixels valid in both rasters and
// inside `mask` when given; +inf for identical inputs.
double Psnr(const Raster& a, const Raster& b, const std::vector<uint8_t>* mask = nullptr);

}  // namespace rs2gs

#endif  // RS2GS_RASTER_H_
