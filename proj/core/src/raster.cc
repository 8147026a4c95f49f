#include "rs2gs/raster.h"

#include <cmath>
#include <limits>

#include "rs2gs/error.h"

namespace rs2gs {
namespace {

// Snaps coordinates that are integral up to round-off, so that identity
// mappings reproduce samples bitwise and the last row/column is reachable.
double Snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < 1e-9 ? r : x;
}

}  // namespace

int Raster::valid_count() const {
  int n = 0;
  for (uint8_t v : valid) n += v != 0;
  return n;
}

bool Raster::Sample(double x, double y, float* out) const {
  x = Snap(x);
  y = Snap(y);
  if (!(x >= 0.0 && y >= 0.0 && x <= width - 1 && y <= height - 1)) return false;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = fx > 0.0 ? x0 + 1 : x0;
  const int y1 = fy > 0.0 ? y0 + 1 : y0;
  if (!is_valid(x0, y0) || !is_valid(x1, y0) || !is_valid(x0, y1) || !is_valid(x1, y1)) {
    return false;
  }
  for (int c = 0; c < channels; ++c) {
    if (fx == 0.0 && fy == 0.0) {
      out[c] = at(x0, y0, c);
      continue;
    }
    const double top = (1.0 - fx) * at(x0, y0, c) + fx * at(x1, y0, c);
    const double bottom = (1.0 - fx) * at(x0, y1, c) + fx * at(x1, y1, c);
    out[c] = static_cast<float>((1.0 - fy) * top + fy * bottom);
  }
  return true;
}

double Psnr(const Raster& a, const Raster& b, const std::vector<uint8_t>* mask) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw Error(ErrorCode::kDimensionMismatch, "PSNR of rasters of different shape");
  }
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < a.valid.size(); ++i) {
    if (!a.valid[i] || !b.valid[i] || (mask && !(*mask)[i])) continue;
    for (int c = 0; c < a.channels; ++c) {
      const double d = double(a.samples[i * a.channels + c]) - b.samples[i * b.channels + c];
      sum += d * d;
      ++n;
    }
  }
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / (sum / n));
}

}  // namespace rs2gs
