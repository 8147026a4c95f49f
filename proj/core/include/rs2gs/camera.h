#ifndef RS2GS_CAMERA_H_
#define RS2GS_CAMERA_H_

#include "rs2gs/types.h"

namespace rs2gs {

// Intrinsics applied only at the I/O boundary; everything else works in
// normalized coordinates. The principal point is the pixel-grid center, so
// v = 0 is the middle row.
struct PinholeCamera {
  double focal = 1000.0;  // pixels
  int width = 3072;
  int height = 2048;

  double cx() const { return 0.5 * (width - 1); }
  double cy() const { return 0.5 * (height - 1); }
  // Height of the frame in normalized rows: the readout time of one frame.
  double frame_rows() const { return height / focal; }

  ImagePoint ToNormalized(double x, double y) const {
    return {(x - cx()) / focal, (y - cy()) / focal};
  }
  Vec2 ToPixel(const ImagePoint& p) const {
    return {p.u * focal + cx(), p.v * focal + cy()};
  }
  bool InFrame(const ImagePoint& p) const {
    const Vec2 q = ToPixel(p);
    return q.x() >= 0.0 && q.y() >= 0.0 && q.x() <= width - 1 &&
           q.y() <= height - 1;
  }
};

}  // namespace rs2gs

#endif  // RS2GS_CAMERA_H_
