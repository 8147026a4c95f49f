#ifndef RS2GS_IO_H_
#define RS2GS_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rs2gs/raster.h"
#include "rs2gs/types.h"

namespace rs2gs {

// Readers throw ParseError (with line number), EmptyFile, BadMagic,
// TruncatedData, UnsupportedFormat or CorruptHeader on malformed input and
// IoError when the file cannot be opened; they never return partial data.

// CSV with header `u1,v1,u2,v2`; values are written in shortest round-trip
// form, so write -> read is bitwise lossless.
std::vector<Correspondence> ReadCorrespondences(const std::filesystem::path& path);
void WriteCorrespondences(const std::filesystem::path& path,
                          const std::vector<Correspondence>& corrs);

// `RSFLOW <width> <height>\n` then row-major little-endian float32 (dx, dy);
// a NaN pair marks an invalid pixel.
FlowField ReadFlow(const std::filesystem::path& path);
void WriteFlow(const std::filesystem::path& path, const FlowField& flow);

// Binary PGM (P5) / PPM (P6), maxval 255 or 65535 (16-bit big-endian).
// Samples are normalized to [0, 1]; invalid pixels are written as 0 and every
// pixel read is valid.
Raster ReadImage(const std::filesystem::path& path);
void WriteImage(const std::filesystem::path& path, const Raster& image, int maxval = 255);

// Key-value text: model, omega (3), t (3), scale_known; 17 significant digits.
MotionEstimate ReadMotion(const std::filesystem::path& path);
void WriteMotion(const std::filesystem::path& path, const MotionEstimate& motion);

// One line per correspondence, 1 = inlier.
void WriteMask(const std::filesystem::path& path, const std::vector<uint8_t>& mask);

struct BenchmarkRecord {
  std::string solver;   // tx, txy, txyz, rot, 6dof, 6dof-baseline
  std::string variant;  // v1, v2, v3
  double omega_deg = 0.0;
  double trans_frac = 0.0;
  double sigma_px = 0.0;
  double baseline_ratio = 0.0;
  uint64_t seed = 0;
  double median_px = 0.0;
  double mean_px = 0.0;
  double p90_px = 0.0;
  double runtime_us = 0.0;
};

// Fixed header line; the CSV starts with `# key=value` metadata lines.
extern const char kBenchmarkHeader[];

using Metadata = std::vector<std::pair<std::string, std::string>>;

void WriteBenchmarkCsv(const std::filesystem::path& path,
                       const std::vector<BenchmarkRecord>& records,
                       const Metadata& metadata = {});
std::string FormatBenchmarkCsv(const std::vector<BenchmarkRecord>& records,
                               const Metadata& metadata = {});
std::vector<BenchmarkRecord> ReadBenchmarkCsv(const std::filesystem::path& path,
                                              Metadata* metadata = nullptr);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double x);

}  // namespace rs2gs

#endif  // RS2GS_IO_H_
