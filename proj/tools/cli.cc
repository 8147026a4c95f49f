#include "cli.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rs2gs/error.h"
#include "rs2gs/experiment.h"
#include "rs2gs/io.h"
#include "rs2gs/rectify.h"
#include "rs2gs/robust.h"
#include "rs2gs/synth.h"

namespace rs2gs {
namespace {

namespace fs = std::filesystem;

struct CameraFlags {
  double focal = 1000.0;
  int width = 3072;
  int height = 2048;
};

struct RigFlags {
  std::vector<double> baseline = {0.0, 0.0, 0.0};
  double row_time_origin = 0.0;

  RigConfig Rig() const {
    RigConfig rig;
    rig.baseline = Vec3(baseline[0], baseline[1], baseline[2]);
    rig.row_time_origin = row_time_origin;
    return rig;
  }
};

void AddRigFlags(CLI::App* app, RigFlags* f) {
  app->add_option("--baseline", f->baseline, "Rig baseline b (scene units), x,y,z")
      ->delimiter(',')
      ->expected(3);
  app->add_option("--row-time-origin", f->row_time_origin,
                  "Normalized row at which both shutters coincide");
}

std::string Join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + FormatDouble(v[i]);
  return s;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

std::string MetadataText(const Metadata& meta) {
  std::string s;
  for (const auto& [k, v] : meta) s += k + "=" + v + "\n";
  return s;
}

fs::path ImagePath(const fs::path& dir, const std::string& stem, const Raster& r) {
  return dir / (stem + (r.channels == 1 ? ".pgm" : ".ppm"));
}

// ---- synth -----------------------------------------------------------------

struct SynthFlags {
  std::string motion = "general";
  std::string mode = "exact";
  double omega_deg = 15.0;
  double trans_frac = 0.0;
  double sigma_px = 0.5;
  double outlier_fraction = 0.0;
  int points = 100;
  double min_depth = 4.0;
  double max_depth = 12.0;
  double baseline_ratio = 0.0;
  uint64_t seed = 0;
  CameraFlags camera;
  std::string out_dir = ".";
  std::string prefix = "scene";
  bool render = false;
  double plane_depth = 6.0;
  double texture_scale = 1.0;
};

int CmdSynth(const SynthFlags& f, std::ostream& out) {
  static const std::map<std::string, SceneMotion> kMotions = {
      {"rot", SceneMotion::kRotation}, {"tx", SceneMotion::kTx},     {"txy", SceneMotion::kTxy},
      {"txyz", SceneMotion::kTxyz},    {"general", SceneMotion::kGeneral}};
  SceneConfig c;
  c.num_points = f.points;
  c.motion = kMotions.at(f.motion);
  c.omega_deg = f.omega_deg;
  c.trans_frac = f.trans_frac;
  c.min_depth = f.min_depth;
  c.max_depth = f.max_depth;
  c.sigma_px = f.sigma_px;
  c.outlier_fraction = f.outlier_fraction;
  c.baseline_ratio = f.baseline_ratio;
  c.mode = f.mode == "exact" ? GenerationMode::kExact : GenerationMode::kLinearized;
  c.camera = PinholeCamera{f.camera.focal, f.camera.width, f.camera.height};
  c.seed = f.seed;
  const SyntheticScene scene = GenerateScene(c);

  const fs::path dir(f.out_dir);
  fs::create_directories(dir);
  const std::string p = f.prefix;
  WriteCorrespondences(dir / (p + "_corrs.csv"), scene.correspondences);
  WriteMotion(dir / (p + "_gt_motion.txt"), scene.motion);
  std::vector<Correspondence> gs;
  for (const auto& g : scene.gs) gs.push_back({g.first, g.second});
  WriteCorrespondences(dir / (p + "_gt_gs.csv"), gs);
  WriteMask(dir / (p + "_outliers.txt"), scene.is_outlier);

  const Vec3& b = scene.rig.baseline;
  Metadata meta = {{"motion", f.motion},
                   {"mode", f.mode},
                   {"omega_deg", FormatDouble(f.omega_deg)},
                   {"trans_frac", FormatDouble(f.trans_frac)},
                   {"sigma_px", FormatDouble(f.sigma_px)},
                   {"outlier_fraction", FormatDouble(f.outlier_fraction)},
                   {"points", std::to_string(f.points)},
                   {"min_depth", FormatDouble(f.min_depth)},
                   {"max_depth", FormatDouble(f.max_depth)},
                   {"baseline_ratio", FormatDouble(f.baseline_ratio)},
                   {"baseline", Join({b.x(), b.y(), b.z()})},
                   {"focal_px", FormatDouble(f.camera.focal)},
                   {"width", std::to_string(f.camera.width)},
                   {"height", std::to_string(f.camera.height)},
                   {"seed", std::to_string(f.seed)},
                   {"render", f.render ? "1" : "0"}};

  if (f.render) {
    meta.push_back({"plane_depth", FormatDouble(f.plane_depth)});
    meta.push_back({"texture_scale", FormatDouble(f.texture_scale)});
    const Texture tex = Texture::Procedural(f.seed, f.texture_scale);
    const Raster rs1 = RenderRs(tex, f.plane_depth, scene.motion, scene.rig, c.camera, false);
    const Raster rs2 = RenderRs(tex, f.plane_depth, scene.motion, scene.rig, c.camera, true);
    WriteImage(dir / (p + "_rs1.pgm"), rs1);
    WriteImage(dir / (p + "_rs2.pgm"), rs2);
    WriteImage(dir / (p + "_gs.pgm"), RenderGs(tex, c.camera));
    WriteFlow(dir / (p + "_flow12.rsflow"),
              PlaneFlow(f.plane_depth, scene.motion, scene.rig, c.camera, false));
    WriteFlow(dir / (p + "_flow21.rsflow"),
              PlaneFlow(f.plane_depth, scene.motion, scene.rig, c.camera, true));
  }
  WriteText(dir / (p + "_meta.txt"), MetadataText(meta));
  out << "wrote " << scene.correspondences.size() << " correspondences to "
      << (dir / (p + "_corrs.csv")).string() << "\n";
  return 0;
}

// ---- solve -----------------------------------------------------------------

struct SolveFlags {
  std::string corrs;
  std::string solver = "6dof";
  std::string variant = "v2";
  int iters = 200;
  double threshold_px = 2.0;
  int lo_rounds = 5;
  double focal = 1000.0;
  uint64_t seed = 0;
  RigFlags rig;
  std::string out = "motion.txt";
  std::string mask = "inliers.txt";
  std::string undistorted = "undistorted.csv";
};

void WritePoints(const fs::path& path, const std::vector<ImagePoint>& pts) {
  std::string s = "u,v\n";
  for (const auto& p : pts) s += FormatDouble(p.u) + "," + FormatDouble(p.v) + "\n";
  WriteText(path, s);
}

int CmdSolve(const SolveFlags& f, std::ostream& out) {
  MotionModel model;
  Variant variant;
  ParseSolverTag(f.solver, &model);
  ParseVariantTag(f.variant, &variant);
  const std::vector<Correspondence> corrs = ReadCorrespondences(f.corrs);
  const RigConfig rig = f.rig.Rig();
  rig.Validate();
  RansacConfig rc;
  rc.iterations = f.iters;
  rc.inlier_threshold = f.threshold_px / f.focal;
  rc.local_opt_rounds = f.lo_rounds;
  rc.seed = f.seed;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  char line[256];
  if (variant == Variant::kV1) {
    const LocalFit fit = FitLocalV1(corrs, model, rig, f.seed);
    const double ms = elapsed_ms();
    WritePoints(f.undistorted, fit.undistorted);
    WriteMask(f.mask, std::vector<uint8_t>(corrs.size(), 1));
    std::snprintf(line, sizeof line,
                  "solver %s variant v1 correspondences %zu (per-correspondence fits, no "
                  "global motion) runtime_ms %.3f\n",
                  f.solver.c_str(), corrs.size(), ms);
    out << line;
    return 0;
  }
  const RobustEstimate r = variant == Variant::kV2 ? FitGlobalV2(corrs, model, rig, rc)
                                                   : FitHybridV3(corrs, model, rig, rc);
  const double ms = elapsed_ms();
  RigConfig urig = rig;
  if (!r.motion.scale_known) urig.baseline.setZero();
  WriteMotion(f.out, r.motion);
  WriteMask(f.mask, r.inlier_mask);
  WritePoints(f.undistorted, UndistortFeatures(corrs, r.motion, urig));
  std::snprintf(line, sizeof line,
                "solver %s variant %s inliers %d/%zu msac_score %.6g rms_inlier_px %.4f "
                "runtime_ms %.3f\n",
                f.solver.c_str(), f.variant.c_str(), r.inlier_count, corrs.size(), r.score,
                [&] {
                  const Scoring sc = rc.scoring.value_or(
                      variant == Variant::kV3 ? Scoring::kEpipolarSampson : DefaultScoring(model));
                  double sum = 0.0;
                  for (size_t i = 0; i < corrs.size(); ++i) {
                    if (!r.inlier_mask[i]) continue;
                    const double e = ScoringResidual(corrs[i], r.motion, rig, sc);
                    sum += e * e;
                  }
                  return r.inlier_count ? std::sqrt(sum / r.inlier_count) * f.focal : 0.0;
                }(),
                ms);
  out << line;
  return 0;
}

// ---- rectify ---------------------------------------------------------------

struct RectifyFlags {
  std::string mode = "rotation";
  std::string motion;
  std::string image1, image2;
  std::string flow12, flow21;
  std::string direction = "backward";
  double focal = 1000.0;
  RigFlags rig;
  std::string out_dir = ".";
};

// Depth as a 16-bit graymap scaled by the largest valid depth; invalid = 0.
Raster DepthImage(const DepthMap& d, double* scale) {
  double mx = 0.0;
  for (size_t i = 0; i < d.depth.size(); ++i) {
    if (d.valid[i]) mx = std::max(mx, d.depth[i]);
  }
  *scale = mx;
  Raster r(d.width, d.height, 1, 0.0f);
  for (size_t i = 0; i < d.depth.size(); ++i) {
    if (d.valid[i] && mx > 0.0) r.samples[i] = static_cast<float>(d.depth[i] / mx);
  }
  return r;
}

Raster MaskImage(const OcclusionMask& m) {
  Raster r(m.width, m.height, 1, 0.0f);
  for (size_t i = 0; i < m.source.size(); ++i) {
    r.samples[i] = m.source[i] == SourceSelect::kNone ? 0.0f : 1.0f;
  }
  return r;
}

int CmdRectify(const RectifyFlags& f, std::ostream& out) {
  const MotionEstimate motion = ReadMotion(f.motion);
  const Raster img1 = ReadImage(f.image1);
  const Raster img2 = ReadImage(f.image2);
  if (img1.width != img2.width || img1.height != img2.height ||
      img1.channels != img2.channels) {
    throw Error(ErrorCode::kDimensionMismatch, "the two images differ in size or channels");
  }
  RigConfig rig = f.rig.Rig();
  rig.Validate();
  if (!motion.scale_known) rig.baseline.setZero();
  const PinholeCamera cam{f.focal, img1.width, img1.height};
  const fs::path dir(f.out_dir);
  fs::create_directories(dir);

  if (f.mode == "rotation") {
    const WarpDirection d =
        f.direction == "forward" ? WarpDirection::kForward : WarpDirection::kBackward;
    const Raster gs1 = WarpImageRotation(img1, motion.omega, cam, d, rig, false);
    const Raster gs2 = WarpImageRotation(img2, motion.omega, cam, d, rig, true);
    WriteImage(ImagePath(dir, "gs1", gs1), gs1);
    WriteImage(ImagePath(dir, "gs2", gs2), gs2);
    const Raster fused = FuseWarped(gs1, gs2);
    WriteImage(ImagePath(dir, "fused", fused), fused);
    out << "wrote gs1, gs2, fused to " << dir.string() << "\n";
    return 0;
  }

  if (f.flow12.empty() || f.flow21.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "translation mode needs --flow12 and --flow21");
  }
  const FlowField raw12 = ReadFlow(f.flow12);
  const FlowField raw21 = ReadFlow(f.flow21);
  const FlowField f12 = FilterFlow(raw12, raw21, cam, rig, {}, false);
  const FlowField f21 = FilterFlow(raw21, raw12, cam, rig, {}, true);
  const auto [d1, d2] = BuildDepthMaps(f12, f21, motion, rig, cam);
  const auto [m1, m2] = BuildOcclusionMasks(d1, d2);
  const DepthMap fused = FuseDepth(d1, d2);
  const GsRender gs = RenderGsTranslation(img1, img2, fused, m1, m2, motion, rig, cam);
  WriteImage(ImagePath(dir, "gs", gs.image), gs.image);
  double s1, s2, sf;
  WriteImage(dir / "depth1.pgm", DepthImage(d1, &s1), 65535);
  WriteImage(dir / "depth2.pgm", DepthImage(d2, &s2), 65535);
  WriteImage(dir / "depth_fused.pgm", DepthImage(fused, &sf), 65535);
  WriteImage(dir / "mask1.pgm", MaskImage(m1));
  WriteImage(dir / "mask2.pgm", MaskImage(m2));
  WriteText(dir / "depth_scale.txt", "depth1=" + FormatDouble(s1) + "\ndepth2=" +
                                         FormatDouble(s2) + "\ndepth_fused=" +
                                         FormatDouble(sf) + "\n");
  out << "wrote gs, depth1, depth2, depth_fused, mask1, mask2 to " << dir.string() << "\n";
  return 0;
}

// ---- benchmark -------------------------------------------------------------

struct BenchmarkFlags {
  std::string sweep = "all";
  SweepConfig config;
  double threshold_px = 2.0;
  std::string out = "benchmark.csv";
};

int CmdBenchmark(BenchmarkFlags f, std::ostream& out) {
  f.config.ransac.inlier_threshold = f.threshold_px / f.config.camera.focal;
  std::vector<BenchmarkRecord> recs;
  if (f.sweep == "velocity" || f.sweep == "all") recs = VelocitySweep(f.config);
  if (f.sweep == "baseline" || f.sweep == "all") {
    const auto b = BaselineSweep(f.config);
    recs.insert(recs.end(), b.begin(), b.end());
  }
  Metadata meta = {{"sweep", f.sweep}, {"threshold_px", FormatDouble(f.threshold_px)}};
  for (auto& kv : SweepMetadata(f.config)) meta.push_back(kv);
  WriteBenchmarkCsv(f.out, recs, meta);
  out << "wrote " << recs.size() << " records to " << f.out << "\n";
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rolling-shutter to global-shutter motion recovery and rectification for "
               "two cameras with opposite readout.",
               "rs2gs"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  SynthFlags sf;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene: correspondences, "
                                            "ground truth, optional rendered RS pair");
  synth->option_defaults()->always_capture_default();
  synth->add_option("--motion", sf.motion, "Motion type")
      ->check(CLI::IsMember({"rot", "tx", "txy", "txyz", "general"}));
  synth->add_option("--mode", sf.mode, "exact: exp-map rotations; linearized: solver model")
      ->check(CLI::IsMember({"exact", "linearized"}));
  synth->add_option("--omega-deg", sf.omega_deg, "Angular speed, degrees per frame")
      ->check(CLI::Range(0.0, 30.0));
  synth->add_option("--trans-frac", sf.trans_frac,
                    "Translation per frame as a fraction of the min depth")
      ->check(CLI::Range(0.0, 0.1));
  synth->add_option("--sigma-px", sf.sigma_px, "Gaussian noise std (pixels)")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--outlier-fraction", sf.outlier_fraction, "Fraction of uniform outliers")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--points", sf.points, "Number of scene points")->check(CLI::PositiveNumber);
  synth->add_option("--min-depth", sf.min_depth, "Nearest scene depth")->check(CLI::PositiveNumber);
  synth->add_option("--max-depth", sf.max_depth, "Farthest scene depth")->check(CLI::PositiveNumber);
  synth->add_option("--baseline-ratio", sf.baseline_ratio, "|b| / min depth (b along x)")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--focal", sf.camera.focal, "Declared focal length (pixels)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--width", sf.camera.width, "Image width (pixels)")->check(CLI::PositiveNumber);
  synth->add_option("--height", sf.camera.height, "Image height (pixels)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", sf.seed, "Random seed");
  synth->add_option("--out-dir", sf.out_dir, "Output directory");
  synth->add_option("--prefix", sf.prefix, "Output file prefix");
  synth->add_flag("--render", sf.render, "Also render the RS pair, GS image and GT flows of a "
                                         "textured plane");
  synth->add_option("--plane-depth", sf.plane_depth, "Depth of the rendered plane")
      ->check(CLI::PositiveNumber);
  synth->add_option("--texture-scale", sf.texture_scale, "Feature size of the texture")
      ->check(CLI::PositiveNumber);

  SolveFlags so;
  auto* solve = app.add_subcommand("solve", "Estimate motion from a correspondence CSV");
  solve->option_defaults()->always_capture_default();
  solve->add_option("--corrs", so.corrs, "Correspondence CSV (u1,v1,u2,v2)")->required();
  solve->add_option("--solver", so.solver, "Minimal solver (v3: the init solver)")
      ->check(CLI::IsMember({"tx", "txy", "txyz", "rot", "6dof", "6dof-baseline"}));
  solve->add_option("--variant", so.variant, "v1 local, v2 LO-RANSAC, v3 hybrid")
      ->check(CLI::IsMember({"v1", "v2", "v3"}));
  solve->add_option("--iters", so.iters, "RANSAC iterations")->check(CLI::PositiveNumber);
  solve->add_option("--threshold-px", so.threshold_px, "Inlier threshold (pixels)")
      ->check(CLI::PositiveNumber);
  solve->add_option("--lo-rounds", so.lo_rounds, "Local optimization rounds")
      ->check(CLI::NonNegativeNumber);
  solve->add_option("--focal", so.focal, "Focal length (pixels) for pixel thresholds")
      ->check(CLI::PositiveNumber);
  solve->add_option("--seed", so.seed, "Random seed");
  AddRigFlags(solve, &so.rig);
  solve->add_option("--out", so.out, "Motion file");
  solve->add_option("--mask", so.mask, "Inlier mask file");
  solve->add_option("--undistorted", so.undistorted, "Undistorted first-image points (u,v)");

  RectifyFlags rf;
  auto* rectify = app.add_subcommand("rectify", "Undistort an RS image pair");
  rectify->option_defaults()->always_capture_default();
  rectify->add_option("--mode", rf.mode, "rotation: warp; translation: depth + render")
      ->check(CLI::IsMember({"rotation", "translation"}));
  rectify->add_option("--motion", rf.motion, "Motion file")->required();
  rectify->add_option("--image1", rf.image1, "Camera-1 RS image (PGM/PPM)")->required();
  rectify->add_option("--image2", rf.image2, "Camera-2 RS image (PGM/PPM)")->required();
  rectify->add_option("--flow12", rf.flow12, "RSFLOW camera 1 -> 2 (translation)");
  rectify->add_option("--flow21", rf.flow21, "RSFLOW camera 2 -> 1 (translation)");
  rectify->add_option("--direction", rf.direction, "Rotation warp direction")
      ->check(CLI::IsMember({"backward", "forward"}));
  rectify->add_option("--focal", rf.focal, "Focal length (pixels)")->check(CLI::PositiveNumber);
  AddRigFlags(rectify, &rf.rig);
  rectify->add_option("--out-dir", rf.out_dir, "Output directory");

  BenchmarkFlags bf;
  SweepConfig& sc = bf.config;
  auto* bench = app.add_subcommand("benchmark", "Synthetic velocity and baseline sweeps (CSV)");
  bench->option_defaults()->always_capture_default();
  bench->add_option("--sweep", bf.sweep, "Which sweep")
      ->check(CLI::IsMember({"velocity", "baseline", "all"}));
  bench->add_option("--levels", sc.omega_levels_deg, "Angular speeds (deg/frame)")
      ->delimiter(',');
  bench->add_option("--max-omega-deg", sc.max_omega_deg, "Level at which |t| = max-trans-frac")
      ->check(CLI::PositiveNumber);
  bench->add_option("--max-trans-frac", sc.max_trans_frac, "Translation at the top level");
  bench->add_option("--ratios", sc.baseline_ratios, "Baseline / min depth ratios")
      ->delimiter(',');
  bench->add_option("--baseline-omega-deg", sc.baseline_omega_deg, "Baseline sweep angular speed");
  bench->add_option("--baseline-trans-frac", sc.baseline_trans_frac,
                    "Baseline sweep translation (fraction of min depth)");
  bench->add_option("--seeds", sc.seeds, "Records per sweep point")->check(CLI::PositiveNumber);
  bench->add_option("--scenes-per-seed", sc.scenes_per_seed, "Scenes pooled per record")
      ->check(CLI::PositiveNumber);
  bench->add_option("--points", sc.points, "Points per scene")->check(CLI::PositiveNumber);
  bench->add_option("--sigma-px", sc.sigma_px, "Noise std (pixels)")->check(CLI::NonNegativeNumber);
  bench->add_option("--outlier-fraction", sc.outlier_fraction, "Outlier fraction")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--min-depth", sc.min_depth, "Nearest scene depth")->check(CLI::PositiveNumber);
  bench->add_option("--max-depth", sc.max_depth, "Farthest scene depth")->check(CLI::PositiveNumber);
  bench->add_option("--focal", sc.camera.focal, "Focal length (pixels)")->check(CLI::PositiveNumber);
  bench->add_option("--iters", sc.ransac.iterations, "RANSAC iterations")
      ->check(CLI::PositiveNumber);
  bench->add_option("--threshold-px", bf.threshold_px, "Inlier threshold (pixels)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--lo-rounds", sc.ransac.local_opt_rounds, "Local optimization rounds")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", sc.seed, "Base seed");
  bench->add_option("--threads", sc.threads, "Worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  bench->add_flag("--timing", sc.timing, "Fill runtime_us (wall clock; not reproducible)");
  bench->add_option("--out", bf.out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    if (synth->parsed()) {
      if (sf.min_depth >= sf.max_depth) {
        err << "error: --min-depth must be below --max-depth\n" << synth->help();
        return 2;
      }
      return CmdSynth(sf, out);
    }
    if (solve->parsed()) return CmdSolve(so, out);
    if (rectify->parsed()) return CmdRectify(rf, out);
    if (bench->parsed()) return CmdBenchmark(bf, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace rs2gs
