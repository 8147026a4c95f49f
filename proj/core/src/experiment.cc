#include "rs2gs/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "rs2gs/error.h"
#include "rs2gs/rectify.h"

namespace rs2gs {
namespace {

constexpr std::pair<MotionModel, std::string_view> kSolverTags[] = {
    {MotionModel::kTx, "tx"},         {MotionModel::kTxy, "txy"},
    {MotionModel::kTxyz, "txyz"},     {MotionModel::kRotation, "rot"},
    {MotionModel::kSixDof, "6dof"},   {MotionModel::kSixDofBaseline, "6dof-baseline"},
};

constexpr std::pair<Variant, std::string_view> kVariantTags[] = {
    {Variant::kV1, "v1"}, {Variant::kV2, "v2"}, {Variant::kV3, "v3"}, {Variant::kInterp, "interp"},
};

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RigConfig EstimateRig(const MotionEstimate& m, const RigConfig& rig) {
  RigConfig out = rig;
  if (!m.scale_known) out.baseline.setZero();
  return out;
}

struct SweepPoint {
  double omega_deg, trans_frac, baseline_ratio;
};

// Runs fn(i) for i in [0, n) on `threads` workers; results go to fixed slots.
template <typename F>
void ParallelFor(int n, int threads, const F& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n && !failed.load();) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<BenchmarkRecord> Sweep(const SweepConfig& config, const std::vector<SweepPoint>& points,
                                   const std::vector<SolverVariant>& runs) {
  if (config.seeds < 1 || config.scenes_per_seed < 1 || config.points < 1) {
    throw Error(ErrorCode::kInvalidArgument, "seeds, scenes_per_seed and points must be >= 1");
  }
  config.ransac.Validate();
  const int tasks = static_cast<int>(points.size()) * config.seeds;
  std::vector<std::vector<BenchmarkRecord>> slots(tasks);
  ParallelFor(tasks, config.threads, [&](int task) {
    const int p = task / config.seeds, s = task % config.seeds;
    const SweepPoint& pt = points[p];
    std::vector<std::vector<double>> errors(runs.size());
    std::vector<double> runtime(runs.size(), 0.0);
    for (int k = 0; k < config.scenes_per_seed; ++k) {
      SceneConfig sc;
      sc.num_points = config.points;
      sc.motion = SceneMotion::kGeneral;
      sc.omega_deg = pt.omega_deg;
      sc.trans_frac = pt.trans_frac;
      sc.baseline_ratio = pt.baseline_ratio;
      sc.min_depth = config.min_depth;
      sc.max_depth = config.max_depth;
      sc.sigma_px = config.sigma_px;
      sc.outlier_fraction = config.outlier_fraction;
      sc.camera = config.camera;
      sc.seed = SceneSeed(config.seed, p, s, k);
      const SyntheticScene scene = GenerateScene(sc);
      for (size_t r = 0; r < runs.size(); ++r) {
        TrialSpec spec{runs[r].solver, runs[r].variant, config.ransac};
        spec.ransac.seed = SplitMix(sc.seed ^ (0x5bd1e995ULL * (r + 1)));
        TrialResult res = RunTrial(scene, spec);
        errors[r].insert(errors[r].end(), res.errors_px.begin(), res.errors_px.end());
        runtime[r] += res.runtime_us;
      }
    }
    for (size_t r = 0; r < runs.size(); ++r) {
      const ErrorStats st = Summarize(errors[r]);
      BenchmarkRecord rec;
      rec.solver = std::string(runs[r].variant == Variant::kInterp ? "interp"
                                                                   : SolverTag(runs[r].solver));
      rec.variant = std::string(VariantTag(runs[r].variant));
      rec.omega_deg = pt.omega_deg;
      rec.trans_frac = pt.trans_frac;
      rec.sigma_px = config.sigma_px;
      rec.baseline_ratio = pt.baseline_ratio;
      rec.seed = config.seed + s;
      rec.median_px = st.median;
      rec.mean_px = st.mean;
      rec.p90_px = st.p90;
      rec.runtime_us = config.timing ? runtime[r] / config.scenes_per_seed : 0.0;
      slots[task].push_back(rec);
    }
  });
  std::vector<BenchmarkRecord> out;
  for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

std::string_view SolverTag(MotionModel model) {
  for (const auto& [m, tag] : kSolverTags) {
    if (m == model) return tag;
  }
  return "?";
}

bool ParseSolverTag(std::string_view tag, MotionModel* model) {
  for (const auto& [m, t] : kSolverTags) {
    if (t == tag) {
      *model = m;
      return true;
    }
  }
  return false;
}

std::string_view VariantTag(Variant variant) {
  for (const auto& [v, tag] : kVariantTags) {
    if (v == variant) return tag;
  }
  return "?";
}

bool ParseVariantTag(std::string_view tag, Variant* variant) {
  for (const auto& [v, t] : kVariantTags) {
    if (t == tag) {
      *variant = v;
      return true;
    }
  }
  return false;
}

TrialResult RunTrial(const SyntheticScene& scene, const TrialSpec& spec) {
  const auto& corrs = scene.correspondences;
  const double f = scene.camera.focal;
  TrialResult out;
  auto pixel = [&](const ImagePoint& a, const ImagePoint& b) { return (a.vec() - b.vec()).norm() * f; };

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ImagePoint> predicted;
  try {
    switch (spec.variant) {
      case Variant::kInterp:
        for (const auto& c : corrs) predicted.push_back(InterpolatedGs(c, scene.rig));
        break;
      case Variant::kV1:
        predicted = FitLocalV1(corrs, spec.solver, scene.rig, spec.ransac.seed).undistorted;
        break;
      case Variant::kV2:
      case Variant::kV3: {
        const RobustEstimate r = spec.variant == Variant::kV2
                                     ? FitGlobalV2(corrs, spec.solver, scene.rig, spec.ransac)
                                     : FitHybridV3(corrs, spec.solver, scene.rig, spec.ransac);
        predicted = UndistortFeatures(corrs, r.motion, EstimateRig(r.motion, scene.rig));
        break;
      }
    }
  } catch (const Error&) {
    out.failed = true;
    predicted = UndistortFeatures(corrs, MotionEstimate::Zero(spec.solver), scene.rig);
  }
  out.runtime_us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();

  for (size_t i = 0; i < corrs.size(); ++i) {
    if (scene.is_outlier[i]) continue;
    out.errors_px.push_back(pixel(predicted[i], scene.gs[i].first));
  }
  return out;
}

ErrorStats Summarize(std::vector<double> v) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (v.empty()) return {nan, nan, nan};
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * (v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  double sum = 0.0;
  for (double x : v) sum += x;
  return {quantile(0.5), sum / v.size(), quantile(0.9)};
}

std::vector<SolverVariant> DefaultVelocityRuns() {
  using M = MotionModel;
  return {{M::kSixDof, Variant::kV2}, {M::kRotation, Variant::kV2}, {M::kTxyz, Variant::kV2},
          {M::kTxy, Variant::kV2},    {M::kSixDof, Variant::kV1},   {M::kRotation, Variant::kV1},
          {M::kTxyz, Variant::kV1},   {M::kTxy, Variant::kV1},      {M::kTxyz, Variant::kV3},
          {M::kTxy, Variant::kV3},    {M::kSixDof, Variant::kInterp}};
}

std::vector<SolverVariant> DefaultBaselineRuns() {
  using M = MotionModel;
  return {{M::kSixDof, Variant::kV2},         {M::kRotation, Variant::kV2},
          {M::kTxyz, Variant::kV2},           {M::kTxy, Variant::kV2},
          {M::kSixDofBaseline, Variant::kV2}, {M::kSixDof, Variant::kInterp}};
}

uint64_t SceneSeed(uint64_t base, int point, int seed_index, int scene) {
  uint64_t h = SplitMix(base);
  h = SplitMix(h ^ static_cast<uint64_t>(point));
  h = SplitMix(h ^ static_cast<uint64_t>(seed_index));
  return SplitMix(h ^ static_cast<uint64_t>(scene));
}

std::vector<BenchmarkRecord> VelocitySweep(const SweepConfig& config) {
  if (!(config.max_omega_deg > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max_omega_deg must be > 0");
  }
  std::vector<SweepPoint> points;
  for (double w : config.omega_levels_deg) {
    points.push_back({w, w / config.max_omega_deg * config.max_trans_frac, 0.0});
  }
  return Sweep(config, points, config.runs.empty() ? DefaultVelocityRuns() : config.runs);
}

std::vector<BenchmarkRecord> BaselineSweep(const SweepConfig& config) {
  std::vector<SweepPoint> points;
  for (double b : config.baseline_ratios) {
    points.push_back({config.baseline_omega_deg, config.baseline_trans_frac, b});
  }
  return Sweep(config, points, config.runs.empty() ? DefaultBaselineRuns() : config.runs);
}

Metadata SweepMetadata(const SweepConfig& c) {
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + FormatDouble(v[i]);
    return s;
  };
  return {
      {"omega_levels_deg", list(c.omega_levels_deg)},
      {"max_omega_deg", FormatDouble(c.max_omega_deg)},
      {"max_trans_frac", FormatDouble(c.max_trans_frac)},
      {"baseline_ratios", list(c.baseline_ratios)},
      {"baseline_omega_deg", FormatDouble(c.baseline_omega_deg)},
      {"baseline_trans_frac", FormatDouble(c.baseline_trans_frac)},
      {"seeds", std::to_string(c.seeds)},
      {"scenes_per_seed", std::to_string(c.scenes_per_seed)},
      {"points", std::to_string(c.points)},
      {"sigma_px", FormatDouble(c.sigma_px)},
      {"outlier_fraction", FormatDouble(c.outlier_fraction)},
      {"min_depth", FormatDouble(c.min_depth)},
      {"max_depth", FormatDouble(c.max_depth)},
      {"focal_px", FormatDouble(c.camera.focal)},
      {"width", std::to_string(c.camera.width)},
      {"height", std::to_string(c.camera.height)},
      {"iterations", std::to_string(c.ransac.iterations)},
      {"inlier_threshold", FormatDouble(c.ransac.inlier_threshold)},
      {"local_opt_rounds", std::to_string(c.ransac.local_opt_rounds)},
      {"seed", std::to_string(c.seed)},
      {"timing", c.timing ? "1" : "0"},
  };
}

}  // namespace rs2gs
