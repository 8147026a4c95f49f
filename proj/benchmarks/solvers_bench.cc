#include <vector>

#include <benchmark/benchmark.h>

#include "rs2gs/robust.h"
#include "rs2gs/solvers.h"
#include "rs2gs/synth.h"

namespace rs2gs {
namespace {

std::vector<SyntheticScene> Scenes(SceneMotion motion, int points, int count, double baseline) {
  std::vector<SyntheticScene> out;
  for (int k = 0; k < count; ++k) {
    SceneConfig c;
    c.num_points = points;
    c.motion = motion;
    c.omega_deg = motion == SceneMotion::kTxyz ? 0.0 : 20.0;
    c.trans_frac = motion == SceneMotion::kRotation ? 0.0 : 0.05;
    c.baseline_ratio = baseline;
    c.mode = GenerationMode::kLinearized;
    c.sigma_px = 0.0;
    c.seed = 100 + k;
    out.push_back(GenerateScene(c));
  }
  return out;
}

void MinimalSolver(benchmark::State& state, MotionModel model, SceneMotion motion,
                   double baseline) {
  const auto scenes = Scenes(motion, MinimalSampleSize(model), 64, baseline);
  size_t k = 0;
  for (auto _ : state) {
    const SyntheticScene& s = scenes[k++ % scenes.size()];
    try {
      benchmark::DoNotOptimize(SolveMinimal(model, s.correspondences, s.rig));
    } catch (const std::exception&) {
    }
  }
}
BENCHMARK_CAPTURE(MinimalSolver, txy, MotionModel::kTxy, SceneMotion::kTxyz, 0.0);
BENCHMARK_CAPTURE(MinimalSolver, txyz, MotionModel::kTxyz, SceneMotion::kTxyz, 0.0);
BENCHMARK_CAPTURE(MinimalSolver, rot, MotionModel::kRotation, SceneMotion::kRotation, 0.0);
BENCHMARK_CAPTURE(MinimalSolver, 6dof, MotionModel::kSixDof, SceneMotion::kGeneral, 0.0);
BENCHMARK_CAPTURE(MinimalSolver, 6dof_baseline, MotionModel::kSixDofBaseline,
                  SceneMotion::kGeneral, 0.05);

// One image: 100 noisy correspondences, 200 LO-RANSAC iterations.
void GlobalFit(benchmark::State& state, MotionModel model) {
  SceneConfig c;
  c.num_points = 100;
  c.motion = SceneMotion::kGeneral;
  c.omega_deg = 30.0;
  c.trans_frac = 0.1;
  c.seed = 7;
  const SyntheticScene s = GenerateScene(c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitGlobalV2(s.correspondences, model, RigConfig{}, RansacConfig{}));
  }
}
BENCHMARK_CAPTURE(GlobalFit, txy, MotionModel::kTxy)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(GlobalFit, rot, MotionModel::kRotation)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(GlobalFit, 6dof, MotionModel::kSixDof)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace rs2gs

BENCHMARK_MAIN();
