#include "rs2gs/robust.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "rs2gs/error.h"
#include "rs2gs/rectify.h"
#include "rs2gs/refine.h"
#include "rs2gs/rotation.h"
#include "rs2gs/solvers.h"

namespace rs2gs {
namespace {

// Scale-free translations cannot be combined with a metric baseline.
RigConfig ScoringRig(const MotionEstimate& motion, const RigConfig& rig) {
  RigConfig out = rig;
  if (!motion.scale_known) out.baseline.setZero();
  return out;
}

double HomographyResidual(const Correspondence& c, const Vec3& omega, const RigConfig& rig) {
  const Mat3 H = rig.relative_rotation *
                 RotationFromAxisAngle(omega, rig.RowTime(c.second.v)) *
                 RotationFromAxisAngle(omega, rig.RowTime(c.first.v)).transpose();
  const Vec3 x = H.transpose() * c.second.homogeneous();
  if (!(x.z() > 0.0)) return std::numeric_limits<double>::infinity();
  return (c.first.vec() - x.head<2>() / x.z()).norm();
}

struct Scored {
  double score = std::numeric_limits<double>::infinity();
  std::vector<double> residuals;
};

Scored Score(std::span<const Correspondence> corrs, const MotionEstimate& m,
             const RigConfig& rig, Scoring scoring, double th) {
  Scored s;
  s.score = 0.0;
  s.residuals.resize(corrs.size());
  const double th2 = th * th;
  for (size_t i = 0; i < corrs.size(); ++i) {
    const double r = ScoringResidual(corrs[i], m, rig, scoring);
    s.residuals[i] = std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    s.score += std::min(r * r, th2);
  }
  return s;
}

std::vector<Correspondence> Inliers(std::span<const Correspondence> corrs,
                                    const std::vector<double>& residuals, double th) {
  std::vector<Correspondence> out;
  for (size_t i = 0; i < corrs.size(); ++i) {
    if (residuals[i] <= th) out.push_back(corrs[i]);
  }
  return out;
}

// Shared LO-RANSAC loop. `sample_model` picks the minimal solver; `lift`
// turns its candidates into the estimated model.
RobustEstimate Ransac(std::span<const Correspondence> corrs, MotionModel sample_model,
                      const std::function<MotionEstimate(const MotionEstimate&)>& lift,
                      const RigConfig& rig, const RansacConfig& config, Scoring scoring) {
  config.Validate();
  const int m = MinimalSampleSize(sample_model);
  if (corrs.size() < static_cast<size_t>(m)) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "need " + std::to_string(m) + " correspondences, got " +
                    std::to_string(corrs.size()));
  }
  const double th = config.inlier_threshold;

  std::mt19937_64 rng(config.seed);
  std::vector<size_t> all(corrs.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<size_t>> schedule(config.iterations);
  for (auto& s : schedule) std::sample(all.begin(), all.end(), std::back_inserter(s), m, rng);

  RobustEstimate best;
  Scored best_scored;
  bool found = false;
  std::vector<Correspondence> sample(m);

  auto local_optimize = [&](MotionEstimate model, Scored scored) {
    RefineOptions opts;
    opts.truncation = th;
    for (int round = 0; round < config.local_opt_rounds; ++round) {
      const auto inl = Inliers(corrs, scored.residuals, th);
      if (inl.size() < static_cast<size_t>(MinimalSampleSize(model.model))) break;
      MotionEstimate refined;
      try {
        refined = Refine(inl, model, ScoringRig(model, rig), opts).motion;
      } catch (const Error&) {
        break;
      }
      Scored s = Score(corrs, refined, rig, scoring, th);
      if (!(s.score < scored.score)) break;
      model = refined;
      scored = std::move(s);
    }
    return std::make_pair(model, std::move(scored));
  };

  for (const auto& idx : schedule) {
    for (int k = 0; k < m; ++k) sample[k] = corrs[idx[k]];
    SolverResult res;
    try {
      res = SolveMinimal(sample_model, sample, rig);
    } catch (const Error&) {
      ++best.degenerate_samples;
    }
    for (const auto& cand : res.candidates) {
      const MotionEstimate h = lift(cand);
      Scored s = Score(corrs, h, rig, scoring, th);
      if (!found || s.score < best_scored.score) {
        auto [model, scored] = local_optimize(h, std::move(s));
        if (!found || scored.score < best_scored.score) {
          best.motion = model;
          best_scored = std::move(scored);
          found = true;
        }
      }
    }
    best.trace.push_back(found ? best_scored.score : std::numeric_limits<double>::infinity());
  }
  if (!found) throw Error(ErrorCode::kNoModelFound, "every sample was degenerate");

  best.score = best_scored.score;
  best.inlier_mask.resize(corrs.size());
  best.inlier_count = 0;
  for (size_t i = 0; i < corrs.size(); ++i) {
    best.inlier_mask[i] = best_scored.residuals[i] <= th;
    best.inlier_count += best.inlier_mask[i];
  }
  return best;
}

// Grid bin of x in [lo, hi] with n equal-width bins.
int Bin(double x, double lo, double hi, int n) {
  if (!(hi > lo)) return 0;
  return std::clamp(static_cast<int>((x - lo) / (hi - lo) * n), 0, n - 1);
}

}  // namespace

Scoring DefaultScoring(MotionModel model) {
  return model == MotionModel::kRotation ? Scoring::kRsHomography
                                         : Scoring::kEpipolarSampson;
}

double ScoringResidual(const Correspondence& corr, const MotionEstimate& motion,
                       const RigConfig& rig, Scoring scoring) {
  if (scoring == Scoring::kRsHomography) return HomographyResidual(corr, motion.omega, rig);
  return SampsonDistance(corr, motion, ScoringRig(motion, rig));
}

void RansacConfig::Validate() const {
  if (iterations < 1 || !(inlier_threshold > 0.0) || local_opt_rounds < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "RANSAC needs iterations >= 1, threshold > 0, local_opt_rounds >= 0");
  }
}

LocalFit FitLocalV1(std::span<const Correspondence> corrs, MotionModel model,
                    const RigConfig& rig, uint64_t seed) {
  constexpr int kDraws = 10;
  const int m = MinimalSampleSize(model);
  if (corrs.size() < static_cast<size_t>(m)) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "need " + std::to_string(m) + " correspondences");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, corrs.size() - 2);
  LocalFit out;
  out.motions.reserve(corrs.size());
  out.undistorted.reserve(corrs.size());
  std::vector<Correspondence> sample(m);
  for (size_t i = 0; i < corrs.size(); ++i) {
    const Correspondence& c = corrs[i];
    bool done = false;
    if (model == MotionModel::kTx || model == MotionModel::kTxy) {
      try {
        const TranslationPoint p =
            model == MotionModel::kTx
                ? SolveTx(c, rig, std::numeric_limits<double>::infinity())
                : SolveTxy(c, rig);
        MotionEstimate e = MotionEstimate::Zero(model);
        e.scale_known = false;
        e.t = p.t_over_depth;
        out.motions.push_back(NormalizeGauge(e));
        out.undistorted.push_back(p.gs);
        done = true;
      } catch (const Error&) {
      }
    } else {
      for (int draw = 0; draw < kDraws && !done; ++draw) {
        sample[0] = c;
        // Distinct partners, never c itself.
        std::vector<size_t> used;
        for (int k = 1; k < m; ++k) {
          size_t j;
          do {
            j = pick(rng);
            if (j >= i) ++j;
          } while (std::find(used.begin(), used.end(), j) != used.end());
          used.push_back(j);
          sample[k] = corrs[j];
        }
        SolverResult res;
        try {
          res = SolveMinimal(model, sample, rig);
        } catch (const Error&) {
          continue;
        }
        if (res.candidates.empty()) continue;
        size_t chosen = 0;
        for (size_t k = 1; k < res.candidates.size(); ++k) {
          if (res.residuals[k] - res.residuals[0] > 1e-9) break;
          if (res.candidates[k].omega.norm() < res.candidates[chosen].omega.norm()) chosen = k;
        }
        const MotionEstimate& e = res.candidates[chosen];
        out.motions.push_back(e);
        out.undistorted.push_back(UndistortFeature(c, e, ScoringRig(e, rig)));
        done = true;
      }
    }
    if (!done) {
      out.motions.push_back(MotionEstimate::Zero(model));
      out.undistorted.push_back(c.first);
    }
  }
  return out;
}

RobustEstimate FitGlobalV2(std::span<const Correspondence> corrs, MotionModel model,
                           const RigConfig& rig, const RansacConfig& config) {
  return Ransac(corrs, model, [](const MotionEstimate& m) { return m; }, rig, config,
                config.scoring.value_or(DefaultScoring(model)));
}

RobustEstimate FitHybridV3(std::span<const Correspondence> corrs, MotionModel init_model,
                           const RigConfig& rig, const RansacConfig& config) {
  if (init_model == MotionModel::kRotation) {
    throw Error(ErrorCode::kInvalidArgument, "v3 needs a translation-bearing init solver");
  }
  if (init_model == MotionModel::kSixDof || init_model == MotionModel::kSixDofBaseline) {
    return FitGlobalV2(corrs, init_model, rig, config);
  }
  auto lift = [](const MotionEstimate& m) {
    MotionEstimate full = m;
    full.model = MotionModel::kSixDof;
    full.scale_known = false;
    return NormalizeGauge(full);
  };
  return Ransac(corrs, init_model, lift, rig, config,
                config.scoring.value_or(Scoring::kEpipolarSampson));
}

std::vector<size_t> PreselectCorrespondences(std::span<const Correspondence> corrs,
                                             const PinholeCamera& camera,
                                             const RigConfig& rig,
                                             const PreselectConfig& config) {
  if (config.target_count < 1 || config.time_bins < 1 || config.displacement_bins < 1 ||
      config.center_band_fraction < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid preselection config");
  }
  const double band = config.center_band_fraction * camera.frame_rows();
  std::vector<size_t> kept;
  std::vector<double> dt, dd;
  for (size_t i = 0; i < corrs.size(); ++i) {
    const Correspondence& c = corrs[i];
    if (!c.first.finite() || !c.second.finite() || std::abs(c.first.v) < band) continue;
    const Vec3 a = rig.AlignSecond(c.second);
    kept.push_back(i);
    dt.push_back(std::abs(c.first.v - c.second.v));
    dd.push_back((c.first.vec() - a.head<2>() / a.z()).norm());
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyAfterFiltering, "no correspondence outside the center band");
  }
  if (kept.size() <= static_cast<size_t>(config.target_count)) return kept;

  const auto [tlo, thi] = std::minmax_element(dt.begin(), dt.end());
  const auto [dlo, dhi] = std::minmax_element(dd.begin(), dd.end());
  const int nt = config.time_bins, nd = config.displacement_bins;
  std::vector<std::vector<size_t>> strata(static_cast<size_t>(nt) * nd);
  for (size_t k = 0; k < kept.size(); ++k) {
    const int b = Bin(dt[k], *tlo, *thi, nt) * nd + Bin(dd[k], *dlo, *dhi, nd);
    strata[b].push_back(kept[k]);
  }
  std::erase_if(strata, [](const auto& s) { return s.empty(); });

  // Water filling: small strata are taken whole, the rest share equally.
  std::sort(strata.begin(), strata.end(),
            [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> out;
  size_t remaining = config.target_count;
  for (size_t s = 0; s < strata.size(); ++s) {
    const size_t left = strata.size() - s;
    // Floor share; the remainder rolls over to the larger strata that follow.
    const size_t take = std::min(remaining / left, strata[s].size());
    std::sample(strata[s].begin(), strata[s].end(), std::back_inserter(out), take, rng);
    remaining -= take;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rs2gs
