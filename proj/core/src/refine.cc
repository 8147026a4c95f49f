#include "rs2gs/refine.h"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <ceres/jet.h>

#include "rs2gs/error.h"
#include "rs2gs/rotation.h"

namespace rs2gs {
namespace {

constexpr int kMaxKnots = 5;

// Every cost is a knot motion; a constant-velocity estimate is one knot.
struct Problem {
  std::span<const Correspondence> corrs;
  RigConfig rig;
  KnotMotion layout;  // knot rows; values unused
  bool rotation_only = false;

  int stride() const { return rotation_only ? 3 : 6; }
  int dims() const { return rotation_only ? 2 : 1; }
  int num_params() const { return static_cast<int>(layout.knots.size()) * stride(); }
  int num_residuals() const { return static_cast<int>(corrs.size()) * dims(); }

  template <typename T>
  RowPoseT<T> Pose(const T* p, double tau) const {
    int k;
    double a;
    layout.Locate(tau, &k, &a);
    const int s = stride();
    Eigen::Matrix<T, 3, 1> omega, t = Eigen::Matrix<T, 3, 1>::Zero();
    for (int j = 0; j < 3; ++j) {
      omega[j] = p[k * s + j];
      if (!rotation_only) t[j] = p[k * s + 3 + j];
    }
    if (layout.knots.size() > 1 && a != 0.0) {
      for (int j = 0; j < 3; ++j) {
        // Difference form: equal knots reproduce the single motion bitwise.
        omega[j] += T(a) * (p[(k + 1) * s + j] - omega[j]);
        if (!rotation_only) t[j] += T(a) * (p[(k + 1) * s + 3 + j] - t[j]);
      }
    }
    return ConstantVelocityPose<T>(omega, t, T(tau));
  }

  template <typename T>
  void Residual(const T* p, size_t i, T* out) const {
    using V3 = Eigen::Matrix<T, 3, 1>;
    const Correspondence& c = corrs[i];
    const RowPoseT<T> p1 = Pose(p, rig.RowTime(c.first.v));
    const RowPoseT<T> p2 = Pose(p, rig.RowTime(c.second.v));
    const V3 u = c.first.homogeneous().cast<T>();
    const V3 u2 = c.second.homogeneous().cast<T>();
    const Eigen::Matrix<T, 3, 3> Rr = rig.relative_rotation.cast<T>();
    if (rotation_only) {
      const Eigen::Matrix<T, 3, 3> H = Rr * p2.rotation * p1.rotation.transpose();
      const V3 x = H.transpose() * u2;
      out[0] = u[0] - x[0] / x[2];
      out[1] = u[1] - x[1] / x[2];
      return;
    }
    const RowPoseT<T> rel = RelativePose(p1, p2, Rr, V3(rig.baseline.cast<T>()));
    const Eigen::Matrix<T, 3, 3> E = SkewSymmetric<T>(rel.translation) * rel.rotation;
    const V3 Eu = E * u;
    const V3 Etu2 = E.transpose() * u2;
    const T den = Eu[0] * Eu[0] + Eu[1] * Eu[1] + Etu2[0] * Etu2[0] + Etu2[1] * Etu2[1];
    if (!(den > T(1e-300))) {
      out[0] = T(0.0);
      return;
    }
    using std::sqrt;
    out[0] = u2.dot(Eu) / sqrt(den);
  }
};

template <int N>
void EvaluateJets(const Problem& pb, const Eigen::VectorXd& p, Eigen::VectorXd* r,
                  Eigen::MatrixXd* J) {
  using Jet = ceres::Jet<double, N>;
  const int P = pb.num_params();
  std::vector<Jet> pj(P);
  for (int k = 0; k < P; ++k) pj[k] = Jet(p[k], k);
  const int d = pb.dims();
  Jet out[2];
  for (size_t i = 0; i < pb.corrs.size(); ++i) {
    pb.Residual(pj.data(), i, out);
    for (int j = 0; j < d; ++j) {
      (*r)[i * d + j] = out[j].a;
      J->row(i * d + j) = out[j].v.head(P).transpose();
    }
  }
}

void Evaluate(const Problem& pb, const Eigen::VectorXd& p, Eigen::VectorXd* r,
              Eigen::MatrixXd* J) {
  r->resize(pb.num_residuals());
  if (J == nullptr) {
    const int d = pb.dims();
    double out[2];
    for (size_t i = 0; i < pb.corrs.size(); ++i) {
      pb.Residual(p.data(), i, out);
      for (int j = 0; j < d; ++j) (*r)[i * d + j] = out[j];
    }
    return;
  }
  J->resize(pb.num_residuals(), pb.num_params());
  switch (pb.num_params()) {
    case 3: EvaluateJets<3>(pb, p, r, J); break;
    case 6: EvaluateJets<6>(pb, p, r, J); break;
    default: EvaluateJets<6 * kMaxKnots>(pb, p, r, J); break;
  }
}

// Cost with optional truncation; truncated items lose their Jacobian rows.
double Cost(const Problem& pb, const Eigen::VectorXd& p, double truncation,
            Eigen::VectorXd* r, Eigen::MatrixXd* J) {
  Evaluate(pb, p, r, J);
  const int d = pb.dims();
  const double cap = truncation * truncation;
  double cost = 0.0;
  for (size_t i = 0; i < pb.corrs.size(); ++i) {
    const double c = r->segment(i * d, d).squaredNorm();
    if (truncation > 0.0 && c > cap) {
      cost += cap;
      if (J) J->middleRows(i * d, d).setZero();
    } else {
      cost += c;
    }
  }
  return std::isfinite(cost) ? cost : std::numeric_limits<double>::infinity();
}

struct LmResult {
  Eigen::VectorXd params;
  double initial_cost = 0.0;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

LmResult Minimize(const Problem& pb, Eigen::VectorXd p, const std::vector<int>& free,
                  const std::function<void(Eigen::VectorXd&)>& project,
                  const RefineOptions& opt) {
  Eigen::VectorXd r, r_new;
  Eigen::MatrixXd J;
  LmResult res;
  double cost = Cost(pb, p, opt.truncation, &r, &J);
  res.initial_cost = cost;
  if (free.empty() || cost == 0.0) {
    res.params = p;
    res.cost = cost;
    res.converged = true;
    return res;
  }
  const int nf = static_cast<int>(free.size());
  double lambda = opt.initial_damping;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    Eigen::MatrixXd Jf(J.rows(), nf);
    for (int k = 0; k < nf; ++k) Jf.col(k) = J.col(free[k]);
    const Eigen::MatrixXd A = Jf.transpose() * Jf;
    const Eigen::VectorXd g = Jf.transpose() * r;
    const double floor = 1e-12 * std::max(A.diagonal().maxCoeff(), 1e-300);
    bool accepted = false;
    Eigen::VectorXd q;
    double new_cost = cost;
    while (lambda <= 1e16) {
      Eigen::MatrixXd Ad = A;
      Ad.diagonal().array() += lambda * (A.diagonal().array() + floor);
      const Eigen::VectorXd delta = Ad.ldlt().solve(-g);
      q = p;
      for (int k = 0; k < nf; ++k) q[free[k]] += delta[k];
      if (project) project(q);
      new_cost = Cost(pb, q, opt.truncation, &r_new, nullptr);
      if (new_cost < cost) {
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction left at working precision.
      res.converged = true;
      break;
    }
    const double decrease = (cost - new_cost) / cost;
    // Steps at round-off level keep "improving" the cost by noise.
    const double step = (q - p).norm();
    p = q;
    cost = Cost(pb, p, opt.truncation, &r, &J);
    lambda = std::max(lambda / 10.0, 1e-12);
    if (decrease < opt.relative_tolerance || cost == 0.0 ||
        step <= 1e-12 * (p.norm() + 1e-300)) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.params = p;
  res.cost = cost;
  res.iterations = it;
  return res;
}

KnotMotion Layout(int knot_count, double row_min, double row_max) {
  return KnotMotion::Uniform(MotionEstimate{}, knot_count, row_min, row_max);
}

bool RotationOnly(const MotionEstimate& m) { return m.model == MotionModel::kRotation; }

// Parameter indices (within one knot of stride 6) the model lets move.
std::vector<int> FreeTranslationParams(MotionModel model) {
  switch (model) {
    case MotionModel::kTx: return {3};
    case MotionModel::kTxy: return {3, 4};
    case MotionModel::kTxyz: return {3, 4, 5};
    default: return {0, 1, 2, 3, 4, 5};
  }
}

bool HasSumGauge(MotionModel m) {
  return m == MotionModel::kSixDof || m == MotionModel::kSixDofBaseline ||
         m == MotionModel::kTxy;
}

// Gauge projection of scale-free translation parameters, measured on the
// knot-averaged t: t_x + t_y = 1 (via NormalizeGauge) where the model has
// that gauge, the initial magnitude otherwise.
void ApplyGauge(const MotionEstimate& start, double norm0, int knots, Eigen::VectorXd& p) {
  if (start.scale_known) return;
  Vec3 mean = Vec3::Zero();
  for (int k = 0; k < knots; ++k) mean += p.segment<3>(6 * k + 3);
  mean /= knots;
  const double n2 = mean.squaredNorm();
  if (n2 == 0.0) return;
  double scale = norm0 / std::sqrt(n2);
  if (HasSumGauge(start.model)) {
    MotionEstimate probe = start;
    probe.t = mean;
    scale = NormalizeGauge(probe).t.dot(mean) / n2;
  }
  for (int k = 0; k < knots; ++k) p.segment<3>(6 * k + 3) *= scale;
}

Problem MakeProblem(std::span<const Correspondence> corrs, const MotionEstimate& init,
                    const RigConfig& rig, KnotMotion layout) {
  Problem pb{corrs, rig, std::move(layout), RotationOnly(init)};
  if (pb.rotation_only || !init.scale_known) pb.rig.baseline.setZero();
  return pb;
}

double CostFor(const Problem& pb, const Eigen::VectorXd& p, Eigen::VectorXd* residuals,
               Eigen::MatrixXd* jacobian) {
  Eigen::VectorXd r;
  Evaluate(pb, p, &r, jacobian);
  if (residuals) *residuals = r;
  return r.squaredNorm();
}

Eigen::VectorXd KnotParams(const KnotMotion& m, bool rotation_only) {
  const int s = rotation_only ? 3 : 6;
  Eigen::VectorXd p(m.knots.size() * s);
  for (size_t k = 0; k < m.knots.size(); ++k) {
    p.segment<3>(k * s) = m.knots[k].omega;
    if (!rotation_only) p.segment<3>(k * s + 3) = m.knots[k].t;
  }
  return p;
}

}  // namespace

double RotationCost(std::span<const Correspondence> corrs, const RigConfig& rig,
                    const Vec3& omega, Eigen::VectorXd* residuals, Eigen::MatrixXd* jacobian) {
  const Problem pb{corrs, rig, Layout(1, 0.0, 0.0), true};
  return CostFor(pb, omega, residuals, jacobian);
}

double SampsonCost(std::span<const Correspondence> corrs, const RigConfig& rig,
                   const Vec3& omega, const Vec3& t, Eigen::VectorXd* residuals,
                   Eigen::MatrixXd* jacobian) {
  const Problem pb{corrs, rig, Layout(1, 0.0, 0.0), false};
  Eigen::VectorXd p(6);
  p << omega, t;
  return CostFor(pb, p, residuals, jacobian);
}

double KnotCost(std::span<const Correspondence> corrs, const RigConfig& rig,
                const KnotMotion& motion, bool rotation_only, Eigen::VectorXd* residuals,
                Eigen::MatrixXd* jacobian) {
  motion.Validate();
  if (motion.knots.size() > kMaxKnots) {
    throw Error(ErrorCode::kInvalidArgument, "at most 5 knots");
  }
  const Problem pb{corrs, rig, motion, rotation_only};
  return CostFor(pb, KnotParams(motion, rotation_only), residuals, jacobian);
}

RefineResult RefineRotation(std::span<const Correspondence> corrs, const MotionEstimate& init,
                            const RigConfig& rig, const RefineOptions& options) {
  if (init.model != MotionModel::kRotation) {
    throw Error(ErrorCode::kInvalidArgument, "rotation refinement needs a ROT estimate");
  }
  const Problem pb = MakeProblem(corrs, init, rig, Layout(1, 0.0, 0.0));
  const LmResult lm = Minimize(pb, init.omega, {0, 1, 2}, nullptr, options);
  RefineResult out{init, lm.initial_cost, lm.cost, lm.iterations, lm.converged};
  out.motion.omega = lm.params;
  out.motion.t.setZero();
  return out;
}

RefineResult Refine6Dof(std::span<const Correspondence> corrs, const MotionEstimate& init,
                        const RigConfig& rig, const RefineOptions& options) {
  if (init.model == MotionModel::kRotation) {
    throw Error(ErrorCode::kInvalidArgument, "Sampson refinement needs a translation model");
  }
  const MotionEstimate start = NormalizeGauge(ConstrainToModel(init));
  const Problem pb = MakeProblem(corrs, start, rig, Layout(1, 0.0, 0.0));
  Eigen::VectorXd p(6);
  p << start.omega, start.t;
  const double norm0 = start.t.norm();
  const LmResult lm = Minimize(
      pb, p, FreeTranslationParams(start.model),
      [&](Eigen::VectorXd& q) { ApplyGauge(start, norm0, 1, q); }, options);
  RefineResult out{start, lm.initial_cost, lm.cost, lm.iterations, lm.converged};
  out.motion.omega = lm.params.head<3>();
  out.motion.t = lm.params.tail<3>();
  return out;
}

RefineResult Refine(std::span<const Correspondence> corrs, const MotionEstimate& init,
                    const RigConfig& rig, const RefineOptions& options) {
  return init.model == MotionModel::kRotation ? RefineRotation(corrs, init, rig, options)
                                              : Refine6Dof(corrs, init, rig, options);
}

KnotRefineResult RefineMultiKnot(std::span<const Correspondence> corrs,
                                 const MotionEstimate& init, int knot_count, double row_min,
                                 double row_max, const RigConfig& rig,
                                 const RefineOptions& options) {
  if (knot_count < 1 || knot_count > kMaxKnots) {
    throw Error(ErrorCode::kInvalidArgument, "knot_count must be in [1, 5]");
  }
  if (knot_count > 1 && !(row_max > row_min)) {
    throw Error(ErrorCode::kInvalidArgument, "knot rows must span a positive range");
  }
  const bool rot = RotationOnly(init);
  const MotionEstimate start = rot ? init : NormalizeGauge(ConstrainToModel(init));
  const KnotMotion km = KnotMotion::Uniform(start, knot_count, row_min, row_max);
  const Problem pb = MakeProblem(corrs, start, rig, km);
  std::vector<int> free;
  const std::vector<int> per_knot =
      rot ? std::vector<int>{0, 1, 2} : FreeTranslationParams(start.model);
  for (int k = 0; k < knot_count; ++k) {
    for (int j : per_knot) free.push_back(k * pb.stride() + j);
  }
  const double norm0 = start.t.norm();
  std::function<void(Eigen::VectorXd&)> project;
  if (!rot) project = [&](Eigen::VectorXd& q) { ApplyGauge(start, norm0, knot_count, q); };
  const LmResult lm = Minimize(pb, KnotParams(km, rot), free, project, options);
  KnotRefineResult out{km, lm.initial_cost, lm.cost, lm.iterations, lm.converged};
  for (int k = 0; k < knot_count; ++k) {
    out.motion.knots[k].omega = lm.params.segment<3>(k * pb.stride());
    if (!rot) out.motion.knots[k].t = lm.params.segment<3>(k * pb.stride() + 3);
  }
  return out;
}

}  // namespace rs2gs
