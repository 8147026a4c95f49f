#include "rs2gs/polysolve.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Dense>

#include "rs2gs/error.h"

namespace rs2gs {
namespace {

// Coefficients of the generic linear form whose action is diagonalized.
constexpr double kFormY = 0.6180339887498949;
constexpr double kFormZ = 0.4142135623730951;

// Gauss-Newton on the (possibly overdetermined) system; keeps the best point.
Vec3 Polish(const PolySystem& system, const Vec3& start, int iterations) {
  const int m = static_cast<int>(system.equations.size());
  Vec3 x = start;
  Eigen::VectorXd f(m);
  Eigen::MatrixXd J(m, 3);
  auto evaluate = [&](const Vec3& p) {
    double norm = 0.0;
    for (int i = 0; i < m; ++i) {
      const double s = 1.0 / std::max(system.equations[i].MaxAbsCoefficient(), 1e-300);
      f[i] = s * system.equations[i].Evaluate(p);
      J.row(i) = s * system.equations[i].Gradient(p).transpose();
      norm += f[i] * f[i];
    }
    return norm;
  };
  double cost = evaluate(x);
  for (int it = 0; it < iterations && cost > 0.0; ++it) {
    const Vec3 step = J.colPivHouseholderQr().solve(-f);
    if (!step.allFinite()) break;
    const Vec3 candidate = x + step;
    const double next = evaluate(candidate);
    if (!(next < cost)) {
      evaluate(x);
      break;
    }
    x = candidate;
    cost = next;
  }
  return x;
}

// Determinant of a square matrix of polynomials by cofactor expansion along
// the first column.
Polynomial Determinant(const std::vector<std::vector<Polynomial>>& a) {
  const size_t n = a.size();
  if (n == 1) return a[0][0];
  Polynomial det;
  for (size_t r = 0; r < n; ++r) {
    if (a[r][0].degree() < 0) continue;
    std::vector<std::vector<Polynomial>> sub;
    for (size_t i = 0; i < n; ++i) {
      if (i == r) continue;
      sub.emplace_back(a[i].begin() + 1, a[i].end());
    }
    const Polynomial term = a[r][0] * Determinant(sub);
    det = (r % 2 == 0) ? det + term : det - term;
  }
  return det;
}

void NextCombination(std::vector<int>* idx, int n) {
  const int k = static_cast<int>(idx->size());
  int i = k - 1;
  while (i >= 0 && (*idx)[i] == n - k + i) --i;
  if (i < 0) {
    idx->clear();
    return;
  }
  ++(*idx)[i];
  for (int j = i + 1; j < k; ++j) (*idx)[j] = (*idx)[j - 1] + 1;
}

}  // namespace

std::vector<Vec3> SolveByActionMatrix(const PolySystem& system,
                                      int template_degree,
                                      const ActionSolverOptions& options,
                                      ActionStats* stats) {
  const int D = template_degree;
  if (D < 1 || D > Polynomial::kMaxDegree || system.unknowns != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "action-matrix solver needs 3 unknowns and template degree 1..4");
  }
  const int n_all = MonomialCount(D);
  const int n_low = MonomialCount(D - 1);
  const int n_top = n_all - n_low;
  const auto& monomials = Monomials();

  // Expanded template, one row per (multiplier monomial, equation).
  std::vector<Eigen::VectorXd> rows;
  for (const Polynomial& f : system.equations) {
    const int d = f.degree();
    if (d < 0) continue;
    if (d > D) {
      throw Error(ErrorCode::kInvalidArgument,
                  "equation degree exceeds the template degree");
    }
    for (int k = 0; k < Polynomial::kSize; ++k) {
      if (!std::isfinite(f[k])) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite coefficient");
      }
    }
    for (int m = 0; m < MonomialCount(D - d); ++m) {
      const Polynomial p = Polynomial::FromMonomial(monomials[m]) * f;
      Eigen::VectorXd row(n_all);
      for (int k = 0; k < n_all; ++k) row[k] = p[k];
      const double scale = row.cwiseAbs().maxCoeff();
      if (scale > 0.0) rows.push_back(row / scale);
    }
  }
  const int n_rows = static_cast<int>(rows.size());
  if (n_rows < n_top) {
    throw Error(ErrorCode::kDegenerateSystem, "template has too few rows");
  }
  Eigen::MatrixXd C(n_rows, n_all);
  for (int r = 0; r < n_rows; ++r) C.row(r) = rows[r].transpose();

  // Eliminate the top-degree block.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> top_qr(C.rightCols(n_top));
  const Eigen::MatrixXd R = top_qr.matrixR().topLeftCorner(n_top, n_top);
  const double r_max = std::abs(R(0, 0));
  const double r_min = std::abs(R(n_top - 1, n_top - 1));
  if (!(r_min > 0.0) || r_max / r_min > options.condition_limit) {
    throw Error(ErrorCode::kDegenerateSystem,
                "top-degree elimination block is rank deficient");
  }
  const Eigen::MatrixXd low =
      top_qr.householderQ().transpose() * C.leftCols(n_low);
  const Eigen::MatrixXd B1 = low.topRows(n_top);
  const Eigen::MatrixXd B2 = low.bottomRows(n_rows - n_top);
  // top monomials = top_map * lower monomials
  const Eigen::MatrixXd top_map =
      top_qr.colsPermutation() *
      (-R.triangularView<Eigen::Upper>().solve(B1));

  // Split the lower monomials into eliminated ones and the quotient basis.
  std::vector<int> eliminated;
  if (B2.rows() > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> full(B2);
    full.setThreshold(1e-9);
    const int rank = static_cast<int>(full.rank());
    std::vector<int> free_cols;
    for (int k = 0; k < n_low; ++k) {
      if (k >= 4) free_cols.push_back(k);
    }
    bool chosen = false;
    if (!free_cols.empty() && rank > 0) {
      Eigen::MatrixXd sub(B2.rows(), free_cols.size());
      for (size_t j = 0; j < free_cols.size(); ++j) sub.col(j) = B2.col(free_cols[j]);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
      qr.setThreshold(1e-9);
      if (qr.rank() == rank) {
        for (int j = 0; j < rank; ++j) {
          eliminated.push_back(free_cols[qr.colsPermutation().indices()[j]]);
        }
        chosen = true;
      }
    }
    if (!chosen) {
      for (int j = 0; j < rank; ++j) {
        eliminated.push_back(full.colsPermutation().indices()[j]);
      }
    }
  }
  std::vector<bool> is_eliminated(n_low, false);
  for (int k : eliminated) is_eliminated[k] = true;
  std::vector<int> basis;
  for (int k = 0; k < n_low; ++k) {
    if (!is_eliminated[k]) basis.push_back(k);
  }
  const int N = static_cast<int>(basis.size());
  if (stats) *stats = {n_rows, n_all, n_top, N};
  if (N == 0) return {};

  // Normal forms: every monomial of degree <= D as a combination of the basis.
  Eigen::MatrixXd nf_low = Eigen::MatrixXd::Zero(n_low, N);
  for (int j = 0; j < N; ++j) nf_low(basis[j], j) = 1.0;
  if (!eliminated.empty()) {
    const int r = static_cast<int>(eliminated.size());
    Eigen::MatrixXd BE(B2.rows(), r), BB(B2.rows(), N);
    for (int j = 0; j < r; ++j) BE.col(j) = B2.col(eliminated[j]);
    for (int j = 0; j < N; ++j) BB.col(j) = B2.col(basis[j]);
    const Eigen::MatrixXd nf_e = BE.colPivHouseholderQr().solve(-BB);
    for (int j = 0; j < r; ++j) nf_low.row(eliminated[j]) = nf_e.row(j);
  }
  Eigen::MatrixXd nf(n_all, N);
  nf.topRows(n_low) = nf_low;
  nf.bottomRows(n_top) = top_map * nf_low;
  if (!nf.allFinite()) {
    throw Error(ErrorCode::kNumericalFailure, "non-finite normal forms");
  }

  Eigen::MatrixXd A(N, N);
  const double form[3] = {1.0, kFormY, kFormZ};
  for (int i = 0; i < N; ++i) {
    const Monomial& b = monomials[basis[i]];
    A.row(i) = form[0] * nf.row(MonomialIndex(b.a + 1, b.b, b.c)) +
               form[1] * nf.row(MonomialIndex(b.a, b.b + 1, b.c)) +
               form[2] * nf.row(MonomialIndex(b.a, b.b, b.c + 1));
  }
  Eigen::EigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "eigen decomposition failed");
  }

  std::vector<Vec3> roots;
  const Eigen::MatrixXcd V = eig.eigenvectors();
  for (int j = 0; j < N; ++j) {
    const Eigen::VectorXcd v = V.col(j);
    const std::complex<double> one = (nf.row(0).cast<std::complex<double>>() * v)(0);
    if (std::abs(one) < 1e-12 * v.norm()) continue;  // root at infinity
    Vec3 root;
    bool real = true;
    for (int k = 0; k < 3; ++k) {
      const std::complex<double> c = (nf.row(1 + k).cast<std::complex<double>>() * v)(0) / one;
      if (std::abs(c.imag()) > options.real_tolerance * (1.0 + std::abs(c.real()))) {
        real = false;
        break;
      }
      root[k] = c.real();
    }
    if (!real || !root.allFinite()) continue;
    root = Polish(system, root, options.polish_iterations);
    if (!root.allFinite()) continue;
    if (system.RelativeResidual(root) > options.residual_tolerance) continue;
    bool duplicate = false;
    for (const Vec3& r : roots) {
      if ((r - root).norm() <= 1e-8 * (1.0 + root.norm())) duplicate = true;
    }
    if (!duplicate) roots.push_back(root);
  }
  return roots;
}

std::vector<Vec3> Solve3Q3(const PolySystem& system,
                           const ActionSolverOptions& options) {
  if (system.equations.size() != 3 || system.degree() > 2) {
    throw Error(ErrorCode::kShapeMismatch, "3Q3 needs three quadrics");
  }
  return SolveByActionMatrix(system, 4, options);
}

PolySystem HiddenVariableEliminate(const AffinePencil& pencil) {
  const int n = pencil.rows;
  const int k = pencil.cols;
  if (k < 1 || k > Polynomial::kMaxDegree || n < k ||
      static_cast<int>(pencil.entries.size()) != n * k) {
    throw Error(ErrorCode::kShapeMismatch,
                "pencil must have rows >= cols and 1..4 columns");
  }
  PolySystem out;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (!idx.empty()) {
    std::vector<std::vector<Polynomial>> block(k, std::vector<Polynomial>(k));
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) block[r][c] = Polynomial::Affine(pencil.at(idx[r], c));
    }
    out.equations.push_back(Determinant(block));
    NextCombination(&idx, n);
  }
  return out;
}

std::vector<Vec3> SolveCubicSystem(const PolySystem& system,
                                   const ActionSolverOptions& options) {
  if (system.equations.size() < 10 || system.degree() > 3) {
    throw Error(ErrorCode::kShapeMismatch, "need at least ten cubics");
  }
  return SolveByActionMatrix(system, 3, options);
}

std::vector<PencilRoot> SolvePencilSystem(const AffinePencil& pencil,
                                          const ActionSolverOptions& options,
                                          ActionStats* stats) {
  const PolySystem minors = HiddenVariableEliminate(pencil);
  const std::vector<Vec3> roots =
      SolveByActionMatrix(minors, pencil.cols, options, stats);
  std::vector<PencilRoot> out;
  out.reserve(roots.size());
  for (const Vec3& w : roots) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(pencil.Evaluate(w), Eigen::ComputeFullV);
    out.push_back({w, svd.matrixV().col(pencil.cols - 1)});
  }
  return out;
}

std::vector<BaselineRoot> SolveBaselineSystem(const AffinePencil& pencil,
                                              const ActionSolverOptions& options) {
  if (pencil.rows != 6 || pencil.cols != 4) {
    throw Error(ErrorCode::kShapeMismatch, "baseline system is a 6x4 pencil");
  }
  std::vector<BaselineRoot> out;
  for (const PencilRoot& root : SolvePencilSystem(pencil, options)) {
    const Eigen::VectorXd& z = root.null_vector;
    if (std::abs(z[3]) < 1e-12 * z.norm()) continue;
    out.push_back({root.w, z.head<3>() / z[3]});
  }
  return out;
}

}  // namespace rs2gs
