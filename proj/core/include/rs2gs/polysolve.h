#ifndef RS2GS_POLYSOLVE_H_
#define RS2GS_POLYSOLVE_H_

#include <vector>

#include <Eigen/Core>

#include "rs2gs/polynomial.h"
#include "rs2gs/types.h"

namespace rs2gs {

struct ActionSolverOptions {
  // Eigenvector coordinates with |imag| <= real_tolerance * (1 + |real|)
  // are accepted as real.
  double real_tolerance = 1e-8;
  // Roots with PolySystem::RelativeResidual above this after polishing are
  // dropped.
  double residual_tolerance = 1e-6;
  // Condition number of the eliminated top-degree block beyond which the
  // system is reported degenerate.
  double condition_limit = 1e12;
  int polish_iterations = 3;
};

// Size of the last elimination, for tests and diagnostics.
struct ActionStats {
  int template_rows = 0;
  int template_cols = 0;
  int eliminated = 0;   // top-degree block width
  int action_size = 0;  // quotient-ring basis size
};

// All real roots of a zero-dimensional system in three unknowns.
//
// Template: every equation f is multiplied by all monomials of degree
// <= template_degree - deg f; the columns are split into the top-degree
// monomials and the rest. The top block is QR-eliminated (it must have full
// column rank; otherwise DegenerateSystem), the remaining rows relate the
// lower monomials and a column-pivoted QR on them picks which of those are
// eliminated too, preferring to keep 1, x, y, z in the basis. The action of a
// fixed generic linear form on the quotient basis is then diagonalized and
// each eigenvector gives one root through the normal forms of x, y, z and 1.
std::vector<Vec3> SolveByActionMatrix(const PolySystem& system,
                                      int template_degree,
                                      const ActionSolverOptions& options = {},
                                      ActionStats* stats = nullptr);

// Three quadrics in three unknowns, <= 8 real roots.
std::vector<Vec3> Solve3Q3(const PolySystem& system,
                           const ActionSolverOptions& options = {});

// Maximal minors of the pencil M(w) (rows >= cols, cols <= 4): every minor is
// a polynomial of degree cols in w and vanishes wherever M(w) drops rank.
// For a 5x3 pencil this is the 10-cubic system of the five-point solver.
PolySystem HiddenVariableEliminate(const AffinePencil& pencil);

// Ten (or more) cubics in three unknowns, <= 10 real roots.
std::vector<Vec3> SolveCubicSystem(const PolySystem& system,
                                   const ActionSolverOptions& options = {});

// Root w of a pencil system together with the null vector of M(w) (unit
// norm, sign unspecified).
struct PencilRoot {
  Vec3 w = Vec3::Zero();
  Eigen::VectorXd null_vector;
};

// Solves M(w) z = 0 for w via the maximal minors of M and recovers z as the
// smallest right singular vector of M(w) at every root.
std::vector<PencilRoot> SolvePencilSystem(const AffinePencil& pencil,
                                          const ActionSolverOptions& options = {},
                                          ActionStats* stats = nullptr);

// Known-baseline system: a 6x4 pencil M(omega) [t; 1] = 0. The 15 quartic
// minors go through a 15x15 elimination and a 20x20 action matrix.
struct BaselineRoot {
  Vec3 omega = Vec3::Zero();
  Vec3 t = Vec3::Zero();
};
std::vector<BaselineRoot> SolveBaselineSystem(
    const AffinePencil& pencil, const ActionSolverOptions& options = {});

}  // namespace rs2gs

#endif  // RS2GS_POLYSOLVE_H_
