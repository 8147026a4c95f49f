#ifndef RS2GS_POLYNOMIAL_H_
#define RS2GS_POLYNOMIAL_H_

#include <array>
#include <vector>

#include <Eigen/Core>

#include "rs2gs/types.h"

namespace rs2gs {

// Exponents (a, b, c) of the monomial x^a y^b z^c.
struct Monomial {
  int a = 0;
  int b = 0;
  int c = 0;
  int degree() const { return a + b + c; }
};

// Dense polynomial in three unknowns of total degree at most 4.
//
// Monomial basis ordering (fixed): graded by total degree, and inside one
// degree lexicographic with x > y > z, e.g.
//   1 | x y z | x^2 xy xz y^2 yz z^2 | x^3 x^2y x^2z xy^2 xyz xz^2 y^3 ...
// so MonomialIndex(0,0,0) = 0, MonomialIndex(1,0,0) = 1, and the monomials of
// degree d occupy indices [MonomialCount(d-1), MonomialCount(d)).
class Polynomial {
 public:
  static constexpr int kMaxDegree = 4;
  static constexpr int kSize = 35;

  Polynomial() { coeffs_.fill(0.0); }

  static Polynomial Constant(double c);
  // Unknown 0, 1 or 2 (x, y, z).
  static Polynomial Variable(int i);
  // c0 + c1 x + c2 y + c3 z.
  static Polynomial Affine(const Eigen::Vector4d& c);
  static Polynomial FromMonomial(const Monomial& m, double c = 1.0);

  double& operator[](int index) { return coeffs_[index]; }
  double operator[](int index) const { return coeffs_[index]; }
  double coefficient(int a, int b, int c) const;

  // Highest degree with a nonzero coefficient; -1 for the zero polynomial.
  int degree() const;
  double MaxAbsCoefficient() const;

  double Evaluate(const Vec3& x) const;
  Vec3 Gradient(const Vec3& x) const;
  // Sum of |coefficient * monomial(x)|: the scale against which a residual
  // at x is judged.
  double TermMagnitude(const Vec3& x) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator-() const;
  // Throws InvalidArgument if the product exceeds kMaxDegree.
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;

 private:
  std::array<double, kSize> coeffs_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

// Number of monomials of total degree <= d in three unknowns.
constexpr int MonomialCount(int d) {
  return d < 0 ? 0 : (d + 1) * (d + 2) * (d + 3) / 6;
}
int MonomialIndex(int a, int b, int c);
const std::array<Monomial, Polynomial::kSize>& Monomials();
// Values of all monomials of degree <= kMaxDegree at x.
std::array<double, Polynomial::kSize> MonomialValues(const Vec3& x);

// A system of polynomial equations over the fixed monomial basis above.
struct PolySystem {
  std::vector<Polynomial> equations;
  int unknowns = 3;

  int degree() const;
  // max_i |f_i(x)| / TermMagnitude_i(x): scale-free residual of a root.
  double RelativeResidual(const Vec3& x) const;
};

// Matrix whose entries are affine forms c0 + c1 w_x + c2 w_y + c3 w_z in the
// hidden unknowns; M(w) [x y 1]^T = 0 style systems are stored this way.
struct AffinePencil {
  int rows = 0;
  int cols = 0;
  std::vector<Eigen::Vector4d> entries;  // row-major

  AffinePencil() = default;
  AffinePencil(int r, int c)
      : rows(r), cols(c), entries(r * c, Eigen::Vector4d::Zero()) {}

  Eigen::Vector4d& at(int r, int c) { return entries[r * cols + c]; }
  const Eigen::Vector4d& at(int r, int c) const { return entries[r * cols + c]; }
  Eigen::MatrixXd Evaluate(const Vec3& w) const;
};

}  // namespace rs2gs

#endif  // RS2GS_POLYNOMIAL_H_
