#include "rs2gs/polynomial.h"

#include <algorithm>
#include <cmath>

#include "rs2gs/error.h"

namespace rs2gs {
namespace {

std::array<Monomial, Polynomial::kSize> BuildMonomials() {
  std::array<Monomial, Polynomial::kSize> out{};
  int k = 0;
  for (int d = 0; d <= Polynomial::kMaxDegree; ++d) {
    for (int a = d; a >= 0; --a) {
      for (int b = d - a; b >= 0; --b) {
        out[k++] = {a, b, d - a - b};
      }
    }
  }
  return out;
}

// Product table: index of monomial i * monomial j, or -1 past kMaxDegree.
struct ProductTable {
  std::array<std::array<int, Polynomial::kSize>, Polynomial::kSize> index;
  ProductTable() {
    const auto& m = Monomials();
    for (int i = 0; i < Polynomial::kSize; ++i) {
      for (int j = 0; j < Polynomial::kSize; ++j) {
        const int a = m[i].a + m[j].a;
        const int b = m[i].b + m[j].b;
        const int c = m[i].c + m[j].c;
        index[i][j] = (a + b + c) <= Polynomial::kMaxDegree ? MonomialIndex(a, b, c) : -1;
      }
    }
  }
};

const ProductTable& Products() {
  static const ProductTable table;
  return table;
}

}  // namespace

const std::array<Monomial, Polynomial::kSize>& Monomials() {
  static const std::array<Monomial, Polynomial::kSize> table = BuildMonomials();
  return table;
}

int MonomialIndex(int a, int b, int c) {
  const int d = a + b + c;
  int index = MonomialCount(d - 1);
  for (int ap = d; ap > a; --ap) index += d - ap + 1;
  return index + (d - a - b);
}

std::array<double, Polynomial::kSize> MonomialValues(const Vec3& x) {
  std::array<double, Polynomial::kSize> out{};
  const auto& m = Monomials();
  double px[5], py[5], pz[5];
  px[0] = py[0] = pz[0] = 1.0;
  for (int k = 1; k < 5; ++k) {
    px[k] = px[k - 1] * x.x();
    py[k] = py[k - 1] * x.y();
    pz[k] = pz[k - 1] * x.z();
  }
  for (int i = 0; i < Polynomial::kSize; ++i) {
    out[i] = px[m[i].a] * py[m[i].b] * pz[m[i].c];
  }
  return out;
}

Polynomial Polynomial::Constant(double c) {
  Polynomial p;
  p[0] = c;
  return p;
}

Polynomial Polynomial::Variable(int i) {
  Polynomial p;
  p[1 + i] = 1.0;
  return p;
}

Polynomial Polynomial::Affine(const Eigen::Vector4d& c) {
  Polynomial p;
  for (int i = 0; i < 4; ++i) p[i] = c[i];
  return p;
}

Polynomial Polynomial::FromMonomial(const Monomial& m, double c) {
  Polynomial p;
  p[MonomialIndex(m.a, m.b, m.c)] = c;
  return p;
}

double Polynomial::coefficient(int a, int b, int c) const {
  if (a + b + c > kMaxDegree) return 0.0;
  return coeffs_[MonomialIndex(a, b, c)];
}

int Polynomial::degree() const {
  const auto& m = Monomials();
  for (int i = kSize - 1; i >= 0; --i) {
    if (coeffs_[i] != 0.0) return m[i].degree();
  }
  return -1;
}

double Polynomial::MaxAbsCoefficient() const {
  double out = 0.0;
  for (double c : coeffs_) out = std::max(out, std::abs(c));
  return out;
}

double Polynomial::Evaluate(const Vec3& x) const {
  const auto values = MonomialValues(x);
  double sum = 0.0;
  for (int i = 0; i < kSize; ++i) sum += coeffs_[i] * values[i];
  return sum;
}

double Polynomial::TermMagnitude(const Vec3& x) const {
  const auto values = MonomialValues(x);
  double sum = 0.0;
  for (int i = 0; i < kSize; ++i) sum += std::abs(coeffs_[i] * values[i]);
  return sum;
}

Vec3 Polynomial::Gradient(const Vec3& x) const {
  const auto values = MonomialValues(x);
  const auto& m = Monomials();
  Vec3 g = Vec3::Zero();
  for (int i = 0; i < kSize; ++i) {
    if (coeffs_[i] == 0.0) continue;
    if (m[i].a > 0) g.x() += coeffs_[i] * m[i].a * values[MonomialIndex(m[i].a - 1, m[i].b, m[i].c)];
    if (m[i].b > 0) g.y() += coeffs_[i] * m[i].b * values[MonomialIndex(m[i].a, m[i].b - 1, m[i].c)];
    if (m[i].c > 0) g.z() += coeffs_[i] * m[i].c * values[MonomialIndex(m[i].a, m[i].b, m[i].c - 1)];
  }
  return g;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial p;
  for (int i = 0; i < kSize; ++i) p[i] = coeffs_[i] + o[i];
  return p;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial p;
  for (int i = 0; i < kSize; ++i) p[i] = coeffs_[i] - o[i];
  return p;
}

Polynomial Polynomial::operator-() const { return *this * -1.0; }

Polynomial Polynomial::operator*(double s) const {
  Polynomial p;
  for (int i = 0; i < kSize; ++i) p[i] = coeffs_[i] * s;
  return p;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  const auto& table = Products();
  Polynomial p;
  for (int i = 0; i < kSize; ++i) {
    if (coeffs_[i] == 0.0) continue;
    for (int j = 0; j < kSize; ++j) {
      if (o[j] == 0.0) continue;
      const int k = table.index[i][j];
      if (k < 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "polynomial product exceeds degree 4");
      }
      p[k] += coeffs_[i] * o[j];
    }
  }
  return p;
}

int PolySystem::degree() const {
  int d = -1;
  for (const auto& p : equations) d = std::max(d, p.degree());
  return d;
}

double PolySystem::RelativeResidual(const Vec3& x) const {
  double worst = 0.0;
  for (const auto& p : equations) {
    const double scale = p.TermMagnitude(x);
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(p.Evaluate(x)) / scale);
  }
  return worst;
}

Eigen::MatrixXd AffinePencil::Evaluate(const Vec3& w) const {
  Eigen::MatrixXd M(rows, cols);
  const Eigen::Vector4d h(1.0, w.x(), w.y(), w.z());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) M(r, c) = at(r, c).dot(h);
  }
  return M;
}

}  // namespace rs2gs
