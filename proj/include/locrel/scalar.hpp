#pragma once
// Exact coefficient arithmetic: the ring Q(z)[r]/(r^2 - ell), where z is a
// primitive ell-th root of unity, and Laurent polynomials over it in the
// variables A1..An, B1..B(n+1), T.  Everything is exact (GMP rationals);
// there is no floating point anywhere.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace locrel {

// An element of Q(z)[r]/(r^2 - ell), stored on the power basis
// z^0..z^(ell-2) for each of the two r-degrees.  For ell = 2 the z-part is
// trivial (z = -1 is rational) and the basis is just {1, r}.
class CycRat {
 public:
  CycRat() : ell_(0) {}  // unusable sentinel; every real value carries ell
  explicit CycRat(int ell);
  CycRat(int ell, const mpq_class& q);
  CycRat(int ell, long v);

  static CycRat zeta(int ell, long power = 1);
  // r^e; negative e uses r^-1 = r/ell.
  static CycRat sqrt_ell(int ell, long e = 1);
  // ell^e as a rational.
  static CycRat ell_pow(int ell, long e);

  int ell() const { return ell_; }
  bool is_zero() const;
  bool is_rational() const;
  // Value as a rational; throws if the element is not rational.
  mpq_class rational_value() const;

  CycRat operator-() const;
  CycRat& operator+=(const CycRat& o);
  CycRat& operator-=(const CycRat& o);
  CycRat& operator*=(const CycRat& o);
  friend CycRat operator+(CycRat a, const CycRat& b) { return a += b; }
  friend CycRat operator-(CycRat a, const CycRat& b) { return a -= b; }
  friend CycRat operator*(CycRat a, const CycRat& b) { return a *= b; }
  bool operator==(const CycRat& o) const;
  bool operator!=(const CycRat& o) const { return !(*this == o); }
  // Strict total order (for canonical container ordering only).
  std::strong_ordering operator<=>(const CycRat& o) const;

  bool is_invertible() const;
  CycRat inverse() const;  // throws std::domain_error if not invertible

  // True iff the element lies in Z[z, 1/ell]: no r-component and every
  // power-basis coordinate has an ell-power denominator.
  bool is_ell_integral() const;

  // Number of nonzero coordinates on the power basis.
  int term_count() const;
  std::string str() const;

 private:
  void require_compat(const CycRat& o) const;
  int ell_;
  // c_[b * (ell-1) + i] is the coefficient of z^i * r^b.
  std::vector<mpq_class> c_;
};

// Variable identifiers for the polynomial layer.
enum class VarKind : uint8_t { A = 0, B = 1, T = 2 };

struct VarId {
  VarKind kind;
  uint8_t index;  // 1-based for A/B; 0 for T
  auto operator<=>(const VarId&) const = default;
};

// A Laurent monomial: sorted (variable, nonzero exponent) pairs.
struct Monomial {
  std::vector<std::pair<VarId, int32_t>> factors;
  auto operator<=>(const Monomial&) const = default;

  int32_t exponent(VarId v) const;
  long t_degree() const;       // exponent of T
  long total_degree() const;   // sum of all exponents
  Monomial times(const Monomial& o) const;
  Monomial inverted() const;   // all exponents negated
  std::string str() const;     // "A1^2*B2*T^-1"; "1" for the empty monomial
};

// A Laurent polynomial over CycRat in A1..An, B1..B(n+1), T.
class Scalar {
 public:
  Scalar() : ell_(0) {}
  explicit Scalar(int ell) : ell_(ell) {}
  Scalar(int ell, const mpq_class& q);
  Scalar(int ell, long v);
  Scalar(int ell, const CycRat& c);

  static Scalar variable(int ell, VarKind kind, int index, long exp = 1);
  static Scalar a_var(int ell, int i, long e = 1) { return variable(ell, VarKind::A, i, e); }
  static Scalar b_var(int ell, int j, long e = 1) { return variable(ell, VarKind::B, j, e); }
  static Scalar t_var(int ell, long e = 1) { return variable(ell, VarKind::T, 0, e); }
  static Scalar monomial(int ell, const Monomial& m, const CycRat& c);

  int ell() const { return ell_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, CycRat>& terms() const { return terms_; }
  // Coefficient of the given monomial (zero if absent).
  CycRat coefficient(const Monomial& m) const;
  // Constant term viewed as CycRat.
  CycRat constant_term() const { return coefficient(Monomial{}); }
  bool is_constant() const;

  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar operator*(const Scalar& o) const;
  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar times(const CycRat& c) const;
  bool operator==(const Scalar& o) const;
  bool operator!=(const Scalar& o) const { return !(*this == o); }

  // Divide by a single-term scalar with invertible coefficient.
  Scalar divide_by_term(const Monomial& m, const CycRat& c) const;

  // x_i -> x_i^{-1} for every variable (including T).
  Scalar invert_variables() const;
  // T^k -> T^{-k}, other variables untouched.
  Scalar negate_t_exponents() const;
  // Drop terms of T-degree > bound (for truncated series work).
  Scalar truncate_t_degree(long bound) const;
  long max_t_degree() const;  // 0 for the zero polynomial
  long min_t_degree() const;
  // Multiply, discarding T-degrees above the bound.
  Scalar mul_truncated(const Scalar& o, long bound) const;

  bool is_ell_integral() const;

  std::string str() const;

 private:
  void insert_term(const Monomial& m, const CycRat& c);
  int ell_;
  std::map<Monomial, CycRat> terms_;
};

// |GL_m(F_ell)| / ell^{m^2}: the additive measure of GL_m(O) inside M_m(O).
mpq_class unit_density_gl(int m, int ell);
// ell^e as an exact rational.
mpq_class ell_power(int ell, long e);

}  // namespace locrel
