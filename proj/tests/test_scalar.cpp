#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "locrel/scalar.hpp"

using namespace locrel;

namespace {

CycRat random_cycrat(int ell, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-4, 4);
  std::uniform_int_distribution<int> den(1, 3);
  CycRat x(ell);
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < ell - 1; ++i) {
      CycRat t(ell, mpq_class(num(rng), den(rng)));
      x += t * CycRat::zeta(ell, i) * CycRat::sqrt_ell(ell, b);
    }
  return x;
}

Scalar random_scalar(int ell, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nterms(0, 4);
  std::uniform_int_distribution<int> exp(-2, 2);
  std::uniform_int_distribution<int> idx(1, 2);
  Scalar s(ell);
  int k = nterms(rng);
  for (int t = 0; t < k; ++t) {
    Scalar term(ell, random_cycrat(ell, rng));
    term *= Scalar::a_var(ell, idx(rng), exp(rng));
    term *= Scalar::b_var(ell, idx(rng), exp(rng));
    term *= Scalar::t_var(ell, exp(rng));
    s += term;
  }
  return s;
}

}  // namespace

TEST_CASE("cyclotomic relations") {
  for (int ell : {2, 3, 5, 7}) {
    CAPTURE(ell);
    CycRat z = CycRat::zeta(ell);
    CycRat p = CycRat(ell, 1);
    CycRat sum(ell);
    for (int i = 0; i < ell; ++i) {
      sum += CycRat::zeta(ell, i);
      p = p * z;
      CHECK(CycRat::zeta(ell, i + 1) == p);
    }
    CHECK(p == CycRat::zeta(ell, ell));
    CHECK(CycRat::zeta(ell, ell) == CycRat(ell, 1));
    CHECK(sum.is_zero());
  }
}

TEST_CASE("square root of ell") {
  for (int ell : {2, 3, 5}) {
    CycRat r = CycRat::sqrt_ell(ell);
    CHECK(r * r == CycRat(ell, ell));
    CHECK(CycRat::sqrt_ell(ell, -1) * r == CycRat(ell, 1));
    CHECK(CycRat::sqrt_ell(ell, -2) == CycRat(ell, mpq_class(1, ell)));
    CHECK(CycRat::sqrt_ell(ell, 3) == CycRat(ell, ell) * r);
  }
}

TEST_CASE("inverses and zero divisors") {
  std::mt19937_64 rng(12345);
  for (int ell : {2, 3, 5}) {
    for (int trial = 0; trial < 40; ++trial) {
      CycRat x = random_cycrat(ell, rng);
      if (x.is_zero()) continue;
      if (!x.is_invertible()) continue;
      CHECK(x * x.inverse() == CycRat(ell, 1));
    }
  }
  // In Q(z_5), sqrt(5) = z - z^2 - z^3 + z^4 (a Gauss sum), so r - that value
  // is a genuine zero divisor of the extension ring.
  int ell = 5;
  CycRat g = CycRat::zeta(ell, 1) - CycRat::zeta(ell, 2) - CycRat::zeta(ell, 3) +
             CycRat::zeta(ell, 4);
  CHECK(g * g == CycRat(ell, 5));
  CycRat bad = CycRat::sqrt_ell(ell) - g;
  CHECK(!bad.is_zero());
  CHECK(!bad.is_invertible());
  CHECK((bad * (CycRat::sqrt_ell(ell) + g)).is_zero());
  CHECK_THROWS_AS(bad.inverse(), std::domain_error);
  CHECK_THROWS_AS(CycRat(3).inverse(), std::domain_error);
}

TEST_CASE("ell integrality") {
  CHECK(CycRat(2, mpq_class(3, 4)).is_ell_integral());
  CHECK(!CycRat(2, mpq_class(1, 3)).is_ell_integral());
  CHECK(CycRat(3, mpq_class(5, 27)).is_ell_integral());
  CHECK(!CycRat(3, mpq_class(1, 2)).is_ell_integral());
  CHECK(!CycRat::sqrt_ell(3).is_ell_integral());
  CHECK(CycRat::zeta(5).is_ell_integral());
  CHECK((CycRat::zeta(5) * CycRat(5, mpq_class(1, 5))).is_ell_integral());
}

TEST_CASE("ring axioms, randomized") {
  std::mt19937_64 rng(987);
  for (int ell : {2, 3, 5}) {
    for (int trial = 0; trial < 25; ++trial) {
      CycRat a = random_cycrat(ell, rng), b = random_cycrat(ell, rng),
             c = random_cycrat(ell, rng);
      CHECK(a + b == b + a);
      CHECK(a * b == b * a);
      CHECK((a + b) + c == a + (b + c));
      CHECK((a * b) * c == a * (b * c));
      CHECK(a * (b + c) == a * b + a * c);
      CHECK((a - a).is_zero());
    }
  }
}

TEST_CASE("polynomial arithmetic and canonical form") {
  std::mt19937_64 rng(55);
  for (int ell : {2, 3}) {
    for (int trial = 0; trial < 15; ++trial) {
      Scalar a = random_scalar(ell, rng), b = random_scalar(ell, rng),
             c = random_scalar(ell, rng);
      CHECK(a + b == b + a);
      CHECK(a * b == b * a);
      CHECK(a * (b + c) == a * b + a * c);
      CHECK((a - a).is_zero());
      CHECK((a - a).str() == "0");
      CHECK(a.invert_variables().invert_variables() == a);
      CHECK(a.mul_truncated(b, 1) == (a * b).truncate_t_degree(1));
    }
  }
}

TEST_CASE("division by an invertible term") {
  int ell = 3;
  Scalar s = Scalar(ell, 2) * Scalar::a_var(ell, 1, 2) +
             Scalar(ell, CycRat::sqrt_ell(ell)) * Scalar::t_var(ell, -1);
  Monomial m;
  m.factors = {{VarId{VarKind::A, 1}, 1}};
  Scalar q = s.divide_by_term(m, CycRat(ell, 2));
  CHECK(q * Scalar::a_var(ell, 1) * Scalar(ell, 2) == s);
}

TEST_CASE("frozen renderings") {
  int ell = 2;
  // 1 - A1(B1+B2)T/r + A1^2 B1 B2 T^2 / ell, with 1/r = r/ell.
  Scalar p(ell, 1);
  Scalar rinv(ell, CycRat::sqrt_ell(ell, -1));
  p -= Scalar::a_var(ell, 1) * (Scalar::b_var(ell, 1) + Scalar::b_var(ell, 2)) *
       Scalar::t_var(ell) * rinv;
  p += Scalar::a_var(ell, 1, 2) * Scalar::b_var(ell, 1) * Scalar::b_var(ell, 2) *
       Scalar::t_var(ell, 2) * rinv * rinv;
  CHECK(p.str() ==
        "1 - 1/2*r*A1*B1*T - 1/2*r*A1*B2*T + 1/2*A1^2*B1*B2*T^2");
  CHECK(CycRat::zeta(3).str() == "z");
  CHECK((CycRat::zeta(3) + CycRat(3, 1)).str() == "1 + z");
  CHECK((-CycRat::sqrt_ell(3)).str() == "-r");
  CHECK((CycRat(5, 2) * CycRat::zeta(5, 2) * CycRat::sqrt_ell(5)).str() == "2*z^2*r");
  Scalar q(3);
  CHECK(q.str() == "0");
  Scalar mixed = Scalar(3, CycRat::zeta(3) + CycRat(3, 1)) * Scalar::b_var(3, 2) +
                 Scalar(3, -3);
  CHECK(mixed.str() == "-3 + (1 + z)*B2");
  Monomial m;
  m.factors = {{VarId{VarKind::A, 1}, 2}, {VarId{VarKind::B, 2}, 1}, {VarId{VarKind::T, 0}, -1}};
  CHECK(m.str() == "A1^2*B2*T^-1");
}

TEST_CASE("t-degree helpers") {
  int ell = 2;
  Scalar s = Scalar::t_var(ell, 3) + Scalar::t_var(ell, -1) + Scalar(ell, 1);
  CHECK(s.max_t_degree() == 3);
  CHECK(s.min_t_degree() == -1);
  CHECK(s.truncate_t_degree(2) == Scalar::t_var(ell, -1) + Scalar(ell, 1));
  CHECK(s.negate_t_exponents() ==
        Scalar::t_var(ell, -3) + Scalar::t_var(ell, 1) + Scalar(ell, 1));
}

TEST_CASE("unit density of GL_m") {
  CHECK(unit_density_gl(1, 2) == mpq_class(1, 2));
  CHECK(unit_density_gl(2, 2) == mpq_class(3, 8));
  CHECK(unit_density_gl(2, 3) == mpq_class(16, 27));
  CHECK(unit_density_gl(3, 2) == mpq_class(21, 64));
  CHECK(ell_power(3, -2) == mpq_class(1, 9));
  CHECK(ell_power(2, 5) == 32);
}
