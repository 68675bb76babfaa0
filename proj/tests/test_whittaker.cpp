#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "locrel/cosetfun.hpp"
#include "locrel/whittaker.hpp"

using namespace locrel;

namespace {

FieldElement W(int ell, long c, long k) { return FieldElement::monomial(ell, c, k); }

// ---------------------------------------------------------------------------
// Independent Schur oracle: Jacobi-Trudi determinant over a dense polynomial
// dictionary (exponent vector -> integer coefficient), written before the
// recursion in the library and kept frozen.
// ---------------------------------------------------------------------------
using Poly = std::map<std::vector<int>, mpz_class>;

Poly poly_one(int m) { return {{std::vector<int>(size_t(m), 0), 1}}; }

Poly h_complete(int m, int k) {
  Poly out;
  if (k < 0) return out;
  std::vector<int> e(size_t(m), 0);
  e[0] = k;
  while (true) {
    out[e] = 1;
    // next composition of k into m parts
    int i = 0;
    while (i + 1 < m && e[size_t(i)] == 0) ++i;
    if (i + 1 >= m) break;
    int v = e[size_t(i)];
    e[size_t(i)] = 0;
    e[0] = v - 1;
    ++e[size_t(i) + 1];
  }
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      std::vector<int> e = ea;
      for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
      out[e] += ca * cb;
      if (out[e] == 0) out.erase(e);
    }
  }
  return out;
}

void poly_axpy(Poly& acc, const Poly& x, const mpz_class& c) {
  for (const auto& [e, v] : x) {
    acc[e] += v * c;
    if (acc[e] == 0) acc.erase(e);
  }
}

// det(h_{lambda_i - i + j}) over all m rows/columns, by permutation expansion.
Poly jt_schur(int m, const std::vector<int>& lambda) {
  std::vector<int> perm;
  for (int i = 0; i < m; ++i) perm.push_back(i);
  Poly out;
  do {
    int inv = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (perm[size_t(i)] > perm[size_t(j)]) ++inv;
    Poly term = poly_one(m);
    for (int i = 0; i < m; ++i) {
      term = poly_mul(term, h_complete(m, lambda[size_t(i)] - i + perm[size_t(i)]));
    }
    poly_axpy(out, term, (inv % 2 == 0) ? mpz_class(1) : mpz_class(-1));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Scalar poly_to_scalar(int ell, VarKind kind, const Poly& p, long shift) {
  Scalar out(ell);
  for (const auto& [e, c] : p) {
    Scalar mono(ell, mpq_class(c));
    for (size_t i = 0; i < e.size(); ++i) {
      mono *= Scalar::variable(ell, kind, int(i) + 1, e[i] + shift);
    }
    out += mono;
  }
  return out;
}

Scalar oracle_schur(int ell, VarKind kind, const std::vector<long>& lambda) {
  long shift = lambda.back();
  std::vector<int> part;
  for (long v : lambda) part.push_back(int(v - shift));
  return poly_to_scalar(ell, kind, jt_schur(int(lambda.size()), part), shift);
}

// Random element of GL_m(O): product of integral elementary matrices and
// unit diagonal twists.
Mat random_unimodular(std::mt19937_64& rng, int ell, int m) {
  Mat k = Mat::identity(ell, m);
  for (int step = 0; step < 8; ++step) {
    Mat e = Mat::identity(ell, m);
    int i = int(rng() % unsigned(m)), j = int(rng() % unsigned(m));
    if (i != j) {
      e.at(i, j) = W(ell, 1 + long(rng() % unsigned(ell - 1)), long(rng() % 3));
    } else {
      e.at(i, i) = FieldElement::one(ell) + W(ell, 1 + long(rng() % unsigned(ell - 1)), 1);
    }
    k = k * e;
  }
  return k;
}

}  // namespace

TEST_CASE("additive character: values, additivity, conjugate") {
  for (int ell : {2, 3, 5}) {
    CHECK(psi_value(FieldElement::one(ell)) == CycRat(ell, 1L));
    CHECK(psi_value(W(ell, 1, 3)) == CycRat(ell, 1L));
    CHECK(psi_value(W(ell, 1, -1)) == CycRat::zeta(ell, 1));
    CHECK(psi_value(W(ell, 1, -2)) == CycRat(ell, 1L));  // conductor is O
    CHECK(psi_value(W(ell, 1, -2) + W(ell, 1, -1)) == CycRat::zeta(ell, 1));
    for (long c = 0; c < ell; ++c) {
      FieldElement x = W(ell, c, -1) + W(ell, 2, 1);
      FieldElement y = W(ell, 1, -1) + W(ell, 1, 0);
      CHECK(psi_value(x) == CycRat::zeta(ell, c));
      CHECK(psi_value(x + y) == psi_value(x) * psi_value(y));
      CHECK(psi_value(x, true) * psi_value(x) == CycRat(ell, 1L));
    }
  }
}

TEST_CASE("schur: matches the Jacobi-Trudi oracle") {
  const int ell = 2;
  // GL_1, Laurent exponents
  for (long k = -3; k <= 3; ++k) {
    CHECK(schur_poly(ell, VarKind::A, {k}) == Scalar::a_var(ell, 1, k));
  }
  // GL_2 partitions
  for (long l1 = 0; l1 <= 4; ++l1) {
    for (long l2 = 0; l2 <= l1; ++l2) {
      CHECK(schur_poly(ell, VarKind::A, {l1, l2}) ==
            oracle_schur(ell, VarKind::A, {l1, l2}));
    }
  }
  // GL_2 with negative entries
  CHECK(schur_poly(ell, VarKind::B, {1, -2}) == oracle_schur(ell, VarKind::B, {1, -2}));
  CHECK(schur_poly(ell, VarKind::B, {-1, -3}) == oracle_schur(ell, VarKind::B, {-1, -3}));
  // GL_3 partitions
  for (long l1 = 0; l1 <= 3; ++l1) {
    for (long l2 = 0; l2 <= l1; ++l2) {
      for (long l3 = 0; l3 <= l2; ++l3) {
        CHECK(schur_poly(ell, VarKind::B, {l1, l2, l3}) ==
              oracle_schur(ell, VarKind::B, {l1, l2, l3}));
      }
    }
  }
  // GL_3 Laurent spot checks
  CHECK(schur_poly(ell, VarKind::A, {2, 0, -1}) ==
        oracle_schur(ell, VarKind::A, {2, 0, -1}));
  CHECK_THROWS_AS((void)schur_poly(ell, VarKind::A, {0, 1}), std::invalid_argument);
}

TEST_CASE("schur: dimension matches the Weyl formula") {
  const int ell = 3;
  for (long l1 = -2; l1 <= 3; ++l1) {
    for (long l2 = -3; l2 <= l1; ++l2) {
      CHECK(schur_dimension(ell, {l1, l2}) == mpz_class(l1 - l2 + 1));
      for (long l3 = -3; l3 <= l2; ++l3) {
        mpz_class expect = (l1 - l2 + 1) * (l2 - l3 + 1) * (l1 - l3 + 2);
        CHECK(schur_dimension(ell, {l1, l2, l3}) * 2 == expect);
      }
    }
  }
}

TEST_CASE("whittaker factor: normalization and torus values") {
  for (int ell : {2, 3}) {
    for (int m : {1, 2, 3}) {
      CHECK(whittaker_factor(Mat::identity(ell, m), VarKind::A, true) == Scalar(ell, 1L));
      CHECK(whittaker_factor(Mat::identity(ell, m), VarKind::B, false) == Scalar(ell, 1L));
    }
    // GL_2: diag(w, 1) evaluates to r^-1 (A1 + A2)
    Mat t = diag_pi_powers(ell, {1, 0});
    Scalar expect =
        (Scalar::a_var(ell, 1) + Scalar::a_var(ell, 2)).times(CycRat::sqrt_ell(ell, -1));
    CHECK(whittaker_factor(t, VarKind::A, true) == expect);
    // non-dominant exponents vanish
    CHECK(whittaker_factor(diag_pi_powers(ell, {0, 1}), VarKind::A, true).is_zero());
    CHECK(whittaker_factor(diag_pi_powers(ell, {1, 0, 2}), VarKind::B, false).is_zero());
    // dominant GL_3 value: delta-power times schur
    std::vector<long> lam{2, 1, -1};
    long e = lam[0] * 2 + lam[1] * 0 + lam[2] * (-2);
    Scalar expect3 =
        schur_poly(ell, VarKind::B, lam).times(CycRat::sqrt_ell(ell, -e));
    CHECK(whittaker_factor(diag_pi_powers(ell, lam), VarKind::B, false) == expect3);
  }
}

TEST_CASE("whittaker factor: right K-invariance and central twist") {
  std::mt19937_64 rng(2024);
  for (int ell : {2, 3}) {
    for (int m : {2, 3}) {
      std::vector<long> lam(size_t(m), 0);
      lam[0] = 2;
      if (m == 3) lam[1] = 1;
      Mat g = diag_pi_powers(ell, lam);
      Scalar base = whittaker_factor(g, VarKind::B, false);
      for (int trial = 0; trial < 6; ++trial) {
        Mat k = random_unimodular(rng, ell, m);
        CHECK(whittaker_factor(g * k, VarKind::B, false) == base);
      }
      // central twist by w: multiplies by the product of all variables
      Mat zg = g.scaled(W(ell, 1, 1));
      Scalar all(ell, 1L);
      for (int i = 1; i <= m; ++i) all *= Scalar::variable(ell, VarKind::B, i, 1);
      CHECK(whittaker_factor(zg, VarKind::B, false) == base * all);
    }
  }
}

TEST_CASE("whittaker factor: left equivariance under the character") {
  for (int ell : {2, 3}) {
    for (bool conj : {false, true}) {
      VarKind kind = conj ? VarKind::A : VarKind::B;
      for (long c = 0; c < ell; ++c) {
        // GL_2: u has a genuine pole on the superdiagonal
        Mat u = Mat::identity(ell, 2);
        u.at(0, 1) = W(ell, c, -1) + W(ell, 1, 2);
        Mat g = diag_pi_powers(ell, {1, -1});
        CycRat psi_u = CycRat::zeta(ell, conj ? -c : c);
        CHECK(whittaker_factor(u * g, kind, conj) ==
              whittaker_factor(g, kind, conj).times(psi_u));
        // GL_3: two superdiagonal poles and one deeper corner pole
        Mat u3 = Mat::identity(ell, 3);
        u3.at(0, 1) = W(ell, c, -1);
        u3.at(1, 2) = W(ell, 1, -1) + W(ell, 1, 0);
        u3.at(0, 2) = W(ell, 1, -2);
        Mat g3 = diag_pi_powers(ell, {2, 1, 0});
        CycRat psi_u3 = CycRat::zeta(ell, conj ? -(c + 1) : (c + 1));
        CHECK(whittaker_factor(u3 * g3, kind, conj) ==
              whittaker_factor(g3, kind, conj).times(psi_u3));
      }
    }
  }
}

TEST_CASE("whittaker value: product over the triple") {
  const int ell = 3;
  GroupElt g = GroupElt::identity(ell, 1);
  g.g1.at(0, 0) = W(ell, 1, 2);
  g.g2 = diag_pi_powers(ell, {1, 0});
  g.u = W(ell, 2, -3);
  Scalar expect = Scalar::a_var(ell, 1, 2) *
                  (Scalar::b_var(ell, 1) + Scalar::b_var(ell, 2))
                      .times(CycRat::sqrt_ell(ell, -1)) *
                  Scalar::t_var(ell, -3);
  CHECK(whittaker_value(g) == expect);
}

TEST_CASE("unipotent shift reps: counts, distinctness, s-statistics") {
  for (int ell : {2, 3}) {
    auto r2 = eta_reps(ell, 2);
    CHECK(long(r2.size()) == ell);
    int s1 = 0;
    for (const auto& er : r2) s1 += (er.s == 1);
    CHECK(s1 == 1);

    auto r3 = eta_reps(ell, 3);
    CHECK(long(r3.size()) == long(ell) * ell * ell * ell);
    std::set<std::string> distinct;
    long c2 = 0, c0 = 0;
    for (const auto& er : r3) {
      distinct.insert(er.mat.str());
      if (er.s == 2) ++c2;
      if (er.s == 0) ++c0;
    }
    CHECK(distinct.size() == r3.size());
    CHECK(c2 == long(ell) * ell);
    CHECK(c0 == long(ell - 1) * (ell - 1) * ell * ell);

    auto c3 = eta_reps(ell, 3, true);
    CHECK(long(c3.size()) == 4L * ell * ell);
    auto cc2 = eta_reps(ell, 2, true);
    CHECK(cc2.size() == 2);
  }
}

TEST_CASE("alternating shift sum: GL_1 grid over the congruence transversal") {
  for (int ell : {2, 3}) {
    Scalar expect(ell, -long(ell));
    for (const Mat& k : congruence_transversal(ell, 1, 2)) {
      CHECK(birch_locus_member(k));
      for (long a = -2; a <= 2; ++a) {
        Mat h = diag_pi_powers(ell, {a}) * k;
        Scalar got = birch_sum(ell, 1, h);
        if (a == 0) {
          CHECK(got == expect);
        } else {
          CHECK(got.is_zero());
        }
      }
    }
  }
}

TEST_CASE("alternating shift sum: GL_2 grid at ell = 2") {
  const int ell = 2, n = 2;
  Scalar expect(ell, 16L);  // (+1) * ell^4 at n = 2
  auto reps = congruence_transversal(ell, n, 2);
  CHECK(reps.size() == 96);
  int locus_count = 0;
  for (const Mat& k : reps) {
    bool on_locus = birch_locus_member(k);
    locus_count += on_locus;
    for (long a1 = -2; a1 <= 2; ++a1) {
      for (long a2 = -2; a2 <= 2; ++a2) {
        Mat h = diag_pi_powers(ell, {a1, a2}) * k;
        Scalar got = birch_sum(ell, n, h);
        if (a1 == 0 && a2 == 0 && on_locus) {
          CHECK(got == expect);
        } else {
          CHECK(got.is_zero());
        }
      }
    }
  }
  // v(k_21) >= 2 within residues mod w^2: 2 unit choices for each diagonal
  // entry, 4 for the upper-right corner, corner below fixed to zero.
  CHECK(locus_count == 16);
}

TEST_CASE("alternating shift sum: left equivariance under the character") {
  const int ell = 3, n = 2;
  for (long c = 0; c < ell; ++c) {
    Mat u = Mat::identity(ell, 2);
    u.at(0, 1) = W(ell, c, -1);
    Mat k = Mat::identity(ell, 2);
    k.at(1, 0) = W(ell, 1, 2);
    CHECK(birch_sum(ell, n, u * k) ==
          birch_sum(ell, n, k).times(CycRat::zeta(ell, c)));
  }
}

TEST_CASE("zeta truncations: Schur sum equals the expanded product") {
  for (int n : {1, 2}) {
    const int ell = 2;
    Scalar zp = zeta_product_truncated(ell, n, 6);
    Scalar zs = zeta_schur_truncated(ell, n, 6);
    CHECK(zp == zs);
    // multiplying back by the finite product returns 1 through degree 6
    Scalar finite(ell, 1L);
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n + 1; ++j) {
        Scalar f = Scalar(ell, 1L) - (Scalar::a_var(ell, i) * Scalar::b_var(ell, j) *
                                      Scalar::t_var(ell, 1))
                                         .times(CycRat::sqrt_ell(ell, -1));
        finite *= f;
      }
    }
    CHECK(finite.mul_truncated(zp, 6) == Scalar(ell, 1L));
    CHECK(zp.coefficient(Monomial{}) == CycRat(ell, 1L));
  }
}
