#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "locrel/hecke.hpp"

using namespace locrel;

namespace {

// ---------------------------------------------------------------------------
// Independent single-coset oracle: closure of pi^lambda K under left
// multiplication by generators of GL_m(O) modulo a deep enough congruence
// level.  Written before the canonical-representative enumeration and kept
// frozen.
// ---------------------------------------------------------------------------

bool same_left_coset(const Mat& a, const Mat& b) {
  if (a.det().valuation() != b.det().valuation()) return false;
  Mat p = a.inverse(24) * b;
  for (const FieldElement& x : p.a) {
    if (!x.valuation_at_least(0)) return false;
  }
  return true;
}

std::vector<Mat> bfs_singles(int ell, int m, const std::vector<long>& lambda) {
  const long shift = lambda.back();
  std::vector<long> lam(lambda);
  for (long& v : lam) v -= shift;
  const long depth = lam.front();

  std::vector<Mat> gens;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      for (long c = 1; c < ell; ++c) {
        for (long e = 0; e < depth; ++e) {
          Mat g = Mat::identity(ell, m);
          g.at(i, j) = FieldElement::monomial(ell, c, e);
          gens.push_back(g);
        }
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    for (long c = 2; c < ell; ++c) {
      Mat g = Mat::identity(ell, m);
      g.at(i, i) = FieldElement::monomial(ell, c, 0);
      gens.push_back(g);
    }
    for (long e = 1; e < depth; ++e) {
      for (long c = 1; c < ell; ++c) {
        Mat g = Mat::identity(ell, m);
        g.at(i, i) = FieldElement::one(ell) + FieldElement::monomial(ell, c, e);
        gens.push_back(g);
      }
    }
  }

  std::vector<Mat> reps{diag_pi_powers(ell, lam)};
  size_t next = 0;
  while (next < reps.size()) {
    Mat base = reps[next++];
    for (const Mat& g : gens) {
      Mat cand = g * base;
      bool fresh = true;
      for (const Mat& r : reps) {
        if (same_left_coset(r, cand)) {
          fresh = false;
          break;
        }
      }
      if (fresh) reps.push_back(cand);
    }
  }
  if (shift != 0) {
    const FieldElement z = FieldElement::uniformizer_pow(ell, shift);
    for (Mat& r : reps) r = r.scaled(z);
  }
  return reps;
}

// Permute the A- or B-exponents of every monomial.
Scalar permute_vars(const Scalar& s, VarKind kind, const std::vector<int>& perm) {
  Scalar out(s.ell());
  for (const auto& [mon, c] : s.terms()) {
    Monomial mm;
    for (const auto& [var, e] : mon.factors) {
      VarId v = var;
      if (v.kind == kind) v.index = uint8_t(perm[size_t(v.index) - 1]);
      mm.factors.push_back({v, e});
    }
    std::sort(mm.factors.begin(), mm.factors.end());
    out += Scalar::monomial(s.ell(), mm, c);
  }
  return out;
}

HeckeKey key1(long a, long b1, long b2, long t) { return {{a}, {b1, b2}, t}; }

Scalar lpoly(int ell, int n) {
  Scalar P(ell, 1L);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n + 1; ++j) {
      P *= Scalar(ell, 1L) - (Scalar::a_var(ell, i) * Scalar::b_var(ell, j) *
                              Scalar::t_var(ell, 1))
                                 .times(CycRat::sqrt_ell(ell, -1));
    }
  }
  return P;
}

mpq_class frac(long n, long d) {
  mpq_class q(n, d);
  q.canonicalize();
  return q;
}

}  // namespace

TEST_CASE("basis bookkeeping: merging, zero removal, validation") {
  HeckeElt f(3, 1);
  f.add(key1(1, 1, 0, 2), CycRat(3, 2L));
  f.add(key1(1, 1, 0, 2), CycRat(3, 3L));
  CHECK(f.terms().size() == 1);
  CHECK(f.coefficient(key1(1, 1, 0, 2)) == CycRat(3, 5L));
  f.add(key1(1, 1, 0, 2), CycRat(3, -5L));
  CHECK(f.is_zero());
  CHECK_THROWS_AS(f.add(key1(0, 0, 1, 0), CycRat(3, 1L)), std::invalid_argument);
}

TEST_CASE("transform of basis elements: hand values") {
  for (int ell : {2, 3}) {
    // GL_1
    for (long k = -3; k <= 3; ++k) {
      CHECK(satake_gl(ell, 1, VarKind::A, {k}) == Scalar::a_var(ell, 1, k));
    }
    auto x1 = Scalar::b_var(ell, 1), x2 = Scalar::b_var(ell, 2);
    // GL_2 minuscule and central
    CHECK(satake_gl(ell, 2, VarKind::B, {1, 0}) ==
          (x1 + x2).times(CycRat::sqrt_ell(ell, 1)));
    CHECK(satake_gl(ell, 2, VarKind::B, {1, 1}) == x1 * x2);
    CHECK(satake_gl(ell, 2, VarKind::B, {-1, -1}) ==
          Scalar::b_var(ell, 1, -1) * Scalar::b_var(ell, 2, -1));
    // GL_2 non-minuscule
    Scalar expect20 = (x1 * x1 + x2 * x2).times(CycRat::ell_pow(ell, 1)) +
                      (x1 * x2).times(CycRat(ell, long(ell - 1)));
    CHECK(satake_gl(ell, 2, VarKind::B, {2, 0}) == expect20);
    // central shift compatibility
    CHECK(satake_gl(ell, 2, VarKind::B, {0, -1}) ==
          satake_gl(ell, 2, VarKind::B, {1, 0}) * Scalar::b_var(ell, 1, -1) *
              Scalar::b_var(ell, 2, -1));
    // GL_3 fundamental weights: lead r^2 times elementary symmetric
    auto y1 = Scalar::b_var(ell, 1), y2 = Scalar::b_var(ell, 2),
         y3 = Scalar::b_var(ell, 3);
    CHECK(satake_gl(ell, 3, VarKind::B, {1, 0, 0}) ==
          (y1 + y2 + y3).times(CycRat::ell_pow(ell, 1)));
    CHECK(satake_gl(ell, 3, VarKind::B, {1, 1, 0}) ==
          (y1 * y2 + y1 * y3 + y2 * y3).times(CycRat::ell_pow(ell, 1)));
    CHECK(satake_gl(ell, 3, VarKind::B, {1, 1, 1}) == y1 * y2 * y3);
  }
}

TEST_CASE("transform outputs are symmetric under variable permutations") {
  const int ell = 3;
  std::vector<std::vector<long>> gl3 = {{1, 0, 0}, {2, 0, 0}, {2, 1, 0}, {1, 1, -1}};
  for (const auto& lam : gl3) {
    Scalar s = satake_gl(ell, 3, VarKind::B, lam);
    CHECK(permute_vars(s, VarKind::B, {2, 1, 3}) == s);
    CHECK(permute_vars(s, VarKind::B, {3, 1, 2}) == s);
  }
  Scalar s2 = satake_gl(ell, 2, VarKind::A, {3, 0});
  CHECK(permute_vars(s2, VarKind::A, {2, 1}) == s2);
}

TEST_CASE("single cosets: counts, distinctness, closure oracle") {
  for (int ell : {2, 3}) {
    // minuscule counts
    CHECK(single_cosets_gl(ell, 2, {1, 0}).size() == size_t(ell + 1));
    CHECK(single_cosets_gl(ell, 3, {1, 0, 0}).size() == size_t(ell * ell + ell + 1));
    CHECK(single_cosets_gl(ell, 3, {1, 1, 0}).size() == size_t(ell * ell + ell + 1));
    CHECK(single_cosets_gl(ell, 3, {1, 1, 1}).size() == 1);
    CHECK(single_cosets_gl(ell, 2, {2, 1}).size() == size_t(ell + 1));

    std::vector<std::vector<long>> gl2 = {{1, 0}, {2, 0}, {3, 0}, {2, 1}};
    for (const auto& lam : gl2) {
      auto canon = single_cosets_gl(ell, 2, lam);
      auto orac = bfs_singles(ell, 2, lam);
      REQUIRE(canon.size() == orac.size());
      for (const Mat& a : canon) {
        CHECK(smith_exponents(a) == lam);
        int hits = 0;
        for (const Mat& b : orac) hits += same_left_coset(a, b);
        CHECK(hits == 1);
      }
      for (size_t i = 0; i < canon.size(); ++i) {
        for (size_t j = i + 1; j < canon.size(); ++j) {
          CHECK(!same_left_coset(canon[i], canon[j]));
        }
      }
    }
    std::vector<std::vector<long>> gl3 = {{1, 0, 0}, {1, 1, 0}, {2, 0, 0}};
    if (ell == 2) gl3.push_back({2, 1, 0});
    for (const auto& lam : gl3) {
      auto canon = single_cosets_gl(ell, 3, lam);
      auto orac = bfs_singles(ell, 3, lam);
      REQUIRE(canon.size() == orac.size());
      for (const Mat& a : canon) {
        CHECK(smith_exponents(a) == lam);
        int hits = 0;
        for (const Mat& b : orac) hits += same_left_coset(a, b);
        CHECK(hits == 1);
      }
    }
  }
}

TEST_CASE("transform is an algebra homomorphism on random pairs") {
  std::mt19937_64 rng(7);
  auto rand_key = [&](int n, long lo, long hi) {
    auto tuple = [&](int m) {
      std::vector<long> v;
      for (int i = 0; i < m; ++i) v.push_back(lo + long(rng() % unsigned(hi - lo + 1)));
      std::sort(v.begin(), v.end(), std::greater<long>());
      return v;
    };
    HeckeKey k;
    k.lam = tuple(n);
    k.mu = tuple(n + 1);
    k.t = long(rng() % 3) - 1;
    return k;
  };
  int done = 0;
  while (done < 20) {
    const int n = (done % 3 == 2) ? 2 : 1;
    const int ell = (done % 2) ? 3 : 2;
    HeckeElt f(ell, n), g(ell, n);
    f.add(rand_key(n, -1, 2), CycRat(ell, frac(1 + long(rng() % 3), 1)));
    f.add(rand_key(n, -1, 1), CycRat(ell, frac(long(rng() % 5) - 2, 2)));
    g.add(rand_key(n, 0, n == 1 ? 2 : 1), CycRat(ell, frac(1, 3)));
    CHECK(satake(convolve(f, g)) == satake(f) * satake(g));
    ++done;
  }
}

TEST_CASE("convolution: hand identity in GL_2") {
  for (int ell : {2, 3}) {
    HeckeElt t1(ell, 1);
    t1.add(key1(0, 1, 0, 0), CycRat(ell, 1L));
    HeckeElt sq = convolve(t1, t1);
    // T_(1,0) * T_(1,0) = T_(2,0) + (ell + 1) T_(1,1)
    CHECK(sq.coefficient(key1(0, 2, 0, 0)) == CycRat(ell, 1L));
    CHECK(sq.coefficient(key1(0, 1, 1, 0)) == CycRat(ell, long(ell + 1)));
    CHECK(sq.terms().size() == 2);
  }
}

TEST_CASE("involution: transform compatibility and self-inverse") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = (trial % 2) + 1;
    const int ell = (trial % 3 == 0) ? 3 : 2;
    HeckeElt f(ell, n);
    auto tuple = [&](int m, long lo, long hi) {
      std::vector<long> v;
      for (int i = 0; i < m; ++i) v.push_back(lo + long(rng() % unsigned(hi - lo + 1)));
      std::sort(v.begin(), v.end(), std::greater<long>());
      return v;
    };
    for (int terms = 0; terms < 2; ++terms) {
      HeckeKey k{tuple(n, -2, 2), tuple(n + 1, -1, 1), long(rng() % 3) - 1};
      f.add(k, CycRat(ell, long(rng() % 4) + 1));
    }
    CHECK(involution(involution(f)) == f);
    CHECK(satake(involution(f)) == satake(f).invert_variables());
  }
}

TEST_CASE("round trip: inverse transform recovers basis elements") {
  // GL_1 x GL_2
  for (int ell : {2, 3}) {
    for (long a = -2; a <= 2; ++a) {
      for (long b1 = -1; b1 <= 2; ++b1) {
        for (long b2 = -1; b2 <= b1; ++b2) {
          for (long t : {-1L, 0L, 2L}) {
            HeckeElt f(ell, 1);
            f.add({{a}, {b1, b2}, t}, CycRat(ell, 1L));
            CHECK(inverse_satake(ell, 1, satake(f)) == f);
          }
        }
      }
    }
  }
  // GL_2 x GL_3 spot set
  const int ell = 2;
  std::vector<std::vector<long>> lams = {{0, 0}, {1, 0}, {2, 1}, {1, -1}};
  std::vector<std::vector<long>> mus = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 0, -1}};
  for (const auto& lam : lams) {
    for (const auto& mu : mus) {
      HeckeElt f(ell, 2);
      f.add({lam, mu, 1}, CycRat(ell, 2L));
      f.add({{0, 0}, {0, 0, 0}, 0}, CycRat(ell, 1L));
      CHECK(inverse_satake(ell, 2, satake(f)) == f);
    }
  }
  // a lone B_2 power is not symmetric in (B_1, B_2), hence not a transform
  CHECK_THROWS_AS((void)inverse_satake(2, 1, Scalar::b_var(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("distinguished element: frozen coefficients in the smallest case") {
  for (int ell : {2, 3}) {
    HeckeElt L = ell_operator(ell, 1);
    REQUIRE(L.terms().size() == 3);
    CHECK(L.coefficient({{0}, {0, 0}, 0}) == CycRat(ell, 1L));
    CHECK(L.coefficient({{1}, {1, 0}, 1}) == CycRat(ell, frac(-1, ell)));
    CHECK(L.coefficient({{2}, {1, 1}, 2}) == CycRat(ell, frac(1, ell)));
  }
}

TEST_CASE("distinguished element: transform equals the product formula") {
  for (int ell : {2, 3}) {
    for (int n : {1, 2}) {
      HeckeElt L = ell_operator(ell, n);
      CHECK(satake(L) == lpoly(ell, n));
      for (const auto& [k, c] : L.terms()) CHECK(c.is_ell_integral());
    }
  }
}

TEST_CASE("inverted element: transform matches the reciprocal product") {
  for (int ell : {2, 3}) {
    for (int n : {1, 2}) {
      Scalar got = satake(involution(ell_operator(ell, n))).negate_t_exponents();
      Scalar expect(ell, 1L);
      for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n + 1; ++j) {
          expect *= Scalar(ell, 1L) -
                    (Scalar::a_var(ell, i, -1) * Scalar::b_var(ell, j, -1) *
                     Scalar::t_var(ell, 1))
                        .times(CycRat::sqrt_ell(ell, -1));
        }
      }
      CHECK(got == expect);
    }
  }
}

TEST_CASE("action on the base point: structure of the resulting sum") {
  const int ell = 3;
  HeckeElt f(ell, 1);
  f.add(key1(1, 1, 0, 1), CycRat(ell, 2L));
  CosetSum s = act_on_basepoint(f);
  CHECK(s.on_quotient());
  CHECK(s.size() == size_t(ell + 1));  // 1 * (ell + 1) * 1 single cosets
  for (const CosetTerm& t : s.terms()) {
    CHECK(t.coeff == Scalar(ell, 2L));
    CHECK(t.right.g1.is_exact());
    CHECK(t.right.g2.is_exact());
    CHECK(t.K == SubgroupDesc::maximal(1));
  }
}
