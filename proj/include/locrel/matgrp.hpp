#pragma once
// Matrices over F = F_ell((w)), elements of the product group
// G = GL_n(F) x GL_{n+1}(F) x F^x, and compact open subgroups described by
// entry-valuation patterns.  All subgroup volumes are exact rationals,
// normalized so that GL_m(O), resp. O^x, has volume 1.

#include <gmpxx.h>

#include <string>
#include <vector>

#include "locrel/field.hpp"

namespace locrel {

struct Mat {
  int rows = 0, cols = 0;
  std::vector<FieldElement> a;  // row-major

  Mat() = default;
  Mat(int r, int c, const FieldElement& fill);
  static Mat identity(int ell, int m);
  static Mat zeros(int ell, int r, int c);

  FieldElement& at(int i, int j) { return a[size_t(i) * cols + j]; }
  const FieldElement& at(int i, int j) const { return a[size_t(i) * cols + j]; }
  int ell() const { return a.at(0).ell(); }
  bool is_exact() const;

  Mat operator*(const Mat& o) const;
  Mat operator+(const Mat& o) const;
  Mat operator-(const Mat& o) const;
  Mat scaled(const FieldElement& c) const;
  Mat transpose() const;
  FieldElement det() const;  // cofactor expansion; exact on exact input
  // Adjugate / det.  Exact whenever det is an exact monomial (the common
  // case here); otherwise known through roughly want_end.
  Mat inverse(long want_end = 24) const;

  bool operator==(const Mat& o) const;  // exact entries only
  std::string str() const;              // "a, b; c, d"
};

// g1 in GL_m embedded into GL_{m+1} as the upper-left block.
Mat embed_corner(const Mat& h);
// Antidiagonal permutation matrix of size m.
Mat antidiag_ones(int ell, int m);
// diag(w^{e_1}, ..., w^{e_m}).
Mat diag_pi_powers(int ell, const std::vector<long>& e);

// Exponents of the elementary divisors of g (an invertible exact matrix),
// sorted decreasingly: g in GL_m(O) * diag(w^lambda) * GL_m(O).
std::vector<long> smith_exponents(const Mat& g);

struct IwasawaNAK {
  Mat u;                // upper triangular, unit diagonal (may be inexact)
  std::vector<long> t;  // g = u * diag(w^{t_i}) * k
  Mat k;                // in GL_m(O) (may be inexact)
};
// Iwasawa decomposition w.r.t. the upper-triangular Borel; needs exact g.
// Digits of u are reliable through the requested horizon.
IwasawaNAK iwasawa(const Mat& g, long want_end = 24);

struct GroupElt {
  Mat g1;          // n x n
  Mat g2;          // (n+1) x (n+1)
  FieldElement u;  // F^x component

  int n() const { return g1.rows; }
  int ell() const { return u.ell(); }
  static GroupElt identity(int ell, int n);
  GroupElt operator*(const GroupElt& o) const;
  GroupElt inverse(long want_end = 24) const;
  bool operator==(const GroupElt& o) const;
  std::string str() const;
};

// (h, iota(h), det h) for h in GL_n.
GroupElt diag_embed(const Mat& h);
// xi = (1, [[antidiag_ones, all-ones column], [0, 1]], 1).
GroupElt xi_element(int ell, int n);
// tau = diag_embed(diag(w^n, ..., w)).
GroupElt tau_element(int ell, int n);

// Valuation pattern for a compact open subgroup of GL_m(O):
//   v(g_ij) >= L_ij for i != j (L_ii = 0), g_ii = 1 mod w^{diag_depth},
//   det g a unit.  The triangle condition L_ij + L_jk >= L_ik makes the set a
//   group; diag_depth >= 1 additionally requires L_ik + L_ki >= diag_depth.
struct FactorPattern {
  int m = 0;
  std::vector<int> L;  // row-major m*m, diagonal zero
  int diag_depth = 0;

  int lat(int i, int j) const { return L[size_t(i) * m + j]; }
  int& lat(int i, int j) { return L[size_t(i) * m + j]; }

  static FactorPattern hyperspecial(int m);
  static FactorPattern congruence(int m, int t);
  static FactorPattern iwahori(int m);
  // v(g_ij) >= i - j + 1 below the diagonal (rows/cols 0-based here but the
  // condition is the 1-based i - j + 1).
  static FactorPattern depth_below(int m);

  bool valid() const;
  FactorPattern conj_by_diag_pows(const std::vector<long>& e) const;
  FactorPattern intersect(const FactorPattern& o) const;
  FactorPattern with_diag_depth(int c) const;
  bool contains(const FactorPattern& finer) const;
  bool member(const Mat& g) const;  // may throw PrecisionError
  // Additive Haar measure (M_m(O) normalized to 1) of the pattern set with
  // the unit-determinant condition, by exact windowed residue counting.
  mpq_class measure_additive(int ell) const;
  // Multiplicative volume, mu(GL_m(O)) = 1.
  mpq_class volume(int ell) const;
  bool operator==(const FactorPattern& o) const = default;
  std::string str() const;
};

// A compact open subgroup K = K_1 x K_2 x J_t of G.
struct SubgroupDesc {
  FactorPattern f1, f2;
  int j_depth = 0;  // J_0 = O^x, J_t = 1 + w^t O for t >= 1

  static SubgroupDesc maximal(int n);                     // GL(O) x GL(O) x O^x
  static SubgroupDesc iwahori_level(int n, int t = 0);    // Iw x Iw x J_t
  SubgroupDesc intersect(const SubgroupDesc& o) const;
  SubgroupDesc with_j_depth(int t) const;
  // tau^s K tau^{-s}
  SubgroupDesc conj_by_tau_pow(int n, int s) const;
  bool contains(const SubgroupDesc& finer) const;
  bool member(const GroupElt& g) const;
  mpq_class volume(int ell) const;  // mu(maximal) = 1
  bool operator==(const SubgroupDesc& o) const = default;
  std::string str() const;
};

// Volume of J_t, normalized mu(O^x) = 1.
mpq_class j_volume(int ell, int t);
// u in O^x (throws PrecisionError if undecidable) and u = 1 mod w^t.
bool j_member(const FieldElement& u, int t);

}  // namespace locrel
