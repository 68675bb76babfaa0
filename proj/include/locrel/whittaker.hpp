#pragma once
// Spherical Whittaker values with symbolic Satake variables, the alternating
// unipotent-shift sums that cut out a congruence locus, and truncated zeta
// series.  Everything is exact: values live in the Laurent ring of scalar.hpp.

#include <vector>

#include "locrel/matgrp.hpp"
#include "locrel/scalar.hpp"

namespace locrel {

// Additive character of F trivial on O with conductor O, valued in ell-th
// roots of unity: x -> zeta^(digit of x at w^-1).  `conjugate` gives the
// inverse character.  Requires the digit at w^-1 to be known.
CycRat psi_value(const FieldElement& x, bool conjugate = false);

// Schur polynomial s_lambda in the A- or B-family for a non-increasing
// integer tuple lambda (Laurent: negative entries shift by the determinant
// character).  Throws std::invalid_argument if lambda increases somewhere.
Scalar schur_poly(int ell, VarKind kind, const std::vector<long>& lambda);

// Value of s_lambda at all variables = 1, i.e. the dimension of the
// highest-weight representation with highest weight lambda.
mpz_class schur_dimension(int ell, const std::vector<long>& lambda);

// Normalized spherical Whittaker value on GL_m at an exact invertible g,
// symbolic in the A- (kind = A) or B-family (kind = B):
//   g = u * diag(w^lambda) * k  (Iwasawa)  ->  psi(u) * delta^{1/2} * s_lambda
// with value 0 when lambda is not dominant; conjugate_psi selects the
// inverse additive character.  Normalized so the identity evaluates to 1.
Scalar whittaker_factor(const Mat& g, VarKind kind, bool conjugate_psi);

// Product value over a triple: A-factor with the conjugate character,
// B-factor with the plain character, and T^{v(u)}.
Scalar whittaker_value(const GroupElt& g);

// One representative of the unipotent shift set: an upper unitriangular
// m x m matrix whose (i,j) entry for i < j runs over w^{i-j} O / O, together
// with s = the number of integral superdiagonal entries.
struct EtaRep {
  Mat mat;
  int s = 0;
};

// All representatives (ell^{(m-1)m(m+1)/6} of them); canonical_only keeps
// only those whose superdiagonal pole digits lie in {0, 1}, giving
// 2^{m-1} * ell^{(m-1)m(m+1)/6 - (m-1)} representatives.
std::vector<EtaRep> eta_reps(int ell, int m, bool canonical_only = false);

// Alternating shift sum on GL_n:
//   sum_eta (1 - ell)^{s(eta)} * W_{n+1}(iota(h) * eta; B-family, psi)
// over the size-(n+1) shift set.  h must be exact and invertible.
Scalar birch_sum(int ell, int n, const Mat& h);

// The locus on which the alternating sum concentrates: k integral with unit
// determinant and v(k_ij) >= i - j + 1 strictly below the diagonal.
bool birch_locus_member(const Mat& k);

// Truncations (T-degree <= bound) of the zeta series:
//   product form:  prod_{i<=n, j<=n+1} (1 - A_i B_j T r^-1)^{-1}
//   Schur form:    sum over dominant a in Z_{>=0}^n of
//                  s_a(A) s_{(a,0)}(B) (T r^-1)^{|a|}
Scalar zeta_product_truncated(int ell, int n, long bound);
Scalar zeta_schur_truncated(int ell, int n, long bound);

}  // namespace locrel
