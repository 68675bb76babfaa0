#pragma once
// Norm-relation layer: the level-t line of orbit indicators with the
// tau-shift averaging operator and its trace compatibility between
// neighbouring levels, the stabilizer-index factors behind that
// compatibility, randomized instances of the coset trace formula, the
// unit-level alternating sums with their H-averages, and the integrality /
// trace / zeta-functional checks tying those averages to the distinguished
// Hecke element.  Every check returns a structured report with an honest
// status; a failing report carries a witness sufficient to reproduce the
// failure.

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "locrel/cosetfun.hpp"
#include "locrel/hecke.hpp"
#include "locrel/matgrp.hpp"
#include "locrel/scalar.hpp"
#include "locrel/whittaker.hpp"

namespace locrel {

struct CheckReport {
  std::string check;
  std::vector<std::pair<std::string, std::string>> params;
  std::string status;   // "pass" | "fail" | "inconclusive-budget"
  std::string witness;  // empty on pass
  double seconds = 0.0;

  bool passed() const { return status == "pass"; }
  void param(const std::string& k, long v) { params.emplace_back(k, std::to_string(v)); }
  void param(const std::string& k, const std::string& v) { params.emplace_back(k, v); }
};

// One line of JSON per report: {"check","params","status","witness","seconds"}.
// with_timing = false (the default for machine output) pins "seconds" to 0 so
// that identical runs are byte-identical.
std::string report_json_line(const CheckReport& r, bool with_timing = false);

// g^e with exact inversion for e < 0.
GroupElt group_pow(const GroupElt& g, int e);

// The open-orbit base point (named once; never overloaded).
GroupElt xi_open_orbit(int ell, int n);

// Number of h in the residue lower Borel of the first factor whose embedded
// conjugate xi^{-1} iota(h) xi is lower triangular as well.  Equal to 1
// exactly when the orbit stabilizer meets the opposite Borel trivially in
// the residue group.
long xi_opposite_unipotent_fixers(int ell, int n);

// delta_t = indicator of xi * tau^t * (Iw x Iw x J_t) on the quotient.
CosetSum delta_t(int ell, int n, int t);

// Iw cap tau Iw tau^{-1} (up) and Iw cap tau^{-1} Iw tau (down), at
// GL_1-depth t.
SubgroupDesc iwahori_tau_up(int n, int t);
SubgroupDesc iwahori_tau_down(int n, int t);

// Averaging operator (U f)(x) = sum_gamma f(x gamma tau^{-1}) with gamma
// over Iw_t / (Iw cap tau^{-1} Iw tau)_t.  f must be invariant under the
// down-intersection at level t (automatic for the delta_t line).
CosetSum u_operator(const CosetSum& f, int t);

// Cover points xi tau^t beta tau (beta over Iw_t / up_t) sufficient for
// pointwise comparisons of level-t sums whose right factors involve one
// tau shift; depth counts extra tau shifts (cover grows accordingly).
std::vector<GroupElt> wild_cover_points(int ell, int n, int t, int depth = 1);

// Trace of delta_{t+1} from level t+1 down to level t equals U delta_t,
// compared exactly on a certified orbit cover.
CheckReport wild_check(int ell, int n, int t, CosetEngine& eng);

// The two stabilizer-index factors implicit in the previous identity at the
// point xi tau^{t+1}: the depth-raising index (equal to 1) and the
// tau-conjugation index (equal to the unipotent-lattice index), each
// computed along independent routes: engine measures, pattern-volume
// arithmetic and direct residue counting.
CheckReport stab_factor_check(int ell, int n, int t, CosetEngine& eng);

// Randomized instances of the coset trace formula
//   Tr_K^{K'} 1[x K''] = [K'':K'] * (mu_H(H cap xKx^{-1}) / mu_H(H cap xK''x^{-1})) * 1[xK]
// with K' contained in K cap K''; indices are computed along two
// independent routes before use.
CheckReport coset_trace_check(unsigned long seed, int count);

// Volume of the lower-depth congruence subgroup K_H^phi inside GL_n(O)
// (strictly-below-diagonal depth i - j + 1), and of its depth-1 diagonal
// refinement.
mpq_class k_phi_volume(int ell, int n);
mpq_class k_phi_1_volume(int ell, int n);

// (1, eta, 1) as a group element.
GroupElt eta_group_elt(int ell, int n, const Mat& eta);

// Group-side alternating sums over the size-(n+1) shift set, both
// normalized by mu(K_H^phi)^{-1}:
//   delta_prime   = sum over all representatives of (1-ell)^s 1[(1,eta) K x O^x]
//   delta_prime_1 = sum over canonical representatives of (-1)^s (ell-1)^n
//                   1[(1,eta) K x J_1]
CosetSum delta_prime(int ell, int n);
CosetSum delta_prime_1(int ell, int n);

// eta-class equality (same coset modulo the integral upper unitriangular
// subgroup) and the projection onto representatives whose superdiagonal
// pole digits lie in {0, 1}, via conjugation by constant diagonal units.
bool eta_same_class(const Mat& a, const Mat& b);
// Digit representative of g modulo right multiplication by the integral
// upper unitriangular subgroup (column operations clearing integral parts).
Mat eta_class_reduce(const Mat& g);
// Deterministic projection: conjugate by the diagonal unit matrix (last
// entry 1) that rescales every nonzero superdiagonal pole digit to 1, then
// reduce.  Fixes canonical representatives pointwise; fibres over a
// canonical representative have size (ell-1)^(number of nonzero poles).
Mat eta_pr(int ell, int m, const Mat& eta);
// Index into eta_reps(ell, m, true) of eta's projection.
size_t eta_canonical_index(int ell, int m, const Mat& eta);
// Partition of eta_reps(ell, m) into fibres over the canonical set:
// result[i] lists full-set indices mapping to canonical index i.
std::vector<std::vector<size_t>> eta_fibre_partition(int ell, int m);

// Every coefficient of the H-average of delta_prime_1 has only powers of
// ell in its denominator, and its trace from GL_1-depth 1 to depth 0 equals
// the H-average of delta_prime.
CheckReport tame_integrality_check(int ell, int n, CosetEngine& eng);

// Cover points for comparisons against f acting on the base-point
// indicator: single-coset representatives of the keys of f and of its
// involution.
std::vector<GroupElt> hecke_cover_points(const HeckeElt& f);

// Trace of the scaled H-average of delta_prime_1 from depth 1 to depth 0
// equals the involuted distinguished element acting on the base-point
// indicator, compared exactly on a certified orbit cover.
CheckReport tame_main_check(int ell, int n, CosetEngine& eng);

// delta_B(pi^a)^{-1} for GL_n, a rational power of ell.
CycRat delta_b_inverse(int ell, const std::vector<long>& a);

// Truncated H-side zeta integral of a weighted shift sum: for weights w on
// exact GL_{n+1} shift elements,
//   sum_{a dominant, entries >= floor_entry, |a| <= bound}
//     delta_B^{-1}(pi^a) W_n(pi^a; A, conj) T^{|a|}
//     * (1/N) sum_{k in GL_n(O)/Cong(cong_depth)} sum_eta w_eta
//         W_{n+1}(iota(pi^a k) eta; B)
// where N is the certified transversal size.  cong_depth = 0 integrates the
// constant class only (valid when every eta is central-trivial, e.g. the
// identity).
Scalar eta_zeta_truncated(int ell, int n,
                          const std::vector<std::pair<Mat, CycRat>>& weighted,
                          int cong_depth, long floor_entry, long bound);

// The scaled H-average of delta_prime equals the involuted distinguished
// element acting on the base point: verified both in the zeta functional
// (symbolically, against the transform times the truncated series, with the
// product/Schur truncation cross-check) and pointwise via x_equal.
CheckReport zeta_functional_check(int ell, int n, CosetEngine& eng);

}  // namespace locrel
