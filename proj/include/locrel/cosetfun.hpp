#pragma once
// Functions on X = H\G and on G built from finitely many coset indicators,
// together with the exact solver that answers every membership, volume and
// equality question about them.
//
// A term (coeff, base, K, right) denotes coeff * indicator of the set
// H * base * K * right (quotient side) or base * K * right (group side).
// Right translation by g sends right -> right * g^{-1}, so no conjugated
// subgroups ever need to be represented.
//
// The solver reduces "does h in H = GL_n(F) exist with base^{-1} Delta(h) z
// in K" to an affine-linear congruence system over O/w^D (exact digit
// arithmetic, no carries in characteristic ell), plus a determinant
// condition handled by a measured digit refinement.  It returns exact
// multiplicative Haar measures, normalized mu_H(GL_n(O)) = 1.

#include <gmpxx.h>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "locrel/matgrp.hpp"
#include "locrel/scalar.hpp"

namespace locrel {

struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct SolveBudget {
  long cells = 8'000'000;       // determinant-refinement cells per solve
  long transversal = 4'000'000; // candidate elements per transversal build
};

struct SolveOutcome {
  bool empty = true;
  mpq_class measure;  // multiplicative measure of the h-set, 0 if empty
  std::optional<Mat> witness;
};

class CosetEngine {
 public:
  CosetEngine(int ell, int n, SolveBudget budget = {}) : ell_(ell), n_(n), budget_(budget) {}

  int ell() const { return ell_; }
  int n() const { return n_; }
  long solve_count() const { return solves_; }

  // The h-set {h in GL_n(F) : base^{-1} Delta(h) point in K}; measure is
  // computed only when need_measure.
  SolveOutcome h_solve(const GroupElt& base, const SubgroupDesc& K, const GroupElt& point,
                       bool need_measure);

  // point in H * base * K * right ?
  bool x_member(const GroupElt& base, const SubgroupDesc& K, const GroupElt& right,
                const GroupElt& point);
  // mu_H(H cap g K g^{-1})
  mpq_class stab_volume(const GroupElt& g, const SubgroupDesc& K);
  // z2 in H * z1 * K ?
  bool same_orbit(const GroupElt& z1, const GroupElt& z2, const SubgroupDesc& K);

 private:
  int ell_, n_;
  SolveBudget budget_;
  long solves_ = 0;
};

struct CosetTerm {
  Scalar coeff;
  GroupElt base;
  SubgroupDesc K;
  GroupElt right;
};

class CosetSum {
 public:
  CosetSum(int ell, int n, bool on_quotient)
      : ell_(ell), n_(n), on_quotient_(on_quotient) {}

  int ell() const { return ell_; }
  int n() const { return n_; }
  bool on_quotient() const { return on_quotient_; }
  const std::vector<CosetTerm>& terms() const { return terms_; }
  size_t size() const { return terms_.size(); }

  // Adds a term, combining with an existing structurally identical term.
  void add(const Scalar& coeff, const GroupElt& base, const SubgroupDesc& K,
           const GroupElt& right);
  void add_term(const CosetTerm& t) { add(t.coeff, t.base, t.K, t.right); }
  CosetSum& operator+=(const CosetSum& o);
  CosetSum scaled(const Scalar& c) const;
  // Right translation action: (g.f)(x) = f(xg).
  CosetSum acted_by(const GroupElt& g) const;

  Scalar evaluate(const GroupElt& z, CosetEngine& eng) const;

 private:
  int ell_, n_;
  bool on_quotient_;
  std::vector<CosetTerm> terms_;
  std::map<std::string, size_t> index_;  // structural key -> position in terms_
};

// Transversal of K / Kp (right cosets gamma * Kp), certified: candidates are
// members of K, pairwise inequivalent mod Kp, and their number equals the
// exact index vol(K)/vol(Kp).  Throws BudgetError / runtime_error if the
// certified transversal cannot be produced.
std::vector<GroupElt> subgroup_transversal(int ell, int n, const SubgroupDesc& K,
                                           const SubgroupDesc& Kp,
                                           const SolveBudget& budget = {});

// Exact index [K : Kp] as a certified integer.
mpz_class subgroup_index(int ell, const SubgroupDesc& K, const SubgroupDesc& Kp);

// Trace (sum over K/Kp of right translates); f must be right-Kp-invariant,
// which is checked structurally term by term.
CosetSum trace_to(const CosetSum& f, const SubgroupDesc& K, const SubgroupDesc& Kp,
                  CosetEngine& eng);

// Pushforward to the quotient: integrates each group-side indicator over H,
// term (c, b, K, r) -> (c * mu_H(H cap bKb^{-1}), b, K, r) on X.
CosetSum coinvariant_average(const CosetSum& f, CosetEngine& eng);

// Equality of two quotient-side sums as functions, both assumed (and
// structurally verified where possible) invariant under right translation by
// K_ref.  extra_points must cover the orbits of any term whose right factor
// is not structurally recognizable; allow_unstructured permits such terms.
bool x_equal(const CosetSum& f, const CosetSum& g, const SubgroupDesc& K_ref,
             CosetEngine& eng, const std::vector<GroupElt>& extra_points = {},
             bool allow_unstructured = false, std::string* mismatch = nullptr);

// Orbit-cover points for all terms of f at level K_ref (exposed for tests).
std::vector<GroupElt> orbit_cover_points(const CosetSum& f, const SubgroupDesc& K_ref,
                                         CosetEngine& eng, bool allow_unstructured,
                                         bool* saw_unstructured = nullptr);

// Transversal of GL_n(O) / congruence(n, m) by direct residue enumeration.
std::vector<Mat> congruence_transversal(int ell, int n, int m,
                                        const SolveBudget& budget = {});

}  // namespace locrel
