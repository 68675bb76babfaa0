#pragma once
// Desk-scale representation layer: interlacing weight tuples, explicit
// highest-weight modules on the triangular-pattern basis with exact rational
// generator matrices, the restriction multiplicity between neighbouring
// general linear groups computed along three independent routes (pattern
// count, character coefficient, invariant-line dimension), and the valuation
// check for the rescaled action of antidominant diagonal elements on the
// weight lattice.

#include <gmpxx.h>

#include <string>
#include <vector>

#include "locrel/normrel.hpp"
#include "locrel/scalar.hpp"

namespace locrel {

// A non-increasing integer tuple labelling a highest weight of GL_m.
struct HighestWeight {
  std::vector<long> entries;

  HighestWeight() = default;
  // Throws std::invalid_argument if the tuple increases somewhere.
  explicit HighestWeight(std::vector<long> e);

  int size() const { return int(entries.size()); }
  std::string str() const;
  bool operator==(const HighestWeight& o) const { return entries == o.entries; }
};

// b_1 >= a_1 >= b_2 >= ... >= a_n >= b_{n+1}.  Requires |b| = |a| + 1.
bool interlaces(const HighestWeight& a, const HighestWeight& b);

// Explicit GL_m module on the basis of triangular interlacing patterns with
// top row lambda.  Diagonal elements act by the per-pattern weights; the
// elementary raising and lowering generators act by the classical one-step
// coefficient formulas over exact rationals.
struct WeylModule {
  int m = 0;
  std::vector<long> lambda;
  // pattern p is stored as rows[0..m-1], rows[i] having i + 1 entries and
  // rows[m-1] = lambda; consecutive rows interlace.
  std::vector<std::vector<std::vector<long>>> patterns;
  std::vector<std::vector<long>> weights;  // pattern -> weight in Z^m
  // raise[k-1] is the matrix of the elementary matrix unit E_{k,k+1} and
  // lower[k-1] that of E_{k+1,k} (k = 1..m-1); entry [r][c] is the
  // coefficient of basis vector r in the image of basis vector c.
  std::vector<std::vector<std::vector<mpq_class>>> raise;
  std::vector<std::vector<std::vector<mpq_class>>> lower;

  long dim() const { return long(patterns.size()); }
};

WeylModule weyl_module(int m, const HighestWeight& lambda);

// Character of the module in the chosen variable family: the sum of x^w
// over its weights with multiplicity.
Scalar module_character(int ell, VarKind kind, const WeylModule& M);

// Multiplicity of the GL_n module a inside the restriction of the
// GL_{n+1} module b, computed by enumerating the length-n rows that
// interlace b and counting the matches with a.
long branching_multiplicity(const HighestWeight& a, const HighestWeight& b);

// The same multiplicity read off from characters alone: the coefficient of
// x^{a + rho} in s_b(x_1..x_n, 1) * prod_{i<j} (x_i - x_j), rho =
// (n-1, ..., 1, 0).  ell only fixes the coefficient ring.
long branching_multiplicity_character(int ell, const HighestWeight& a,
                                      const HighestWeight& b);

// Dimension of the joint invariants of V_{-a} (x) V_b under the smaller
// group embedded diagonally (torus-null subspace cut by every elementary
// raising and lowering generator), with -a = (-a_n, ..., -a_1).  When the
// dimension is one and line != nullptr, *line receives a primitive integer
// vector spanning the invariant line in the tensor pattern basis.
long invariant_dimension(const HighestWeight& a, const HighestWeight& b,
                         std::vector<mpz_class>* line = nullptr);

// Valuation check for p^{-<lambda, c>} * xi_lambda(diag(p^{c_1}, ...,
// p^{c_m})) on the pattern-basis lattice: the rescaled (diagonal) matrix is
// built over exact rationals and every entry must have non-negative
// p-valuation; the valuations are independently compared against the
// weight-by-weight exponents <w - lambda, c>.  c is antidominant when it is
// non-decreasing; the check runs either way and reports honestly, so a
// non-antidominant c serves as a negative control.
CheckReport lattice_integrality_check(const HighestWeight& lambda, int p,
                                      const std::vector<long>& c);

// Grid check for the restriction multiplicity: over all non-increasing
// tuples with entries in [0, bound], every pair must agree between the
// pattern count and the character coefficient, equal 1 exactly on the
// interlacing pairs and 0 elsewhere; a seeded sample of pairs is further
// cross-checked against the invariant-line dimension.
CheckReport branching_check(int ell, int n, long bound, unsigned long seed);

// Grid check for the lattice valuations: for GL_2 and GL_3 weights with
// |entries| <= bound, all antidominant exponent tuples with |c_i| <= 2 must
// pass, and a fixed non-antidominant control must exhibit a negative
// valuation.
CheckReport lattice_grid_check(int p, long bound);

}  // namespace locrel
