#pragma once
// The spherical Hecke algebra of the product group GL_n x GL_{n+1} x GL_1
// with respect to the maximal compact subgroup: double-coset basis indexed by
// dominant cocharacter triples, the variable transform onto symmetric Laurent
// polynomials with its inverse, convolution via certified single-coset
// decompositions, the involution f -> f(g^{-1}), and the distinguished
// element whose transform is prod (1 - A_i B_j T r^{-1}).

#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

#include "locrel/cosetfun.hpp"
#include "locrel/matgrp.hpp"
#include "locrel/scalar.hpp"

namespace locrel {

// Basis label: a double coset K~ * pi^{(lam, mu, t)} * K~ with lam, mu
// non-increasing and t the GL_1 exponent.
struct HeckeKey {
  std::vector<long> lam;  // size n
  std::vector<long> mu;   // size n + 1
  long t = 0;
  auto operator<=>(const HeckeKey&) const = default;
  std::string str() const;
};

class HeckeElt {
 public:
  HeckeElt() : ell_(0), n_(0) {}
  HeckeElt(int ell, int n) : ell_(ell), n_(n) {}

  int ell() const { return ell_; }
  int n() const { return n_; }
  const std::map<HeckeKey, CycRat>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add(const HeckeKey& key, const CycRat& c);
  CycRat coefficient(const HeckeKey& key) const;
  HeckeElt& operator+=(const HeckeElt& o);
  HeckeElt scaled(const CycRat& c) const;
  bool operator==(const HeckeElt& o) const;
  std::string str() const;

 private:
  int ell_, n_;
  std::map<HeckeKey, CycRat> terms_;  // zero coefficients are never stored
};

// Transform of one GL_m double-coset indicator, computed from the unipotent
// integral: sum over mu of delta^{1/2}(pi^mu) * (measure of the unipotent
// slice) * x^mu.  lambda must be non-increasing (any integers).
Scalar satake_gl(int ell, int m, VarKind kind, const std::vector<long>& lambda);

// Transform of a full Hecke element (A-family for the GL_n factor, B-family
// for GL_{n+1}, T for GL_1).
Scalar satake(const HeckeElt& f);

// Inverse transform; throws std::invalid_argument if P is not a symmetric
// Laurent polynomial in the image.
HeckeElt inverse_satake(int ell, int n, const Scalar& P);

// Convolution with respect to mu(K~) = 1.
HeckeElt convolve(const HeckeElt& f, const HeckeElt& g);

// f^(g) = f(g^{-1}): on basis labels (lam, mu, t) -> (-rev lam, -rev mu, -t).
HeckeElt involution(const HeckeElt& f);

// The element whose transform equals prod_{i<=n, j<=n+1} (1 - A_i B_j T/r).
HeckeElt ell_operator(int ell, int n);

// Single cosets alpha K of K pi^lambda K in GL_m: canonical column-style
// triangular representatives (diagonal pi^{a_i}, entries above reduced mod
// the row pivot), filtered by elementary divisors and pairwise certified
// distinct.  Every representative is exact with exact inverse.
std::vector<Mat> single_cosets_gl(int ell, int m, const std::vector<long>& lambda);

// Product single cosets g_s with K~ pi^key K~ = union g_s K~.
std::vector<GroupElt> single_cosets(int ell, int n, const HeckeKey& key);

// Action on the base-point indicator of the quotient: f . 1[H K~] =
// sum over terms and single cosets of coeff * 1[H K~ g_s^{-1}], returned as
// a quotient-side coset sum.
CosetSum act_on_basepoint(const HeckeElt& f);

}  // namespace locrel
