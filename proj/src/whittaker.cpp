#include "locrel/whittaker.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace locrel {

namespace {

// (1 - ell)^s as an exact rational.
mpq_class alt_weight(int ell, int s) {
  mpz_class p = 1;
  for (int i = 0; i < s; ++i) p *= (1 - ell);
  return mpq_class(p);
}

std::string schur_key(int ell, VarKind kind, const std::vector<long>& mu) {
  std::ostringstream os;
  os << ell << (kind == VarKind::A ? 'A' : 'B');
  for (long v : mu) os << ':' << v;
  return os.str();
}

// s_mu for a non-negative non-increasing tuple, via the branching recursion
//   s_mu(x_1..x_m) = sum over nu interlaced below mu of
//                    s_nu(x_1..x_{m-1}) * x_m^{|mu| - |nu|}.
Scalar schur_partition(int ell, VarKind kind, const std::vector<long>& mu) {
  static std::map<std::string, Scalar> memo;
  const std::string key = schur_key(ell, kind, mu);
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  const int m = int(mu.size());
  Scalar out(ell);
  if (m == 1) {
    out = Scalar::variable(ell, kind, 1, mu[0]);
  } else {
    long total = 0;
    for (long v : mu) total += v;
    std::vector<long> nu(size_t(m) - 1);
    for (int i = 0; i + 1 < m; ++i) nu[size_t(i)] = mu[size_t(i) + 1];
    while (true) {
      long sub = 0;
      for (long v : nu) sub += v;
      out += schur_partition(ell, kind, nu) *
             Scalar::variable(ell, kind, m, total - sub);
      int i = m - 2;
      while (i >= 0 && nu[size_t(i)] == mu[size_t(i)]) {
        nu[size_t(i)] = mu[size_t(i) + 1];
        --i;
      }
      if (i < 0) break;
      ++nu[size_t(i)];
    }
  }
  memo.emplace(key, out);
  return out;
}

}  // namespace

CycRat psi_value(const FieldElement& x, bool conjugate) {
  long d = x.digit(-1);
  return CycRat::zeta(x.ell(), conjugate ? -d : d);
}

Scalar schur_poly(int ell, VarKind kind, const std::vector<long>& lambda) {
  const int m = int(lambda.size());
  if (m == 0) return Scalar(ell, 1L);
  for (int i = 0; i + 1 < m; ++i) {
    if (lambda[size_t(i)] < lambda[size_t(i) + 1]) {
      throw std::invalid_argument("schur_poly: tuple must be non-increasing");
    }
  }
  const long shift = lambda.back();
  std::vector<long> mu(lambda.size());
  for (size_t i = 0; i < lambda.size(); ++i) mu[i] = lambda[i] - shift;
  Scalar out = schur_partition(ell, kind, mu);
  if (shift != 0) {
    for (int i = 1; i <= m; ++i) out *= Scalar::variable(ell, kind, i, shift);
  }
  return out;
}

mpz_class schur_dimension(int ell, const std::vector<long>& lambda) {
  Scalar s = schur_poly(ell, VarKind::A, lambda);
  mpz_class dim = 0;
  for (const auto& [mon, c] : s.terms()) {
    mpq_class q = c.rational_value();
    if (q.get_den() != 1) throw std::logic_error("schur coefficient not integral");
    dim += q.get_num();
  }
  return dim;
}

Scalar whittaker_factor(const Mat& g, VarKind kind, bool conjugate_psi) {
  const int ell = g.ell();
  const int m = g.rows;
  IwasawaNAK dec = iwasawa(g, 8);
  for (int i = 0; i + 1 < m; ++i) {
    if (dec.t[size_t(i)] < dec.t[size_t(i) + 1]) return Scalar(ell);  // zero
  }
  long d = 0;
  for (int i = 0; i + 1 < m; ++i) d += dec.u.at(i, i + 1).digit(-1);
  CycRat c = CycRat::zeta(ell, conjugate_psi ? -d : d);
  long e = 0;
  for (int i = 1; i <= m; ++i) e += dec.t[size_t(i) - 1] * (m + 1 - 2 * i);
  c *= CycRat::sqrt_ell(ell, -e);
  return schur_poly(ell, kind, dec.t).times(c);
}

Scalar whittaker_value(const GroupElt& g) {
  const int ell = g.ell();
  Scalar out = whittaker_factor(g.g1, VarKind::A, true);
  if (out.is_zero()) return out;
  out *= whittaker_factor(g.g2, VarKind::B, false);
  if (out.is_zero()) return out;
  return out * Scalar::t_var(ell, g.u.valuation());
}

std::vector<EtaRep> eta_reps(int ell, int m, bool canonical_only) {
  struct Slot {
    int i, j;
    long expo;
    bool superdiag_pole;  // the single digit of a superdiagonal entry
  };
  std::vector<Slot> slots;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < j; ++i) {
      for (long e = i - j; e <= -1; ++e) {
        slots.push_back({i, j, e, j == i + 1});
      }
    }
  }
  std::vector<int> digit(slots.size(), 0);
  std::vector<EtaRep> out;
  while (true) {
    Mat eta = Mat::identity(ell, m);
    for (size_t k = 0; k < slots.size(); ++k) {
      if (digit[k] != 0) {
        eta.at(slots[k].i, slots[k].j) +=
            FieldElement::monomial(ell, digit[k], slots[k].expo);
      }
    }
    int s = 0;
    for (int i = 0; i + 1 < m; ++i) {
      if (eta.at(i, i + 1).valuation_at_least(0)) ++s;
    }
    out.push_back({eta, s});
    size_t k = 0;
    while (k < slots.size()) {
      const int top = (canonical_only && slots[k].superdiag_pole) ? 2 : ell;
      if (++digit[k] < top) break;
      digit[k] = 0;
      ++k;
    }
    if (k == slots.size()) break;
  }
  return out;
}

Scalar birch_sum(int ell, int n, const Mat& h) {
  const Mat ih = embed_corner(h);
  Scalar out(ell);
  for (const EtaRep& er : eta_reps(ell, n + 1, false)) {
    Scalar w = whittaker_factor(ih * er.mat, VarKind::B, false);
    if (!w.is_zero()) out += w.times(CycRat(ell, alt_weight(ell, er.s)));
  }
  return out;
}

bool birch_locus_member(const Mat& k) {
  return FactorPattern::depth_below(k.rows).member(k);
}

Scalar zeta_product_truncated(int ell, int n, long bound) {
  Scalar acc(ell, 1L);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n + 1; ++j) {
      Scalar geom(ell);
      for (long k = 0; k <= bound; ++k) {
        Scalar term = Scalar::variable(ell, VarKind::A, i, k) *
                      Scalar::variable(ell, VarKind::B, j, k) *
                      Scalar::t_var(ell, k);
        geom += term.times(CycRat::sqrt_ell(ell, -k));
      }
      acc = acc.mul_truncated(geom, bound);
    }
  }
  return acc;
}

Scalar zeta_schur_truncated(int ell, int n, long bound) {
  Scalar acc(ell);
  std::vector<long> a(size_t(n), 0);
  // Enumerate non-increasing non-negative tuples with |a| <= bound.
  while (true) {
    long total = 0;
    bool dominant = true;
    for (size_t i = 0; i < a.size(); ++i) {
      total += a[i];
      if (i + 1 < a.size() && a[i] < a[i + 1]) dominant = false;
    }
    if (dominant && total <= bound) {
      std::vector<long> b = a;
      b.push_back(0);
      Scalar term = schur_poly(ell, VarKind::A, a) *
                    schur_poly(ell, VarKind::B, b) * Scalar::t_var(ell, total);
      acc += term.times(CycRat::sqrt_ell(ell, -total));
    }
    size_t k = 0;
    while (k < a.size() && a[k] == bound) a[k++] = 0;
    if (k == a.size()) break;
    ++a[k];
  }
  return acc;
}

}  // namespace locrel
