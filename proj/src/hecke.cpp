#include "locrel/hecke.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace locrel {

namespace {

bool non_increasing(const std::vector<long>& v) {
  for (size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i] < v[i + 1]) return false;
  return true;
}

long sum_of(const std::vector<long>& v) {
  long s = 0;
  for (long x : v) s += x;
  return s;
}

// <2 rho, mu> = sum mu_i (m + 1 - 2i), 1-based.
long two_rho(const std::vector<long>& mu) {
  const long m = long(mu.size());
  long s = 0;
  for (long i = 1; i <= m; ++i) s += mu[size_t(i) - 1] * (m + 1 - 2 * i);
  return s;
}

// All upper triangular matrices with diagonal pi^{comp_i} and the (i,j)
// entry for i < j running over residues mod pi^{comp_i}.
void for_each_hnf(int ell, int m, const std::vector<long>& comp,
                  const std::function<void(const Mat&)>& fn) {
  struct Slot {
    int i, j;
    long expo;
  };
  std::vector<Slot> slots;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      for (long e = 0; e < comp[size_t(i)]; ++e) slots.push_back({i, j, e});
    }
  }
  std::vector<int> digit(slots.size(), 0);
  while (true) {
    Mat a = Mat::zeros(ell, m, m);
    for (int i = 0; i < m; ++i) a.at(i, i) = FieldElement::uniformizer_pow(ell, comp[size_t(i)]);
    for (size_t k = 0; k < slots.size(); ++k) {
      if (digit[k] != 0) {
        a.at(slots[k].i, slots[k].j) +=
            FieldElement::monomial(ell, digit[k], slots[k].expo);
      }
    }
    fn(a);
    size_t k = 0;
    while (k < slots.size() && ++digit[k] == ell) digit[k++] = 0;
    if (k == slots.size()) break;
  }
}

// Non-negative compositions of total into m parts.
void for_each_composition(long total, int m,
                          const std::function<void(const std::vector<long>&)>& fn) {
  std::vector<long> c(size_t(m), 0);
  c[0] = total;
  while (true) {
    fn(c);
    // next composition
    int i = 0;
    while (i + 1 < m && c[size_t(i)] == 0) ++i;
    if (i + 1 >= m) break;
    long v = c[size_t(i)];
    c[size_t(i)] = 0;
    c[0] = v - 1;
    ++c[size_t(i) + 1];
  }
}

Scalar satake_of_key(int ell, const HeckeKey& key) {
  return satake_gl(ell, int(key.lam.size()), VarKind::A, key.lam) *
         satake_gl(ell, int(key.mu.size()), VarKind::B, key.mu) *
         Scalar::t_var(ell, key.t);
}

}  // namespace

std::string HeckeKey::str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < lam.size(); ++i) os << (i ? "," : "") << lam[i];
  os << "|";
  for (size_t i = 0; i < mu.size(); ++i) os << (i ? "," : "") << mu[i];
  os << "|" << t << ")";
  return os.str();
}

void HeckeElt::add(const HeckeKey& key, const CycRat& c) {
  if (c.is_zero()) return;
  if (long(key.lam.size()) != n_ || long(key.mu.size()) != n_ + 1 ||
      !non_increasing(key.lam) || !non_increasing(key.mu)) {
    throw std::invalid_argument("HeckeElt::add: malformed basis label");
  }
  auto [it, fresh] = terms_.try_emplace(key, c);
  if (!fresh) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

CycRat HeckeElt::coefficient(const HeckeKey& key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? CycRat(ell_) : it->second;
}

HeckeElt& HeckeElt::operator+=(const HeckeElt& o) {
  if (ell_ != o.ell_ || n_ != o.n_) throw std::invalid_argument("HeckeElt mismatch");
  for (const auto& [k, c] : o.terms_) add(k, c);
  return *this;
}

HeckeElt HeckeElt::scaled(const CycRat& c) const {
  HeckeElt out(ell_, n_);
  for (const auto& [k, cc] : terms_) out.add(k, cc * c);
  return out;
}

bool HeckeElt::operator==(const HeckeElt& o) const {
  if (terms_.empty() && o.terms_.empty()) return true;
  return ell_ == o.ell_ && n_ == o.n_ && terms_ == o.terms_;
}

std::string HeckeElt::str() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, c] : terms_) {
    os << (first ? "" : " + ") << "(" << c.str() << ")*" << k.str();
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

Scalar satake_gl(int ell, int m, VarKind kind, const std::vector<long>& lambda) {
  if (long(lambda.size()) != m || !non_increasing(lambda)) {
    throw std::invalid_argument("satake_gl: tuple must be non-increasing");
  }
  // The transform of one coset is a pure function of the label; the solver
  // revisits the same labels constantly, so cache per (ell, m, kind, lambda).
  static std::map<std::tuple<int, int, VarKind, std::vector<long>>, Scalar> cache;
  const auto cache_key = std::make_tuple(ell, m, kind, lambda);
  if (auto it = cache.find(cache_key); it != cache.end()) return it->second;
  const long shift = lambda.back();
  std::vector<long> lam(lambda);
  for (long& v : lam) v -= shift;
  const long total = sum_of(lam);

  Scalar out(ell);
  for_each_composition(total, m, [&](const std::vector<long>& mu) {
    long count = 0;
    for_each_hnf(ell, m, mu, [&](const Mat& a) {
      if (smith_exponents(a) == lam) ++count;
    });
    if (count == 0) return;
    CycRat coeff = CycRat::sqrt_ell(ell, -two_rho(mu)) * CycRat(ell, count);
    Scalar mono(ell, 1L);
    for (int i = 1; i <= m; ++i) {
      mono *= Scalar::variable(ell, kind, i, mu[size_t(i) - 1] + shift);
    }
    out += mono.times(coeff);
  });
  cache.emplace(cache_key, out);
  return out;
}

Scalar satake(const HeckeElt& f) {
  Scalar out(f.ell());
  for (const auto& [key, c] : f.terms()) out += satake_of_key(f.ell(), key).times(c);
  return out;
}

HeckeElt inverse_satake(int ell, int n, const Scalar& P) {
  HeckeElt out(ell, n);
  Scalar R = P;
  while (!R.is_zero()) {
    // Pick the term with the lexicographically largest exponent word
    // (A_1..A_n, B_1..B_{n+1}, T); for a symmetric polynomial this word is
    // non-increasing within each family.
    bool have = false;
    std::vector<long> best;
    CycRat best_c(ell);
    for (const auto& [mon, c] : R.terms()) {
      std::vector<long> word(size_t(2 * n + 2), 0);
      for (const auto& [var, e] : mon.factors) {
        if (var.kind == VarKind::A) {
          word[size_t(var.index) - 1] = e;
        } else if (var.kind == VarKind::B) {
          word[size_t(n) + size_t(var.index) - 1] = e;
        } else {
          word[size_t(2 * n + 1)] = e;
        }
      }
      if (!have || word > best) {
        have = true;
        best = word;
        best_c = c;
      }
    }
    HeckeKey key;
    key.lam.assign(best.begin(), best.begin() + n);
    key.mu.assign(best.begin() + n, best.begin() + 2 * n + 1);
    key.t = best[size_t(2 * n + 1)];
    if (!non_increasing(key.lam) || !non_increasing(key.mu)) {
      throw std::invalid_argument("inverse_satake: polynomial is not symmetric");
    }
    CycRat lead = CycRat::sqrt_ell(ell, two_rho(key.lam) + two_rho(key.mu));
    CycRat q = best_c * lead.inverse();
    out.add(key, q);
    R -= satake_of_key(ell, key).times(q);
  }
  return out;
}

std::vector<Mat> single_cosets_gl(int ell, int m, const std::vector<long>& lambda) {
  if (long(lambda.size()) != m || !non_increasing(lambda)) {
    throw std::invalid_argument("single_cosets_gl: tuple must be non-increasing");
  }
  static std::map<std::string, std::vector<Mat>> cache;
  std::ostringstream os;
  os << ell << "#" << m;
  for (long v : lambda) os << ":" << v;
  const std::string key = os.str();
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const long shift = lambda.back();
  std::vector<long> lam(lambda);
  for (long& v : lam) v -= shift;
  const long total = sum_of(lam);

  std::vector<Mat> out;
  for_each_composition(total, m, [&](const std::vector<long>& comp) {
    for_each_hnf(ell, m, comp, [&](const Mat& a) {
      if (smith_exponents(a) == lam) out.push_back(a);
    });
  });
  if (shift != 0) {
    const FieldElement z = FieldElement::uniformizer_pow(ell, shift);
    for (Mat& a : out) a = a.scaled(z);
  }
  cache.emplace(key, out);
  return out;
}

std::vector<GroupElt> single_cosets(int ell, int n, const HeckeKey& key) {
  std::vector<GroupElt> out;
  const FieldElement u = FieldElement::uniformizer_pow(ell, key.t);
  for (const Mat& a : single_cosets_gl(ell, n, key.lam)) {
    for (const Mat& b : single_cosets_gl(ell, n + 1, key.mu)) {
      out.push_back(GroupElt{a, b, u});
    }
  }
  return out;
}

HeckeElt convolve(const HeckeElt& f, const HeckeElt& g) {
  if (f.ell() != g.ell() || f.n() != g.n()) {
    throw std::invalid_argument("convolve: mismatched algebras");
  }
  const int ell = f.ell(), n = f.n();
  HeckeElt out(ell, n);
  for (const auto& [kf, cf] : f.terms()) {
    std::vector<GroupElt> singles = single_cosets(ell, n, kf);
    std::vector<GroupElt> inv;
    inv.reserve(singles.size());
    for (const GroupElt& s : singles) inv.push_back(s.inverse());
    for (const auto& [kg, cg] : g.terms()) {
      // Support window: nu dominant with entries in
      // [min(kf)+min(kg), max(kf)+max(kg)] and fixed total.
      auto window = [&](const std::vector<long>& a, const std::vector<long>& b,
                        std::vector<std::vector<long>>& acc) {
        const long lo = a.back() + b.back(), hi = a.front() + b.front();
        const long tot = sum_of(a) + sum_of(b);
        std::vector<long> nu(a.size(), lo);
        while (true) {
          if (non_increasing(nu) && sum_of(nu) == tot) acc.push_back(nu);
          size_t i = 0;
          while (i < nu.size() && nu[i] == hi) nu[i++] = lo;
          if (i == nu.size()) break;
          ++nu[i];
        }
      };
      std::vector<std::vector<long>> nus1, nus2;
      window(kf.lam, kg.lam, nus1);
      window(kf.mu, kg.mu, nus2);
      for (const auto& n1 : nus1) {
        for (const auto& n2 : nus2) {
          GroupElt x{diag_pi_powers(ell, n1), diag_pi_powers(ell, n2),
                     FieldElement::uniformizer_pow(ell, kf.t + kg.t)};
          long cnt = 0;
          for (const GroupElt& si : inv) {
            GroupElt z = si * x;
            if (smith_exponents(z.g1) == kg.lam && smith_exponents(z.g2) == kg.mu) {
              ++cnt;
            }
          }
          if (cnt) out.add({n1, n2, kf.t + kg.t}, cf * cg * CycRat(ell, cnt));
        }
      }
    }
  }
  return out;
}

HeckeElt involution(const HeckeElt& f) {
  HeckeElt out(f.ell(), f.n());
  auto rev_neg = [](const std::vector<long>& v) {
    std::vector<long> w(v.rbegin(), v.rend());
    for (long& x : w) x = -x;
    return w;
  };
  for (const auto& [k, c] : f.terms()) {
    out.add({rev_neg(k.lam), rev_neg(k.mu), -k.t}, c);
  }
  return out;
}

HeckeElt ell_operator(int ell, int n) {
  Scalar P(ell, 1L);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n + 1; ++j) {
      Scalar factor = Scalar(ell, 1L) -
                      (Scalar::a_var(ell, i) * Scalar::b_var(ell, j) *
                       Scalar::t_var(ell, 1))
                          .times(CycRat::sqrt_ell(ell, -1));
      P *= factor;
    }
  }
  return inverse_satake(ell, n, P);
}

CosetSum act_on_basepoint(const HeckeElt& f) {
  const int ell = f.ell(), n = f.n();
  CosetSum out(ell, n, /*on_quotient=*/true);
  const GroupElt id = GroupElt::identity(ell, n);
  const SubgroupDesc K = SubgroupDesc::maximal(n);
  for (const auto& [key, c] : f.terms()) {
    for (const GroupElt& s : single_cosets(ell, n, key)) {
      out.add(Scalar(ell, c), id, K, s.inverse());
    }
  }
  return out;
}

}  // namespace locrel
