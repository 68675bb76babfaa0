#include "locrel/matgrp.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "locrel/scalar.hpp"

namespace locrel {

Mat::Mat(int r, int c, const FieldElement& fill) : rows(r), cols(c), a(size_t(r) * c, fill) {}

Mat Mat::identity(int ell, int m) {
  Mat g = zeros(ell, m, m);
  for (int i = 0; i < m; ++i) g.at(i, i) = FieldElement::one(ell);
  return g;
}

Mat Mat::zeros(int ell, int r, int c) { return Mat(r, c, FieldElement::zero(ell)); }

bool Mat::is_exact() const {
  for (const auto& x : a)
    if (!x.is_exact()) return false;
  return true;
}

Mat Mat::operator*(const Mat& o) const {
  if (cols != o.rows) throw std::invalid_argument("matrix shape mismatch");
  Mat out = zeros(ell(), rows, o.cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) {
      const FieldElement& x = at(i, k);
      if (x.is_exact_zero()) continue;
      for (int j = 0; j < o.cols; ++j) out.at(i, j) += x * o.at(k, j);
    }
  return out;
}

Mat Mat::operator+(const Mat& o) const {
  Mat out = *this;
  for (size_t i = 0; i < a.size(); ++i) out.a[i] += o.a[i];
  return out;
}

Mat Mat::operator-(const Mat& o) const {
  Mat out = *this;
  for (size_t i = 0; i < a.size(); ++i) out.a[i] -= o.a[i];
  return out;
}

Mat Mat::scaled(const FieldElement& c) const {
  Mat out = *this;
  for (auto& x : out.a) x *= c;
  return out;
}

Mat Mat::transpose() const {
  Mat out = zeros(ell(), cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out.at(j, i) = at(i, j);
  return out;
}

namespace {
FieldElement det_rec(const Mat& g, std::vector<int>& cols_left, int row) {
  int ell = g.ell();
  if (row == g.rows) return FieldElement::one(ell);
  FieldElement acc = FieldElement::zero(ell);
  for (size_t pick = 0; pick < cols_left.size(); ++pick) {
    int c = cols_left[pick];
    const FieldElement& x = g.at(row, c);
    if (x.is_exact_zero()) continue;
    cols_left.erase(cols_left.begin() + pick);
    FieldElement sub = det_rec(g, cols_left, row + 1);
    cols_left.insert(cols_left.begin() + pick, c);
    FieldElement term = x * sub;
    if (pick % 2) term = -term;
    acc += term;
  }
  return acc;
}
}  // namespace

FieldElement Mat::det() const {
  if (rows != cols) throw std::invalid_argument("determinant of non-square matrix");
  std::vector<int> cols_left(cols);
  std::iota(cols_left.begin(), cols_left.end(), 0);
  return det_rec(*this, cols_left, 0);
}

Mat Mat::inverse(long want_end) const {
  if (rows != cols) throw std::invalid_argument("inverse of non-square matrix");
  int m = rows;
  FieldElement d = det();
  Mat adj = zeros(ell(), m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      // cofactor of (j, i)
      Mat minor = zeros(ell(), m - 1, m - 1);
      for (int r = 0, rr = 0; r < m; ++r) {
        if (r == j) continue;
        for (int c = 0, cc = 0; c < m; ++c) {
          if (c == i) continue;
          minor.at(rr, cc) = at(r, c);
          ++cc;
        }
        ++rr;
      }
      FieldElement cof = m == 1 ? FieldElement::one(ell()) : minor.det();
      if ((i + j) % 2) cof = -cof;
      adj.at(i, j) = cof;
    }
  long vlb = 0;
  for (const auto& x : adj.a) vlb = std::min(vlb, x.val_lower_bound());
  FieldElement dinv = d.inverse(want_end - vlb);
  return adj.scaled(dinv);
}

bool Mat::operator==(const Mat& o) const {
  if (rows != o.rows || cols != o.cols) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != o.a[i]) return false;
  return true;
}

std::string Mat::str() const {
  std::ostringstream os;
  for (int i = 0; i < rows; ++i) {
    if (i) os << "; ";
    for (int j = 0; j < cols; ++j) {
      if (j) os << ", ";
      os << at(i, j).str();
    }
  }
  return os.str();
}

Mat embed_corner(const Mat& h) {
  int m = h.rows;
  Mat out = Mat::identity(h.ell(), m + 1);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out.at(i, j) = h.at(i, j);
  return out;
}

Mat antidiag_ones(int ell, int m) {
  Mat out = Mat::zeros(ell, m, m);
  for (int i = 0; i < m; ++i) out.at(i, m - 1 - i) = FieldElement::one(ell);
  return out;
}

Mat diag_pi_powers(int ell, const std::vector<long>& e) {
  Mat out = Mat::zeros(ell, int(e.size()), int(e.size()));
  for (size_t i = 0; i < e.size(); ++i) out.at(int(i), int(i)) = FieldElement::uniformizer_pow(ell, e[i]);
  return out;
}

namespace {
// Minimum-valuation scan over a set of entries; positions whose valuation is
// not visible are safe to skip only when their lower bound exceeds the best
// visible valuation, otherwise we need more working precision.
struct MinValScan {
  bool found = false;
  long best_val = 0;
  int bi = -1, bj = -1;
  bool needs_precision = false;
};

template <typename Next>
MinValScan scan_min_val(Next&& positions, const Mat& w) {
  MinValScan s;
  std::vector<std::pair<int, int>> unknown;
  for (auto [i, j] : positions) {
    const FieldElement& x = w.at(i, j);
    if (x.is_exact_zero()) continue;
    if (x.no_known_digits()) {
      unknown.push_back({i, j});
      continue;
    }
    long v = x.valuation();
    if (!s.found || v < s.best_val) {
      s.found = true;
      s.best_val = v;
      s.bi = i;
      s.bj = j;
    }
  }
  for (auto [i, j] : unknown) {
    if (!s.found || w.at(i, j).val_lower_bound() <= s.best_val) {
      s.needs_precision = true;
      break;
    }
  }
  return s;
}
}  // namespace

std::vector<long> smith_exponents(const Mat& g) {
  if (g.rows != g.cols) throw std::invalid_argument("smith form of non-square matrix");
  if (!g.is_exact()) throw std::invalid_argument("smith form needs exact input");
  int m = g.rows;
  FieldElement d = g.det();
  if (d.is_exact_zero()) throw std::invalid_argument("smith form of singular matrix");
  long dv = d.valuation();
  long H = 32;
  for (const auto& x : g.a)
    if (!x.is_exact_zero()) H = std::max(H, 4 * (std::abs(x.valuation()) + 1));
  H = std::max(H, 4 * (std::abs(dv) + m));
  for (int attempt = 0; attempt < 12; ++attempt, H *= 2) {
    Mat w = g;
    std::vector<long> exps;
    bool retry = false;
    for (int k = 0; k < m && !retry; ++k) {
      std::vector<std::pair<int, int>> block;
      for (int i = k; i < m; ++i)
        for (int j = k; j < m; ++j) block.push_back({i, j});
      MinValScan s = scan_min_val(block, w);
      if (s.needs_precision || !s.found) {
        retry = true;
        break;
      }
      // move pivot to (k, k)
      for (int j = 0; j < m; ++j) std::swap(w.at(s.bi, j), w.at(k, j));
      for (int i = 0; i < m; ++i) std::swap(w.at(i, s.bj), w.at(i, k));
      exps.push_back(s.best_val);
      try {
        FieldElement piv_inv = w.at(k, k).inverse(H);
        for (int i = k + 1; i < m; ++i) {
          if (w.at(i, k).is_exact_zero()) continue;
          FieldElement f = w.at(i, k) * piv_inv;
          for (int j = k; j < m; ++j) w.at(i, j) -= f * w.at(k, j);
        }
        for (int j = k + 1; j < m; ++j) {
          if (w.at(k, j).is_exact_zero()) continue;
          FieldElement f = w.at(k, j) * piv_inv;
          for (int i = k; i < m; ++i) w.at(i, j) -= f * w.at(i, k);
        }
      } catch (const PrecisionError&) {
        retry = true;
      }
    }
    if (retry) continue;
    long total = std::accumulate(exps.begin(), exps.end(), 0L);
    if (total != dv) continue;  // precision artifact; deepen and redo
    std::sort(exps.begin(), exps.end(), std::greater<long>());
    return exps;
  }
  throw PrecisionError("smith form did not stabilize");
}

IwasawaNAK iwasawa(const Mat& g, long want_end) {
  if (g.rows != g.cols) throw std::invalid_argument("iwasawa of non-square matrix");
  if (!g.is_exact()) throw std::invalid_argument("iwasawa needs exact input");
  int m = g.rows;
  int ell = g.ell();
  FieldElement d = g.det();
  if (d.is_exact_zero()) throw std::invalid_argument("iwasawa of singular matrix");
  long H = std::max<long>(32, want_end + 8);
  for (const auto& x : g.a)
    if (!x.is_exact_zero()) H = std::max(H, want_end + 4 * (std::abs(x.valuation()) + 1));
  for (int attempt = 0; attempt < 12; ++attempt, H *= 2) {
    Mat w = g;
    Mat minv = Mat::identity(ell, m);  // inverse of the accumulated column ops
    bool retry = false;
    try {
      for (int r = m - 1; r >= 0 && !retry; --r) {
        std::vector<std::pair<int, int>> row;
        for (int c = 0; c <= r; ++c) row.push_back({r, c});
        MinValScan s = scan_min_val(row, w);
        if (s.needs_precision || !s.found) {
          retry = true;
          break;
        }
        int p = s.bj;
        if (p != r) {
          for (int i = 0; i < m; ++i) std::swap(w.at(i, p), w.at(i, r));
          for (int j = 0; j < m; ++j) std::swap(minv.at(p, j), minv.at(r, j));
        }
        FieldElement piv_inv = w.at(r, r).inverse(H);
        for (int c = 0; c < r; ++c) {
          if (w.at(r, c).is_exact_zero()) continue;
          FieldElement f = w.at(r, c) * piv_inv;
          for (int i = 0; i <= r; ++i) w.at(i, c) -= f * w.at(i, r);
          // E^{-1} adds f * (row c) to row r of minv
          for (int j = 0; j < m; ++j) minv.at(r, j) += f * minv.at(c, j);
        }
      }
    } catch (const PrecisionError&) {
      retry = true;
    }
    if (retry) continue;
    IwasawaNAK out;
    out.t.resize(m);
    Mat cdiag = Mat::identity(ell, m);
    try {
      for (int i = 0; i < m; ++i) {
        out.t[i] = w.at(i, i).valuation();
        cdiag.at(i, i) = w.at(i, i) * FieldElement::uniformizer_pow(ell, -out.t[i]);
      }
      out.u = Mat::identity(ell, m);
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
          out.u.at(i, j) = w.at(i, j).divide_by(w.at(j, j), want_end);
      out.k = cdiag * minv;
    } catch (const PrecisionError&) {
      continue;
    }
    // check the u digits we promise are actually known
    bool ok = true;
    for (int i = 0; i < m && ok; ++i)
      for (int j = i + 1; j < m && ok; ++j)
        if (!out.u.at(i, j).is_exact() && out.u.at(i, j).end() < want_end) ok = false;
    if (!ok) continue;
    return out;
  }
  throw PrecisionError("iwasawa decomposition did not stabilize");
}

GroupElt GroupElt::identity(int ell, int n) {
  return GroupElt{Mat::identity(ell, n), Mat::identity(ell, n + 1), FieldElement::one(ell)};
}

GroupElt GroupElt::operator*(const GroupElt& o) const {
  return GroupElt{g1 * o.g1, g2 * o.g2, u * o.u};
}

GroupElt GroupElt::inverse(long want_end) const {
  return GroupElt{g1.inverse(want_end), g2.inverse(want_end), u.inverse(want_end)};
}

bool GroupElt::operator==(const GroupElt& o) const {
  return g1 == o.g1 && g2 == o.g2 && u == o.u;
}

std::string GroupElt::str() const {
  return "[" + g1.str() + " | " + g2.str() + " | " + u.str() + "]";
}

GroupElt diag_embed(const Mat& h) { return GroupElt{h, embed_corner(h), h.det()}; }

GroupElt xi_element(int ell, int n) {
  Mat x = Mat::zeros(ell, n + 1, n + 1);
  for (int i = 0; i < n; ++i) x.at(i, n - 1 - i) = FieldElement::one(ell);
  for (int i = 0; i < n; ++i) x.at(i, n) = FieldElement::one(ell);
  x.at(n, n) = FieldElement::one(ell);
  return GroupElt{Mat::identity(ell, n), x, FieldElement::one(ell)};
}

GroupElt tau_element(int ell, int n) {
  std::vector<long> e;
  for (int i = n; i >= 1; --i) e.push_back(i);
  return diag_embed(diag_pi_powers(ell, e));
}

FactorPattern FactorPattern::hyperspecial(int m) {
  FactorPattern p;
  p.m = m;
  p.L.assign(size_t(m) * m, 0);
  return p;
}

FactorPattern FactorPattern::congruence(int m, int t) {
  FactorPattern p = hyperspecial(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) p.lat(i, j) = t;
  p.diag_depth = t;
  return p;
}

FactorPattern FactorPattern::iwahori(int m) {
  FactorPattern p = hyperspecial(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < i; ++j) p.lat(i, j) = 1;
  return p;
}

FactorPattern FactorPattern::depth_below(int m) {
  FactorPattern p = hyperspecial(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < i; ++j) p.lat(i, j) = i - j + 1;
  return p;
}

bool FactorPattern::valid() const {
  for (int i = 0; i < m; ++i)
    if (lat(i, i) != 0) return false;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        if (lat(i, j) + lat(j, k) < lat(i, k)) return false;
  if (diag_depth < 0) return false;
  if (diag_depth > 0) {
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k)
        if (k != i && lat(i, k) + lat(k, i) < diag_depth) return false;
  }
  return true;
}

FactorPattern FactorPattern::conj_by_diag_pows(const std::vector<long>& e) const {
  FactorPattern p = *this;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) p.lat(i, j) = int(lat(i, j) + e[i] - e[j]);
  return p;
}

FactorPattern FactorPattern::intersect(const FactorPattern& o) const {
  if (m != o.m) throw std::invalid_argument("pattern size mismatch");
  FactorPattern p = *this;
  for (size_t i = 0; i < L.size(); ++i) p.L[i] = std::max(L[i], o.L[i]);
  p.diag_depth = std::max(diag_depth, o.diag_depth);
  return p;
}

FactorPattern FactorPattern::with_diag_depth(int c) const {
  FactorPattern p = *this;
  p.diag_depth = c;
  return p;
}

bool FactorPattern::contains(const FactorPattern& finer) const {
  if (m != finer.m) return false;
  for (size_t i = 0; i < L.size(); ++i)
    if (finer.L[i] < L[i]) return false;
  return finer.diag_depth >= diag_depth;
}

bool FactorPattern::member(const Mat& g) const {
  if (g.rows != m || g.cols != m) return false;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) {
        if (!g.at(i, i).valuation_at_least(0)) return false;
        if (diag_depth > 0 &&
            !(g.at(i, i) - FieldElement::one(g.ell())).valuation_at_least(diag_depth))
          return false;
      } else {
        if (!g.at(i, j).valuation_at_least(lat(i, j))) return false;
      }
    }
  FieldElement d = g.det();
  if (d.is_exact_zero()) return false;
  return d.digit(0) != 0;  // unit determinant
}

namespace {
// Minimal valuation of the (i,j)-cofactor over the pattern box: the best
// total L-weight of a permutation matching the complementary rows/columns.
int cofactor_min_val(const FactorPattern& p, int i, int j) {
  std::vector<int> rows, cols;
  for (int k = 0; k < p.m; ++k)
    if (k != i) rows.push_back(k);
  for (int k = 0; k < p.m; ++k)
    if (k != j) cols.push_back(k);
  int best = INT32_MAX;
  std::sort(cols.begin(), cols.end());
  do {
    int s = 0;
    for (size_t k = 0; k < rows.size(); ++k) s += p.lat(rows[k], cols[k]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return rows.empty() ? 0 : best;
}
}  // namespace

mpq_class FactorPattern::measure_additive(int ell) const {
  if (!valid()) throw std::invalid_argument("invalid pattern: " + str());
  // Windows: digits of entry (i,j) below w^{W_ij} can change det mod w; all
  // deeper digits cannot, so det-unit is a condition on the windowed classes.
  std::vector<int> W(L.size()), base(L.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      int co = cofactor_min_val(*this, i, j);
      int lo = i == j ? diag_depth : lat(i, j);
      W[size_t(i) * m + j] = std::max(lo, 1 - co);
      base[size_t(i) * m + j] = lo;
    }
  // enumerate digit classes
  std::vector<std::pair<int, int>> slots;  // (entry index, exponent)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = base[size_t(i) * m + j]; k < W[size_t(i) * m + j]; ++k)
        slots.push_back({i * m + j, k});
  long total = 1, accepted = 0;
  for (size_t s = 0; s < slots.size(); ++s) total *= ell;
  std::vector<int> digit(slots.size(), 0);
  while (true) {
    Mat g = Mat::zeros(ell, m, m);
    for (int i = 0; i < m; ++i)
      g.at(i, i) = diag_depth > 0 ? FieldElement::one(ell) : FieldElement::zero(ell);
    for (size_t s = 0; s < slots.size(); ++s)
      if (digit[s])
        g.at(slots[s].first / m, slots[s].first % m) +=
            FieldElement::monomial(ell, digit[s], slots[s].second);
    FieldElement d = g.det();
    if (!d.is_exact_zero() && d.valuation() == 0) ++accepted;
    size_t s = 0;
    while (s < slots.size() && digit[s] == ell - 1) digit[s++] = 0;
    if (s == slots.size()) break;
    ++digit[s];
  }
  (void)total;
  mpq_class out(accepted);
  for (size_t idx = 0; idx < W.size(); ++idx) out *= ell_power(ell, -W[idx]);
  out.canonicalize();
  return out;
}

mpq_class FactorPattern::volume(int ell) const {
  mpq_class v = measure_additive(ell) / unit_density_gl(m, ell);
  v.canonicalize();
  return v;
}

std::string FactorPattern::str() const {
  std::ostringstream os;
  os << "{m=" << m << ", L=[";
  for (int i = 0; i < m; ++i) {
    if (i) os << "; ";
    for (int j = 0; j < m; ++j) {
      if (j) os << ",";
      os << lat(i, j);
    }
  }
  os << "], diag=" << diag_depth << "}";
  return os.str();
}

SubgroupDesc SubgroupDesc::maximal(int n) {
  return SubgroupDesc{FactorPattern::hyperspecial(n), FactorPattern::hyperspecial(n + 1), 0};
}

SubgroupDesc SubgroupDesc::iwahori_level(int n, int t) {
  return SubgroupDesc{FactorPattern::iwahori(n), FactorPattern::iwahori(n + 1), t};
}

SubgroupDesc SubgroupDesc::intersect(const SubgroupDesc& o) const {
  return SubgroupDesc{f1.intersect(o.f1), f2.intersect(o.f2), std::max(j_depth, o.j_depth)};
}

SubgroupDesc SubgroupDesc::with_j_depth(int t) const {
  SubgroupDesc k = *this;
  k.j_depth = t;
  return k;
}

SubgroupDesc SubgroupDesc::conj_by_tau_pow(int n, int s) const {
  std::vector<long> e1, e2;
  for (int i = n; i >= 1; --i) e1.push_back(long(i) * s);
  for (int i = n; i >= 0; --i) e2.push_back(long(i) * s);
  return SubgroupDesc{f1.conj_by_diag_pows(e1), f2.conj_by_diag_pows(e2), j_depth};
}

bool SubgroupDesc::contains(const SubgroupDesc& finer) const {
  return f1.contains(finer.f1) && f2.contains(finer.f2) && finer.j_depth >= j_depth;
}

bool SubgroupDesc::member(const GroupElt& g) const {
  return f1.member(g.g1) && f2.member(g.g2) && j_member(g.u, j_depth);
}

mpq_class SubgroupDesc::volume(int ell) const {
  mpq_class v = f1.volume(ell) * f2.volume(ell) * j_volume(ell, j_depth);
  v.canonicalize();
  return v;
}

std::string SubgroupDesc::str() const {
  return f1.str() + " x " + f2.str() + " x J_" + std::to_string(j_depth);
}

mpq_class j_volume(int ell, int t) {
  if (t == 0) return 1;
  // additive measure ell^{-t}, divided by the measure (ell-1)/ell of O^x
  mpq_class v = ell_power(ell, 1 - t) / mpq_class(ell - 1);
  v.canonicalize();
  return v;
}

bool j_member(const FieldElement& u, int t) {
  if (u.is_exact_zero()) return false;
  if (!u.valuation_at_least(0)) return false;
  if (u.digit(0) == 0) return false;
  if (t > 0 && !(u - FieldElement::one(u.ell())).valuation_at_least(t)) return false;
  return true;
}

}  // namespace locrel
