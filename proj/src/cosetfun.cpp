#include "locrel/cosetfun.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "locrel/field.hpp"

namespace locrel {
namespace {

constexpr long kInf = LONG_MAX / 4;

long val_or_inf(const FieldElement& x) {
  if (x.is_exact_zero()) return kInf;
  return x.valuation();
}

bool is_monomial_elem(const FieldElement& x) {
  if (!x.is_exact() || x.is_exact_zero()) return false;
  long v = x.valuation();
  FieldElement rest = x - FieldElement::monomial(x.ell(), x.digit(v), v);
  return rest.is_exact_zero();
}

// ---------------------------------------------------------------------------
// Digit arithmetic in O / w^D.  Coefficients live in F_ell, so there are no
// carries: addition is digitwise, multiplication is truncated convolution.
// ---------------------------------------------------------------------------
struct Chain {
  int ell = 0;
  int D = 0;
  using E = std::vector<uint8_t>;

  E zero() const { return E(size_t(D), 0); }
  bool is_zero(const E& a) const {
    for (uint8_t d : a)
      if (d) return false;
    return true;
  }
  int val(const E& a) const {
    for (int i = 0; i < D; ++i)
      if (a[i]) return i;
    return D;
  }
  E add(E a, const E& b) const {
    for (int i = 0; i < D; ++i) a[i] = uint8_t((a[i] + b[i]) % ell);
    return a;
  }
  E sub(E a, const E& b) const {
    for (int i = 0; i < D; ++i) a[i] = uint8_t((a[i] + ell - b[i]) % ell);
    return a;
  }
  E mul(const E& a, const E& b) const {
    E r(size_t(D), 0);
    for (int i = 0; i < D; ++i) {
      if (!a[i]) continue;
      for (int j = 0; i + j < D; ++j) {
        if (!b[j]) continue;
        r[i + j] = uint8_t((r[i + j] + a[i] * b[j]) % ell);
      }
    }
    return r;
  }
  E shift_down(const E& a, int e) const {  // divide by w^e; requires val(a) >= e
    E r(size_t(D), 0);
    for (int i = e; i < D; ++i) r[i - e] = a[i];
    return r;
  }
  int inv_mod(int c) const {
    for (int x = 1; x < ell; ++x)
      if ((c * x) % ell == 1) return x;
    throw std::logic_error("residue not invertible");
  }
  E unit_inverse(const E& a) const {  // val(a) == 0
    E b(size_t(D), 0);
    int a0inv = inv_mod(a[0]);
    b[0] = uint8_t(a0inv);
    for (int k = 1; k < D; ++k) {
      int s = 0;
      for (int i = 1; i <= k; ++i) s = (s + a[i] * b[k - i]) % ell;
      b[k] = uint8_t((a0inv * ((ell - s) % ell)) % ell);
    }
    return b;
  }
};

Chain::E digits_window(const Chain& ch, const FieldElement& x, long from) {
  Chain::E e = ch.zero();
  for (int i = 0; i < ch.D; ++i) e[size_t(i)] = uint8_t(x.digit(from + i));
  return e;
}

// ---------------------------------------------------------------------------
// Solving A y = rhs over O/w^D by simultaneous row and column reduction
// (column operations are accumulated in U, so y = U y' with y' diagonalized).
// ---------------------------------------------------------------------------
struct LinOut {
  bool consistent = false;
  std::vector<int> f;                    // lattice scale exponents, size N
  std::vector<Chain::E> y0;              // particular solution, size N
  std::vector<std::vector<Chain::E>> U;  // N columns, each N entries
  long f_sum = 0;
};

LinOut solve_congruences(const Chain& ch, int N, std::vector<std::vector<Chain::E>> A,
                         std::vector<Chain::E> rhs) {
  const int R = int(A.size());
  LinOut out;
  out.U.assign(size_t(N), std::vector<Chain::E>(size_t(N), ch.zero()));
  for (int i = 0; i < N; ++i) out.U[size_t(i)][size_t(i)][0] = 1;

  std::vector<int> e_exp;
  const int maxp = std::min(R, N);
  for (int k = 0; k < maxp; ++k) {
    int br = -1, bc = -1, bv = ch.D;
    for (int r = k; r < R; ++r)
      for (int c = k; c < N; ++c) {
        int v = ch.val(A[size_t(r)][size_t(c)]);
        if (v < bv) {
          bv = v;
          br = r;
          bc = c;
        }
      }
    if (br < 0) break;
    std::swap(A[size_t(k)], A[size_t(br)]);
    std::swap(rhs[size_t(k)], rhs[size_t(br)]);
    if (bc != k) {
      for (int r = 0; r < R; ++r) std::swap(A[size_t(r)][size_t(k)], A[size_t(r)][size_t(bc)]);
      std::swap(out.U[size_t(k)], out.U[size_t(bc)]);
    }
    Chain::E unit = ch.shift_down(A[size_t(k)][size_t(k)], bv);
    Chain::E uinv = ch.unit_inverse(unit);
    for (int c = k; c < N; ++c) A[size_t(k)][size_t(c)] = ch.mul(uinv, A[size_t(k)][size_t(c)]);
    rhs[size_t(k)] = ch.mul(uinv, rhs[size_t(k)]);
    for (int r = 0; r < R; ++r) {
      if (r == k) continue;
      if (ch.val(A[size_t(r)][size_t(k)]) >= ch.D) continue;
      Chain::E q = ch.shift_down(A[size_t(r)][size_t(k)], bv);
      for (int c = k; c < N; ++c)
        A[size_t(r)][size_t(c)] = ch.sub(A[size_t(r)][size_t(c)], ch.mul(q, A[size_t(k)][size_t(c)]));
      rhs[size_t(r)] = ch.sub(rhs[size_t(r)], ch.mul(q, rhs[size_t(k)]));
    }
    for (int c = k + 1; c < N; ++c) {
      if (ch.val(A[size_t(k)][size_t(c)]) >= ch.D) continue;
      Chain::E q = ch.shift_down(A[size_t(k)][size_t(c)], bv);
      A[size_t(k)][size_t(c)] = ch.sub(A[size_t(k)][size_t(c)], ch.mul(q, A[size_t(k)][size_t(k)]));
      for (int rr = 0; rr < N; ++rr)
        out.U[size_t(c)][size_t(rr)] = ch.sub(out.U[size_t(c)][size_t(rr)], ch.mul(q, out.U[size_t(k)][size_t(rr)]));
    }
    e_exp.push_back(bv);
  }

  const int p = int(e_exp.size());
  for (int r = p; r < R; ++r)
    if (!ch.is_zero(rhs[size_t(r)])) return out;
  std::vector<Chain::E> yp(size_t(N), ch.zero());
  out.f.assign(size_t(N), 0);
  for (int i = 0; i < p; ++i) {
    if (ch.val(rhs[size_t(i)]) < e_exp[size_t(i)]) return out;
    yp[size_t(i)] = ch.shift_down(rhs[size_t(i)], e_exp[size_t(i)]);
    out.f[size_t(i)] = ch.D - e_exp[size_t(i)];
  }
  out.y0.assign(size_t(N), ch.zero());
  for (int c = 0; c < N; ++c) {
    if (ch.is_zero(yp[size_t(c)])) continue;
    for (int r2 = 0; r2 < N; ++r2)
      out.y0[size_t(r2)] = ch.add(out.y0[size_t(r2)], ch.mul(out.U[size_t(c)][size_t(r2)], yp[size_t(c)]));
  }
  for (int i = 0; i < N; ++i) out.f_sum += out.f[size_t(i)];
  out.consistent = true;
  return out;
}

// ---------------------------------------------------------------------------
// Condition compilation for the h-set {h : base^{-1} Delta(h) z in K}.
// ---------------------------------------------------------------------------
struct CondRow {
  std::vector<FieldElement> c;  // coefficient of each unknown y_kl (already w-rescaled)
  FieldElement beta;
  long d = 0;  // congruence depth: v(sum c y - beta) >= d
};

struct Conditions {
  int n = 0, ell = 0;
  bool infeasible = false;
  long v0 = 0;  // forced v(det h)
  int t_req = 0;
  std::vector<int> gamma;  // target class digits of det(h) w^{-v0} mod w^{t_req}
  std::vector<long> w;     // n*n lower bounds, h_kl = w^{w_kl} y_kl
  std::vector<CondRow> rows;
};

void require_exact(const Mat& m, const char* what) {
  if (!m.is_exact()) throw PrecisionError(std::string("coset solver requires exact data: ") + what);
}

Conditions build_conditions(const GroupElt& base, const SubgroupDesc& K, const GroupElt& z) {
  Conditions cd;
  const int n = base.n();
  const int ell = base.ell();
  cd.n = n;
  cd.ell = ell;
  cd.t_req = K.j_depth;

  require_exact(base.g1, "base factor");
  require_exact(base.g2, "base factor");
  require_exact(z.g1, "evaluation point factor");
  require_exact(z.g2, "evaluation point factor");
  Mat b1i = base.g1.inverse();
  Mat b2i = base.g2.inverse();
  Mat z1i = z.g1.inverse();
  Mat z2i = z.g2.inverse();
  require_exact(b1i, "base inverse");
  require_exact(b2i, "base inverse");
  require_exact(z1i, "point inverse");
  require_exact(z2i, "point inverse");

  long v01 = base.g1.det().valuation() - z.g1.det().valuation();
  long v02 = base.g2.det().valuation() - z.g2.det().valuation();
  long v0J = base.u.valuation() - z.u.valuation();
  if (v01 != v02 || v01 != v0J) {
    cd.infeasible = true;
    return cd;
  }
  cd.v0 = v01;

  if (cd.t_req >= 1) {
    long zv = z.u.valuation();
    FieldElement q = base.u * z.u.inverse(zv + cd.t_req + 8) *
                     FieldElement::uniformizer_pow(ell, -cd.v0);
    // det(h) w^{-v0} must be congruent to q's unit part inverse... rather:
    // b_u^{-1} det(h) z_u in J_t  <=>  det(h) w^{-v0} = (b_u z_u^{-1} w^{-v0}) mod w^t
    // and q = b_u z_u^{-1} w^{-v0} has valuation 0.
    for (int i = 0; i < cd.t_req; ++i) cd.gamma.push_back(q.digit(i));
  }

  // Entry lower bounds from both factors.
  cd.w.assign(size_t(n) * n, kInf);
  const FactorPattern& P1 = K.f1;
  const FactorPattern& P2 = K.f2;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      long w1 = kInf, w2 = kInf;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          long a = val_or_inf(base.g1.at(k, i));
          long b = val_or_inf(z1i.at(j, l));
          if (a >= kInf || b >= kInf) continue;
          w1 = std::min(w1, a + P1.lat(i, j) + b);
        }
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          long a = val_or_inf(base.g2.at(k, i));
          long b = val_or_inf(z2i.at(j, l));
          if (a >= kInf || b >= kInf) continue;
          w2 = std::min(w2, a + P2.lat(i, j) + b);
        }
      long wb = std::max(w1, w2);
      if (wb >= kInf) throw std::logic_error("unbounded h entry in coset solver");
      cd.w[size_t(k) * n + l] = wb;
    }

  // Rows for factor 1: M = b1^{-1} h z1 in P1.
  FieldElement one = FieldElement::one(ell);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CondRow row;
      bool diagc = (i == j && P1.diag_depth >= 1);
      row.d = diagc ? P1.diag_depth : P1.lat(i, j);
      row.beta = diagc ? one : FieldElement::zero(ell);
      row.c.assign(size_t(n) * n, FieldElement::zero(ell));
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          row.c[size_t(k) * n + l] = b1i.at(i, k) * z.g1.at(l, j) *
                                     FieldElement::uniformizer_pow(ell, cd.w[size_t(k) * n + l]);
      cd.rows.push_back(std::move(row));
    }
  // Rows for factor 2: M = b2^{-1} iota(h) z2 in P2 (iota adds a constant part).
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      CondRow row;
      bool diagc = (i == j && P2.diag_depth >= 1);
      row.d = diagc ? P2.diag_depth : P2.lat(i, j);
      FieldElement target = diagc ? one : FieldElement::zero(ell);
      FieldElement cnst = b2i.at(i, n) * z.g2.at(n, j);
      row.beta = target - cnst;
      row.c.assign(size_t(n) * n, FieldElement::zero(ell));
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          row.c[size_t(k) * n + l] = b2i.at(i, k) * z.g2.at(l, j) *
                                     FieldElement::uniformizer_pow(ell, cd.w[size_t(k) * n + l]);
      cd.rows.push_back(std::move(row));
    }
  return cd;
}

// ---------------------------------------------------------------------------
// Determinant refinement.
// ---------------------------------------------------------------------------
struct DetDfs {
  int n = 0, ell = 0, N = 0;
  long v0 = 0;
  int t_req = 0;
  const std::vector<int>* gamma = nullptr;
  long shift0 = 0;
  long s_max = 0;
  const std::vector<Mat>* gens = nullptr;
  bool need_measure = false;
  long budget = 0;
  long cells = 0;
  mpq_class t_measure = 0;
  std::optional<Mat> witness;

  void run(const Mat& H, long s) {
    if (++cells > budget) throw BudgetError("coset solver refinement budget exceeded");
    FieldElement dd = H.det();
    long vd = dd.is_exact_zero() ? kInf : dd.valuation();
    long hor = s + shift0;
    bool refine;
    if (vd < std::min(hor, v0 + 1)) {
      if (vd < v0) return;  // determinant valuation too small on the whole cell
      if (t_req == 0) {
        accept(H, s);
        return;
      }
      if (hor >= v0 + t_req) {
        for (int i = 0; i < t_req; ++i)
          if (dd.digit(v0 + i) != (*gamma)[size_t(i)]) return;
        accept(H, s);
        return;
      }
      refine = true;
    } else {
      if (hor > v0) return;  // determinant valuation certainly exceeds v0
      refine = true;
    }
    if (!refine) return;
    if (s >= s_max) throw std::logic_error("determinant refinement bound violated");
    std::vector<int> delta(size_t(N), 0);
    for (;;) {
      Mat child = H;
      for (int i = 0; i < N; ++i)
        if (delta[size_t(i)])
          child = child + (*gens)[size_t(i)].scaled(FieldElement::monomial(ell, delta[size_t(i)], s));
      run(child, s + 1);
      if (!need_measure && witness) return;
      int pos = 0;
      while (pos < N && ++delta[size_t(pos)] == ell) {
        delta[size_t(pos)] = 0;
        ++pos;
      }
      if (pos == N) break;
    }
  }

  void accept(const Mat& H, long s) {
    if (need_measure)
      t_measure += ell_power(ell, -s * N);
    else if (!witness)
      witness = H;
  }
};

std::string group_elt_key(const GroupElt& g) { return g.str(); }

}  // namespace

// ---------------------------------------------------------------------------
// CosetEngine
// ---------------------------------------------------------------------------
SolveOutcome CosetEngine::h_solve(const GroupElt& base, const SubgroupDesc& K,
                                  const GroupElt& point, bool need_measure) {
  ++solves_;
  SolveOutcome out;
  Conditions cd = build_conditions(base, K, point);
  if (cd.infeasible) return out;
  const int n = cd.n;
  const int N = n * n;

  // Assemble the congruence system.
  long D = 1;
  struct Kept {
    const CondRow* row;
    long minv;
  };
  std::vector<Kept> kept;
  for (const CondRow& row : cd.rows) {
    long minv = val_or_inf(row.beta);
    for (const FieldElement& c : row.c) minv = std::min(minv, val_or_inf(c));
    if (minv >= row.d) continue;  // automatically satisfied
    if (minv >= kInf) {
      if (val_or_inf(row.beta) < row.d) return out;  // constant obstruction
      continue;
    }
    bool any_coeff = false;
    for (const FieldElement& c : row.c)
      if (val_or_inf(c) < kInf) any_coeff = true;
    if (!any_coeff) {
      if (val_or_inf(row.beta) < row.d) return out;
      continue;
    }
    kept.push_back({&row, minv});
    D = std::max(D, row.d - minv);
  }
  if (D > 48) throw std::logic_error("congruence window unexpectedly deep");

  Chain ch{ell_, int(D)};
  std::vector<std::vector<Chain::E>> A;
  std::vector<Chain::E> rhs;
  for (const Kept& kp : kept) {
    const CondRow& row = *kp.row;
    std::vector<Chain::E> arow;
    arow.reserve(size_t(N));
    long from = row.d - D;  // lift the row to a uniform congruence mod w^D
    for (const FieldElement& c : row.c) arow.push_back(digits_window(ch, c, from));
    A.push_back(std::move(arow));
    rhs.push_back(digits_window(ch, row.beta, from));
  }
  LinOut lin = solve_congruences(ch, N, std::move(A), std::move(rhs));
  if (!lin.consistent) return out;

  // Lift the solution lattice to exact matrices: h(t) = Y0 + sum t_i G_i.
  long w_sum = 0;
  for (long wv : cd.w) w_sum += wv;
  Mat Y0 = Mat::zeros(ell_, n, n);
  std::vector<Mat> gens(size_t(N), Mat::zeros(ell_, n, n));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      size_t pos = size_t(k) * n + l;
      std::vector<int> dig(lin.y0[pos].begin(), lin.y0[pos].end());
      Y0.at(k, l) = FieldElement::from_digits(ell_, cd.w[pos], dig);
      for (int i = 0; i < N; ++i) {
        std::vector<int> gd(lin.U[size_t(i)][pos].begin(), lin.U[size_t(i)][pos].end());
        gens[size_t(i)].at(k, l) =
            FieldElement::from_digits(ell_, cd.w[pos] + lin.f[size_t(i)], gd);
      }
    }

  // Decidability shift for the determinant refinement.
  std::vector<long> pv(size_t(n), kInf), wv(size_t(n), kInf);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) wv[size_t(l)] = std::min(wv[size_t(l)], cd.w[size_t(k) * n + l]);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        pv[size_t(l)] = std::min(pv[size_t(l)], val_or_inf(gens[size_t(i)].at(k, l)));
  long shift0 = kInf;
  for (int mask = 1; mask < (1 << n); ++mask) {
    long s = 0;
    for (int l = 0; l < n; ++l) s += ((mask >> l) & 1) ? pv[size_t(l)] : wv[size_t(l)];
    shift0 = std::min(shift0, std::min(s, kInf));
  }

  DetDfs dfs;
  dfs.n = n;
  dfs.ell = ell_;
  dfs.N = N;
  dfs.v0 = cd.v0;
  dfs.t_req = cd.t_req;
  dfs.gamma = &cd.gamma;
  dfs.shift0 = shift0;
  dfs.s_max = std::max(0L, cd.v0 + std::max(cd.t_req, 1) - shift0);
  dfs.gens = &gens;
  dfs.need_measure = need_measure;
  dfs.budget = budget_.cells;
  dfs.run(Y0, 0);

  if (need_measure) {
    if (dfs.t_measure == 0) return out;
    out.empty = false;
    out.measure = dfs.t_measure * ell_power(ell_, -(w_sum + lin.f_sum)) *
                  ell_power(ell_, long(n) * cd.v0) / unit_density_gl(n, ell_);
    out.measure.canonicalize();
  } else {
    if (!dfs.witness) return out;
    out.empty = false;
    // Verify the witness against the raw conditions (internal consistency).
    const Mat& h = *dfs.witness;
    Mat M1 = base.g1.inverse() * h * point.g1;
    Mat M2 = base.g2.inverse() * embed_corner(h) * point.g2;
    FieldElement dh = h.det();
    bool ok = K.f1.member(M1) && K.f2.member(M2) && dh.valuation() == cd.v0;
    for (int i = 0; ok && i < cd.t_req; ++i) ok = dh.digit(cd.v0 + i) == cd.gamma[size_t(i)];
    if (!ok) throw std::logic_error("coset solver produced an invalid witness");
    out.witness = dfs.witness;
  }
  return out;
}

bool CosetEngine::x_member(const GroupElt& base, const SubgroupDesc& K, const GroupElt& right,
                           const GroupElt& point) {
  GroupElt z = point * right.inverse();
  // Closed form at maximal level with trivial base factors.
  bool maximal_shape = K.f1 == FactorPattern::hyperspecial(n_) &&
                       K.f2 == FactorPattern::hyperspecial(n_ + 1);
  bool base_trivial = base.g1 == Mat::identity(ell_, n_) && base.g2 == Mat::identity(ell_, n_ + 1);
  if (maximal_shape && base_trivial && z.g1.is_exact() && z.g2.is_exact()) {
    Mat z1i = z.g1.inverse();
    if (z1i.is_exact()) {
      long vdet1 = z.g1.det().valuation();
      if (z.g2.det().valuation() != vdet1) return false;
      if (z.u.valuation() - base.u.valuation() != vdet1) return false;
      Mat M = embed_corner(z1i) * z.g2;
      for (const FieldElement& e : M.a)
        if (!e.valuation_at_least(0)) return false;
      return true;
    }
  }
  return !h_solve(base, K, z, false).empty;
}

mpq_class CosetEngine::stab_volume(const GroupElt& g, const SubgroupDesc& K) {
  SolveOutcome so = h_solve(g, K, g, true);
  return so.empty ? mpq_class(0) : so.measure;
}

bool CosetEngine::same_orbit(const GroupElt& z1, const GroupElt& z2, const SubgroupDesc& K) {
  return !h_solve(z1, K, z2, false).empty;
}

// ---------------------------------------------------------------------------
// CosetSum
// ---------------------------------------------------------------------------
void CosetSum::add(const Scalar& coeff, const GroupElt& base, const SubgroupDesc& K,
                   const GroupElt& right) {
  if (coeff.is_zero()) return;
  std::string key = group_elt_key(base) + "|" + K.str() + "|" + group_elt_key(right);
  auto it = index_.find(key);
  if (it != index_.end()) {
    terms_[it->second].coeff += coeff;
    return;
  }
  index_[key] = terms_.size();
  terms_.push_back(CosetTerm{coeff, base, K, right});
}

CosetSum& CosetSum::operator+=(const CosetSum& o) {
  if (o.ell_ != ell_ || o.n_ != n_ || o.on_quotient_ != on_quotient_)
    throw std::invalid_argument("incompatible coset sums");
  for (const CosetTerm& t : o.terms_) add(t.coeff, t.base, t.K, t.right);
  return *this;
}

CosetSum CosetSum::scaled(const Scalar& c) const {
  CosetSum r(ell_, n_, on_quotient_);
  for (const CosetTerm& t : terms_) r.add(t.coeff * c, t.base, t.K, t.right);
  return r;
}

CosetSum CosetSum::acted_by(const GroupElt& g) const {
  GroupElt gi = g.inverse();
  CosetSum r(ell_, n_, on_quotient_);
  for (const CosetTerm& t : terms_) r.add(t.coeff, t.base, t.K, t.right * gi);
  return r;
}

Scalar CosetSum::evaluate(const GroupElt& z, CosetEngine& eng) const {
  Scalar total(ell_);
  for (const CosetTerm& t : terms_) {
    if (t.coeff.is_zero()) continue;
    bool in;
    if (on_quotient_) {
      in = eng.x_member(t.base, t.K, t.right, z);
    } else {
      GroupElt rep = t.base.inverse() * z * t.right.inverse();
      in = t.K.member(rep);
    }
    if (in) total += t.coeff;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Transversals
// ---------------------------------------------------------------------------
namespace {

// Per-slot choice lists whose product parametrizes candidate representatives
// of K / Kp.
std::vector<std::vector<GroupElt>> box_slots(int ell, int n, const SubgroupDesc& K,
                                             const SubgroupDesc& Kp) {
  std::vector<std::vector<GroupElt>> slots;
  GroupElt id = GroupElt::identity(ell, n);

  auto add_factor_slots = [&](const FactorPattern& P, const FactorPattern& Pp, int which) {
    int m = P.m;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        for (int e = P.lat(i, j); e < Pp.lat(i, j); ++e) {
          std::vector<GroupElt> ch;
          for (int c = 0; c < ell; ++c) {
            GroupElt g = id;
            Mat& f = (which == 0) ? g.g1 : g.g2;
            f.at(i, j) = f.at(i, j) + FieldElement::monomial(ell, c, e);
            ch.push_back(g);
          }
          slots.push_back(std::move(ch));
        }
      }
    if (Pp.diag_depth > P.diag_depth) {
      int c0 = P.diag_depth, c1 = Pp.diag_depth;
      for (int i = 0; i < m; ++i) {
        // Representatives of the diagonal unit quotient at position i.
        std::vector<GroupElt> ch;
        std::vector<std::pair<long, std::vector<int>>> units;  // (lead, higher digits)
        int lo = std::max(1, c0);
        int span = c1 - lo;
        long combos = 1;
        for (int s = 0; s < span; ++s) combos *= ell;
        std::vector<int> leads;
        if (c0 == 0)
          for (int u0 = 1; u0 < ell; ++u0) leads.push_back(u0);
        else
          leads.push_back(1);
        for (int lead : leads)
          for (long cb = 0; cb < combos; ++cb) {
            std::vector<int> dig(size_t(span), 0);
            long x = cb;
            for (int s = 0; s < span; ++s) {
              dig[size_t(s)] = int(x % ell);
              x /= ell;
            }
            GroupElt g = id;
            Mat& f = (which == 0) ? g.g1 : g.g2;
            FieldElement u = FieldElement::monomial(ell, lead, 0);
            for (int s = 0; s < span; ++s)
              if (dig[size_t(s)]) u = u + FieldElement::monomial(ell, lead * dig[size_t(s)] % ell, lo + s);
            f.at(i, i) = u;
            ch.push_back(g);
          }
        (void)units;
        slots.push_back(std::move(ch));
      }
    }
  };
  add_factor_slots(K.f1, Kp.f1, 0);
  add_factor_slots(K.f2, Kp.f2, 1);

  if (Kp.j_depth > K.j_depth) {
    int t0 = K.j_depth, t1 = Kp.j_depth;
    std::vector<GroupElt> ch;
    int lo = std::max(1, t0);
    int span = t1 - lo;
    long combos = 1;
    for (int s = 0; s < span; ++s) combos *= ell;
    std::vector<int> leads;
    if (t0 == 0)
      for (int u0 = 1; u0 < ell; ++u0) leads.push_back(u0);
    else
      leads.push_back(1);
    for (int lead : leads)
      for (long cb = 0; cb < combos; ++cb) {
        std::vector<int> dig(size_t(span), 0);
        long x = cb;
        for (int s = 0; s < span; ++s) {
          dig[size_t(s)] = int(x % ell);
          x /= ell;
        }
        GroupElt g = id;
        FieldElement u = FieldElement::monomial(ell, lead, 0);
        for (int s = 0; s < span; ++s)
          if (dig[size_t(s)]) u = u + FieldElement::monomial(ell, lead * dig[size_t(s)] % ell, lo + s);
        g.u = u;
        ch.push_back(g);
      }
    slots.push_back(std::move(ch));
  }
  return slots;
}

std::vector<GroupElt> generator_set(int ell, int n, const SubgroupDesc& K, int window) {
  std::vector<GroupElt> gens;
  GroupElt id = GroupElt::identity(ell, n);
  auto add_factor = [&](const FactorPattern& P, int which) {
    int m = P.m;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        for (int e = P.lat(i, j); e < P.lat(i, j) + window; ++e)
          for (int c = 1; c < ell; ++c) {
            GroupElt g = id;
            Mat& f = (which == 0) ? g.g1 : g.g2;
            f.at(i, j) = f.at(i, j) + FieldElement::monomial(ell, c, e);
            gens.push_back(g);
          }
      }
    for (int i = 0; i < m; ++i) {
      int lo = std::max(1, P.diag_depth);
      if (P.diag_depth == 0)
        for (int u0 = 2; u0 < ell; ++u0) {
          GroupElt g = id;
          Mat& f = (which == 0) ? g.g1 : g.g2;
          f.at(i, i) = FieldElement::monomial(ell, u0, 0);
          gens.push_back(g);
        }
      for (int e = lo; e < lo + window; ++e)
        for (int c = 1; c < ell; ++c) {
          GroupElt g = id;
          Mat& f = (which == 0) ? g.g1 : g.g2;
          f.at(i, i) = FieldElement::one(ell) + FieldElement::monomial(ell, c, e);
          gens.push_back(g);
        }
    }
  };
  add_factor(K.f1, 0);
  add_factor(K.f2, 1);
  {
    int lo = std::max(1, K.j_depth);
    if (K.j_depth == 0)
      for (int u0 = 2; u0 < ell; ++u0) {
        GroupElt g = id;
        g.u = FieldElement::monomial(ell, u0, 0);
        gens.push_back(g);
      }
    for (int e = lo; e < lo + window; ++e)
      for (int c = 1; c < ell; ++c) {
        GroupElt g = id;
        g.u = FieldElement::one(ell) + FieldElement::monomial(ell, c, e);
        gens.push_back(g);
      }
  }
  return gens;
}

int depth_gap(const SubgroupDesc& K, const SubgroupDesc& Kp) {
  int gap = 0;
  auto factor_gap = [&](const FactorPattern& P, const FactorPattern& Pp) {
    for (int i = 0; i < P.m; ++i)
      for (int j = 0; j < P.m; ++j) gap = std::max(gap, Pp.lat(i, j) - P.lat(i, j));
    gap = std::max(gap, Pp.diag_depth - P.diag_depth);
  };
  factor_gap(K.f1, Kp.f1);
  factor_gap(K.f2, Kp.f2);
  gap = std::max(gap, Kp.j_depth - K.j_depth);
  return gap;
}

}  // namespace

mpz_class subgroup_index(int ell, const SubgroupDesc& K, const SubgroupDesc& Kp) {
  mpq_class ratio = K.volume(ell) / Kp.volume(ell);
  ratio.canonicalize();
  if (ratio.get_den() != 1) throw std::logic_error("subgroup index is not integral");
  return ratio.get_num();
}

std::vector<GroupElt> subgroup_transversal(int ell, int n, const SubgroupDesc& K,
                                           const SubgroupDesc& Kp, const SolveBudget& budget) {
  if (!K.contains(Kp)) throw std::invalid_argument("transversal requires nested subgroups");
  static std::map<std::string, std::vector<GroupElt>> cache;
  std::string ck = std::to_string(ell) + "#" + K.str() + "#" + Kp.str();
  auto hit = cache.find(ck);
  if (hit != cache.end()) return hit->second;

  mpz_class index_z = subgroup_index(ell, K, Kp);
  if (index_z > budget.transversal) throw BudgetError("transversal index exceeds budget");
  long index = index_z.get_si();

  std::vector<GroupElt> reps;
  auto is_new = [&](const GroupElt& cand) {
    for (const GroupElt& r : reps)
      if (Kp.member(r.inverse() * cand)) return false;
    return true;
  };

  // Stage 1: box candidates (products over independent digit slots).
  std::vector<std::vector<GroupElt>> slots = box_slots(ell, n, K, Kp);
  long combos = 1;
  bool overflow = false;
  for (const auto& s : slots) {
    combos *= long(s.size());
    if (combos > budget.transversal) {
      overflow = true;
      break;
    }
  }
  if (!overflow) {
    std::vector<size_t> idx(slots.size(), 0);
    for (;;) {
      GroupElt cand = GroupElt::identity(ell, n);
      for (size_t s = 0; s < slots.size(); ++s) cand = cand * slots[s][idx[s]];
      if (long(reps.size()) < index && is_new(cand)) reps.push_back(cand);
      size_t pos = 0;
      while (pos < slots.size() && ++idx[pos] == slots[pos].size()) {
        idx[pos] = 0;
        ++pos;
      }
      if (pos == slots.size()) break;
      if (long(reps.size()) == index) break;
    }
  }

  // Stage 2: breadth-first closure under a generating set of K.
  if (long(reps.size()) < index) {
    if (reps.empty()) reps.push_back(GroupElt::identity(ell, n));
    std::vector<GroupElt> gens = generator_set(ell, n, K, depth_gap(K, Kp) + 2);
    size_t head = 0;
    long tested = 0;
    while (head < reps.size() && long(reps.size()) < index) {
      GroupElt cur = reps[head++];
      for (const GroupElt& s : gens) {
        if (++tested > budget.transversal) throw BudgetError("transversal search budget exceeded");
        GroupElt cand = s * cur;
        if (is_new(cand)) {
          reps.push_back(cand);
          if (long(reps.size()) == index) break;
        }
      }
    }
  }

  if (long(reps.size()) != index)
    throw std::runtime_error("transversal certification failed: found " +
                             std::to_string(reps.size()) + " of " + std::to_string(index));
  // reps are pairwise inequivalent by construction (is_new) and members of K
  // by closure; certify membership defensively.
  for (const GroupElt& r : reps)
    if (!K.member(r)) throw std::logic_error("transversal element escaped the subgroup");
  cache[ck] = reps;
  return reps;
}

std::vector<Mat> congruence_transversal(int ell, int n, int m, const SolveBudget& budget) {
  long total = 1;
  for (int i = 0; i < n * n * m; ++i) {
    total *= ell;
    if (total > budget.transversal) throw BudgetError("congruence transversal too large");
  }
  std::vector<Mat> reps;
  std::vector<int> dig(size_t(n) * n * m, 0);
  for (;;) {
    Mat g = Mat::zeros(ell, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::vector<int> entry(dig.begin() + (size_t(i) * n + j) * m,
                               dig.begin() + (size_t(i) * n + j + 1) * m);
        g.at(i, j) = FieldElement::from_digits(ell, 0, entry);
      }
    FieldElement d = g.det();
    if (!d.is_exact_zero() && d.valuation() == 0) reps.push_back(g);
    size_t pos = 0;
    while (pos < dig.size() && ++dig[pos] == ell) {
      dig[pos] = 0;
      ++pos;
    }
    if (pos == dig.size()) break;
  }
  // Certify the count against |GL_n(O/w^m)|.
  mpz_class expect = 1;
  mpz_class q = 1;
  for (int i = 0; i < n; ++i) q *= ell;  // ell^n
  mpz_class pw = 1;
  for (int k = 0; k < n; ++k) {
    mpz_class lk = 1;
    for (int i = 0; i < k; ++i) lk *= ell;
    expect *= (q - lk);
    (void)pw;
  }
  for (int i = 0; i < n * n * (m - 1); ++i) expect *= ell;
  if (mpz_class(long(reps.size())) != expect)
    throw std::logic_error("congruence transversal certification failed");
  return reps;
}

// ---------------------------------------------------------------------------
// Trace, coinvariants, equality
// ---------------------------------------------------------------------------
namespace {

std::optional<std::pair<std::vector<long>, std::vector<long>>> diag_monomial_exps(
    const GroupElt& r) {
  auto factor = [](const Mat& f) -> std::optional<std::vector<long>> {
    std::vector<long> e;
    for (int i = 0; i < f.rows; ++i)
      for (int j = 0; j < f.cols; ++j) {
        const FieldElement& x = f.at(i, j);
        if (i == j) {
          if (!is_monomial_elem(x)) return std::nullopt;
          e.push_back(x.valuation());
        } else if (!x.is_exact_zero()) {
          return std::nullopt;
        }
      }
    return e;
  };
  auto e1 = factor(r.g1);
  if (!e1) return std::nullopt;
  auto e2 = factor(r.g2);
  if (!e2) return std::nullopt;
  return std::make_pair(*e1, *e2);
}

SubgroupDesc conj_desc(const SubgroupDesc& K, const std::vector<long>& e1,
                       const std::vector<long>& e2) {
  SubgroupDesc r;
  r.f1 = K.f1.conj_by_diag_pows(e1);
  r.f2 = K.f2.conj_by_diag_pows(e2);
  r.j_depth = K.j_depth;
  return r;
}

}  // namespace

CosetSum trace_to(const CosetSum& f, const SubgroupDesc& K, const SubgroupDesc& Kp,
                  CosetEngine& eng) {
  // Structural right-invariance check: each term set must be invariant under
  // right translation by Kp, i.e. right * Kp * right^{-1} inside the term's K.
  for (const CosetTerm& t : f.terms()) {
    if (t.coeff.is_zero()) continue;
    auto exps = diag_monomial_exps(t.right);
    if (!exps) throw std::runtime_error("trace invariance check: unrecognized right factor");
    SubgroupDesc conj = conj_desc(Kp, exps->first, exps->second);
    if (!t.K.contains(conj))
      throw std::runtime_error("trace requires a right-invariant input function");
  }
  std::vector<GroupElt> gamma = subgroup_transversal(eng.ell(), eng.n(), K, Kp);
  CosetSum out(f.ell(), f.n(), f.on_quotient());
  for (const GroupElt& g : gamma) out += f.acted_by(g);
  return out;
}

CosetSum coinvariant_average(const CosetSum& f, CosetEngine& eng) {
  if (f.on_quotient()) throw std::invalid_argument("coinvariant average expects a group-side sum");
  CosetSum out(f.ell(), f.n(), true);
  for (const CosetTerm& t : f.terms()) {
    if (t.coeff.is_zero()) continue;
    mpq_class vol = eng.stab_volume(t.base, t.K);
    if (vol == 0) continue;
    out.add(t.coeff.times(CycRat(f.ell(), vol)), t.base, t.K, t.right);
  }
  return out;
}

std::vector<GroupElt> orbit_cover_points(const CosetSum& f, const SubgroupDesc& K_ref,
                                         CosetEngine& eng, bool allow_unstructured,
                                         bool* saw_unstructured) {
  std::vector<GroupElt> pts;
  for (const CosetTerm& t : f.terms()) {
    if (t.coeff.is_zero()) continue;
    pts.push_back(t.base * t.right);
    SubgroupDesc cap;  // K_i intersect (right K_ref right^{-1})
    bool recognized = false;
    auto exps = diag_monomial_exps(t.right);
    if (exps) {
      cap = t.K.intersect(conj_desc(K_ref, exps->first, exps->second));
      recognized = true;
    } else {
      bool inref = false;
      try {
        inref = K_ref.member(t.right);
      } catch (const PrecisionError&) {
        inref = false;
      }
      if (inref) {
        cap = t.K.intersect(K_ref);
        recognized = true;
      }
    }
    if (!recognized) {
      if (allow_unstructured) {
        if (saw_unstructured) *saw_unstructured = true;
        continue;
      }
      throw std::runtime_error("orbit cover: term right factor not structurally recognized");
    }
    if (cap == t.K) continue;  // the whole term set is one orbit
    std::vector<GroupElt> tr = subgroup_transversal(eng.ell(), eng.n(), t.K, cap);
    for (const GroupElt& k : tr) pts.push_back(t.base * k * t.right);
  }
  return pts;
}

namespace {

std::string orbit_bucket_key(const GroupElt& z) {
  Mat M = embed_corner(z.g1.inverse()) * z.g2;
  std::vector<long> sm = smith_exponents(M);
  long c = z.u.valuation() - z.g1.det().valuation();
  std::ostringstream os;
  for (long e : sm) os << e << ",";
  os << "|" << c;
  return os.str();
}

}  // namespace

bool x_equal(const CosetSum& f, const CosetSum& g, const SubgroupDesc& K_ref, CosetEngine& eng,
             const std::vector<GroupElt>& extra_points, bool allow_unstructured,
             std::string* mismatch) {
  if (!f.on_quotient() || !g.on_quotient())
    throw std::invalid_argument("x_equal compares quotient-side sums");
  std::vector<GroupElt> pts = orbit_cover_points(f, K_ref, eng, allow_unstructured, nullptr);
  std::vector<GroupElt> pg = orbit_cover_points(g, K_ref, eng, allow_unstructured, nullptr);
  pts.insert(pts.end(), pg.begin(), pg.end());
  pts.insert(pts.end(), extra_points.begin(), extra_points.end());

  // One representative per orbit.
  std::map<std::string, std::vector<size_t>> buckets;
  std::vector<GroupElt> reps;
  for (const GroupElt& z : pts) {
    std::string key = orbit_bucket_key(z);
    bool dup = false;
    for (size_t ri : buckets[key])
      if (eng.same_orbit(reps[ri], z, K_ref)) {
        dup = true;
        break;
      }
    if (!dup) {
      buckets[key].push_back(reps.size());
      reps.push_back(z);
    }
  }

  for (const GroupElt& z : reps) {
    Scalar vf = f.evaluate(z, eng);
    Scalar vg = g.evaluate(z, eng);
    if (vf != vg) {
      if (mismatch) {
        std::ostringstream os;
        os << "values differ at point " << z.str() << ": " << vf.str() << " vs " << vg.str();
        *mismatch = os.str();
      }
      return false;
    }
  }
  return true;
}

}  // namespace locrel
