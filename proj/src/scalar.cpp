#include "locrel/scalar.hpp"

#include <algorithm>
#include <sstream>

namespace locrel {

namespace {
int check_ell(int ell) {
  if (ell < 2) throw std::invalid_argument("ell must be a prime >= 2");
  return ell;
}
}  // namespace

CycRat::CycRat(int ell) : ell_(check_ell(ell)), c_(2 * (ell - 1)) {}

CycRat::CycRat(int ell, const mpq_class& q) : CycRat(ell) {
  c_[0] = q;
  c_[0].canonicalize();
}

CycRat::CycRat(int ell, long v) : CycRat(ell) { c_[0] = v; }

CycRat CycRat::zeta(int ell, long power) {
  CycRat x(ell);
  long d = ell - 1;
  long e = ((power % ell) + ell) % ell;
  if (e < d) {
    x.c_[e] = 1;
  } else {
    // z^(ell-1) = -(1 + z + ... + z^(ell-2))
    for (long i = 0; i < d; ++i) x.c_[i] = -1;
  }
  return x;
}

CycRat CycRat::sqrt_ell(int ell, long e) {
  // r^e = ell^{floor(e/2)} * r^{e mod 2}
  long q = e >= 0 ? e / 2 : -((-e + 1) / 2);
  long b = e - 2 * q;  // 0 or 1
  CycRat x(ell);
  mpq_class p = ell_power(ell, q);
  x.c_[b * (ell - 1)] = p;
  return x;
}

CycRat CycRat::ell_pow(int ell, long e) { return CycRat(ell, ell_power(ell, e)); }

void CycRat::require_compat(const CycRat& o) const {
  if (ell_ != o.ell_) throw std::invalid_argument("mixed ell in CycRat arithmetic");
}

bool CycRat::is_zero() const {
  for (const auto& q : c_)
    if (q != 0) return false;
  return true;
}

bool CycRat::is_rational() const {
  for (size_t i = 1; i < c_.size(); ++i)
    if (c_[i] != 0) return false;
  return true;
}

mpq_class CycRat::rational_value() const {
  if (!is_rational()) throw std::domain_error("CycRat value is not rational");
  return c_[0];
}

CycRat CycRat::operator-() const {
  CycRat x = *this;
  for (auto& q : x.c_) q = -q;
  return x;
}

CycRat& CycRat::operator+=(const CycRat& o) {
  require_compat(o);
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

CycRat& CycRat::operator-=(const CycRat& o) {
  require_compat(o);
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

CycRat& CycRat::operator*=(const CycRat& o) {
  require_compat(o);
  int d = ell_ - 1;
  // Multiply the two z-polynomials for each r-degree combination, collecting
  // exponents mod ell, then fold the z^(ell-1) slot back onto the basis.
  auto mul_z = [&](const mpq_class* a, const mpq_class* b, std::vector<mpq_class>& out) {
    std::vector<mpq_class> full(ell_);
    for (int i = 0; i < d; ++i) {
      if (a[i] == 0) continue;
      for (int j = 0; j < d; ++j) {
        if (b[j] == 0) continue;
        full[(i + j) % ell_] += a[i] * b[j];
      }
    }
    const mpq_class& top = full[d];
    for (int i = 0; i < d; ++i) out[i] += full[i] - top;
  };
  std::vector<mpq_class> r0(d), r1(d);
  const mpq_class* x0 = c_.data();
  const mpq_class* x1 = c_.data() + d;
  const mpq_class* y0 = o.c_.data();
  const mpq_class* y1 = o.c_.data() + d;
  mul_z(x0, y0, r0);
  mul_z(x0, y1, r1);
  mul_z(x1, y0, r1);
  // r^2 = ell
  std::vector<mpq_class> cross(d);
  mul_z(x1, y1, cross);
  for (int i = 0; i < d; ++i) r0[i] += ell_ * cross[i];
  std::copy(r0.begin(), r0.end(), c_.begin());
  std::copy(r1.begin(), r1.end(), c_.begin() + d);
  return *this;
}

bool CycRat::operator==(const CycRat& o) const {
  require_compat(o);
  return c_ == o.c_;
}

std::strong_ordering CycRat::operator<=>(const CycRat& o) const {
  require_compat(o);
  for (size_t i = 0; i < c_.size(); ++i) {
    int cmp = ::cmp(c_[i], o.c_[i]);
    if (cmp != 0) return cmp < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

namespace {
// Inverse of a nonzero element of Q(z): solve (mult-by-x) w = 1 on the power
// basis by Gaussian elimination over Q.
std::vector<mpq_class> cyclotomic_inverse(int ell, const std::vector<mpq_class>& x) {
  int d = ell - 1;
  // Column j of M = coordinates of x * z^j.
  std::vector<std::vector<mpq_class>> M(d, std::vector<mpq_class>(d + 1));
  for (int j = 0; j < d; ++j) {
    std::vector<mpq_class> full(ell);
    for (int i = 0; i < d; ++i) full[(i + j) % ell] += x[i];
    const mpq_class& top = full[d];
    for (int i = 0; i < d; ++i) M[i][j] = full[i] - top;
  }
  for (int i = 0; i < d; ++i) M[i][d] = (i == 0) ? 1 : 0;
  int row = 0;
  std::vector<int> pivot_col(d, -1);
  for (int col = 0; col < d && row < d; ++col) {
    int pr = -1;
    for (int r = row; r < d; ++r)
      if (M[r][col] != 0) { pr = r; break; }
    if (pr < 0) continue;
    std::swap(M[pr], M[row]);
    mpq_class inv = 1 / M[row][col];
    for (int c = col; c <= d; ++c) M[row][c] *= inv;
    for (int r = 0; r < d; ++r) {
      if (r == row || M[r][col] == 0) continue;
      mpq_class f = M[r][col];
      for (int c = col; c <= d; ++c) M[r][c] -= f * M[row][c];
    }
    pivot_col[row] = col;
    ++row;
  }
  std::vector<mpq_class> w(d);
  for (int r = 0; r < d; ++r) {
    if (pivot_col[r] >= 0) {
      w[pivot_col[r]] = M[r][d];
    } else if (M[r][d] != 0) {
      throw std::domain_error("CycRat element is a zero divisor");
    }
  }
  // Rows past rank with nonzero rhs mean inconsistency (zero divisor).
  for (int r = row; r < d; ++r)
    if (M[r][d] != 0) throw std::domain_error("CycRat element is a zero divisor");
  return w;
}
}  // namespace

bool CycRat::is_invertible() const {
  if (is_zero()) return false;
  try {
    (void)inverse();
    return true;
  } catch (const std::domain_error&) {
    return false;
  }
}

CycRat CycRat::inverse() const {
  if (is_zero()) throw std::domain_error("division by zero CycRat");
  int d = ell_ - 1;
  // (x + y r)^{-1} = (x - y r) / (x^2 - ell y^2), with the norm inverted in Q(z).
  CycRat x(ell_), y(ell_);
  std::copy(c_.begin(), c_.begin() + d, x.c_.begin());
  std::copy(c_.begin() + d, c_.end(), y.c_.begin());
  CycRat norm = x * x - CycRat(ell_, ell_) * y * y;
  if (norm.is_zero()) throw std::domain_error("CycRat element is a zero divisor");
  std::vector<mpq_class> ncoords(norm.c_.begin(), norm.c_.begin() + d);
  std::vector<mpq_class> ninv = cyclotomic_inverse(ell_, ncoords);
  CycRat ninv_elt(ell_);
  std::copy(ninv.begin(), ninv.end(), ninv_elt.c_.begin());
  CycRat conj = x - CycRat::sqrt_ell(ell_) * y;
  return conj * ninv_elt;
}

namespace {
bool is_ell_power_denom(const mpq_class& q, int ell) {
  mpz_class den = q.get_den();
  while (den != 1) {
    if (den % ell != 0) return false;
    den /= ell;
  }
  return true;
}
}  // namespace

bool CycRat::is_ell_integral() const {
  int d = ell_ - 1;
  for (int i = d; i < 2 * d; ++i)
    if (c_[i] != 0) return false;
  for (int i = 0; i < d; ++i)
    if (!is_ell_power_denom(c_[i], ell_)) return false;
  return true;
}

namespace {
std::string q_str(const mpq_class& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}
}  // namespace

int CycRat::term_count() const {
  int n = 0;
  for (const auto& q : c_)
    if (q != 0) ++n;
  return n;
}

std::string CycRat::str() const {
  int d = ell_ - 1;
  std::ostringstream os;
  bool first = true;
  for (int b = 0; b < 2; ++b) {
    for (int i = 0; i < d; ++i) {
      const mpq_class& q = c_[b * d + i];
      if (q == 0) continue;
      bool neg = q < 0;
      mpq_class aq = abs(q);
      std::string vars;
      if (i > 0) vars += (i == 1 ? "z" : "z^" + std::to_string(i));
      if (b == 1) vars += (vars.empty() ? "r" : "*r");
      std::string body;
      if (vars.empty())
        body = q_str(aq);
      else if (aq == 1)
        body = vars;
      else
        body = q_str(aq) + "*" + vars;
      if (first) {
        os << (neg ? "-" : "") << body;
        first = false;
      } else {
        os << (neg ? " - " : " + ") << body;
      }
    }
  }
  if (first) return "0";
  return os.str();
}

int32_t Monomial::exponent(VarId v) const {
  for (const auto& [var, e] : factors)
    if (var == v) return e;
  return 0;
}

long Monomial::t_degree() const { return exponent(VarId{VarKind::T, 0}); }

long Monomial::total_degree() const {
  long s = 0;
  for (const auto& [var, e] : factors) s += e;
  return s;
}

Monomial Monomial::times(const Monomial& o) const {
  Monomial out;
  auto it = factors.begin();
  auto jt = o.factors.begin();
  while (it != factors.end() || jt != o.factors.end()) {
    if (jt == o.factors.end() || (it != factors.end() && it->first < jt->first)) {
      out.factors.push_back(*it++);
    } else if (it == factors.end() || jt->first < it->first) {
      out.factors.push_back(*jt++);
    } else {
      int32_t e = it->second + jt->second;
      if (e != 0) out.factors.push_back({it->first, e});
      ++it;
      ++jt;
    }
  }
  return out;
}

Monomial Monomial::inverted() const {
  Monomial out = *this;
  for (auto& [var, e] : out.factors) e = -e;
  return out;
}

std::string Monomial::str() const {
  if (factors.empty()) return "1";
  std::ostringstream os;
  bool first = true;
  for (const auto& [var, e] : factors) {
    if (!first) os << "*";
    first = false;
    switch (var.kind) {
      case VarKind::A: os << "A" << int(var.index); break;
      case VarKind::B: os << "B" << int(var.index); break;
      case VarKind::T: os << "T"; break;
    }
    if (e != 1) os << "^" << e;
  }
  return os.str();
}

Scalar::Scalar(int ell, const mpq_class& q) : ell_(check_ell(ell)) {
  insert_term(Monomial{}, CycRat(ell, q));
}

Scalar::Scalar(int ell, long v) : Scalar(ell, mpq_class(v)) {}

Scalar::Scalar(int ell, const CycRat& c) : ell_(check_ell(ell)) {
  insert_term(Monomial{}, c);
}

Scalar Scalar::variable(int ell, VarKind kind, int index, long exp) {
  Scalar s(ell);
  if (exp != 0) {
    Monomial m;
    m.factors.push_back({VarId{kind, uint8_t(index)}, int32_t(exp)});
    s.insert_term(m, CycRat(ell, 1));
  } else {
    s.insert_term(Monomial{}, CycRat(ell, 1));
  }
  return s;
}

Scalar Scalar::monomial(int ell, const Monomial& m, const CycRat& c) {
  Scalar s(ell);
  s.insert_term(m, c);
  return s;
}

void Scalar::insert_term(const Monomial& m, const CycRat& c) {
  if (c.is_zero()) return;
  auto [it, fresh] = terms_.try_emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

CycRat Scalar::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? CycRat(ell_) : it->second;
}

bool Scalar::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.factors.empty());
}

Scalar Scalar::operator-() const {
  Scalar out(ell_);
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
  return out;
}

Scalar& Scalar::operator+=(const Scalar& o) {
  if (ell_ != o.ell_ && !o.terms_.empty()) {
    if (terms_.empty() && ell_ == 0) {
      *this = o;
      return *this;
    }
    if (ell_ == 0 || o.ell_ == 0) throw std::invalid_argument("uninitialized Scalar");
    throw std::invalid_argument("mixed ell in Scalar arithmetic");
  }
  for (const auto& [m, c] : o.terms_) insert_term(m, c);
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) { return *this += -o; }

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar out(ell_ ? ell_ : o.ell_);
  for (const auto& [m1, c1] : terms_)
    for (const auto& [m2, c2] : o.terms_) out.insert_term(m1.times(m2), c1 * c2);
  return out;
}

Scalar Scalar::times(const CycRat& c) const {
  Scalar out(ell_);
  for (const auto& [m, cc] : terms_) out.insert_term(m, cc * c);
  return out;
}

bool Scalar::operator==(const Scalar& o) const {
  if (terms_.empty() && o.terms_.empty()) return true;
  return ell_ == o.ell_ && terms_ == o.terms_;
}

Scalar Scalar::divide_by_term(const Monomial& m, const CycRat& c) const {
  CycRat cinv = c.inverse();
  Monomial minv = m.inverted();
  Scalar out(ell_);
  for (const auto& [mm, cc] : terms_) out.insert_term(mm.times(minv), cc * cinv);
  return out;
}

Scalar Scalar::invert_variables() const {
  Scalar out(ell_);
  for (const auto& [m, c] : terms_) out.insert_term(m.inverted(), c);
  return out;
}

Scalar Scalar::negate_t_exponents() const {
  Scalar out(ell_);
  VarId t{VarKind::T, 0};
  for (const auto& [m, c] : terms_) {
    Monomial mm = m;
    for (auto& [var, e] : mm.factors)
      if (var == t) e = -e;
    std::sort(mm.factors.begin(), mm.factors.end());
    out.insert_term(mm, c);
  }
  return out;
}

Scalar Scalar::truncate_t_degree(long bound) const {
  Scalar out(ell_);
  for (const auto& [m, c] : terms_)
    if (m.t_degree() <= bound) out.insert_term(m, c);
  return out;
}

long Scalar::max_t_degree() const {
  long d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.t_degree());
  return d;
}

long Scalar::min_t_degree() const {
  if (terms_.empty()) return 0;
  long d = terms_.begin()->first.t_degree();
  for (const auto& [m, c] : terms_) d = std::min(d, m.t_degree());
  return d;
}

Scalar Scalar::mul_truncated(const Scalar& o, long bound) const {
  Scalar out(ell_ ? ell_ : o.ell_);
  for (const auto& [m1, c1] : terms_) {
    long d1 = m1.t_degree();
    for (const auto& [m2, c2] : o.terms_) {
      if (d1 + m2.t_degree() > bound) continue;
      out.insert_term(m1.times(m2), c1 * c2);
    }
  }
  return out;
}

bool Scalar::is_ell_integral() const {
  for (const auto& [m, c] : terms_)
    if (!c.is_ell_integral()) return false;
  return true;
}

std::string Scalar::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    std::string cs = c.str();
    bool negated = false;
    if (c.term_count() == 1 && cs[0] == '-') {
      negated = true;
      cs = cs.substr(1);
    }
    if (c.term_count() > 1) cs = "(" + cs + ")";
    if (first) {
      if (negated) os << "-";
      first = false;
    } else {
      os << (negated ? " - " : " + ");
    }
    if (m.factors.empty()) {
      os << cs;
    } else if (cs == "1") {
      os << m.str();
    } else {
      os << cs << "*" << m.str();
    }
  }
  return os.str();
}

mpq_class ell_power(int ell, long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), ell, e >= 0 ? e : -e);
  return e >= 0 ? mpq_class(p) : mpq_class(mpz_class(1), p);
}

mpq_class unit_density_gl(int m, int ell) {
  // |GL_m(F_ell)| = prod_{k=0}^{m-1} (ell^m - ell^k); divide by ell^{m^2}.
  mpq_class out = 1;
  mpz_class lm;
  mpz_ui_pow_ui(lm.get_mpz_t(), ell, m);
  for (int k = 0; k < m; ++k) {
    mpz_class lk;
    mpz_ui_pow_ui(lk.get_mpz_t(), ell, k);
    out *= mpq_class(lm - lk);
  }
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), ell, m * m);
  out /= mpq_class(den);
  out.canonicalize();
  return out;
}

}  // namespace locrel
