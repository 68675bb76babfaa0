#include "locrel/field.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>

namespace locrel {

namespace {
int check_ell(int ell) {
  if (ell < 2) throw std::invalid_argument("ell must be a prime >= 2");
  return ell;
}

int mod_ell(long v, int ell) {
  long m = v % ell;
  return int(m < 0 ? m + ell : m);
}

int inv_mod_ell(int c, int ell) {
  // extended Euclid; ell prime and c != 0 mod ell
  int a = c % ell, b = ell, x0 = 1, x1 = 0;
  while (b) {
    int q = a / b;
    a -= q * b;
    std::swap(a, b);
    x0 -= q * x1;
    std::swap(x0, x1);
  }
  return mod_ell(x0, ell);
}
}  // namespace

FieldElement::FieldElement(int ell, long value) : ell_(check_ell(ell)), val_(0), exact_(true) {
  int d = mod_ell(value, ell);
  if (d) digits_.push_back(uint8_t(d));
}

FieldElement FieldElement::monomial(int ell, long c, long k) {
  FieldElement x(ell, c);
  x.val_ = k;
  x.normalize();
  return x;
}

FieldElement FieldElement::from_digits(int ell, long val, const std::vector<int>& digits) {
  FieldElement x(ell, 0);
  x.val_ = val;
  for (int d : digits) x.digits_.push_back(uint8_t(mod_ell(d, ell)));
  x.normalize();
  return x;
}

FieldElement FieldElement::ball(int ell, long end) {
  FieldElement x(ell, 0);
  x.exact_ = false;
  x.val_ = end;
  x.end_ = end;
  return x;
}

long FieldElement::end() const {
  if (exact_) throw std::logic_error("end() of an exact element");
  return end_;
}

long FieldElement::valuation() const {
  if (!digits_.empty()) return val_;
  if (exact_) throw std::domain_error("valuation of exact zero");
  throw PrecisionError("valuation not visible before O(w^" + std::to_string(end_) + ")");
}

int FieldElement::digit(long k) const {
  if (!exact_ && k >= end_)
    throw PrecisionError("digit at w^" + std::to_string(k) + " beyond horizon w^" +
                         std::to_string(end_));
  if (digits_.empty() || k < val_ || k >= val_ + long(digits_.size())) return 0;
  return digits_[k - val_];
}

void FieldElement::normalize() {
  if (!exact_) {
    // pad known range to exactly [val_, end_)
    if (val_ + long(digits_.size()) > end_) digits_.resize(std::max(0L, end_ - val_));
    while (val_ + long(digits_.size()) < end_) digits_.push_back(0);
  }
  size_t lead = 0;
  while (lead < digits_.size() && digits_[lead] == 0) ++lead;
  if (lead) {
    digits_.erase(digits_.begin(), digits_.begin() + lead);
    val_ += long(lead);
  }
  if (exact_) {
    while (!digits_.empty() && digits_.back() == 0) digits_.pop_back();
    if (digits_.empty()) val_ = 0;
  } else if (digits_.empty()) {
    val_ = end_;
  }
}

FieldElement FieldElement::operator-() const {
  FieldElement x = *this;
  for (auto& d : x.digits_)
    if (d) d = uint8_t(ell_ - d);
  return x;
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
  if (ell_ != o.ell_) throw std::invalid_argument("mixed ell in field arithmetic");
  FieldElement out(ell_, 0);
  out.exact_ = exact_ && o.exact_;
  long lo = std::min(digits_.empty() ? val_lower_bound() : val_,
                     o.digits_.empty() ? o.val_lower_bound() : o.val_);
  long hi_known = std::max(val_ + long(digits_.size()), o.val_ + long(o.digits_.size()));
  long hi = hi_known;
  if (!out.exact_) {
    long e = std::numeric_limits<long>::max();
    if (!exact_) e = std::min(e, end_);
    if (!o.exact_) e = std::min(e, o.end_);
    out.end_ = e;
    hi = std::min(hi, e);
    lo = std::min(lo, e);
  }
  out.val_ = lo;
  out.digits_.assign(std::max(0L, hi - lo), 0);
  for (long k = lo; k < hi; ++k) {
    long a = (k >= val_ && k < val_ + long(digits_.size())) ? digits_[k - val_] : 0;
    long b = (k >= o.val_ && k < o.val_ + long(o.digits_.size())) ? o.digits_[k - o.val_] : 0;
    out.digits_[k - lo] = uint8_t((a + b) % ell_);
  }
  out.normalize();
  return out;
}

FieldElement FieldElement::operator-(const FieldElement& o) const { return *this + (-o); }

FieldElement FieldElement::operator*(const FieldElement& o) const {
  if (ell_ != o.ell_) throw std::invalid_argument("mixed ell in field arithmetic");
  if (is_exact_zero() || o.is_exact_zero()) return FieldElement(ell_, 0);
  FieldElement out(ell_, 0);
  out.exact_ = exact_ && o.exact_;
  long vx = val_lower_bound(), vy = o.val_lower_bound();
  if (!out.exact_) {
    long e = std::numeric_limits<long>::max();
    if (!exact_) e = std::min(e, end_ + vy);
    if (!o.exact_) e = std::min(e, o.end_ + vx);
    out.end_ = e;
  }
  out.val_ = vx + vy;
  long width = long(digits_.size()) + long(o.digits_.size());
  std::vector<long> acc(std::max(0L, width), 0);
  for (size_t i = 0; i < digits_.size(); ++i) {
    if (!digits_[i]) continue;
    for (size_t j = 0; j < o.digits_.size(); ++j)
      acc[i + j] += long(digits_[i]) * long(o.digits_[j]);
  }
  long base = (digits_.empty() || o.digits_.empty()) ? out.val_ : val_ + o.val_;
  out.val_ = base;
  out.digits_.resize(acc.size());
  for (size_t i = 0; i < acc.size(); ++i) out.digits_[i] = uint8_t(acc[i] % ell_);
  out.normalize();
  return out;
}

FieldElement FieldElement::inverse(long want_end) const {
  if (is_exact_zero()) throw std::domain_error("inverse of zero");
  if (digits_.empty())
    throw PrecisionError("inverse of element with no visible leading digit");
  long v = val_;
  int c = digits_[0];
  int cinv = inv_mod_ell(c, ell_);
  if (exact_ && digits_.size() == 1) {
    return monomial(ell_, cinv, -v);  // exact inverse of an exact monomial
  }
  long rel_end = exact_ ? std::numeric_limits<long>::max() : end_ - 2 * v;
  long out_end = std::min(want_end, rel_end);
  // Exact data supports any precision; when the requested end sits at or
  // below the inverse's valuation, still emit the leading digit so callers
  // dividing a high-valuation numerator get a usable (if overshooting)
  // result instead of a refusal.
  if (exact_) out_end = std::max(out_end, 1 - v);
  long count = out_end + v;  // digits of the unit-part inverse we can emit
  if (count < 1)
    throw PrecisionError("requested inverse precision is not attainable");
  // unit part a = x * w^{-v} / c has a_0 = 1; b = 1/a by b_k = -sum a_i b_{k-i}
  std::vector<int> a(count, 0);
  for (long i = 0; i < count && i < long(digits_.size()); ++i)
    a[i] = int(digits_[i]) * cinv % ell_;
  std::vector<int> b(count, 0);
  b[0] = 1;
  for (long k = 1; k < count; ++k) {
    long s = 0;
    for (long i = 1; i <= k; ++i) s += long(a[i]) * b[k - i];
    b[k] = mod_ell(-s, ell_);
  }
  FieldElement out(ell_, 0);
  out.exact_ = false;
  out.val_ = -v;
  out.end_ = out_end;
  out.digits_.resize(count);
  for (long k = 0; k < count; ++k) out.digits_[k] = uint8_t(long(b[k]) * cinv % ell_);
  out.normalize();
  return out;
}

FieldElement FieldElement::divide_by(const FieldElement& o, long want_end) const {
  return *this * o.inverse(want_end - val_lower_bound() + 1);
}

FieldElement FieldElement::pow(long e, long want_end) const {
  if (e == 0) return one(ell_);
  FieldElement base = e > 0 ? *this : inverse(want_end / (-e) + 2);
  long n = e > 0 ? e : -e;
  FieldElement out = one(ell_);
  for (long i = 0; i < n; ++i) out *= base;
  return out;
}

FieldElement FieldElement::truncated(long new_end) const {
  FieldElement x = *this;
  if (!x.exact_ && x.end_ <= new_end) return x;
  x.exact_ = false;
  x.end_ = new_end;
  x.normalize();
  return x;
}

bool FieldElement::operator==(const FieldElement& o) const {
  if (!exact_ || !o.exact_)
    throw PrecisionError("exact comparison of inexact field elements");
  return ell_ == o.ell_ && val_ == o.val_ && digits_ == o.digits_;
}

bool FieldElement::agrees_with(const FieldElement& o) const {
  if (exact_ && o.exact_) return *this == o;
  long h = std::numeric_limits<long>::max();
  if (!exact_) h = std::min(h, end_);
  if (!o.exact_) h = std::min(h, o.end_);
  long lo = std::min(val_lower_bound(), o.val_lower_bound());
  for (long k = lo; k < h; ++k)
    if (digit(k) != o.digit(k)) return false;
  return true;
}

bool FieldElement::is_integral() const { return valuation_at_least(0); }

bool FieldElement::valuation_at_least(long k) const {
  if (!digits_.empty()) return val_ >= k;
  if (exact_) return true;
  if (end_ >= k) return true;
  throw PrecisionError("valuation bound undecidable at horizon w^" + std::to_string(end_));
}

std::string FieldElement::str() const {
  std::ostringstream os;
  bool first = true;
  for (size_t i = 0; i < digits_.size(); ++i) {
    if (!digits_[i]) continue;
    long k = val_ + long(i);
    if (!first) os << " + ";
    first = false;
    int c = digits_[i];
    if (k == 0) {
      os << c;
    } else {
      if (c != 1) os << c << "*";
      os << "w";
      if (k != 1) os << "^" << k;
    }
  }
  if (!exact_) {
    if (!first) os << " + ";
    os << "O(w^" << end_ << ")";
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

FieldElement FieldElement::parse(int ell, const std::string& text) {
  FieldElement out(ell, 0);
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(uint8_t(text[i]))) ++i;
  };
  int sign = 1;
  bool expect_term = true;
  while (true) {
    skip_ws();
    if (i >= text.size()) break;
    char ch = text[i];
    if (!expect_term && (ch == '+' || ch == '-')) {
      sign = ch == '-' ? -1 : 1;
      ++i;
      expect_term = true;
      continue;
    }
    if (expect_term && (ch == '+' || ch == '-')) {
      sign = ch == '-' ? -1 : 1;
      ++i;
      skip_ws();
      if (i >= text.size()) throw std::invalid_argument("dangling sign in field literal");
      ch = text[i];
    }
    if (!expect_term) throw std::invalid_argument("malformed field literal: " + text);
    long coeff = 1;
    bool saw_coeff = false;
    if (std::isdigit(uint8_t(ch))) {
      coeff = 0;
      while (i < text.size() && std::isdigit(uint8_t(text[i])))
        coeff = coeff * 10 + (text[i++] - '0');
      saw_coeff = true;
      skip_ws();
      if (i < text.size() && text[i] == '*') {
        ++i;
        skip_ws();
      }
    }
    long expnt = 0;
    bool saw_w = false;
    if (i < text.size() && text[i] == 'O') {
      // O(w^k)
      ++i;
      skip_ws();
      if (i >= text.size() || text[i] != '(') throw std::invalid_argument("malformed O-term");
      ++i;
      skip_ws();
      if (i >= text.size() || text[i] != 'w') throw std::invalid_argument("malformed O-term");
      ++i;
      long k = 1;
      skip_ws();
      if (i < text.size() && text[i] == '^') {
        ++i;
        skip_ws();
        bool neg = false;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) neg = text[i++] == '-';
        k = 0;
        while (i < text.size() && std::isdigit(uint8_t(text[i]))) k = k * 10 + (text[i++] - '0');
        if (neg) k = -k;
      }
      skip_ws();
      if (i >= text.size() || text[i] != ')') throw std::invalid_argument("malformed O-term");
      ++i;
      out = out + ball(ell, k);
      expect_term = false;
      sign = 1;
      continue;
    }
    if (i < text.size() && text[i] == 'w') {
      saw_w = true;
      ++i;
      expnt = 1;
      skip_ws();
      if (i < text.size() && text[i] == '^') {
        ++i;
        skip_ws();
        bool neg = false;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) neg = text[i++] == '-';
        long k = 0;
        bool any = false;
        while (i < text.size() && std::isdigit(uint8_t(text[i]))) {
          k = k * 10 + (text[i++] - '0');
          any = true;
        }
        if (!any) throw std::invalid_argument("malformed exponent in field literal");
        expnt = neg ? -k : k;
      }
    }
    if (!saw_coeff && !saw_w)
      throw std::invalid_argument("malformed field literal: " + text);
    out = out + monomial(ell, sign * coeff, expnt);
    sign = 1;
    expect_term = false;
  }
  if (expect_term && !text.empty()) {
    bool only_ws = true;
    for (char c : text)
      if (!std::isspace(uint8_t(c))) only_ws = false;
    if (!only_ws) throw std::invalid_argument("malformed field literal: " + text);
  }
  return out;
}

}  // namespace locrel
