#pragma once
// Elements of F = F_ell((w)): Laurent series in the uniformizer w with
// digits in F_ell.  An element is either exact (a genuine Laurent
// polynomial, known completely) or carries an explicit knowledge horizon:
// digits are known for exponents < end() and unknown beyond.  Arithmetic
// propagates horizons honestly; any query that would need unknown digits
// throws PrecisionError rather than guessing.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace locrel {

struct PrecisionError : std::runtime_error {
  explicit PrecisionError(const std::string& what) : std::runtime_error(what) {}
};

class FieldElement {
 public:
  FieldElement() : ell_(0), val_(0), exact_(true) {}
  // Integer constant, reduced into the residue field.
  FieldElement(int ell, long value);

  static FieldElement zero(int ell) { return FieldElement(ell, 0); }
  static FieldElement one(int ell) { return FieldElement(ell, 1); }
  // c * w^k with c an integer (reduced mod ell); exact.
  static FieldElement monomial(int ell, long c, long k);
  static FieldElement uniformizer_pow(int ell, long k) { return monomial(ell, 1, k); }
  // Exact element with the given digits starting at exponent val.
  static FieldElement from_digits(int ell, long val, const std::vector<int>& digits);
  // The inexact zero O(w^end): some element of w^end * O, digits unknown.
  static FieldElement ball(int ell, long end);
  // Parse "2*w^-1 + 1 + w^3" or "... + O(w^11)"; whitespace optional.
  static FieldElement parse(int ell, const std::string& text);

  int ell() const { return ell_; }
  bool is_exact() const { return exact_; }
  // True only for the exact zero.
  bool is_exact_zero() const { return exact_ && digits_.empty(); }
  // True if no nonzero digit is known (exact zero or an O(w^k) ball).
  bool no_known_digits() const { return digits_.empty(); }
  // Exponent just past the last known digit; meaningless for exact elements.
  long end() const;
  // Exact valuation.  Throws domain_error on exact zero, PrecisionError when
  // only a ball is known.
  long valuation() const;
  // Lower bound on the valuation (end of ball for inexact zeroes).
  long val_lower_bound() const { return digits_.empty() ? (exact_ ? 0 : end_) : val_; }
  // Digit at exponent k (0 <= digit < ell).  Throws PrecisionError if k is
  // past the knowledge horizon.
  int digit(long k) const;

  FieldElement operator-() const;
  FieldElement operator+(const FieldElement& o) const;
  FieldElement operator-(const FieldElement& o) const;
  FieldElement operator*(const FieldElement& o) const;
  FieldElement& operator+=(const FieldElement& o) { return *this = *this + o; }
  FieldElement& operator-=(const FieldElement& o) { return *this = *this - o; }
  FieldElement& operator*=(const FieldElement& o) { return *this = *this * o; }

  // Multiplicative inverse carrying enough digits that the result is known
  // through exponent < want_end.  Exact for exact monomials (then want_end is
  // ignored).  Throws PrecisionError if the input valuation is not visible,
  // domain_error on exact zero.
  FieldElement inverse(long want_end) const;
  FieldElement divide_by(const FieldElement& o, long want_end) const;
  FieldElement pow(long e, long want_end) const;

  // Forget digits at exponents >= new_end (makes the element inexact).
  FieldElement truncated(long new_end) const;

  // Exact equality; throws PrecisionError unless both operands are exact.
  bool operator==(const FieldElement& o) const;
  bool operator!=(const FieldElement& o) const { return !(*this == o); }
  // True if the two elements have identical known digits below min(end()s)
  // (with exact treated as end = +inf, both-exact compares fully).
  bool agrees_with(const FieldElement& o) const;

  // True if every digit at exponent < 0 is known to vanish (i.e. provably in
  // O); PrecisionError if undecidable at the current horizon.
  bool is_integral() const;
  // v(x) >= k, decided or PrecisionError.
  bool valuation_at_least(long k) const;

  std::string str() const;

 private:
  void normalize();
  int ell_;
  long val_;                    // exponent of digits_[0]
  std::vector<uint8_t> digits_; // digits_[0] != 0 after normalize
  bool exact_;
  long end_ = 0;                // knowledge horizon when !exact_
};

}  // namespace locrel
