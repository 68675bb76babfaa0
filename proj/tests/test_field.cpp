#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "locrel/field.hpp"

using namespace locrel;

namespace {
FieldElement random_poly(int ell, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, ell - 1);
  std::uniform_int_distribution<long> v(-3, 3);
  std::uniform_int_distribution<int> len(0, 6);
  std::vector<int> digits;
  int n = len(rng);
  for (int i = 0; i < n; ++i) digits.push_back(d(rng));
  return FieldElement::from_digits(ell, v(rng), digits);
}
}  // namespace

TEST_CASE("exact arithmetic basics") {
  int ell = 3;
  FieldElement w = FieldElement::uniformizer_pow(ell, 1);
  FieldElement one = FieldElement::one(ell);
  CHECK((one + w) * (one - w) == one - w * w);
  CHECK((one + one + one).is_exact_zero());
  FieldElement x = FieldElement::parse(ell, "w^-1 + 1 + 2*w^3");
  CHECK(x.valuation() == -1);
  CHECK(x.digit(-1) == 1);
  CHECK(x.digit(0) == 1);
  CHECK(x.digit(1) == 0);
  CHECK(x.digit(3) == 2);
  CHECK(x.str() == "w^-1 + 1 + 2*w^3");
  CHECK((x - x).is_exact_zero());
  CHECK((-x + x).is_exact_zero());
}

TEST_CASE("characteristic two") {
  int ell = 2;
  FieldElement w = FieldElement::uniformizer_pow(ell, 1);
  FieldElement one = FieldElement::one(ell);
  CHECK((one + w) * (one + w) == one + w * w);
  CHECK((one + one).is_exact_zero());
}

TEST_CASE("monomial inverses stay exact") {
  int ell = 5;
  FieldElement m = FieldElement::monomial(ell, 2, 3);
  FieldElement mi = m.inverse(0);
  CHECK(mi.is_exact());
  CHECK(mi == FieldElement::monomial(ell, 3, -3));  // 2*3 = 6 = 1 mod 5
  CHECK(m * mi == FieldElement::one(ell));
}

TEST_CASE("series inverse with horizon") {
  int ell = 3;
  FieldElement x = FieldElement::parse(ell, "1 + w");
  FieldElement y = x.inverse(8);
  CHECK(!y.is_exact());
  CHECK(y.end() == 8);
  // 1/(1+w) = 1 - w + w^2 - ... = 1 + 2w + w^2 + 2w^3 + ... mod 3
  CHECK(y.digit(0) == 1);
  CHECK(y.digit(1) == 2);
  CHECK(y.digit(2) == 1);
  CHECK(y.digit(3) == 2);
  CHECK((x * y).agrees_with(FieldElement::one(ell)));
  FieldElement prod = x * y;
  CHECK(!prod.is_exact());
  CHECK(prod.end() == 8);  // (1+w) has valuation 0, no precision loss

  FieldElement z = FieldElement::parse(ell, "w^-2 + 1");
  FieldElement zi = z.inverse(6);
  CHECK((z * zi).agrees_with(FieldElement::one(ell)));
  CHECK(zi.valuation() == 2);
}

TEST_CASE("precision propagation") {
  int ell = 3;
  FieldElement a = FieldElement::parse(ell, "1 + O(w^5)");
  CHECK(!a.is_exact());
  CHECK(a.end() == 5);
  CHECK(a.str() == "1 + O(w^5)");
  FieldElement b = FieldElement::uniformizer_pow(ell, 7);
  FieldElement s = a + b;
  CHECK(s.end() == 5);
  CHECK(s.digit(0) == 1);
  CHECK(s.digit(4) == 0);
  CHECK_THROWS_AS(s.digit(5), PrecisionError);

  FieldElement p = a * FieldElement::uniformizer_pow(ell, 2);
  CHECK(p.end() == 7);
  CHECK(p.valuation() == 2);

  FieldElement zero_ball = FieldElement::ball(ell, 4);
  CHECK_THROWS_AS(zero_ball.valuation(), PrecisionError);
  CHECK_THROWS_AS(FieldElement::zero(ell).valuation(), std::domain_error);
  CHECK(zero_ball.valuation_at_least(2));
  CHECK(zero_ball.valuation_at_least(4));
  CHECK_THROWS_AS(zero_ball.valuation_at_least(5), PrecisionError);
  CHECK(zero_ball.is_integral());
  CHECK_THROWS_AS(FieldElement::ball(ell, -1).is_integral(), PrecisionError);

  // inexact zero times bounded element: ball arithmetic
  FieldElement prod = zero_ball * FieldElement::uniformizer_pow(ell, -1);
  CHECK(prod.no_known_digits());
  CHECK(prod.end() == 3);
}

TEST_CASE("truncation and agreement") {
  int ell = 2;
  FieldElement x = FieldElement::parse(ell, "1 + w^3 + w^9");
  FieldElement t = x.truncated(5);
  CHECK(!t.is_exact());
  CHECK(t.agrees_with(x));
  CHECK(t.str() == "1 + w^3 + O(w^5)");
  CHECK_THROWS_AS((void)(t == x), PrecisionError);
  FieldElement y = FieldElement::parse(ell, "1 + w^3 + w^4");
  CHECK(!t.agrees_with(y));  // digit 4 differs within the known window
}

TEST_CASE("parse errors and roundtrip") {
  int ell = 3;
  CHECK_THROWS_AS(FieldElement::parse(ell, "q + 1"), std::invalid_argument);
  CHECK_THROWS_AS(FieldElement::parse(ell, "1 +"), std::invalid_argument);
  CHECK(FieldElement::parse(ell, "0").is_exact_zero());
  CHECK(FieldElement::parse(ell, " 2*w^-2+1+w ").str() == "2*w^-2 + 1 + w");
  CHECK(FieldElement::parse(ell, "4") == FieldElement(ell, 1));
  CHECK(FieldElement::parse(ell, "1 - w") == FieldElement::parse(ell, "1 + 2*w"));
  CHECK(FieldElement::parse(ell, "O(w^2)").str() == "O(w^2)");
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    FieldElement x = random_poly(3, rng);
    CHECK(FieldElement::parse(3, x.str()) == x);
  }
}

TEST_CASE("field axioms and division, randomized") {
  std::mt19937_64 rng(7);
  for (int ell : {2, 3, 5}) {
    for (int trial = 0; trial < 30; ++trial) {
      FieldElement a = random_poly(ell, rng), b = random_poly(ell, rng),
                   c = random_poly(ell, rng);
      CHECK(a + b == b + a);
      CHECK(a * b == b * a);
      CHECK((a + b) + c == a + (b + c));
      CHECK((a * b) * c == a * (b * c));
      CHECK(a * (b + c) == a * b + a * c);
      if (!b.is_exact_zero()) {
        FieldElement q = a.divide_by(b, 9);
        CHECK((q * b).agrees_with(a));
      }
    }
  }
}

TEST_CASE("powers") {
  int ell = 3;
  FieldElement x = FieldElement::parse(ell, "1 + w");
  CHECK(x.pow(3, 0) == FieldElement::parse(ell, "1 + w^3"));  // Frobenius
  CHECK(x.pow(0, 0) == FieldElement::one(ell));
  CHECK((x.pow(-2, 10) * x * x).agrees_with(FieldElement::one(ell)));
}
