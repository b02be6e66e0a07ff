#include <doctest.h>

#include <cctype>
#include <set>

#include "honeyfilter/error.hpp"
#include "honeyfilter/tweak.hpp"

using namespace honeyfilter;

namespace {

TweakParams halves() {
  TweakParams p;
  p.p = p.q = p.f = 0.5;
  p.g = 0.0;
  return p;
}

enum class Cls { kLower, kUpper, kDigit, kSpecial, kOther };

Cls cls(char c) {
  if (c >= 'a' && c <= 'z') return Cls::kLower;
  if (c >= 'A' && c <= 'Z') return Cls::kUpper;
  if (c >= '0' && c <= '9') return Cls::kDigit;
  if (is_special_symbol(static_cast<unsigned char>(c))) return Cls::kSpecial;
  return Cls::kOther;
}

}  // namespace

TEST_SUITE("tweak") {
  // Golden strings produced by tests/oracles/splitmix_oracle.py.
  TEST_CASE("matches reference draws") {
    Rng rng(42);
    CHECK(tweak_once("p@ss1", halves(), rng) == "p]SS1");
    Rng seq(42);
    std::vector<std::string> got;
    for (int i = 0; i < 4; ++i) got.push_back(tweak_once("p@ss1", halves(), seq));
    CHECK(got == std::vector<std::string>{"p]SS1", "P@Ss8", "p@sS0", "P@sS1"});
  }

  TEST_CASE("forced substitutions") {
    Rng rng(1);
    auto all = TweakParams::zero();
    all.p = 1.0;
    for (int i = 0; i < 50; ++i) {
      auto out = tweak_once("ab!cd", all, rng);
      REQUIRE(out.size() == 5);
      CHECK(out[2] != '!');
      CHECK(is_special_symbol(static_cast<unsigned char>(out[2])));
      CHECK(out.substr(0, 2) == "ab");
    }
    all = TweakParams::zero();
    all.q = 1.0;
    auto digits = tweak_once("1111", all, rng);
    for (char c : digits) CHECK((c != '1' && std::isdigit(static_cast<unsigned char>(c))));
    all = TweakParams::zero();
    all.f = 1.0;
    CHECK(tweak_once("abc1", all, rng) == "ABC1");
    all = TweakParams::zero();
    all.g = 1.0;
    CHECK(tweak_once("ABC1", all, rng) == "abc1");
  }

  TEST_CASE("other characters pass through without draws") {
    Rng a(3), b(3);
    auto p = halves();
    CHECK(tweak_once("x \xce\xa9y", p, a) == tweak_once("x \xce\xa9y", p, b));
    Rng c(3), d(3);
    const auto with_spaces = tweak_once("  a  ", p, c);
    const auto plain = tweak_once("a", p, d);
    CHECK(with_spaces == "  " + plain + "  ");
  }

  TEST_CASE("uppercase rate tracks f") {
    auto p = TweakParams{};
    Rng rng(11);
    std::size_t lower = 0, total = 0;
    for (int i = 0; i < 4000; ++i) {
      for (char c : tweak_once("abcdefghij", p, rng)) {
        lower += c >= 'a' && c <= 'z';
        ++total;
      }
    }
    CHECK(static_cast<double>(lower) / static_cast<double>(total) ==
          doctest::Approx(0.97).epsilon(0.01));
  }

  TEST_CASE("all digit password enumerates distinct variants") {
    TweakParams p;
    p.rng_seed = 4;
    auto out = generate_tweaked("1111", 19, p);
    std::set<std::string> distinct(out.begin(), out.end());
    CHECK(distinct.size() == 19);
    CHECK(!distinct.contains("1111"));
    for (const auto& w : out) {
      CHECK(w.size() == 4);
      for (char c : w) CHECK(std::isdigit(static_cast<unsigned char>(c)));
    }
  }

  TEST_CASE("generator invariants") {
    TweakGenerator gen(TweakParams{});
    for (std::string pw : {"Summer2019!", "p@ssw0rd", "qwerty123", "ILoveYou_88"}) {
      auto out = gen.generate(pw, 19, 5);
      std::set<std::string> distinct(out.begin(), out.end());
      CHECK(distinct.size() == 19);
      CHECK(!distinct.contains(pw));
      for (const auto& w : out) {
        REQUIRE(w.size() == pw.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
          const auto a = cls(pw[i]), b = cls(w[i]);
          if (a == Cls::kLower || a == Cls::kUpper) {
            CHECK((b == Cls::kLower || b == Cls::kUpper));
            CHECK(std::tolower(static_cast<unsigned char>(w[i])) ==
                  std::tolower(static_cast<unsigned char>(pw[i])));
          } else {
            CHECK(a == b);
          }
        }
      }
      CHECK(gen.generate(pw, 19, 5) == out);
      CHECK(gen.generate(pw, 19, 6) != out);
    }
  }

  TEST_CASE("duplicates boost the probabilities") {
    TweakParams p = TweakParams::zero();
    p.q = 0.2;
    p.rng_seed = 8;
    TweakSession session(p, 10000);
    std::unordered_set<std::string> taken;
    for (int i = 0; i < 9; ++i) taken.insert(session.next_distinct("5", "5", taken));
    CHECK(taken.size() == 9);
    REQUIRE(session.boosts() > 0);
    double expect = 0.2;
    for (const auto& step : session.boost_history()) {
      expect = std::min(1.0, expect * 1.1);
      CHECK(step.q == doctest::Approx(expect));
      CHECK(step.p == 0.0);
    }
    CHECK(session.attempts() == 9 + session.boosts());
  }

  TEST_CASE("additive boost") {
    TweakParams p = TweakParams::zero();
    p.boost_mode = BoostMode::kAdditive;
    p.boost = 0.25;
    p.apply_boost();
    CHECK(p.f == doctest::Approx(0.25));
    p.apply_boost();
    p.apply_boost();
    p.apply_boost();
    p.apply_boost();
    CHECK(p.f == 1.0);
  }

  TEST_CASE("errors") {
    try {
      generate_tweaked("abcdefgh", 3, TweakParams::zero());
      FAIL("expected exhaustion");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBudgetExhausted);
    }
    CHECK_THROWS_AS(generate_tweaked("ab", 4, TweakParams{}), Error);
    CHECK_THROWS_AS(generate_tweaked("", 1, TweakParams{}), Error);
    TweakParams bad;
    bad.q = 1.5;
    CHECK_THROWS_AS(TweakGenerator{bad}, Error);
  }
}
