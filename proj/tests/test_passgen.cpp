#include <doctest.h>

#include <cmath>
#include <map>

#include "honeyfilter/error.hpp"
#include "honeyfilter/passgen.hpp"

using namespace honeyfilter;

namespace {

PasswordCorpus corpus_of(std::vector<std::string> words) {
  PasswordCorpus c;
  c.entries = std::move(words);
  return c;
}

}  // namespace

TEST_SUITE("passgen") {
  TEST_CASE("hand counted transitions") {
    auto m = train_markov(corpus_of({"abab", "abba"}), 1, 0.01);
    const char32_t B = MarkovModel::kBegin, E = MarkovModel::kEnd;
    CHECK(m.symbols() == std::vector<char32_t>{E, U'a', U'b'});
    const auto& start = m.counts(std::u32string{B});
    CHECK(start.at(U'a') == 2);
    CHECK(start.size() == 1);
    const auto& after_a = m.counts(U"a");
    CHECK(after_a.at(U'b') == 3);
    CHECK(after_a.at(E) == 1);
    const auto& after_b = m.counts(U"b");
    CHECK(after_b.at(U'a') == 2);
    CHECK(after_b.at(U'b') == 1);
    CHECK(after_b.at(E) == 1);
    const auto& any = m.counts(U"");
    CHECK(any.at(U'a') == 4);
    CHECK(any.at(U'b') == 4);
    CHECK(any.at(E) == 2);
    CHECK(m.probability(U"a", U'b') == doctest::Approx(3.01 / 4.03));
    CHECK(m.probability(U"a", U'a') == doctest::Approx(0.01 / 4.03));
    CHECK(m.counts(U"z").empty());
    double total = 0;
    for (char32_t s : m.symbols()) total += m.probability(U"b", s);
    CHECK(total == doctest::Approx(1.0));
  }

  TEST_CASE("single word support") {
    auto m = train_markov(corpus_of({"password"}), 3, 1e-9);
    auto out = sample_passwords(m, 50, 8, 8, 1);
    for (const auto& w : out) CHECK(w == "password");
  }

  TEST_CASE("sample distribution matches training frequencies") {
    std::vector<std::string> words;
    for (int i = 0; i < 6; ++i) words.push_back("abcd");
    for (int i = 0; i < 3; ++i) words.push_back("wxyz");
    words.push_back("klmn");
    auto m = train_markov(corpus_of(words), 3, 1e-4);
    auto out = sample_passwords(m, 10000, 4, 4, 99);
    std::map<std::string, double> freq;
    for (const auto& w : out) freq[w] += 1.0 / 10000.0;
    const std::map<std::string, double> expect{{"abcd", 0.6}, {"wxyz", 0.3}, {"klmn", 0.1}};
    double tv = 0.0;
    for (const auto& [w, p] : freq) tv += std::abs(p - (expect.contains(w) ? expect.at(w) : 0.0));
    for (const auto& [w, p] : expect) if (!freq.contains(w)) tv += p;
    CHECK(tv / 2.0 < 0.05);
  }

  TEST_CASE("determinism and length bounds") {
    auto m = train_markov(corpus_of({"sunshine1", "princess2", "football7", "baseball99"}), 2, 0.05);
    auto a = sample_passwords(m, 200, 8, 12, 5);
    CHECK(a == sample_passwords(m, 200, 8, 12, 5));
    CHECK(a != sample_passwords(m, 200, 8, 12, 6));
    for (const auto& w : a) {
      CHECK(w.size() >= 8);
      CHECK(w.size() <= 12);
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(train_markov(PasswordCorpus{}, 3, 0.01), Error);
    CHECK_THROWS_AS(train_markov(corpus_of({"abc"}), 0, 0.01), Error);
    CHECK_THROWS_AS(train_markov(corpus_of({"abc"}), 3, 0.0), Error);
    auto m = train_markov(corpus_of({"abc"}), 3, 1e-9);
    Rng rng(1);
    CHECK_THROWS_AS(sample_password(m, 10, 12, rng, 20), Error);
  }
}
