#include <doctest.h>

#include <set>
#include <sstream>

#include "honeyfilter/corpus.hpp"
#include "honeyfilter/error.hpp"
#include "honeyfilter/tweak.hpp"
#include "test_support.hpp"

using namespace honeyfilter;

namespace {

PasswordCorpus from_text(const std::string& text, std::size_t min_len = kDefaultMinLen) {
  std::istringstream in(text);
  return load_passwords(in, min_len, "test");
}

PasswordCorpus numbered(std::size_t n) {
  PasswordCorpus c;
  for (std::size_t i = 0; i < n; ++i) c.entries.push_back("entry" + std::to_string(1000 + i));
  return c;
}

// Fails on one chosen password; otherwise returns "<password>~<i>".
class PickyGenerator final : public HoneywordGenerator {
 public:
  explicit PickyGenerator(std::string bad) : bad_(std::move(bad)) {}
  GeneratorKind kind() const override { return GeneratorKind::kImported; }
  std::vector<std::string> generate(std::string_view password, std::size_t count,
                                    std::uint64_t) const override {
    if (password == bad_) throw Error(ErrorCode::kVocabExhausted, "no honeywords");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(std::string(password) + "~" + std::to_string(i));
    return out;
  }

 private:
  std::string bad_;
};

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("length filter") {
    auto c = from_text("password1\nabc\nletmein123\n");
    CHECK(c.entries == std::vector<std::string>{"password1", "letmein123"});
    CHECK(c.dropped_short == 1);
  }

  TEST_CASE("invalid utf8 lines are skipped and counted") {
    std::string text;
    for (int i = 0; i < 10; ++i) {
      text += i == 4 ? std::string("bad\xff\xfeline") : "password" + std::to_string(i);
      text += "\r\n";
    }
    auto c = from_text(text);
    CHECK(c.size() == 9);
    CHECK(c.skipped_invalid_utf8 == 1);
    CHECK(c.entries.front() == "password0");
  }

  TEST_CASE("duplicates kept, errors reported") {
    auto c = from_text("samesame\nsamesame\n");
    CHECK(c.size() == 2);
    CHECK_THROWS_AS(from_text("short\n"), Error);
    try {
      from_text("x\n");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyCorpus);
    }
    try {
      load_passwords("/nonexistent/file.txt");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kIo);
    }
  }

  TEST_CASE("alphabet") {
    auto a = build_alphabet(std::vector<std::string>{"ab"});
    CHECK(a.size() == 4);
    CHECK(a.id(U'a') == 2);
    CHECK(a.id(U'b') == 3);
    CHECK(a.id(U'z') == Alphabet::kUnknown);
    CHECK(build_alphabet(std::vector<std::string>{"ba", "ab"}) ==
          build_alphabet(std::vector<std::string>{"ab", "ba"}));
    CHECK(build_alphabet(std::vector<std::string>{"0123456789", "99"}).size() == 12);
  }

  TEST_CASE("tokenize pads, truncates and maps unknowns") {
    auto a = build_alphabet(std::vector<std::string>{"abcde"});
    auto t = tokenize("ab", a, 4);
    CHECK(t.ids == std::vector<std::int32_t>{2, 3, 0, 0});
    CHECK(t.length == 2);
    t = tokenize("abcde", a, 4);
    CHECK(t.ids == std::vector<std::int32_t>{2, 3, 4, 5});
    CHECK(t.length == 4);
    t = tokenize("a\xce\xa9" "b", a, 5);
    CHECK(t.ids == std::vector<std::int32_t>{2, Alphabet::kUnknown, 3, 0, 0});
    CHECK(detokenize(tokenize("cab", a, 8), a) == "cab");
  }

  TEST_CASE("split sizes, determinism and partition") {
    auto c = numbered(100);
    SplitSpec spec;
    spec.seed = 5;
    auto s1 = split(c, spec);
    CHECK(s1.train.size() == 90);
    CHECK(s1.val.size() == 5);
    CHECK(s1.test.size() == 5);
    auto s2 = split(c, spec);
    CHECK(s1.train.entries == s2.train.entries);
    std::set<std::string> all(s1.train.entries.begin(), s1.train.entries.end());
    all.insert(s1.val.entries.begin(), s1.val.entries.end());
    all.insert(s1.test.entries.begin(), s1.test.entries.end());
    CHECK(all.size() == 100);
    spec.seed = 6;
    CHECK(split(c, spec).train.entries != s1.train.entries);
    spec.train_frac = 0.5;
    CHECK_THROWS_AS(split(c, spec), Error);
  }

  TEST_CASE("training pairs") {
    TweakGenerator gen(TweakParams{});
    auto one = build_training_pairs({"Summer2019!"}, gen);
    REQUIRE(one.pairs.size() == 2);
    CHECK(one.pairs[0].label == Label::kPassword);
    CHECK(one.pairs[1].label == Label::kHoneyword);
    CHECK(one.pairs[1].word == gen.generate("Summer2019!", 1, 0).front());

    auto corpus = testing::fixture_corpus(300);
    auto many = build_training_pairs(corpus.entries, gen);
    std::size_t pos = 0;
    for (const auto& p : many.pairs) pos += p.label == Label::kPassword;
    CHECK(pos * 2 == many.pairs.size());
    // The honeyword for password i belongs to the generator's list on stream i.
    for (std::size_t i = 0; i < 20; ++i) {
      auto list = gen.generate(corpus.entries[i], 19, i);
      CHECK(std::find(list.begin(), list.end(), many.pairs[2 * i + 1].word) != list.end());
    }

    auto picky = build_training_pairs({"goodpassword", "badpassword"}, PickyGenerator("badpassword"));
    CHECK(picky.pairs.size() == 2);
    CHECK(picky.skipped == 1);
  }

  TEST_CASE("evaluation accounts") {
    auto corpus = testing::fixture_corpus();
    TweakGenerator gen(TweakParams{});
    EvalAccountOptions opt;
    opt.seed = 9;
    auto accounts = build_eval_accounts(corpus.entries, gen, opt);
    REQUIRE(accounts.accounts.size() == 500);
    std::set<std::int64_t> ids;
    const std::set<std::string> pool(corpus.entries.begin(), corpus.entries.end());
    for (const auto& a : accounts.accounts) {
      CHECK(a.k() == 20);
      CHECK(a.real_index < 20);
      std::set<std::string> distinct(a.sweetwords.begin(), a.sweetwords.end());
      CHECK(distinct.size() == 20);
      ids.insert(a.account_id);
      CHECK(pool.contains(a.real()));
    }
    CHECK(ids.size() == 500);

    auto again = build_eval_accounts(corpus.entries, gen, opt);
    CHECK(again.accounts.front().sweetwords == accounts.accounts.front().sweetwords);

    opt.k = 2;
    opt.n_accounts = 1;
    auto pair = build_eval_accounts(corpus.entries, gen, opt);
    REQUIRE(pair.accounts.size() == 1);
    CHECK(pair.accounts[0].k() == 2);

    opt.k = 30;
    opt.n_accounts = 10;
    for (const auto& a : build_eval_accounts(corpus.entries, gen, opt).accounts) CHECK(a.k() == 30);
  }

  TEST_CASE("evaluation accounts honour exclusions and skip failures") {
    std::vector<std::string> pool{"aaaaaaaa1", "bbbbbbbb2", "cccccccc3", "dddddddd4"};
    EvalAccountOptions opt;
    opt.k = 3;
    opt.n_accounts = 4;
    auto r = build_eval_accounts(pool, PickyGenerator("cccccccc3"), opt, {"aaaaaaaa1"});
    CHECK(r.accounts.size() == 2);
    CHECK(r.excluded == 1);
    CHECK(r.skipped == 1);
    for (const auto& a : r.accounts) {
      CHECK(a.real() != "aaaaaaaa1");
      CHECK(a.real() != "cccccccc3");
    }
  }

  TEST_CASE("account tsv round trip") {
    std::vector<SweetwordSet> accounts{{1, {"alpha123", "alpha124", "alpha125"}, 1},
                                       {2, {"beta\xce\xa9" "99", "beta99"}, 0}};
    std::stringstream buf;
    write_accounts_tsv(buf, accounts);
    CHECK(buf.str().substr(0, 35) == "1\t1\talpha123\talpha124\talpha125\n2\t0\t");
    auto back = read_accounts_tsv(buf);
    REQUIRE(back.size() == 2);
    CHECK(back[1].sweetwords == accounts[1].sweetwords);
    CHECK(back[0].real_index == 1);
  }
}
