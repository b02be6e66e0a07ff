#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "honeyfilter/embedding.hpp"
#include "honeyfilter/error.hpp"
#include "honeyfilter/rng.hpp"
#include "test_support.hpp"

using namespace honeyfilter;

namespace {

EmbedHyper small_hyper() {
  EmbedHyper h;
  h.dim = 24;
  h.epochs = 3;
  h.buckets = 1 << 16;
  h.seed = 21;
  return h;
}

const EmbeddingModel& shared_model() {
  static const EmbeddingModel model = [] {
    auto corpus = testing::fixture_corpus(4000);
    return train_embedding(corpus, small_hyper());
  }();
  return model;
}

}  // namespace

TEST_SUITE("embedding") {
  TEST_CASE("cosine") {
    std::vector<float> a{1, 0}, b{0, 1}, c{-2, 0}, z{0, 0};
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, b) == doctest::Approx(0.0));
    CHECK(cosine(a, c) == doctest::Approx(-1.0));
    bool degenerate = false;
    CHECK(cosine(a, z, &degenerate) == 0.0);
    CHECK(degenerate);
    std::vector<float> u{1, 2, 3}, v{4, -5, 6};
    CHECK(cosine(u, v) == doctest::Approx(12.0 / (std::sqrt(14.0) * std::sqrt(77.0))));
  }

  TEST_CASE("ngrams and buckets") {
    CHECK(char_ngrams("ab", 2, 3) == std::vector<std::string>{"<a", "<ab", "ab", "ab>", "b>"});
    CHECK(char_ngrams("a\xce\xa9", 3, 3) == std::vector<std::string>{"<a\xce\xa9", "a\xce\xa9>"});
    CHECK(ngram_bucket("<pa", std::uint64_t{1} << 32) == 1333240080u);
    CHECK(ngram_bucket("<pa", std::uint64_t{1} << 20) == 499984u);
    CHECK(fnv1a32("<pa") == 1333240080u);
  }

  TEST_CASE("nearest matches a brute-force scan") {
    const auto& m = shared_model();
    REQUIRE(m.vocab_size() > 100);
    for (const std::string& probe : std::vector<std::string>{"password1", m.vocab()[17], "zzqqxx99"}) {
      const auto target = m.embed_word(probe);
      const auto self = m.index_of(probe);
      std::vector<std::pair<double, std::size_t>> all;
      for (std::size_t i = 0; i < m.vocab_size(); ++i) {
        if (static_cast<std::int64_t>(i) == self) continue;
        all.emplace_back(cosine(target, m.word_vector(i)), i);
      }
      std::stable_sort(all.begin(), all.end(),
                       [](const auto& x, const auto& y) { return x.first > y.first; });
      auto got = m.nearest(probe, 10);
      REQUIRE(got.size() == 10);
      for (std::size_t r = 0; r < 10; ++r) {
        CHECK(got[r].index == all[r].second);
        CHECK(got[r].score == doctest::Approx(all[r].first));
        CHECK(got[r].word != probe);
      }
    }
  }

  TEST_CASE("neighbours are scale invariant") {
    EmbeddingModel m = shared_model();
    const auto before = m.nearest("password1", 15);
    m.scale(3.5f);
    const auto after = m.nearest("password1", 15);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(before[i].word == after[i].word);
      CHECK(before[i].score == doctest::Approx(after[i].score).epsilon(1e-5));
    }
  }

  TEST_CASE("save and load") {
    auto dir = testing::scratch_dir("embedding_io");
    const auto& m = shared_model();
    m.save(dir / "model.bin");
    auto back = EmbeddingModel::load(dir / "model.bin");
    CHECK(back.vocab() == m.vocab());
    CHECK(back.dim() == m.dim());
    for (std::string probe : {"monkey2020", "unseenword77"}) {
      auto a = m.nearest(probe, 5), b = back.nearest(probe, 5);
      for (std::size_t i = 0; i < 5; ++i) CHECK(a[i].word == b[i].word);
      CHECK(m.embed_word(probe) == back.embed_word(probe));
    }
    testing::write_file(dir / "bad.bin", "garbage");
    CHECK_THROWS_AS(EmbeddingModel::load(dir / "bad.bin"), Error);
  }

  TEST_CASE("training reduces loss and is deterministic") {
    const auto& m = shared_model();
    REQUIRE(m.epoch_losses().size() == 3);
    CHECK(m.epoch_losses().back() < m.epoch_losses().front());
    auto again = train_embedding(testing::fixture_corpus(4000), small_hyper());
    CHECK(again.embed_word("password1") == m.embed_word("password1"));
  }

  TEST_CASE("similar strings land closer") {
    const auto& m = shared_model();
    const auto p1 = m.embed_word("password1");
    CHECK(cosine(p1, m.embed_word("password2")) > cosine(p1, m.embed_word("qwerty88")));
  }

  TEST_CASE("bad inputs") {
    CHECK_THROWS_AS(train_embedding(PasswordCorpus{}, small_hyper()), Error);
    EmbedHyper h = small_hyper();
    h.ngram_min = 5;
    h.ngram_max = 4;
    CHECK_THROWS_AS(train_embedding(testing::fixture_corpus(50), h), Error);
  }
}
