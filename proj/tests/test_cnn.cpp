#include <doctest.h>

#include <cmath>

#include "honeyfilter/cnn.hpp"
#include "honeyfilter/error.hpp"
#include "honeyfilter/tweak.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

using namespace honeyfilter;
using nn::Activations;

namespace {

using gradcheck::random_acts;
using gradcheck::tiny_arch;

std::vector<std::int32_t> random_ids(std::size_t n, std::size_t alphabet, Rng& rng) {
  std::vector<std::int32_t> ids(n);
  for (auto& id : ids) id = static_cast<std::int32_t>(rng.uniform_below(alphabet));
  return ids;
}

std::vector<LabeledPair> tweak_pairs(std::size_t offset, std::size_t n) {
  auto corpus = testing::fixture_corpus(offset + n);
  std::vector<std::string> pw(corpus.entries.begin() + static_cast<std::ptrdiff_t>(offset),
                              corpus.entries.end());
  TweakParams params;
  params.rng_seed = 17 + offset;
  return build_training_pairs(pw, TweakGenerator(params)).pairs;
}

}  // namespace

TEST_SUITE("cnn") {
  TEST_CASE("arch shape algebra") {
    auto a = CnnArch::defaults(40, 32);
    CHECK(a.sequence_lengths() == std::vector<std::size_t>{32, 16, 8, 4, 2, 1});
    CHECK(a.flattened_size() == 64);
    CHECK_NOTHROW(a.validate());
    auto bad = CnnArch::defaults(40, 16);
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS((CnnModel<float>(bad, 1)), Error);
    a.conv[0].dropout = 1.0;
    CHECK_THROWS_AS(a.validate(), Error);
  }

  TEST_CASE("hand computed convolution") {
    nn::Conv1d<double> conv(1, 1, 3);
    conv.weight() = {1.0, 2.0, 3.0};
    Activations<double> in(1, 5, 1);
    in.data = {1, 2, 3, 4, 5};
    auto out = conv.forward(in, false, nullptr, nullptr);
    // y[t] = 1*x[t-1] + 2*x[t] + 3*x[t+1] with zero padding.
    CHECK(out.data == std::vector<double>{8, 14, 20, 26, 14});
  }

  TEST_CASE("gradient check: every layer type") {
    for (const auto& [kind, err] : gradcheck::check_all_layers(21)) {
      INFO(kind << " rel err " << err);
      CHECK(err < gradcheck::kTolerance);
    }
  }

  TEST_CASE("gradient check: full tiny network") {
    CHECK(gradcheck::check_network(false, 100, 6) < gradcheck::kTolerance);
    CHECK(gradcheck::check_network(true, 100, 7) < gradcheck::kTolerance);
  }

  TEST_CASE("forward properties") {
    const std::size_t alphabet = 9;
    CnnModel<float> model(tiny_arch(alphabet, 0.2, 0.5), 3);
    Rng rng(7);
    const auto ids = random_ids(16 * 8, alphabet, rng);
    auto probs = model.predict(ids, 16);
    for (std::size_t b = 0; b < 16; ++b) {
      CHECK(probs[2 * b] > 0.0f);
      CHECK(probs[2 * b + 1] < 1.0f);
      CHECK(probs[2 * b] + probs[2 * b + 1] == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(model.predict(ids, 16) == probs);

    CnnModel<float> same(tiny_arch(alphabet, 0.2, 0.5), 3);
    auto a = model.params(), b = same.params();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i].value == *b[i].value);

    for (auto& p : model.params()) std::fill(p.value->begin(), p.value->end(), 0.0f);
    probs = model.predict(std::span(ids).first(2 * 8), 2);
    CHECK(probs == std::vector<float>{0.5f, 0.5f, 0.5f, 0.5f});
  }

  TEST_CASE("dropout expectation") {
    nn::Dropout<double> drop(0.3);
    Rng rng(8);
    auto in = random_acts(1, 4, 5, rng);
    std::vector<double> mean(in.data.size(), 0.0);
    for (int i = 0; i < 10000; ++i) {
      auto out = drop.forward(in, true, &rng, nullptr);
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += out.data[j] / 10000.0;
    }
    const auto eval = drop.forward(in, false, nullptr, nullptr);
    CHECK(eval.data == in.data);
    for (std::size_t j = 0; j < mean.size(); ++j) {
      CHECK(mean[j] == doctest::Approx(eval.data[j]).epsilon(0.02));
    }
  }

  TEST_CASE("initial loss near ln 2 and one step of descent") {
    const std::size_t alphabet = 20, batch = 64;
    auto arch = CnnArch::defaults(alphabet, 32);
    CnnModel<float> model(arch, 5);
    Rng rng(9);
    const auto ids = random_ids(batch * 32, alphabet, rng);
    std::vector<std::int32_t> labels(batch);
    for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<std::int32_t>(i % 2);
    const float initial = model.loss_and_gradients(ids, batch, labels, false, nullptr);
    CHECK(initial == doctest::Approx(std::log(2.0)).epsilon(0.15));

    CnnModel<float> net(tiny_arch(alphabet), 6);
    TrainConfig cfg;
    cfg.optimizer = OptimizerKind::kSgd;
    cfg.learning_rate = 1e-3;
    Optimizer opt(cfg);
    const auto few = random_ids(8 * 8, alphabet, rng);
    const std::vector<std::int32_t> few_labels{1, 0, 1, 1, 0, 0, 1, 0};
    Rng drop(1);
    CnnModel<float> before = net;
    const float l0 = backward_and_step(net, few, 8, few_labels, opt, drop);
    CHECK(l0 == before.loss_and_gradients(few, 8, few_labels, true, nullptr));
    CHECK(net.loss_and_gradients(few, 8, few_labels, true, nullptr) < l0);
    CHECK(opt.steps() == 1);

    const std::vector<std::int32_t> one(few.begin(), few.begin() + 8), one_label{1};
    const float single = net.loss_and_gradients(one, 1, one_label, false, nullptr);
    for (auto& p : net.params()) {
      for (std::size_t i = 0; i < p.value->size(); ++i) (*p.value)[i] -= 1e-2f * (*p.grad)[i];
    }
    CHECK(net.loss_and_gradients(one, 1, one_label, false, nullptr) < single);
  }

  TEST_CASE("zero epochs, determinism and checkpoints") {
    const auto pairs = tweak_pairs(0, 200);
    const auto val = tweak_pairs(200, 40);
    std::vector<std::string> words;
    for (const auto& p : pairs) words.push_back(p.word);
    const auto alphabet = build_alphabet(words);
    auto arch = CnnArch::defaults(alphabet.size(), 32);
    TrainConfig cfg;
    cfg.seed = 12;
    cfg.batch_size = 32;

    cfg.epochs = 0;
    auto zero = train_classifier(arch, alphabet, pairs, val, cfg);
    CHECK(zero.history.epochs.empty());
    CHECK(zero.history.best_epoch == 0);
    Classifier fresh(CnnModel<float>(arch, derive_seed(cfg.seed, "cnn.init")), alphabet);
    CHECK(zero.classifier.score("password1") == fresh.score("password1"));

    cfg.epochs = 2;
    auto a = train_classifier(arch, alphabet, pairs, val, cfg);
    auto b = train_classifier(arch, alphabet, pairs, val, cfg);
    CHECK(a.history.to_csv() == b.history.to_csv());
    CHECK(a.history.to_csv().starts_with("epoch,train_loss,val_loss,val_acc\n1,"));

    auto dir = testing::scratch_dir("cnn_ckpt");
    a.classifier.save(dir / "a.ckpt");
    b.classifier.save(dir / "b.ckpt");
    CHECK(testing::read_file(dir / "a.ckpt") == testing::read_file(dir / "b.ckpt"));
    auto loaded = Classifier::load(dir / "a.ckpt");
    CHECK(loaded.alphabet() == alphabet);
    for (const auto& p : val) {
      CHECK(loaded.score(p.word) == a.classifier.score(p.word));
      auto [h, pw] = loaded.probabilities(p.word);
      CHECK(h + pw == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(pw >= 0.0);
      CHECK(pw <= 1.0);
    }
    auto bytes = testing::read_file(dir / "a.ckpt");
    testing::write_file(dir / "cut.ckpt", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(Classifier::load(dir / "cut.ckpt"), Error);
    testing::write_file(dir / "junk.ckpt", "not a checkpoint");
    CHECK_THROWS_AS(Classifier::load(dir / "junk.ckpt"), Error);
  }
}

// Desk-scale training run, kept apart because it takes a while.
TEST_SUITE("cnn_desk") {
  TEST_CASE("learns to separate tweaked honeywords") {
    const auto pairs = tweak_pairs(0, 1000);
    const auto val = tweak_pairs(1000, 300);
    std::vector<std::string> words;
    for (const auto& p : pairs) words.push_back(p.word);
    const auto alphabet = build_alphabet(words);
    auto arch = CnnArch::defaults(alphabet.size(), 32);
    TrainConfig cfg;
    // Training settings of configs/acceptance.json.
    for (auto& d : arch.dense) d.dropout = 0.3;
    cfg.epochs = 10;
    cfg.batch_size = 32;
    cfg.learning_rate = 3e-3;
    cfg.patience = 0;
    cfg.seed = 4;
    auto result = train_classifier(arch, alphabet, pairs, val, cfg);
    const auto metrics = evaluate_classifier(result.classifier, val);
    MESSAGE("val accuracy " << metrics.accuracy);
    CHECK(metrics.accuracy > 0.7);
    double real = 0, fake = 0;
    for (const auto& p : val) {
      (p.label == Label::kPassword ? real : fake) += result.classifier.score(p.word);
    }
    CHECK(real > fake);
  }
}
