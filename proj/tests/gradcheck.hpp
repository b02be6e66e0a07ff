#pragma once

// Central-difference gradient checks in double precision, shared by the unit
// tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "honeyfilter/cnn.hpp"

namespace gradcheck {

using honeyfilter::Rng;
using honeyfilter::nn::Activations;

inline constexpr double kStep = 1e-6;
inline constexpr double kTolerance = 1e-4;

inline double rel_err(double a, double b) {
  const double denom = std::max(std::abs(a) + std::abs(b), 1e-6);
  return std::abs(a - b) / denom;
}

inline Activations<double> random_acts(std::size_t b, std::size_t l, std::size_t c, Rng& rng) {
  Activations<double> a(b, l, c);
  for (auto& v : a.data) v = rng.uniform(-1.0, 1.0);
  return a;
}

inline void randomize(std::vector<double>& v, Rng& rng, double scale = 1.0) {
  for (auto& x : v) x = rng.uniform(-scale, scale);
}

// Scalar probe loss sum(out * r) for a fixed random projection r. Dropout
// masks repeat because the rng is reseeded on every call.
inline double probe_loss(honeyfilter::nn::Layer<double>& layer, const Activations<double>& in,
                         const Activations<double>& r, bool train, std::uint64_t drop_seed) {
  Rng drop(drop_seed);
  auto out = layer.forward(in, train, &drop, nullptr);
  return std::inner_product(out.data.begin(), out.data.end(), r.data.begin(), 0.0);
}

template <typename F>
double numeric(double& slot, F&& loss) {
  const double keep = slot;
  slot = keep + kStep;
  const double up = loss();
  slot = keep - kStep;
  const double down = loss();
  slot = keep;
  return (up - down) / (2 * kStep);
}

// Worst relative error over every input and parameter element of one layer.
inline double check_layer(honeyfilter::nn::Layer<double>& layer, Activations<double> in,
                          bool train, std::uint64_t seed) {
  Rng rng(seed);
  honeyfilter::nn::LayerCache<double> cache;
  Rng drop(seed + 1);
  auto out = layer.forward(in, train, &drop, &cache);
  auto r = random_acts(out.batch, out.len, out.ch, rng);
  for (auto& p : layer.params()) std::fill(p.grad->begin(), p.grad->end(), 0.0);
  auto dx = layer.backward(r, cache);
  auto loss = [&] { return probe_loss(layer, in, r, train, seed + 1); };

  double worst = 0.0;
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    worst = std::max(worst, rel_err(dx.data[i], numeric(in.data[i], loss)));
  }
  for (auto& p : layer.params()) {
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      worst = std::max(worst, rel_err((*p.grad)[i], numeric((*p.value)[i], loss)));
    }
  }
  return worst;
}

inline double check_embedding(std::uint64_t seed) {
  Rng rng(seed);
  honeyfilter::nn::Embedding<double> emb(6, 3);
  randomize(emb.table(), rng);
  const std::vector<std::int32_t> ids{0, 5, 2, 2, 1, 5};
  auto r = random_acts(2, 3, 3, rng);
  auto param = emb.param();
  std::fill(param.grad->begin(), param.grad->end(), 0.0);
  emb.backward(ids, r);
  auto loss = [&] {
    auto out = emb.forward(ids, 2, 3);
    return std::inner_product(out.data.begin(), out.data.end(), r.data.begin(), 0.0);
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < param.value->size(); ++i) {
    worst = std::max(worst, rel_err((*param.grad)[i], numeric((*param.value)[i], loss)));
  }
  return worst;
}

inline double check_softmax_ce(std::uint64_t seed) {
  Rng rng(seed);
  auto logits = random_acts(4, 1, 2, rng);
  const std::vector<std::int32_t> labels{0, 1, 1, 0};
  Activations<double> grad;
  honeyfilter::nn::softmax_cross_entropy(logits, labels, &grad);
  auto loss = [&] { return honeyfilter::nn::softmax_cross_entropy<double>(logits, labels, nullptr); };
  double worst = 0.0;
  for (std::size_t i = 0; i < logits.data.size(); ++i) {
    worst = std::max(worst, rel_err(grad.data[i], numeric(logits.data[i], loss)));
  }
  return worst;
}

// Every layer type in isolation; returns (kind, worst error) per check.
inline std::vector<std::pair<std::string, double>> check_all_layers(std::uint64_t seed) {
  namespace nn = honeyfilter::nn;
  std::vector<std::pair<std::string, double>> out;
  Rng rng(seed);

  nn::Conv1d<double> conv(3, 4, 3);
  randomize(conv.weight(), rng);
  out.emplace_back("conv1d", check_layer(conv, random_acts(2, 6, 3, rng), true, seed + 1));

  nn::BatchNorm<double> bn(3);
  randomize(bn.gamma(), rng);
  out.emplace_back("batchnorm(train)", check_layer(bn, random_acts(4, 5, 3, rng), true, seed + 2));
  randomize(bn.running_mean(), rng);
  for (auto& v : bn.running_var()) v = rng.uniform(0.5, 2.0);
  out.emplace_back("batchnorm(eval)", check_layer(bn, random_acts(4, 5, 3, rng), false, seed + 3));

  nn::Dense<double> dense(12, 5);
  randomize(dense.weight(), rng);
  randomize(dense.bias(), rng);
  out.emplace_back("dense", check_layer(dense, random_acts(3, 4, 3, rng), true, seed + 4));

  nn::ActivationLayer<double> relu(nn::Activation::kRelu), tanh_layer(nn::Activation::kTanh);
  out.emplace_back("relu", check_layer(relu, random_acts(3, 4, 3, rng), true, seed + 5));
  out.emplace_back("tanh", check_layer(tanh_layer, random_acts(3, 4, 3, rng), true, seed + 6));

  nn::MaxPool1d<double> pool(2);
  out.emplace_back("maxpool", check_layer(pool, random_acts(3, 6, 2, rng), true, seed + 7));
  nn::Dropout<double> drop(0.4);
  out.emplace_back("dropout", check_layer(drop, random_acts(3, 6, 2, rng), true, seed + 8));

  out.emplace_back("embedding", check_embedding(seed + 9));
  out.emplace_back("softmax-ce", check_softmax_ce(seed + 10));
  return out;
}

// Sequence length 8, two conv blocks, one dense block.
inline honeyfilter::CnnArch tiny_arch(std::size_t alphabet, double conv_drop = 0.0,
                                      double dense_drop = 0.0) {
  honeyfilter::CnnArch a;
  a.alphabet_size = alphabet;
  a.max_len = 8;
  a.embed_dim = 4;
  a.conv = {{3, 3, 2, conv_drop}, {4, 3, 2, conv_drop}};
  a.dense = {{5, dense_drop}};
  return a;
}

// Full-network check over `probes` random parameter entries. Batchnorm
// statistics are moved away from (0, 1) so eval mode is not an identity.
inline double check_network(bool train, std::size_t probes, std::uint64_t seed) {
  const std::size_t alphabet = 7, batch = 4;
  Rng rng(seed);
  honeyfilter::CnnModel<double> model(tiny_arch(alphabet), seed + 1);
  for (auto& b : model.buffers()) {
    const bool var = b.name.ends_with("var");
    for (auto& v : *b.value) v = var ? rng.uniform(0.5, 2.0) : rng.uniform(-0.3, 0.3);
  }
  std::vector<std::int32_t> ids(batch * 8);
  for (auto& id : ids) id = static_cast<std::int32_t>(rng.uniform_below(alphabet));
  const std::vector<std::int32_t> labels{1, 0, 0, 1};

  model.loss_and_gradients(ids, batch, labels, train, nullptr);
  auto params = model.params();
  std::vector<std::vector<double>> grads;
  for (auto& p : params) grads.push_back(*p.grad);
  auto loss = [&] { return model.loss_and_gradients(ids, batch, labels, train, nullptr); };

  double worst = 0.0;
  for (std::size_t probe = 0; probe < probes; ++probe) {
    const auto pi = rng.uniform_below(params.size());
    const auto vi = rng.uniform_below(params[pi].value->size());
    worst = std::max(worst, rel_err(grads[pi][vi], numeric((*params[pi].value)[vi], loss)));
  }
  return worst;
}

}  // namespace gradcheck
