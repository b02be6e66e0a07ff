#pragma once

// Layer building blocks of the character CNN. Activations are laid out
// [batch][position][channel]; dense layers see one position whose channels
// are the flattened previous output. Each layer is templated on the scalar
// type so that gradient checks can run in double precision.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "honeyfilter/error.hpp"
#include "honeyfilter/rng.hpp"

namespace honeyfilter::nn {

template <typename T>
struct Activations {
  std::size_t batch = 0;
  std::size_t len = 0;
  std::size_t ch = 0;
  std::vector<T> data;

  Activations() = default;
  Activations(std::size_t b, std::size_t l, std::size_t c)
      : batch(b), len(l), ch(c), data(b * l * c, T(0)) {}

  std::size_t per_item() const { return len * ch; }
  T* row(std::size_t b, std::size_t t) { return data.data() + (b * len + t) * ch; }
  const T* row(std::size_t b, std::size_t t) const { return data.data() + (b * len + t) * ch; }
};

// A named tensor owned by a layer. `grad` is null for non-trainable buffers.
template <typename T>
struct ParamRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T>* value = nullptr;
  std::vector<T>* grad = nullptr;
};

// Per-call state saved by forward() for backward().
template <typename T>
struct LayerCache {
  bool train = false;
  Activations<T> input;
  std::vector<T> aux;
  std::vector<T> aux2;
  std::vector<std::uint32_t> index;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string_view kind() const = 0;
  // `cache` may be null for inference; `rng` is only used by dropout in
  // train mode.
  virtual Activations<T> forward(const Activations<T>& in, bool train, Rng* rng,
                                 LayerCache<T>* cache) const = 0;
  // Returns the input gradient and accumulates parameter gradients.
  virtual Activations<T> backward(const Activations<T>& grad_out,
                                  const LayerCache<T>& cache) = 0;
  // State updates after a train-mode forward (batchnorm running stats).
  virtual void commit(const LayerCache<T>&) {}

  virtual std::vector<ParamRef<T>> params() { return {}; }
  virtual std::vector<ParamRef<T>> buffers() { return {}; }
  virtual std::unique_ptr<Layer<T>> clone() const = 0;
};

// 1-D convolution, stride 1, "same" padding (left pad (K-1)/2), no bias.
// Kernel layout [K][C_in][F].
template <typename T>
class Conv1d final : public Layer<T> {
 public:
  Conv1d(std::size_t in_ch, std::size_t filters, std::size_t width)
      : in_ch_(in_ch), filters_(filters), width_(width),
        weight_(width * in_ch * filters, T(0)), grad_(weight_.size(), T(0)) {}

  std::string_view kind() const override { return "conv1d"; }
  std::vector<T>& weight() { return weight_; }
  std::size_t fan_in() const { return width_ * in_ch_; }

  Activations<T> forward(const Activations<T>& in, bool train, Rng*,
                         LayerCache<T>* cache) const override {
    check_channels(in.ch, in_ch_, "conv1d");
    Activations<T> out(in.batch, in.len, filters_);
    const auto left = static_cast<std::ptrdiff_t>((width_ - 1) / 2);
    const auto len = static_cast<std::ptrdiff_t>(in.len);
    for (std::size_t b = 0; b < in.batch; ++b) {
      for (std::ptrdiff_t t = 0; t < len; ++t) {
        T* y = out.row(b, static_cast<std::size_t>(t));
        for (std::size_t k = 0; k < width_; ++k) {
          const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - left;
          if (src < 0 || src >= len) continue;
          const T* x = in.row(b, static_cast<std::size_t>(src));
          for (std::size_t c = 0; c < in_ch_; ++c) {
            const T xv = x[c];
            const T* w = weight_.data() + (k * in_ch_ + c) * filters_;
            for (std::size_t f = 0; f < filters_; ++f) y[f] += w[f] * xv;
          }
        }
      }
    }
    if (cache) {
      cache->train = train;
      cache->input = in;
    }
    return out;
  }

  Activations<T> backward(const Activations<T>& g, const LayerCache<T>& cache) override {
    const auto& in = cache.input;
    Activations<T> dx(in.batch, in.len, in.ch);
    const auto left = static_cast<std::ptrdiff_t>((width_ - 1) / 2);
    const auto len = static_cast<std::ptrdiff_t>(in.len);
    for (std::size_t b = 0; b < in.batch; ++b) {
      for (std::ptrdiff_t t = 0; t < len; ++t) {
        const T* gy = g.row(b, static_cast<std::size_t>(t));
        for (std::size_t k = 0; k < width_; ++k) {
          const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - left;
          if (src < 0 || src >= len) continue;
          const T* x = in.row(b, static_cast<std::size_t>(src));
          T* dxr = dx.row(b, static_cast<std::size_t>(src));
          for (std::size_t c = 0; c < in_ch_; ++c) {
            const T* w = weight_.data() + (k * in_ch_ + c) * filters_;
            T* dw = grad_.data() + (k * in_ch_ + c) * filters_;
            T acc = 0;
            const T xv = x[c];
            for (std::size_t f = 0; f < filters_; ++f) {
              acc += w[f] * gy[f];
              dw[f] += xv * gy[f];
            }
            dxr[c] += acc;
          }
        }
      }
    }
    return dx;
  }

  std::vector<ParamRef<T>> params() override {
    return {{"kernel", {width_, in_ch_, filters_}, &weight_, &grad_}};
  }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv1d>(*this); }

 private:
  static void check_channels(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(what) + ": expected " + std::to_string(want) +
                      " input channels, got " + std::to_string(got));
    }
  }

  std::size_t in_ch_, filters_, width_;
  std::vector<T> weight_, grad_;
};

// Batch normalization over all (batch, position) rows of each channel.
// Train mode normalizes with batch statistics (biased variance) and commit()
// folds them into the running estimates (unbiased variance) with momentum.
template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  explicit BatchNorm(std::size_t channels, T momentum = T(0.1), T eps = T(1e-5))
      : channels_(channels), momentum_(momentum), eps_(eps),
        gamma_(channels, T(1)), beta_(channels, T(0)),
        running_mean_(channels, T(0)), running_var_(channels, T(1)),
        dgamma_(channels, T(0)), dbeta_(channels, T(0)) {}

  std::string_view kind() const override { return "batchnorm"; }
  std::vector<T>& gamma() { return gamma_; }
  std::vector<T>& running_mean() { return running_mean_; }
  std::vector<T>& running_var() { return running_var_; }

  Activations<T> forward(const Activations<T>& in, bool train, Rng*,
                         LayerCache<T>* cache) const override {
    const std::size_t n = in.batch * in.len;
    const std::size_t c_n = channels_;
    std::vector<T> mean(c_n), inv_std(c_n), var_unbiased(c_n);
    if (train) {
      std::vector<double> s(c_n, 0.0), ss(c_n, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const T* x = in.data.data() + r * c_n;
        for (std::size_t c = 0; c < c_n; ++c) s[c] += x[c];
      }
      for (std::size_t c = 0; c < c_n; ++c) s[c] /= static_cast<double>(n);
      for (std::size_t r = 0; r < n; ++r) {
        const T* x = in.data.data() + r * c_n;
        for (std::size_t c = 0; c < c_n; ++c) {
          const double d = x[c] - s[c];
          ss[c] += d * d;
        }
      }
      for (std::size_t c = 0; c < c_n; ++c) {
        const double var = ss[c] / static_cast<double>(n);
        mean[c] = static_cast<T>(s[c]);
        inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps_)));
        var_unbiased[c] = static_cast<T>(n > 1 ? ss[c] / static_cast<double>(n - 1) : var);
      }
    } else {
      for (std::size_t c = 0; c < c_n; ++c) {
        mean[c] = running_mean_[c];
        inv_std[c] = T(1) / std::sqrt(running_var_[c] + eps_);
      }
    }
    Activations<T> out(in.batch, in.len, in.ch);
    std::vector<T> xhat(in.data.size());
    for (std::size_t r = 0; r < n; ++r) {
      const T* x = in.data.data() + r * c_n;
      T* y = out.data.data() + r * c_n;
      T* xh = xhat.data() + r * c_n;
      for (std::size_t c = 0; c < c_n; ++c) {
        xh[c] = (x[c] - mean[c]) * inv_std[c];
        y[c] = gamma_[c] * xh[c] + beta_[c];
      }
    }
    if (cache) {
      cache->train = train;
      cache->input = Activations<T>();
      cache->input.batch = in.batch;
      cache->input.len = in.len;
      cache->input.ch = in.ch;
      cache->aux = std::move(xhat);
      cache->aux2 = inv_std;
      cache->aux2.insert(cache->aux2.end(), mean.begin(), mean.end());
      cache->aux2.insert(cache->aux2.end(), var_unbiased.begin(), var_unbiased.end());
    }
    return out;
  }

  Activations<T> backward(const Activations<T>& g, const LayerCache<T>& cache) override {
    const std::size_t c_n = channels_;
    const std::size_t n = cache.input.batch * cache.input.len;
    const T* xhat = cache.aux.data();
    const T* inv_std = cache.aux2.data();
    Activations<T> dx(cache.input.batch, cache.input.len, cache.input.ch);
    std::vector<T> sum_g(c_n, T(0)), sum_gx(c_n, T(0));
    for (std::size_t r = 0; r < n; ++r) {
      const T* gr = g.data.data() + r * c_n;
      const T* xh = xhat + r * c_n;
      for (std::size_t c = 0; c < c_n; ++c) {
        sum_g[c] += gr[c];
        sum_gx[c] += gr[c] * xh[c];
      }
    }
    for (std::size_t c = 0; c < c_n; ++c) {
      dgamma_[c] += sum_gx[c];
      dbeta_[c] += sum_g[c];
    }
    const T inv_n = T(1) / static_cast<T>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const T* gr = g.data.data() + r * c_n;
      const T* xh = xhat + r * c_n;
      T* d = dx.data.data() + r * c_n;
      for (std::size_t c = 0; c < c_n; ++c) {
        if (cache.train) {
          // d/dx of gamma * xhat with batch statistics.
          d[c] = gamma_[c] * inv_std[c] *
                 (gr[c] - inv_n * sum_g[c] - xh[c] * inv_n * sum_gx[c]);
        } else {
          d[c] = gr[c] * gamma_[c] * inv_std[c];
        }
      }
    }
    return dx;
  }

  void commit(const LayerCache<T>& cache) override {
    if (!cache.train) return;
    const T* mean = cache.aux2.data() + channels_;
    const T* var = cache.aux2.data() + 2 * channels_;
    for (std::size_t c = 0; c < channels_; ++c) {
      running_mean_[c] = (T(1) - momentum_) * running_mean_[c] + momentum_ * mean[c];
      running_var_[c] = (T(1) - momentum_) * running_var_[c] + momentum_ * var[c];
    }
  }

  std::vector<ParamRef<T>> params() override {
    return {{"gamma", {channels_}, &gamma_, &dgamma_}, {"beta", {channels_}, &beta_, &dbeta_}};
  }
  std::vector<ParamRef<T>> buffers() override {
    return {{"running_mean", {channels_}, &running_mean_, nullptr},
            {"running_var", {channels_}, &running_var_, nullptr}};
  }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<BatchNorm>(*this); }

 private:
  std::size_t channels_;
  T momentum_, eps_;
  std::vector<T> gamma_, beta_, running_mean_, running_var_;
  std::vector<T> dgamma_, dbeta_;
};

enum class Activation { kRelu, kTanh };

template <typename T>
class ActivationLayer final : public Layer<T> {
 public:
  explicit ActivationLayer(Activation fn) : fn_(fn) {}

  std::string_view kind() const override { return fn_ == Activation::kRelu ? "relu" : "tanh"; }

  Activations<T> forward(const Activations<T>& in, bool train, Rng*,
                         LayerCache<T>* cache) const override {
    Activations<T> out(in.batch, in.len, in.ch);
    for (std::size_t i = 0; i < in.data.size(); ++i) {
      out.data[i] = fn_ == Activation::kRelu ? (in.data[i] > T(0) ? in.data[i] : T(0))
                                             : std::tanh(in.data[i]);
    }
    if (cache) {
      cache->train = train;
      cache->input = in;
    }
    return out;
  }

  Activations<T> backward(const Activations<T>& g, const LayerCache<T>& cache) override {
    Activations<T> dx(g.batch, g.len, g.ch);
    const auto& x = cache.input.data;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      if (fn_ == Activation::kRelu) {
        dx.data[i] = x[i] > T(0) ? g.data[i] : T(0);
      } else {
        const T y = std::tanh(x[i]);
        dx.data[i] = g.data[i] * (T(1) - y * y);
      }
    }
    return dx;
  }

  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<ActivationLayer>(*this);
  }

 private:
  Activation fn_;
};

// Non-overlapping max pooling over positions; output length floor(L / width).
// Ties resolve to the first maximum.
template <typename T>
class MaxPool1d final : public Layer<T> {
 public:
  explicit MaxPool1d(std::size_t width) : width_(width) {}

  std::string_view kind() const override { return "maxpool"; }

  Activations<T> forward(const Activations<T>& in, bool train, Rng*,
                         LayerCache<T>* cache) const override {
    const std::size_t out_len = in.len / width_;
    Activations<T> out(in.batch, out_len, in.ch);
    std::vector<std::uint32_t> arg(out.data.size());
    for (std::size_t b = 0; b < in.batch; ++b) {
      for (std::size_t t = 0; t < out_len; ++t) {
        T* y = out.row(b, t);
        std::uint32_t* a = arg.data() + (b * out_len + t) * in.ch;
        for (std::size_t c = 0; c < in.ch; ++c) {
          std::size_t best = t * width_;
          for (std::size_t s = t * width_ + 1; s < (t + 1) * width_; ++s) {
            if (in.row(b, s)[c] > in.row(b, best)[c]) best = s;
          }
          y[c] = in.row(b, best)[c];
          a[c] = static_cast<std::uint32_t>(best);
        }
      }
    }
    if (cache) {
      cache->train = train;
      cache->input = Activations<T>();
      cache->input.batch = in.batch;
      cache->input.len = in.len;
      cache->input.ch = in.ch;
      cache->index = std::move(arg);
    }
    return out;
  }

  Activations<T> backward(const Activations<T>& g, const LayerCache<T>& cache) override {
    Activations<T> dx(cache.input.batch, cache.input.len, cache.input.ch);
    for (std::size_t b = 0; b < g.batch; ++b) {
      for (std::size_t t = 0; t < g.len; ++t) {
        const T* gy = g.row(b, t);
        const std::uint32_t* a = cache.index.data() + (b * g.len + t) * g.ch;
        for (std::size_t c = 0; c < g.ch; ++c) dx.row(b, a[c])[c] += gy[c];
      }
    }
    return dx;
  }

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool1d>(*this); }

 private:
  std::size_t width_;
};

// Inverted dropout: train mode keeps each unit with probability 1 - rate and
// scales kept units by 1 / (1 - rate); eval mode is the identity.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  explicit Dropout(double rate) : rate_(rate) {}

  std::string_view kind() const override { return "dropout"; }

  Activations<T> forward(const Activations<T>& in, bool train, Rng* rng,
                         LayerCache<T>* cache) const override {
    Activations<T> out = in;
    std::vector<T> mask;
    if (train && rate_ > 0.0) {
      if (!rng) throw Error(ErrorCode::kInvalidArgument, "train-mode dropout needs an rng");
      const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
      mask.resize(in.data.size());
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = rng->uniform01() < rate_ ? T(0) : keep_scale;
        out.data[i] *= mask[i];
      }
    }
    if (cache) {
      cache->train = train;
      cache->input = Activations<T>();
      cache->input.batch = in.batch;
      cache->input.len = in.len;
      cache->input.ch = in.ch;
      cache->aux = std::move(mask);
    }
    return out;
  }

  Activations<T> backward(const Activations<T>& g, const LayerCache<T>& cache) override {
    Activations<T> dx = g;
    if (!cache.aux.empty()) {
      for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= cache.aux[i];
    }
    return dx;
  }

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }

 private:
  double rate_;
};

// Fully connected layer on the flattened input: y = x W + b, W laid out
// [in][out]. Output has a single position.
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features)
      : in_(in_features), out_(out_features), weight_(in_features * out_features, T(0)),
        bias_(out_features, T(0)), dweight_(weight_.size(), T(0)), dbias_(out_features, T(0)) {}

  std::string_view kind() const override { return "dense"; }
  std::vector<T>& weight() { return weight_; }
  std::vector<T>& bias() { return bias_; }
  std::size_t fan_in() const { return in_; }
  std::size_t fan_out() const { return out_; }

  Activations<T> forward(const Activations<T>& in, bool train, Rng*,
                         LayerCache<T>* cache) const override {
    if (in.per_item() != in_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "dense: expected " + std::to_string(in_) + " inputs, got " +
                      std::to_string(in.per_item()));
    }
    Activations<T> out(in.batch, 1, out_);
    for (std::size_t b = 0; b < in.batch; ++b) {
      const T* x = in.data.data() + b * in_;
      T* y = out.row(b, 0);
      for (std::size_t o = 0; o < out_; ++o) y[o] = bias_[o];
      for (std::size_t i = 0; i < in_; ++i) {
        const T xv = x[i];
        const T* w = weight_.data() + i * out_;
        for (std::size_t o = 0; o < out_; ++o) y[o] += w[o] * xv;
      }
    }
    if (cache) {
      cache->train = train;
      cache->input = in;
    }
    return out;
  }

  Activations<T> backward(const Activations<T>& g, const LayerCache<T>& cache) override {
    const auto& in = cache.input;
    Activations<T> dx(in.batch, in.len, in.ch);
    for (std::size_t b = 0; b < in.batch; ++b) {
      const T* x = in.data.data() + b * in_;
      const T* gy = g.row(b, 0);
      T* d = dx.data.data() + b * in_;
      for (std::size_t o = 0; o < out_; ++o) dbias_[o] += gy[o];
      for (std::size_t i = 0; i < in_; ++i) {
        const T* w = weight_.data() + i * out_;
        T* dw = dweight_.data() + i * out_;
        const T xv = x[i];
        T acc = 0;
        for (std::size_t o = 0; o < out_; ++o) {
          acc += w[o] * gy[o];
          dw[o] += xv * gy[o];
        }
        d[i] = acc;
      }
    }
    return dx;
  }

  std::vector<ParamRef<T>> params() override {
    return {{"weight", {in_, out_}, &weight_, &dweight_}, {"bias", {out_}, &bias_, &dbias_}};
  }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }

 private:
  std::size_t in_, out_;
  std::vector<T> weight_, bias_, dweight_, dbias_;
};

// Token-id lookup table, [vocab][dim].
template <typename T>
class Embedding {
 public:
  Embedding() = default;
  Embedding(std::size_t vocab, std::size_t dim)
      : vocab_(vocab), dim_(dim), table_(vocab * dim, T(0)), grad_(table_.size(), T(0)) {}

  std::vector<T>& table() { return table_; }
  std::size_t dim() const { return dim_; }

  Activations<T> forward(std::span<const std::int32_t> ids, std::size_t batch,
                         std::size_t len) const {
    Activations<T> out(batch, len, dim_);
    for (std::size_t i = 0; i < batch * len; ++i) {
      const auto id = ids[i];
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_) {
        throw Error(ErrorCode::kInvalidArgument,
                    "token id " + std::to_string(id) + " outside alphabet");
      }
      const T* e = table_.data() + static_cast<std::size_t>(id) * dim_;
      std::copy(e, e + dim_, out.data.data() + i * dim_);
    }
    return out;
  }

  void backward(std::span<const std::int32_t> ids, const Activations<T>& g) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      T* d = grad_.data() + static_cast<std::size_t>(ids[i]) * dim_;
      const T* gr = g.data.data() + i * dim_;
      for (std::size_t k = 0; k < dim_; ++k) d[k] += gr[k];
    }
  }

  ParamRef<T> param() { return {"table", {vocab_, dim_}, &table_, &grad_}; }

 private:
  std::size_t vocab_ = 0, dim_ = 0;
  std::vector<T> table_, grad_;
};

// Row-wise softmax of [batch][1][classes] logits.
template <typename T>
Activations<T> softmax(const Activations<T>& logits) {
  Activations<T> p(logits.batch, 1, logits.per_item());
  const std::size_t k = logits.per_item();
  for (std::size_t b = 0; b < logits.batch; ++b) {
    const T* z = logits.data.data() + b * k;
    T* out = p.data.data() + b * k;
    T mx = z[0];
    for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, z[i]);
    T sum = 0;
    for (std::size_t i = 0; i < k; ++i) sum += (out[i] = std::exp(z[i] - mx));
    for (std::size_t i = 0; i < k; ++i) out[i] /= sum;
  }
  return p;
}

// Mean cross-entropy of softmax(logits) against integer labels; writes
// d(loss)/d(logits) into *grad when non-null.
template <typename T>
T softmax_cross_entropy(const Activations<T>& logits, std::span<const std::int32_t> labels,
                        Activations<T>* grad) {
  const auto p = softmax(logits);
  const std::size_t k = logits.per_item();
  T loss = 0;
  if (grad) *grad = Activations<T>(logits.batch, logits.len, logits.ch);
  const T inv_b = T(1) / static_cast<T>(logits.batch);
  for (std::size_t b = 0; b < logits.batch; ++b) {
    const auto y = static_cast<std::size_t>(labels[b]);
    const T* pr = p.data.data() + b * k;
    loss -= std::log(std::max(pr[y], std::numeric_limits<T>::min()));
    if (grad) {
      T* gr = grad->data.data() + b * k;
      for (std::size_t i = 0; i < k; ++i) gr[i] = (pr[i] - (i == y ? T(1) : T(0))) * inv_b;
    }
  }
  return loss * inv_b;
}

}  // namespace honeyfilter::nn
