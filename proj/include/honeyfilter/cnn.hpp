#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "honeyfilter/cnn_layers.hpp"
#include "honeyfilter/corpus.hpp"

namespace honeyfilter {

struct ConvBlockSpec {
  std::size_t filters = 32;
  std::size_t kernel_width = 3;
  std::size_t pool_width = 2;
  double dropout = 0.2;
};

struct DenseBlockSpec {
  std::size_t units = 128;
  double dropout = 0.5;
};

// Embedding, then conv blocks (conv -> batchnorm -> activation -> max-pool ->
// dropout), flatten, dense blocks (dense -> batchnorm -> activation ->
// dropout), and a 2-way dense head followed by softmax.
struct CnnArch {
  std::size_t alphabet_size = 0;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t embed_dim = 32;
  std::vector<ConvBlockSpec> conv;
  std::vector<DenseBlockSpec> dense;
  nn::Activation activation = nn::Activation::kRelu;

  // Five conv blocks (filters 32,32,64,64,64; kernel 3; pool 2; dropout 0.2)
  // and two dense blocks (128, 64 units; dropout 0.5).
  static CnnArch defaults(std::size_t alphabet_size, std::size_t max_len = kDefaultMaxLen);

  // Sequence length entering each conv block plus the final length:
  // len[l+1] = floor(len[l] / pool_width[l]).
  std::vector<std::size_t> sequence_lengths() const;
  // Throws kInvalidArgument for zero widths, dropout outside [0, 1), or a
  // sequence that shrinks below one position.
  void validate() const;
  std::size_t flattened_size() const;
};

template <typename T>
class CnnModel {
 public:
  static constexpr std::size_t kClasses = 2;

  CnnModel() = default;
  // Fan-in scaled uniform init: conv/dense U(+-sqrt(6 / fan_in)), head
  // U(+-sqrt(6 / (fan_in + fan_out))), embedding U(+-0.05), biases 0,
  // batchnorm gamma 1 / beta 0 / running stats (0, 1).
  CnnModel(const CnnArch& arch, std::uint64_t seed);
  CnnModel(const CnnModel& other);
  CnnModel& operator=(const CnnModel& other);
  CnnModel(CnnModel&&) noexcept = default;
  CnnModel& operator=(CnnModel&&) noexcept = default;

  const CnnArch& arch() const { return arch_; }

  // Logits [batch][1][2] for row-major token ids [batch][max_len]. Throws
  // kNonFinite naming the first layer that produced a non-finite value.
  nn::Activations<T> logits(std::span<const std::int32_t> ids, std::size_t batch,
                            bool train = false, Rng* rng = nullptr) const;

  // Class probabilities [batch][2] in eval mode; column 1 is "password".
  std::vector<T> predict(std::span<const std::int32_t> ids, std::size_t batch) const;

  // Clears gradients, runs forward (caching), computes the mean cross-entropy
  // and backpropagates into every parameter gradient. In train mode the
  // batchnorm running statistics are updated.
  T loss_and_gradients(std::span<const std::int32_t> ids, std::size_t batch,
                       std::span<const std::int32_t> labels, bool train, Rng* rng);

  std::vector<nn::ParamRef<T>> params();
  std::vector<nn::ParamRef<T>> buffers();
  void zero_grad();

  // Copy of this model in another scalar type.
  template <typename U>
  CnnModel<U> cast() const;

 private:
  template <typename U>
  friend class CnnModel;

  void build();

  CnnArch arch_;
  nn::Embedding<T> embedding_;
  std::vector<std::unique_ptr<nn::Layer<T>>> layers_;
  std::vector<std::string> layer_names_;  // empty for parameter-free layers
};

extern template class CnnModel<float>;
extern template class CnnModel<double>;

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  // Stop after this many epochs without a validation-loss improvement;
  // 0 disables early stopping.
  std::size_t patience = 3;

  void validate() const;
};

class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& config) : config_(config) {}
  void step(std::vector<nn::ParamRef<float>>& params);
  std::size_t steps() const { return t_; }

 private:
  TrainConfig config_;
  std::size_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

// One optimizer update on a mini-batch; returns the pre-update loss. Throws
// kNonFinite on a non-finite loss or gradient.
float backward_and_step(CnnModel<float>& model, std::span<const std::int32_t> ids,
                        std::size_t batch, std::span<const std::int32_t> labels,
                        Optimizer& optimizer, Rng& dropout_rng);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; 0 means the initial model was kept
  bool early_stopped = false;

  // epoch,train_loss,val_loss,val_acc
  std::string to_csv() const;
};

// A trained network bundled with the tokenization it expects.
class Classifier {
 public:
  Classifier(CnnModel<float> model, Alphabet alphabet);

  const CnnModel<float>& model() const { return model_; }
  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t max_len() const { return model_.arch().max_len; }

  // Probability that `word` is a real password (softmax class 1).
  double score(std::string_view word) const;
  // (P(honeyword), P(password)).
  std::pair<double, double> probabilities(std::string_view word) const;
  std::vector<double> score_batch(std::span<const std::string> words) const;

  // Versioned little-endian checkpoint: header JSON (architecture, alphabet)
  // followed by named float32 tensors.
  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);

 private:
  CnnModel<float> model_;
  Alphabet alphabet_;
};

struct TrainResult {
  Classifier classifier;
  TrainHistory history;
};

struct EvalMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mini-batch training with a seeded shuffle per epoch. Returns the snapshot
// with the lowest validation loss (the last epoch when `val` is empty).
TrainResult train_classifier(const CnnArch& arch, const Alphabet& alphabet,
                             std::span<const LabeledPair> pairs,
                             std::span<const LabeledPair> val, const TrainConfig& config);

EvalMetrics evaluate_classifier(const Classifier& classifier,
                                std::span<const LabeledPair> pairs);

// Row-major [words][max_len] token ids.
std::vector<std::int32_t> tokenize_batch(std::span<const std::string> words,
                                         const Alphabet& alphabet, std::size_t max_len);

}  // namespace honeyfilter
