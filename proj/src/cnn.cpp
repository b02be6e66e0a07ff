#include "honeyfilter/cnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "honeyfilter/error.hpp"
#include "honeyfilter/config.hpp"
#include "honeyfilter/log.hpp"

namespace honeyfilter {

using nn::Activations;
using nn::ParamRef;

CnnArch CnnArch::defaults(std::size_t alphabet_size, std::size_t max_len) {
  CnnArch arch;
  arch.alphabet_size = alphabet_size;
  arch.max_len = max_len;
  arch.embed_dim = 32;
  for (std::size_t filters : {32, 32, 64, 64, 64}) {
    arch.conv.push_back({filters, 3, 2, 0.2});
  }
  arch.dense = {{128, 0.5}, {64, 0.5}};
  return arch;
}

std::vector<std::size_t> CnnArch::sequence_lengths() const {
  std::vector<std::size_t> lens{max_len};
  for (const auto& block : conv) {
    lens.push_back(block.pool_width ? lens.back() / block.pool_width : 0);
  }
  return lens;
}

std::size_t CnnArch::flattened_size() const {
  const std::size_t channels = conv.empty() ? embed_dim : conv.back().filters;
  return sequence_lengths().back() * channels;
}

void CnnArch::validate() const {
  auto bad = [](const std::string& why) { return Error(ErrorCode::kInvalidArgument, why); };
  if (alphabet_size < 3) throw bad("alphabet_size must be >= 3");
  if (max_len < 1 || embed_dim < 1) throw bad("max_len and embed_dim must be >= 1");
  for (std::size_t l = 0; l < conv.size(); ++l) {
    const auto& b = conv[l];
    if (b.filters < 1 || b.kernel_width < 1 || b.pool_width < 1) {
      throw bad("conv block " + std::to_string(l) + " has a zero width");
    }
    if (!(b.dropout >= 0.0 && b.dropout < 1.0)) throw bad("dropout must lie in [0, 1)");
  }
  for (const auto& d : dense) {
    if (d.units < 1) throw bad("dense units must be >= 1");
    if (!(d.dropout >= 0.0 && d.dropout < 1.0)) throw bad("dropout must lie in [0, 1)");
  }
  const auto lens = sequence_lengths();
  for (std::size_t l = 1; l < lens.size(); ++l) {
    if (lens[l] < 1) {
      throw bad("sequence length drops to 0 after conv block " + std::to_string(l - 1) +
                " (max_len " + std::to_string(max_len) + ")");
    }
  }
}

template <typename T>
void CnnModel<T>::build() {
  embedding_ = nn::Embedding<T>(arch_.alphabet_size, arch_.embed_dim);
  layers_.clear();
  layer_names_.clear();
  auto add = [this](std::unique_ptr<nn::Layer<T>> layer, std::string name) {
    layers_.push_back(std::move(layer));
    layer_names_.push_back(std::move(name));
  };
  std::size_t channels = arch_.embed_dim;
  for (std::size_t l = 0; l < arch_.conv.size(); ++l) {
    const auto& b = arch_.conv[l];
    const std::string prefix = "conv" + std::to_string(l);
    add(std::make_unique<nn::Conv1d<T>>(channels, b.filters, b.kernel_width), prefix);
    add(std::make_unique<nn::BatchNorm<T>>(b.filters), prefix + ".bn");
    add(std::make_unique<nn::ActivationLayer<T>>(arch_.activation), "");
    add(std::make_unique<nn::MaxPool1d<T>>(b.pool_width), "");
    add(std::make_unique<nn::Dropout<T>>(b.dropout), "");
    channels = b.filters;
  }
  std::size_t features = arch_.flattened_size();
  for (std::size_t j = 0; j < arch_.dense.size(); ++j) {
    const auto& d = arch_.dense[j];
    const std::string prefix = "dense" + std::to_string(j);
    add(std::make_unique<nn::Dense<T>>(features, d.units), prefix);
    add(std::make_unique<nn::BatchNorm<T>>(d.units), prefix + ".bn");
    add(std::make_unique<nn::ActivationLayer<T>>(arch_.activation), "");
    add(std::make_unique<nn::Dropout<T>>(d.dropout), "");
    features = d.units;
  }
  add(std::make_unique<nn::Dense<T>>(features, kClasses), "head");
}

template <typename T>
CnnModel<T>::CnnModel(const CnnArch& arch, std::uint64_t seed) : arch_(arch) {
  arch_.validate();
  build();
  Rng rng(seed);
  for (auto& v : embedding_.table()) v = static_cast<T>(rng.uniform(-0.05, 0.05));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto* layer = layers_[i].get();
    if (auto* conv = dynamic_cast<nn::Conv1d<T>*>(layer)) {
      const double bound = std::sqrt(6.0 / static_cast<double>(conv->fan_in()));
      for (auto& w : conv->weight()) w = static_cast<T>(rng.uniform(-bound, bound));
    } else if (auto* dense = dynamic_cast<nn::Dense<T>*>(layer)) {
      const bool head = i + 1 == layers_.size();
      const double fan = head ? static_cast<double>(dense->fan_in() + dense->fan_out())
                              : static_cast<double>(dense->fan_in());
      const double bound = std::sqrt(6.0 / fan);
      for (auto& w : dense->weight()) w = static_cast<T>(rng.uniform(-bound, bound));
    }
  }
}

template <typename T>
CnnModel<T>::CnnModel(const CnnModel& other)
    : arch_(other.arch_), embedding_(other.embedding_), layer_names_(other.layer_names_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
CnnModel<T>& CnnModel<T>::operator=(const CnnModel& other) {
  if (this != &other) {
    CnnModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

namespace {

template <typename T>
void require_finite(const Activations<T>& x, std::size_t layer, std::string_view kind) {
  for (T v : x.data) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "non-finite activation at layer " +
                                             std::to_string(layer) + " (" +
                                             std::string(kind) + ")");
    }
  }
}

}  // namespace

template <typename T>
Activations<T> CnnModel<T>::logits(std::span<const std::int32_t> ids, std::size_t batch,
                                   bool train, Rng* rng) const {
  if (ids.size() != batch * arch_.max_len) {
    throw Error(ErrorCode::kInvalidArgument, "token batch has the wrong size");
  }
  Activations<T> x = embedding_.forward(ids, batch, arch_.max_len);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x, train, rng, nullptr);
    require_finite(x, i, layers_[i]->kind());
  }
  return x;
}

template <typename T>
std::vector<T> CnnModel<T>::predict(std::span<const std::int32_t> ids,
                                    std::size_t batch) const {
  return nn::softmax(logits(ids, batch, false, nullptr)).data;
}

template <typename T>
T CnnModel<T>::loss_and_gradients(std::span<const std::int32_t> ids, std::size_t batch,
                                  std::span<const std::int32_t> labels, bool train,
                                  Rng* rng) {
  if (labels.size() != batch) throw Error(ErrorCode::kInvalidArgument, "label count mismatch");
  for (auto y : labels) {
    if (y < 0 || y >= static_cast<std::int32_t>(kClasses)) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0 (honeyword) or 1 (password)");
    }
  }
  zero_grad();
  std::vector<nn::LayerCache<T>> caches(layers_.size());
  Activations<T> x = embedding_.forward(ids, batch, arch_.max_len);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x, train, rng, &caches[i]);
    require_finite(x, i, layers_[i]->kind());
  }
  Activations<T> g;
  const T loss = nn::softmax_cross_entropy(x, labels, &g);
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, caches[i]);
  embedding_.backward(ids, g);
  if (train) {
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->commit(caches[i]);
  }
  return loss;
}

template <typename T>
std::vector<ParamRef<T>> CnnModel<T>::params() {
  std::vector<ParamRef<T>> out;
  auto emb = embedding_.param();
  emb.name = "embedding.table";
  out.push_back(emb);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto p : layers_[i]->params()) {
      p.name = layer_names_[i] + "." + p.name;
      out.push_back(std::move(p));
    }
  }
  return out;
}

template <typename T>
std::vector<ParamRef<T>> CnnModel<T>::buffers() {
  std::vector<ParamRef<T>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto p : layers_[i]->buffers()) {
      p.name = layer_names_[i] + "." + p.name;
      out.push_back(std::move(p));
    }
  }
  return out;
}

template <typename T>
void CnnModel<T>::zero_grad() {
  for (auto& p : params()) std::fill(p.grad->begin(), p.grad->end(), T(0));
}

template <typename T>
template <typename U>
CnnModel<U> CnnModel<T>::cast() const {
  CnnModel<U> out;
  out.arch_ = arch_;
  out.build();
  auto& self = const_cast<CnnModel<T>&>(*this);
  auto copy = [](auto from, auto to) {
    for (std::size_t i = 0; i < from.size(); ++i) {
      std::transform(from[i].value->begin(), from[i].value->end(), to[i].value->begin(),
                     [](T v) { return static_cast<U>(v); });
    }
  };
  copy(self.params(), out.params());
  copy(self.buffers(), out.buffers());
  return out;
}

template class CnnModel<float>;
template class CnnModel<double>;
template CnnModel<double> CnnModel<float>::cast<double>() const;
template CnnModel<float> CnnModel<double>::cast<float>() const;
template CnnModel<float> CnnModel<float>::cast<float>() const;
template CnnModel<double> CnnModel<double>::cast<double>() const;

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
}

void Optimizer::step(std::vector<ParamRef<float>>& params) {
  ++t_;
  const auto lr = static_cast<float>(config_.learning_rate);
  if (config_.optimizer == OptimizerKind::kSgd) {
    for (auto& p : params) {
      auto& w = *p.value;
      const auto& g = *p.grad;
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    }
    return;
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value->size(), 0.0f);
      v_.emplace_back(p.value->size(), 0.0f);
    }
  }
  const double t = static_cast<double>(t_);
  const auto b1 = static_cast<float>(config_.beta1);
  const auto b2 = static_cast<float>(config_.beta2);
  const auto step = static_cast<float>(config_.learning_rate *
                                       std::sqrt(1.0 - std::pow(config_.beta2, t)) /
                                       (1.0 - std::pow(config_.beta1, t)));
  const auto eps = static_cast<float>(config_.epsilon);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& w = *params[k].value;
    const auto& g = *params[k].grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      w[i] -= step * m[i] / (std::sqrt(v[i]) + eps);
    }
  }
}

float backward_and_step(CnnModel<float>& model, std::span<const std::int32_t> ids,
                        std::size_t batch, std::span<const std::int32_t> labels,
                        Optimizer& optimizer, Rng& dropout_rng) {
  const float loss = model.loss_and_gradients(ids, batch, labels, true, &dropout_rng);
  if (!std::isfinite(loss)) throw Error(ErrorCode::kNonFinite, "non-finite training loss");
  auto params = model.params();
  for (const auto& p : params) {
    for (float g : *p.grad) {
      if (!std::isfinite(g)) {
        throw Error(ErrorCode::kNonFinite, "non-finite gradient in " + p.name);
      }
    }
  }
  optimizer.step(params);
  return loss;
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out.precision(9);
  out << "epoch,train_loss,val_loss,val_acc\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_acc << '\n';
  }
  return out.str();
}

std::vector<std::int32_t> tokenize_batch(std::span<const std::string> words,
                                         const Alphabet& alphabet, std::size_t max_len) {
  std::vector<std::int32_t> ids;
  ids.reserve(words.size() * max_len);
  for (const auto& w : words) {
    const auto seq = tokenize(w, alphabet, max_len);
    ids.insert(ids.end(), seq.ids.begin(), seq.ids.end());
  }
  return ids;
}

Classifier::Classifier(CnnModel<float> model, Alphabet alphabet)
    : model_(std::move(model)), alphabet_(std::move(alphabet)) {
  if (alphabet_.size() > model_.arch().alphabet_size) {
    throw Error(ErrorCode::kInvalidArgument, "alphabet larger than the model's embedding table");
  }
}

std::vector<double> Classifier::score_batch(std::span<const std::string> words) const {
  constexpr std::size_t kChunk = 512;
  std::vector<double> scores;
  scores.reserve(words.size());
  for (std::size_t start = 0; start < words.size(); start += kChunk) {
    const auto part = words.subspan(start, std::min(kChunk, words.size() - start));
    const auto ids = tokenize_batch(part, alphabet_, max_len());
    const auto probs = model_.predict(ids, part.size());
    for (std::size_t i = 0; i < part.size(); ++i) scores.push_back(probs[i * 2 + 1]);
  }
  return scores;
}

std::pair<double, double> Classifier::probabilities(std::string_view word) const {
  const std::string w(word);
  const auto ids = tokenize_batch(std::span<const std::string>(&w, 1), alphabet_, max_len());
  const auto probs = model_.predict(ids, 1);
  return {probs[0], probs[1]};
}

double Classifier::score(std::string_view word) const { return probabilities(word).second; }

namespace {

constexpr char kCkptMagic[8] = {'H', 'F', 'C', 'N', 'N', 'C', 'K', '1'};
constexpr std::uint32_t kCkptVersion = 1;

static_assert(std::endian::native == std::endian::little);

template <typename V>
void put(std::ostream& out, const V& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!in) throw Error(ErrorCode::kParse, "truncated checkpoint");
  return v;
}

}  // namespace

void Classifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  nlohmann::json header;
  header["format"] = "honeyfilter-cnn";
  header["version"] = kCkptVersion;
  header["arch"] = arch_to_json(model_.arch());
  std::vector<std::uint32_t> chars(alphabet_.chars().begin(), alphabet_.chars().end());
  header["alphabet"] = chars;
  const std::string text = header.dump();

  out.write(kCkptMagic, sizeof kCkptMagic);
  put(out, kCkptVersion);
  put(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  auto& model = const_cast<CnnModel<float>&>(model_);
  auto tensors = model.params();
  for (auto& b : model.buffers()) tensors.push_back(b);
  put(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(t.value->data()),
              static_cast<std::streamsize>(t.value->size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Classifier Classifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kCkptMagic)) {
    throw Error(ErrorCode::kParse, path.string() + " is not a classifier checkpoint");
  }
  if (get<std::uint32_t>(in) != kCkptVersion) {
    throw Error(ErrorCode::kParse, "unsupported checkpoint version");
  }
  std::string text(get<std::uint64_t>(in), '\0');
  in.read(text.data(), static_cast<std::streamsize>(text.size()));
  if (!in) throw Error(ErrorCode::kParse, "truncated checkpoint header");
  nlohmann::json header;
  CnnArch arch;
  std::vector<char32_t> chars;
  try {
    header = nlohmann::json::parse(text);
    arch = arch_from_json(header.at("arch"));
    for (auto c : header.at("alphabet")) chars.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad checkpoint header: ") + e.what());
  }

  CnnModel<float> model(arch, 0);
  auto tensors = model.params();
  for (auto& b : model.buffers()) tensors.push_back(b);
  const auto count = get<std::uint32_t>(in);
  if (count != tensors.size()) throw Error(ErrorCode::kParse, "checkpoint tensor count mismatch");
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name(get<std::uint32_t>(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    std::vector<std::size_t> shape(get<std::uint32_t>(in));
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(in));
    auto it = std::find_if(tensors.begin(), tensors.end(),
                           [&](const auto& t) { return t.name == name; });
    if (it == tensors.end() || it->shape != shape) {
      throw Error(ErrorCode::kParse, "unexpected checkpoint tensor '" + name + "'");
    }
    in.read(reinterpret_cast<char*>(it->value->data()),
            static_cast<std::streamsize>(it->value->size() * sizeof(float)));
    if (!in) throw Error(ErrorCode::kParse, "truncated tensor '" + name + "'");
  }
  return Classifier(std::move(model), Alphabet(std::move(chars)));
}

EvalMetrics evaluate_classifier(const Classifier& classifier,
                                std::span<const LabeledPair> pairs) {
  EvalMetrics m;
  if (pairs.empty()) return m;
  std::vector<std::string> words;
  words.reserve(pairs.size());
  for (const auto& p : pairs) words.push_back(p.word);
  const auto scores = classifier.score_batch(words);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool is_password = pairs[i].label == Label::kPassword;
    const double p = is_password ? scores[i] : 1.0 - scores[i];
    loss -= std::log(std::max(p, 1e-300));
    if ((scores[i] > 0.5) == is_password) ++correct;
  }
  m.loss = loss / static_cast<double>(pairs.size());
  m.accuracy = static_cast<double>(correct) / static_cast<double>(pairs.size());
  return m;
}

TrainResult train_classifier(const CnnArch& arch, const Alphabet& alphabet,
                             std::span<const LabeledPair> pairs,
                             std::span<const LabeledPair> val, const TrainConfig& config) {
  config.validate();
  arch.validate();
  const auto positives = static_cast<std::size_t>(std::count_if(
      pairs.begin(), pairs.end(), [](const auto& p) { return p.label == Label::kPassword; }));
  if (positives * 2 != pairs.size()) {
    log_warning("training pairs are not class-balanced (" + std::to_string(positives) +
                " passwords of " + std::to_string(pairs.size()) + ")");
  }

  std::vector<std::string> words;
  std::vector<std::int32_t> labels;
  for (const auto& p : pairs) {
    words.push_back(p.word);
    labels.push_back(static_cast<std::int32_t>(p.label));
  }
  const auto ids = tokenize_batch(words, alphabet, arch.max_len);

  CnnModel<float> model(arch, derive_seed(config.seed, "cnn.init"));
  TrainHistory history;
  if (config.epochs == 0 || pairs.empty()) {
    return {Classifier(std::move(model), alphabet), history};
  }

  CnnModel<float> best = model;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  Optimizer optimizer(config);
  Rng dropout_rng(derive_seed(config.seed, "cnn.dropout"));
  const std::uint64_t shuffle_seed = derive_seed(config.seed, "cnn.shuffle");
  std::vector<std::size_t> order(pairs.size());
  std::vector<std::int32_t> batch_ids;
  std::vector<std::int32_t> batch_labels;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(derive_seed(shuffle_seed, epoch));
    shuffle.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      batch_ids.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < start + n; ++i) {
        const auto row = ids.begin() + static_cast<std::ptrdiff_t>(order[i] * arch.max_len);
        batch_ids.insert(batch_ids.end(), row, row + static_cast<std::ptrdiff_t>(arch.max_len));
        batch_labels.push_back(labels[order[i]]);
      }
      loss_sum += static_cast<double>(
                      backward_and_step(model, batch_ids, n, batch_labels, optimizer, dropout_rng)) *
                  static_cast<double>(n);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    if (!val.empty()) {
      const auto metrics = evaluate_classifier(Classifier(model, alphabet), val);
      if (!std::isfinite(metrics.loss)) {
        throw Error(ErrorCode::kNonFinite, "validation loss diverged at epoch " +
                                               std::to_string(epoch));
      }
      record.val_loss = metrics.loss;
      record.val_acc = metrics.accuracy;
    }
    history.epochs.push_back(record);

    if (val.empty()) {
      best = model;
      history.best_epoch = epoch;
      continue;
    }
    if (record.val_loss < best_val) {
      best_val = record.val_loss;
      best = model;
      history.best_epoch = epoch;
      stale = 0;
    } else if (config.patience > 0 && ++stale >= config.patience) {
      history.early_stopped = true;
      break;
    }
  }
  return {Classifier(std::move(best), alphabet), history};
}

}  // namespace honeyfilter
