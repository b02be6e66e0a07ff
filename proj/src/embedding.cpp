#include "honeyfilter/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "honeyfilter/error.hpp"
#include "honeyfilter/log.hpp"
#include "honeyfilter/rng.hpp"
#include "honeyfilter/utf8.hpp"

namespace honeyfilter {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host order, which must be little-endian");

namespace {

constexpr char kMagic[8] = {'H', 'F', 'E', 'M', 'B', 'E', 'D', '1'};
constexpr std::uint32_t kFormatVersion = 1;

double dot_norms(std::span<const float> a, std::span<const float> b, double na,
                 double nb, bool* degenerate) {
  if (na == 0.0 || nb == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  if (degenerate) *degenerate = false;
  return dot / (na * nb);
}

double norm(std::span<const float> a) {
  double s = 0.0;
  for (float v : a) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

// -log(sigmoid(x)), numerically stable.
double neg_log_sigmoid(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(-x, 0.0);
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::kParse, "truncated embedding model file");
  return v;
}

template <typename T>
void read_array(std::istream& in, std::vector<T>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(T)));
  if (!in) throw Error(ErrorCode::kParse, "truncated embedding model file");
}

}  // namespace

void EmbedHyper::validate() const {
  if (dim < 2) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be >= 2");
  if (ngram_min < 1 || ngram_min > ngram_max) {
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= ngram_min <= ngram_max");
  }
  if (negatives < 1) throw Error(ErrorCode::kInvalidArgument, "negatives must be >= 1");
  if (window < 1) throw Error(ErrorCode::kInvalidArgument, "window must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
  if (buckets < 1 || buckets > (std::uint64_t{1} << 32)) {
    throw Error(ErrorCode::kInvalidArgument, "buckets must lie in [1, 2^32]");
  }
}

double cosine(std::span<const float> a, std::span<const float> b, bool* degenerate) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cosine of vectors with different sizes");
  }
  return dot_norms(a, b, norm(a), norm(b), degenerate);
}

std::vector<std::string> char_ngrams(std::string_view word, std::size_t min_n,
                                     std::size_t max_n) {
  std::u32string wrapped = U"<" + utf8::decode_lossy(word) + U">";
  std::vector<std::string> grams;
  for (std::size_t start = 0; start < wrapped.size(); ++start) {
    for (std::size_t n = min_n; n <= max_n && start + n <= wrapped.size(); ++n) {
      grams.push_back(utf8::encode(std::u32string_view(wrapped).substr(start, n)));
    }
  }
  return grams;
}

std::uint64_t ngram_bucket(std::string_view ngram, std::uint64_t buckets) {
  return fnv1a32(ngram) % buckets;
}

std::int64_t EmbeddingModel::index_of(std::string_view word) const {
  const auto it = vocab_index_.find(std::string(word));
  return it == vocab_index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::span<const float> EmbeddingModel::word_vector(std::size_t index) const {
  return std::span<const float>(word_vectors_).subspan(index * dim_, dim_);
}

std::vector<float> EmbeddingModel::bucket_vector(std::uint64_t bucket) const {
  if (const auto it = bucket_row_.find(static_cast<std::uint32_t>(bucket));
      it != bucket_row_.end()) {
    const float* row = ngram_input_.data() + it->second * dim_;
    return std::vector<float>(row, row + dim_);
  }
  // Untrained bucket: the value it was initialized with.
  Rng rng(derive_seed(derive_seed(seed_, "embed.buckets"), bucket));
  const double bound = 1.0 / static_cast<double>(dim_);
  std::vector<float> v(dim_);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-bound, bound)) * lazy_scale_;
  return v;
}

std::vector<float> EmbeddingModel::embed_word(std::string_view word) const {
  if (const auto idx = index_of(word); idx >= 0) {
    const auto v = word_vector(static_cast<std::size_t>(idx));
    return std::vector<float>(v.begin(), v.end());
  }
  std::vector<float> sum(dim_, 0.0f);
  for (const auto& gram : char_ngrams(word, ngram_min_, ngram_max_)) {
    const auto v = bucket_vector(ngram_bucket(gram, buckets_));
    for (std::size_t d = 0; d < dim_; ++d) sum[d] += v[d];
  }
  return sum;
}

std::vector<Neighbor> EmbeddingModel::nearest(std::string_view word,
                                              std::size_t n) const {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "nearest needs n >= 1");
  const std::int64_t self = index_of(word);
  const std::size_t candidates = vocab_.size() - (self >= 0 ? 1 : 0);
  if (candidates < n) {
    throw Error(ErrorCode::kVocabExhausted,
                "vocabulary has " + std::to_string(candidates) +
                    " candidates, " + std::to_string(n) + " requested");
  }
  const auto query = embed_word(word);
  const double qn = norm(query);

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates);
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (static_cast<std::int64_t>(i) == self) continue;
    scored.emplace_back(dot_norms(query, word_vector(i), qn, word_norms_[i], nullptr), i);
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n),
                    scored.end(), better);
  std::vector<Neighbor> out;
  out.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.push_back({vocab_[scored[r].second], scored[r].first, scored[r].second});
  }
  return out;
}

void EmbeddingModel::scale(float c) {
  for (auto& v : word_input_) v *= c;
  for (auto& v : ngram_input_) v *= c;
  lazy_scale_ *= c;
  materialize();
}

void EmbeddingModel::index_vocab() {
  vocab_index_.clear();
  vocab_index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) vocab_index_.emplace(vocab_[i], i);
  bucket_row_.clear();
  bucket_row_.reserve(bucket_ids_.size());
  for (std::size_t r = 0; r < bucket_ids_.size(); ++r) bucket_row_.emplace(bucket_ids_[r], r);
}

void EmbeddingModel::materialize() {
  word_vectors_.assign(vocab_.size() * dim_, 0.0f);
  word_norms_.assign(vocab_.size(), 0.0);
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    float* out = word_vectors_.data() + i * dim_;
    const float* own = word_input_.data() + i * dim_;
    std::copy(own, own + dim_, out);
    for (const auto& gram : char_ngrams(vocab_[i], ngram_min_, ngram_max_)) {
      const std::size_t row = bucket_row_.at(
          static_cast<std::uint32_t>(ngram_bucket(gram, buckets_)));
      const float* v = ngram_input_.data() + row * dim_;
      for (std::size_t d = 0; d < dim_; ++d) out[d] += v[d];
    }
    word_norms_[i] = norm(word_vector(i));
  }
}

EmbeddingModel train_embedding(const PasswordCorpus& corpus, const EmbedHyper& hyper) {
  hyper.validate();
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "embedding corpus is empty");
  if (corpus.size() < 1000) {
    log_warning("embedding corpus has " + std::to_string(corpus.size()) +
                " entries (< 1000); neighbour quality will be poor");
  }

  EmbeddingModel model;
  model.dim_ = hyper.dim;
  model.ngram_min_ = hyper.ngram_min;
  model.ngram_max_ = hyper.ngram_max;
  model.buckets_ = hyper.buckets;
  model.seed_ = hyper.seed;
  const std::size_t dim = hyper.dim;

  // Vocabulary in order of first appearance.
  std::vector<std::size_t> tokens;
  std::vector<double> counts;
  tokens.reserve(corpus.size());
  for (const auto& w : corpus.entries) {
    auto [it, inserted] = model.vocab_index_.try_emplace(w, model.vocab_.size());
    if (inserted) {
      model.vocab_.push_back(w);
      counts.push_back(0.0);
    }
    counts[it->second] += 1.0;
    tokens.push_back(it->second);
  }
  const std::size_t vocab_size = model.vocab_.size();

  // Input rows of each word: own row first, then its n-gram rows.
  std::vector<std::vector<std::uint32_t>> word_buckets(vocab_size);
  std::vector<std::uint32_t> all_buckets;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    for (const auto& gram : char_ngrams(model.vocab_[i], hyper.ngram_min, hyper.ngram_max)) {
      const auto b = static_cast<std::uint32_t>(ngram_bucket(gram, hyper.buckets));
      word_buckets[i].push_back(b);
      all_buckets.push_back(b);
    }
  }
  std::sort(all_buckets.begin(), all_buckets.end());
  all_buckets.erase(std::unique(all_buckets.begin(), all_buckets.end()), all_buckets.end());
  model.ngram_input_.resize(all_buckets.size() * dim);
  for (std::size_t r = 0; r < all_buckets.size(); ++r) {
    const auto init = model.bucket_vector(all_buckets[r]);
    std::copy(init.begin(), init.end(), model.ngram_input_.begin() + r * dim);
  }
  model.bucket_ids_ = all_buckets;
  model.index_vocab();
  {
    Rng rng(derive_seed(hyper.seed, "embed.words"));
    const double bound = 1.0 / static_cast<double>(dim);
    model.word_input_.resize(vocab_size * dim);
    for (auto& v : model.word_input_) v = static_cast<float>(rng.uniform(-bound, bound));
  }
  std::vector<float> output(vocab_size * dim, 0.0f);

  std::vector<std::vector<float*>> rows(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    rows[i].push_back(model.word_input_.data() + i * dim);
    for (auto b : word_buckets[i]) {
      rows[i].push_back(model.ngram_input_.data() + model.bucket_row_.at(b) * dim);
    }
  }

  // Negative sampling distribution: unigram counts ^ 0.75.
  std::vector<double> cumulative(vocab_size);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    total_weight += std::pow(counts[i], 0.75);
    cumulative[i] = total_weight;
  }

  Rng neg_rng(derive_seed(hyper.seed, "embed.negatives"));
  auto draw_negative = [&]() {
    const double u = neg_rng.uniform01() * total_weight;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                 vocab_size - 1);
  };

  const double total_steps = static_cast<double>(hyper.epochs) * tokens.size();
  double processed = 0.0;
  std::vector<float> hidden(dim);
  std::vector<float> grad(dim);
  std::vector<std::size_t> stream = tokens;

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    stream = tokens;
    Rng shuffle_rng(derive_seed(derive_seed(hyper.seed, "embed.shuffle"), epoch));
    shuffle_rng.shuffle(std::span<std::size_t>(stream));

    double loss_sum = 0.0;
    std::size_t loss_n = 0;
    for (std::size_t t = 0; t < stream.size(); ++t) {
      const double lr =
          hyper.learning_rate * std::max(1e-4, 1.0 - processed / total_steps);
      processed += 1.0;
      const auto& in_rows = rows[stream[t]];
      const float inv = 1.0f / static_cast<float>(in_rows.size());

      const std::size_t lo = t >= hyper.window ? t - hyper.window : 0;
      const std::size_t hi = std::min(stream.size() - 1, t + hyper.window);
      for (std::size_t c = lo; c <= hi; ++c) {
        if (c == t) continue;
        std::fill(hidden.begin(), hidden.end(), 0.0f);
        for (const float* row : in_rows) {
          for (std::size_t d = 0; d < dim; ++d) hidden[d] += row[d];
        }
        for (auto& h : hidden) h *= inv;
        std::fill(grad.begin(), grad.end(), 0.0f);

        auto update = [&](std::size_t target, bool positive) {
          float* out = output.data() + target * dim;
          double score = 0.0;
          for (std::size_t d = 0; d < dim; ++d) score += static_cast<double>(out[d]) * hidden[d];
          loss_sum += neg_log_sigmoid(positive ? score : -score);
          const double sig = 1.0 / (1.0 + std::exp(-score));
          const auto alpha = static_cast<float>(lr * ((positive ? 1.0 : 0.0) - sig));
          for (std::size_t d = 0; d < dim; ++d) {
            grad[d] += alpha * out[d];
            out[d] += alpha * hidden[d];
          }
        };

        const std::size_t target = stream[c];
        update(target, true);
        for (std::size_t k = 0; k < hyper.negatives; ++k) {
          std::size_t neg = draw_negative();
          for (int retry = 0; neg == target && retry < 10; ++retry) neg = draw_negative();
          if (neg == target) continue;
          update(neg, false);
        }
        ++loss_n;
        for (float* row : in_rows) {
          for (std::size_t d = 0; d < dim; ++d) row[d] += grad[d];
        }
      }
    }
    const double mean = loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0;
    if (!std::isfinite(mean)) {
      throw Error(ErrorCode::kNonFinite,
                  "embedding loss diverged in epoch " + std::to_string(epoch) +
                      "; lower the learning rate");
    }
    model.epoch_losses_.push_back(mean);
  }

  model.materialize();
  for (float v : model.word_vectors_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite word vector");
  }
  return model;
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint32_t>(dim_));
  write_pod(out, static_cast<std::uint32_t>(ngram_min_));
  write_pod(out, static_cast<std::uint32_t>(ngram_max_));
  write_pod(out, buckets_);
  write_pod(out, seed_);
  write_pod(out, lazy_scale_);
  write_pod(out, static_cast<std::uint64_t>(vocab_.size()));
  write_pod(out, static_cast<std::uint64_t>(bucket_ids_.size()));
  out.write(reinterpret_cast<const char*>(word_input_.data()),
            static_cast<std::streamsize>(word_input_.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(bucket_ids_.data()),
            static_cast<std::streamsize>(bucket_ids_.size() * sizeof(std::uint32_t)));
  out.write(reinterpret_cast<const char*>(ngram_input_.data()),
            static_cast<std::streamsize>(ngram_input_.size() * sizeof(float)));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());

  std::filesystem::path vocab_path = path;
  vocab_path += ".vocab";
  std::ofstream vout(vocab_path, std::ios::binary);
  if (!vout) throw Error(ErrorCode::kIo, "cannot write " + vocab_path.string());
  for (const auto& w : vocab_) vout << w << '\n';
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kMagic)) {
    throw Error(ErrorCode::kParse, path.string() + " is not an embedding model");
  }
  if (read_pod<std::uint32_t>(in) != kFormatVersion) {
    throw Error(ErrorCode::kParse, "unsupported embedding model version");
  }
  EmbeddingModel m;
  m.dim_ = read_pod<std::uint32_t>(in);
  m.ngram_min_ = read_pod<std::uint32_t>(in);
  m.ngram_max_ = read_pod<std::uint32_t>(in);
  m.buckets_ = read_pod<std::uint64_t>(in);
  m.seed_ = read_pod<std::uint64_t>(in);
  m.lazy_scale_ = read_pod<float>(in);
  const auto vocab_size = read_pod<std::uint64_t>(in);
  const auto rows = read_pod<std::uint64_t>(in);
  m.word_input_.resize(vocab_size * m.dim_);
  read_array(in, m.word_input_);
  m.bucket_ids_.resize(rows);
  read_array(in, m.bucket_ids_);
  m.ngram_input_.resize(rows * m.dim_);
  read_array(in, m.ngram_input_);

  std::filesystem::path vocab_path = path;
  vocab_path += ".vocab";
  std::ifstream vin(vocab_path, std::ios::binary);
  if (!vin) throw Error(ErrorCode::kIo, "cannot open " + vocab_path.string());
  std::string line;
  while (std::getline(vin, line)) m.vocab_.push_back(line);
  if (m.vocab_.size() != vocab_size) {
    throw Error(ErrorCode::kParse, "vocab sidecar does not match model header");
  }
  m.index_vocab();
  m.materialize();
  return m;
}

}  // namespace honeyfilter
