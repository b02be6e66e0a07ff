#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "honeyfilter/corpus.hpp"

namespace honeyfilter {

struct EmbedHyper {
  std::size_t dim = 64;
  std::size_t ngram_min = 2;
  std::size_t ngram_max = 4;
  // Context radius, counted in neighbouring passwords of the shuffled stream.
  std::size_t window = 2;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.05;  // decayed linearly to 0 over training
  std::uint64_t buckets = std::uint64_t{1} << 20;
  std::uint64_t seed = 0;

  void validate() const;
};

// Cosine similarity a.b / (|a| |b|) accumulated in double. A zero vector on
// either side yields 0 and sets *degenerate.
double cosine(std::span<const float> a, std::span<const float> b,
              bool* degenerate = nullptr);

// Character n-grams of "<word>" with lengths in [min_n, max_n], in order of
// start position then length.
std::vector<std::string> char_ngrams(std::string_view word, std::size_t min_n,
                                     std::size_t max_n);

// Bucket of an n-gram: FNV-1a (32-bit) of its UTF-8 bytes modulo `buckets`.
std::uint64_t ngram_bucket(std::string_view ngram, std::uint64_t buckets);

struct Neighbor {
  std::string word;
  double score = 0.0;
  std::size_t index = 0;  // vocab index
};

// Subword skip-gram embedding. Input vectors exist for every vocab word and
// for hashed n-gram buckets; only buckets reached by training words are
// stored, the rest hold their deterministic initial value, which is derived
// from (seed, bucket) on demand.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;

  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }
  // Vocab index or -1.
  std::int64_t index_of(std::string_view word) const;
  std::size_t ngram_min() const { return ngram_min_; }
  std::size_t ngram_max() const { return ngram_max_; }
  std::uint64_t buckets() const { return buckets_; }
  std::size_t stored_ngram_rows() const { return bucket_ids_.size(); }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  // Materialized word vector (whole-word vector + its n-gram vectors).
  std::span<const float> word_vector(std::size_t index) const;

  // Whole-word vector (if in vocab) plus the sum of the hashed n-gram vectors.
  std::vector<float> embed_word(std::string_view word) const;

  // The n vocab words other than `word` with the highest cosine to
  // embed_word(word), descending; ties by vocab index ascending. Exact scan.
  std::vector<Neighbor> nearest(std::string_view word, std::size_t n) const;

  // Scales every stored input vector by c and rematerializes word vectors.
  void scale(float c);

  // Little-endian binary model plus a sidecar vocab file (`path` + ".vocab").
  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(const std::filesystem::path& path);

 private:
  friend EmbeddingModel train_embedding(const PasswordCorpus&, const EmbedHyper&);

  std::vector<float> bucket_vector(std::uint64_t bucket) const;
  void index_vocab();
  void materialize();

  std::size_t dim_ = 0;
  std::size_t ngram_min_ = 0;
  std::size_t ngram_max_ = 0;
  std::uint64_t buckets_ = 0;
  std::uint64_t seed_ = 0;
  float lazy_scale_ = 1.0f;

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> vocab_index_;
  std::vector<float> word_input_;  // vocab_size x dim

  std::vector<std::uint32_t> bucket_ids_;  // sorted, one per stored row
  std::unordered_map<std::uint32_t, std::size_t> bucket_row_;
  std::vector<float> ngram_input_;  // stored rows x dim

  std::vector<float> word_vectors_;  // vocab_size x dim
  std::vector<double> word_norms_;
  std::vector<double> epoch_losses_;
};

// Skip-gram with negative sampling over a per-epoch seeded shuffle of the
// corpus. The hidden vector during training is the mean of the word's input
// rows (fastText style); word vectors are materialized as their sum, which
// yields identical cosines. Throws kEmptyCorpus or kNonFinite.
EmbeddingModel train_embedding(const PasswordCorpus& corpus, const EmbedHyper& hyper);

}  // namespace honeyfilter
