#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "honeyfilter/corpus.hpp"
#include "honeyfilter/rng.hpp"

namespace honeyfilter {

// Character-level Markov chain with add-alpha smoothing; stands in for a
// generative password model such as PassGAN.
class MarkovModel {
 public:
  static constexpr char32_t kBegin = U'\x02';
  static constexpr char32_t kEnd = U'\x03';

  std::size_t order() const { return order_; }
  double alpha() const { return alpha_; }
  // Every training character plus kEnd, in codepoint order.
  const std::vector<char32_t>& symbols() const { return symbols_; }

  // Next-symbol counts after `context` (kBegin-padded on the left). Contexts
  // of every length 0..order are recorded. Empty map if never seen.
  const std::map<char32_t, std::uint64_t>& counts(const std::u32string& context) const;

  // Smoothed probability of `next` after `context`, backing off to shorter
  // contexts when `context` was never observed.
  double probability(const std::u32string& context, char32_t next) const;

 private:
  friend MarkovModel train_markov(const PasswordCorpus&, std::size_t, double);
  friend std::string sample_password(const MarkovModel&, std::size_t, std::size_t, Rng&,
                                     std::size_t);

  const std::map<char32_t, std::uint64_t>* row(std::u32string context,
                                               std::uint64_t* total) const;

  std::size_t order_ = 3;
  double alpha_ = 0.01;
  std::vector<char32_t> symbols_;
  std::map<std::u32string, std::map<char32_t, std::uint64_t>> counts_;
  std::map<std::u32string, std::uint64_t> totals_;
};

MarkovModel train_markov(const PasswordCorpus& corpus, std::size_t order = 3,
                         double alpha = 0.01);

// Ancestral sampling until the end symbol; words outside [min_len, max_len]
// are rejected and resampled, up to `max_tries` draws.
std::string sample_password(const MarkovModel& model, std::size_t min_len,
                            std::size_t max_len, Rng& rng, std::size_t max_tries = 1000);

std::vector<std::string> sample_passwords(const MarkovModel& model, std::size_t count,
                                          std::size_t min_len, std::size_t max_len,
                                          std::uint64_t seed);

}  // namespace honeyfilter
