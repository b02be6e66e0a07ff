#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "honeyfilter/generator.hpp"
#include "honeyfilter/rng.hpp"

namespace honeyfilter {

enum class BoostMode { kMultiplicative, kAdditive };

// Per-character substitution probabilities for chaffing-by-tweaking.
struct TweakParams {
  double p = 0.30;  // special symbol -> different special symbol
  double q = 0.30;  // digit -> different digit
  double f = 0.03;  // lowercase -> uppercase
  double g = 0.01;  // uppercase -> lowercase
  double boost = 0.10;
  BoostMode boost_mode = BoostMode::kMultiplicative;
  std::uint64_t rng_seed = 0;
  // Total tweak attempts allowed per requested honeyword.
  std::size_t attempts_per_word = 1000;

  static TweakParams zero();

  void validate() const;
  // One duplicate-triggered escalation of p, q, f and g, clamped at 1.
  void apply_boost();
};

// The 32 printable ASCII punctuation characters, in codepoint order.
inline constexpr std::u32string_view kSpecialSymbols =
    U"!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

bool is_special_symbol(char32_t c);

// Applies one round of substitutions. Characters are visited left to right;
// per character the draws are:
//   'a'-'z': uniform01() < f  -> uppercase
//   'A'-'Z': uniform01() < g  -> lowercase
//   '0'-'9': uniform01() < q  -> uniform_below(9) picks among the other digits
//   special: uniform01() < p  -> uniform_below(31) picks among the other symbols
// Any other character consumes no draws and is copied unchanged.
std::string tweak_once(std::string_view word, const TweakParams& params, Rng& rng);

// Stateful retry loop shared by the tweaking and hybrid generators. Each
// rejected candidate boosts the effective probabilities.
class TweakSession {
 public:
  TweakSession(const TweakParams& params, std::size_t budget);

  // Tweaks `base` until the result differs from `forbidden` and is not in
  // `taken`. Throws Error(kBudgetExhausted) when the budget runs out.
  std::string next_distinct(std::string_view base, std::string_view forbidden,
                            const std::unordered_set<std::string>& taken);

  const TweakParams& effective() const { return current_; }
  std::size_t attempts() const { return attempts_; }
  std::size_t boosts() const { return boosts_; }
  // Effective parameters after each boost, in order.
  const std::vector<TweakParams>& boost_history() const { return history_; }

 private:
  TweakParams current_;
  Rng rng_;
  std::size_t budget_;
  std::size_t attempts_ = 0;
  std::size_t boosts_ = 0;
  std::vector<TweakParams> history_;
};

// `count` distinct honeywords for `password`, all different from it.
std::vector<std::string> generate_tweaked(std::string_view password,
                                          std::size_t count,
                                          const TweakParams& params);

class TweakGenerator final : public HoneywordGenerator {
 public:
  explicit TweakGenerator(TweakParams params);

  GeneratorKind kind() const override { return GeneratorKind::kTweak; }
  // Uses rng_seed = derive_seed(params.rng_seed, stream).
  std::vector<std::string> generate(std::string_view password, std::size_t count,
                                    std::uint64_t stream) const override;
  const TweakParams& params() const { return params_; }

 private:
  TweakParams params_;
};

}  // namespace honeyfilter
