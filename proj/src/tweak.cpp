#include "honeyfilter/tweak.hpp"

#include <algorithm>

#include "honeyfilter/error.hpp"
#include "honeyfilter/utf8.hpp"

namespace honeyfilter {

TweakParams TweakParams::zero() {
  TweakParams params;
  params.p = params.q = params.f = params.g = 0.0;
  return params;
}

void TweakParams::validate() const {
  for (double v : {p, q, f, g}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "tweak probabilities must lie in [0, 1]");
    }
  }
  if (!(boost > 0.0 && boost <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tweak boost must lie in (0, 1]");
  }
  if (attempts_per_word == 0) {
    throw Error(ErrorCode::kInvalidArgument, "attempts_per_word must be >= 1");
  }
}

void TweakParams::apply_boost() {
  auto step = [this](double v) {
    const double boosted =
        boost_mode == BoostMode::kMultiplicative ? v * (1.0 + boost) : v + boost;
    return std::min(1.0, boosted);
  };
  p = step(p);
  q = step(q);
  f = step(f);
  g = step(g);
}

bool is_special_symbol(char32_t c) {
  return kSpecialSymbols.find(c) != std::u32string_view::npos;
}

std::string tweak_once(std::string_view word, const TweakParams& params, Rng& rng) {
  std::u32string chars = utf8::decode_lossy(word);
  for (char32_t& c : chars) {
    if (c >= U'a' && c <= U'z') {
      if (rng.uniform01() < params.f) c = c - U'a' + U'A';
    } else if (c >= U'A' && c <= U'Z') {
      if (rng.uniform01() < params.g) c = c - U'A' + U'a';
    } else if (c >= U'0' && c <= U'9') {
      if (rng.uniform01() < params.q) {
        auto pick = static_cast<char32_t>(rng.uniform_below(9));
        const char32_t original = c - U'0';
        if (pick >= original) ++pick;
        c = U'0' + pick;
      }
    } else if (is_special_symbol(c)) {
      if (rng.uniform01() < params.p) {
        const auto original = kSpecialSymbols.find(c);
        auto pick = static_cast<std::size_t>(rng.uniform_below(kSpecialSymbols.size() - 1));
        if (pick >= original) ++pick;
        c = kSpecialSymbols[pick];
      }
    }
  }
  return utf8::encode(chars);
}

TweakSession::TweakSession(const TweakParams& params, std::size_t budget)
    : current_(params), rng_(params.rng_seed), budget_(budget) {
  params.validate();
}

std::string TweakSession::next_distinct(std::string_view base,
                                        std::string_view forbidden,
                                        const std::unordered_set<std::string>& taken) {
  while (attempts_ < budget_) {
    ++attempts_;
    std::string candidate = tweak_once(base, current_, rng_);
    if (candidate != forbidden && !taken.contains(candidate)) return candidate;
    current_.apply_boost();
    ++boosts_;
    history_.push_back(current_);
  }
  throw Error(ErrorCode::kBudgetExhausted,
              "tweak attempt budget (" + std::to_string(budget_) +
                  ") exhausted; input has too few reachable variants");
}

std::vector<std::string> generate_tweaked(std::string_view password,
                                          std::size_t count,
                                          const TweakParams& params) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  if (password.empty()) throw Error(ErrorCode::kInvalidArgument, "empty password");
  TweakSession session(params, params.attempts_per_word * count);
  std::vector<std::string> out;
  std::unordered_set<std::string> taken;
  out.reserve(count);
  while (out.size() < count) {
    auto word = session.next_distinct(password, password, taken);
    taken.insert(word);
    out.push_back(std::move(word));
  }
  return out;
}

TweakGenerator::TweakGenerator(TweakParams params) : params_(params) {
  params_.validate();
}

std::vector<std::string> TweakGenerator::generate(std::string_view password,
                                                  std::size_t count,
                                                  std::uint64_t stream) const {
  TweakParams params = params_;
  params.rng_seed = derive_seed(params_.rng_seed, stream);
  return generate_tweaked(password, count, params);
}

}  // namespace honeyfilter
