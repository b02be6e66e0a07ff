#include "honeyfilter/passgen.hpp"

#include <set>

#include "honeyfilter/error.hpp"
#include "honeyfilter/utf8.hpp"

namespace honeyfilter {

MarkovModel train_markov(const PasswordCorpus& corpus, std::size_t order, double alpha) {
  if (order < 1 || order > 5) throw Error(ErrorCode::kInvalidArgument, "order must lie in [1, 5]");
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be > 0");
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "markov corpus is empty");

  MarkovModel model;
  model.order_ = order;
  model.alpha_ = alpha;
  std::set<char32_t> symbols{MarkovModel::kEnd};
  for (const auto& word : corpus.entries) {
    const auto chars = utf8::decode_lossy(word);
    symbols.insert(chars.begin(), chars.end());
    const std::u32string padded = std::u32string(order, MarkovModel::kBegin) + chars;
    for (std::size_t i = 0; i <= chars.size(); ++i) {
      const char32_t next = i < chars.size() ? chars[i] : MarkovModel::kEnd;
      for (std::size_t len = 0; len <= order; ++len) {
        const auto context = padded.substr(i + order - len, len);
        ++model.counts_[context][next];
        ++model.totals_[context];
      }
    }
  }
  model.symbols_.assign(symbols.begin(), symbols.end());
  return model;
}

const std::map<char32_t, std::uint64_t>& MarkovModel::counts(
    const std::u32string& context) const {
  static const std::map<char32_t, std::uint64_t> kEmpty;
  const auto it = counts_.find(context);
  return it == counts_.end() ? kEmpty : it->second;
}

const std::map<char32_t, std::uint64_t>* MarkovModel::row(std::u32string context,
                                                          std::uint64_t* total) const {
  for (;;) {
    if (const auto it = counts_.find(context); it != counts_.end()) {
      *total = totals_.at(context);
      return &it->second;
    }
    // The empty context always exists after training.
    context.erase(0, 1);
  }
}

double MarkovModel::probability(const std::u32string& context, char32_t next) const {
  std::uint64_t total = 0;
  const auto* r = row(context, &total);
  bool known = false;
  for (char32_t s : symbols_) known = known || s == next;
  if (!known) return 0.0;
  const auto it = r->find(next);
  const double c = it == r->end() ? 0.0 : static_cast<double>(it->second);
  return (c + alpha_) / (static_cast<double>(total) + alpha_ * symbols_.size());
}

std::string sample_password(const MarkovModel& model, std::size_t min_len,
                            std::size_t max_len, Rng& rng, std::size_t max_tries) {
  if (min_len > max_len) throw Error(ErrorCode::kInvalidArgument, "min_len > max_len");
  const auto& symbols = model.symbols_;
  for (std::size_t attempt = 0; attempt < max_tries; ++attempt) {
    std::u32string word;
    std::u32string context(model.order_, MarkovModel::kBegin);
    bool ok = false;
    for (;;) {
      std::uint64_t total = 0;
      const auto* r = model.row(context, &total);
      const double mass = static_cast<double>(total) + model.alpha_ * symbols.size();
      double u = rng.uniform01() * mass;
      char32_t next = symbols.back();
      for (char32_t s : symbols) {
        const auto it = r->find(s);
        u -= (it == r->end() ? 0.0 : static_cast<double>(it->second)) + model.alpha_;
        if (u < 0.0) {
          next = s;
          break;
        }
      }
      if (next == MarkovModel::kEnd) {
        ok = word.size() >= min_len;
        break;
      }
      word.push_back(next);
      if (word.size() > max_len) break;
      context.erase(0, 1);
      context.push_back(next);
    }
    if (ok) return utf8::encode(word);
  }
  throw Error(ErrorCode::kBudgetExhausted,
              "no sample with length in [" + std::to_string(min_len) + ", " +
                  std::to_string(max_len) + "] after " + std::to_string(max_tries) + " tries");
}

std::vector<std::string> sample_passwords(const MarkovModel& model, std::size_t count,
                                          std::size_t min_len, std::size_t max_len,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(sample_password(model, min_len, max_len, rng));
  }
  return out;
}

}  // namespace honeyfilter
