#include "honeyfilter/flatness.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <thread>

#include "honeyfilter/error.hpp"

namespace honeyfilter {

Scorer classifier_scorer(const Classifier& classifier) {
  return [&classifier](std::span<const std::string> words) {
    return classifier.score_batch(words);
  };
}

double FlatnessCurve::at(std::size_t x) const {
  if (x < 1 || x > success.size()) {
    throw Error(ErrorCode::kInvalidArgument, "attempt count " + std::to_string(x) +
                                                 " outside [1, " + std::to_string(k) + "]");
  }
  return success[x - 1];
}

std::vector<std::size_t> rank_by_scores(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<std::size_t> rank_sweetwords(const Scorer& scorer, const SweetwordSet& account) {
  const auto scores = scorer(account.sweetwords);
  if (scores.size() != account.k()) {
    throw Error(ErrorCode::kRuntime, "scorer returned the wrong number of scores");
  }
  return rank_by_scores(scores);
}

std::vector<std::size_t> rank_sweetwords(const Classifier& classifier,
                                         const SweetwordSet& account) {
  return rank_sweetwords(classifier_scorer(classifier), account);
}

std::size_t real_rank(const std::vector<std::size_t>& order, const SweetwordSet& account) {
  auto it = std::find(order.begin(), order.end(), account.real_index);
  if (it == order.end()) throw Error(ErrorCode::kInvalidArgument, "ranking misses the real index");
  return static_cast<std::size_t>(it - order.begin());
}

std::vector<std::vector<std::size_t>> rank_accounts(const Scorer& scorer,
                                                    std::span<const SweetwordSet> accounts) {
  std::vector<std::vector<std::size_t>> out(accounts.size());
  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, std::max<std::size_t>(accounts.size() / 16, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < accounts.size(); ++i) out[i] = rank_sweetwords(scorer, accounts[i]);
    return out;
  }
  // Contiguous chunks per worker, scored as one batch each.
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  const std::size_t per = (accounts.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * per;
        const std::size_t hi = std::min(accounts.size(), lo + per);
        if (lo >= hi) return;
        std::vector<std::string> words;
        for (std::size_t i = lo; i < hi; ++i) {
          words.insert(words.end(), accounts[i].sweetwords.begin(), accounts[i].sweetwords.end());
        }
        const auto scores = scorer(words);
        if (scores.size() != words.size()) {
          throw Error(ErrorCode::kRuntime, "scorer returned the wrong number of scores");
        }
        std::size_t offset = 0;
        for (std::size_t i = lo; i < hi; ++i) {
          const std::size_t k = accounts[i].k();
          out[i] = rank_by_scores(std::span<const double>(scores).subspan(offset, k));
          offset += k;
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

FlatnessCurve flatness_curve(std::span<const std::vector<std::size_t>> rankings,
                             std::span<const SweetwordSet> accounts) {
  if (accounts.empty()) throw Error(ErrorCode::kInvalidArgument, "no accounts to evaluate");
  if (rankings.size() != accounts.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one ranking per account required");
  }
  const std::size_t k = accounts.front().k();
  std::vector<std::size_t> hits_at_rank(k, 0);
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    if (accounts[i].k() != k) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mixed k: account " + std::to_string(accounts[i].account_id) + " has " +
                      std::to_string(accounts[i].k()) + " sweetwords, expected " +
                      std::to_string(k));
    }
    ++hits_at_rank[real_rank(rankings[i], accounts[i])];
  }
  FlatnessCurve curve;
  curve.k = k;
  curve.n_accounts = accounts.size();
  std::size_t cumulative = 0;
  for (std::size_t x = 1; x <= k; ++x) {
    cumulative += hits_at_rank[x - 1];
    curve.success.push_back(static_cast<double>(cumulative) /
                            static_cast<double>(accounts.size()));
  }
  return curve;
}

FlatnessCurve flatness_curve(const Scorer& scorer, std::span<const SweetwordSet> accounts) {
  const auto rankings = rank_accounts(scorer, accounts);
  return flatness_curve(rankings, accounts);
}

FlatnessCurve flatness_curve(const Classifier& classifier,
                             std::span<const SweetwordSet> accounts) {
  return flatness_curve(classifier_scorer(classifier), accounts);
}

double random_baseline(std::size_t k, std::size_t x) {
  if (k < 1 || x < 1 || x > k) {
    throw Error(ErrorCode::kInvalidArgument, "baseline needs 1 <= x <= k");
  }
  return static_cast<double>(x) / static_cast<double>(k);
}

FlatnessCurve average_curves(std::span<const FlatnessCurve> curves) {
  if (curves.empty()) throw Error(ErrorCode::kInvalidArgument, "no curves to average");
  FlatnessCurve out;
  out.k = curves.front().k;
  out.success.assign(out.k, 0.0);
  for (const auto& c : curves) {
    if (c.k != out.k) throw Error(ErrorCode::kInvalidArgument, "cannot average curves of mixed k");
    out.n_accounts += c.n_accounts;
    for (std::size_t i = 0; i < out.k; ++i) out.success[i] += c.success[i];
  }
  for (auto& s : out.success) s /= static_cast<double>(curves.size());
  return out;
}

std::vector<GridRow> reporting_grid(const FlatnessCurve& curve,
                                    std::span<const std::size_t> attempts) {
  std::vector<GridRow> rows;
  for (auto x : attempts) rows.push_back({x, curve.at(x), random_baseline(curve.k, x)});
  return rows;
}

std::string curve_to_dat(const FlatnessCurve& curve) {
  std::ostringstream out;
  out.precision(10);
  out << "# x success\n";
  for (std::size_t x = 1; x <= curve.k; ++x) out << x << ' ' << curve.success[x - 1] << '\n';
  return out.str();
}

std::string curve_to_csv(const FlatnessCurve& curve) {
  std::ostringstream out;
  out.precision(10);
  out << "x,success,baseline\n";
  for (std::size_t x = 1; x <= curve.k; ++x) {
    out << x << ',' << curve.success[x - 1] << ',' << random_baseline(curve.k, x) << '\n';
  }
  return out.str();
}

}  // namespace honeyfilter
