#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "honeyfilter/cnn.hpp"
#include "honeyfilter/corpus.hpp"

namespace honeyfilter {

// Scores a batch of words; higher means "more likely the real password".
using Scorer = std::function<std::vector<double>(std::span<const std::string>)>;

Scorer classifier_scorer(const Classifier& classifier);

// Per-attempt success curve: success[x-1] is the fraction of accounts whose
// real password is among the x highest-scored sweetwords.
struct FlatnessCurve {
  std::size_t k = 0;
  std::size_t n_accounts = 0;
  std::vector<double> success;
  std::map<std::string, std::string> label;

  // success[x-1]; throws for x outside [1, k].
  double at(std::size_t x) const;
};

// Indices by score descending; equal scores keep index order.
std::vector<std::size_t> rank_by_scores(std::span<const double> scores);
std::vector<std::size_t> rank_sweetwords(const Scorer& scorer, const SweetwordSet& account);
std::vector<std::size_t> rank_sweetwords(const Classifier& classifier,
                                         const SweetwordSet& account);

// Zero-based position of the real password in `order`.
std::size_t real_rank(const std::vector<std::size_t>& order, const SweetwordSet& account);

// One ranking per account, scored in parallel across accounts.
std::vector<std::vector<std::size_t>> rank_accounts(const Scorer& scorer,
                                                    std::span<const SweetwordSet> accounts);

// Throws kInvalidArgument for an empty account list or mixed k.
FlatnessCurve flatness_curve(std::span<const std::vector<std::size_t>> rankings,
                             std::span<const SweetwordSet> accounts);
FlatnessCurve flatness_curve(const Scorer& scorer, std::span<const SweetwordSet> accounts);
FlatnessCurve flatness_curve(const Classifier& classifier,
                             std::span<const SweetwordSet> accounts);

// Success of blind guessing: x / k. Throws unless 1 <= x <= k.
double random_baseline(std::size_t k, std::size_t x);

// Mean curve over runs with equal k (the per-dataset averaging mode).
FlatnessCurve average_curves(std::span<const FlatnessCurve> curves);

struct GridRow {
  std::size_t attempts = 0;
  double success = 0.0;
  double baseline = 0.0;
};

std::vector<GridRow> reporting_grid(const FlatnessCurve& curve,
                                    std::span<const std::size_t> attempts);

// Two-column "x success" data for plotting a flatness graph.
std::string curve_to_dat(const FlatnessCurve& curve);
// x,success,baseline
std::string curve_to_csv(const FlatnessCurve& curve);

}  // namespace honeyfilter
