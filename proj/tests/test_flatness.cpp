#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "honeyfilter/error.hpp"
#include "honeyfilter/flatness.hpp"
#include "honeyfilter/rng.hpp"

using namespace honeyfilter;

namespace {

// Account i hides its real password at position real[i] among k words.
std::vector<SweetwordSet> accounts_with(std::size_t k, const std::vector<std::size_t>& real) {
  std::vector<SweetwordSet> out;
  for (std::size_t i = 0; i < real.size(); ++i) {
    SweetwordSet s;
    s.account_id = static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < k; ++j) s.sweetwords.push_back("w" + std::to_string(i) + "_" + std::to_string(j));
    s.real_index = real[i];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SweetwordSet> random_accounts(std::size_t k, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> real(n);
  for (auto& r : real) r = rng.uniform_below(k);
  return accounts_with(k, real);
}

Scorer random_scorer(std::uint64_t seed) {
  return [seed](std::span<const std::string> words) {
    std::vector<double> s;
    for (const auto& w : words) s.push_back(Rng(derive_seed(seed, w)).uniform01());
    return s;
  };
}

}  // namespace

TEST_SUITE("flatness") {
  TEST_CASE("ranking") {
    CHECK(rank_by_scores(std::vector<double>{0.7}) == std::vector<std::size_t>{0});
    CHECK(rank_by_scores(std::vector<double>{0.2, 0.9, 0.5}) == std::vector<std::size_t>{1, 2, 0});
    CHECK(rank_by_scores(std::vector<double>{0.4, 0.4, 0.4, 0.4}) ==
          std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(rank_by_scores(std::vector<double>{0.1, 0.5, 0.5, 0.9}) ==
          std::vector<std::size_t>{3, 1, 2, 0});
  }

  TEST_CASE("rankings are permutations and scale invariant") {
    auto accounts = random_accounts(20, 50, 1);
    auto scorer = random_scorer(2);
    auto scaled = [&](std::span<const std::string> w) {
      auto s = scorer(w);
      for (auto& v : s) v *= 7.5;
      return s;
    };
    auto a = rank_accounts(scorer, accounts);
    auto b = rank_accounts(scaled, accounts);
    CHECK(a == b);
    for (const auto& r : a) {
      auto sorted = r;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
    }
    CHECK(rank_sweetwords(scorer, accounts[3]) == a[3]);
  }

  TEST_CASE("hand counted curve") {
    auto accounts = accounts_with(3, {0, 2, 2});
    // Constant scores rank by index, so real index = rank.
    Scorer flat = [](std::span<const std::string> w) { return std::vector<double>(w.size(), 1.0); };
    auto curve = flatness_curve(flat, accounts);
    REQUIRE(curve.success.size() == 3);
    CHECK(curve.success[0] == doctest::Approx(1.0 / 3));
    CHECK(curve.success[1] == doctest::Approx(1.0 / 3));
    CHECK(curve.success[2] == 1.0);
    CHECK(curve.at(3) == 1.0);
    CHECK_THROWS_AS(curve.at(0), Error);
    CHECK_THROWS_AS(curve.at(4), Error);
  }

  TEST_CASE("identities") {
    auto accounts = random_accounts(20, 200, 3);
    auto curve = flatness_curve(random_scorer(4), accounts);
    CHECK(curve.success.back() == 1.0);
    CHECK(std::is_sorted(curve.success.begin(), curve.success.end()));

    const auto* acc = &accounts;
    Scorer oracle = [acc](std::span<const std::string> words) {
      std::vector<double> s;
      for (const auto& w : words) {
        bool real = false;
        for (const auto& a : *acc) real = real || a.real() == w;
        s.push_back(real ? 1.0 : 0.0);
      }
      return s;
    };
    for (double v : flatness_curve(oracle, accounts).success) CHECK(v == 1.0);

    auto single = accounts_with(1, {0, 0});
    CHECK(flatness_curve(oracle, single).success == std::vector<double>{1.0});
  }

  TEST_CASE("random scorer is calibrated") {
    std::vector<FlatnessCurve> curves;
    for (std::uint64_t s = 0; s < 10; ++s) {
      curves.push_back(flatness_curve(random_scorer(100 + s), random_accounts(20, 500, 200 + s)));
    }
    for (const auto& c : curves) {
      for (std::size_t x = 1; x < 20; ++x) {
        const double p = x / 20.0;
        CHECK(std::abs(c.at(x) - p) < 3.5 * std::sqrt(p * (1 - p) / 500.0));
      }
    }
    auto mean = average_curves(curves);
    CHECK(mean.at(1) == doctest::Approx(0.05).epsilon(0.02));
    CHECK(mean.n_accounts == 5000);
  }

  TEST_CASE("baselines") {
    CHECK(random_baseline(20, 1) == 0.05);
    CHECK(random_baseline(20, 10) == 0.5);
    CHECK(random_baseline(20, 20) == 1.0);
    CHECK(random_baseline(30, 1) == doctest::Approx(0.0333).epsilon(0.001));
    CHECK_THROWS_AS(random_baseline(20, 0), Error);
    CHECK_THROWS_AS(random_baseline(20, 21), Error);
  }

  TEST_CASE("errors") {
    auto mixed = accounts_with(3, {0});
    auto more = accounts_with(4, {1});
    mixed.push_back(more[0]);
    CHECK_THROWS_AS(flatness_curve(random_scorer(1), mixed), Error);
    CHECK_THROWS_AS(flatness_curve(random_scorer(1), std::vector<SweetwordSet>{}), Error);
  }

  TEST_CASE("grid and exports") {
    auto curve = flatness_curve(random_scorer(5), random_accounts(20, 100, 6));
    const std::vector<std::size_t> attempts{1, 3, 5, 10};
    auto grid = reporting_grid(curve, attempts);
    REQUIRE(grid.size() == 4);
    CHECK(grid[3].attempts == 10);
    CHECK(grid[3].success == curve.at(10));
    CHECK(grid[3].baseline == 0.5);
    CHECK(curve_to_csv(curve).starts_with("x,success,baseline\n1,"));
    CHECK(curve_to_dat(curve).starts_with("# x success\n1 "));
  }
}
