#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../support/fixtures.hpp"
#include "dequant/error.hpp"
#include "dequant/metrics.hpp"
#include "dequant/qv.hpp"

using namespace dequant;

namespace {

bool has_pair(const ReviewDataset& d, const std::string& better, const std::string& worse) {
  for (const auto& r : d.rankings()) {
    for (const auto& p : r.pairs) {
      if (p.better == better && p.worse == worse) return true;
    }
  }
  return false;
}

}  // namespace

TEST_SUITE("qv") {
  TEST_CASE("ceiling of half") {
    CHECK(ceil_half(7) == 4);
    CHECK(ceil_half(8) == 4);
    CHECK(ceil_half(1) == 1);
    CHECK(ceil_half(0) == 0);
    CHECK(ceil_half(-1) == 0);
    CHECK(ceil_half(-3) == -1);
    CHECK(ceil_half(-4) == -2);
  }

  TEST_CASE("default grid") {
    const auto g = default_lambda_grid();
    REQUIRE(g.size() == 40);
    CHECK(g.front() == 1.0);
    CHECK(g[4] == doctest::Approx(std::exp(1.0)));
    CHECK(g.back() == doctest::Approx(std::exp(39.0 / 4.0)));
    CHECK(std::is_sorted(g.begin(), g.end()));
  }

  TEST_CASE("coarsening keeps order information from the original scores") {
    const auto d = fixture::single_reviewer({"A", "B", "C"}, {7, 8, 7});
    const auto c = coarsen(d, ceil_half);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.score(i) == 4);
    CHECK(has_pair(c, "B", "A"));
    CHECK(has_pair(c, "B", "C"));
    CHECK_FALSE(has_pair(c, "A", "C"));
    CHECK_FALSE(has_pair(c, "C", "A"));
    CHECK(c.scale().lower == 0);
    CHECK(c.scale().upper == 5);
    CHECK(validate(c).empty());
  }

  TEST_CASE("coarsening replaces the original rankings") {
    const auto d = fixture::single_reviewer({"A", "B"}, {7, 7}, {{"A", "B"}});
    CHECK(coarsen(d, ceil_half).ranked_pairs().empty());
  }

  TEST_CASE("identity coarsening gives the strict score order") {
    const auto inst = fixture::small_instance(4);
    const auto c = coarsen(inst.dataset, [](int z) { return z; });
    CHECK(c.scores() == inst.dataset.scores());
    const auto& a = c.assignment();
    std::size_t expected = 0;
    for (std::size_t r = 0; r < a.num_reviewers(); ++r) {
      for (std::size_t i : a.reviews_of_reviewer(r)) {
        for (std::size_t j : a.reviews_of_reviewer(r)) expected += c.score(i) > c.score(j);
      }
    }
    CHECK(c.ranked_pairs().size() == expected);
    for (const auto& p : c.ranked_pairs()) CHECK(c.score(p.better) > c.score(p.worse));
  }

  TEST_CASE("single candidate is selected whatever the data") {
    const auto inst = fixture::small_instance(5);
    QVConfig config;
    config.grid = {2.0};
    const auto report = select_lambda(inst.dataset, config, {});
    CHECK(report.selected_lambda == 2.0);
    CHECK(report.errors.size() == 1);
  }

  TEST_CASE("equal errors go to the smallest lambda") {
    const auto inst = fixture::small_instance(6);
    QVConfig config;
    config.grid = {0.5, 1.0, 4.0};
    config.loss = [](std::span<const double>, std::span<const double>) { return 0.25; };
    CHECK(select_lambda(inst.dataset, config, {}).selected_lambda == 0.5);
    config.loss = [](std::span<const double>, std::span<const double> e) { return 0.25 + 1e-15 * e[0]; };
    CHECK(select_lambda(inst.dataset, config, {}).selected_lambda == 0.5);
  }

  TEST_CASE("all scores equal cannot be validated") {
    try {
      select_lambda(fixture::single_paper({4, 4, 4}), QVConfig{}, {});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDegenerateValidation);
    }
  }

  TEST_CASE("malformed grid") {
    const auto inst = fixture::small_instance(7);
    for (const std::vector<double>& grid : {std::vector<double>{}, {1.0, 1.0}, {2.0, 1.0}, {-1.0}}) {
      QVConfig config;
      config.grid = grid;
      CHECK_THROWS_AS(select_lambda(inst.dataset, config, {}), Error);
    }
  }

  TEST_CASE("property: deterministic and selects from the grid") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto inst = fixture::small_instance(seed, 24, 4, 4, 0.7);
      const auto a = select_lambda(inst.dataset, QVConfig{}, {});
      const auto b = select_lambda(inst.dataset, QVConfig{}, {});
      CHECK(a.errors == b.errors);
      CHECK(a.selected_lambda == b.selected_lambda);
      const auto g = default_lambda_grid();
      CHECK(std::find(g.begin(), g.end(), a.selected_lambda) != g.end());
      CHECK(a.errors[a.selected_index] == *std::min_element(a.errors.begin(), a.errors.end()));
    }
  }

  TEST_CASE("selected lambda is close to the grid oracle on a default instance") {
    SynthConfig config;
    config.seed = 2;
    const auto inst = generate(config);
    const auto report = select_lambda(inst.dataset, QVConfig{}, {});
    double best = 1.0, chosen = 1.0;
    for (double lambda : default_lambda_grid()) {
      const auto y = dequantize(inst.dataset, DequantizerConfig{lambda, kDefaultEpsilon, {}});
      const double e = kendall_tau_error({inst.truth_y, y.values});
      best = std::min(best, e);
      if (lambda == report.selected_lambda) chosen = e;
    }
    CHECK(chosen - best <= 0.02);
  }
}
