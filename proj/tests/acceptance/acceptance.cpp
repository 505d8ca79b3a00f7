// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-fail=N[,N...]]
// Exit status is 0 when the set of failing criteria equals the expected set,
// so a documented, unattainable criterion keeps reporting FAIL without
// breaking the suite, and an unexpected pass or failure is still caught.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "../support/fixtures.hpp"
#include "../support/iclr_golden.hpp"
#include "../support/oracles.hpp"
#include "dequant/baselines.hpp"
#include "dequant/dequantizer.hpp"
#include "dequant/experiment.hpp"
#include "dequant/io.hpp"
#include "dequant/metrics.hpp"
#include "dequant/qv.hpp"
#include "dequant/rng.hpp"
#include "dequant/synthgen.hpp"

using namespace dequant;

namespace {

// Tolerances and limits, one per criterion.
constexpr double kC1Feasibility = 1e-6;
constexpr double kC1Seconds = 5 * 60;
constexpr double kC2Tolerance = 1e-4;
constexpr double kC3Lambda = 1e6;
constexpr double kC3Tolerance = 1e-3;
constexpr double kC4Tolerance = 1e-3;
constexpr double kC5Grid = 1e-3;
constexpr double kC5Tolerance = 1e-5;
constexpr double kC6MaxProposedTies = 0.015;
constexpr double kC6QuantizedTiesSigma1 = 0.111;
constexpr double kC6QuantizedTiesSigma01 = 0.124;
constexpr double kC6TieBand = 0.02;
constexpr double kC6Seconds = 15 * 60;
constexpr double kC8Gap = 0.02;
constexpr double kC12Range = 0.01;

constexpr int kTrials = 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

DequantizerConfig at(double lambda, double epsilon = kDefaultEpsilon) { return DequantizerConfig{lambda, epsilon, {}}; }

// Copy of `d` keeping each reported pair with probability `keep`.
ReviewDataset drop_pairs(const ReviewDataset& d, Rng& rng, double keep) {
  std::vector<Review> reviews;
  const auto& a = d.assignment();
  for (std::size_t i = 0; i < d.size(); ++i) reviews.push_back({a.reviewer_id(i), a.paper_id(i), d.score(i)});
  std::vector<PartialRanking> rankings;
  for (const auto& ranking : d.rankings()) {
    PartialRanking kept{ranking.reviewer, {}};
    for (const auto& pair : ranking.pairs) {
      if (rng.uniform() < keep) kept.pairs.push_back(pair);
    }
    rankings.push_back(std::move(kept));
  }
  return ReviewDataset(d.scale(), std::move(reviews), std::move(rankings));
}

// At most four reviews over one or two papers, scores and rankings drawn
// from the latent-score model.
ReviewDataset tiny_dataset(Rng& rng) {
  const int papers = 1 + static_cast<int>(rng.below(2));
  const int reviewers = 1 + static_cast<int>(rng.below(3));
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r < reviewers; ++r) {
    for (int p = 0; p < papers; ++p) cells.emplace_back(r, p);
  }
  rng.shuffle(std::span(cells));
  const std::size_t n = std::min<std::size_t>(cells.size(), 2 + rng.below(3));
  cells.resize(n);

  std::vector<double> x(static_cast<std::size_t>(papers));
  for (double& v : x) v = rng.uniform(1.0, 9.0);
  const double sigma = rng.uniform(0.3, 1.5);
  std::vector<Review> reviews;
  std::vector<RawScore> latent;
  for (const auto& [r, p] : cells) {
    const double y = std::clamp(x[static_cast<std::size_t>(p)] + sigma * rng.normal(), 0.0, 10.0);
    const std::string reviewer = fmt::format("r{}", r);
    const std::string paper = fmt::format("p{}", p);
    reviews.push_back({reviewer, paper, static_cast<int>(std::floor(y + 0.5))});
    latent.push_back({reviewer, paper, y});
  }
  return ReviewDataset({0, 10}, std::move(reviews), derive_rankings_from_raw_scores(latent));
}

// 1. Every output meets its box and every reported pair its gap.
Outcome criterion_1() {
  const auto start = Clock::now();
  const auto grid = default_lambda_grid();
  Rng rng(101);
  double worst_box = 0.0;
  double worst_gap = 0.0;
  int violations = 0;
  for (int k = 0; k < 200; ++k) {
    SynthConfig c;
    c.num_papers = k % 2 ? 60 : 10;
    // Loads that divide P * mu, with room for distinct partners.
    std::vector<std::pair<int, int>> loads;
    for (int mu : {2, 3, 4, 5, 6}) {
      for (int kappa : {2, 3, 4, 5, 6, 8}) {
        if ((c.num_papers * mu) % kappa == 0 && kappa <= c.num_papers && mu <= c.num_papers * mu / kappa) {
          loads.emplace_back(mu, kappa);
        }
      }
    }
    const auto [mu, kappa] = loads[rng.below(loads.size())];
    c.reviews_per_paper = mu;
    c.papers_per_reviewer = kappa;
    c.sigma = rng.uniform(0.05, 1.5);
    c.seed = rng.next();
    const ReviewDataset d = drop_pairs(generate(c).dataset, rng, rng.uniform(0.3, 1.0));
    const double lambda = grid[rng.below(grid.size())];
    const auto y = dequantize(d, at(lambda)).values;
    bool ok = true;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double out = std::max(d.score(i) - 0.5 - y[i], y[i] - d.score(i) - 0.5);
      worst_box = std::max(worst_box, out);
      ok = ok && out <= kC1Feasibility;
    }
    for (const auto& pair : d.ranked_pairs()) {
      const double short_by = kDefaultEpsilon - (y[pair.better] - y[pair.worse]);
      worst_gap = std::max(worst_gap, short_by);
      ok = ok && short_by <= kC1Feasibility;
    }
    violations += !ok;
  }
  const double elapsed = seconds_since(start);
  return {violations == 0 && elapsed < kC1Seconds,
          fmt::format("200 instances, {} violating; worst box excess {:.2e}, worst gap shortfall {:.2e}; {:.1f} s",
                      violations, worst_box, worst_gap, elapsed)};
}

// 2. Scores-only solution against the closed-form weighted average.
Outcome criterion_2() {
  const auto grid = default_lambda_grid();
  int failures = 0;
  double worst = 0.0;
  double worst_vs_exact = 0.0;
  std::map<int, int> failures_by_mu;
  const int mus[] = {2, 3, 4, 6};
  for (int k = 0; k < 100; ++k) {
    const int mu = mus[k % 4];
    const double lambda = grid[static_cast<std::size_t>((k * 7) % 40)];
    const auto inst = fixture::small_instance(derive_seed(202, static_cast<std::uint64_t>(k)), 12, mu, mu, 1.0);
    const ReviewDataset d = fixture::without_rankings(inst.dataset);
    const auto solved = dequantize(d, at(lambda)).values;
    const auto closed = score_only_closed_form(d, lambda).values;
    const double diff = max_abs_diff(solved, closed);
    worst = std::max(worst, diff);
    if (diff > kC2Tolerance) {
      ++failures;
      ++failures_by_mu[mu];
    }
    // Same solutions against the exact per-paper optimum.
    const auto& a = d.assignment();
    for (std::size_t p = 0; p < a.num_papers(); ++p) {
      std::vector<int> z;
      for (std::size_t i : a.reviews_of_paper(p)) z.push_back(d.score(i));
      const auto exact = oracle::scores_only_paper(z, lambda);
      std::size_t r = 0;
      for (std::size_t i : a.reviews_of_paper(p)) worst_vs_exact = std::max(worst_vs_exact, std::abs(solved[i] - exact[r++]));
    }
  }
  std::string by_mu;
  for (int mu : mus) by_mu += fmt::format(" mu={}:{}", mu, failures_by_mu[mu]);
  return {failures == 0,
          fmt::format("{}/100 instances beyond {:.0e} (worst {:.4f};{}); solver vs exact scores-only optimum {:.1e}",
                      failures, kC2Tolerance, worst, by_mu, worst_vs_exact)};
}

// 3. Large lambda approaches the BRE-adjusted baseline.
Outcome criterion_3() {
  double worst = 0.0;
  int order_mismatches = 0;
  const double sigmas[] = {0.1, 0.5, 1.0};
  for (int k = 0; k < 50; ++k) {
    const auto inst = fixture::total_ranking_instance(derive_seed(303, static_cast<std::uint64_t>(k)), 60, 4, 4,
                                                      sigmas[k % 3]);
    const auto& d = inst.dataset;
    const auto y = dequantize(d, at(kC3Lambda)).values;
    const auto bre = bre_adjusted_scores(d, kDefaultEpsilon).values;
    worst = std::max(worst, max_abs_diff(y, bre));
    const auto& a = d.assignment();
    for (std::size_t r = 0; r < a.num_reviewers(); ++r) {
      for (std::size_t i : a.reviews_of_reviewer(r)) {
        for (std::size_t j : a.reviews_of_reviewer(r)) {
          order_mismatches += (y[i] > y[j]) != (bre[i] > bre[j]);
        }
      }
    }
  }
  return {worst <= kC3Tolerance && order_mismatches == 0,
          fmt::format("50 instances, max |y - bre| = {:.2e}, per-reviewer order mismatches {}", worst,
                      order_mismatches)};
}

// Golden-section minimizer of a convex function on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    const double c = b - g * (b - a);
    const double e = a + g * (b - a);
    if (f(c) <= f(e)) {
      b = e;
    } else {
      a = c;
    }
  }
  return 0.5 * (a + b);
}

// 4. Consensus-only solution against the brute-force likelihood maximizer.
Outcome criterion_4() {
  Rng rng(404);
  double worst = 0.0;
  constexpr double kSigma = 1.0;
  // Likelihood is flat when every review of a paper shifts together; the
  // small pull toward z picks the same point as the vanishing fit term.
  constexpr double kTieBreak = kConsensusOnlyLambda / (2.0 * kSigma * kSigma);
  for (int k = 0; k < 30; ++k) {
    const ReviewDataset d = tiny_dataset(rng);
    const auto& a = d.assignment();
    const QPProblem constraints = assemble(d, 1.0, kDefaultEpsilon);
    auto negative_profiled = [&](const Eigen::VectorXd& y) {
      std::vector<double> yy(y.data(), y.data() + y.size());
      std::vector<double> x(a.num_papers());
      for (std::size_t p = 0; p < a.num_papers(); ++p) {
        double lo = 1e9, hi = -1e9;
        for (std::size_t i : a.reviews_of_paper(p)) {
          lo = std::min(lo, yy[i]);
          hi = std::max(hi, yy[i]);
        }
        x[p] = golden_section(
            [&](double xp) {
              double s = 0.0;
              for (std::size_t i : a.reviews_of_paper(p)) s += (yy[i] - xp) * (yy[i] - xp);
              return s;
            },
            lo, hi);
      }
      double pull = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) pull += (yy[i] - d.score(i)) * (yy[i] - d.score(i));
      return -thurstone_joint_loglikelihood(d, yy, x, kSigma) + kTieBreak * pull;
    };
    const Eigen::VectorXd best = brute_force_search(constraints, negative_profiled, 1e-3);
    const auto y = dequantize_consensus_only(d).values;
    worst = std::max(worst, max_abs_diff(y, std::span<const double>(best.data(), static_cast<std::size_t>(best.size()))));
  }
  return {worst <= kC4Tolerance, fmt::format("30 instances with <= 4 reviews, max deviation {:.2e}", worst)};
}

// 5. Solver objective against the lattice search.
Outcome criterion_5() {
  Rng rng(505);
  const auto grid = default_lambda_grid();
  double worst = 0.0;
  double worst_signed = 0.0;
  for (int k = 0; k < 100; ++k) {
    const ReviewDataset d = tiny_dataset(rng);
    const double epsilon = std::array{0.01, 0.05, 0.1}[rng.below(3)];
    const QPProblem problem = assemble(d, grid[rng.below(grid.size())], epsilon);
    const double solved = solve(problem).objective_value;
    const double searched = brute_force_minimize(problem, kC5Grid).objective_value;
    if (std::abs(solved - searched) > worst) {
      worst = std::abs(solved - searched);
      worst_signed = solved - searched;
    }
  }
  return {worst <= kC5Tolerance,
          fmt::format("100 instances with <= 4 variables, max |gap| {:.2e} (solve - search = {:.2e})", worst,
                      worst_signed)};
}

// Shared by criteria 6 and 9.
struct SweepRuns {
  ExperimentReport sigma;
  double sigma_seconds = 0.0;
  ExperimentReport load;
};

ExperimentSpec default_spec() {
  ExperimentSpec spec;
  spec.trials = kTrials;
  spec.seed = 2024;
  return spec;
}

// 6. Sigma sweep trend and tie fractions.
Outcome criterion_6(const SweepRuns& runs) {
  const auto& report = runs.sigma;
  bool pass = runs.sigma_seconds < kC6Seconds;
  std::string detail;
  for (double sigma : report.spec.sweep_values) {
    const double prop = report.cell(Method::kProposed, sigma).kendall_stats->mean;
    const double quant = report.cell(Method::kQuantized, sigma).kendall_stats->mean;
    const double bre = report.cell(Method::kBreAdjusted, sigma).kendall_stats->mean;
    const double prop_ties = report.cell(Method::kProposed, sigma).ties_stats->mean;
    const double quant_ties = report.cell(Method::kQuantized, sigma).ties_stats->mean;
    pass = pass && prop < quant && prop < bre && prop_ties < kC6MaxProposedTies;
    if (sigma == 1.0) pass = pass && std::abs(quant_ties - kC6QuantizedTiesSigma1) <= kC6TieBand;
    if (sigma == 0.1) pass = pass && std::abs(quant_ties - kC6QuantizedTiesSigma01) <= kC6TieBand;
    detail += fmt::format("\n      sigma={}: kendall proposed {:.4f} quantized {:.4f} bre {:.4f}; ties proposed "
                          "{:.2f}% quantized {:.2f}%",
                          sigma, prop, quant, bre, 100 * prop_ties, 100 * quant_ties);
  }
  return {pass, fmt::format("{} trials per sigma, {:.1f} s{}", kTrials, runs.sigma_seconds, detail)};
}

// 7. Load sweep trend.
Outcome criterion_7(const SweepRuns& runs) {
  const auto& report = runs.load;
  bool pass = true;
  double previous_bre = 2.0;
  std::string detail;
  for (double load : report.spec.sweep_values) {
    const double prop = report.cell(Method::kProposed, load).kendall_stats->mean;
    const double quant = report.cell(Method::kQuantized, load).kendall_stats->mean;
    const double bre = report.cell(Method::kBreAdjusted, load).kendall_stats->mean;
    pass = pass && bre < previous_bre && prop < quant && prop < bre;
    previous_bre = bre;
    detail += fmt::format("\n      load={}: kendall proposed {:.4f} quantized {:.4f} bre {:.4f}", load, prop, quant,
                          bre);
  }
  return {pass, fmt::format("{} trials per load{}", kTrials, detail)};
}

// 8. Validation-selected lambda against the best grid lambda on the truth.
Outcome criterion_8() {
  const auto grid = default_lambda_grid();
  std::vector<double> at_selected;
  std::vector<double> at_oracle;
  double worst_trial = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    SynthConfig c;
    c.seed = derive_seed(808, static_cast<std::uint64_t>(t));
    const auto inst = generate(c);
    const auto& d = inst.dataset;
    const double selected = select_lambda(d, QVConfig{}, at(1.0)).selected_lambda;
    double best = 2.0;
    double chosen = 2.0;
    for (double lambda : grid) {
      const double e = kendall_tau_error({inst.truth_y, dequantize(d, at(lambda)).values});
      best = std::min(best, e);
      if (lambda == selected) chosen = e;
    }
    at_selected.push_back(chosen);
    at_oracle.push_back(best);
    worst_trial = std::max(worst_trial, chosen - best);
  }
  const double gap = trial_statistics(at_selected).mean - trial_statistics(at_oracle).mean;
  return {gap <= kC8Gap, fmt::format("{} trials, mean error at selected {:.4f} vs best {:.4f} (gap {:.4f}); worst "
                                     "single-trial gap {:.4f}",
                                     kTrials, trial_statistics(at_selected).mean, trial_statistics(at_oracle).mean,
                                     gap, worst_trial)};
}

// 9. l2 error of the proposed method against each baseline's mean + 1 SEM.
Outcome criterion_9(const SweepRuns& runs) {
  bool pass = true;
  std::string detail;
  for (const ExperimentReport* report : {&runs.sigma, &runs.load}) {
    for (double v : report->spec.sweep_values) {
      const auto& prop = *report->cell(Method::kProposed, v).l2_stats;
      for (Method m : {Method::kQuantized, Method::kBreAdjusted}) {
        const auto& base = *report->cell(m, v).l2_stats;
        pass = pass && prop.mean <= base.mean + base.standard_error;
      }
      detail += fmt::format("\n      {}={}: l2 proposed {:.3f} quantized {:.3f} bre {:.3f}", to_string(report->spec.sweep),
                            v, prop.mean, report->cell(Method::kQuantized, v).l2_stats->mean,
                            report->cell(Method::kBreAdjusted, v).l2_stats->mean);
    }
  }
  return {pass, fmt::format("sigma and load sweep points{}", detail)};
}

// 10. Raw-score preparation reproduces the golden fixture exactly.
Outcome criterion_10() {
  const auto data = prepare_iclr_style(fixture::kDataDir / "iclr_raw10.csv", fixture::golden_iclr_options());
  const bool golden = fixture::describe_iclr(data) == fixture::read_text(fixture::kDataDir / "iclr_golden.txt");
  bool mapped = true;
  for (std::size_t i = 0; i < data.dataset.size(); ++i) {
    mapped = mapped && data.dataset.score(i) == static_cast<int>(std::ceil(data.truth_y[i] / 2.0));
  }
  bool three = true;
  const auto& a = data.dataset.assignment();
  for (std::size_t p = 0; p < a.num_papers(); ++p) three = three && a.reviews_of_paper(p).size() == 3;
  return {golden && mapped && three,
          fmt::format("golden text {}, score map {}, three reviews per paper {}", golden ? "matches" : "differs",
                      mapped ? "ok" : "wrong", three ? "ok" : "wrong")};
}

// 11. Metric examples, exactly.
Outcome criterion_11() {
  const std::vector<double> t{1.0, 2.0, 3.0};
  const bool pass = kendall_tau_error({t, t}) == 0.0 && kendall_tau_error({t, {-1.0, -2.0, -3.0}}) == 1.0 &&
                    kendall_tau_error({t, {1.0, 3.0, 2.0}}) == 1.0 / 3.0 &&
                    l2_error({{0.0, 0.0}, {3.0, 4.0}}) == 5.0 && project_to_original_scale(1.2) == 2 &&
                    project_to_original_scale(1.5) == 3 && project_to_original_scale(1.0) == 2;
  return {pass, "kendall 0, 1, 1/3; l2 5; projections 2, 3, 2"};
}

// 12. Insensitivity to the ranking gap.
Outcome criterion_12() {
  ExperimentSpec spec = default_spec();
  spec.methods = {Method::kProposed};
  spec.metrics = {Metric::kKendall};
  spec.sweep = SweepParameter::kEpsilon;
  spec.sweep_values = {0.01, 0.05, 0.1};
  const auto report = run_experiment(spec);
  double lo = 2.0, hi = -1.0;
  std::string detail;
  for (double eps : spec.sweep_values) {
    const double e = report.cell(Method::kProposed, eps).kendall_stats->mean;
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    detail += fmt::format(" eps={}:{:.4f}", eps, e);
  }
  return {hi - lo < kC12Range, fmt::format("range {:.4f};{}", hi - lo, detail)};
}

std::set<int> parse_expected(int argc, char** argv) {
  std::set<int> out;
  const std::string flag = "--expect-fail=";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind(flag, 0) != 0) continue;
    std::size_t start = flag.size();
    while (start < arg.size()) {
      const std::size_t end = std::min(arg.find(',', start), arg.size());
      out.insert(std::stoi(arg.substr(start, end - start)));
      start = end + 1;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<int> expected = parse_expected(argc, argv);
  std::set<int> failed;

  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    if (!o.pass) failed.insert(id);
    const char* note = !o.pass && expected.count(id) ? " (expected)" : "";
    fmt::print("[{}] {:>2}. {}{}: {}\n", o.pass ? "PASS" : "FAIL", id, name, note, o.detail);
    std::fflush(stdout);
  };

  SweepRuns runs;
  auto sweeps = [&] {
    const auto start = Clock::now();
    runs.sigma = run_experiment(default_spec());
    runs.sigma_seconds = seconds_since(start);
    ExperimentSpec load = default_spec();
    load.sweep = SweepParameter::kPapersPerReviewer;
    load.sweep_values = {2, 4, 6};
    runs.load = run_experiment(load);
  };
  bool sweeps_ok = true;
  std::string sweep_error;
  try {
    sweeps();
  } catch (const std::exception& e) {
    sweeps_ok = false;
    sweep_error = e.what();
  }
  auto needs_sweeps = [&](const std::function<Outcome(const SweepRuns&)>& f) {
    return [&, f]() -> Outcome {
      if (!sweeps_ok) return {false, "sweep failed: " + sweep_error};
      return f(runs);
    };
  };

  report(1, "constraint consistency", criterion_1);
  report(2, "scores-only closed form", criterion_2);
  report(3, "large-lambda limit equals BRE adjustment", criterion_3);
  report(4, "consensus-only equals likelihood maximizer", criterion_4);
  report(5, "solver objective equals lattice search", criterion_5);
  report(6, "sigma sweep trend and tie fractions", needs_sweeps(criterion_6));
  report(7, "load sweep trend", needs_sweeps(criterion_7));
  report(8, "validation-selected lambda near best lambda", criterion_8);
  report(9, "l2 non-inferiority", needs_sweeps(criterion_9));
  report(10, "raw-score preparation golden fixture", criterion_10);
  report(11, "metric examples", criterion_11);
  report(12, "ranking-gap robustness", criterion_12);

  std::string failed_list;
  for (int id : failed) failed_list += fmt::format(" {}", id);
  fmt::print("failed:{}\n", failed.empty() ? " none" : failed_list);
  if (failed != expected) {
    std::string expected_list;
    for (int id : expected) expected_list += fmt::format(" {}", id);
    fmt::print("expected failures:{}\n", expected.empty() ? " none" : expected_list);
    return 1;
  }
  return 0;
}
