#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dequant/dequantizer.hpp"
#include "dequant/io.hpp"
#include "dequant/metrics.hpp"
#include "dequant/synthgen.hpp"

namespace dequant {

enum class Method { kProposed, kQuantized, kBreAdjusted, kPartialRankingsAdjusted };
enum class SweepParameter { kSigma, kPapersPerReviewer, kReviewsPerPaper, kLambda, kEpsilon };
enum class Metric { kKendall, kL2, kTies };

std::string_view to_string(Method method);
std::string_view to_string(SweepParameter parameter);
std::string_view to_string(Metric metric);
/// Inverse of to_string. Throws Error(kInvalidArgument) for unknown names.
Method parse_method(std::string_view name);
SweepParameter parse_sweep_parameter(std::string_view name);
Metric parse_metric(std::string_view name);

/// Raw `paper_id,score` file prepared afresh for every trial.
struct IclrSource {
  std::filesystem::path raw_path;
  int reviews_per_paper = 3;
  int papers_per_reviewer = 6;
};

struct ExperimentSpec {
  std::vector<Method> methods{Method::kProposed, Method::kQuantized, Method::kBreAdjusted};
  SweepParameter sweep = SweepParameter::kSigma;
  std::vector<double> sweep_values{0.1, 0.5, 1.0};
  int trials = 20;
  /// Trial t uses derive_seed(seed, t) at every sweep value.
  std::uint64_t seed = 0;
  std::variant<SynthConfig, IclrSource> base = SynthConfig{};
  std::vector<Metric> metrics{Metric::kKendall, Metric::kL2, Metric::kTies};
  double epsilon = kDefaultEpsilon;
  /// Fixed lambda for the proposed method; selected per trial by
  /// quantization validation when absent, unless lambda is swept.
  std::optional<double> lambda;
  SolverSettings solver;
};

struct CellResult {
  Method method = Method::kProposed;
  double sweep_value = 0.0;
  /// Per-trial values of each requested metric, in trial order.
  std::vector<double> kendall;
  std::vector<double> l2;
  std::vector<double> ties;
  std::optional<TrialStatistics> kendall_stats;
  std::optional<TrialStatistics> l2_stats;
  std::optional<TrialStatistics> ties_stats;
  /// Lambda used by the proposed method in each trial.
  std::vector<double> lambdas;
};

struct ExperimentReport {
  ExperimentSpec spec;
  /// Sweep value major, method minor, both in spec order.
  std::vector<CellResult> cells;

  const CellResult& cell(Method method, double sweep_value) const;
};

/// Estimate produced by one method. `lambda` overrides the proposed method's
/// weight; the weight actually used is written to `used_lambda`.
DequantizedScores run_method(Method method, const ReviewDataset& dataset, double epsilon,
                             std::optional<double> lambda, const SolverSettings& solver,
                             double* used_lambda = nullptr);

/// Trials run in parallel; results do not depend on the thread count. A
/// failing trial aborts the run with an error naming the trial.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Versioned JSON document (report_version 1) echoing the spec.
std::string to_json(const ExperimentReport& report);
/// Plain-text table of mean +- standard error per metric.
std::string format_table(const ExperimentReport& report);
/// One row per (sweep value, method, metric): mean and standard error.
std::string format_csv(const ExperimentReport& report);

}  // namespace dequant
