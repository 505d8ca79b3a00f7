#include "dequant/experiment.hpp"

#include <array>
#include <cmath>
#include <exception>

#include <fmt/format.h>
#include <json.hpp>

#include "dequant/baselines.hpp"
#include "dequant/error.hpp"
#include "dequant/qv.hpp"
#include "dequant/rng.hpp"

namespace dequant {

namespace {

constexpr int kReportVersion = 1;

constexpr std::array<std::pair<Method, std::string_view>, 4> kMethodNames{{
    {Method::kProposed, "proposed"},
    {Method::kQuantized, "quantized"},
    {Method::kBreAdjusted, "bre_adjusted"},
    {Method::kPartialRankingsAdjusted, "partial_rankings_adjusted"},
}};
constexpr std::array<std::pair<SweepParameter, std::string_view>, 5> kSweepNames{{
    {SweepParameter::kSigma, "sigma"},
    {SweepParameter::kPapersPerReviewer, "papers_per_reviewer"},
    {SweepParameter::kReviewsPerPaper, "reviews_per_paper"},
    {SweepParameter::kLambda, "lambda"},
    {SweepParameter::kEpsilon, "epsilon"},
}};
constexpr std::array<std::pair<Metric, std::string_view>, 3> kMetricNames{{
    {Metric::kKendall, "kendall"},
    {Metric::kL2, "l2"},
    {Metric::kTies, "ties"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "unknown";
}

template <typename E, std::size_t N>
E value_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name, std::string_view what) {
  for (const auto& [v, n] : table) {
    if (n == name) return v;
  }
  std::string known;
  for (const auto& [v, n] : table) known += (known.empty() ? "" : ", ") + std::string(n);
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown {} '{}' (expected one of {})", what, name, known));
}

bool wants(const std::vector<Metric>& metrics, Metric m) {
  return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
}

int as_count(double value, SweepParameter parameter) {
  if (value != std::floor(value) || value < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} must be a positive integer, got {}", to_string(parameter), value));
  }
  return static_cast<int>(value);
}

void check_spec(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
  if (spec.methods.empty()) throw Error(ErrorCode::kInvalidArgument, "no methods requested");
  if (spec.sweep_values.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep has no values");
  const bool file_based = std::holds_alternative<IclrSource>(spec.base);
  for (double v : spec.sweep_values) {
    switch (spec.sweep) {
      case SweepParameter::kSigma:
        if (file_based) throw Error(ErrorCode::kInvalidArgument, "sigma cannot be swept on file data");
        if (!(v >= 0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be nonnegative");
        break;
      case SweepParameter::kPapersPerReviewer:
      case SweepParameter::kReviewsPerPaper:
        as_count(v, spec.sweep);
        break;
      case SweepParameter::kLambda:
        if (!(v > 0)) throw Error(ErrorCode::kInvalidArgument, "swept lambda must be positive");
        break;
      case SweepParameter::kEpsilon:
        if (!(v > 0 && v < 1)) throw Error(ErrorCode::kInvalidArgument, "swept epsilon must lie in (0, 1)");
        break;
    }
  }
}

// Data for one trial at one sweep point.
struct TrialData {
  ReviewDataset dataset;
  std::vector<double> truth;
  bool file_based = false;
};

TrialData make_trial(const ExperimentSpec& spec, double sweep_value, std::uint64_t seed) {
  if (const auto* source = std::get_if<IclrSource>(&spec.base)) {
    IclrOptions options{source->reviews_per_paper, source->papers_per_reviewer, seed};
    if (spec.sweep == SweepParameter::kPapersPerReviewer) options.papers_per_reviewer = as_count(sweep_value, spec.sweep);
    if (spec.sweep == SweepParameter::kReviewsPerPaper) options.reviews_per_paper = as_count(sweep_value, spec.sweep);
    auto data = prepare_iclr_style(source->raw_path, options);
    return {std::move(data.dataset), std::move(data.truth_y), true};
  }
  SynthConfig config = std::get<SynthConfig>(spec.base);
  config.seed = seed;
  if (spec.sweep == SweepParameter::kSigma) config.sigma = sweep_value;
  if (spec.sweep == SweepParameter::kPapersPerReviewer) config.papers_per_reviewer = as_count(sweep_value, spec.sweep);
  if (spec.sweep == SweepParameter::kReviewsPerPaper) config.reviews_per_paper = as_count(sweep_value, spec.sweep);
  auto instance = generate(config);
  return {std::move(instance.dataset), std::move(instance.truth_y), false};
}

// Metric values of one method in one trial.
struct TrialOutcome {
  double kendall = 0.0;
  double l2 = 0.0;
  double ties = 0.0;
  double lambda = 0.0;
};

nlohmann::json stats_json(const std::optional<TrialStatistics>& s) {
  if (!s) return nullptr;
  return {{"mean", s->mean}, {"standard_error", s->standard_error}};
}

}  // namespace

std::string_view to_string(Method method) { return name_of(kMethodNames, method); }
std::string_view to_string(SweepParameter parameter) { return name_of(kSweepNames, parameter); }
std::string_view to_string(Metric metric) { return name_of(kMetricNames, metric); }
Method parse_method(std::string_view name) { return value_of(kMethodNames, name, "method"); }
SweepParameter parse_sweep_parameter(std::string_view name) { return value_of(kSweepNames, name, "sweep parameter"); }
Metric parse_metric(std::string_view name) { return value_of(kMetricNames, name, "metric"); }

const CellResult& ExperimentReport::cell(Method method, double sweep_value) const {
  for (const auto& c : cells) {
    if (c.method == method && c.sweep_value == sweep_value) return c;
  }
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("no result for {} at {}", to_string(method), sweep_value));
}

DequantizedScores run_method(Method method, const ReviewDataset& dataset, double epsilon,
                             std::optional<double> lambda, const SolverSettings& solver, double* used_lambda) {
  switch (method) {
    case Method::kProposed: {
      auto result = dequantize_detailed(dataset, DequantizerConfig{lambda, epsilon, solver});
      if (used_lambda) *used_lambda = result.lambda;
      return std::move(result.scores);
    }
    case Method::kQuantized:
      return quantized_baseline(dataset);
    case Method::kBreAdjusted:
      if (has_total_rankings(dataset)) return bre_adjusted_scores(dataset, epsilon);
      return partial_rankings_adjusted_scores(dataset, epsilon, groups_from_rankings(dataset));
    case Method::kPartialRankingsAdjusted:
      return partial_rankings_adjusted_scores(dataset, epsilon, groups_from_rankings(dataset));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method");
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  check_spec(spec);
  const std::size_t points = spec.sweep_values.size();
  const std::size_t methods = spec.methods.size();
  const auto trials = static_cast<std::size_t>(spec.trials);

  // outcomes[(point * methods + m) * trials + t]
  std::vector<TrialOutcome> outcomes(points * methods * trials);
  std::vector<std::exception_ptr> failures(points * trials);

  const auto jobs = static_cast<std::int64_t>(points * trials);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t job = 0; job < jobs; ++job) {
    const std::size_t point = static_cast<std::size_t>(job) / trials;
    const std::size_t t = static_cast<std::size_t>(job) % trials;
    const double value = spec.sweep_values[point];
    try {
      const TrialData data = make_trial(spec, value, derive_seed(spec.seed, t));
      const double epsilon = spec.sweep == SweepParameter::kEpsilon ? value : spec.epsilon;
      const std::optional<double> lambda = spec.sweep == SweepParameter::kLambda ? std::optional(value) : spec.lambda;
      for (std::size_t m = 0; m < methods; ++m) {
        TrialOutcome& out = outcomes[(point * methods + m) * trials + t];
        const DequantizedScores estimate = run_method(spec.methods[m], data.dataset, epsilon, lambda, spec.solver, &out.lambda);
        const double truth_ties = data.file_based ? kFileTruthTieTolerance : 0.0;
        if (wants(spec.metrics, Metric::kKendall)) {
          out.kendall = kendall_tau_error({data.truth, estimate.values, kEstimateTieTolerance, truth_ties});
        }
        if (wants(spec.metrics, Metric::kL2)) {
          std::vector<double> compared = estimate.values;
          // File truths are raw integers; compare on their scale.
          if (data.file_based) {
            for (double& v : compared) v = project_to_original_scale(v);
          }
          out.l2 = l2_error({data.truth, compared});
        }
        if (wants(spec.metrics, Metric::kTies)) out.ties = tie_fraction(estimate.values);
      }
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(job)] = std::make_exception_ptr(
          Error(e.code(), fmt::format("trial {} at {}={}: {}", t, to_string(spec.sweep), value, e.what())));
    } catch (...) {
      failures[static_cast<std::size_t>(job)] = std::current_exception();
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentReport report;
  report.spec = spec;
  for (std::size_t point = 0; point < points; ++point) {
    for (std::size_t m = 0; m < methods; ++m) {
      CellResult cell;
      cell.method = spec.methods[m];
      cell.sweep_value = spec.sweep_values[point];
      for (std::size_t t = 0; t < trials; ++t) {
        const TrialOutcome& o = outcomes[(point * methods + m) * trials + t];
        if (wants(spec.metrics, Metric::kKendall)) cell.kendall.push_back(o.kendall);
        if (wants(spec.metrics, Metric::kL2)) cell.l2.push_back(o.l2);
        if (wants(spec.metrics, Metric::kTies)) cell.ties.push_back(o.ties);
        if (cell.method == Method::kProposed) cell.lambdas.push_back(o.lambda);
      }
      if (!cell.kendall.empty()) cell.kendall_stats = trial_statistics(cell.kendall);
      if (!cell.l2.empty()) cell.l2_stats = trial_statistics(cell.l2);
      if (!cell.ties.empty()) cell.ties_stats = trial_statistics(cell.ties);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string to_json(const ExperimentReport& report) {
  const ExperimentSpec& spec = report.spec;
  nlohmann::json doc;
  doc["report_version"] = kReportVersion;

  nlohmann::json header;
  for (Method m : spec.methods) header["methods"].push_back(to_string(m));
  header["sweep"] = {{"parameter", to_string(spec.sweep)}, {"values", spec.sweep_values}};
  header["trials"] = spec.trials;
  header["seed"] = spec.seed;
  for (Metric m : spec.metrics) header["metrics"].push_back(to_string(m));
  header["epsilon"] = spec.epsilon;
  header["lambda"] = spec.lambda ? nlohmann::json(*spec.lambda) : nlohmann::json("auto");
  header["feasibility_tolerance"] = spec.solver.feasibility_tolerance;
  if (const auto* config = std::get_if<SynthConfig>(&spec.base)) {
    header["base"] = {{"kind", "synthetic"},
                      {"num_papers", config->num_papers},
                      {"sigma", config->sigma},
                      {"reviews_per_paper", config->reviews_per_paper},
                      {"papers_per_reviewer", config->papers_per_reviewer}};
  } else {
    const auto& source = std::get<IclrSource>(spec.base);
    header["base"] = {{"kind", "iclr_style"},
                      {"raw_path", source.raw_path.string()},
                      {"reviews_per_paper", source.reviews_per_paper},
                      {"papers_per_reviewer", source.papers_per_reviewer}};
  }
  doc["spec"] = header;

  doc["results"] = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json entry{{"method", to_string(cell.method)}, {"sweep_value", cell.sweep_value}};
    if (cell.kendall_stats) entry["kendall"] = {{"stats", stats_json(cell.kendall_stats)}, {"trials", cell.kendall}};
    if (cell.l2_stats) entry["l2"] = {{"stats", stats_json(cell.l2_stats)}, {"trials", cell.l2}};
    if (cell.ties_stats) entry["ties"] = {{"stats", stats_json(cell.ties_stats)}, {"trials", cell.ties}};
    if (!cell.lambdas.empty()) entry["lambdas"] = cell.lambdas;
    doc["results"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

std::string format_table(const ExperimentReport& report) {
  std::string out = fmt::format("{:>12}  {:<26}", to_string(report.spec.sweep), "method");
  for (Metric m : report.spec.metrics) out += fmt::format("  {:>22}", to_string(m));
  out += "\n";
  for (const auto& cell : report.cells) {
    out += fmt::format("{:>12g}  {:<26}", cell.sweep_value, to_string(cell.method));
    for (Metric m : report.spec.metrics) {
      const auto& s = m == Metric::kKendall ? cell.kendall_stats : m == Metric::kL2 ? cell.l2_stats : cell.ties_stats;
      out += fmt::format("  {:>12.6f} +- {:<7.5f}", s->mean, s->standard_error);
    }
    out += "\n";
  }
  return out;
}

std::string format_csv(const ExperimentReport& report) {
  std::string out = fmt::format("{},method,metric,mean,standard_error\n", to_string(report.spec.sweep));
  for (const auto& cell : report.cells) {
    for (Metric m : report.spec.metrics) {
      const auto& s = m == Metric::kKendall ? cell.kendall_stats : m == Metric::kL2 ? cell.l2_stats : cell.ties_stats;
      out += fmt::format("{:.15g},{},{},{:.15g},{:.15g}\n", cell.sweep_value, to_string(cell.method), to_string(m),
                         s->mean, s->standard_error);
    }
  }
  return out;
}

}  // namespace dequant
