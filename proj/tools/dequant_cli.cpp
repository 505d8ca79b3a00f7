// Command-line front end: dequantize, simulate, experiment, qv, baseline, validate.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dequant/baselines.hpp"
#include "dequant/csv.hpp"
#include "dequant/dequantizer.hpp"
#include "dequant/error.hpp"
#include "dequant/experiment.hpp"
#include "dequant/io.hpp"
#include "dequant/qv.hpp"
#include "dequant/synthgen.hpp"

namespace fs = std::filesystem;
using namespace dequant;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    case ErrorCode::kInfeasible:
    case ErrorCode::kCycle:
    case ErrorCode::kMaxIterations:
    case ErrorCode::kDimensionTooLarge:
    case ErrorCode::kRetryExhausted:
      return kExitSolver;
    default:
      return kExitValidation;
  }
}

// Flags every command shares. Values are echoed in the output header.
struct Common {
  double epsilon = kDefaultEpsilon;
  std::string lambda = "auto";
  std::uint64_t seed = 0;
  double feastol = 1e-6;
  std::string output;

  void add_to(CLI::App* app, bool output_required) {
    app->add_option("--epsilon", epsilon, "Minimum gap between ranked scores")->capture_default_str();
    app->add_option("--lambda", lambda, "Fit-term weight, or 'auto' for quantization validation")->capture_default_str();
    app->add_option("--seed", seed, "Master random seed")->capture_default_str();
    app->add_option("--feastol", feastol, "Solver feasibility tolerance")->capture_default_str();
    auto* out = app->add_option("--output,-o", output, "Output path");
    if (output_required) out->required();
  }

  std::optional<double> lambda_value() const {
    if (lambda == "auto") return std::nullopt;
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(lambda, &used);
      if (used != lambda.size()) throw std::invalid_argument(lambda);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("--lambda must be a number or 'auto', got '{}'", lambda));
    }
    return value;
  }

  SolverSettings solver() const {
    SolverSettings s;
    s.feasibility_tolerance = feastol;
    return s;
  }

  nlohmann::json header(std::string_view command) const {
    return {{"command", command}, {"epsilon", epsilon}, {"lambda", lambda}, {"seed", seed}, {"feastol", feastol}};
  }
};

struct Inputs {
  std::string reviews;
  std::string rankings;
  std::optional<int> scale_min;
  std::optional<int> scale_max;

  void add_to(CLI::App* app) {
    app->add_option("--reviews", reviews, "reviewer_id,paper_id,score CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--rankings", rankings, "reviewer_id,better_paper_id,worse_paper_id CSV")->check(CLI::ExistingFile);
    app->add_option("--scale-min", scale_min, "Lowest score on the scale (default: lowest score seen)");
    app->add_option("--scale-max", scale_max, "Highest score on the scale (default: highest score seen)");
  }

  ReviewDataset load() const {
    std::optional<fs::path> rankings_path;
    if (!rankings.empty()) rankings_path = rankings;
    std::optional<ScoreScale> scale;
    if (scale_min || scale_max) {
      if (!scale_min || !scale_max) throw Error(ErrorCode::kInvalidArgument, "give both --scale-min and --scale-max");
      scale = ScoreScale{*scale_min, *scale_max};
    }
    return load_reviews(reviews, rankings_path, scale);
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("'{}' is not a number", item));
    }
    start = end + 1;
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

void emit(const std::string& output, const std::string& contents) {
  if (output.empty() || output == "-") {
    std::cout << contents;
  } else {
    csv::write_file(output, contents);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Merge quantized review scores and partial rankings into real-valued scores"};
  app.require_subcommand(1);

  Common common;
  Inputs inputs;

  auto* cmd_dequantize = app.add_subcommand("dequantize", "Solve for dequantized scores and write them as CSV");
  common.add_to(cmd_dequantize, true);
  inputs.add_to(cmd_dequantize);

  auto* cmd_baseline = app.add_subcommand("baseline", "Run a reference method and write its scores as CSV");
  common.add_to(cmd_baseline, true);
  inputs.add_to(cmd_baseline);
  std::string baseline_method = "bre_adjusted";
  cmd_baseline->add_option("--method", baseline_method, "quantized | bre_adjusted | partial_rankings_adjusted")
      ->capture_default_str();

  auto* cmd_qv = app.add_subcommand("qv", "Report quantization-validation errors over the lambda grid");
  common.add_to(cmd_qv, false);
  inputs.add_to(cmd_qv);

  auto* cmd_validate = app.add_subcommand("validate", "Check a dataset and list every violation");
  inputs.add_to(cmd_validate);

  auto* cmd_simulate = app.add_subcommand("simulate", "Write a synthetic (or ICLR-style prepared) dataset");
  common.add_to(cmd_simulate, true);
  SynthConfig synth;
  std::string raw_path;
  int iclr_reviews = 3;
  int iclr_load = 6;
  cmd_simulate->add_option("--papers", synth.num_papers)->capture_default_str();
  cmd_simulate->add_option("--sigma", synth.sigma)->capture_default_str();
  cmd_simulate->add_option("--reviews-per-paper", synth.reviews_per_paper)->capture_default_str();
  cmd_simulate->add_option("--papers-per-reviewer", synth.papers_per_reviewer)->capture_default_str();
  cmd_simulate->add_option("--raw", raw_path, "paper_id,score file to prepare instead of sampling")
      ->check(CLI::ExistingFile);
  cmd_simulate->add_option("--iclr-reviews", iclr_reviews, "Reviews kept per paper with --raw")->capture_default_str();
  cmd_simulate->add_option("--iclr-load", iclr_load, "Papers per reviewer with --raw")->capture_default_str();

  auto* cmd_experiment = app.add_subcommand("experiment", "Run repeated trials over a parameter sweep");
  common.add_to(cmd_experiment, false);
  SynthConfig exp_synth;
  std::string exp_raw;
  int exp_trials = 20;
  std::string exp_sweep = "sigma";
  std::string exp_values = "0.1,0.5,1.0";
  std::string exp_methods = "proposed,quantized,bre_adjusted";
  std::string exp_metrics = "kendall,l2,ties";
  std::string exp_csv;
  bool exp_table = false;
  int exp_iclr_reviews = 3;
  int exp_iclr_load = 6;
  cmd_experiment->add_option("--trials", exp_trials)->capture_default_str();
  cmd_experiment->add_option("--sweep", exp_sweep, "sigma | papers_per_reviewer | reviews_per_paper | lambda | epsilon")
      ->capture_default_str();
  cmd_experiment->add_option("--values", exp_values, "Comma-separated sweep values")->capture_default_str();
  cmd_experiment->add_option("--methods", exp_methods)->capture_default_str();
  cmd_experiment->add_option("--metrics", exp_metrics)->capture_default_str();
  cmd_experiment->add_option("--papers", exp_synth.num_papers)->capture_default_str();
  cmd_experiment->add_option("--sigma", exp_synth.sigma)->capture_default_str();
  cmd_experiment->add_option("--reviews-per-paper", exp_synth.reviews_per_paper)->capture_default_str();
  cmd_experiment->add_option("--papers-per-reviewer", exp_synth.papers_per_reviewer)->capture_default_str();
  cmd_experiment->add_option("--raw", exp_raw, "paper_id,score file used instead of synthetic data")
      ->check(CLI::ExistingFile);
  cmd_experiment->add_option("--iclr-reviews", exp_iclr_reviews)->capture_default_str();
  cmd_experiment->add_option("--iclr-load", exp_iclr_load)->capture_default_str();
  cmd_experiment->add_flag("--table", exp_table, "Print a plain-text table to stderr");
  cmd_experiment->add_option("--csv", exp_csv, "Also write per-sweep means as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_dequantize->parsed()) {
      const ReviewDataset dataset = inputs.load();
      const auto result =
          dequantize_detailed(dataset, DequantizerConfig{common.lambda_value(), common.epsilon, common.solver()});
      write_scores(result.scores, dataset, common.output);
      auto header = common.header("dequantize");
      header["selected_lambda"] = result.lambda;
      header["iterations"] = result.iterations;
      header["reviews"] = dataset.size();
      std::cout << header.dump() << "\n";
    } else if (cmd_baseline->parsed()) {
      const ReviewDataset dataset = inputs.load();
      const Method method = parse_method(baseline_method);
      if (method == Method::kProposed) throw Error(ErrorCode::kInvalidArgument, "use 'dequantize' for the proposed method");
      write_scores(run_method(method, dataset, common.epsilon, std::nullopt, common.solver()), dataset, common.output);
      auto header = common.header("baseline");
      header["method"] = baseline_method;
      std::cout << header.dump() << "\n";
    } else if (cmd_qv->parsed()) {
      const ReviewDataset dataset = inputs.load();
      const QVReport report = select_lambda(dataset, QVConfig{}, DequantizerConfig{std::nullopt, common.epsilon, common.solver()});
      auto doc = common.header("qv");
      doc["report_version"] = 1;
      doc["lambdas"] = report.lambdas;
      doc["errors"] = report.errors;
      doc["selected_lambda"] = report.selected_lambda;
      emit(common.output, doc.dump(2) + "\n");
    } else if (cmd_validate->parsed()) {
      const ReviewDataset dataset = inputs.load();
      std::cout << fmt::format("ok: {} reviews, {} reviewers, {} papers, {} ranked pairs\n", dataset.size(),
                               dataset.assignment().num_reviewers(), dataset.assignment().num_papers(),
                               dataset.ranked_pairs().size());
    } else if (cmd_simulate->parsed()) {
      fs::create_directories(common.output);
      auto header = common.header("simulate");
      if (!raw_path.empty()) {
        const IclrData data = prepare_iclr_style(fs::path(raw_path), IclrOptions{iclr_reviews, iclr_load, common.seed});
        write_dataset(common.output, data.dataset, data.truth_y);
        header["raw"] = raw_path;
        header["reviews_per_paper"] = iclr_reviews;
        header["papers_per_reviewer"] = iclr_load;
      } else {
        synth.seed = common.seed;
        const SynthInstance instance = generate(synth);
        write_dataset(common.output, instance.dataset, instance.truth_y);
        header["papers"] = synth.num_papers;
        header["sigma"] = synth.sigma;
        header["reviews_per_paper"] = synth.reviews_per_paper;
        header["papers_per_reviewer"] = synth.papers_per_reviewer;
      }
      std::cout << header.dump() << "\n";
    } else if (cmd_experiment->parsed()) {
      ExperimentSpec spec;
      spec.methods.clear();
      for (const auto& name : split_names(exp_methods)) spec.methods.push_back(parse_method(name));
      spec.metrics.clear();
      for (const auto& name : split_names(exp_metrics)) spec.metrics.push_back(parse_metric(name));
      spec.sweep = parse_sweep_parameter(exp_sweep);
      spec.sweep_values = parse_list(exp_values);
      spec.trials = exp_trials;
      spec.seed = common.seed;
      spec.epsilon = common.epsilon;
      spec.lambda = common.lambda_value();
      spec.solver = common.solver();
      if (!exp_raw.empty()) {
        spec.base = IclrSource{exp_raw, exp_iclr_reviews, exp_iclr_load};
      } else {
        spec.base = exp_synth;
      }
      const ExperimentReport report = run_experiment(spec);
      emit(common.output, to_json(report));
      if (exp_table) std::cerr << format_table(report);
      if (!exp_csv.empty()) csv::write_file(exp_csv, format_csv(report));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
