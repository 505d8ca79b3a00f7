#include "dequant/io.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "dequant/csv.hpp"
#include "dequant/error.hpp"
#include "dequant/metrics.hpp"
#include "dequant/qv.hpp"
#include "dequant/rng.hpp"
#include "dequant/synthgen.hpp"

namespace dequant {

namespace {

constexpr int kRawLowest = 1;
constexpr int kRawHighest = 10;

std::string real(double v) { return fmt::format("{:.15g}", v); }
// Shortest text that parses back to the same double.
std::string exact(double v) { return fmt::format("{}", v); }

}  // namespace

ReviewDataset load_reviews(const std::filesystem::path& reviews_path,
                           const std::optional<std::filesystem::path>& rankings_path,
                           std::optional<ScoreScale> scale) {
  const std::string source = reviews_path.string();
  const auto rows = csv::read(reviews_path, {"reviewer_id", "paper_id", "score"});

  std::vector<Review> reviews;
  std::map<std::pair<std::string, std::string>, std::size_t> first_line;
  for (const auto& row : rows) {
    const auto [it, inserted] = first_line.emplace(std::pair{row.fields[0], row.fields[1]}, row.line);
    if (!inserted) {
      throw Error(ErrorCode::kParseError, fmt::format("{}:{}: reviewer {} already scored paper {} on line {}", source,
                                                      row.line, row.fields[0], row.fields[1], it->second));
    }
    if (row.fields[0].empty() || row.fields[1].empty()) {
      throw Error(ErrorCode::kParseError, fmt::format("{}:{}: empty id", source, row.line));
    }
    reviews.push_back({row.fields[0], row.fields[1], csv::parse_int(row, 2, source)});
  }

  std::vector<PartialRanking> rankings;
  if (rankings_path) {
    const std::string rank_source = rankings_path->string();
    std::map<std::string, std::vector<RankedPair>> by_reviewer;
    for (const auto& row : csv::read(*rankings_path, {"reviewer_id", "better_paper_id", "worse_paper_id"})) {
      by_reviewer[row.fields[0]].push_back({row.fields[1], row.fields[2]});
    }
    for (auto& [reviewer, pairs] : by_reviewer) rankings.push_back({reviewer, std::move(pairs)});
  }

  if (!scale) {
    ScoreScale inferred{0, 0};
    if (!reviews.empty()) {
      const auto [lo, hi] = std::minmax_element(reviews.begin(), reviews.end(),
                                                [](const Review& a, const Review& b) { return a.score < b.score; });
      inferred = {lo->score, hi->score};
    }
    scale = inferred;
  }

  ReviewDataset dataset(*scale, std::move(reviews), std::move(rankings));
  const auto violations = validate(dataset);
  if (!violations.empty()) {
    std::string message = fmt::format("{} violation(s)", violations.size());
    for (const auto& v : violations) message += "\n  " + describe(v);
    throw Error(ErrorCode::kValidationError, message);
  }
  return dataset;
}

std::vector<double> load_truth(const std::filesystem::path& path, const ReviewDataset& dataset) {
  const std::string source = path.string();
  const auto& assignment = dataset.assignment();
  std::vector<double> out(dataset.size(), 0.0);
  std::vector<char> seen(dataset.size(), 0);
  for (const auto& row : csv::read(path, {"reviewer_id", "paper_id", "value"})) {
    const auto i = assignment.find(row.fields[0], row.fields[1]);
    if (!i) {
      throw Error(ErrorCode::kParseError,
                  fmt::format("{}:{}: ({}, {}) is not a review", source, row.line, row.fields[0], row.fields[1]));
    }
    if (seen[*i]) throw Error(ErrorCode::kParseError, fmt::format("{}:{}: repeated review", source, row.line));
    seen[*i] = 1;
    out[*i] = csv::parse_double(row, 2, source);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorCode::kParseError, fmt::format("{}: some reviews have no value", source));
  }
  return out;
}

void write_dataset(const std::filesystem::path& directory, const ReviewDataset& dataset,
                   const std::vector<double>& truth) {
  const auto& assignment = dataset.assignment();
  std::string reviews = "reviewer_id,paper_id,score\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    reviews += fmt::format("{},{},{}\n", csv::escape(assignment.reviewer_id(i)), csv::escape(assignment.paper_id(i)),
                           dataset.score(i));
  }
  csv::write_file(directory / "reviews.csv", reviews);

  std::string rankings = "reviewer_id,better_paper_id,worse_paper_id\n";
  for (const auto& ranking : dataset.rankings()) {
    for (const auto& pair : ranking.pairs) {
      rankings += fmt::format("{},{},{}\n", csv::escape(ranking.reviewer), csv::escape(pair.better),
                              csv::escape(pair.worse));
    }
  }
  csv::write_file(directory / "rankings.csv", rankings);

  if (truth.empty()) return;
  if (truth.size() != dataset.size()) throw Error(ErrorCode::kInvalidArgument, "truth does not match the dataset");
  std::string values = "reviewer_id,paper_id,value\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    values += fmt::format("{},{},{}\n", csv::escape(assignment.reviewer_id(i)), csv::escape(assignment.paper_id(i)),
                          exact(truth[i]));
  }
  csv::write_file(directory / "truth.csv", values);
}

std::vector<RawPaperScore> read_raw_scores(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::vector<RawPaperScore> out;
  for (const auto& row : csv::read(path, {"paper_id", "score"})) {
    const int score = csv::parse_int(row, 1, source);
    if (score < kRawLowest || score > kRawHighest) {
      throw Error(ErrorCode::kParseError, fmt::format("{}:{}: raw score {} outside [{}, {}]", source, row.line, score,
                                                      kRawLowest, kRawHighest));
    }
    if (row.fields[0].empty()) throw Error(ErrorCode::kParseError, fmt::format("{}:{}: empty id", source, row.line));
    out.push_back({row.fields[0], score});
  }
  return out;
}

IclrData prepare_iclr_style(const std::vector<RawPaperScore>& raw, const IclrOptions& options) {
  const int mu = options.reviews_per_paper;
  const int kappa = options.papers_per_reviewer;
  if (mu <= 0 || kappa <= 0) throw Error(ErrorCode::kInvalidArgument, "loads must be positive");

  std::map<std::string, std::vector<int>> by_paper;
  for (const auto& r : raw) by_paper[r.paper].push_back(r.score);

  Rng retain(derive_seed(options.seed, 0));
  std::vector<std::string> papers;
  std::vector<std::vector<int>> kept;
  for (const auto& [paper, scores] : by_paper) {
    if (static_cast<int>(scores.size()) < mu) {
      throw Error(ErrorCode::kInsufficientReviews,
                  fmt::format("paper {} has {} reviews, {} needed", paper, scores.size(), mu));
    }
    // Uniform mu-subset by a partial shuffle of positions; kept in file order.
    std::vector<std::size_t> positions(scores.size());
    std::iota(positions.begin(), positions.end(), 0);
    for (std::size_t k = 0; k < static_cast<std::size_t>(mu); ++k) {
      const auto j = k + static_cast<std::size_t>(retain.below(positions.size() - k));
      std::swap(positions[k], positions[j]);
    }
    positions.resize(static_cast<std::size_t>(mu));
    std::sort(positions.begin(), positions.end());
    std::vector<int> chosen;
    for (std::size_t pos : positions) chosen.push_back(scores[pos]);
    papers.push_back(paper);
    kept.push_back(std::move(chosen));
  }
  while (!papers.empty() && (papers.size() * static_cast<std::size_t>(mu)) % static_cast<std::size_t>(kappa) != 0) {
    papers.pop_back();
    kept.pop_back();
  }
  if (papers.empty()) throw Error(ErrorCode::kInsufficientReviews, "no papers left after balancing loads");

  const int num_papers = static_cast<int>(papers.size());
  const int num_reviewers = num_papers * mu / kappa;
  const Assignment slots = random_regular_assignment(num_papers, num_reviewers, kappa, mu, derive_seed(options.seed, 1));

  // Slot papers are numbered in the same order as `papers`.
  std::vector<Review> reviews;
  std::vector<RawScore> raw_scores;
  for (std::size_t p = 0; p < slots.num_papers(); ++p) {
    const auto reviewers = slots.reviews_of_paper(p);
    for (std::size_t k = 0; k < reviewers.size(); ++k) {
      const std::string& reviewer = slots.reviewer_id(reviewers[k]);
      const int y = kept[p][k];
      reviews.push_back({reviewer, papers[p], ceil_half(y)});
      raw_scores.push_back({reviewer, papers[p], static_cast<double>(y)});
    }
  }

  IclrData out;
  out.dataset = ReviewDataset(ScoreScale{ceil_half(kRawLowest), ceil_half(kRawHighest)}, std::move(reviews),
                              derive_rankings_from_raw_scores(raw_scores));
  const auto& assignment = out.dataset.assignment();
  out.truth_y.assign(assignment.size(), 0.0);
  for (const auto& r : raw_scores) out.truth_y[*assignment.find(r.reviewer, r.paper)] = r.value;
  return out;
}

IclrData prepare_iclr_style(const std::filesystem::path& raw_path, const IclrOptions& options) {
  return prepare_iclr_style(read_raw_scores(raw_path), options);
}

std::string format_scores(const DequantizedScores& scores, const ReviewDataset& dataset) {
  if (scores.size() != dataset.size()) throw Error(ErrorCode::kInvalidArgument, "scores do not match the dataset");
  const auto& assignment = dataset.assignment();
  const std::vector<double> pct = percentiles(scores.values);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (assignment.paper_of(a) != assignment.paper_of(b)) return assignment.paper_of(a) < assignment.paper_of(b);
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return assignment.reviewer_of(a) < assignment.reviewer_of(b);
  });

  std::string out = "reviewer_id,paper_id,quantized_score,dequantized_score,percentile\n";
  for (std::size_t i : order) {
    out += fmt::format("{},{},{},{},{}\n", csv::escape(assignment.reviewer_id(i)), csv::escape(assignment.paper_id(i)),
                       dataset.score(i), real(scores[i]), real(pct[i]));
  }
  return out;
}

void write_scores(const DequantizedScores& scores, const ReviewDataset& dataset, const std::filesystem::path& path) {
  csv::write_file(path, format_scores(scores, dataset));
}

}  // namespace dequant
