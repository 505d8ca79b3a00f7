#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dequant/core_model.hpp"

namespace dequant {

/// Reads `reviewer_id,paper_id,score` and, if given,
/// `reviewer_id,better_paper_id,worse_paper_id`. Without an explicit scale
/// the scale is [min score, max score].
///
/// Throws Error(kParseError) with the file and line for malformed rows or a
/// repeated (reviewer, paper) pair, Error(kValidationError) listing every
/// violation, and Error(kIoError) when a file cannot be read.
ReviewDataset load_reviews(const std::filesystem::path& reviews,
                           const std::optional<std::filesystem::path>& rankings = std::nullopt,
                           std::optional<ScoreScale> scale = std::nullopt);

/// Reads `reviewer_id,paper_id,value` rows covering exactly the dataset's
/// reviews and returns the values aligned with its review indices.
std::vector<double> load_truth(const std::filesystem::path& path, const ReviewDataset& dataset);

/// Writes reviews.csv, rankings.csv and, when `truth` is nonempty, truth.csv
/// into `directory`, which must exist.
void write_dataset(const std::filesystem::path& directory, const ReviewDataset& dataset,
                   const std::vector<double>& truth = {});

/// One raw review of the form `paper_id,score`, in file order.
struct RawPaperScore {
  std::string paper;
  int score = 0;
};

/// Raw scores must be integers 1..10.
std::vector<RawPaperScore> read_raw_scores(const std::filesystem::path& path);

struct IclrOptions {
  int reviews_per_paper = 3;
  int papers_per_reviewer = 6;
  std::uint64_t seed = 0;
};

struct IclrData {
  ReviewDataset dataset;
  /// Retained raw scores aligned with the dataset's review indices.
  std::vector<double> truth_y;
};

/// Keeps `reviews_per_paper` reviews of every paper, chosen uniformly at
/// random, drops papers from the end of the id order until the review count
/// splits evenly into reviewer loads, and hands the reviews to a random
/// regular assignment (the k-th kept review of a paper goes to its k-th
/// reviewer). Scores become ceil(y / 2) on [1, 5]; rankings are the strict
/// order of raw scores within each reviewer.
///
/// Throws Error(kInsufficientReviews) when a paper has too few reviews.
IclrData prepare_iclr_style(const std::vector<RawPaperScore>& raw, const IclrOptions& options);
IclrData prepare_iclr_style(const std::filesystem::path& raw_path, const IclrOptions& options);

/// `reviewer_id,paper_id,quantized_score,dequantized_score,percentile` rows
/// sorted by paper id, then dequantized score descending, then reviewer id.
/// Reals are printed with 15 significant digits.
std::string format_scores(const DequantizedScores& scores, const ReviewDataset& dataset);

/// Writes format_scores to `path`. Throws Error(kIoError) on failure.
void write_scores(const DequantizedScores& scores, const ReviewDataset& dataset, const std::filesystem::path& path);

}  // namespace dequant
