#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dequant {

/// Closed integer interval [lower, upper] that reported scores live in.
struct ScoreScale {
  int lower = 0;
  int upper = 10;
};

struct Review {
  std::string reviewer;
  std::string paper;
  int score = 0;
};

struct RawScore {
  std::string reviewer;
  std::string paper;
  double value = 0.0;
};

struct RankedPair {
  std::string better;
  std::string worse;
};

/// Strict preferences one reviewer reported among their own papers. Pairs are
/// kept exactly as reported; implied pairs are not added.
struct PartialRanking {
  std::string reviewer;
  std::vector<RankedPair> pairs;
};

/// Set of (reviewer, paper) pairs with dense indices. Reviewer and paper ids
/// are numbered in lexicographic order and review `i` is the i-th pair in
/// (reviewer, paper) order, so layouts are reproducible across runs.
class Assignment {
 public:
  Assignment() = default;
  /// Throws Error(kDuplicatePair) if a pair occurs twice.
  explicit Assignment(std::vector<std::pair<std::string, std::string>> pairs);

  std::size_t size() const { return reviewer_of_.size(); }
  std::size_t num_reviewers() const { return reviewers_.size(); }
  std::size_t num_papers() const { return papers_.size(); }

  const std::vector<std::string>& reviewers() const { return reviewers_; }
  const std::vector<std::string>& papers() const { return papers_; }

  std::size_t reviewer_of(std::size_t review) const { return reviewer_of_[review]; }
  std::size_t paper_of(std::size_t review) const { return paper_of_[review]; }
  const std::string& reviewer_id(std::size_t review) const { return reviewers_[reviewer_of_[review]]; }
  const std::string& paper_id(std::size_t review) const { return papers_[paper_of_[review]]; }

  std::optional<std::size_t> reviewer_index(std::string_view id) const;
  std::optional<std::size_t> paper_index(std::string_view id) const;
  std::optional<std::size_t> find(std::string_view reviewer, std::string_view paper) const;

  /// Review indices belonging to reviewer `r`, ascending.
  std::span<const std::size_t> reviews_of_reviewer(std::size_t r) const { return by_reviewer_[r]; }
  /// Review indices belonging to paper `p`, ascending.
  std::span<const std::size_t> reviews_of_paper(std::size_t p) const { return by_paper_[p]; }

 private:
  std::vector<std::string> reviewers_;
  std::vector<std::string> papers_;
  std::vector<std::size_t> reviewer_of_;
  std::vector<std::size_t> paper_of_;
  std::vector<std::vector<std::size_t>> by_reviewer_;
  std::vector<std::vector<std::size_t>> by_paper_;
  std::unordered_map<std::string, std::size_t> reviewer_lookup_;
  std::unordered_map<std::string, std::size_t> paper_lookup_;
};

/// A ranked pair resolved to review indices: y[better] should exceed y[worse].
struct IndexPair {
  std::size_t better;
  std::size_t worse;
};

/// Quantized scores plus partial rankings over an assignment. Construction
/// only rejects duplicate pairs; everything else is reported by validate().
class ReviewDataset {
 public:
  ReviewDataset() = default;
  ReviewDataset(ScoreScale scale, std::vector<Review> reviews, std::vector<PartialRanking> rankings = {});

  const ScoreScale& scale() const { return scale_; }
  const Assignment& assignment() const { return assignment_; }
  std::size_t size() const { return scores_.size(); }

  /// Scores aligned with assignment indices.
  const std::vector<int>& scores() const { return scores_; }
  int score(std::size_t review) const { return scores_[review]; }

  /// One entry per reviewer that reported anything, sorted by reviewer id.
  const std::vector<PartialRanking>& rankings() const { return rankings_; }

  /// Reported pairs whose two papers are both assigned to the reviewer, in
  /// ranking order. Pairs that do not resolve are left to validate().
  const std::vector<IndexPair>& ranked_pairs() const { return ranked_pairs_; }

  bool has_rankings() const { return !ranked_pairs_.empty(); }

 private:
  ScoreScale scale_;
  Assignment assignment_;
  std::vector<int> scores_;
  std::vector<PartialRanking> rankings_;
  std::vector<IndexPair> ranked_pairs_;
};

enum class ViolationCode {
  kOutOfRange,
  kUnassignedPair,
  kRankScoreInconsistent,
  kRankCycle,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string reviewer;
  std::string paper;
  std::string other_paper;  // empty unless the violation concerns a pair
  std::string detail;
};

/// Checks scale bounds, that ranked papers are assigned to their reviewer,
/// that rankings agree with scores, and that every reviewer's reported
/// relation is acyclic. An empty result means the dataset is valid.
std::vector<Violation> validate(const ReviewDataset& dataset);

std::string describe(const Violation& violation);

/// Throws Error(kValidationError) naming the first violation, if any.
void ensure_valid(const ReviewDataset& dataset);

/// For each reviewer, all pairs (p, p') with raw[p] > raw[p']. Ties yield no
/// pair. Output is sorted by reviewer id and then by pair ids; every reviewer
/// gets an entry, possibly empty.
std::vector<PartialRanking> derive_rankings_from_raw_scores(const std::vector<RawScore>& raw);

/// Same derivation for values aligned with an existing assignment.
std::vector<PartialRanking> derive_rankings(const Assignment& assignment, std::span<const double> values);

/// Real-valued output aligned with the dataset's assignment indices.
struct DequantizedScores {
  std::vector<double> values;

  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

/// Scores of a dataset converted to reals.
std::vector<double> scores_as_reals(const ReviewDataset& dataset);

}  // namespace dequant
