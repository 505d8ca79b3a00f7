#pragma once

#include <string>
#include <vector>

#include "dequant/core_model.hpp"

namespace dequant {

/// Papers one reviewer gave the same quantized score.
struct QuantizationBin {
  std::string reviewer;
  int score = 0;
  std::vector<std::string> members;
};

/// Papers a reviewer left mutually unordered. Higher index ranks higher.
struct RankedGroup {
  int group_index = 0;
  std::vector<std::string> members;
};

/// Groups of one reviewer, in any order.
struct ReviewerGroups {
  std::string reviewer;
  std::vector<RankedGroup> groups;
};

/// Quantization bins of every reviewer, ordered by reviewer then score.
std::vector<QuantizationBin> quantization_bins(const ReviewDataset& dataset);

/// Returns the scores unchanged.
DequantizedScores quantized_baseline(const ReviewDataset& dataset);

/// Per reviewer and bin of m tied papers ranked p_1 (lowest) .. p_m, assigns
/// z + (t - 1) epsilon and recenters so the bin mean stays at z. Needs every
/// reviewer's ranking to be total, otherwise Error(kNotTotalRanking).
DequantizedScores bre_adjusted_scores(const ReviewDataset& dataset, double epsilon);

/// Group-wise version of bre_adjusted_scores: within a bin spanning more than
/// one group, each paper gets the rank of its group among the bin's groups.
/// Throws Error(kGroupsInconsistent) when the groups do not reproduce the
/// reviewer's reported ranking.
DequantizedScores partial_rankings_adjusted_scores(const ReviewDataset& dataset, double epsilon,
                                                   const std::vector<ReviewerGroups>& groups);

/// Groups induced by the rankings when each reviewer's relation is a total
/// order over groups of tied papers (as when derived from raw scores).
/// Throws Error(kGroupsInconsistent) otherwise.
std::vector<ReviewerGroups> groups_from_rankings(const ReviewDataset& dataset);

/// Scores-only weighted average clipped to each quantization interval:
///   ((1 + mu lambda) z_rp + sum_{r' != r} z_r'p) / (mu (1 + lambda)).
/// Rankings are ignored. Every paper needs the same number of reviews mu,
/// otherwise Error(kUnequalReviewCounts).
DequantizedScores score_only_closed_form(const ReviewDataset& dataset, double lambda);

/// True when every reviewer's reported relation orders all of their papers.
bool has_total_rankings(const ReviewDataset& dataset);

}  // namespace dequant
