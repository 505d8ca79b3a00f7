#include "dequant/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "dequant/error.hpp"

namespace dequant {

namespace {

// closure[a][b] != 0 iff the reviewer's reported pairs imply local paper a
// beats local paper b. Locals index reviews_of_reviewer(r).
using Closure = std::vector<std::vector<char>>;

std::vector<Closure> reviewer_closures(const ReviewDataset& dataset) {
  const auto& assignment = dataset.assignment();
  std::vector<Closure> out(assignment.num_reviewers());
  std::vector<std::size_t> local(dataset.size());
  for (std::size_t r = 0; r < assignment.num_reviewers(); ++r) {
    const auto reviews = assignment.reviews_of_reviewer(r);
    for (std::size_t k = 0; k < reviews.size(); ++k) local[reviews[k]] = k;
    out[r].assign(reviews.size(), std::vector<char>(reviews.size(), 0));
  }
  for (const auto& pair : dataset.ranked_pairs()) {
    out[assignment.reviewer_of(pair.better)][local[pair.better]][local[pair.worse]] = 1;
  }
  for (auto& c : out) {
    const std::size_t m = c.size();
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < m; ++i) {
        if (!c[i][k]) continue;
        for (std::size_t j = 0; j < m; ++j) c[i][j] = c[i][j] || c[k][j];
      }
    }
  }
  return out;
}

// Applies offsets per quantization bin and shifts each bin back to its score.
// offset[i] is relative; only differences within a bin matter.
DequantizedScores recentre_by_bin(const ReviewDataset& dataset, const std::vector<double>& offset) {
  const auto& assignment = dataset.assignment();
  DequantizedScores out{scores_as_reals(dataset)};
  for (std::size_t r = 0; r < assignment.num_reviewers(); ++r) {
    std::map<int, std::vector<std::size_t>> bins;
    for (std::size_t i : assignment.reviews_of_reviewer(r)) bins[dataset.score(i)].push_back(i);
    for (const auto& [score, members] : bins) {
      if (members.size() < 2) continue;
      double mean = 0.0;
      for (std::size_t i : members) mean += offset[i];
      mean /= static_cast<double>(members.size());
      for (std::size_t i : members) out.values[i] = static_cast<double>(score) + (offset[i] - mean);
    }
  }
  return out;
}

}  // namespace

std::vector<QuantizationBin> quantization_bins(const ReviewDataset& dataset) {
  const auto& assignment = dataset.assignment();
  std::vector<QuantizationBin> out;
  for (std::size_t r = 0; r < assignment.num_reviewers(); ++r) {
    std::map<int, std::vector<std::string>> bins;
    for (std::size_t i : assignment.reviews_of_reviewer(r)) bins[dataset.score(i)].push_back(assignment.paper_id(i));
    for (auto& [score, members] : bins) out.push_back({assignment.reviewers()[r], score, std::move(members)});
  }
  return out;
}

DequantizedScores quantized_baseline(const ReviewDataset& dataset) { return {scores_as_reals(dataset)}; }

bool has_total_rankings(const ReviewDataset& dataset) {
  for (const auto& c : reviewer_closures(dataset)) {
    for (std::size_t a = 0; a < c.size(); ++a) {
      for (std::size_t b = a + 1; b < c.size(); ++b) {
        if (!c[a][b] && !c[b][a]) return false;
      }
    }
  }
  return true;
}

DequantizedScores bre_adjusted_scores(const ReviewDataset& dataset, double epsilon) {
  ensure_valid(dataset);
  const auto& assignment = dataset.assignment();
  const auto closures = reviewer_closures(dataset);
  std::vector<double> offset(dataset.size(), 0.0);
  for (std::size_t r = 0; r < assignment.num_reviewers(); ++r) {
    const auto reviews = assignment.reviews_of_reviewer(r);
    const auto& c = closures[r];
    for (std::size_t a = 0; a < reviews.size(); ++a) {
      // Rank within the bin, 1 for the lowest: one plus the bin members below.
      int below = 0;
      for (std::size_t b = 0; b < reviews.size(); ++b) {
        if (a == b) continue;
        if (!c[a][b] && !c[b][a]) {
          throw Error(ErrorCode::kNotTotalRanking,
                      fmt::format("reviewer {} leaves papers {} and {} unordered", assignment.reviewers()[r],
                                  assignment.paper_id(reviews[a]), assignment.paper_id(reviews[b])));
        }
        if (c[a][b] && dataset.score(reviews[b]) == dataset.score(reviews[a])) ++below;
      }
      offset[reviews[a]] = epsilon * below;
    }
  }
  return recentre_by_bin(dataset, offset);
}

std::vector<ReviewerGroups> groups_from_rankings(const ReviewDataset& dataset) {
  const auto& assignment = dataset.assignment();
  const auto closures = reviewer_closures(dataset);
  std::vector<ReviewerGroups> out;
  for (std::size_t r = 0; r < assignment.num_reviewers(); ++r) {
    const auto reviews = assignment.reviews_of_reviewer(r);
    const auto& c = closures[r];
    // In a total order over groups, a paper's group is fixed by how many
    // papers it beats.
    std::vector<int> beats(reviews.size(), 0);
    for (std::size_t a = 0; a < reviews.size(); ++a) {
      for (std::size_t b = 0; b < reviews.size(); ++b) beats[a] += c[a][b];
    }
    std::vector<int> levels = beats;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    ReviewerGroups groups{assignment.reviewers()[r], {}};
    for (std::size_t g = 0; g < levels.size(); ++g) groups.groups.push_back({static_cast<int>(g) + 1, {}});
    for (std::size_t a = 0; a < reviews.size(); ++a) {
      const auto g = std::lower_bound(levels.begin(), levels.end(), beats[a]) - levels.begin();
      groups.groups[static_cast<std::size_t>(g)].members.push_back(assignment.paper_id(reviews[a]));
    }
    for (std::size_t a = 0; a < reviews.size(); ++a) {
      for (std::size_t b = 0; b < reviews.size(); ++b) {
        if (a != b && (c[a][b] != 0) != (beats[a] > beats[b])) {
          throw Error(ErrorCode::kGroupsInconsistent,
                      fmt::format("rankings of reviewer {} are not a total order over tied groups",
                                  assignment.reviewers()[r]));
        }
      }
    }
    out.push_back(std::move(groups));
  }
  return out;
}

DequantizedScores partial_rankings_adjusted_scores(const ReviewDataset& dataset, double epsilon,
                                                   const std::vector<ReviewerGroups>& groups) {
  ensure_valid(dataset);
  const auto& assignment = dataset.assignment();
  const auto closures = reviewer_closures(dataset);

  std::unordered_map<std::string, const ReviewerGroups*> by_reviewer;
  for (const auto& g : groups) {
    if (!by_reviewer.emplace(g.reviewer, &g).second) {
      throw Error(ErrorCode::kGroupsInconsistent, fmt::format("reviewer {} has two group lists", g.reviewer));
    }
  }

  std::vector<int> group_of(dataset.size(), 0);
  for (std::size_t r = 0; r < assignment.num_reviewers(); ++r) {
    const auto& reviewer = assignment.reviewers()[r];
    const auto reviews = assignment.reviews_of_reviewer(r);
    auto inconsistent = [&](const std::string& why) {
      return Error(ErrorCode::kGroupsInconsistent, fmt::format("reviewer {}: {}", reviewer, why));
    };

    std::vector<char> seen(dataset.size(), 0);
    const auto it = by_reviewer.find(reviewer);
    if (it == by_reviewer.end()) {
      // No groups given: all papers tied in one group.
      for (std::size_t i : reviews) seen[i] = 1;
    } else {
      std::vector<int> indices;
      for (const auto& group : it->second->groups) {
        indices.push_back(group.group_index);
        for (const auto& paper : group.members) {
          const auto i = assignment.find(reviewer, paper);
          if (!i) throw inconsistent(fmt::format("paper {} is not assigned", paper));
          if (seen[*i]) throw inconsistent(fmt::format("paper {} appears in two groups", paper));
          seen[*i] = 1;
          group_of[*i] = group.group_index;
        }
      }
      std::sort(indices.begin(), indices.end());
      if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
        throw inconsistent("duplicate group index");
      }
    }
    for (std::size_t i : reviews) {
      if (!seen[i]) throw inconsistent(fmt::format("paper {} is in no group", assignment.paper_id(i)));
    }

    const auto& c = closures[r];
    for (std::size_t a = 0; a < reviews.size(); ++a) {
      for (std::size_t b = 0; b < reviews.size(); ++b) {
        if (a == b) continue;
        if ((c[a][b] != 0) != (group_of[reviews[a]] > group_of[reviews[b]])) {
          throw inconsistent(fmt::format("groups disagree with the ranking on papers {} and {}",
                                         assignment.paper_id(reviews[a]), assignment.paper_id(reviews[b])));
        }
      }
    }
  }

  std::vector<double> offset(dataset.size(), 0.0);
  for (std::size_t r = 0; r < assignment.num_reviewers(); ++r) {
    std::map<int, std::vector<std::size_t>> bins;
    for (std::size_t i : assignment.reviews_of_reviewer(r)) bins[dataset.score(i)].push_back(i);
    for (const auto& [score, members] : bins) {
      std::vector<int> levels;
      for (std::size_t i : members) levels.push_back(group_of[i]);
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      if (levels.size() < 2) continue;
      for (std::size_t i : members) {
        const auto t = std::lower_bound(levels.begin(), levels.end(), group_of[i]) - levels.begin();
        offset[i] = epsilon * static_cast<double>(t);
      }
    }
  }
  return recentre_by_bin(dataset, offset);
}

DequantizedScores score_only_closed_form(const ReviewDataset& dataset, double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("lambda must be a positive real, got {}", lambda));
  }
  const auto& assignment = dataset.assignment();
  DequantizedScores out{std::vector<double>(dataset.size(), 0.0)};
  if (dataset.size() == 0) return out;
  const std::size_t mu = assignment.reviews_of_paper(0).size();
  for (std::size_t p = 0; p < assignment.num_papers(); ++p) {
    if (assignment.reviews_of_paper(p).size() != mu) {
      throw Error(ErrorCode::kUnequalReviewCounts,
                  fmt::format("paper {} has {} reviews, paper {} has {}", assignment.papers()[p],
                              assignment.reviews_of_paper(p).size(), assignment.papers()[0], mu));
    }
  }
  const double m = static_cast<double>(mu);
  const double own = (1.0 + m * lambda) / (m * (1.0 + lambda));
  const double other = 1.0 / (m * (1.0 + lambda));
  for (std::size_t p = 0; p < assignment.num_papers(); ++p) {
    const auto reviews = assignment.reviews_of_paper(p);
    double total = 0.0;
    for (std::size_t i : reviews) total += dataset.score(i);
    for (std::size_t i : reviews) {
      const double z = dataset.score(i);
      const double blended = own * z + other * (total - z);
      out.values[i] = std::clamp(blended, z - 0.5, z + 0.5);
    }
  }
  return out;
}

}  // namespace dequant
