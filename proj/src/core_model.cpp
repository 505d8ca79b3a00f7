#include "dequant/core_model.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "dequant/error.hpp"

namespace dequant {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// Strongly connected components with more than one node, via Tarjan.
std::vector<std::vector<std::size_t>> cyclic_components(std::size_t n,
                                                        const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> component;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(w);
      } while (w != v);
      if (component.size() > 1) {
        std::sort(component.begin(), component.end());
        out.push_back(std::move(component));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  return out;
}

}  // namespace

Assignment::Assignment(std::vector<std::pair<std::string, std::string>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i] == pairs[i - 1]) {
      throw Error(ErrorCode::kDuplicatePair,
                  fmt::format("reviewer '{}' paper '{}' appears twice", pairs[i].first, pairs[i].second));
    }
  }

  std::vector<std::string> r_ids, p_ids;
  r_ids.reserve(pairs.size());
  p_ids.reserve(pairs.size());
  for (const auto& [r, p] : pairs) {
    r_ids.push_back(r);
    p_ids.push_back(p);
  }
  reviewers_ = sorted_unique(std::move(r_ids));
  papers_ = sorted_unique(std::move(p_ids));
  for (std::size_t i = 0; i < reviewers_.size(); ++i) reviewer_lookup_.emplace(reviewers_[i], i);
  for (std::size_t i = 0; i < papers_.size(); ++i) paper_lookup_.emplace(papers_[i], i);

  by_reviewer_.resize(reviewers_.size());
  by_paper_.resize(papers_.size());
  reviewer_of_.reserve(pairs.size());
  paper_of_.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t r = reviewer_lookup_.at(pairs[i].first);
    const std::size_t p = paper_lookup_.at(pairs[i].second);
    reviewer_of_.push_back(r);
    paper_of_.push_back(p);
    by_reviewer_[r].push_back(i);
    by_paper_[p].push_back(i);
  }
}

std::optional<std::size_t> Assignment::reviewer_index(std::string_view id) const {
  auto it = reviewer_lookup_.find(std::string(id));
  if (it == reviewer_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Assignment::paper_index(std::string_view id) const {
  auto it = paper_lookup_.find(std::string(id));
  if (it == paper_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Assignment::find(std::string_view reviewer, std::string_view paper) const {
  const auto r = reviewer_index(reviewer);
  const auto p = paper_index(paper);
  if (!r || !p) return std::nullopt;
  // Reviewer rows are short; a linear scan beats a second hash table.
  for (std::size_t i : by_reviewer_[*r]) {
    if (paper_of_[i] == *p) return i;
  }
  return std::nullopt;
}

ReviewDataset::ReviewDataset(ScoreScale scale, std::vector<Review> reviews, std::vector<PartialRanking> rankings)
    : scale_(scale) {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(reviews.size());
  for (const auto& r : reviews) pairs.emplace_back(r.reviewer, r.paper);
  assignment_ = Assignment(std::move(pairs));

  scores_.assign(reviews.size(), 0);
  for (const auto& r : reviews) scores_[*assignment_.find(r.reviewer, r.paper)] = r.score;

  std::map<std::string, std::vector<RankedPair>> merged;
  for (auto& ranking : rankings) {
    auto& dst = merged[ranking.reviewer];
    dst.insert(dst.end(), std::make_move_iterator(ranking.pairs.begin()),
               std::make_move_iterator(ranking.pairs.end()));
  }
  rankings_.reserve(merged.size());
  for (auto& [reviewer, ranked] : merged) {
    for (const auto& pair : ranked) {
      const auto better = assignment_.find(reviewer, pair.better);
      const auto worse = assignment_.find(reviewer, pair.worse);
      if (better && worse) ranked_pairs_.push_back({*better, *worse});
    }
    rankings_.push_back({reviewer, std::move(ranked)});
  }
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kOutOfRange: return "OUT_OF_RANGE";
    case ViolationCode::kUnassignedPair: return "UNASSIGNED_PAIR";
    case ViolationCode::kRankScoreInconsistent: return "RANK_SCORE_INCONSISTENT";
    case ViolationCode::kRankCycle: return "RANK_CYCLE";
  }
  return "UNKNOWN";
}

std::string describe(const Violation& v) {
  std::string out(to_string(v.code));
  if (!v.reviewer.empty()) out += fmt::format(" reviewer={}", v.reviewer);
  if (!v.paper.empty()) out += fmt::format(" paper={}", v.paper);
  if (!v.other_paper.empty()) out += fmt::format(" other={}", v.other_paper);
  if (!v.detail.empty()) out += fmt::format(" ({})", v.detail);
  return out;
}

std::vector<Violation> validate(const ReviewDataset& dataset) {
  std::vector<Violation> out;
  const auto& scale = dataset.scale();
  const auto& assignment = dataset.assignment();

  if (scale.lower > scale.upper) {
    out.push_back({ViolationCode::kOutOfRange, "", "", "",
                   fmt::format("empty scale [{}, {}]", scale.lower, scale.upper)});
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int z = dataset.score(i);
    if (z < scale.lower || z > scale.upper) {
      out.push_back({ViolationCode::kOutOfRange, assignment.reviewer_id(i), assignment.paper_id(i), "",
                     fmt::format("score {} outside [{}, {}]", z, scale.lower, scale.upper)});
    }
  }

  for (const auto& ranking : dataset.rankings()) {
    const auto r = assignment.reviewer_index(ranking.reviewer);
    std::vector<std::vector<std::size_t>> adj;
    std::vector<std::size_t> review_of;
    std::unordered_map<std::size_t, std::size_t> local;
    auto node = [&](std::size_t review) {
      auto [it, inserted] = local.emplace(review, review_of.size());
      if (inserted) {
        review_of.push_back(review);
        adj.emplace_back();
      }
      return it->second;
    };

    for (const auto& pair : ranking.pairs) {
      const auto better = r ? assignment.find(ranking.reviewer, pair.better) : std::nullopt;
      const auto worse = r ? assignment.find(ranking.reviewer, pair.worse) : std::nullopt;
      if (!better || !worse) {
        const std::string& missing = !better ? pair.better : pair.worse;
        out.push_back({ViolationCode::kUnassignedPair, ranking.reviewer, pair.better, pair.worse,
                       fmt::format("paper '{}' has no score from this reviewer", missing)});
        continue;
      }
      if (*better == *worse) {
        out.push_back({ViolationCode::kRankCycle, ranking.reviewer, pair.better, pair.worse,
                       "paper ranked above itself"});
        continue;
      }
      const int zb = dataset.score(*better);
      const int zw = dataset.score(*worse);
      if (zb < zw) {
        out.push_back({ViolationCode::kRankScoreInconsistent, ranking.reviewer, pair.better, pair.worse,
                       fmt::format("ranked above but scored {} < {}", zb, zw)});
      }
      const std::size_t from = node(*better);
      const std::size_t to = node(*worse);
      adj[from].push_back(to);
    }

    for (const auto& component : cyclic_components(review_of.size(), adj)) {
      std::vector<std::string> names;
      for (std::size_t v : component) names.push_back(assignment.paper_id(review_of[v]));
      std::sort(names.begin(), names.end());
      out.push_back({ViolationCode::kRankCycle, ranking.reviewer, names.front(), "",
                     fmt::format("cycle through {}", fmt::join(names, ", "))});
    }
  }
  return out;
}

void ensure_valid(const ReviewDataset& dataset) {
  const auto violations = validate(dataset);
  if (violations.empty()) return;
  throw Error(ErrorCode::kValidationError,
              fmt::format("{} violation(s); first: {}", violations.size(), describe(violations.front())));
}

std::vector<PartialRanking> derive_rankings(const Assignment& assignment, std::span<const double> values) {
  if (values.size() != assignment.size()) {
    throw Error(ErrorCode::kInvalidArgument, "value vector does not match assignment size");
  }
  std::vector<PartialRanking> out;
  out.reserve(assignment.num_reviewers());
  for (std::size_t r = 0; r < assignment.num_reviewers(); ++r) {
    PartialRanking ranking{assignment.reviewers()[r], {}};
    const auto reviews = assignment.reviews_of_reviewer(r);
    for (std::size_t a : reviews) {
      for (std::size_t b : reviews) {
        if (values[a] > values[b]) ranking.pairs.push_back({assignment.paper_id(a), assignment.paper_id(b)});
      }
    }
    out.push_back(std::move(ranking));
  }
  return out;
}

std::vector<PartialRanking> derive_rankings_from_raw_scores(const std::vector<RawScore>& raw) {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(raw.size());
  for (const auto& s : raw) pairs.emplace_back(s.reviewer, s.paper);
  const Assignment assignment(std::move(pairs));
  std::vector<double> values(raw.size());
  for (const auto& s : raw) values[*assignment.find(s.reviewer, s.paper)] = s.value;
  return derive_rankings(assignment, values);
}

std::vector<double> scores_as_reals(const ReviewDataset& dataset) {
  return {dataset.scores().begin(), dataset.scores().end()};
}

}  // namespace dequant
