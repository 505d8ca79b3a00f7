#pragma once

#include <string>
#include <vector>

#include "dequant/baselines.hpp"
#include "dequant/core_model.hpp"
#include "dequant/rng.hpp"
#include "dequant/synthgen.hpp"

namespace fixture {

// One reviewer "r" scoring papers named by `papers` with `scores`, ranked
// by the listed (better, worse) pairs.
inline dequant::ReviewDataset single_reviewer(const std::vector<std::string>& papers, const std::vector<int>& scores,
                                              const std::vector<dequant::RankedPair>& pairs = {},
                                              dequant::ScoreScale scale = {0, 10}) {
  std::vector<dequant::Review> reviews;
  for (std::size_t i = 0; i < papers.size(); ++i) reviews.push_back({"r", papers[i], scores[i]});
  std::vector<dequant::PartialRanking> rankings;
  if (!pairs.empty()) rankings.push_back({"r", pairs});
  return dequant::ReviewDataset(scale, std::move(reviews), std::move(rankings));
}

// One paper "p" scored by reviewers "r0", "r1", ... with `scores`.
inline dequant::ReviewDataset single_paper(const std::vector<int>& scores) {
  std::vector<dequant::Review> reviews;
  for (std::size_t i = 0; i < scores.size(); ++i) reviews.push_back({"r" + std::to_string(i), "p", scores[i]});
  return dequant::ReviewDataset({0, 10}, std::move(reviews));
}

// The same dataset with its rankings removed.
inline dequant::ReviewDataset without_rankings(const dequant::ReviewDataset& d) {
  std::vector<dequant::Review> reviews;
  const auto& a = d.assignment();
  for (std::size_t i = 0; i < d.size(); ++i) reviews.push_back({a.reviewer_id(i), a.paper_id(i), d.score(i)});
  return dequant::ReviewDataset(d.scale(), std::move(reviews));
}

inline dequant::SynthInstance small_instance(std::uint64_t seed, int papers = 12, int mu = 3, int kappa = 3,
                                             double sigma = 0.5) {
  dequant::SynthConfig c;
  c.num_papers = papers;
  c.reviews_per_paper = mu;
  c.papers_per_reviewer = kappa;
  c.sigma = sigma;
  c.seed = seed;
  return dequant::generate(c);
}

// Like small_instance, redrawn until every reviewer's ranking is total.
// Clipping at the ends of the scale can tie latent scores, which leaves
// those papers unranked.
inline dequant::SynthInstance total_ranking_instance(std::uint64_t seed, int papers, int mu, int kappa, double sigma) {
  for (std::uint64_t k = 0;; ++k) {
    auto inst = small_instance(dequant::derive_seed(seed, k), papers, mu, kappa, sigma);
    if (dequant::has_total_rankings(inst.dataset)) return inst;
  }
}

}  // namespace fixture
