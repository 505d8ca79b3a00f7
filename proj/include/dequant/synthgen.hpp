#pragma once

#include <cstdint>
#include <vector>

#include "dequant/core_model.hpp"

namespace dequant {

struct SynthConfig {
  int num_papers = 60;
  double sigma = 0.5;
  int reviews_per_paper = 4;
  int papers_per_reviewer = 4;
  std::uint64_t seed = 0;
  double truth_lower = 1.0;
  double truth_upper = 9.0;
  double clip_lower = 0.0;
  double clip_upper = 10.0;
  ScoreScale scale{0, 10};

  /// num_papers * reviews_per_paper / papers_per_reviewer. Throws
  /// Error(kInvalidArgument) unless the configuration is usable.
  int num_reviewers() const;
};

struct SynthInstance {
  ReviewDataset dataset;
  /// Indexed by the dataset's paper indices.
  std::vector<double> truth_x_star;
  /// Clipped latent scores aligned with the dataset's review indices.
  std::vector<double> truth_y;
};

/// Each reviewer takes `papers_per_reviewer` consecutive slots of a shuffled
/// list holding every paper `reviews_per_paper` times; repeated (reviewer,
/// paper) pairs are repaired by random slot swaps. Reviewers are "r000",
/// "r001", ... and papers "p000", ...
///
/// Throws Error(kInvalidArgument) unless papers * reviews_per_paper equals
/// reviewers * papers_per_reviewer and both loads fit, and
/// Error(kRetryExhausted) if repair keeps failing.
Assignment random_regular_assignment(int num_papers, int num_reviewers, int papers_per_reviewer,
                                     int reviews_per_paper, std::uint64_t seed);

/// x*_p uniform on the truth range, y_rp = clip(x*_p + sigma N(0, 1)),
/// z_rp = floor(y_rp + 0.5), rankings = strict order of y within reviewer.
SynthInstance generate(const SynthConfig& config);

}  // namespace dequant
