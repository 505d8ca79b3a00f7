#include "dequant/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "dequant/error.hpp"
#include "dequant/rng.hpp"

namespace dequant {

namespace {

constexpr int kRepairAttempts = 200;
constexpr int kReshuffles = 100;

std::string padded_id(char prefix, int index, int count) {
  const int width = std::max(3, static_cast<int>(std::to_string(std::max(count - 1, 0)).size()));
  return fmt::format("{}{:0{}}", prefix, index, width);
}

bool contains(std::span<const int> slots, int paper) {
  return std::find(slots.begin(), slots.end(), paper) != slots.end();
}

// Index of the first slot of `block` whose paper repeats within the block, or -1.
int first_repeat(std::span<const int> block) {
  for (std::size_t i = 1; i < block.size(); ++i) {
    if (contains(block.first(i), block[i])) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

int SynthConfig::num_reviewers() const {
  if (num_papers <= 0 || reviews_per_paper <= 0 || papers_per_reviewer <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "paper count and loads must be positive");
  }
  if ((num_papers * reviews_per_paper) % papers_per_reviewer != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} papers x {} reviews do not split into loads of {}", num_papers, reviews_per_paper,
                            papers_per_reviewer));
  }
  if (!(sigma >= 0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be nonnegative");
  return num_papers * reviews_per_paper / papers_per_reviewer;
}

Assignment random_regular_assignment(int num_papers, int num_reviewers, int papers_per_reviewer,
                                     int reviews_per_paper, std::uint64_t seed) {
  if (num_papers <= 0 || num_reviewers <= 0 || papers_per_reviewer <= 0 || reviews_per_paper <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "assignment sizes must be positive");
  }
  if (num_papers * reviews_per_paper != num_reviewers * papers_per_reviewer) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} papers x {} reviews != {} reviewers x {} papers", num_papers, reviews_per_paper,
                            num_reviewers, papers_per_reviewer));
  }
  if (papers_per_reviewer > num_papers || reviews_per_paper > num_reviewers) {
    throw Error(ErrorCode::kInvalidArgument, "load exceeds the number of distinct partners");
  }

  const int k = papers_per_reviewer;
  Rng rng(seed);
  std::vector<int> slots;
  slots.reserve(static_cast<std::size_t>(num_papers * reviews_per_paper));
  for (int p = 0; p < num_papers; ++p) {
    for (int m = 0; m < reviews_per_paper; ++m) slots.push_back(p);
  }
  auto block = [&](int r) { return std::span<int>(slots).subspan(static_cast<std::size_t>(r * k), k); };

  for (int attempt = 0; attempt < kReshuffles; ++attempt) {
    rng.shuffle(std::span<int>(slots));
    bool repaired = true;
    for (int r = 0; r < num_reviewers && repaired; ++r) {
      for (int bad = first_repeat(block(r)); bad >= 0; bad = first_repeat(block(r))) {
        bool swapped = false;
        for (int tries = 0; tries < kRepairAttempts && !swapped; ++tries) {
          const auto other = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_reviewers)));
          if (other == r) continue;
          const auto pos = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(k)));
          auto mine = block(r);
          auto theirs = block(other);
          const int incoming = theirs[pos];
          const int outgoing = mine[static_cast<std::size_t>(bad)];
          if (contains(mine, incoming) || contains(theirs, outgoing)) continue;
          std::swap(mine[static_cast<std::size_t>(bad)], theirs[pos]);
          swapped = true;
        }
        if (!swapped) {
          repaired = false;
          break;
        }
      }
    }
    if (!repaired) continue;

    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(slots.size());
    for (int r = 0; r < num_reviewers; ++r) {
      for (int p : block(r)) {
        pairs.emplace_back(padded_id('r', r, num_reviewers), padded_id('p', p, num_papers));
      }
    }
    return Assignment(std::move(pairs));
  }
  throw Error(ErrorCode::kRetryExhausted,
              fmt::format("no duplicate-free assignment after {} reshuffles", kReshuffles));
}

SynthInstance generate(const SynthConfig& config) {
  const int num_reviewers = config.num_reviewers();
  const Assignment assignment = random_regular_assignment(config.num_papers, num_reviewers, config.papers_per_reviewer,
                                                          config.reviews_per_paper, derive_seed(config.seed, 0));
  Rng rng(derive_seed(config.seed, 1));

  SynthInstance out;
  out.truth_x_star.resize(assignment.num_papers());
  for (double& x : out.truth_x_star) x = rng.uniform(config.truth_lower, config.truth_upper);

  out.truth_y.resize(assignment.size());
  std::vector<Review> reviews;
  reviews.reserve(assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const double noisy = out.truth_x_star[assignment.paper_of(i)] + config.sigma * rng.normal();
    const double y = std::clamp(noisy, config.clip_lower, config.clip_upper);
    out.truth_y[i] = y;
    const int z = std::clamp(static_cast<int>(std::floor(y + 0.5)), config.scale.lower, config.scale.upper);
    reviews.push_back({assignment.reviewer_id(i), assignment.paper_id(i), z});
  }
  // Same pairs, same sort: the dataset keeps these review indices.
  out.dataset = ReviewDataset(config.scale, std::move(reviews), derive_rankings(assignment, out.truth_y));
  return out;
}

}  // namespace dequant
