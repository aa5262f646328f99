#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coreview/priors.hpp"
#include "coreview/review_data.hpp"

namespace coreview {

struct RankedEntry {
  std::string reviewer;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

// Scores non-increasing, ties by ascending reviewer id.
using RankedList = std::vector<RankedEntry>;

// Orders reviewers by descending spam score. The result does not depend on
// the input order.
RankedList rank_reviewers(std::span<const std::string> reviewers,
                          std::span<const double> spam_scores);
RankedList rank_reviewers(const Dataset& dataset,
                          const Eigen::Ref<const Eigen::VectorXd>& spam_scores);

// Sets each group's posterior to the mean member spam score and orders the
// groups by descending posterior, ties by smallest member id.
std::vector<CandidateGroup> rank_groups(
    std::vector<CandidateGroup> groups,
    const Eigen::Ref<const Eigen::VectorXd>& spam_scores);

// NDCG@k with binary relevance (spammer = 1). Unlabeled reviewers are dropped
// from the ranking first; the ideal ordering puts every labeled spammer
// first. Throws UndefinedMetricError when no labeled spammer exists.
double ndcg_at_k(const RankedList& ranking, const LabelMap& labels,
                 std::size_t k);

// |A & B| / k for two top-k lists.
double overlap_degree(std::span<const std::string> a,
                      std::span<const std::string> b);

// 1 - sum_a dist(a, B) / k^2, dist = |loc_A(a) - loc_B(a)| when a is in B
// and k otherwise.
double similarity_degree(std::span<const std::string> a,
                         std::span<const std::string> b);

// First k reviewer ids of a ranking (fewer if the ranking is shorter).
std::vector<std::string> top_k(const RankedList& ranking, std::size_t k);

}  // namespace coreview
