#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coreview/review_data.hpp"
#include "coreview/reviewer_graph.hpp"

namespace coreview {

// ---------------------------------------------------------------------------
// Review-based behavioural features (prior ALL)
// ---------------------------------------------------------------------------

struct FeatureConfig {
  int etf_window_days = 240;
  double dev_threshold = 0.63;
};

struct ReviewFeatureRow {
  int rank = 1;       // 1-based chronological position on the product
  double rd = 0.0;    // |rating - product mean rating|
  int ext = 0;        // rating in {4, 5}
  int dev = 0;        // rd / 4 > dev_threshold
  double etf = 0.0;   // max(0, 1 - days since product's first review / window)
  int isr = 0;        // author has exactly one retained review
};

// One row per retained review, indexed by ReviewIndex. Equal dates on a
// product are ordered by reviewer id when assigning rank.
std::vector<ReviewFeatureRow> compute_review_features(
    const Dataset& dataset, const FeatureConfig& config = {});

enum class Suspicion { kHighIsSuspicious, kLowIsSuspicious };

// Maps each value through the empirical CDF of the list (ties inclusive).
// Output is oriented so that lower means more suspicious:
// 1 - P(X <= x) when high values are suspicious, P(X <= x) otherwise.
Eigen::VectorXd ecdf_normalize(std::span<const double> values,
                               Suspicion direction);

// S = 1 - sqrt(sum f^2 / F) over normalized feature values f in [0, 1].
template <typename Derived>
double combine_prior(const Eigen::MatrixBase<Derived>& f) {
  return 1.0 - std::sqrt(f.squaredNorm() / static_cast<double>(f.size()));
}

// Per-review prior: all six features normalized over the whole corpus and
// combined row-wise.
Eigen::VectorXd review_priors_all(const Dataset& dataset,
                                  std::span<const ReviewFeatureRow> features);

enum class PriorSource { kAll, kNt, kFile, kNeutral };

std::string to_string(PriorSource source);

struct PriorVector {
  Eigen::VectorXd values;  // one entry per reviewer, each in [0, 1]
  PriorSource source = PriorSource::kNeutral;
};

// A reviewer's prior is the maximum prior of their retained reviews.
PriorVector reviewer_prior_all(const Dataset& dataset,
                               const Eigen::Ref<const Eigen::VectorXd>& review_priors);

// Features, normalization, combination and lifting in one call.
PriorVector prior_all(const Dataset& dataset, const FeatureConfig& config = {});

PriorVector neutral_prior(std::size_t num_reviewers, double value = 0.5);

// ---------------------------------------------------------------------------
// SCAN on the companion graph and neighbour tightness (prior NT)
// ---------------------------------------------------------------------------

struct ScanParams {
  double epsilon = 0.6;
  int mu = 2;

  void validate() const;
};

struct CandidateGroup {
  std::vector<ReviewerId> members;  // ascending
  double nt = 0.0;
  std::optional<double> posterior;
};

struct ScanResult {
  std::vector<CandidateGroup> groups;  // ordered by smallest member
  std::vector<ReviewerId> hubs;        // unclustered, touching >= 2 clusters
  std::vector<ReviewerId> outliers;    // other unclustered nodes with edges
};

// Structural clustering on the unweighted topology of `graph`. Similarity of
// adjacent u, v is |G(u) & G(v)| / sqrt(|G(u)| |G(v)|) over closed
// neighbourhoods; the eps-neighbourhood of u includes u itself. Cores are
// expanded in ascending id order and a border node stays with the first
// cluster that reaches it.
ScanResult scan_cluster(const ReviewerGraph& graph, const ScanParams& params);

// Mean pair score times the small-group penalty 1 / (1 + e^-(|g| - 2)).
// `pair_scores` holds all C(|g|, 2) intra-group scores.
double neighbor_tightness(std::span<const double> pair_scores,
                          std::size_t group_size);

struct NtPrior {
  PriorVector prior;
  std::vector<CandidateGroup> groups;  // nt filled
};

// Scores each group, assigning every member the highest nt among its groups
// and `fallback` to reviewers outside all groups. Intra-group pairs missing
// from the companion graph are rescored from the dataset.
NtPrior nt_prior(std::vector<CandidateGroup> groups,
                 const ReviewerGraph& companion, const Dataset& dataset,
                 const CoReviewParams& params, double fallback = 0.5);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

struct LoadedPrior {
  PriorVector prior;
  std::size_t unknown_reviewers = 0;  // lines naming reviewers not in data
  std::size_t missing_reviewers = 0;  // reviewers given the fallback
};

// "reviewer_id<TAB>prior" lines. Values outside [0, 1] or malformed lines
// raise ConfigError.
LoadedPrior load_prior_file(std::istream& in, const Dataset& dataset,
                            double fallback = 0.5);

void write_priors(const PriorVector& prior, const Dataset& dataset,
                  std::ostream& out);

// "group_id<TAB>nt<TAB>member,member,..." with group ids counted from 0.
void write_groups(std::span<const CandidateGroup> groups,
                  const Dataset& dataset, std::ostream& out);

}  // namespace coreview
