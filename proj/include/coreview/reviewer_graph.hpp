#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "coreview/review_data.hpp"

namespace coreview {

// Spread of the time gap (days) and rating gap (stars) between two reviews
// of the same product.
struct CoReviewParams {
  double sigma1 = 90.0;
  double sigma2 = 3.0;

  void validate() const;
};

// Phi(x) through erfc, accurate to a few ulps in the lower tail.
double standard_normal_cdf(double x);

// 4 * Phi(-|dt|/sigma1) * Phi(-|dpsi|/sigma2). Lies in (0, 1]; equals 1 only
// when both gaps are zero.
double co_review_similarity(int delta_t_days, int delta_stars,
                            const CoReviewParams& params);

struct PairScore {
  double collusiveness = 0.0;  // max similarity over common products
  std::size_t common = 0;      // |P_i & P_j|
  double jaccard = 0.0;        // |P_i & P_j| / |P_i | P_j|

  double companion_weight() const { return collusiveness * jaccard; }
};

// Walks the two sorted product lists. Zero score when nothing is shared.
PairScore pair_score(ReviewerId a, ReviewerId b, const Dataset& dataset,
                     const CoReviewParams& params);

inline double collusiveness(ReviewerId a, ReviewerId b, const Dataset& dataset,
                            const CoReviewParams& params) {
  return pair_score(a, b, dataset, params).collusiveness;
}

enum class GraphKind { kPrimary, kCompanion };

struct WeightedEdge {
  ReviewerId u = 0;
  ReviewerId v = 0;
  double weight = 0.0;
};

// Undirected weighted reviewer graph. The adjacency is a symmetric row-major
// sparse matrix without diagonal; row u lists the neighbours of u in
// ascending id order.
class ReviewerGraph {
 public:
  using Adjacency = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  ReviewerGraph() = default;
  // Edges are given once per unordered pair and mirrored here.
  ReviewerGraph(std::size_t num_nodes, GraphKind kind, double threshold,
                std::span<const WeightedEdge> edges);

  std::size_t num_nodes() const { return static_cast<std::size_t>(adj_.rows()); }
  std::size_t num_edges() const {
    return static_cast<std::size_t>(adj_.nonZeros()) / 2;
  }
  GraphKind kind() const { return kind_; }
  double threshold() const { return threshold_; }
  const Adjacency& adjacency() const { return adj_; }

  std::size_t degree(ReviewerId u) const {
    return static_cast<std::size_t>(adj_.outerIndexPtr()[u + 1] -
                                    adj_.outerIndexPtr()[u]);
  }
  std::span<const int> neighbors(ReviewerId u) const {
    const int* begin = adj_.innerIndexPtr() + adj_.outerIndexPtr()[u];
    return {begin, degree(u)};
  }
  std::span<const double> weights(ReviewerId u) const {
    const double* begin = adj_.valuePtr() + adj_.outerIndexPtr()[u];
    return {begin, degree(u)};
  }
  std::optional<double> weight(ReviewerId u, ReviewerId v) const;

  // Each unordered edge once, u < v, ordered by (u, v).
  std::vector<WeightedEdge> edges() const;

 private:
  Adjacency adj_;
  GraphKind kind_ = GraphKind::kPrimary;
  double threshold_ = 0.0;
};

struct GraphPair {
  ReviewerGraph primary;    // weight = collusiveness, kept if >= delta
  ReviewerGraph companion;  // weight = collusiveness * Jaccard, >= delta'
  std::vector<std::string> warnings;
};

// Builds both graphs in one pass. Pairs are enumerated through shared
// products only. With per_product_cap set, a product with more reviews keeps
// its earliest ones, ordered by (date, reviewer id).
GraphPair build_graphs(const Dataset& dataset, const CoReviewParams& params,
                       double delta, double delta_prime,
                       std::optional<std::size_t> per_product_cap = {});

// "reviewer_a<TAB>reviewer_b<TAB>weight" with reviewer_a < reviewer_b,
// sorted lexicographically.
void write_graph(const ReviewerGraph& graph, const Dataset& dataset,
                 std::ostream& out);

}  // namespace coreview
