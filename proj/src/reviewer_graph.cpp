#include "coreview/reviewer_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "coreview/error.hpp"

namespace coreview {

void CoReviewParams::validate() const {
  if (!(sigma1 > 0.0) || !std::isfinite(sigma1)) {
    throw ConfigError("sigma1 must be positive");
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ConfigError("sigma2 must be positive");
  }
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double co_review_similarity(int delta_t_days, int delta_stars,
                            const CoReviewParams& params) {
  const double t = std::abs(static_cast<double>(delta_t_days)) / params.sigma1;
  const double s = std::abs(static_cast<double>(delta_stars)) / params.sigma2;
  return 4.0 * standard_normal_cdf(-t) * standard_normal_cdf(-s);
}

PairScore pair_score(ReviewerId a, ReviewerId b, const Dataset& dataset,
                     const CoReviewParams& params) {
  PairScore score;
  const auto ra = dataset.reviews_by(a);
  const auto rb = dataset.reviews_by(b);
  std::size_t i = 0, j = 0;
  while (i < ra.size() && j < rb.size()) {
    const auto& va = dataset.review(ra[i]);
    const auto& vb = dataset.review(rb[j]);
    if (va.product < vb.product) {
      ++i;
    } else if (vb.product < va.product) {
      ++j;
    } else {
      const double sim = co_review_similarity(
          va.date.days_since_epoch - vb.date.days_since_epoch,
          va.rating - vb.rating, params);
      score.collusiveness = std::max(score.collusiveness, sim);
      ++score.common;
      ++i;
      ++j;
    }
  }
  if (score.common > 0) {
    score.jaccard = static_cast<double>(score.common) /
                    static_cast<double>(ra.size() + rb.size() - score.common);
  }
  return score;
}

ReviewerGraph::ReviewerGraph(std::size_t num_nodes, GraphKind kind,
                             double threshold,
                             std::span<const WeightedEdge> edges)
    : adj_(static_cast<int>(num_nodes), static_cast<int>(num_nodes)),
      kind_(kind),
      threshold_(threshold) {
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    if (e.u == e.v) throw Error("reviewer graph: self-loop rejected");
    triplets.emplace_back(static_cast<int>(e.u), static_cast<int>(e.v),
                          e.weight);
    triplets.emplace_back(static_cast<int>(e.v), static_cast<int>(e.u),
                          e.weight);
  }
  adj_.setFromTriplets(triplets.begin(), triplets.end(),
                       [](double, double) -> double {
                         throw Error("reviewer graph: duplicate edge");
                       });
  adj_.makeCompressed();
}

std::optional<double> ReviewerGraph::weight(ReviewerId u, ReviewerId v) const {
  const auto nbrs = neighbors(u);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), static_cast<int>(v));
  if (it == nbrs.end() || *it != static_cast<int>(v)) return std::nullopt;
  return weights(u)[static_cast<std::size_t>(it - nbrs.begin())];
}

std::vector<WeightedEdge> ReviewerGraph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(num_edges());
  for (std::size_t u = 0; u < num_nodes(); ++u) {
    const auto id = static_cast<ReviewerId>(u);
    const auto nbrs = neighbors(id);
    const auto w = weights(id);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (static_cast<std::size_t>(nbrs[k]) > u) {
        out.push_back({id, static_cast<ReviewerId>(nbrs[k]), w[k]});
      }
    }
  }
  return out;
}

GraphPair build_graphs(const Dataset& dataset, const CoReviewParams& params,
                       double delta, double delta_prime,
                       std::optional<std::size_t> per_product_cap) {
  params.validate();
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("delta must lie in (0, 1]");
  }
  if (!(delta_prime > 0.0 && delta_prime <= 1.0)) {
    throw ConfigError("delta' must lie in (0, 1]");
  }

  GraphPair out;
  const std::size_t n = dataset.num_reviewers();

  // Per product, the reviews that take part in pairing (sorted by reviewer).
  std::vector<std::vector<ReviewIndex>> members(dataset.num_products());
  std::vector<char> active(dataset.num_reviews(), 1);
  for (std::size_t p = 0; p < dataset.num_products(); ++p) {
    const auto list = dataset.reviews_of(static_cast<ProductId>(p));
    members[p].assign(list.begin(), list.end());
    if (per_product_cap && members[p].size() > *per_product_cap) {
      auto& m = members[p];
      std::sort(m.begin(), m.end(), [&](ReviewIndex a, ReviewIndex b) {
        const auto& ra = dataset.review(a);
        const auto& rb = dataset.review(b);
        if (ra.date != rb.date) return ra.date < rb.date;
        return ra.reviewer < rb.reviewer;
      });
      for (std::size_t k = *per_product_cap; k < m.size(); ++k) active[m[k]] = 0;
      out.warnings.push_back("product " +
                             dataset.product_name(static_cast<ProductId>(p)) +
                             ": " + std::to_string(m.size()) +
                             " reviews truncated to " +
                             std::to_string(*per_product_cap));
      m.resize(*per_product_cap);
      std::sort(m.begin(), m.end(), [&](ReviewIndex a, ReviewIndex b) {
        return dataset.review(a).reviewer < dataset.review(b).reviewer;
      });
    }
  }

  // One reviewer at a time: gather max similarity and common-product count
  // for every later reviewer sharing a product, then threshold immediately.
  std::vector<double> best(n, -1.0);
  std::vector<std::uint32_t> common(n, 0);
  std::vector<ReviewerId> touched;
  std::vector<WeightedEdge> primary_edges, companion_edges;

  for (std::size_t u = 0; u < n; ++u) {
    const auto uid = static_cast<ReviewerId>(u);
    for (ReviewIndex ri : dataset.reviews_by(uid)) {
      if (!active[ri]) continue;
      const auto& mine = dataset.review(ri);
      const auto& list = members[mine.product];
      auto it = std::upper_bound(
          list.begin(), list.end(), uid, [&](ReviewerId id, ReviewIndex r) {
            return id < dataset.review(r).reviewer;
          });
      for (; it != list.end(); ++it) {
        const auto& theirs = dataset.review(*it);
        const ReviewerId v = theirs.reviewer;
        const double sim = co_review_similarity(
            mine.date.days_since_epoch - theirs.date.days_since_epoch,
            mine.rating - theirs.rating, params);
        if (best[v] < 0.0) touched.push_back(v);
        best[v] = std::max(best[v], sim);
        ++common[v];
      }
    }
    std::sort(touched.begin(), touched.end());
    const std::size_t pu = dataset.reviews_by(uid).size();
    for (ReviewerId v : touched) {
      const double c = best[v];
      const std::size_t pv = dataset.reviews_by(v).size();
      const double jac = static_cast<double>(common[v]) /
                         static_cast<double>(pu + pv - common[v]);
      if (c >= delta) primary_edges.push_back({uid, v, c});
      const double cj = c * jac;
      if (cj >= delta_prime) companion_edges.push_back({uid, v, cj});
      best[v] = -1.0;
      common[v] = 0;
    }
    touched.clear();
  }

  out.primary = ReviewerGraph(n, GraphKind::kPrimary, delta, primary_edges);
  out.companion =
      ReviewerGraph(n, GraphKind::kCompanion, delta_prime, companion_edges);
  return out;
}

void write_graph(const ReviewerGraph& graph, const Dataset& dataset,
                 std::ostream& out) {
  char buf[32];
  for (const auto& e : graph.edges()) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
    out << dataset.reviewer_name(e.u) << '\t' << dataset.reviewer_name(e.v)
        << '\t' << buf << '\n';
  }
}

}  // namespace coreview
