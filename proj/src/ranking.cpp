#include "coreview/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "coreview/error.hpp"

namespace coreview {

RankedList rank_reviewers(std::span<const std::string> reviewers,
                          std::span<const double> spam_scores) {
  if (reviewers.size() != spam_scores.size()) {
    throw LengthMismatchError("rank_reviewers: ids and scores differ in length");
  }
  std::vector<std::size_t> order(reviewers.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (spam_scores[a] != spam_scores[b]) return spam_scores[a] > spam_scores[b];
    return reviewers[a] < reviewers[b];
  });
  RankedList out;
  out.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    out.push_back({reviewers[order[pos]], spam_scores[order[pos]], pos + 1});
  }
  return out;
}

RankedList rank_reviewers(const Dataset& dataset,
                          const Eigen::Ref<const Eigen::VectorXd>& spam_scores) {
  std::vector<std::string> ids(dataset.num_reviewers());
  for (std::size_t u = 0; u < ids.size(); ++u) {
    ids[u] = dataset.reviewer_name(static_cast<ReviewerId>(u));
  }
  std::vector<double> scores(spam_scores.data(),
                             spam_scores.data() + spam_scores.size());
  return rank_reviewers(ids, scores);
}

std::vector<CandidateGroup> rank_groups(
    std::vector<CandidateGroup> groups,
    const Eigen::Ref<const Eigen::VectorXd>& spam_scores) {
  for (auto& g : groups) {
    if (g.members.empty()) throw Error("rank_groups: empty group");
    double sum = 0.0;
    for (ReviewerId u : g.members) {
      if (static_cast<Eigen::Index>(u) >= spam_scores.size()) {
        throw Error("rank_groups: member without a belief");
      }
      sum += spam_scores[static_cast<Eigen::Index>(u)];
    }
    g.posterior = sum / static_cast<double>(g.members.size());
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const CandidateGroup& a, const CandidateGroup& b) {
                     if (*a.posterior != *b.posterior) {
                       return *a.posterior > *b.posterior;
                     }
                     return *std::min_element(a.members.begin(), a.members.end()) <
                            *std::min_element(b.members.begin(), b.members.end());
                   });
  return groups;
}

double ndcg_at_k(const RankedList& ranking, const LabelMap& labels,
                 std::size_t k) {
  if (k == 0) throw Error("ndcg_at_k: k must be at least 1");
  std::vector<int> relevance;
  relevance.reserve(ranking.size());
  std::size_t spammers = 0;
  for (const auto& entry : ranking) {
    auto it = labels.find(entry.reviewer);
    if (it == labels.end()) continue;
    const int rel = it->second == ReviewerLabel::kSpammer ? 1 : 0;
    relevance.push_back(rel);
    spammers += static_cast<std::size_t>(rel);
  }
  if (spammers == 0) {
    throw UndefinedMetricError("ndcg_at_k: no labeled spammer in the ranking");
  }
  double dcg = 0.0, ideal = 0.0;
  const std::size_t depth = std::min(k, relevance.size());
  for (std::size_t i = 0; i < depth; ++i) {
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += relevance[i] / discount;
    if (i < spammers) ideal += 1.0 / discount;
  }
  return dcg / ideal;
}

namespace {

void check_lengths(std::span<const std::string> a,
                   std::span<const std::string> b) {
  if (a.size() != b.size()) {
    throw LengthMismatchError("ranking lists differ in length (" +
                              std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw LengthMismatchError("ranking lists are empty");
}

}  // namespace

double overlap_degree(std::span<const std::string> a,
                      std::span<const std::string> b) {
  check_lengths(a, b);
  const std::unordered_set<std::string> in_b(b.begin(), b.end());
  const auto shared = std::count_if(a.begin(), a.end(), [&](const auto& x) {
    return in_b.contains(x);
  });
  return static_cast<double>(shared) / static_cast<double>(a.size());
}

double similarity_degree(std::span<const std::string> a,
                         std::span<const std::string> b) {
  check_lengths(a, b);
  const std::size_t k = a.size();
  std::unordered_map<std::string, std::size_t> loc_b;
  for (std::size_t i = 0; i < k; ++i) loc_b.emplace(b[i], i + 1);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    auto it = loc_b.find(a[i]);
    if (it == loc_b.end()) {
      total += static_cast<double>(k);
    } else {
      const double la = static_cast<double>(i + 1);
      total += std::abs(la - static_cast<double>(it->second));
    }
  }
  const double kk = static_cast<double>(k);
  return 1.0 - total / (kk * kk);
}

std::vector<std::string> top_k(const RankedList& ranking, std::size_t k) {
  std::vector<std::string> out;
  const std::size_t n = std::min(k, ranking.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ranking[i].reviewer);
  return out;
}

}  // namespace coreview
