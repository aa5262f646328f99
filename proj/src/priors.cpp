#include "coreview/priors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <istream>
#include <ostream>

#include "coreview/error.hpp"

namespace coreview {

std::vector<ReviewFeatureRow> compute_review_features(
    const Dataset& dataset, const FeatureConfig& config) {
  if (dataset.num_reviews() == 0) throw EmptyDatasetError("no reviews");
  if (config.etf_window_days <= 0) {
    throw ConfigError("etf window must be positive");
  }

  std::vector<ReviewFeatureRow> rows(dataset.num_reviews());
  std::vector<ReviewIndex> order;
  for (std::size_t p = 0; p < dataset.num_products(); ++p) {
    const auto reviews = dataset.reviews_of(static_cast<ProductId>(p));
    if (reviews.empty()) continue;

    order.assign(reviews.begin(), reviews.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](ReviewIndex a, ReviewIndex b) {
                       const auto& ra = dataset.review(a);
                       const auto& rb = dataset.review(b);
                       if (ra.date != rb.date) return ra.date < rb.date;
                       return ra.reviewer < rb.reviewer;
                     });

    double sum = 0.0;
    for (ReviewIndex r : reviews) sum += dataset.review(r).rating;
    const double mean = sum / static_cast<double>(reviews.size());
    const Day first = dataset.review(order.front()).date;

    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& review = dataset.review(order[k]);
      auto& row = rows[order[k]];
      row.rank = static_cast<int>(k) + 1;
      row.rd = std::abs(review.rating - mean);
      row.ext = review.rating >= 4 ? 1 : 0;
      row.dev = row.rd / 4.0 > config.dev_threshold ? 1 : 0;
      const double elapsed =
          review.date.days_since_epoch - first.days_since_epoch;
      row.etf = std::max(0.0, 1.0 - elapsed / config.etf_window_days);
      row.isr = dataset.reviews_by(review.reviewer).size() == 1 ? 1 : 0;
    }
  }
  return rows;
}

Eigen::VectorXd ecdf_normalize(std::span<const double> values,
                               Suspicion direction) {
  if (values.empty()) throw Error("ecdf_normalize: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto le = std::upper_bound(sorted.begin(), sorted.end(), values[i]) -
                    sorted.begin();
    const double cdf = static_cast<double>(le) / n;
    out[static_cast<Eigen::Index>(i)] =
        direction == Suspicion::kHighIsSuspicious ? 1.0 - cdf : cdf;
  }
  return out;
}

Eigen::VectorXd review_priors_all(const Dataset& dataset,
                                  std::span<const ReviewFeatureRow> features) {
  const std::size_t n = dataset.num_reviews();
  if (features.size() != n) throw Error("feature table does not match dataset");

  constexpr int kFeatures = 6;
  Eigen::MatrixXd normalized(static_cast<Eigen::Index>(n), kFeatures);
  std::vector<double> column(n);
  auto fill = [&](int col, auto getter, Suspicion dir) {
    for (std::size_t i = 0; i < n; ++i) column[i] = getter(features[i]);
    normalized.col(col) = ecdf_normalize(column, dir);
  };
  // Early reviews are suspicious, so rank is the one low-is-suspicious feature.
  fill(0, [](const auto& r) { return double(r.rank); }, Suspicion::kLowIsSuspicious);
  fill(1, [](const auto& r) { return r.rd; }, Suspicion::kHighIsSuspicious);
  fill(2, [](const auto& r) { return double(r.ext); }, Suspicion::kHighIsSuspicious);
  fill(3, [](const auto& r) { return double(r.dev); }, Suspicion::kHighIsSuspicious);
  fill(4, [](const auto& r) { return r.etf; }, Suspicion::kHighIsSuspicious);
  fill(5, [](const auto& r) { return double(r.isr); }, Suspicion::kHighIsSuspicious);

  Eigen::VectorXd priors(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < priors.size(); ++i) {
    priors[i] = combine_prior(normalized.row(i));
  }
  return priors;
}

std::string to_string(PriorSource source) {
  switch (source) {
    case PriorSource::kAll: return "all";
    case PriorSource::kNt: return "nt";
    case PriorSource::kFile: return "file";
    case PriorSource::kNeutral: return "neutral";
  }
  return "unknown";
}

PriorVector reviewer_prior_all(
    const Dataset& dataset,
    const Eigen::Ref<const Eigen::VectorXd>& review_priors) {
  if (static_cast<std::size_t>(review_priors.size()) != dataset.num_reviews()) {
    throw Error("review prior vector does not match dataset");
  }
  PriorVector out;
  out.source = PriorSource::kAll;
  out.values = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(dataset.num_reviewers()));
  for (std::size_t u = 0; u < dataset.num_reviewers(); ++u) {
    double best = 0.0;
    for (ReviewIndex r : dataset.reviews_by(static_cast<ReviewerId>(u))) {
      best = std::max(best, review_priors[r]);
    }
    out.values[static_cast<Eigen::Index>(u)] = best;
  }
  return out;
}

PriorVector prior_all(const Dataset& dataset, const FeatureConfig& config) {
  const auto features = compute_review_features(dataset, config);
  return reviewer_prior_all(dataset, review_priors_all(dataset, features));
}

PriorVector neutral_prior(std::size_t num_reviewers, double value) {
  return {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(num_reviewers),
                                    value),
          PriorSource::kNeutral};
}

void ScanParams::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ConfigError("scan epsilon must lie in (0, 1]");
  }
  if (mu < 2) throw ConfigError("scan mu must be at least 2");
}

namespace {

// |N(u) & N(v)| for sorted neighbour lists.
std::size_t count_common(std::span<const int> a, std::span<const int> b) {
  std::size_t i = 0, j = 0, count = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

}  // namespace

ScanResult scan_cluster(const ReviewerGraph& graph, const ScanParams& params) {
  params.validate();
  const std::size_t n = graph.num_nodes();
  const auto& adj = graph.adjacency();
  const int* offsets = adj.outerIndexPtr();

  // eps-neighbour flag for every directed adjacency slot.
  std::vector<char> eps(static_cast<std::size_t>(adj.nonZeros()), 0);
  std::vector<std::size_t> eps_count(n, 1);  // the node itself
  for (std::size_t u = 0; u < n; ++u) {
    const auto uid = static_cast<ReviewerId>(u);
    const auto nu = graph.neighbors(uid);
    for (std::size_t k = 0; k < nu.size(); ++k) {
      const auto v = static_cast<ReviewerId>(nu[k]);
      if (v < u) continue;
      const auto nv = graph.neighbors(v);
      // Both endpoints belong to both closed neighbourhoods.
      const double shared = static_cast<double>(count_common(nu, nv) + 2);
      const double sim =
          shared / std::sqrt(static_cast<double>((nu.size() + 1) * (nv.size() + 1)));
      if (sim >= params.epsilon) {
        eps[static_cast<std::size_t>(offsets[u]) + k] = 1;
        const auto back = std::lower_bound(nv.begin(), nv.end(), static_cast<int>(u));
        eps[static_cast<std::size_t>(offsets[v] + (back - nv.begin()))] = 1;
        ++eps_count[u];
        ++eps_count[v];
      }
    }
  }
  auto is_core = [&](std::size_t u) {
    return eps_count[u] >= static_cast<std::size_t>(params.mu);
  };

  constexpr int kUnclassified = -1;
  std::vector<int> cluster(n, kUnclassified);
  int next_cluster = 0;
  std::deque<std::size_t> queue;
  for (std::size_t u = 0; u < n; ++u) {
    if (cluster[u] != kUnclassified || !is_core(u)) continue;
    const int id = next_cluster++;
    cluster[u] = id;
    queue.assign(1, u);
    while (!queue.empty()) {
      const std::size_t y = queue.front();
      queue.pop_front();
      if (!is_core(y)) continue;
      const auto ny = graph.neighbors(static_cast<ReviewerId>(y));
      for (std::size_t k = 0; k < ny.size(); ++k) {
        if (!eps[static_cast<std::size_t>(offsets[y]) + k]) continue;
        const auto x = static_cast<std::size_t>(ny[k]);
        if (cluster[x] == kUnclassified) {
          cluster[x] = id;
          queue.push_back(x);
        }
      }
    }
  }

  ScanResult result;
  std::vector<CandidateGroup> groups(static_cast<std::size_t>(next_cluster));
  for (std::size_t u = 0; u < n; ++u) {
    if (cluster[u] != kUnclassified) {
      groups[static_cast<std::size_t>(cluster[u])].members.push_back(
          static_cast<ReviewerId>(u));
    }
  }
  for (auto& g : groups) {
    if (g.members.size() >= 2) result.groups.push_back(std::move(g));
  }
  std::sort(result.groups.begin(), result.groups.end(),
            [](const auto& a, const auto& b) {
              return a.members.front() < b.members.front();
            });

  for (std::size_t u = 0; u < n; ++u) {
    if (cluster[u] != kUnclassified) continue;
    const auto nu = graph.neighbors(static_cast<ReviewerId>(u));
    if (nu.empty()) continue;
    std::vector<int> touching;
    for (int v : nu) {
      if (cluster[static_cast<std::size_t>(v)] != kUnclassified) {
        touching.push_back(cluster[static_cast<std::size_t>(v)]);
      }
    }
    std::sort(touching.begin(), touching.end());
    touching.erase(std::unique(touching.begin(), touching.end()),
                   touching.end());
    (touching.size() >= 2 ? result.hubs : result.outliers)
        .push_back(static_cast<ReviewerId>(u));
  }
  return result;
}

double neighbor_tightness(std::span<const double> pair_scores,
                          std::size_t group_size) {
  if (group_size < 2) throw Error("neighbor_tightness: group smaller than 2");
  const double g = static_cast<double>(group_size);
  double sum = 0.0;
  for (double s : pair_scores) sum += s;
  const double pairs = g * (g - 1.0) / 2.0;
  return sum / pairs / (1.0 + std::exp(-(g - 2.0)));
}

NtPrior nt_prior(std::vector<CandidateGroup> groups,
                 const ReviewerGraph& companion, const Dataset& dataset,
                 const CoReviewParams& params, double fallback) {
  const std::size_t n = dataset.num_reviewers();
  if (companion.num_nodes() != n) {
    throw Error("companion graph does not match dataset");
  }
  NtPrior out;
  out.prior.source = PriorSource::kNt;
  out.prior.values =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), fallback);
  std::vector<char> assigned(n, 0);

  std::vector<double> scores;
  for (auto& group : groups) {
    const auto& m = group.members;
    scores.clear();
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        if (auto w = companion.weight(m[a], m[b])) {
          scores.push_back(*w);
        } else {
          scores.push_back(pair_score(m[a], m[b], dataset, params).companion_weight());
        }
      }
    }
    group.nt = neighbor_tightness(scores, m.size());
    for (ReviewerId u : m) {
      auto& slot = out.prior.values[static_cast<Eigen::Index>(u)];
      slot = assigned[u] ? std::max(slot, group.nt) : group.nt;
      assigned[u] = 1;
    }
  }
  out.groups = std::move(groups);
  return out;
}

LoadedPrior load_prior_file(std::istream& in, const Dataset& dataset,
                            double fallback) {
  if (!in) throw IoError("prior input stream is not readable");
  LoadedPrior out;
  const std::size_t n = dataset.num_reviewers();
  out.prior.source = PriorSource::kFile;
  out.prior.values =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), fallback);
  std::vector<char> seen(n, 0);

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ConfigError("prior file line " + std::to_string(line_number) +
                        ": expected reviewer<TAB>prior");
    }
    const std::string_view value_text(line.data() + tab + 1,
                                      line.size() - tab - 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(
        value_text.data(), value_text.data() + value_text.size(), value);
    if (ec != std::errc() || ptr != value_text.data() + value_text.size() ||
        !(value >= 0.0 && value <= 1.0)) {
      throw ConfigError("prior file line " + std::to_string(line_number) +
                        ": prior must be a number in [0, 1]");
    }
    const auto id = dataset.find_reviewer(std::string_view(line.data(), tab));
    if (!id) {
      ++out.unknown_reviewers;
      continue;
    }
    out.prior.values[static_cast<Eigen::Index>(*id)] = value;
    seen[*id] = 1;
  }
  out.missing_reviewers =
      static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
  return out;
}

void write_priors(const PriorVector& prior, const Dataset& dataset,
                  std::ostream& out) {
  char buf[32];
  for (Eigen::Index u = 0; u < prior.values.size(); ++u) {
    std::snprintf(buf, sizeof(buf), "%.17g", prior.values[u]);
    out << dataset.reviewer_name(static_cast<ReviewerId>(u)) << '\t' << buf
        << '\n';
  }
}

void write_groups(std::span<const CandidateGroup> groups,
                  const Dataset& dataset, std::ostream& out) {
  char buf[32];
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::snprintf(buf, sizeof(buf), "%.17g", groups[g].nt);
    out << g << '\t' << buf << '\t';
    for (std::size_t k = 0; k < groups[g].members.size(); ++k) {
      if (k) out << ',';
      out << dataset.reviewer_name(groups[g].members[k]);
    }
    out << '\n';
  }
}

}  // namespace coreview
