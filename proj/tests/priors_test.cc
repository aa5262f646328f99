#include "coreview/priors.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "coreview/error.hpp"
#include "test_util.hpp"

namespace coreview {
namespace {

const CoReviewParams kPaper{90.0, 3.0};

ReviewerGraph graph_of(std::size_t n, std::vector<std::pair<int, int>> pairs,
                       double w = 1.0) {
  std::vector<WeightedEdge> edges;
  for (auto [u, v] : pairs) {
    edges.push_back({static_cast<ReviewerId>(u), static_cast<ReviewerId>(v), w});
  }
  return ReviewerGraph(n, GraphKind::kCompanion, 0.5, edges);
}

std::vector<std::pair<int, int>> clique(int first, int size) {
  std::vector<std::pair<int, int>> out;
  for (int a = first; a < first + size; ++a) {
    for (int b = a + 1; b < first + size; ++b) out.emplace_back(a, b);
  }
  return out;
}

TEST(ReviewFeatures, SingleReviewProduct) {
  const auto ds = testing::dataset_from_tsv(
      "u1\tp1\t5\t2012-06-01\n"
      "u2\tp2\t3\t2012-06-01\n"
      "u2\tp3\t3\t2012-06-01\n");
  const auto rows = compute_review_features(ds);
  const auto& r = rows[0];  // u1 on p1
  EXPECT_EQ(r.rank, 1);
  EXPECT_EQ(r.rd, 0.0);
  EXPECT_EQ(r.ext, 1);
  EXPECT_EQ(r.dev, 0);
  EXPECT_EQ(r.etf, 1.0);
  EXPECT_EQ(r.isr, 1);
  EXPECT_EQ(rows[1].isr, 0);
  EXPECT_EQ(rows[1].ext, 0);
}

TEST(ReviewFeatures, DeviationRankAndEarliness) {
  // Mean rating on p1 is (5 + 5 + 5 + 1) / 4 = 4.
  const auto ds = testing::dataset_from_tsv(
      "a\tp1\t5\t2012-01-01\n"
      "b\tp1\t5\t2012-05-01\n"  // 121 days after a
      "c\tp1\t5\t2012-01-01\n"
      "d\tp1\t1\t2013-01-01\n");
  const auto rows = compute_review_features(ds, {240, 0.63});
  EXPECT_EQ(rows[0].rank, 1);
  EXPECT_EQ(rows[2].rank, 2);  // same day as a, later id
  EXPECT_EQ(rows[1].rank, 3);
  EXPECT_EQ(rows[3].rank, 4);
  EXPECT_DOUBLE_EQ(rows[3].rd, 3.0);
  EXPECT_EQ(rows[3].dev, 1);  // 3/4 = 0.75 > 0.63
  EXPECT_DOUBLE_EQ(rows[1].etf, 1.0 - 121.0 / 240.0);
  EXPECT_EQ(rows[3].etf, 0.0);
}

TEST(ReviewFeatures, HalfWindowAndNearMaximalDeviation) {
  std::string tsv = "a\tq\t5\t2012-01-01\nb\tq\t5\t2012-04-30\n";
  // One 1-star review among 99 five-star ones: mean 4.96, rd 3.96.
  tsv += "low\tp\t1\t2012-01-01\n";
  for (int i = 0; i < 99; ++i) {
    tsv += "f" + std::to_string(100 + i) + "\tp\t5\t2012-01-02\n";
  }
  const auto ds = testing::dataset_from_tsv(tsv);
  const auto rows = compute_review_features(ds, {240, 0.63});
  EXPECT_DOUBLE_EQ(rows[1].etf, 0.5);  // 120 of 240 days elapsed
  EXPECT_NEAR(rows[2].rd, 3.96, 1e-12);
  EXPECT_EQ(rows[2].dev, 1);
  EXPECT_EQ(rows[3].dev, 0);
  for (const auto& r : rows) EXPECT_LE(r.rd, 4.0);
}

TEST(EcdfNormalize, SpotValues) {
  const std::vector<double> same{2.0, 2.0, 2.0};
  EXPECT_TRUE(ecdf_normalize(same, Suspicion::kHighIsSuspicious).isZero());

  const std::vector<double> v{1, 2, 3, 4};
  const auto high = ecdf_normalize(v, Suspicion::kHighIsSuspicious);
  EXPECT_EQ(high[3], 0.0);
  EXPECT_EQ(high[0], 0.75);
  const auto low = ecdf_normalize(v, Suspicion::kLowIsSuspicious);
  EXPECT_EQ(low[0], 0.25);
  EXPECT_EQ(low[3], 1.0);
}

TEST(EcdfNormalize, BoundedAndOrientedProperty) {
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> val(0, 20), len(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v) x = val(rng);
    const auto hi = ecdf_normalize(v, Suspicion::kHighIsSuspicious);
    const auto lo = ecdf_normalize(v, Suspicion::kLowIsSuspicious);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      EXPECT_GE(hi[ii], 0.0);
      EXPECT_LE(hi[ii], 1.0);
      EXPECT_GT(lo[ii], 0.0);
      EXPECT_LE(lo[ii], 1.0);
      for (std::size_t j = 0; j < v.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (v[i] < v[j]) {
          EXPECT_GE(hi[ii], hi[jj]);
          EXPECT_LE(lo[ii], lo[jj]);
        }
      }
    }
  }
}

TEST(CombinePrior, SpotValuesAndMonotonicity) {
  EXPECT_EQ(combine_prior(Eigen::VectorXd::Zero(6)), 1.0);
  EXPECT_EQ(combine_prior(Eigen::VectorXd::Ones(6)), 0.0);
  EXPECT_NEAR(combine_prior(Eigen::Vector2d(0.6, 0.8)), 0.29289321881345248,
              1e-15);

  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd f(6);
    for (auto& x : f) x = u(rng);
    const double s = combine_prior(f);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    Eigen::VectorXd g = f;
    g[trial % 6] *= u(rng);
    EXPECT_GE(combine_prior(g), s - 1e-15);
  }
}

TEST(ReviewerPriorAll, MaxOverReviews) {
  const auto ds = testing::dataset_from_tsv(
      "a\tp1\t5\t2012-01-01\n"
      "a\tp2\t5\t2012-01-01\n"
      "a\tp3\t5\t2012-01-01\n"
      "b\tp1\t5\t2012-01-01\n");
  Eigen::VectorXd review(4);
  review << 0.2, 0.9, 0.4, 0.3;
  const auto prior = reviewer_prior_all(ds, review);
  EXPECT_EQ(prior.source, PriorSource::kAll);
  EXPECT_EQ(prior.values[0], 0.9);
  EXPECT_EQ(prior.values[1], 0.3);
}

TEST(ReviewerPriorAll, MatchesReviewByReviewRewalk) {
  const auto raw = testing::random_raw_reviews(21, 90, 18);
  const auto ds = Dataset::from_raw(raw);
  const auto features = compute_review_features(ds);
  const auto review = review_priors_all(ds, features);
  const auto prior = reviewer_prior_all(ds, review);
  ASSERT_EQ(static_cast<std::size_t>(prior.values.size()), ds.num_reviewers());

  // Independent walk over the review list, not the per-reviewer index.
  std::vector<double> best(ds.num_reviewers(), -1.0);
  for (std::size_t i = 0; i < ds.num_reviews(); ++i) {
    auto& b = best[ds.review(static_cast<ReviewIndex>(i)).reviewer];
    b = std::max(b, review[static_cast<Eigen::Index>(i)]);
  }
  for (std::size_t u = 0; u < best.size(); ++u) {
    EXPECT_EQ(prior.values[static_cast<Eigen::Index>(u)], best[u]);
    EXPECT_GE(best[u], 0.0);
    EXPECT_LE(best[u], 1.0);
  }
}

TEST(ScanCluster, DisjointCliques) {
  auto pairs = clique(0, 4);
  const auto second = clique(4, 4);
  pairs.insert(pairs.end(), second.begin(), second.end());
  const auto result = scan_cluster(graph_of(8, pairs), {0.6, 3});
  ASSERT_EQ(result.groups.size(), 2u);
  EXPECT_EQ(result.groups[0].members, (std::vector<ReviewerId>{0, 1, 2, 3}));
  EXPECT_EQ(result.groups[1].members, (std::vector<ReviewerId>{4, 5, 6, 7}));
}

TEST(ScanCluster, BridgeNodeIsHub) {
  // Cliques {0..3} and {5..8}; node 4 touches 0 and 5 only.
  // sim(0, 4) = |{0,4}| / sqrt(5 * 3) = 0.516 < 0.6, so 4 is never reached.
  auto pairs = clique(0, 4);
  const auto second = clique(5, 4);
  pairs.insert(pairs.end(), second.begin(), second.end());
  pairs.emplace_back(0, 4);
  pairs.emplace_back(4, 5);
  const auto result = scan_cluster(graph_of(9, pairs), {0.6, 3});
  ASSERT_EQ(result.groups.size(), 2u);
  EXPECT_EQ(result.groups[0].members, (std::vector<ReviewerId>{0, 1, 2, 3}));
  EXPECT_EQ(result.groups[1].members, (std::vector<ReviewerId>{5, 6, 7, 8}));
  EXPECT_EQ(result.hubs, (std::vector<ReviewerId>{4}));
  EXPECT_TRUE(result.outliers.empty());
}

TEST(ScanCluster, EdgelessAndPairs) {
  EXPECT_TRUE(scan_cluster(graph_of(5, {}), {0.6, 2}).groups.empty());
  const auto pair = scan_cluster(graph_of(3, {{0, 2}}), {0.6, 2});
  ASSERT_EQ(pair.groups.size(), 1u);
  EXPECT_EQ(pair.groups[0].members, (std::vector<ReviewerId>{0, 2}));
}

TEST(ScanCluster, OutputIsDisjointProperty) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 30;
    std::bernoulli_distribution coin(0.15);
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (coin(rng)) pairs.emplace_back(a, b);
      }
    }
    const auto result = scan_cluster(graph_of(n, pairs), {0.5, 2});
    std::vector<int> seen(n, 0);
    for (const auto& g : result.groups) {
      EXPECT_GE(g.members.size(), 2u);
      for (ReviewerId u : g.members) ++seen[u];
    }
    for (ReviewerId u : result.hubs) ++seen[u];
    for (ReviewerId u : result.outliers) ++seen[u];
    for (int u = 0; u < n; ++u) EXPECT_LE(seen[u], 1) << "node " << u;
  }
}

TEST(ScanParams, Validation) {
  EXPECT_THROW((ScanParams{0.0, 2}.validate()), ConfigError);
  EXPECT_THROW((ScanParams{0.5, 1}.validate()), ConfigError);
}

TEST(NeighborTightness, SpotValues) {
  const std::vector<double> one{1.0};
  EXPECT_EQ(neighbor_tightness(one, 2), 0.5);
  const std::vector<double> six(6, 0.8);
  EXPECT_NEAR(neighbor_tightness(six, 4), 0.70463766238230599, 1e-12);
}

TEST(NeighborTightness, BoundedAndMonotoneProperty) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 30);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = static_cast<std::size_t>(size(rng));
    std::vector<double> scores(g * (g - 1) / 2);
    for (auto& s : scores) s = u(rng);
    const double nt = neighbor_tightness(scores, g);
    EXPECT_GE(nt, 0.0);
    EXPECT_LT(nt, 1.0);
    auto bumped = scores;
    auto& slot = bumped[static_cast<std::size_t>(trial) % bumped.size()];
    slot = slot + (1.0 - slot) * u(rng);
    EXPECT_GE(neighbor_tightness(bumped, g), nt);
  }
}

TEST(NtPrior, AssignsGroupScoreAndFallback) {
  // a, b, c review the same product on the same day; companion keeps only
  // the a-b edge so the a-c and b-c scores must be recomputed, not zeroed.
  const auto ds = testing::dataset_from_tsv(
      "a\tp\t5\t2012-01-01\n"
      "b\tp\t5\t2012-01-01\n"
      "c\tp\t5\t2012-01-01\n"
      "c\tq\t5\t2012-01-01\n"
      "d\tr\t5\t2012-01-01\n");
  const std::vector<WeightedEdge> edges{{0, 1, 1.0}};
  const ReviewerGraph companion(4, GraphKind::kCompanion, 0.6, edges);
  std::vector<CandidateGroup> groups{{{0, 1, 2}, 0.0, {}}};
  const auto nt = nt_prior(groups, companion, ds, kPaper, 0.5);
  // Pair scores 1, 0.5, 0.5 (c has Jaccard 1/2 with a and b).
  const double want = (1.0 + 0.5 + 0.5) / 3.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(nt.groups[0].nt, want, 1e-15);
  EXPECT_EQ(nt.prior.values[0], nt.groups[0].nt);
  EXPECT_EQ(nt.prior.values[2], nt.groups[0].nt);
  EXPECT_EQ(nt.prior.values[3], 0.5);
  EXPECT_EQ(nt.prior.source, PriorSource::kNt);
}

TEST(NtPrior, OverlappingGroupsTakeMax) {
  const auto ds = testing::dataset_from_tsv(
      "a\tp\t5\t2012-01-01\n"
      "b\tp\t5\t2012-01-01\n"
      "c\tp\t5\t2012-03-01\n");
  const ReviewerGraph companion(3, GraphKind::kCompanion, 0.1,
                                std::vector<WeightedEdge>{});
  std::vector<CandidateGroup> groups{{{0, 1}, 0.0, {}}, {{1, 2}, 0.0, {}}};
  const auto nt = nt_prior(groups, companion, ds, kPaper);
  EXPECT_EQ(nt.groups[0].nt, 0.5);
  EXPECT_LT(nt.groups[1].nt, 0.5);
  EXPECT_EQ(nt.prior.values[1], 0.5);
  EXPECT_EQ(nt.prior.values[2], nt.groups[1].nt);
}

TEST(PriorFiles, LoadAndWrite) {
  const auto ds = testing::dataset_from_tsv(
      "a\tp\t5\t2012-01-01\nb\tp\t5\t2012-01-01\nc\tp\t5\t2012-01-01\n");
  std::istringstream in("a\t0.9\nzz\t0.1\nc\t0\n");
  const auto loaded = load_prior_file(in, ds, 0.5);
  EXPECT_EQ(loaded.prior.source, PriorSource::kFile);
  EXPECT_EQ(loaded.prior.values[0], 0.9);
  EXPECT_EQ(loaded.prior.values[1], 0.5);
  EXPECT_EQ(loaded.prior.values[2], 0.0);
  EXPECT_EQ(loaded.unknown_reviewers, 1u);
  EXPECT_EQ(loaded.missing_reviewers, 1u);

  std::ostringstream out;
  write_priors(loaded.prior, ds, out);
  EXPECT_EQ(out.str(), "a\t0.90000000000000002\nb\t0.5\nc\t0\n");

  std::istringstream bad("a\t1.5\n");
  EXPECT_THROW(load_prior_file(bad, ds), ConfigError);
  std::istringstream junk("a 0.4\n");
  EXPECT_THROW(load_prior_file(junk, ds), ConfigError);
}

TEST(PriorFiles, GroupsDump) {
  const auto ds = testing::dataset_from_tsv(
      "a\tp\t5\t2012-01-01\nb\tp\t5\t2012-01-01\nc\tp\t5\t2012-01-01\n");
  const std::vector<CandidateGroup> groups{{{0, 2}, 0.5, {}}};
  std::ostringstream out;
  write_groups(groups, ds, out);
  EXPECT_EQ(out.str(), "0\t0.5\ta,c\n");
}

}  // namespace
}  // namespace coreview
