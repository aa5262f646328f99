#include "coreview/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "coreview/error.hpp"
#include "coreview/synthetic.hpp"
#include "test_util.hpp"

namespace coreview {
namespace {

namespace fs = std::filesystem;

Dataset labelled(const SyntheticData& data) {
  Dataset ds = Dataset::from_raw(data.reviews);
  ds.set_reviewer_labels(data.labels);
  return ds;
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.background_reviewers = 150;
  s.background_products = 60;
  s.campaigns = 2;
  s.campaign_size = 6;
  s.targets_per_campaign = 4;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("coreview_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Synthetic, DeterministicAndCounted) {
  const auto a = generate_synthetic({});
  const auto b = generate_synthetic({});
  ASSERT_EQ(a.reviews.size(), b.reviews.size());
  for (std::size_t i = 0; i < a.reviews.size(); ++i) {
    EXPECT_EQ(a.reviews[i].reviewer, b.reviews[i].reviewer);
    EXPECT_EQ(a.reviews[i].product, b.reviews[i].product);
    EXPECT_EQ(a.reviews[i].date, b.reviews[i].date);
  }
  EXPECT_EQ(a.reviews.size(), 1000u * 5 + 30 * 5);
  std::size_t spammers = 0;
  for (const auto& [id, l] : a.labels) spammers += l == ReviewerLabel::kSpammer;
  EXPECT_EQ(spammers, 30u);
  EXPECT_EQ(a.labels.size(), 1030u);

  SyntheticSpec other;
  other.seed = 8;
  EXPECT_NE(generate_synthetic(other).reviews[0].date, a.reviews[0].date);
}

TEST(Synthetic, ZeroWindowCampaignIsFullyCollusive) {
  SyntheticSpec s = small_spec();
  s.window_days = 0;
  const Dataset ds = labelled(generate_synthetic(s));
  const ReviewerId a = *ds.find_reviewer("u000150");
  const ReviewerId b = *ds.find_reviewer("u000151");
  EXPECT_EQ(pair_score(a, b, ds, {}).collusiveness, 1.0);
  EXPECT_EQ(pair_score(a, b, ds, {}).jaccard, 1.0);
}

TEST(Synthetic, RejectsBadSpec) {
  SyntheticSpec s;
  s.reviews_per_reviewer = 500;
  EXPECT_THROW(generate_synthetic(s), ConfigError);
  s = {};
  s.campaign_rating = 6;
  EXPECT_THROW(generate_synthetic(s), ConfigError);
}

TEST(Pipeline, NeutralPriorOnEdgelessGraph) {
  // Nobody shares a product: no edges, every belief is the 0.5 prior.
  const Dataset ds = testing::dataset_from_tsv(
      "c\tp1\t5\t2012-01-01\n"
      "a\tp2\t5\t2012-01-01\n"
      "b\tp3\t5\t2012-01-01\n");
  RunConfig cfg;
  cfg.prior_mode = PriorMode::kNeutral;
  const auto r = execute_pipeline(cfg, ds);
  EXPECT_EQ(r.graphs.primary.num_edges(), 0u);
  EXPECT_TRUE(r.inference.components.empty());
  ASSERT_EQ(r.ranking.size(), 3u);
  EXPECT_EQ(r.ranking[0].reviewer, "a");
  EXPECT_EQ(r.ranking[1].reviewer, "b");
  EXPECT_EQ(r.ranking[2].reviewer, "c");
  for (const auto& e : r.ranking) EXPECT_EQ(e.score, 0.5);
  EXPECT_TRUE(r.metrics.empty());
}

TEST(Pipeline, CampaignsRiseToTheTop) {
  const auto data = generate_synthetic(small_spec());
  const Dataset ds = labelled(data);
  RunConfig cfg;
  cfg.top_k = {12};
  const auto r = execute_pipeline(cfg, ds);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    hits += data.labels.at(r.ranking[i].reviewer) == ReviewerLabel::kSpammer;
  }
  EXPECT_GE(hits, 11u);
  ASSERT_EQ(r.metrics.size(), 1u);
  EXPECT_GE(r.metrics[0].second, 0.9);
  ASSERT_FALSE(r.ranked_groups.empty());
  for (auto m : r.ranked_groups.front().members) {
    EXPECT_EQ(ds.label_of(m), ReviewerLabel::kSpammer);
  }
  EXPECT_TRUE(r.inference.all_converged());
}

TEST(Pipeline, FilePriorMode) {
  const Dataset ds = testing::dataset_from_tsv(
      "a\tp1\t5\t2012-01-01\n"
      "b\tp1\t5\t2012-01-01\n"
      "c\tp2\t5\t2012-01-01\n");
  RunConfig cfg;
  cfg.prior_mode = PriorMode::kFile;
  cfg.prior_file = "prior.tsv";
  EXPECT_THROW(execute_pipeline(cfg, ds), StageError);

  PriorVector file{Eigen::Vector3d(0.9, 0.5, 0.2), PriorSource::kFile};
  const auto r = execute_pipeline(cfg, ds, &file);
  EXPECT_EQ(r.prior.source, PriorSource::kFile);
  EXPECT_EQ(r.ranking[0].reviewer, "a");
  EXPECT_GT(r.ranking[1].score, 0.5);  // b pulled up by a
  EXPECT_EQ(r.ranking[2].reviewer, "c");
  EXPECT_EQ(r.ranking[2].score, 0.2);
}

TEST(Pipeline, StageErrorsNameTheStage) {
  const Dataset ds = testing::dataset_from_tsv("a\tp1\t5\t2012-01-01\n");
  RunConfig cfg;
  cfg.prior_mode = PriorMode::kFile;
  cfg.prior_file = "prior.tsv";
  PriorVector wrong{Eigen::Vector2d(0.5, 0.5), PriorSource::kFile};
  try {
    execute_pipeline(cfg, ds, &wrong);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "priors");
  }
}

TEST(RunConfig, Validation) {
  RunConfig cfg;
  cfg.input = "x";
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.delta = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.delta_prime = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.co_review.sigma1 = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.top_k = {0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.prior_mode = PriorMode::kFile;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(parse_prior_mode("bogus"), ConfigError);
  EXPECT_EQ(parse_prior_mode(to_string(PriorMode::kAll)), PriorMode::kAll);
}

TEST(RunConfig, HashTracksResultAffectingFields) {
  RunConfig a, b;
  EXPECT_EQ(a.hash(), b.hash());
  b.output_dir = "elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
  b.delta = 0.7;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(RunPipeline, WritesArtifacts) {
  const fs::path dir = scratch("artifacts");
  const auto data = generate_synthetic(small_spec());
  {
    std::ofstream rv(dir / "reviews.tsv"), lb(dir / "labels.tsv");
    write_synthetic(data, rv, lb);
  }
  RunConfig cfg;
  cfg.input = (dir / "reviews.tsv").string();
  cfg.labels = (dir / "labels.tsv").string();
  cfg.top_k = {10, 20};
  cfg.output_dir = dir / "out";
  run_pipeline(cfg);

  const std::string header = "# coreview rank schema=1 config=" + cfg.hash();
  const std::string rankings = slurp(cfg.output_dir / "rankings.csv");
  EXPECT_EQ(rankings.rfind(header, 0), 0u);
  EXPECT_NE(rankings.find("rank,reviewer_id,spam_belief,prior,participated,label"),
            std::string::npos);
  EXPECT_EQ(slurp(cfg.output_dir / "groups.csv").rfind("# coreview rank-groups schema=1", 0), 0u);
  const std::string metrics = slurp(cfg.output_dir / "metrics.csv");
  EXPECT_NE(metrics.find("\nk,ndcg\n10,"), std::string::npos);
  EXPECT_NE(metrics.find("\n20,"), std::string::npos);
  EXPECT_TRUE(fs::exists(cfg.output_dir / "meta.txt"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "parse_report.txt"));

  std::ifstream in(cfg.output_dir / "rankings.csv");
  const RankedList back = read_rankings_csv(in);
  ASSERT_EQ(back.size(), 162u);
  for (std::size_t i = 1; i < back.size(); ++i) {
    EXPECT_GE(back[i - 1].score, back[i].score);
    EXPECT_EQ(back[i].rank, i + 1);
  }

  // Same input, byte-identical output.
  const std::string groups = slurp(cfg.output_dir / "groups.csv");
  run_pipeline(cfg);
  EXPECT_EQ(slurp(cfg.output_dir / "rankings.csv"), rankings);
  EXPECT_EQ(slurp(cfg.output_dir / "groups.csv"), groups);
  fs::remove_all(dir);
}

TEST(RunPipeline, FailureLeavesNoPartialOutput) {
  const fs::path dir = scratch("failure");
  {
    std::ofstream rv(dir / "reviews.tsv");
    rv << "a\tp1\t5\t2012-01-01\n";
    std::ofstream pf(dir / "prior.tsv");
    pf << "a\t1.7\n";
  }
  RunConfig cfg;
  cfg.input = (dir / "reviews.tsv").string();
  cfg.prior_mode = PriorMode::kFile;
  cfg.prior_file = (dir / "prior.tsv").string();
  cfg.output_dir = dir / "out";
  EXPECT_THROW(run_pipeline(cfg), Error);
  EXPECT_FALSE(fs::exists(cfg.output_dir / "rankings.csv"));
  EXPECT_FALSE(fs::exists(cfg.output_dir / "parse_report.txt"));
  fs::remove_all(dir);
}

TEST(RunPipeline, MissingInputFailsInParseStage) {
  RunConfig cfg;
  cfg.input = "/nonexistent/reviews.tsv";
  cfg.output_dir = scratch("missing") / "out";
  try {
    run_pipeline(cfg);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "parse");
    EXPECT_NE(std::string(e.what()).find("cannot open"), std::string::npos);
  }
  fs::remove_all(cfg.output_dir.parent_path());
}

}  // namespace
}  // namespace coreview
