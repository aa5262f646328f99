#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coreview/mrf.hpp"
#include "coreview/priors.hpp"
#include "coreview/ranking.hpp"
#include "coreview/review_data.hpp"
#include "coreview/reviewer_graph.hpp"

namespace coreview {

inline constexpr int kSchemaVersion = 1;

enum class PriorMode { kNt, kAll, kFile, kNeutral };

std::string to_string(PriorMode mode);
PriorMode parse_prior_mode(const std::string& text);

struct RunConfig {
  std::string input;
  std::optional<std::string> labels;
  InputFormat format = InputFormat::kAuto;
  PriorMode prior_mode = PriorMode::kNt;
  std::optional<std::string> prior_file;
  double delta = 0.6;
  double delta_prime = 0.5;
  CoReviewParams co_review;
  ScanParams scan;
  LbpOptions lbp;
  FeatureConfig features;
  double nt_fallback = 0.5;
  std::optional<std::size_t> per_product_cap;
  std::vector<std::size_t> top_k = default_top_k();
  std::filesystem::path output_dir = "out";

  static std::vector<std::size_t> default_top_k();

  void validate() const;
  // Canonical "key = value" rendering of every field that affects results.
  std::string canonical() const;
  std::string hash() const;
};

// A failure inside one pipeline stage, prefixed with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  GraphPair graphs;
  PriorVector prior;
  std::vector<CandidateGroup> groups;  // SCAN order, nt filled
  LbpResult<double> inference;
  RankedList ranking;
  std::vector<CandidateGroup> ranked_groups;
  std::vector<std::pair<std::size_t, double>> metrics;  // (k, ndcg)
  std::vector<StageTiming> timings;
};

// Graph construction, priors, inference, ranking and (when the dataset has
// reviewer labels with at least one spammer) NDCG over config.top_k.
// `file_prior` is required when config.prior_mode is kFile.
PipelineResult execute_pipeline(const RunConfig& config, const Dataset& dataset,
                                const PriorVector* file_prior = nullptr);

// Prior for any mode except kFile, given graphs already built.
struct PriorStage {
  PriorVector prior;
  std::vector<CandidateGroup> groups;
};
PriorStage compute_priors(const RunConfig& config, const Dataset& dataset,
                          const GraphPair& graphs,
                          const PriorVector* file_prior = nullptr);

// Loads inputs, executes the pipeline and writes rankings.csv, groups.csv,
// metrics.csv (when labels exist), meta.txt and parse_report.txt into
// config.output_dir. Files written before a failure are removed.
PipelineResult run_pipeline(const RunConfig& config);

// Loads the review file plus optional label and prior files named in config.
struct LoadedInputs {
  ParsedDataset parsed;
  std::optional<PriorVector> file_prior;
  std::vector<std::string> notes;
};
LoadedInputs load_inputs(const RunConfig& config);

// Artifact writers. Every file starts with a "# " header naming the stage,
// schema version and config hash.
std::string artifact_header(const std::string& stage, const RunConfig& config);
void write_rankings_csv(std::ostream& out, const RunConfig& config,
                        const Dataset& dataset, const PipelineResult& result);
void write_groups_csv(std::ostream& out, const RunConfig& config,
                      const Dataset& dataset, const PipelineResult& result);
void write_metrics_csv(std::ostream& out, const RunConfig& config,
                       std::span<const std::pair<std::size_t, double>> metrics);
void write_meta(std::ostream& out, const RunConfig& config,
                const Dataset& dataset, const PipelineResult& result);

// Reads the reviewer_id and spam_belief columns of a rankings.csv back into
// a ranked list.
RankedList read_rankings_csv(std::istream& in);

}  // namespace coreview
