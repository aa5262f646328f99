// coreview: co-review graph spam detection from the command line.
//
//   coreview run    --input reviews.tsv [--labels labels.tsv] --out DIR
//   coreview graph  --input reviews.tsv --out DIR
//   coreview priors --input reviews.tsv --prior-mode all --out DIR
//   coreview eval   --ranking DIR/rankings.csv --labels labels.tsv
//   coreview synth  --out DIR [--seed N ...]
//
// Every option may also be given in a "key = value" file via --config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coreview/error.hpp"
#include "coreview/pipeline.hpp"
#include "coreview/synthetic.hpp"

namespace {

using namespace coreview;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void print_parse_summary(const ParseReport& report) {
  std::cerr << "parsed " << report.lines_read << " lines: " << report.retained
            << " retained, " << report.rejected.size() << " rejected, "
            << report.duplicates << " duplicates\n";
}

int cmd_graph(const RunConfig& config) {
  config.validate();
  auto inputs = load_inputs(config);
  const auto& ds = inputs.parsed.dataset;
  print_parse_summary(inputs.parsed.report);
  const auto graphs = build_graphs(ds, config.co_review, config.delta,
                                   config.delta_prime, config.per_product_cap);
  for (const auto& w : graphs.warnings) std::cerr << "warning: " << w << '\n';
  std::filesystem::create_directories(config.output_dir);
  auto primary = open_out(config.output_dir / "graph_primary.tsv");
  write_graph(graphs.primary, ds, primary);
  auto companion = open_out(config.output_dir / "graph_companion.tsv");
  write_graph(graphs.companion, ds, companion);
  std::cerr << "primary edges: " << graphs.primary.num_edges()
            << ", companion edges: " << graphs.companion.num_edges() << '\n';
  return 0;
}

int cmd_priors(const RunConfig& config) {
  config.validate();
  auto inputs = load_inputs(config);
  const auto& ds = inputs.parsed.dataset;
  print_parse_summary(inputs.parsed.report);
  const auto graphs = build_graphs(ds, config.co_review, config.delta,
                                   config.delta_prime, config.per_product_cap);
  const auto stage = compute_priors(
      config, ds, graphs, inputs.file_prior ? &*inputs.file_prior : nullptr);
  std::filesystem::create_directories(config.output_dir);
  auto priors = open_out(config.output_dir / "priors.tsv");
  write_priors(stage.prior, ds, priors);
  auto groups = open_out(config.output_dir / "groups.tsv");
  write_groups(stage.groups, ds, groups);
  std::cerr << stage.groups.size() << " candidate groups, prior source "
            << to_string(stage.prior.source) << '\n';
  return 0;
}

int cmd_run(const RunConfig& config) {
  const auto result = run_pipeline(config);
  std::size_t converged = 0;
  for (const auto& c : result.inference.components) converged += c.converged;
  std::cerr << "ranked " << result.ranking.size() << " reviewers, "
            << result.ranked_groups.size() << " groups; "
            << converged << "/" << result.inference.components.size()
            << " components converged\n";
  for (const auto& [k, v] : result.metrics) {
    std::cerr << "NDCG@" << k << " = " << v << '\n';
  }
  return 0;
}

struct EvalArgs {
  std::string ranking;
  std::string compare;
  std::size_t compare_k = 0;
};

int cmd_eval(const RunConfig& config, const EvalArgs& args) {
  std::ifstream rf(args.ranking);
  if (!rf) throw IoError("cannot open ranking: " + args.ranking);
  const auto ranking = read_rankings_csv(rf);

  if (!args.compare.empty()) {
    std::ifstream cf(args.compare);
    if (!cf) throw IoError("cannot open ranking: " + args.compare);
    const auto other = read_rankings_csv(cf);
    const std::size_t k = args.compare_k ? args.compare_k
                                         : std::min(ranking.size(), other.size());
    const auto a = top_k(ranking, k);
    const auto b = top_k(other, k);
    std::cout << "k,overlap_degree,similarity_degree\n"
              << k << ',' << overlap_degree(a, b) << ','
              << similarity_degree(a, b) << '\n';
    return 0;
  }

  if (!config.labels) throw ConfigError("eval needs --labels or --compare");
  const auto labels = load_reviewer_labels_file(*config.labels);
  if (labels.labels.empty()) {
    std::cerr << "label file is empty; nothing to evaluate\n";
    return 0;
  }
  std::vector<std::pair<std::size_t, double>> metrics;
  for (std::size_t k : config.top_k) {
    metrics.emplace_back(k, ndcg_at_k(ranking, labels.labels, k));
  }
  std::filesystem::create_directories(config.output_dir);
  auto out = open_out(config.output_dir / "metrics.csv");
  write_metrics_csv(out, config, metrics);
  write_metrics_csv(std::cout, config, metrics);
  return 0;
}

int cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  const auto data = generate_synthetic(spec);
  std::filesystem::create_directories(dir);
  auto reviews = open_out(dir / "reviews.tsv");
  auto labels = open_out(dir / "labels.tsv");
  write_synthetic(data, reviews, labels);
  std::cerr << "wrote " << data.reviews.size() << " reviews to "
            << (dir / "reviews.tsv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collusive review spammer detection on co-review graphs"};
  app.set_config("--config", "", "Read options from a key = value file");
  app.require_subcommand(1);

  RunConfig config;
  std::string output_dir = "out";
  std::string prior_mode = "nt";
  std::string format = "auto";
  std::optional<std::string> labels, prior_file;
  std::optional<std::size_t> cap;

  app.add_option("--input", config.input, "Review metadata (TSV)");
  app.add_option("--labels", labels, "Reviewer label file (TSV)");
  app.add_option("--format", format, "Input format")
      ->check(CLI::IsMember({"auto", "four", "five"}));
  app.add_option("--prior-mode", prior_mode, "Node prior")
      ->check(CLI::IsMember({"nt", "all", "file", "neutral"}));
  app.add_option("--prior-file", prior_file, "Foreign prior (reviewer TAB prior)");
  app.add_option("--delta", config.delta, "Reviewer graph threshold")
      ->capture_default_str();
  app.add_option("--delta-prime", config.delta_prime,
                 "Companion graph threshold")
      ->capture_default_str();
  app.add_option("--sigma1", config.co_review.sigma1, "Time spread (days)")
      ->capture_default_str();
  app.add_option("--sigma2", config.co_review.sigma2, "Rating spread (stars)")
      ->capture_default_str();
  app.add_option("--scan-epsilon", config.scan.epsilon)->capture_default_str();
  app.add_option("--scan-mu", config.scan.mu)->capture_default_str();
  app.add_option("--conv-tol", config.lbp.conv_tol)->capture_default_str();
  app.add_option("--max-iters", config.lbp.max_iters)->capture_default_str();
  app.add_option("--damping", config.lbp.damping)->capture_default_str();
  app.add_option("--threads", config.lbp.threads, "LBP worker threads (0 = all)");
  app.add_option("--etf-window-days", config.features.etf_window_days)
      ->capture_default_str();
  app.add_option("--dev-threshold", config.features.dev_threshold)
      ->capture_default_str();
  app.add_option("--nt-fallback", config.nt_fallback,
                 "Prior for reviewers outside candidate groups")
      ->capture_default_str();
  app.add_option("--per-product-cap", cap, "Max reviews paired per product");
  app.add_option("--top-k", config.top_k, "NDCG cutoffs")->delimiter(',');
  app.add_option("--out", output_dir, "Output directory")->capture_default_str();

  SyntheticSpec synth;
  EvalArgs eval;

  auto* run = app.add_subcommand("run", "Full pipeline")->fallthrough();
  auto* graph = app.add_subcommand("graph", "Build and dump both graphs")->fallthrough();
  auto* priors = app.add_subcommand("priors", "Compute and dump priors and groups")->fallthrough();
  auto* evalc = app.add_subcommand("eval", "Metrics for an existing ranking")->fallthrough();
  evalc->add_option("--ranking", eval.ranking, "rankings.csv")->required();
  evalc->add_option("--compare", eval.compare, "Second rankings.csv");
  evalc->add_option("--compare-k", eval.compare_k, "Prefix length to compare");
  auto* synthc = app.add_subcommand("synth", "Generate a synthetic dataset")->fallthrough();
  synthc->add_option("--background-reviewers", synth.background_reviewers)->capture_default_str();
  synthc->add_option("--background-products", synth.background_products)->capture_default_str();
  synthc->add_option("--reviews-per-reviewer", synth.reviews_per_reviewer)->capture_default_str();
  synthc->add_option("--campaigns", synth.campaigns)->capture_default_str();
  synthc->add_option("--campaign-size", synth.campaign_size)->capture_default_str();
  synthc->add_option("--targets-per-campaign", synth.targets_per_campaign)->capture_default_str();
  synthc->add_option("--window-days", synth.window_days)->capture_default_str();
  synthc->add_option("--campaign-rating", synth.campaign_rating)->capture_default_str();
  synthc->add_option("--seed", synth.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    config.labels = labels;
    config.prior_file = prior_file;
    config.per_product_cap = cap;
    config.output_dir = output_dir;
    config.prior_mode = parse_prior_mode(prior_mode);
    config.format = format == "four"   ? InputFormat::kFourColumn
                    : format == "five" ? InputFormat::kFiveColumn
                                       : InputFormat::kAuto;
    const bool needs_input = run->parsed() || graph->parsed() || priors->parsed();
    if (needs_input && config.input.empty()) {
      throw ConfigError("--input is required");
    }
    if (run->parsed()) return cmd_run(config);
    if (graph->parsed()) return cmd_graph(config);
    if (priors->parsed()) return cmd_priors(config);
    if (evalc->parsed()) return cmd_eval(config, eval);
    if (synthc->parsed()) return cmd_synth(synth, config.output_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
