#include "coreview/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "coreview/error.hpp"

namespace coreview {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12f", v);
  return buf;
}

// Runs `body`, rethrowing failures as StageError.
template <typename F>
auto in_stage(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

template <typename F>
auto timed_stage(std::vector<StageTiming>& timings, const std::string& stage,
                 F&& body) {
  const auto start = std::chrono::steady_clock::now();
  struct Record {
    std::vector<StageTiming>& timings;
    const std::string& stage;
    std::chrono::steady_clock::time_point start;
    ~Record() {
      timings.push_back({stage, std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - start)
                                    .count()});
    }
  } record{timings, stage, start};
  return in_stage(stage, std::forward<F>(body));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string to_string(PriorMode mode) {
  switch (mode) {
    case PriorMode::kNt: return "nt";
    case PriorMode::kAll: return "all";
    case PriorMode::kFile: return "file";
    case PriorMode::kNeutral: return "neutral";
  }
  return "unknown";
}

PriorMode parse_prior_mode(const std::string& text) {
  if (text == "nt") return PriorMode::kNt;
  if (text == "all") return PriorMode::kAll;
  if (text == "file") return PriorMode::kFile;
  if (text == "neutral") return PriorMode::kNeutral;
  throw ConfigError("unknown prior mode: " + text);
}

std::vector<std::size_t> RunConfig::default_top_k() {
  std::vector<std::size_t> ks;
  for (std::size_t k = 100; k <= 2000; k += 100) ks.push_back(k);
  return ks;
}

void RunConfig::validate() const {
  co_review.validate();
  scan.validate();
  lbp.validate();
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in (0, 1]");
  if (!(delta_prime > 0.0 && delta_prime <= 1.0)) {
    throw ConfigError("delta_prime must lie in (0, 1]");
  }
  if (!(nt_fallback >= 0.0 && nt_fallback <= 1.0)) {
    throw ConfigError("nt_fallback must lie in [0, 1]");
  }
  if (prior_mode == PriorMode::kFile && !prior_file) {
    throw ConfigError("prior mode 'file' needs a prior file");
  }
  for (std::size_t k : top_k) {
    if (k == 0) throw ConfigError("top-k values must be at least 1");
  }
  if (features.etf_window_days <= 0) {
    throw ConfigError("etf window must be positive");
  }
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  out << "input = " << input << '\n'
      << "labels = " << labels.value_or("") << '\n'
      << "prior_mode = " << to_string(prior_mode) << '\n'
      << "prior_file = " << prior_file.value_or("") << '\n'
      << "delta = " << fmt_double(delta) << '\n'
      << "delta_prime = " << fmt_double(delta_prime) << '\n'
      << "sigma1 = " << fmt_double(co_review.sigma1) << '\n'
      << "sigma2 = " << fmt_double(co_review.sigma2) << '\n'
      << "scan_epsilon = " << fmt_double(scan.epsilon) << '\n'
      << "scan_mu = " << scan.mu << '\n'
      << "conv_tol = " << fmt_double(lbp.conv_tol) << '\n'
      << "max_iters = " << lbp.max_iters << '\n'
      << "damping = " << fmt_double(lbp.damping) << '\n'
      << "etf_window_days = " << features.etf_window_days << '\n'
      << "dev_threshold = " << fmt_double(features.dev_threshold) << '\n'
      << "nt_fallback = " << fmt_double(nt_fallback) << '\n'
      << "per_product_cap = "
      << (per_product_cap ? std::to_string(*per_product_cap) : "") << '\n'
      << "top_k =";
  for (std::size_t k : top_k) out << ' ' << k;
  out << '\n';
  return out.str();
}

std::string RunConfig::hash() const {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016zx", std::hash<std::string>{}(canonical()));
  return buf;
}

PriorStage compute_priors(const RunConfig& config, const Dataset& dataset,
                          const GraphPair& graphs,
                          const PriorVector* file_prior) {
  // Candidate groups come from the companion graph whatever prior feeds the
  // MRF, so groups can always be ranked.
  auto scan = scan_cluster(graphs.companion, config.scan);
  auto nt = nt_prior(std::move(scan.groups), graphs.companion, dataset,
                     config.co_review, config.nt_fallback);
  PriorStage out;
  out.groups = std::move(nt.groups);
  switch (config.prior_mode) {
    case PriorMode::kNt:
      out.prior = std::move(nt.prior);
      break;
    case PriorMode::kAll:
      out.prior = prior_all(dataset, config.features);
      break;
    case PriorMode::kFile:
      if (!file_prior) throw ConfigError("prior mode 'file' without a loaded prior");
      if (static_cast<std::size_t>(file_prior->values.size()) != dataset.num_reviewers()) {
        throw ConfigError("file prior covers " +
                          std::to_string(file_prior->values.size()) + " of " +
                          std::to_string(dataset.num_reviewers()) + " reviewers");
      }
      out.prior = *file_prior;
      break;
    case PriorMode::kNeutral:
      out.prior = neutral_prior(dataset.num_reviewers());
      break;
  }
  return out;
}

PipelineResult execute_pipeline(const RunConfig& config, const Dataset& dataset,
                                const PriorVector* file_prior) {
  in_stage("config", [&] { config.validate(); });
  PipelineResult r;
  r.graphs = timed_stage(r.timings, "graph", [&] {
    return build_graphs(dataset, config.co_review, config.delta,
                        config.delta_prime, config.per_product_cap);
  });
  auto priors = timed_stage(r.timings, "priors", [&] {
    return compute_priors(config, dataset, r.graphs, file_prior);
  });
  r.prior = std::move(priors.prior);
  r.groups = std::move(priors.groups);
  r.inference = timed_stage(r.timings, "inference", [&] {
    return lbp_run(r.graphs.primary,
                   NodePotentials<double>::from_prior(r.prior), config.lbp);
  });
  timed_stage(r.timings, "rank", [&] {
    const Eigen::VectorXd spam = r.inference.beliefs.spam_scores();
    r.ranking = rank_reviewers(dataset, spam);
    r.ranked_groups = rank_groups(r.groups, spam);
  });
  timed_stage(r.timings, "eval", [&] {
    const auto& labels = dataset.reviewer_labels();
    const bool any_spammer =
        std::any_of(labels.begin(), labels.end(), [](const auto& kv) {
          return kv.second == ReviewerLabel::kSpammer;
        });
    if (!any_spammer) return;
    for (std::size_t k : config.top_k) {
      r.metrics.emplace_back(k, ndcg_at_k(r.ranking, labels, k));
    }
  });
  return r;
}

LoadedInputs load_inputs(const RunConfig& config) {
  LoadedInputs in;
  in.parsed = in_stage("parse", [&] {
    return parse_reviews_file(config.input, config.format);
  });
  if (config.labels) {
    auto labels = in_stage("labels", [&] {
      return load_reviewer_labels_file(*config.labels);
    });
    for (const auto& rej : labels.rejected) {
      in.notes.push_back("label line " + std::to_string(rej.line_number) +
                         " rejected: " + rej.reason);
    }
    in.parsed.dataset.set_reviewer_labels(std::move(labels.labels));
  }
  if (config.prior_mode == PriorMode::kFile) {
    auto loaded = in_stage("prior-file", [&] {
      if (!config.prior_file) throw ConfigError("no prior file given");
      std::ifstream f(*config.prior_file);
      if (!f) throw IoError("cannot open prior file: " + *config.prior_file);
      return load_prior_file(f, in.parsed.dataset, config.nt_fallback);
    });
    if (loaded.unknown_reviewers) {
      in.notes.push_back(std::to_string(loaded.unknown_reviewers) +
                         " prior lines name unknown reviewers");
    }
    if (loaded.missing_reviewers) {
      in.notes.push_back(std::to_string(loaded.missing_reviewers) +
                         " reviewers without a prior use the fallback");
    }
    in.file_prior = std::move(loaded.prior);
  }
  return in;
}

std::string artifact_header(const std::string& stage, const RunConfig& config) {
  return "# coreview " + stage + " schema=" + std::to_string(kSchemaVersion) +
         " config=" + config.hash() + "\n";
}

void write_rankings_csv(std::ostream& out, const RunConfig& config,
                        const Dataset& dataset, const PipelineResult& result) {
  out << artifact_header("rank", config);
  out << "rank,reviewer_id,spam_belief,prior,participated,label\n";
  for (const auto& e : result.ranking) {
    const auto id = *dataset.find_reviewer(e.reviewer);
    const auto label = dataset.label_of(id);
    out << e.rank << ',' << e.reviewer << ',' << fmt_score(e.score) << ','
        << fmt_score(result.prior.values[static_cast<Eigen::Index>(id)]) << ','
        << (result.inference.beliefs.participated[id] ? 1 : 0) << ','
        << (label ? (*label == ReviewerLabel::kSpammer ? "spammer" : "benign")
                  : "")
        << '\n';
  }
}

void write_groups_csv(std::ostream& out, const RunConfig& config,
                      const Dataset& dataset, const PipelineResult& result) {
  out << artifact_header("rank-groups", config);
  out << "group_rank,group_id,size,nt,posterior,members\n";
  // group_id is the position in SCAN output order.
  std::map<ReviewerId, std::size_t> id_of;
  for (std::size_t g = 0; g < result.groups.size(); ++g) {
    id_of[result.groups[g].members.front()] = g;
  }
  for (std::size_t r = 0; r < result.ranked_groups.size(); ++r) {
    const auto& g = result.ranked_groups[r];
    out << r + 1 << ',' << id_of.at(g.members.front()) << ','
        << g.members.size() << ',' << fmt_score(g.nt) << ','
        << fmt_score(g.posterior.value_or(0.0)) << ',';
    for (std::size_t k = 0; k < g.members.size(); ++k) {
      if (k) out << ';';
      out << dataset.reviewer_name(g.members[k]);
    }
    out << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const RunConfig& config,
                       std::span<const std::pair<std::size_t, double>> metrics) {
  out << artifact_header("eval", config);
  out << "k,ndcg\n";
  for (const auto& [k, v] : metrics) out << k << ',' << fmt_score(v) << '\n';
}

void write_meta(std::ostream& out, const RunConfig& config,
                const Dataset& dataset, const PipelineResult& result) {
  out << artifact_header("meta", config);
  out << "config_hash = " << config.hash() << '\n';
  out << config.canonical();
  out << "reviewers = " << dataset.num_reviewers() << '\n'
      << "products = " << dataset.num_products() << '\n'
      << "reviews = " << dataset.num_reviews() << '\n'
      << "graph_edges = " << result.graphs.primary.num_edges() << '\n'
      << "companion_edges = " << result.graphs.companion.num_edges() << '\n'
      << "candidate_groups = " << result.groups.size() << '\n'
      << "prior_source = " << to_string(result.prior.source) << '\n';
  for (const auto& w : result.graphs.warnings) out << "warning = " << w << '\n';
  for (const auto& t : result.timings) {
    out << "stage_seconds." << t.stage << " = " << fmt_double(t.seconds) << '\n';
  }
  std::size_t isolated = 0;
  for (char p : result.inference.beliefs.participated) isolated += p ? 0 : 1;
  std::size_t converged = 0;
  for (const auto& c : result.inference.components) converged += c.converged;
  out << "isolated_nodes = " << isolated << '\n'
      << "components = " << result.inference.components.size() << '\n'
      << "components_converged = " << converged << '\n';
  out << "# component\tsize\tedges\titerations\tconverged\tmax_delta\tseconds\n";
  for (const auto& c : result.inference.components) {
    out << "component\t" << c.id << '\t' << c.size << '\t' << c.edges << '\t'
        << c.iterations << '\t' << (c.converged ? "true" : "false") << '\t'
        << fmt_double(c.max_delta) << '\t' << fmt_double(c.seconds) << '\n';
  }
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();
  auto inputs = load_inputs(config);
  const Dataset& dataset = inputs.parsed.dataset;
  auto result = execute_pipeline(
      config, dataset, inputs.file_prior ? &*inputs.file_prior : nullptr);

  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(config.output_dir);
    auto emit = [&](const std::string& name, auto&& writer) {
      const auto path = config.output_dir / name;
      written.push_back(path);
      std::ofstream f(path, std::ios::binary);
      if (!f) throw IoError("cannot write " + path.string());
      writer(f);
      f.flush();
      if (!f) throw IoError("write failed: " + path.string());
    };
    emit("parse_report.txt", [&](std::ostream& f) {
      f << artifact_header("parse", config);
      inputs.parsed.report.write(f);
      for (const auto& note : inputs.notes) f << "note\t" << note << '\n';
    });
    emit("rankings.csv", [&](std::ostream& f) {
      write_rankings_csv(f, config, dataset, result);
    });
    emit("groups.csv", [&](std::ostream& f) {
      write_groups_csv(f, config, dataset, result);
    });
    if (!result.metrics.empty()) {
      emit("metrics.csv", [&](std::ostream& f) {
        write_metrics_csv(f, config, result.metrics);
      });
    }
    emit("meta.txt", [&](std::ostream& f) {
      write_meta(f, config, dataset, result);
    });
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw StageError("output", e.what());
  }
  return result;
}

RankedList read_rankings_csv(std::istream& in) {
  if (!in) throw IoError("rankings input is not readable");
  RankedList out;
  std::string line;
  int id_col = -1, score_col = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_csv(line);
    if (id_col < 0) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "reviewer_id") id_col = static_cast<int>(i);
        if (fields[i] == "spam_belief") score_col = static_cast<int>(i);
      }
      if (id_col < 0 || score_col < 0) {
        throw IoError("rankings header lacks reviewer_id or spam_belief");
      }
      continue;
    }
    if (fields.size() <= static_cast<std::size_t>(std::max(id_col, score_col))) {
      throw IoError("short rankings row: " + line);
    }
    out.push_back({fields[static_cast<std::size_t>(id_col)],
                   std::stod(fields[static_cast<std::size_t>(score_col)]),
                   out.size() + 1});
  }
  return out;
}

}  // namespace coreview
