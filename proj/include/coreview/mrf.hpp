#pragma once

// Pairwise MRF over the reviewer graph with labels (benign, spammer) and
// sum-product loopy belief propagation. Everything is templated on the
// scalar so the enumeration oracle can run in extended precision.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "coreview/components.hpp"
#include "coreview/error.hpp"
#include "coreview/priors.hpp"
#include "coreview/reviewer_graph.hpp"

namespace coreview {

// Label order is fixed everywhere: index 0 = benign (+1), 1 = spammer (-1).
enum class Label : int { kBenign = 0, kSpammer = 1 };

constexpr int label_sign(Label l) { return l == Label::kBenign ? +1 : -1; }

template <typename Scalar>
using LabelPair = Eigen::Array<Scalar, 2, 1>;

template <typename Scalar>
using LabelTable = Eigen::Array<Scalar, Eigen::Dynamic, 2>;

// e^{x_i x_j w}: e^w on agreement, e^-w otherwise.
template <typename Scalar>
Scalar edge_potential(Label a, Label b, Scalar w) {
  using std::exp;
  return exp(static_cast<Scalar>(label_sign(a) * label_sign(b)) * w);
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> edge_potential_matrix(Scalar w) {
  using std::exp;
  Eigen::Matrix<Scalar, 2, 2> m;
  m << exp(w), exp(-w), exp(-w), exp(w);
  return m;
}

// Row i holds (psi_i(benign), psi_i(spammer)) = (1 - S_i, S_i).
template <typename Scalar>
struct NodePotentials {
  LabelTable<Scalar> table;

  std::size_t size() const { return static_cast<std::size_t>(table.rows()); }

  static NodePotentials from_prior(const Eigen::Ref<const Eigen::VectorXd>& s) {
    NodePotentials p;
    p.table.resize(s.size(), 2);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (!(s[i] >= 0.0 && s[i] <= 1.0)) {
        throw Error("node prior outside [0, 1] at reviewer " +
                    std::to_string(i));
      }
      p.table(i, 0) = static_cast<Scalar>(1.0 - s[i]);
      p.table(i, 1) = static_cast<Scalar>(s[i]);
    }
    return p;
  }
  static NodePotentials from_prior(const PriorVector& prior) {
    return from_prior(prior.values);
  }
};

template <typename Scalar>
struct BeliefVector {
  LabelTable<Scalar> values;       // rows sum to 1
  std::vector<char> participated;  // false for isolated nodes

  std::size_t size() const { return participated.size(); }
  Scalar spam(std::size_t i) const {
    return values(static_cast<Eigen::Index>(i), 1);
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> spam_scores() const {
    return values.col(1).matrix();
  }
};

struct LbpOptions {
  double conv_tol = 1e-5;
  int max_iters = 30;
  double damping = 0.0;  // new = (1 - damping) * update + damping * old
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (!(conv_tol > 0.0)) throw ConfigError("conv_tol must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (!(damping >= 0.0 && damping < 1.0)) {
      throw ConfigError("damping must lie in [0, 1)");
    }
  }
};

struct ComponentStats {
  std::size_t id = 0;
  std::size_t size = 0;
  std::size_t edges = 0;
  int iterations = 0;
  bool converged = true;
  double max_delta = 0.0;
  double seconds = 0.0;
};

template <typename Scalar>
struct LbpResult {
  BeliefVector<Scalar> beliefs;
  std::vector<ComponentStats> components;  // components with >= 2 nodes

  bool all_converged() const {
    return std::all_of(components.begin(), components.end(),
                       [](const auto& c) { return c.converged; });
  }
};

namespace detail {

template <typename Scalar>
LabelPair<Scalar> normalized_prior(const NodePotentials<Scalar>& pot,
                                   std::size_t i) {
  LabelPair<Scalar> p = pot.table.row(static_cast<Eigen::Index>(i)).transpose();
  return p / p.sum();
}

// Messages live on directed adjacency slots of the CSR graph: slot s in row i
// pointing at j holds m_{i->j}. reverse[s] is the slot of m_{j->i}.
template <typename Scalar>
class MessageStore {
 public:
  explicit MessageStore(const ReviewerGraph& graph)
      : messages_(2, graph.adjacency().nonZeros()),
        reverse_(static_cast<std::size_t>(graph.adjacency().nonZeros())) {
    messages_.setOnes();
    const int* offsets = graph.adjacency().outerIndexPtr();
    for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
      const auto nbrs = graph.neighbors(static_cast<ReviewerId>(i));
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        const auto back = graph.neighbors(static_cast<ReviewerId>(nbrs[k]));
        const auto pos = std::lower_bound(back.begin(), back.end(),
                                          static_cast<int>(i)) -
                         back.begin();
        reverse_[static_cast<std::size_t>(offsets[i]) + k] =
            static_cast<std::size_t>(offsets[nbrs[k]] + pos);
      }
    }
  }

  auto message(std::size_t slot) { return messages_.col(static_cast<Eigen::Index>(slot)); }
  auto message(std::size_t slot) const {
    return messages_.col(static_cast<Eigen::Index>(slot));
  }
  std::size_t reverse(std::size_t slot) const { return reverse_[slot]; }

 private:
  Eigen::Array<Scalar, 2, Eigen::Dynamic> messages_;
  std::vector<std::size_t> reverse_;
};

// Sum of log incoming messages at node i.
template <typename Scalar>
LabelPair<Scalar> log_incoming(const ReviewerGraph& graph,
                               const MessageStore<Scalar>& store,
                               std::size_t i) {
  using std::log;
  const std::size_t begin =
      static_cast<std::size_t>(graph.adjacency().outerIndexPtr()[i]);
  LabelPair<Scalar> acc = LabelPair<Scalar>::Zero();
  for (std::size_t k = 0; k < graph.degree(static_cast<ReviewerId>(i)); ++k) {
    acc += store.message(store.reverse(begin + k)).log();
  }
  return acc;
}

// psi * exp(log_terms), rescaled so the larger log term maps to 1.
template <typename Scalar>
LabelPair<Scalar> weighted_product(const LabelPair<Scalar>& psi,
                                   const LabelPair<Scalar>& log_terms) {
  return psi * (log_terms - log_terms.maxCoeff()).exp();
}

template <typename Scalar>
ComponentStats run_component(const ReviewerGraph& graph,
                             const NodePotentials<Scalar>& pot,
                             const std::vector<ReviewerId>& nodes,
                             std::size_t component_id,
                             const LbpOptions& opt,
                             MessageStore<Scalar>& store,
                             BeliefVector<Scalar>& beliefs) {
  const auto start = std::chrono::steady_clock::now();
  const int* offsets = graph.adjacency().outerIndexPtr();
  const Scalar damping = static_cast<Scalar>(opt.damping);

  ComponentStats stats;
  stats.id = component_id;
  stats.size = nodes.size();
  for (ReviewerId u : nodes) stats.edges += graph.degree(u);
  stats.edges /= 2;
  stats.converged = false;

  auto fail = [&](const char* what) {
    throw InferenceError("belief propagation degenerated in component " +
                         std::to_string(component_id) + ": " + what);
  };

  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    Scalar max_delta = 0;
    for (ReviewerId i : nodes) {
      const LabelPair<Scalar> psi =
          pot.table.row(static_cast<Eigen::Index>(i)).transpose();
      const LabelPair<Scalar> log_in = log_incoming(graph, store, i);
      const auto nbrs = graph.neighbors(i);
      const auto w = graph.weights(i);
      const std::size_t begin = static_cast<std::size_t>(offsets[i]);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        const std::size_t slot = begin + k;
        const LabelPair<Scalar> excl =
            log_in - store.message(store.reverse(slot)).log();
        const LabelPair<Scalar> weighted = weighted_product(psi, excl);
        LabelPair<Scalar> update =
            (edge_potential_matrix(static_cast<Scalar>(w[k])).transpose() *
             weighted.matrix())
                .array();
        update /= update.sum();
        auto msg = store.message(slot);
        if (damping > 0) update = (1 - damping) * update + damping * msg / msg.sum();
        if (!update.allFinite() || (update <= Scalar(0)).any()) fail("non-positive or non-finite message");
        max_delta = std::max(max_delta, (update - msg).abs().maxCoeff());
        msg = update;
      }
    }
    stats.iterations = iter;
    stats.max_delta = static_cast<double>(max_delta);
    if (max_delta < static_cast<Scalar>(opt.conv_tol)) {
      stats.converged = true;
      break;
    }
  }

  for (ReviewerId i : nodes) {
    const LabelPair<Scalar> psi =
        pot.table.row(static_cast<Eigen::Index>(i)).transpose();
    LabelPair<Scalar> b = weighted_product(psi, log_incoming(graph, store, i));
    b /= b.sum();
    if (!b.allFinite()) fail("non-finite belief");
    beliefs.values.row(static_cast<Eigen::Index>(i)) = b.transpose();
    beliefs.participated[i] = 1;
  }
  stats.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return stats;
}

}  // namespace detail

// Sum-product LBP run independently on every connected component with at
// least one edge. Messages start at 1 and each sweep visits nodes in
// ascending id order, updating every outgoing message in place. A component
// stops when the largest message change in a sweep drops below conv_tol or
// after max_iters sweeps. Isolated nodes keep their (normalized) prior as
// belief and are flagged as not participating.
//
// Throws InferenceError naming the component if a message degenerates.
template <typename Scalar = double>
LbpResult<Scalar> lbp_run(const ReviewerGraph& graph,
                          const NodePotentials<Scalar>& potentials,
                          const LbpOptions& options = {}) {
  options.validate();
  const std::size_t n = graph.num_nodes();
  if (potentials.size() != n) {
    throw Error("node potentials do not cover the graph");
  }

  LbpResult<Scalar> result;
  result.beliefs.values.resize(static_cast<Eigen::Index>(n), 2);
  result.beliefs.participated.assign(n, 0);

  const Components comps = connected_components(graph);
  std::vector<std::size_t> work;
  for (std::size_t c = 0; c < comps.members.size(); ++c) {
    if (comps.members[c].size() >= 2) {
      work.push_back(c);
    } else {
      const std::size_t i = comps.members[c].front();
      result.beliefs.values.row(static_cast<Eigen::Index>(i)) =
          detail::normalized_prior(potentials, i).transpose();
    }
  }

  detail::MessageStore<Scalar> store(graph);
  std::vector<ComponentStats> stats(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < work.size(); t = next++) {
      try {
        stats[t] = detail::run_component(graph, potentials,
                                         comps.members[work[t]], work[t],
                                         options, store, result.beliefs);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };

  unsigned threads = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(work.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.components = std::move(stats);
  return result;
}

// Exact marginals of p(X) = (1/Z) prod psi(x_i) prod psi(x_i, x_j) by
// enumerating every labelling of each connected component. Components larger
// than max_component_size are refused.
template <typename Scalar = double>
BeliefVector<Scalar> exact_marginals(const ReviewerGraph& graph,
                                     const NodePotentials<Scalar>& potentials,
                                     std::size_t max_component_size = 20) {
  const std::size_t n = graph.num_nodes();
  if (potentials.size() != n) {
    throw Error("node potentials do not cover the graph");
  }
  BeliefVector<Scalar> out;
  out.values.setZero(static_cast<Eigen::Index>(n), 2);
  out.participated.assign(n, 0);

  const Components comps = connected_components(graph);
  for (std::size_t c = 0; c < comps.members.size(); ++c) {
    const auto& nodes = comps.members[c];
    if (nodes.size() == 1) {
      out.values.row(static_cast<Eigen::Index>(nodes[0])) =
          detail::normalized_prior(potentials, nodes[0]).transpose();
      continue;
    }
    if (nodes.size() > max_component_size) {
      throw ComponentTooLargeError(
          "exact enumeration refused: component " + std::to_string(c) +
          " has " + std::to_string(nodes.size()) + " nodes");
    }

    // Local edges (a, b, w) with a < b in local numbering.
    struct LocalEdge {
      std::size_t a, b;
      Scalar w;
    };
    std::vector<LocalEdge> edges;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      const auto nbrs = graph.neighbors(nodes[a]);
      const auto w = graph.weights(nodes[a]);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        const auto b = static_cast<std::size_t>(
            std::lower_bound(nodes.begin(), nodes.end(),
                             static_cast<ReviewerId>(nbrs[k])) -
            nodes.begin());
        if (b > a) edges.push_back({a, b, static_cast<Scalar>(w[k])});
      }
    }

    LabelTable<Scalar> acc = LabelTable<Scalar>::Zero(
        static_cast<Eigen::Index>(nodes.size()), 2);
    Scalar z = 0;
    const std::uint64_t configs = std::uint64_t{1} << nodes.size();
    for (std::uint64_t mask = 0; mask < configs; ++mask) {
      // bit set = spammer
      auto label = [&](std::size_t a) {
        return (mask >> a) & 1 ? Label::kSpammer : Label::kBenign;
      };
      Scalar p = 1;
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        p *= potentials.table(static_cast<Eigen::Index>(nodes[a]),
                              static_cast<int>(label(a)));
      }
      for (const auto& e : edges) {
        p *= edge_potential(label(e.a), label(e.b), e.w);
      }
      z += p;
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        acc(static_cast<Eigen::Index>(a), static_cast<int>(label(a))) += p;
      }
    }
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      out.values.row(static_cast<Eigen::Index>(nodes[a])) =
          acc.row(static_cast<Eigen::Index>(a)) / z;
      out.participated[nodes[a]] = 1;
    }
  }
  return out;
}

}  // namespace coreview
