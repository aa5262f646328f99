#include "coreview/components.hpp"

#include <algorithm>
#include <limits>

namespace coreview {

Components connected_components(const ReviewerGraph& graph) {
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  const std::size_t n = graph.num_nodes();
  Components out;
  out.component_of.assign(n, kUnset);
  std::vector<ReviewerId> frontier;
  for (std::size_t s = 0; s < n; ++s) {
    if (out.component_of[s] != kUnset) continue;
    const std::size_t id = out.members.size();
    auto& members = out.members.emplace_back();
    out.component_of[s] = id;
    frontier.assign(1, static_cast<ReviewerId>(s));
    while (!frontier.empty()) {
      const ReviewerId u = frontier.back();
      frontier.pop_back();
      members.push_back(u);
      for (int v : graph.neighbors(u)) {
        auto& c = out.component_of[static_cast<std::size_t>(v)];
        if (c == kUnset) {
          c = id;
          frontier.push_back(static_cast<ReviewerId>(v));
        }
      }
    }
    std::sort(members.begin(), members.end());
  }
  return out;
}

}  // namespace coreview
