#pragma once

#include <cstddef>
#include <vector>

#include "coreview/reviewer_graph.hpp"

namespace coreview {

struct Components {
  std::vector<std::size_t> component_of;        // per node
  std::vector<std::vector<ReviewerId>> members;  // ascending, by smallest node
};

// Connected components by BFS; isolated nodes form singleton components.
Components connected_components(const ReviewerGraph& graph);

}  // namespace coreview
