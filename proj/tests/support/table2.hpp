#pragma once

#include "leadlag/cluster.hpp"
#include "leadlag/core.hpp"

#include <utility>
#include <vector>

namespace leadlag::testing {

/// Two series with eleven windows each, clustered exactly as in the worked example.
/// Cluster d holds the listed (series 1 start, series 2 start) windows.
inline std::pair<SubsequenceUniverse, ClusterAssignment> table2_example() {
  const std::vector<std::vector<int>> first{{9}, {7}, {1}, {2}, {0}, {6}, {3}, {4}, {5}, {10}, {8}};
  const std::vector<std::vector<int>> second{{2}, {10}, {4}, {5}, {3}, {9}, {6}, {7}, {8}, {0, 1}, {}};
  const std::size_t q = 5;
  const TimeSeriesPanel panel(Matrix::Zero(2, 10 + static_cast<Eigen::Index>(q)));
  SubsequenceUniverse universe = extract_subsequences(panel, q, 1);
  ClusterAssignment assignment;
  assignment.clusters = 11;
  assignment.labels.assign(universe.size(), -1);
  const std::size_t h = universe.windows_per_series();
  for (int d = 0; d < 11; ++d) {
    for (int start : first[static_cast<std::size_t>(d)]) assignment.labels[static_cast<std::size_t>(start)] = d;
    for (int start : second[static_cast<std::size_t>(d)]) assignment.labels[h + static_cast<std::size_t>(start)] = d;
  }
  return {std::move(universe), std::move(assignment)};
}

}  // namespace leadlag::testing
