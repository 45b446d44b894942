#pragma once

#include "leadlag/core.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace leadlag {

struct Edge {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

/// Sparse weighted graph over universe rows. Edges are kept sorted by (row, col).
class SimilarityGraph {
 public:
  SimilarityGraph(std::size_t size, std::vector<Edge> edges);

  std::size_t size() const { return size_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool symmetric() const { return symmetric_; }

 private:
  std::size_t size_;
  std::vector<Edge> edges_;
  bool symmetric_;
};

// Smallest weight a kernel edge may carry.
inline constexpr double kMinKernelWeight = 1e-300;

double pearson(std::span<const double> x, std::span<const double> y);
double distance_correlation(std::span<const double> x, std::span<const double> y);

/// ceil(sqrt(N))
std::size_t default_knn(std::size_t universe_size);
/// 1 / N
double default_kernel_sigma(std::size_t universe_size);

/// Euclidean k-nearest-neighbour graph, symmetrised by union, unit weights.
SimilarityGraph knn_graph(const SubsequenceUniverse& universe, std::size_t neighbours);

/// Reweights every edge to exp(-d^2 / (2 sigma^2)), floored at kMinKernelWeight.
SimilarityGraph gaussian_kernel(const SimilarityGraph& graph, const SubsequenceUniverse& universe,
                                double sigma);

enum class SimilarityMeasure { kPearson, kDistanceCorrelation };

/// Dense N x N similarity between universe rows.
Matrix similarity_heatmap(const SubsequenceUniverse& universe, SimilarityMeasure measure);

}  // namespace leadlag
