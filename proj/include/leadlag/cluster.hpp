#pragma once

#include "leadlag/core.hpp"
#include "leadlag/similarity.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace leadlag {

struct ClusterAssignment {
  std::vector<int> labels;        // in [0, clusters)
  int clusters = 0;
  std::optional<double> inertia;  // k-means only; SSD of rows to their cluster means
  std::vector<double> inertia_history;  // inertia after each Lloyd update
};

struct KMeansOptions {
  int max_iter = 300;
  double tol = 1e-6;  // on the largest center displacement
  int restarts = 1;   // best inertia wins
};

ClusterAssignment kmeans_pp(const RowMatrix& points, int clusters, std::uint64_t seed,
                            const KMeansOptions& options = {});
ClusterAssignment kmeans_pp(const SubsequenceUniverse& universe, int clusters, std::uint64_t seed,
                            const KMeansOptions& options = {});

struct SpectralOptions {
  bool self_loop_fallback = false;   // give zero-degree vertices a unit self-weight
  std::size_t dense_limit = 5000;    // above this, use the Lanczos path
  KMeansOptions kmeans;
};

/// Dense symmetric normalized Laplacian I - D^{-1/2} W D^{-1/2}.
Matrix normalized_laplacian(const SimilarityGraph& graph, bool self_loop_fallback = false);

struct LaplacianEigenpairs {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // N x K, orthonormal columns
};

/// The K smallest eigenpairs of the normalized Laplacian.
LaplacianEigenpairs laplacian_eigenpairs(const SimilarityGraph& graph, int clusters,
                                         const SpectralOptions& options = {});

/// Row-normalised eigenvectors of the K smallest Laplacian eigenvalues (N x K).
RowMatrix spectral_embedding(const SimilarityGraph& graph, int clusters,
                             const SpectralOptions& options = {});

ClusterAssignment spectral(const SimilarityGraph& graph, int clusters, std::uint64_t seed,
                           const SpectralOptions& options = {});

/// Sum of squared distances of rows to the mean of their cluster.
double clustering_inertia(const RowMatrix& points, const std::vector<int>& labels, int clusters);

}  // namespace leadlag
