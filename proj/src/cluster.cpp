#include "leadlag/cluster.hpp"

#include "leadlag/error.hpp"
#include "leadlag/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace leadlag {

namespace {

double squared_distance(const double* a, const double* b, Eigen::Index dim) {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double d = a[c] - b[c];
    acc += d * d;
  }
  return acc;
}

const double* row_ptr(const RowMatrix& m, Eigen::Index r) { return m.data() + r * m.cols(); }

RowMatrix seed_centers(const RowMatrix& points, int clusters, CounterRng& rng) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  RowMatrix centers(clusters, dim);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  auto first = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n));
  first = std::min(first, n - 1);
  centers.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    d2[static_cast<std::size_t>(i)] = squared_distance(row_ptr(points, i), row_ptr(points, first), dim);
  }

  for (int c = 1; c < clusters; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = d2[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        acc += w;
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every point coincides with a center; draw among unchosen rows.
      std::vector<Eigen::Index> free_rows;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) free_rows.push_back(i);
      }
      if (free_rows.empty()) {
        pick = std::min(static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n)), n - 1);
      } else {
        const auto k = std::min(
            static_cast<std::size_t>(rng.uniform() * static_cast<double>(free_rows.size())),
            free_rows.size() - 1);
        pick = free_rows[k];
      }
    }
    centers.row(c) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = squared_distance(row_ptr(points, i), row_ptr(centers, c), dim);
      auto& slot = d2[static_cast<std::size_t>(i)];
      slot = std::min(slot, d);
    }
  }
  return centers;
}

struct LloydState {
  std::vector<int> labels;
  std::vector<double> distance;  // squared distance to the assigned center
};

void assign(const RowMatrix& points, const RowMatrix& centers, LloydState& state) {
  const Eigen::Index dim = points.cols();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = squared_distance(row_ptr(points, i), row_ptr(centers, c), dim);
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    state.labels[static_cast<std::size_t>(i)] = best_c;
    state.distance[static_cast<std::size_t>(i)] = best;
  }
}

// Empty clusters take the point farthest from its center, drawn from clusters
// that can spare one.
void reseed_empty(int clusters, LloydState& state) {
  std::vector<int> counts(static_cast<std::size_t>(clusters), 0);
  for (int l : state.labels) ++counts[static_cast<std::size_t>(l)];
  for (int c = 0; c < clusters; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < state.labels.size(); ++i) {
      if (counts[static_cast<std::size_t>(state.labels[i])] > 1 && state.distance[i] > far_d) {
        far_d = state.distance[i];
        far = i;
      }
    }
    if (far_d < 0.0) break;  // fewer points than clusters
    --counts[static_cast<std::size_t>(state.labels[far])];
    state.labels[far] = c;
    state.distance[far] = 0.0;
    ++counts[static_cast<std::size_t>(c)];
  }
}

RowMatrix cluster_means(const RowMatrix& points, const std::vector<int>& labels, int clusters,
                        const RowMatrix& fallback) {
  RowMatrix sums = RowMatrix::Zero(clusters, points.cols());
  std::vector<int> counts(static_cast<std::size_t>(clusters), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    sums.row(l) += points.row(i);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c = 0; c < clusters; ++c) {
    const int k = counts[static_cast<std::size_t>(c)];
    if (k > 0) {
      sums.row(c) /= static_cast<double>(k);
    } else {
      sums.row(c) = fallback.row(c);
    }
  }
  return sums;
}

double inertia_to(const RowMatrix& points, const std::vector<int>& labels, const RowMatrix& centers) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += squared_distance(row_ptr(points, i), row_ptr(centers, labels[static_cast<std::size_t>(i)]),
                              points.cols());
  }
  return total;
}

ClusterAssignment lloyd(const RowMatrix& points, int clusters, std::uint64_t seed,
                        const KMeansOptions& options) {
  CounterRng rng(seed);
  RowMatrix centers = seed_centers(points, clusters, rng);
  LloydState state{std::vector<int>(static_cast<std::size_t>(points.rows())),
                   std::vector<double>(static_cast<std::size_t>(points.rows()))};
  ClusterAssignment out;
  out.clusters = clusters;
  for (int it = 0; it < options.max_iter; ++it) {
    assign(points, centers, state);
    reseed_empty(clusters, state);
    RowMatrix updated = cluster_means(points, state.labels, clusters, centers);
    out.inertia_history.push_back(inertia_to(points, state.labels, updated));
    const double shift = (updated - centers).rowwise().norm().maxCoeff();
    centers = std::move(updated);
    if (shift <= options.tol) break;
  }
  out.labels = std::move(state.labels);
  out.inertia = out.inertia_history.empty() ? 0.0 : out.inertia_history.back();
  return out;
}

}  // namespace

ClusterAssignment kmeans_pp(const RowMatrix& points, int clusters, std::uint64_t seed,
                            const KMeansOptions& options) {
  require(clusters >= 1, ErrorCode::kInvalidParameter, "cluster count K must be positive");
  require(points.rows() >= 1, ErrorCode::kInvalidInput, "k-means needs at least one point");
  require(clusters <= points.rows(), ErrorCode::kInvalidParameter,
          "K=" + std::to_string(clusters) + " exceeds the number of points " +
              std::to_string(points.rows()));
  require(options.max_iter >= 1, ErrorCode::kInvalidParameter, "max_iter must be positive");
  require(options.tol >= 0.0, ErrorCode::kInvalidParameter, "tol must be nonnegative");
  require(options.restarts >= 1, ErrorCode::kInvalidParameter, "restarts must be positive");

  ClusterAssignment best = lloyd(points, clusters, seed, options);
  for (int r = 1; r < options.restarts; ++r) {
    ClusterAssignment candidate =
        lloyd(points, clusters, derive_seed(seed, static_cast<std::uint64_t>(r)), options);
    if (*candidate.inertia < *best.inertia) best = std::move(candidate);
  }
  return best;
}

ClusterAssignment kmeans_pp(const SubsequenceUniverse& universe, int clusters, std::uint64_t seed,
                            const KMeansOptions& options) {
  return kmeans_pp(universe.windows(), clusters, seed, options);
}

double clustering_inertia(const RowMatrix& points, const std::vector<int>& labels, int clusters) {
  require(labels.size() == static_cast<std::size_t>(points.rows()), ErrorCode::kDimension,
          "label count does not match point count");
  for (int l : labels) {
    require(l >= 0 && l < clusters, ErrorCode::kInvalidInput, "label out of range");
  }
  const RowMatrix zeros = RowMatrix::Zero(clusters, points.cols());
  return inertia_to(points, labels, cluster_means(points, labels, clusters, zeros));
}

namespace {

// Normalized affinity D^{-1/2} W D^{-1/2} in adjacency-list form.
struct NormalizedAffinity {
  std::size_t size = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
    for (std::size_t i = 0; i < size; ++i) {
      double acc = 0.0;
      for (const auto& [j, w] : rows[i]) acc += w * x(static_cast<Eigen::Index>(j));
      y(static_cast<Eigen::Index>(i)) = acc;
    }
    return y;
  }
};

NormalizedAffinity normalized_affinity(const SimilarityGraph& graph, bool self_loop_fallback) {
  require(graph.symmetric(), ErrorCode::kInvalidInput, "spectral clustering needs a symmetric graph");
  const std::size_t n = graph.size();
  NormalizedAffinity out;
  out.size = n;
  out.rows.resize(n);
  std::vector<double> degree(n, 0.0);
  for (const Edge& e : graph.edges()) {
    degree[e.row] += e.weight;
    out.rows[e.row].emplace_back(e.col, e.weight);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (degree[i] > 0.0) continue;
    require(self_loop_fallback, ErrorCode::kDegenerateGraph,
            "vertex " + std::to_string(i) + " has zero degree");
    out.rows[i].emplace_back(i, 1.0);
    degree[i] = 1.0;
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& [j, w] : out.rows[i]) w = (w * inv_sqrt[i]) * inv_sqrt[j];
  }
  return out;
}

Matrix dense_affinity(const NormalizedAffinity& a) {
  const auto n = static_cast<Eigen::Index>(a.size);
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < a.size; ++i) {
    for (const auto& [j, w] : a.rows[i]) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
  }
  // Exact symmetry so the self-adjoint solver sees the same matrix from either triangle.
  return (m + m.transpose()) * 0.5;
}

// Lanczos with full reorthogonalisation for the largest eigenpairs of the
// normalized affinity, i.e. the smallest of the Laplacian. The Krylov
// dimension doubles until the wanted Ritz pairs converge.
LaplacianEigenpairs lanczos_bottom(const NormalizedAffinity& a, int wanted) {
  const auto n = static_cast<Eigen::Index>(a.size);
  Eigen::Index steps = std::min<Eigen::Index>(n, std::max<Eigen::Index>(4 * wanted, 2 * wanted + 40));
  CounterRng rng(0x5eed, static_cast<std::uint64_t>(n));
  auto random_vector = [&]() {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform() - 0.5;
    return v;
  };

  while (true) {
    Matrix basis(n, steps);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(steps);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(steps);
    Eigen::VectorXd v = random_vector().normalized();
    Eigen::Index built = 0;
    double last_beta = 0.0;
    for (Eigen::Index j = 0; j < steps; ++j) {
      basis.col(j) = v;
      built = j + 1;
      Eigen::VectorXd w = a.apply(v);
      alpha(j) = v.dot(w);
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd coeff = basis.leftCols(built).transpose() * w;
        w -= basis.leftCols(built) * coeff;
      }
      double b = w.norm();
      if (j + 1 == steps) {
        last_beta = b;
        break;
      }
      if (b < 1e-10) {
        // Invariant subspace exhausted; continue from a fresh orthogonal direction.
        w = random_vector();
        for (int pass = 0; pass < 2; ++pass) {
          const Eigen::VectorXd coeff = basis.leftCols(built).transpose() * w;
          w -= basis.leftCols(built) * coeff;
        }
        beta(j) = 0.0;
        v = w.normalized();
      } else {
        beta(j) = b;
        v = w / b;
      }
    }

    Matrix tri = Matrix::Zero(built, built);
    for (Eigen::Index j = 0; j < built; ++j) {
      tri(j, j) = alpha(j);
      if (j + 1 < built) tri(j, j + 1) = tri(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(tri);
    const Eigen::Index k = std::min<Eigen::Index>(wanted, built);
    bool converged = true;
    LaplacianEigenpairs out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const Eigen::Index idx = built - 1 - c;  // largest affinity eigenvalues
      const double residual = std::abs(last_beta * solver.eigenvectors()(built - 1, idx));
      if (residual > 1e-9) converged = false;
      out.values(c) = 1.0 - solver.eigenvalues()(idx);
      out.vectors.col(c) = (basis.leftCols(built) * solver.eigenvectors().col(idx)).normalized();
    }
    if (converged || steps == n) return out;
    steps = std::min<Eigen::Index>(n, 2 * steps);
  }
}

}  // namespace

Matrix normalized_laplacian(const SimilarityGraph& graph, bool self_loop_fallback) {
  const NormalizedAffinity a = normalized_affinity(graph, self_loop_fallback);
  const auto n = static_cast<Eigen::Index>(a.size);
  return Matrix::Identity(n, n) - dense_affinity(a);
}

LaplacianEigenpairs laplacian_eigenpairs(const SimilarityGraph& graph, int clusters,
                                         const SpectralOptions& options) {
  require(clusters >= 1, ErrorCode::kInvalidParameter, "cluster count K must be positive");
  require(static_cast<std::size_t>(clusters) <= graph.size(), ErrorCode::kInvalidParameter,
          "K=" + std::to_string(clusters) + " exceeds graph size " + std::to_string(graph.size()));
  const NormalizedAffinity a = normalized_affinity(graph, options.self_loop_fallback);
  if (graph.size() > options.dense_limit) return lanczos_bottom(a, clusters);

  const auto n = static_cast<Eigen::Index>(a.size);
  const Matrix laplacian = Matrix::Identity(n, n) - dense_affinity(a);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
  require(solver.info() == Eigen::Success, ErrorCode::kNumericDomain,
          "eigendecomposition failed");
  return {solver.eigenvalues().head(clusters), solver.eigenvectors().leftCols(clusters)};
}

RowMatrix spectral_embedding(const SimilarityGraph& graph, int clusters,
                             const SpectralOptions& options) {
  RowMatrix embedding = laplacian_eigenpairs(graph, clusters, options).vectors;
  for (Eigen::Index r = 0; r < embedding.rows(); ++r) {
    const double norm = embedding.row(r).norm();
    if (norm > 0.0) embedding.row(r) /= norm;
  }
  return embedding;
}

ClusterAssignment spectral(const SimilarityGraph& graph, int clusters, std::uint64_t seed,
                           const SpectralOptions& options) {
  ClusterAssignment out =
      kmeans_pp(spectral_embedding(graph, clusters, options), clusters, seed, options.kmeans);
  out.inertia.reset();
  out.inertia_history.clear();
  return out;
}

}  // namespace leadlag
