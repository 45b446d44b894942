#include "leadlag/similarity.hpp"

#include "leadlag/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace leadlag {

SimilarityGraph::SimilarityGraph(std::size_t size, std::vector<Edge> edges)
    : size_(size), edges_(std::move(edges)) {
  for (const Edge& e : edges_) {
    require(e.row < size_ && e.col < size_, ErrorCode::kDimension, "edge endpoint out of range");
    require(e.row != e.col, ErrorCode::kInvalidInput, "self-loops are not allowed");
    require(std::isfinite(e.weight) && e.weight > 0.0 && e.weight <= 1.0,
            ErrorCode::kInvalidInput, "edge weights must lie in (0, 1]");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  const auto dup = std::adjacent_find(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.row == b.row && a.col == b.col;
  });
  require(dup == edges_.end(), ErrorCode::kInvalidInput, "duplicate edge");

  symmetric_ = std::all_of(edges_.begin(), edges_.end(), [this](const Edge& e) {
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), e.col,
                                     [](const Edge& x, std::size_t r) { return x.row < r; });
    for (auto jt = it; jt != edges_.end() && jt->row == e.col; ++jt) {
      if (jt->col == e.row) return jt->weight == e.weight;
    }
    return false;
  });
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::kDimension, "pearson needs equal-length inputs");
  require(x.size() >= 2, ErrorCode::kInvalidInput, "pearson needs at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dx = x[t] - mx;
    const double dy = y[t] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0.0 && syy > 0.0, ErrorCode::kUndefinedCorrelation,
          "correlation of a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

Matrix double_centered_distances(std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix a(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) a(k, l) = std::abs(x[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(l)]);
  }
  const Eigen::VectorXd row_mean = a.rowwise().mean();
  const Eigen::RowVectorXd col_mean = a.colwise().mean();
  const double grand = a.mean();
  a.colwise() -= row_mean;
  a.rowwise() -= col_mean;
  a.array() += grand;
  return a;
}

}  // namespace

double distance_correlation(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::kDimension,
          "distance correlation needs equal-length inputs");
  require(x.size() >= 2, ErrorCode::kInvalidInput,
          "distance correlation needs at least two observations");
  const Matrix a = double_centered_distances(x);
  const Matrix b = double_centered_distances(y);
  const double dcov2 = std::max(0.0, (a.array() * b.array()).mean());
  const double dvar_x = (a.array() * a.array()).mean();
  const double dvar_y = (b.array() * b.array()).mean();
  const double denom = std::sqrt(dvar_x * dvar_y);
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(std::sqrt(dcov2 / denom), 0.0, 1.0);
}

std::size_t default_knn(std::size_t universe_size) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(universe_size))));
}

double default_kernel_sigma(std::size_t universe_size) {
  require(universe_size > 0, ErrorCode::kInvalidParameter, "empty universe");
  return 1.0 / static_cast<double>(universe_size);
}

namespace {

double squared_distance(const RowMatrix& w, Eigen::Index a, Eigen::Index b) {
  const double* pa = w.data() + a * w.cols();
  const double* pb = w.data() + b * w.cols();
  double acc = 0.0;
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    const double d = pa[c] - pb[c];
    acc += d * d;
  }
  return acc;
}

}  // namespace

SimilarityGraph knn_graph(const SubsequenceUniverse& universe, std::size_t neighbours) {
  const std::size_t n = universe.size();
  require(neighbours >= 1, ErrorCode::kInvalidParameter, "k_nn must be positive");
  require(neighbours < n, ErrorCode::kInvalidParameter,
          "k_nn=" + std::to_string(neighbours) + " must be below universe size " +
              std::to_string(n));
  const RowMatrix& w = universe.windows();

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(2 * n * neighbours);
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n - 1);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t k = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      dist[b] = squared_distance(w, static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      order[k++] = b;
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(neighbours),
                      order.end(), [&dist](std::size_t x, std::size_t y) {
                        return dist[x] != dist[y] ? dist[x] < dist[y] : x < y;
                      });
    for (std::size_t j = 0; j < neighbours; ++j) {
      pairs.emplace_back(a, order[j]);
      pairs.emplace_back(order[j], a);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) edges.push_back({a, b, 1.0});
  return SimilarityGraph(n, std::move(edges));
}

SimilarityGraph gaussian_kernel(const SimilarityGraph& graph, const SubsequenceUniverse& universe,
                                double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::kInvalidParameter,
          "kernel sigma must be positive");
  require(graph.size() == universe.size(), ErrorCode::kDimension,
          "graph and universe sizes differ");
  const double scale = 1.0 / (2.0 * sigma * sigma);
  std::vector<Edge> edges = graph.edges();
  for (Edge& e : edges) {
    const double d2 = squared_distance(universe.windows(), static_cast<Eigen::Index>(e.row),
                                       static_cast<Eigen::Index>(e.col));
    e.weight = std::max(kMinKernelWeight, std::exp(-d2 * scale));
  }
  return SimilarityGraph(graph.size(), std::move(edges));
}

Matrix similarity_heatmap(const SubsequenceUniverse& universe, SimilarityMeasure measure) {
  const auto n = static_cast<Eigen::Index>(universe.size());
  const auto q = static_cast<std::size_t>(universe.window_length());
  const RowMatrix& w = universe.windows();
  Matrix out(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const std::span<const double> xa(w.data() + a * w.cols(), q);
    for (Eigen::Index b = a; b < n; ++b) {
      const std::span<const double> xb(w.data() + b * w.cols(), q);
      const double v = measure == SimilarityMeasure::kPearson ? pearson(xa, xb)
                                                              : distance_correlation(xa, xb);
      out(a, b) = out(b, a) = v;
    }
  }
  return out;
}

}  // namespace leadlag
