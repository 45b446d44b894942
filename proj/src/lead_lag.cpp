#include "leadlag/lead_lag.hpp"

#include "leadlag/error.hpp"
#include "leadlag/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace leadlag {

LagMultisets::LagMultisets(std::size_t series_count)
    : n_(series_count), pairs_(series_count * (series_count > 0 ? series_count - 1 : 0) / 2) {}

std::size_t LagMultisets::pair_index(std::size_t i, std::size_t j) const {
  require(i < j && j < n_, ErrorCode::kDimension,
          "pair (" + std::to_string(i) + ", " + std::to_string(j) + ") is not an ordered pair i < j < n");
  // Row-major strict upper triangle.
  return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

const std::vector<int>& LagMultisets::lags(std::size_t i, std::size_t j) const {
  return pairs_[pair_index(i, j)];
}

std::vector<int>& LagMultisets::lags(std::size_t i, std::size_t j) { return pairs_[pair_index(i, j)]; }

std::string_view to_string(DetectMethod method) {
  switch (method) {
    case DetectMethod::kKmMode: return "KM_Mod";
    case DetectMethod::kKmMedian: return "KM_Med";
    case DetectMethod::kSpMode: return "SP_Mod";
    case DetectMethod::kSpMedian: return "SP_Med";
  }
  return "?";
}

std::optional<DetectMethod> parse_detect_method(std::string_view name) {
  for (auto m : {DetectMethod::kKmMode, DetectMethod::kKmMedian, DetectMethod::kSpMode,
                 DetectMethod::kSpMedian}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

Aggregation aggregation_of(DetectMethod method) {
  return method == DetectMethod::kKmMode || method == DetectMethod::kSpMode ? Aggregation::kMode
                                                                             : Aggregation::kMedian;
}

bool uses_spectral(DetectMethod method) {
  return method == DetectMethod::kSpMode || method == DetectMethod::kSpMedian;
}

LagMultisets pair_lag_multisets(const ClusterAssignment& assignment,
                                const SubsequenceUniverse& universe) {
  require(assignment.labels.size() == universe.size(), ErrorCode::kDimension,
          "assignment has " + std::to_string(assignment.labels.size()) + " labels for " +
              std::to_string(universe.size()) + " windows");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(std::max(assignment.clusters, 0)));
  for (std::size_t r = 0; r < assignment.labels.size(); ++r) {
    const int l = assignment.labels[r];
    require(l >= 0 && l < assignment.clusters, ErrorCode::kInvalidInput, "label out of range");
    members[static_cast<std::size_t>(l)].push_back(r);
  }
  LagMultisets out(universe.series_count());
  const auto& origin = universe.origin();
  for (const auto& cluster : members) {
    for (std::size_t a = 0; a < cluster.size(); ++a) {
      const WindowOrigin& wa = origin[cluster[a]];
      for (std::size_t b = a + 1; b < cluster.size(); ++b) {
        const WindowOrigin& wb = origin[cluster[b]];
        if (wa.series == wb.series) continue;
        const WindowOrigin& lo = wa.series < wb.series ? wa : wb;
        const WindowOrigin& hi = wa.series < wb.series ? wb : wa;
        out.lags(lo.series, hi.series)
            .push_back(static_cast<int>(hi.start) - static_cast<int>(lo.start));
      }
    }
  }
  return out;
}

VotingMatrix voting_matrix(const LagMultisets& multisets, int theta) {
  require(theta >= 1, ErrorCode::kInvalidParameter, "voting threshold theta must be at least 1");
  const auto n = static_cast<Eigen::Index>(multisets.series_count());
  VotingMatrix out{IntMatrix::Zero(n, n), theta};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto count = static_cast<int>(
          multisets.count(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      if (count >= theta) out.counts(i, j) = out.counts(j, i) = count;
    }
  }
  return out;
}

std::optional<int> aggregate_lag(std::span<const int> lags, Aggregation method) {
  if (lags.empty()) return std::nullopt;
  if (method == Aggregation::kMedian) {
    std::vector<int> sorted(lags.begin(), lags.end());
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    return *mid;
  }
  std::map<int, std::size_t> freq;
  for (int l : lags) ++freq[l];
  int best = 0;
  std::size_t best_count = 0;
  for (const auto& [value, count] : freq) {
    const bool better = count > best_count ||
                        (count == best_count && (std::abs(value) < std::abs(best) ||
                                                 (std::abs(value) == std::abs(best) && value < best)));
    if (better) {
      best = value;
      best_count = count;
    }
  }
  return best;
}

namespace {

std::vector<std::string> default_ids(std::vector<std::string> ids, std::size_t n) {
  if (!ids.empty()) {
    require(ids.size() == n, ErrorCode::kDimension, "id count does not match matrix size");
    return ids;
  }
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

}  // namespace

LeadLagMatrix lead_lag_matrix(const LagMultisets& multisets, const VotingMatrix& votes,
                              Aggregation method, std::vector<std::string> ids) {
  const std::size_t n = multisets.series_count();
  require(static_cast<std::size_t>(votes.counts.rows()) == n &&
              static_cast<std::size_t>(votes.counts.cols()) == n,
          ErrorCode::kDimension, "voting matrix does not match the multiset dimension");
  LeadLagMatrix out{IntMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                    default_ids(std::move(ids), n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      if (votes.counts(ii, jj) == 0) continue;
      const int lag = aggregate_lag(multisets.lags(i, j), method).value_or(0);
      out.gamma(ii, jj) = lag;
      out.gamma(jj, ii) = -lag;
    }
  }
  return out;
}

void DetectConfig::validate() const {
  require(window_length > 0, ErrorCode::kInvalidParameter, "window length q must be positive");
  require(shift > 0, ErrorCode::kInvalidParameter, "shift s must be positive");
  require(clusters >= 1, ErrorCode::kInvalidParameter, "cluster count K must be positive");
  require(theta >= 1, ErrorCode::kInvalidParameter, "voting threshold theta must be at least 1");
  require(!knn || *knn >= 1, ErrorCode::kInvalidParameter, "k_nn must be positive");
  require(!kernel_sigma || *kernel_sigma > 0.0, ErrorCode::kInvalidParameter,
          "kernel sigma must be positive");
}

ClusterAssignment cluster_universe(const SubsequenceUniverse& universe, const DetectConfig& config) {
  config.validate();
  if (!uses_spectral(config.method)) {
    return kmeans_pp(universe, config.clusters, config.seed, config.kmeans);
  }
  const std::size_t neighbours = config.knn.value_or(default_knn(universe.size()));
  const double sigma = config.kernel_sigma.value_or(default_kernel_sigma(universe.size()));
  const SimilarityGraph graph = gaussian_kernel(knn_graph(universe, neighbours), universe, sigma);
  SpectralOptions options;
  options.self_loop_fallback = config.self_loop_fallback;
  options.kmeans = config.kmeans;
  return spectral(graph, config.clusters, config.seed, options);
}

Detection detect_detailed(const TimeSeriesPanel& panel, const DetectConfig& config) {
  config.validate();
  SubsequenceUniverse universe =
      extract_subsequences(panel, config.window_length, config.shift, config.scaling);
  ClusterAssignment assignment;
  if (panel.series_count() == 1) {
    // No cross-series pairs exist.
    assignment.labels.assign(universe.size(), 0);
    assignment.clusters = 1;
  } else {
    assignment = cluster_universe(universe, config);
  }
  LagMultisets multisets = pair_lag_multisets(assignment, universe);
  VotingMatrix votes = voting_matrix(multisets, config.theta);
  LeadLagMatrix gamma =
      lead_lag_matrix(multisets, votes, aggregation_of(config.method), panel.ids());
  return Detection{std::move(universe), std::move(assignment), std::move(multisets),
                   std::move(votes), std::move(gamma)};
}

LeadLagMatrix detect(const TimeSeriesPanel& panel, const DetectConfig& config) {
  return detect_detailed(panel, config).gamma;
}

Series ccf(std::span<const double> x, std::span<const double> y, std::size_t max_lag) {
  require(max_lag >= 1, ErrorCode::kInvalidParameter, "maximum lag M must be positive");
  require(x.size() == y.size(), ErrorCode::kDimension, "ccf needs equal-length series");
  require(x.size() > max_lag + 2, ErrorCode::kInvalidInput,
          "series length " + std::to_string(x.size()) + " too short for maximum lag " +
              std::to_string(max_lag));
  Series out;
  out.reserve(max_lag);
  const std::size_t n = x.size();
  for (std::size_t m = 1; m <= max_lag; ++m) {
    out.push_back(pearson(x.subspan(0, n - m), y.subspan(m, n - m)));
  }
  return out;
}

ScoreMatrix ccf_lead_lag_matrix(const TimeSeriesPanel& panel, std::size_t max_lag) {
  require(panel.length() > max_lag + 2, ErrorCode::kInvalidInput,
          "panel length " + std::to_string(panel.length()) + " too short for maximum lag " +
              std::to_string(max_lag));
  const std::size_t n = panel.series_count();
  std::vector<Series> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(panel.row(i));

  // area(i, j) = sum_m |CCF^{ij}(m)|
  Matrix area = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const std::size_t len = panel.length();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double total = 0.0;
      for (std::size_t m = 1; m <= max_lag; ++m) {
        try {
          total += std::abs(pearson(std::span<const double>(rows[i]).subspan(0, len - m),
                                    std::span<const double>(rows[j]).subspan(m, len - m)));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kUndefinedCorrelation) throw;
        }
      }
      area(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = total;
    }
  }

  ScoreMatrix out{Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                  panel.ids()};
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (Eigen::Index j = i + 1; j < static_cast<Eigen::Index>(n); ++j) {
      const double a = area(i, j);
      const double b = area(j, i);
      const double denom = a + b;
      double g = 0.0;
      if (denom > 0.0) {
        const double sign = a > b ? 1.0 : (a < b ? -1.0 : 0.0);
        g = std::max(a, b) * sign / denom;
      }
      out.gamma(i, j) = g;
      out.gamma(j, i) = -g;
    }
  }
  return out;
}

std::vector<RankEntry> rowsum_rank(const Matrix& gamma, const std::vector<std::string>& ids) {
  require(gamma.rows() == gamma.cols(), ErrorCode::kInvalidMatrix, "lead-lag matrix must be square");
  const auto n = static_cast<std::size_t>(gamma.rows());
  const std::vector<std::string> names = default_ids(ids, n);
  const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  require((gamma + gamma.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
          ErrorCode::kInvalidMatrix, "lead-lag matrix is not antisymmetric");

  std::vector<RankEntry> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].index = i;
    out[i].id = names[i];
    out[i].score = gamma.row(static_cast<Eigen::Index>(i)).sum();
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankEntry& a, const RankEntry& b) { return a.score > b.score; });
  for (std::size_t k = 0; k < n; ++k) {
    const bool tied = k > 0 && std::abs(out[k].score - out[k - 1].score) <=
                                   1e-12 * std::max(1.0, std::abs(out[k].score));
    out[k].rank = tied ? out[k - 1].rank : k + 1;
  }
  return out;
}

std::vector<RankEntry> rowsum_rank(const LeadLagMatrix& gamma) {
  return rowsum_rank(gamma.gamma.cast<double>(), gamma.ids);
}

std::vector<RankEntry> rowsum_rank(const ScoreMatrix& gamma) {
  return rowsum_rank(gamma.gamma, gamma.ids);
}

}  // namespace leadlag
