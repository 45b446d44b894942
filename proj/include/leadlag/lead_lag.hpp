#pragma once

#include "leadlag/cluster.hpp"
#include "leadlag/core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leadlag {

/// Pooled relative lags for every unordered series pair (i < j).
class LagMultisets {
 public:
  explicit LagMultisets(std::size_t series_count);

  std::size_t series_count() const { return n_; }
  /// Lags for pair (i, j), i < j; lag = start_j - start_i.
  const std::vector<int>& lags(std::size_t i, std::size_t j) const;
  std::vector<int>& lags(std::size_t i, std::size_t j);
  std::size_t count(std::size_t i, std::size_t j) const { return lags(i, j).size(); }

 private:
  std::size_t pair_index(std::size_t i, std::size_t j) const;

  std::size_t n_;
  std::vector<std::vector<int>> pairs_;
};

struct VotingMatrix {
  IntMatrix counts;  // symmetric, zero diagonal, entries 0 or >= theta
  int theta = 1;
};

struct LeadLagMatrix {
  IntMatrix gamma;  // antisymmetric; gamma(i, j) > 0 means i leads j
  std::vector<std::string> ids;
};

/// Real-valued lead-lag scores (cross-correlation benchmark).
struct ScoreMatrix {
  Matrix gamma;
  std::vector<std::string> ids;
};

enum class Aggregation { kMode, kMedian };

enum class DetectMethod { kKmMode, kKmMedian, kSpMode, kSpMedian };

std::string_view to_string(DetectMethod method);
/// Accepts KM_Mod, KM_Med, SP_Mod, SP_Med.
std::optional<DetectMethod> parse_detect_method(std::string_view name);
Aggregation aggregation_of(DetectMethod method);
bool uses_spectral(DetectMethod method);

LagMultisets pair_lag_multisets(const ClusterAssignment& assignment,
                                const SubsequenceUniverse& universe);

VotingMatrix voting_matrix(const LagMultisets& multisets, int theta);

/// Mode ties go to the smallest |lag|, then the smaller lag. Median is the lower median.
std::optional<int> aggregate_lag(std::span<const int> lags, Aggregation method);

LeadLagMatrix lead_lag_matrix(const LagMultisets& multisets, const VotingMatrix& votes,
                              Aggregation method, std::vector<std::string> ids = {});

struct DetectConfig {
  std::size_t window_length = 10;  // q
  std::size_t shift = 1;           // s
  int clusters = 11;               // K
  int theta = 6;
  DetectMethod method = DetectMethod::kKmMode;
  std::uint64_t seed = 0;
  std::optional<std::size_t> knn;        // default ceil(sqrt(N))
  std::optional<double> kernel_sigma;    // default 1/N
  WindowScaling scaling = WindowScaling::kRaw;
  KMeansOptions kmeans;
  bool self_loop_fallback = false;

  void validate() const;
};

struct Detection {
  SubsequenceUniverse universe;
  ClusterAssignment assignment;
  LagMultisets multisets;
  VotingMatrix votes;
  LeadLagMatrix gamma;
};

/// Clusters the universe with the configured method (no lag extraction).
ClusterAssignment cluster_universe(const SubsequenceUniverse& universe, const DetectConfig& config);

Detection detect_detailed(const TimeSeriesPanel& panel, const DetectConfig& config);
LeadLagMatrix detect(const TimeSeriesPanel& panel, const DetectConfig& config);

/// Entry m-1 is corr(x[t - m], y[t]) over the overlap, m = 1..max_lag.
Series ccf(std::span<const double> x, std::span<const double> y, std::size_t max_lag);

/// Signed normalised area under |CCF|; undefined correlations contribute 0.
ScoreMatrix ccf_lead_lag_matrix(const TimeSeriesPanel& panel, std::size_t max_lag);

struct RankEntry {
  std::size_t index = 0;  // row in the input matrix
  std::string id;
  double score = 0.0;     // row sum
  std::size_t rank = 0;   // 1-based competition rank
};

/// Most leading first. Throws kInvalidMatrix unless gamma is antisymmetric.
std::vector<RankEntry> rowsum_rank(const Matrix& gamma, const std::vector<std::string>& ids = {});
std::vector<RankEntry> rowsum_rank(const LeadLagMatrix& gamma);
std::vector<RankEntry> rowsum_rank(const ScoreMatrix& gamma);

}  // namespace leadlag
