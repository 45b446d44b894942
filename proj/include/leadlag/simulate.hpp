#pragma once

#include "leadlag/core.hpp"
#include "leadlag/lead_lag.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace leadlag {

/// Lagged multi-factor design: series i loads B(i, j) on factor j at delay L(i, j).
struct FactorDesign {
  Matrix loadings;   // n x k
  IntMatrix lags;    // n x k, nonnegative
  int max_lag = 0;   // M

  std::size_t series_count() const { return static_cast<std::size_t>(loadings.rows()); }
  std::size_t factor_count() const { return static_cast<std::size_t>(loadings.cols()); }

  /// Factor index of each series. Throws kUnsupportedModel unless every row has exactly one nonzero loading.
  std::vector<int> membership() const;
  void validate() const;
};

struct GroundTruth {
  IntMatrix psi;    // psi(i, j) > 0 means i leads j by psi(i, j) steps
  BoolMatrix mask;  // true where i != j share a factor
};

/// Block designs used in the synthetic experiments; k in {1, 2, 3}, n divisible by k.
FactorDesign preset_design(int factors, int series_count);

/// X(i, t) = sum_j B(i, j) f_j(t - L(i, j)) + sigma * eps(i, t), with f and eps standard normal.
TimeSeriesPanel generate_panel(const FactorDesign& design, std::size_t length, double sigma,
                               std::uint64_t seed, std::uint64_t stream = 0);

GroundTruth ground_truth(const FactorDesign& design);

IntMatrix error_matrix(const LeadLagMatrix& gamma, const GroundTruth& truth);

/// Mean of E(i, j)^2 over strict upper-triangular pairs where mask is true.
double lag_mse(const IntMatrix& errors, const BoolMatrix& mask);

/// Off-diagonal all-true mask; used for MSE over every pair (cross-factor truth is 0).
BoolMatrix all_pairs_mask(std::size_t n);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Windows covering the same factor segment share a label: (factor, start - lag).
std::vector<int> true_labels(const FactorDesign& design, const SubsequenceUniverse& universe);

}  // namespace leadlag
