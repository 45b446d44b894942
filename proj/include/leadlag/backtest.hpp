#pragma once

#include "leadlag/core.hpp"
#include "leadlag/lead_lag.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leadlag {

inline constexpr double kTradingDays = 252.0;

enum class StrategyMethod { kCcf, kKmMode, kKmMedian, kSpMode, kSpMedian };

std::string_view to_string(StrategyMethod method);
/// Accepts CCF, KM_Mod, KM_Med, SP_Mod, SP_Med.
std::optional<StrategyMethod> parse_strategy_method(std::string_view name);

struct StrategyConfig {
  std::size_t window_length = 21;  // l
  std::size_t sts_length = 10;     // q
  std::size_t shift = 1;           // s
  int clusters = 11;               // K
  int theta = 6;
  StrategyMethod method = StrategyMethod::kKmMode;
  double leader_fraction = 0.75;
  std::size_t lookback = 7;        // p
  std::size_t horizon = 7;         // delta
  std::size_t ccf_max_lag = 5;     // M for the CCF benchmark
  double target_vol = 0.15;
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
  std::optional<std::size_t> knn;
  std::optional<double> kernel_sigma;

  void validate() const;
  /// Detection settings used on each trailing window (clustering methods only).
  DetectConfig detect_config(std::size_t day) const;
};

struct PnLSeries {
  std::vector<std::string> dates;
  Series raw;
  Series rescaled;
  double target_vol = 0.15;

  Series cumulative() const;
};

struct StrategyResult {
  PnLSeries laggers;  // G_beta: leaders' signal applied to the lagging basket
  PnLSeries leaders;  // D_alpha: leaders' signal applied to the leading basket
};

/// Leading-first series order for the trailing window ending at each day.
struct RollingRanking {
  std::size_t first_day = 0;                    // day of orders[0]
  std::vector<std::vector<std::size_t>> orders;  // one permutation of 0..n-1 per day
};

/// Adjusted exponentially weighted mean of the last p+1 observations, alpha = 2/(p+1).
double ewma(std::span<const double> x, std::size_t lookback);

Series rescale_pnl(std::span<const double> raw, double target_vol);

/// Runs detection and RowSum ranking on every trailing window ending at days
/// l-1 .. last_day.
RollingRanking rolling_rankings(const TimeSeriesPanel& panel, const StrategyConfig& config,
                                std::size_t last_day, int jobs = 1);

/// Trades the leaders' EWMA signal given precomputed rankings.
StrategyResult evaluate_strategy(const TimeSeriesPanel& panel, const RollingRanking& ranking,
                                 const StrategyConfig& config);

StrategyResult run_strategy(const TimeSeriesPanel& panel, const StrategyConfig& config,
                            int jobs = 1);

struct BacktestReport {
  double e_returns = 0.0;
  double volatility = 0.0;
  double downside_deviation = 0.0;
  double max_drawdown = 0.0;
  std::optional<double> sortino;
  std::optional<double> calmar;
  double hit_rate = 0.0;
  std::optional<double> avg_profit_over_avg_loss;
  double pnl_per_trade = 0.0;
  double sharpe = 0.0;
  double sharpe_stat = 0.0;
  double p_value = 1.0;
};

struct SharpeTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Individual metrics on an already rescaled series. The ratio metrics throw
// kUndefinedMetric where their denominator vanishes.
double expected_returns(std::span<const double> pnl);
double annualized_volatility(std::span<const double> pnl);
double downside_deviation(std::span<const double> pnl);
double max_drawdown(std::span<const double> pnl);
double sortino_ratio(std::span<const double> pnl);
double calmar_ratio(std::span<const double> pnl);
double hit_rate(std::span<const double> pnl);
double profit_loss_ratio(std::span<const double> pnl);
double pnl_per_trade(std::span<const double> pnl);
double sharpe_ratio(std::span<const double> pnl);

/// Undefined ratios are reported as nullopt rather than thrown.
BacktestReport performance_report(const PnLSeries& pnl);

/// Skewness/kurtosis-adjusted test of H0: Sharpe = 0 using the daily Sharpe ratio.
SharpeTest sharpe_significance(std::span<const double> pnl);

struct GridSpec {
  std::vector<StrategyMethod> methods;
  std::vector<std::size_t> lookbacks;
  std::vector<std::size_t> horizons;
  std::vector<double> leader_fractions;
};

struct GridRow {
  StrategyMethod method;
  std::size_t lookback;
  std::size_t horizon;
  double leader_fraction;
  BacktestReport laggers;
  BacktestReport leaders;
};

/// Rankings are computed once per method and shared across (p, delta, fraction).
std::vector<GridRow> run_grid(const TimeSeriesPanel& panel, const StrategyConfig& base,
                              const GridSpec& grid, int jobs = 1);

}  // namespace leadlag
