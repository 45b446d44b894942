#include "leadlag/backtest.hpp"

#include "leadlag/error.hpp"
#include "leadlag/parallel.hpp"
#include "leadlag/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace leadlag {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stdev_of(std::span<const double> x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

void require_series(std::span<const double> pnl) {
  require(pnl.size() >= 2, ErrorCode::kDegeneratePnl, "PnL series needs at least two days");
  require(std::all_of(pnl.begin(), pnl.end(), [](double v) { return std::isfinite(v); }),
          ErrorCode::kInvalidInput, "PnL series contains non-finite values");
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::optional<double> optional_metric(double (*metric)(std::span<const double>),
                                      std::span<const double> pnl) {
  try {
    return metric(pnl);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUndefinedMetric) return std::nullopt;
    throw;
  }
}

std::optional<DetectMethod> detect_method_of(StrategyMethod method) {
  switch (method) {
    case StrategyMethod::kCcf: return std::nullopt;
    case StrategyMethod::kKmMode: return DetectMethod::kKmMode;
    case StrategyMethod::kKmMedian: return DetectMethod::kKmMedian;
    case StrategyMethod::kSpMode: return DetectMethod::kSpMode;
    case StrategyMethod::kSpMedian: return DetectMethod::kSpMedian;
  }
  return std::nullopt;
}

std::size_t leader_count(std::size_t n, double fraction) {
  const auto leaders = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  require(leaders >= 1 && leaders < n, ErrorCode::kInvalidParameter,
          "leader fraction " + std::to_string(fraction) + " over " + std::to_string(n) +
              " series leaves an empty basket");
  return leaders;
}

}  // namespace

std::string_view to_string(StrategyMethod method) {
  if (method == StrategyMethod::kCcf) return "CCF";
  return to_string(*detect_method_of(method));
}

std::optional<StrategyMethod> parse_strategy_method(std::string_view name) {
  for (auto m : {StrategyMethod::kCcf, StrategyMethod::kKmMode, StrategyMethod::kKmMedian,
                 StrategyMethod::kSpMode, StrategyMethod::kSpMedian}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

void StrategyConfig::validate() const {
  require(leader_fraction > 0.0 && leader_fraction < 1.0, ErrorCode::kInvalidParameter,
          "leader fraction must lie in (0, 1)");
  require(lookback >= 1, ErrorCode::kInvalidParameter, "lookback p must be at least 1");
  require(horizon >= 1, ErrorCode::kInvalidParameter, "horizon delta must be at least 1");
  require(target_vol > 0.0 && std::isfinite(target_vol), ErrorCode::kInvalidParameter,
          "target volatility must be positive");
  require(window_length >= 2, ErrorCode::kInvalidParameter, "window length l must be at least 2");
  if (method == StrategyMethod::kCcf) {
    require(ccf_max_lag >= 1 && window_length > ccf_max_lag + 2, ErrorCode::kInvalidParameter,
            "CCF needs l > M + 2");
  } else {
    require(sts_length >= 1 && sts_length < window_length, ErrorCode::kInvalidParameter,
            "STS length q must be below the window length l");
    detect_config(0).validate();
  }
}

DetectConfig StrategyConfig::detect_config(std::size_t day) const {
  DetectConfig cfg;
  cfg.window_length = sts_length;
  cfg.shift = shift;
  cfg.clusters = clusters;
  cfg.theta = theta;
  cfg.method = detect_method_of(method).value_or(DetectMethod::kKmMode);
  cfg.seed = derive_seed(seed, day);
  cfg.knn = knn;
  cfg.kernel_sigma = kernel_sigma;
  cfg.kmeans = kmeans;
  return cfg;
}

Series PnLSeries::cumulative() const {
  Series out(rescaled.size());
  std::partial_sum(rescaled.begin(), rescaled.end(), out.begin());
  return out;
}

double ewma(std::span<const double> x, std::size_t lookback) {
  require(!x.empty(), ErrorCode::kInvalidInput, "EWMA of an empty series");
  require(lookback >= 1, ErrorCode::kInvalidParameter, "EWMA lookback must be at least 1");
  const double decay = 1.0 - 2.0 / (static_cast<double>(lookback) + 1.0);
  const std::size_t used = std::min(x.size(), lookback + 1);
  double weight = 1.0;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < used; ++i) {
    num += weight * x[x.size() - 1 - i];
    den += weight;
    weight *= decay;
  }
  return num / den;
}

Series rescale_pnl(std::span<const double> raw, double target_vol) {
  require(target_vol > 0.0 && std::isfinite(target_vol), ErrorCode::kInvalidParameter,
          "target volatility must be positive");
  require_series(raw);
  const double sd = stdev_of(raw);
  require(sd > 0.0, ErrorCode::kDegeneratePnl, "PnL has zero variance and cannot be rescaled");
  const double factor = target_vol / (sd * std::sqrt(kTradingDays));
  Series out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(), [factor](double v) { return v * factor; });
  return out;
}

RollingRanking rolling_rankings(const TimeSeriesPanel& panel, const StrategyConfig& config,
                                std::size_t last_day, int jobs) {
  config.validate();
  const std::size_t l = config.window_length;
  require(panel.length() >= l && last_day < panel.length() && last_day + 1 >= l,
          ErrorCode::kInvalidInput,
          "panel of length " + std::to_string(panel.length()) + " is too short for l=" +
              std::to_string(l));
  RollingRanking out;
  out.first_day = l - 1;
  out.orders.resize(last_day - out.first_day + 1);
  parallel_for(out.orders.size(), jobs, [&](std::size_t k) {
    const std::size_t day = out.first_day + k;
    const TimeSeriesPanel window = panel.slice(day + 1 - l, l);
    std::vector<RankEntry> ranking;
    if (config.method == StrategyMethod::kCcf) {
      ranking = rowsum_rank(ccf_lead_lag_matrix(window, config.ccf_max_lag));
    } else {
      ranking = rowsum_rank(detect(window, config.detect_config(day)));
    }
    std::vector<std::size_t> order;
    order.reserve(ranking.size());
    for (const auto& e : ranking) order.push_back(e.index);
    out.orders[k] = std::move(order);
  });
  return out;
}

StrategyResult evaluate_strategy(const TimeSeriesPanel& panel, const RollingRanking& ranking,
                                 const StrategyConfig& config) {
  config.validate();
  const std::size_t n = panel.series_count();
  const std::size_t t_len = panel.length();
  const std::size_t l = config.window_length;
  const std::size_t delta = config.horizon;
  require(t_len >= l + delta, ErrorCode::kInvalidInput,
          "panel of length " + std::to_string(t_len) + " is shorter than l + delta = " +
              std::to_string(l + delta));
  const std::size_t leaders = leader_count(n, config.leader_fraction);
  const std::size_t first = l - 1;
  const std::size_t last = t_len - 1 - delta;
  require(ranking.first_day <= first && ranking.first_day + ranking.orders.size() > last,
          ErrorCode::kDimension, "rankings do not cover the trading days");

  const Matrix& x = panel.values();
  StrategyResult result;
  result.laggers.target_vol = config.target_vol;
  result.leaders.target_vol = config.target_vol;
  Series leader_mean(t_len);
  for (std::size_t t = first; t <= last; ++t) {
    const auto& order = ranking.orders[t - ranking.first_day];
    require(order.size() == n, ErrorCode::kDimension, "ranking size does not match the panel");
    const std::size_t from = t + 1 > config.lookback + 1 ? t - config.lookback : 0;
    for (std::size_t u = from; u <= t; ++u) {
      double s = 0.0;
      for (std::size_t r = 0; r < leaders; ++r) s += x(static_cast<Eigen::Index>(order[r]), static_cast<Eigen::Index>(u));
      leader_mean[u] = s / static_cast<double>(leaders);
    }
    const double position =
        sign_of(ewma(std::span<const double>(leader_mean).subspan(from, t - from + 1), config.lookback));
    const auto realized = static_cast<Eigen::Index>(t + delta);
    double lead_ret = 0.0;
    double lag_ret = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = x(static_cast<Eigen::Index>(order[r]), realized);
      (r < leaders ? lead_ret : lag_ret) += v;
    }
    lead_ret /= static_cast<double>(leaders);
    lag_ret /= static_cast<double>(n - leaders);
    const std::string& date = panel.times()[t + delta];
    result.laggers.dates.push_back(date);
    result.leaders.dates.push_back(date);
    result.laggers.raw.push_back(position * lag_ret);
    result.leaders.raw.push_back(position * lead_ret);
  }
  result.laggers.rescaled = rescale_pnl(result.laggers.raw, config.target_vol);
  result.leaders.rescaled = rescale_pnl(result.leaders.raw, config.target_vol);
  return result;
}

StrategyResult run_strategy(const TimeSeriesPanel& panel, const StrategyConfig& config, int jobs) {
  config.validate();
  require(panel.length() >= config.window_length + config.horizon, ErrorCode::kInvalidInput,
          "panel of length " + std::to_string(panel.length()) + " is shorter than l + delta");
  leader_count(panel.series_count(), config.leader_fraction);
  const RollingRanking ranking =
      rolling_rankings(panel, config, panel.length() - 1 - config.horizon, jobs);
  return evaluate_strategy(panel, ranking, config);
}

double expected_returns(std::span<const double> pnl) {
  require_series(pnl);
  return mean_of(pnl) * kTradingDays;
}

double annualized_volatility(std::span<const double> pnl) {
  require_series(pnl);
  return stdev_of(pnl) * std::sqrt(kTradingDays);
}

double downside_deviation(std::span<const double> pnl) {
  require_series(pnl);
  double ss = 0.0;
  for (double v : pnl) ss += v < 0.0 ? v * v : 0.0;
  return std::sqrt(kTradingDays) * std::sqrt(ss / static_cast<double>(pnl.size()));
}

double max_drawdown(std::span<const double> pnl) {
  require_series(pnl);
  double cum = 0.0;
  double peak = 0.0;
  double worst = 0.0;
  for (double v : pnl) {
    cum += v;
    peak = std::max(peak, cum);
    worst = std::min(worst, cum - peak);
  }
  return worst;
}

double sortino_ratio(std::span<const double> pnl) {
  const double dd = downside_deviation(pnl);
  require(dd > 0.0, ErrorCode::kUndefinedMetric, "Sortino ratio undefined without losing days");
  return expected_returns(pnl) / dd;
}

double calmar_ratio(std::span<const double> pnl) {
  const double mdd = max_drawdown(pnl);
  require(mdd < 0.0, ErrorCode::kUndefinedMetric, "Calmar ratio undefined with zero drawdown");
  return expected_returns(pnl) / std::abs(mdd);
}

double hit_rate(std::span<const double> pnl) {
  require_series(pnl);
  const auto wins = std::count_if(pnl.begin(), pnl.end(), [](double v) { return v > 0.0; });
  return static_cast<double>(wins) / static_cast<double>(pnl.size());
}

double profit_loss_ratio(std::span<const double> pnl) {
  require_series(pnl);
  double gain = 0.0;
  double loss = 0.0;
  std::size_t gains = 0;
  std::size_t losses = 0;
  for (double v : pnl) {
    if (v > 0.0) {
      gain += v;
      ++gains;
    } else if (v < 0.0) {
      loss += v;
      ++losses;
    }
  }
  require(gains > 0 && losses > 0, ErrorCode::kUndefinedMetric,
          "average profit over average loss needs both winning and losing days");
  return (gain / static_cast<double>(gains)) / std::abs(loss / static_cast<double>(losses));
}

double pnl_per_trade(std::span<const double> pnl) {
  require_series(pnl);
  return mean_of(pnl) * 1e4;
}

double sharpe_ratio(std::span<const double> pnl) {
  require_series(pnl);
  const double sd = stdev_of(pnl);
  require(sd > 0.0, ErrorCode::kDegeneratePnl, "Sharpe ratio of a zero-variance series");
  return mean_of(pnl) / sd * std::sqrt(kTradingDays);
}

SharpeTest sharpe_significance(std::span<const double> pnl) {
  require(pnl.size() >= 4, ErrorCode::kInvalidInput,
          "significance test needs at least four observations");
  require_series(pnl);
  const double m = mean_of(pnl);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : pnl) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const auto t = static_cast<double>(pnl.size());
  m2 /= t;
  m3 /= t;
  m4 /= t;
  require(m2 > 0.0, ErrorCode::kDegeneratePnl, "significance test of a zero-variance series");
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double sr = m / stdev_of(pnl);
  const double disc = 1.0 - skew * sr + (kurt - 1.0) * sr * sr / 4.0;
  require(disc > 0.0, ErrorCode::kNumericDomain, "nonpositive variance term in the Sharpe test");
  SharpeTest out;
  out.statistic = sr * std::sqrt(t - 1.0) / std::sqrt(disc);
  out.p_value = std::erfc(std::abs(out.statistic) / std::sqrt(2.0));
  return out;
}

BacktestReport performance_report(const PnLSeries& pnl) {
  const std::span<const double> x(pnl.rescaled);
  require_series(x);
  require(stdev_of(x) > 0.0, ErrorCode::kDegeneratePnl, "report on a zero-variance series");
  BacktestReport r;
  r.e_returns = expected_returns(x);
  r.volatility = annualized_volatility(x);
  r.downside_deviation = downside_deviation(x);
  r.max_drawdown = max_drawdown(x);
  r.sortino = optional_metric(&sortino_ratio, x);
  r.calmar = optional_metric(&calmar_ratio, x);
  r.hit_rate = hit_rate(x);
  r.avg_profit_over_avg_loss = optional_metric(&profit_loss_ratio, x);
  r.pnl_per_trade = pnl_per_trade(x);
  r.sharpe = sharpe_ratio(x);
  if (x.size() >= 4) {
    const SharpeTest test = sharpe_significance(x);
    r.sharpe_stat = test.statistic;
    r.p_value = test.p_value;
  }
  return r;
}

std::vector<GridRow> run_grid(const TimeSeriesPanel& panel, const StrategyConfig& base,
                              const GridSpec& grid, int jobs) {
  require(!grid.methods.empty() && !grid.lookbacks.empty() && !grid.horizons.empty() &&
              !grid.leader_fractions.empty(),
          ErrorCode::kInvalidParameter, "every grid axis needs at least one value");
  const std::size_t max_horizon = *std::max_element(grid.horizons.begin(), grid.horizons.end());
  const std::size_t min_horizon = *std::min_element(grid.horizons.begin(), grid.horizons.end());
  require(min_horizon >= 1 && panel.length() >= base.window_length + max_horizon,
          ErrorCode::kInvalidInput, "panel is shorter than l plus the largest horizon");
  std::vector<GridRow> rows;
  for (StrategyMethod method : grid.methods) {
    StrategyConfig cfg = base;
    cfg.method = method;
    cfg.horizon = min_horizon;
    const RollingRanking ranking =
        rolling_rankings(panel, cfg, panel.length() - 1 - min_horizon, jobs);
    for (std::size_t p : grid.lookbacks) {
      for (std::size_t delta : grid.horizons) {
        for (double fraction : grid.leader_fractions) {
          cfg.lookback = p;
          cfg.horizon = delta;
          cfg.leader_fraction = fraction;
          const StrategyResult res = evaluate_strategy(panel, ranking, cfg);
          rows.push_back({method, p, delta, fraction, performance_report(res.laggers),
                          performance_report(res.leaders)});
        }
      }
    }
  }
  return rows;
}

}  // namespace leadlag
