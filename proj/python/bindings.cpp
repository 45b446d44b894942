#include "leadlag/backtest.hpp"
#include "leadlag/cluster.hpp"
#include "leadlag/error.hpp"
#include "leadlag/lead_lag.hpp"
#include "leadlag/simulate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace leadlag;

namespace {

DetectMethod method_from(const std::string& name) {
  const auto m = parse_detect_method(name);
  if (!m) throw py::value_error("unknown method '" + name + "'");
  return *m;
}

StrategyMethod strategy_from(const std::string& name) {
  const auto m = parse_strategy_method(name);
  if (!m) throw py::value_error("unknown method '" + name + "'");
  return *m;
}

TimeSeriesPanel panel_from(const Matrix& values, std::optional<std::vector<std::string>> ids,
                           std::optional<std::vector<std::string>> dates) {
  if (ids && dates) return TimeSeriesPanel(*ids, *dates, values);
  if (ids) return TimeSeriesPanel(*ids, values);
  if (dates) {
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < values.rows(); ++i) labels.push_back(std::to_string(i));
    return TimeSeriesPanel(labels, *dates, values);
  }
  return TimeSeriesPanel(values);
}

py::dict report_dict(const BacktestReport& r) {
  py::dict d;
  d["e_returns"] = r.e_returns;
  d["volatility"] = r.volatility;
  d["downside_deviation"] = r.downside_deviation;
  d["max_drawdown"] = r.max_drawdown;
  d["sortino"] = r.sortino;
  d["calmar"] = r.calmar;
  d["hit_rate"] = r.hit_rate;
  d["avg_profit_over_avg_loss"] = r.avg_profit_over_avg_loss;
  d["pnl_per_trade"] = r.pnl_per_trade;
  d["sharpe"] = r.sharpe;
  d["sharpe_stat"] = r.sharpe_stat;
  d["p_value"] = r.p_value;
  return d;
}

py::dict pnl_dict(const PnLSeries& p) {
  py::dict d;
  d["dates"] = p.dates;
  d["raw"] = p.raw;
  d["rescaled"] = p.rescaled;
  d["cumulative"] = p.cumulative();
  d["report"] = report_dict(performance_report(p));
  return d;
}

py::list ranking_list(const std::vector<RankEntry>& ranking) {
  py::list out;
  for (const auto& e : ranking) out.append(py::make_tuple(e.rank, e.id, e.score, e.index));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lead-lag detection by subsequence clustering";

  static py::exception<Error> error_type(m, "LeadLagError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  m.def(
      "generate_panel",
      [](int factors, int series, std::size_t length, double sigma, std::uint64_t seed,
         std::uint64_t stream) {
        return generate_panel(preset_design(factors, series), length, sigma, seed, stream).values();
      },
      py::arg("k"), py::arg("n"), py::arg("T"), py::arg("sigma"), py::arg("seed") = 0,
      py::arg("stream") = 0, "Panel (n x T) from the preset lagged factor design.");

  m.def(
      "ground_truth",
      [](int factors, int series) {
        const GroundTruth g = ground_truth(preset_design(factors, series));
        return py::make_tuple(g.psi, g.mask);
      },
      py::arg("k"), py::arg("n"), "(psi, mask) for the preset design.");

  m.def(
      "detect",
      [](const Matrix& values, std::size_t q, std::size_t s, int clusters, int theta,
         const std::string& method, std::uint64_t seed, int restarts,
         std::optional<std::size_t> knn, std::optional<double> kernel_sigma) {
        DetectConfig cfg;
        cfg.window_length = q;
        cfg.shift = s;
        cfg.clusters = clusters;
        cfg.theta = theta;
        cfg.method = method_from(method);
        cfg.seed = seed;
        cfg.kmeans.restarts = restarts;
        cfg.knn = knn;
        cfg.kernel_sigma = kernel_sigma;
        const Detection det = detect_detailed(TimeSeriesPanel(values), cfg);
        py::dict d;
        d["gamma"] = det.gamma.gamma;
        d["votes"] = det.votes.counts;
        d["labels"] = det.assignment.labels;
        return d;
      },
      py::arg("values"), py::arg("q") = 10, py::arg("s") = 1, py::arg("K") = 11,
      py::arg("theta") = 6, py::arg("method") = "KM_Mod", py::arg("seed") = 0,
      py::arg("restarts") = 1, py::arg("knn") = py::none(), py::arg("kernel_sigma") = py::none(),
      "Lead-lag matrix, voting matrix and window labels of an n x T panel.");

  m.def(
      "ccf_lead_lag_matrix",
      [](const Matrix& values, std::size_t max_lag) {
        return ccf_lead_lag_matrix(TimeSeriesPanel(values), max_lag).gamma;
      },
      py::arg("values"), py::arg("M") = 5);

  m.def(
      "rowsum_rank",
      [](const Matrix& gamma, std::vector<std::string> ids) {
        return ranking_list(rowsum_rank(gamma, ids));
      },
      py::arg("gamma"), py::arg("ids") = std::vector<std::string>{},
      "List of (rank, id, score, index), most leading first.");

  m.def(
      "kmeans_pp",
      [](const RowMatrix& points, int clusters, std::uint64_t seed, int restarts) {
        KMeansOptions opts;
        opts.restarts = restarts;
        const ClusterAssignment a = kmeans_pp(points, clusters, seed, opts);
        return py::make_tuple(a.labels, a.inertia.value_or(0.0));
      },
      py::arg("points"), py::arg("K"), py::arg("seed") = 0, py::arg("restarts") = 1);

  m.def(
      "adjusted_rand_index",
      [](const std::vector<int>& a, const std::vector<int>& b) { return adjusted_rand_index(a, b); },
      py::arg("a"), py::arg("b"));

  m.def(
      "ewma", [](const std::vector<double>& x, std::size_t p) { return ewma(x, p); },
      py::arg("x"), py::arg("p"));

  m.def(
      "rescale_pnl",
      [](const std::vector<double>& raw, double target_vol) { return rescale_pnl(raw, target_vol); },
      py::arg("raw"), py::arg("target_vol") = 0.15);

  m.def(
      "performance_report",
      [](const std::vector<double>& rescaled) {
        PnLSeries p;
        p.rescaled = rescaled;
        return report_dict(performance_report(p));
      },
      py::arg("rescaled"));

  m.def(
      "sharpe_significance",
      [](const std::vector<double>& pnl) {
        const SharpeTest t = sharpe_significance(pnl);
        return py::make_tuple(t.statistic, t.p_value);
      },
      py::arg("pnl"), "(statistic, two-sided p-value)");

  m.def(
      "run_strategy",
      [](const Matrix& values, const std::string& method, std::size_t l, std::size_t q, int clusters,
         int theta, double fraction, std::size_t p, std::size_t delta, double target_vol,
         std::size_t max_lag, std::uint64_t seed, int restarts,
         std::optional<std::vector<std::string>> ids, std::optional<std::vector<std::string>> dates) {
        StrategyConfig cfg;
        cfg.method = strategy_from(method);
        cfg.window_length = l;
        cfg.sts_length = q;
        cfg.clusters = clusters;
        cfg.theta = theta;
        cfg.leader_fraction = fraction;
        cfg.lookback = p;
        cfg.horizon = delta;
        cfg.target_vol = target_vol;
        cfg.ccf_max_lag = max_lag;
        cfg.seed = seed;
        cfg.kmeans.restarts = restarts;
        const StrategyResult r = run_strategy(panel_from(values, ids, dates), cfg);
        py::dict d;
        d["laggers"] = pnl_dict(r.laggers);
        d["leaders"] = pnl_dict(r.leaders);
        return d;
      },
      py::arg("values"), py::arg("method") = "KM_Mod", py::arg("l") = 21, py::arg("q") = 10,
      py::arg("K") = 11, py::arg("theta") = 6, py::arg("leader_fraction") = 0.75,
      py::arg("p") = 7, py::arg("delta") = 7, py::arg("target_vol") = 0.15, py::arg("M") = 5,
      py::arg("seed") = 0, py::arg("restarts") = 1, py::arg("ids") = py::none(),
      py::arg("dates") = py::none());
}
