#include "cli.hpp"

#include "leadlag/backtest.hpp"
#include "leadlag/error.hpp"
#include "leadlag/ingest.hpp"
#include "leadlag/lead_lag.hpp"
#include "leadlag/parallel.hpp"
#include "leadlag/rng.hpp"
#include "leadlag/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace leadlag::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

template <typename Derived>
void write_matrix(const fs::path& path, const Eigen::MatrixBase<Derived>& m,
                  const std::vector<std::string>& ids) {
  auto out = open_output(path);
  out << "id";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if constexpr (std::is_integral_v<typename Derived::Scalar>) {
        out << ',' << m(i, j);
      } else {
        out << ',' << num(m(i, j));
      }
    }
    out << '\n';
  }
}

std::vector<std::string> index_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

struct Common {
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--out", common.out, "Output directory (default: $LEADLAG_OUT_DIR or .)");
  sub->add_option("--seed", common.seed, "Master seed")->capture_default_str();
  sub->add_option("--jobs", common.jobs, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

fs::path output_dir(const Common& common) {
  fs::path dir = common.out;
  if (dir.empty()) {
    const char* env = std::getenv("LEADLAG_OUT_DIR");
    dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
  }
  fs::create_directories(dir);
  return dir;
}

Json common_json(const Common& common, const fs::path& dir) {
  return Json{{"out", dir.string()}, {"seed", common.seed}, {"jobs", common.jobs}};
}

template <typename T>
void require_grid(const std::vector<T>& values, const char* flag, bool grid) {
  if (values.empty()) throw UsageError(std::string(flag) + " needs at least one value");
  if (values.size() > 1 && !grid) {
    throw UsageError(std::string(flag) + " has several values; pass --grid to sweep them");
  }
}

CsvLayout parse_layout(const std::string& s) {
  if (s == "wide") return CsvLayout::kWide;
  if (s == "long") return CsvLayout::kLong;
  throw UsageError("layout must be wide or long, got '" + s + "'");
}

WindowScaling parse_scaling(const std::string& s) {
  if (s == "raw") return WindowScaling::kRaw;
  if (s == "standardize") return WindowScaling::kStandardize;
  throw UsageError("scaling must be raw or standardize, got '" + s + "'");
}

DetectMethod parse_method(const std::string& s) {
  const auto m = parse_detect_method(s);
  if (!m) throw UsageError("unknown method '" + s + "' (KM_Mod, KM_Med, SP_Mod, SP_Med)");
  return *m;
}

StrategyMethod parse_strategy(const std::string& s) {
  const auto m = parse_strategy_method(s);
  if (!m) throw UsageError("unknown method '" + s + "' (CCF, KM_Mod, KM_Med, SP_Mod, SP_Med)");
  return *m;
}

struct InputOpts {
  std::string in;
  std::string layout = "wide";
};

void add_input(CLI::App* sub, InputOpts& input) {
  sub->add_option("--in", input.in, "Panel CSV")->required();
  sub->add_option("--layout", input.layout, "wide or long")->capture_default_str();
}

TimeSeriesPanel load_panel(const InputOpts& input) {
  return to_panel(load_csv(input.in, parse_layout(input.layout)));
}

struct ClusterOpts {
  std::size_t q = 10;
  std::size_t s = 1;
  int clusters = 11;
  int theta = 6;
  int restarts = 1;
  std::size_t knn = 0;
  double kernel_sigma = 0.0;
  std::string scaling = "raw";
  bool self_loop_fallback = false;
};

void add_cluster(CLI::App* sub, ClusterOpts& c, bool with_theta = true, bool with_scaling = true) {
  sub->add_option("--q", c.q, "Subsequence length")->capture_default_str();
  sub->add_option("--s", c.s, "Sliding-window shift")->capture_default_str();
  sub->add_option("--K", c.clusters, "Number of clusters")->capture_default_str();
  if (with_theta) sub->add_option("--theta", c.theta, "Voting threshold")->capture_default_str();
  sub->add_option("--restarts", c.restarts, "k-means++ restarts (best inertia wins)")
      ->capture_default_str();
  sub->add_option("--knn", c.knn, "Neighbours in the similarity graph (0: ceil(sqrt(N)))")
      ->capture_default_str();
  sub->add_option("--kernel-sigma", c.kernel_sigma, "Gaussian kernel width (0: 1/N)")
      ->capture_default_str();
  if (!with_scaling) return;
  sub->add_option("--scaling", c.scaling, "Window scaling: raw or standardize")
      ->capture_default_str();
  sub->add_flag("--self-loop-fallback", c.self_loop_fallback,
                "Give isolated graph vertices a unit self-weight");
}

DetectConfig detect_config(const ClusterOpts& c, DetectMethod method, std::uint64_t seed) {
  DetectConfig cfg;
  cfg.window_length = c.q;
  cfg.shift = c.s;
  cfg.clusters = c.clusters;
  cfg.theta = c.theta;
  cfg.method = method;
  cfg.seed = seed;
  if (c.knn > 0) cfg.knn = c.knn;
  if (c.kernel_sigma > 0.0) cfg.kernel_sigma = c.kernel_sigma;
  cfg.scaling = parse_scaling(c.scaling);
  cfg.kmeans.restarts = c.restarts;
  cfg.self_loop_fallback = c.self_loop_fallback;
  cfg.validate();
  return cfg;
}

Json cluster_json(const ClusterOpts& c) {
  return Json{{"q", c.q},
              {"s", c.s},
              {"K", c.clusters},
              {"theta", c.theta},
              {"restarts", c.restarts},
              {"knn", c.knn == 0 ? Json("ceil(sqrt(N))") : Json(c.knn)},
              {"kernel_sigma", c.kernel_sigma == 0.0 ? Json("1/N") : Json(c.kernel_sigma)},
              {"scaling", c.scaling},
              {"self_loop_fallback", c.self_loop_fallback}};
}

void write_ranking(const fs::path& path, const std::vector<RankEntry>& ranking) {
  auto out = open_output(path);
  out << "rank,id,score\n";
  for (const auto& e : ranking) out << e.rank << ',' << e.id << ',' << num(e.score) << '\n';
}

// simulate -------------------------------------------------------------------

struct SimulateOpts {
  std::vector<int> k{1};
  int n = 6;
  std::size_t length = 100;
  std::vector<double> sigma{1.0};
  std::vector<int> theta{6};
  std::vector<std::string> methods{"KM_Mod"};
  int reps = 1;
  bool grid = false;
  ClusterOpts cluster{90, 1, 0, 6, 1, 0, 0.0, "raw", false};
};

struct SimRecord {
  double mse = 0.0;
  double mse_all = 0.0;
  double ari = 0.0;
  bool exact = false;
};

int run_simulate(const SimulateOpts& o, const Common& common) {
  require_grid(o.k, "--k", o.grid);
  require_grid(o.sigma, "--sigma", o.grid);
  require_grid(o.theta, "--theta", o.grid);
  require_grid(o.methods, "--method", o.grid);
  require(o.reps >= 1, ErrorCode::kInvalidParameter, "--reps must be at least 1");
  std::vector<DetectMethod> methods;
  for (const auto& m : o.methods) methods.push_back(parse_method(m));
  for (double s : o.sigma) {
    require(s >= 0.0, ErrorCode::kInvalidParameter, "noise sigma must be nonnegative");
  }
  for (int t : o.theta) require(t >= 1, ErrorCode::kInvalidParameter, "theta must be at least 1");
  std::vector<FactorDesign> designs;
  for (int k : o.k) designs.push_back(preset_design(k, o.n));
  const fs::path dir = output_dir(common);

  const std::size_t nk = o.k.size();
  const std::size_t ns = o.sigma.size();
  const std::size_t nt = o.theta.size();
  const std::size_t nm = methods.size();
  const auto reps = static_cast<std::size_t>(o.reps);
  // Index: ((((k * ns + sigma) * reps + rep) * nt + theta) * nm + method).
  std::vector<SimRecord> records(nk * ns * reps * nt * nm);
  std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, IntMatrix> errors;
  std::mutex errors_mutex;

  parallel_for(nk * ns * reps, common.jobs, [&](std::size_t job) {
    const std::size_t rep = job % reps;
    const std::size_t si = (job / reps) % ns;
    const std::size_t ki = job / (reps * ns);
    const int k = o.k[ki];
    const FactorDesign& design = designs[ki];
    const GroundTruth truth = ground_truth(design);
    const BoolMatrix all = all_pairs_mask(design.series_count());
    const std::uint64_t setting_seed = derive_seed(common.seed, static_cast<std::uint64_t>(k));
    const TimeSeriesPanel panel = generate_panel(design, o.length, o.sigma[si], setting_seed, rep);
    ClusterOpts c = o.cluster;
    if (c.clusters == 0) c.clusters = 11 * k;
    for (bool spectral_family : {false, true}) {
      std::vector<std::size_t> members;
      for (std::size_t mi = 0; mi < nm; ++mi) {
        if (uses_spectral(methods[mi]) == spectral_family) members.push_back(mi);
      }
      if (members.empty()) continue;
      const DetectConfig cfg = detect_config(c, methods[members.front()], derive_seed(setting_seed, rep));
      const SubsequenceUniverse universe = extract_subsequences(panel, cfg.window_length, cfg.shift, cfg.scaling);
      const ClusterAssignment assignment = cluster_universe(universe, cfg);
      const double ari = adjusted_rand_index(assignment.labels, true_labels(design, universe));
      const LagMultisets multisets = pair_lag_multisets(assignment, universe);
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const VotingMatrix votes = voting_matrix(multisets, o.theta[ti]);
        for (std::size_t mi : members) {
          const LeadLagMatrix gamma = lead_lag_matrix(multisets, votes, aggregation_of(methods[mi]));
          const IntMatrix err = error_matrix(gamma, truth);
          SimRecord& r = records[(((ki * ns + si) * reps + rep) * nt + ti) * nm + mi];
          r.mse = lag_mse(err, truth.mask);
          r.mse_all = lag_mse(err, all);
          r.ari = ari;
          r.exact = err.cwiseAbs().maxCoeff() == 0;
          if (rep == 0) {
            std::lock_guard lock(errors_mutex);
            errors.emplace(std::tuple{ki, si, ti, mi}, err);
          }
        }
      }
    }
  });

  auto setting = [&](std::size_t ki) {
    return "k" + std::to_string(o.k[ki]) + "_n" + std::to_string(o.n);
  };
  auto sweep = open_output(dir / "sweep.csv");
  sweep << "setting,sigma,theta,method,repetition,mse,mse_all,ari,exact\n";
  auto summary = open_output(dir / "summary.csv");
  summary << "setting,sigma,theta,method,repetitions,exact_count,mse_mean,mse_all_mean,ari_mean\n";
  for (std::size_t ki = 0; ki < nk; ++ki) {
    for (std::size_t si = 0; si < ns; ++si) {
      for (std::size_t ti = 0; ti < nt; ++ti) {
        for (std::size_t mi = 0; mi < nm; ++mi) {
          double mse = 0.0;
          double mse_all = 0.0;
          double ari = 0.0;
          std::size_t exact = 0;
          for (std::size_t rep = 0; rep < reps; ++rep) {
            const SimRecord& r = records[(((ki * ns + si) * reps + rep) * nt + ti) * nm + mi];
            sweep << setting(ki) << ',' << num(o.sigma[si]) << ',' << o.theta[ti] << ','
                  << to_string(methods[mi]) << ',' << rep << ',' << num(r.mse) << ','
                  << num(r.mse_all) << ',' << num(r.ari) << ',' << (r.exact ? 1 : 0) << '\n';
            mse += r.mse;
            mse_all += r.mse_all;
            ari += r.ari;
            exact += r.exact;
          }
          const auto count = static_cast<double>(reps);
          summary << setting(ki) << ',' << num(o.sigma[si]) << ',' << o.theta[ti] << ','
                  << to_string(methods[mi]) << ',' << reps << ',' << exact << ','
                  << num(mse / count) << ',' << num(mse_all / count) << ',' << num(ari / count)
                  << '\n';
        }
      }
    }
  }
  const bool single = nk == 1 && ns == 1 && nt == 1;
  for (const auto& [key, err] : errors) {
    const auto [ki, si, ti, mi] = key;
    std::string name = "error_matrix_" + std::string(to_string(methods[mi]));
    if (!single) {
      name += "_k" + std::to_string(o.k[ki]) + "_sigma" + num(o.sigma[si]) + "_theta" +
              std::to_string(o.theta[ti]);
    }
    write_matrix(dir / (name + ".csv"), err, index_ids(static_cast<std::size_t>(err.rows())));
  }

  Json cfg{{"command", "simulate"}};
  cfg.update(common_json(common, dir));
  cfg["k"] = o.k;
  cfg["n"] = o.n;
  cfg["T"] = o.length;
  cfg["sigma"] = o.sigma;
  cfg["theta"] = o.theta;
  cfg["method"] = o.methods;
  cfg["reps"] = o.reps;
  cfg["grid"] = o.grid;
  Json cj = cluster_json(o.cluster);
  cj.erase("theta");
  if (o.cluster.clusters == 0) cj["K"] = "11*k";
  cfg.update(cj);
  write_json(dir / "config.json", cfg);
  return kOk;
}

// detect / ccf / rank --------------------------------------------------------

struct DetectOpts {
  InputOpts input;
  std::string method = "KM_Mod";
  ClusterOpts cluster;
};

int run_detect(const DetectOpts& o, const Common& common) {
  const DetectConfig cfg = detect_config(o.cluster, parse_method(o.method), common.seed);
  const TimeSeriesPanel panel = load_panel(o.input);
  const Detection det = detect_detailed(panel, cfg);
  const fs::path dir = output_dir(common);
  const auto& ids = panel.ids();
  write_matrix(dir / "gamma.csv", det.gamma.gamma, ids);
  write_matrix(dir / "votes.csv", det.votes.counts, ids);
  {
    auto out = open_output(dir / "lags.csv");
    out << "i,j,lag,count\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        std::map<int, std::size_t> hist;
        for (int lag : det.multisets.lags(i, j)) ++hist[lag];
        for (const auto& [lag, count] : hist) {
          out << ids[i] << ',' << ids[j] << ',' << lag << ',' << count << '\n';
        }
      }
    }
  }
  {
    auto out = open_output(dir / "assignment.csv");
    out << "series,start,cluster\n";
    for (std::size_t r = 0; r < det.universe.size(); ++r) {
      const WindowOrigin& w = det.universe.origin()[r];
      out << ids[w.series] << ',' << w.start << ',' << det.assignment.labels[r] << '\n';
    }
  }
  Json j{{"command", "detect"}};
  j.update(common_json(common, dir));
  j["in"] = o.input.in;
  j["layout"] = o.input.layout;
  j["method"] = o.method;
  j.update(cluster_json(o.cluster));
  write_json(dir / "config.json", j);
  return kOk;
}

struct CcfOpts {
  InputOpts input;
  std::size_t max_lag = 5;
};

int run_ccf(const CcfOpts& o, const Common& common) {
  const TimeSeriesPanel panel = load_panel(o.input);
  const ScoreMatrix gamma = ccf_lead_lag_matrix(panel, o.max_lag);
  const fs::path dir = output_dir(common);
  write_matrix(dir / "gamma.csv", gamma.gamma, gamma.ids);
  write_ranking(dir / "ranking.csv", rowsum_rank(gamma));
  Json j{{"command", "ccf"}};
  j.update(common_json(common, dir));
  j["in"] = o.input.in;
  j["layout"] = o.input.layout;
  j["M"] = o.max_lag;
  write_json(dir / "config.json", j);
  return kOk;
}

struct RankOpts {
  InputOpts input;
  std::string method = "SP_Med";
  std::size_t max_lag = 5;
  ClusterOpts cluster{16, 1, 11, 3, 1, 0, 0.0, "raw", false};
};

int run_rank(const RankOpts& o, const Common& common) {
  const StrategyMethod method = parse_strategy(o.method);
  const TimeSeriesPanel panel = load_panel(o.input);
  std::vector<RankEntry> ranking;
  const fs::path dir = output_dir(common);
  if (method == StrategyMethod::kCcf) {
    const ScoreMatrix gamma = ccf_lead_lag_matrix(panel, o.max_lag);
    write_matrix(dir / "gamma.csv", gamma.gamma, gamma.ids);
    ranking = rowsum_rank(gamma);
  } else {
    const DetectConfig cfg = detect_config(o.cluster, parse_method(o.method), common.seed);
    const LeadLagMatrix gamma = detect(panel, cfg);
    write_matrix(dir / "gamma.csv", gamma.gamma, gamma.ids);
    ranking = rowsum_rank(gamma);
  }
  write_ranking(dir / "ranking.csv", ranking);
  Json j{{"command", "rank"}};
  j.update(common_json(common, dir));
  j["in"] = o.input.in;
  j["layout"] = o.input.layout;
  j["method"] = o.method;
  j["M"] = o.max_lag;
  j.update(cluster_json(o.cluster));
  write_json(dir / "config.json", j);
  return kOk;
}

// backtest -------------------------------------------------------------------

struct BacktestOpts {
  InputOpts input;
  std::vector<std::string> methods{"KM_Mod"};
  std::size_t window = 21;
  std::vector<double> fractions{0.75};
  std::vector<std::size_t> lookbacks{7};
  std::vector<std::size_t> horizons{7};
  double target_vol = 0.15;
  std::size_t max_lag = 5;
  bool grid = false;
  ClusterOpts cluster{10, 1, 11, 6, 1, 0, 0.0, "raw", false};
};

Json report_json(const BacktestReport& r) {
  return Json{{"e_returns", r.e_returns},
              {"volatility", r.volatility},
              {"downside_deviation", r.downside_deviation},
              {"max_drawdown", r.max_drawdown},
              {"sortino", optional_json(r.sortino)},
              {"calmar", optional_json(r.calmar)},
              {"hit_rate", r.hit_rate},
              {"avg_profit_over_avg_loss", optional_json(r.avg_profit_over_avg_loss)},
              {"pnl_per_trade", r.pnl_per_trade},
              {"sharpe", r.sharpe},
              {"sharpe_stat", r.sharpe_stat},
              {"p_value", r.p_value}};
}

std::string csv_optional(const std::optional<double>& v) { return v ? num(*v) : ""; }

void write_pnl(const fs::path& path, const PnLSeries& pnl) {
  auto out = open_output(path);
  out << "date,raw,rescaled,cumulative\n";
  const Series cum = pnl.cumulative();
  for (std::size_t t = 0; t < pnl.raw.size(); ++t) {
    out << pnl.dates[t] << ',' << num(pnl.raw[t]) << ',' << num(pnl.rescaled[t]) << ','
        << num(cum[t]) << '\n';
  }
}

int run_backtest(const BacktestOpts& o, const Common& common) {
  require_grid(o.methods, "--method", o.grid);
  require_grid(o.fractions, "--fraction", o.grid);
  require_grid(o.lookbacks, "--p", o.grid);
  require_grid(o.horizons, "--delta", o.grid);
  StrategyConfig base;
  base.window_length = o.window;
  base.sts_length = o.cluster.q;
  base.shift = o.cluster.s;
  base.clusters = o.cluster.clusters;
  base.theta = o.cluster.theta;
  base.method = parse_strategy(o.methods.front());
  base.leader_fraction = o.fractions.front();
  base.lookback = o.lookbacks.front();
  base.horizon = o.horizons.front();
  base.ccf_max_lag = o.max_lag;
  base.target_vol = o.target_vol;
  base.seed = common.seed;
  base.kmeans.restarts = o.cluster.restarts;
  if (o.cluster.knn > 0) base.knn = o.cluster.knn;
  if (o.cluster.kernel_sigma > 0.0) base.kernel_sigma = o.cluster.kernel_sigma;
  GridSpec spec;
  for (const auto& m : o.methods) spec.methods.push_back(parse_strategy(m));
  spec.lookbacks = o.lookbacks;
  spec.horizons = o.horizons;
  spec.leader_fractions = o.fractions;
  for (StrategyMethod m : spec.methods) {
    StrategyConfig c = base;
    c.method = m;
    for (double f : spec.leader_fractions) {
      c.leader_fraction = f;
      for (std::size_t p : spec.lookbacks) {
        c.lookback = p;
        for (std::size_t d : spec.horizons) {
          c.horizon = d;
          c.validate();
        }
      }
    }
  }
  const TimeSeriesPanel panel = load_panel(o.input);
  const fs::path dir = output_dir(common);

  Json cfg{{"command", "backtest"}};
  cfg.update(common_json(common, dir));
  cfg["in"] = o.input.in;
  cfg["layout"] = o.input.layout;
  cfg["method"] = o.methods;
  cfg["l"] = o.window;
  cfg["leader_fraction"] = o.fractions;
  cfg["p"] = o.lookbacks;
  cfg["delta"] = o.horizons;
  cfg["target_vol"] = o.target_vol;
  cfg["M"] = o.max_lag;
  cfg["grid"] = o.grid;
  cfg.update(cluster_json(o.cluster));
  cfg.erase("scaling");
  cfg.erase("self_loop_fallback");

  if (!o.grid) {
    const StrategyResult res = run_strategy(panel, base, common.jobs);
    write_pnl(dir / "pnl_laggers.csv", res.laggers);
    write_pnl(dir / "pnl_leaders.csv", res.leaders);
    Json report{{"config", cfg},
                {"laggers", report_json(performance_report(res.laggers))},
                {"leaders", report_json(performance_report(res.leaders))}};
    write_json(dir / "report.json", report);
  } else {
    const std::vector<GridRow> rows = run_grid(panel, base, spec, common.jobs);
    auto out = open_output(dir / "grid.csv");
    out << "method,p,delta,leader_fraction,basket,e_returns,volatility,downside_deviation,"
           "max_drawdown,sortino,calmar,hit_rate,avg_profit_over_avg_loss,pnl_per_trade,sharpe,"
           "sharpe_stat,p_value\n";
    for (const GridRow& row : rows) {
      for (const auto& [basket, r] : {std::pair{"laggers", &row.laggers}, std::pair{"leaders", &row.leaders}}) {
        out << to_string(row.method) << ',' << row.lookback << ',' << row.horizon << ','
            << num(row.leader_fraction) << ',' << basket << ',' << num(r->e_returns) << ','
            << num(r->volatility) << ',' << num(r->downside_deviation) << ','
            << num(r->max_drawdown) << ',' << csv_optional(r->sortino) << ','
            << csv_optional(r->calmar) << ',' << num(r->hit_rate) << ','
            << csv_optional(r->avg_profit_over_avg_loss) << ',' << num(r->pnl_per_trade) << ','
            << num(r->sharpe) << ',' << num(r->sharpe_stat) << ',' << num(r->p_value) << '\n';
      }
    }
  }
  write_json(dir / "config.json", cfg);
  return kOk;
}

// preprocess -----------------------------------------------------------------

struct PreprocessOpts {
  InputOpts input;
  std::string kind = "equity";
  std::string market;
  double day_zero_frac = 0.10;
  double asset_zero_frac = 0.50;
  std::size_t max_zero_days = 160;
  double winsor = 0.15;
};

int run_preprocess(const PreprocessOpts& o, const Common& common) {
  if (o.kind != "equity" && o.kind != "futures") {
    throw UsageError("--kind must be equity or futures, got '" + o.kind + "'");
  }
  const RawTable raw = load_csv(o.input.in, parse_layout(o.input.layout));
  const Preprocessed result =
      o.kind == "equity"
          ? preprocess_equity(raw, o.market, EquityRules{o.day_zero_frac, o.asset_zero_frac, o.winsor})
          : preprocess_futures(raw, o.market, FuturesRules{o.day_zero_frac, o.max_zero_days, o.winsor});
  const fs::path dir = output_dir(common);
  save_csv(dir / "panel.csv", result.panel);
  Json drops = Json::array();
  for (const DropEntry& d : result.drops) {
    drops.push_back(Json{{"kind", to_string(d.kind)}, {"label", d.label}, {"rule", d.rule}, {"value", d.value}});
  }
  Json cfg{{"command", "preprocess"}};
  cfg.update(common_json(common, dir));
  cfg["in"] = o.input.in;
  cfg["layout"] = o.input.layout;
  cfg["kind"] = o.kind;
  cfg["market"] = o.market;
  cfg["day_zero_frac"] = o.day_zero_frac;
  if (o.kind == "equity") {
    cfg["asset_zero_frac"] = o.asset_zero_frac;
  } else {
    cfg["max_zero_days"] = o.max_zero_days;
  }
  cfg["winsor"] = o.winsor;
  write_json(dir / "drops.json", Json{{"config", cfg}, {"dropped", drops}});
  write_json(dir / "config.json", cfg);
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kDuplicateKey:
    case ErrorCode::kNonMonotone:
    case ErrorCode::kMissingSeries:
    case ErrorCode::kEmptyPanel:
    case ErrorCode::kUnfillable:
    case ErrorCode::kIo:
    case ErrorCode::kDegeneratePnl:
      return kData;
    default:
      return kValidation;
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Lead-lag detection, benchmarking and backtesting for multivariate time series"};
  app.require_subcommand(1);
  Common common;

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "Synthetic recovery experiments (MSE and ARI sweeps)");
  add_common(simulate, common);
  simulate->add_option("--k", sim.k, "Number of factors (1, 2 or 3)")->delimiter(',')->capture_default_str();
  simulate->add_option("--n", sim.n, "Number of series")->capture_default_str();
  simulate->add_option("--T", sim.length, "Series length")->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "Noise level")->delimiter(',')->capture_default_str();
  simulate->add_option("--theta", sim.theta, "Voting threshold")->delimiter(',')->capture_default_str();
  simulate->add_option("--method", sim.methods, "KM_Mod, KM_Med, SP_Mod, SP_Med")
      ->delimiter(',')
      ->capture_default_str();
  simulate->add_option("--reps", sim.reps, "Repetitions per setting")->capture_default_str();
  simulate->add_flag("--grid", sim.grid, "Sweep the cross product of list-valued flags");
  add_cluster(simulate, sim.cluster, false);
  simulate->get_option("--K")->description("Number of clusters (0: 11*k)");

  DetectOpts det;
  auto* detect_cmd = app.add_subcommand("detect", "Lead-lag matrix of a panel by subsequence clustering");
  add_common(detect_cmd, common);
  add_input(detect_cmd, det.input);
  detect_cmd->add_option("--method", det.method, "KM_Mod, KM_Med, SP_Mod, SP_Med")->capture_default_str();
  add_cluster(detect_cmd, det.cluster);

  CcfOpts cc;
  auto* ccf_cmd = app.add_subcommand("ccf", "Cross-correlation benchmark lead-lag matrix");
  add_common(ccf_cmd, common);
  add_input(ccf_cmd, cc.input);
  ccf_cmd->add_option("--M", cc.max_lag, "Maximum lag")->capture_default_str();

  BacktestOpts bt;
  auto* backtest = app.add_subcommand("backtest", "Rolling leader/lagger strategy");
  add_common(backtest, common);
  add_input(backtest, bt.input);
  backtest->add_option("--method", bt.methods, "CCF, KM_Mod, KM_Med, SP_Mod, SP_Med")
      ->delimiter(',')
      ->capture_default_str();
  backtest->add_option("--l", bt.window, "Rolling window length")->capture_default_str();
  backtest->add_option("--fraction", bt.fractions, "Leader fraction")->delimiter(',')->capture_default_str();
  backtest->add_option("--p", bt.lookbacks, "EWMA lookback")->delimiter(',')->capture_default_str();
  backtest->add_option("--delta", bt.horizons, "Holding horizon")->delimiter(',')->capture_default_str();
  backtest->add_option("--target-vol", bt.target_vol, "Annualized volatility target")->capture_default_str();
  backtest->add_option("--M", bt.max_lag, "Maximum lag for the CCF method")->capture_default_str();
  backtest->add_flag("--grid", bt.grid, "Sweep method x p x delta x fraction");
  add_cluster(backtest, bt.cluster, true, false);

  RankOpts rk;
  auto* rank = app.add_subcommand("rank", "RowSum ranking of a panel from most leading to most lagging");
  add_common(rank, common);
  add_input(rank, rk.input);
  rank->add_option("--method", rk.method, "CCF, KM_Mod, KM_Med, SP_Mod, SP_Med")->capture_default_str();
  rank->add_option("--M", rk.max_lag, "Maximum lag for the CCF method")->capture_default_str();
  add_cluster(rank, rk.cluster);

  PreprocessOpts pp;
  auto* preprocess = app.add_subcommand("preprocess", "Clean a raw equity or futures table");
  add_common(preprocess, common);
  add_input(preprocess, pp.input);
  preprocess->add_option("--kind", pp.kind, "equity (returns) or futures (prices)")->capture_default_str();
  preprocess->add_option("--market", pp.market, "Market series id")->required();
  preprocess->add_option("--day-zero-frac", pp.day_zero_frac, "Drop days above this zero fraction")
      ->capture_default_str();
  preprocess->add_option("--asset-zero-frac", pp.asset_zero_frac, "Drop equities above this zero fraction")
      ->capture_default_str();
  preprocess->add_option("--max-zero-days", pp.max_zero_days, "Drop futures with more zero-price days")
      ->capture_default_str();
  preprocess->add_option("--winsor", pp.winsor, "Winsorization bound")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, common);
    if (*detect_cmd) return run_detect(det, common);
    if (*ccf_cmd) return run_ccf(cc, common);
    if (*backtest) return run_backtest(bt, common);
    if (*rank) return run_rank(rk, common);
    if (*preprocess) return run_preprocess(pp, common);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace leadlag::cli
