#include "properties.hpp"

#include "cli_harness.hpp"

#include "leadlag/core.hpp"
#include "leadlag/ingest.hpp"

#include <filesystem>

namespace leadlag::testing {

namespace fs = std::filesystem;

namespace {

using Outcome = std::optional<std::string>;

int cli_code(const std::vector<std::string>& args) { return run_cli(args).code; }

fs::path write_panel(Gen& g, const fs::path& dir, std::size_t n, std::size_t length) {
  const TimeSeriesPanel panel(g.lagged_panel(n, length, 3, g.uniform(0.1, 1.0)));
  const fs::path p = dir / "panel.csv";
  save_csv(p.string(), panel);
  return p;
}

std::vector<std::string> random_command(Gen& g, const fs::path& input, const fs::path& out) {
  const std::string seed = std::to_string(g.integer(0, 1 << 20));
  switch (g.integer(0, 3)) {
    case 0:
      return {"simulate", "--k", std::to_string(g.integer(1, 3)), "--n", "6", "--T", std::to_string(g.integer(20, 40)),
              "--q", std::to_string(g.integer(4, 10)), "--K", std::to_string(g.integer(2, 8)), "--theta",
              std::to_string(g.integer(1, 4)), "--sigma", "0.5", "--method", g.coin() ? "KM_Mod" : "SP_Med",
              "--seed", seed, "--out", out.string()};
    case 1:
      return {"detect", "--in", input.string(), "--q", std::to_string(g.integer(3, 8)), "--K",
              std::to_string(g.integer(2, 6)), "--theta", std::to_string(g.integer(1, 4)), "--method",
              g.coin() ? "KM_Med" : "SP_Mod", "--seed", seed, "--out", out.string()};
    case 2:
      return {"ccf", "--in", input.string(), "--M", std::to_string(g.integer(1, 5)), "--out", out.string()};
    default:
      return {"rank", "--in", input.string(), "--q", std::to_string(g.integer(3, 8)), "--K",
              std::to_string(g.integer(2, 6)), "--theta", std::to_string(g.integer(1, 3)), "--seed", seed,
              "--out", out.string()};
  }
}

Outcome cli_byte_identical(Gen& g) {
  TempDir dir;
  const fs::path input = write_panel(g, dir.path(), g.index(2, 5), g.index(20, 40));
  const fs::path out = dir.path() / "out";
  const auto args = random_command(g, input, out);
  const int first = cli_code(args);
  const auto before = snapshot(out);
  fs::remove_all(out);
  const int second = cli_code(args);
  if (first != 0 || second != 0) {
    return args[0] + " exited with " + std::to_string(first) + "/" + std::to_string(second);
  }
  if (snapshot(out) != before) return args[0] + " outputs differ between identical runs";
  return std::nullopt;
}

Outcome cli_config_alongside(Gen& g) {
  TempDir dir;
  const fs::path input = write_panel(g, dir.path(), g.index(2, 5), g.index(20, 40));
  const fs::path out = dir.path() / "out";
  const auto args = random_command(g, input, out);
  if (const int code = cli_code(args); code != 0) return args[0] + " exited with " + std::to_string(code);
  const auto files = snapshot(out);
  if (files.size() < 2) return args[0] + " wrote no results";
  const auto it = files.find("config.json");
  if (it == files.end()) return args[0] + " wrote no config.json";
  if (it->second.find("\"seed\"") == std::string::npos) return args[0] + " config.json has no seed";
  return std::nullopt;
}

Outcome cli_theta_nesting(Gen& g) {
  TempDir dir;
  const fs::path input = write_panel(g, dir.path(), g.index(2, 5), g.index(20, 40));
  const std::string q = std::to_string(g.integer(3, 8));
  const std::string k = std::to_string(g.integer(2, 6));
  const std::string seed = std::to_string(g.integer(0, 1 << 20));
  const std::string method = g.coin() ? "KM_Mod" : "SP_Med";
  auto run_theta = [&](int theta) {
    const fs::path out = dir.path() / ("theta" + std::to_string(theta));
    const int code = cli_code({"detect", "--in", input.string(), "--q", q, "--K", k, "--theta", std::to_string(theta),
                              "--method", method, "--seed", seed, "--out", out.string()});
    return std::make_pair(code, read_cells(out / "gamma.csv"));
  };
  const auto [c1, loose] = run_theta(1);
  const auto [c6, strict] = run_theta(6);
  if (c1 != 0 || c6 != 0) return std::string("detect failed");
  if (loose.size() != strict.size()) return std::string("gamma shapes differ");
  for (std::size_t r = 1; r < strict.size(); ++r) {
    for (std::size_t c = 1; c < strict[r].size(); ++c) {
      if (std::stod(strict[r][c]) != 0.0 && std::stod(loose[r][c]) == 0.0) {
        return "entry (" + strict[r][0] + ", " + strict[0][c] + ") nonzero only at theta=6";
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<Property> cli_properties() {
  return {
      {"cli", "identical invocations give byte-identical outputs", cli_byte_identical},
      {"cli", "every run writes config.json beside its results", cli_config_alongside},
      {"cli", "nonzero entries at theta = 6 are nonzero at theta = 1", cli_theta_nesting},
  };
}

}  // namespace leadlag::testing
