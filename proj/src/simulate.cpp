#include "leadlag/simulate.hpp"

#include "leadlag/error.hpp"
#include "leadlag/rng.hpp"

#include <cmath>
#include <map>
#include <random>
#include <utility>

namespace leadlag {

std::vector<int> FactorDesign::membership() const {
  std::vector<int> out(series_count(), -1);
  for (Eigen::Index i = 0; i < loadings.rows(); ++i) {
    int nonzero = 0;
    for (Eigen::Index j = 0; j < loadings.cols(); ++j) {
      if (loadings(i, j) != 0.0) {
        ++nonzero;
        out[static_cast<std::size_t>(i)] = static_cast<int>(j);
      }
    }
    require(nonzero == 1, ErrorCode::kUnsupportedModel,
            "series " + std::to_string(i) + " loads on " + std::to_string(nonzero) +
                " factors; only single membership is supported");
  }
  return out;
}

void FactorDesign::validate() const {
  require(loadings.rows() >= 1 && loadings.cols() >= 1, ErrorCode::kDimension,
          "design needs at least one series and one factor");
  require(lags.rows() == loadings.rows() && lags.cols() == loadings.cols(), ErrorCode::kDimension,
          "lag and loading matrices differ in shape");
  require(loadings.allFinite(), ErrorCode::kInvalidInput, "loadings must be finite");
  require(max_lag >= 0, ErrorCode::kInvalidParameter, "maximum lag must be nonnegative");
  for (Eigen::Index i = 0; i < lags.rows(); ++i) {
    for (Eigen::Index j = 0; j < lags.cols(); ++j) {
      require(lags(i, j) >= 0 && lags(i, j) <= max_lag, ErrorCode::kInvalidParameter,
              "lag L(" + std::to_string(i) + ", " + std::to_string(j) + ") outside [0, M]");
      require(loadings(i, j) != 0.0 || lags(i, j) == 0, ErrorCode::kInvalidParameter,
              "lag set where the loading is zero");
    }
  }
}

FactorDesign preset_design(int factors, int series_count) {
  require(factors >= 1 && factors <= 3, ErrorCode::kInvalidParameter,
          "preset designs exist for k in {1, 2, 3}, got " + std::to_string(factors));
  require(series_count >= factors && series_count % factors == 0, ErrorCode::kInvalidParameter,
          "n=" + std::to_string(series_count) + " must be a positive multiple of k=" +
              std::to_string(factors));
  static const std::vector<int> kPatterns[] = {{0, 1, 2, 3, 4, 5}, {0, 2, 4}, {0, 3}};
  const std::vector<int>& pattern = kPatterns[factors - 1];
  const int block = series_count / factors;

  FactorDesign design;
  design.loadings = Matrix::Zero(series_count, factors);
  design.lags = IntMatrix::Zero(series_count, factors);
  design.max_lag = 5;
  for (int i = 0; i < series_count; ++i) {
    const int f = i / block;
    design.loadings(i, f) = 1.0;
    design.lags(i, f) = pattern[static_cast<std::size_t>((i % block)) % pattern.size()];
  }
  return design;
}

TimeSeriesPanel generate_panel(const FactorDesign& design, std::size_t length, double sigma,
                               std::uint64_t seed, std::uint64_t stream) {
  design.validate();
  require(length > static_cast<std::size_t>(design.max_lag), ErrorCode::kInvalidParameter,
          "T=" + std::to_string(length) + " must exceed the maximum lag M=" +
              std::to_string(design.max_lag));
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::kInvalidParameter,
          "noise sigma must be nonnegative");
  const auto n = static_cast<Eigen::Index>(design.series_count());
  const auto k = static_cast<Eigen::Index>(design.factor_count());
  const auto t_len = static_cast<Eigen::Index>(length);
  const Eigen::Index m = design.max_lag;

  CounterRng rng(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Factor paths carry M leading steps: column t + M holds f(t).
  Matrix factors(k, t_len + m);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index t = 0; t < t_len + m; ++t) factors(j, t) = normal(rng);
  }
  Matrix values(n, t_len);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < t_len; ++t) {
      double x = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (design.loadings(i, j) != 0.0) {
          x += design.loadings(i, j) * factors(j, t + m - design.lags(i, j));
        }
      }
      values(i, t) = x + sigma * normal(rng);
    }
  }
  return TimeSeriesPanel(std::move(values));
}

GroundTruth ground_truth(const FactorDesign& design) {
  design.validate();
  const std::vector<int> member = design.membership();
  const auto n = static_cast<Eigen::Index>(design.series_count());
  GroundTruth truth{IntMatrix::Zero(n, n), BoolMatrix::Constant(n, n, false)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const int f = member[static_cast<std::size_t>(i)];
      if (i == j || f != member[static_cast<std::size_t>(j)]) continue;
      truth.psi(i, j) = design.lags(j, f) - design.lags(i, f);
      truth.mask(i, j) = true;
    }
  }
  return truth;
}

IntMatrix error_matrix(const LeadLagMatrix& gamma, const GroundTruth& truth) {
  require(gamma.gamma.rows() == truth.psi.rows() && gamma.gamma.cols() == truth.psi.cols(),
          ErrorCode::kDimension, "lead-lag and ground-truth matrices differ in size");
  return gamma.gamma - truth.psi;
}

double lag_mse(const IntMatrix& errors, const BoolMatrix& mask) {
  require(errors.rows() == errors.cols() && mask.rows() == errors.rows() &&
              mask.cols() == errors.cols(),
          ErrorCode::kDimension, "error matrix and mask must be square and equal in size");
  double total = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < errors.cols(); ++j) {
      if (!mask(i, j)) continue;
      const double e = errors(i, j);
      total += e * e;
      ++count;
    }
  }
  require(count > 0, ErrorCode::kUndefinedStatistic, "MSE over an empty mask");
  return total / static_cast<double>(count);
}

BoolMatrix all_pairs_mask(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  BoolMatrix mask = BoolMatrix::Constant(m, m, true);
  mask.diagonal().setConstant(false);
  return mask;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size(), ErrorCode::kDimension, "label lists differ in length");
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int, int>, std::size_t> joint;
  std::map<int, std::size_t> rows;
  std::map<int, std::size_t> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  double index = 0.0;
  for (const auto& [key, c] : joint) index += choose2(static_cast<double>(c));
  double sum_a = 0.0;
  for (const auto& [key, c] : rows) sum_a += choose2(static_cast<double>(c));
  double sum_b = 0.0;
  for (const auto& [key, c] : cols) sum_b += choose2(static_cast<double>(c));
  const double total = choose2(static_cast<double>(a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;  // both partitions trivial and identical in shape
  return (index - expected) / denom;
}

std::vector<int> true_labels(const FactorDesign& design, const SubsequenceUniverse& universe) {
  require(universe.series_count() == design.series_count(), ErrorCode::kDimension,
          "universe and design disagree on the number of series");
  const std::vector<int> member = design.membership();
  std::map<std::pair<int, long>, int> ids;
  std::vector<int> labels;
  labels.reserve(universe.size());
  for (const WindowOrigin& o : universe.origin()) {
    const int f = member[o.series];
    const long offset = static_cast<long>(o.start) - design.lags(static_cast<Eigen::Index>(o.series), f);
    const auto [it, inserted] = ids.try_emplace({f, offset}, static_cast<int>(ids.size()));
    labels.push_back(it->second);
  }
  return labels;
}

}  // namespace leadlag
