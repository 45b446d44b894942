#include "leadlag/core.hpp"

#include "leadlag/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace leadlag {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kInvalidWindow: return "invalid-window";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kUnsupportedModel: return "unsupported-model";
    case ErrorCode::kUndefinedStatistic: return "undefined-statistic";
    case ErrorCode::kUndefinedCorrelation: return "undefined-correlation";
    case ErrorCode::kDegenerateGraph: return "degenerate-graph";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kInvalidMatrix: return "invalid-matrix";
    case ErrorCode::kDegeneratePnl: return "degenerate-pnl";
    case ErrorCode::kUndefinedMetric: return "undefined-metric";
    case ErrorCode::kNumericDomain: return "numeric-domain";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDuplicateKey: return "duplicate-key";
    case ErrorCode::kNonMonotone: return "non-monotone";
    case ErrorCode::kMissingSeries: return "missing-series";
    case ErrorCode::kEmptyPanel: return "empty-panel";
    case ErrorCode::kUnfillable: return "unfillable";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

std::vector<std::string> counting_labels(std::size_t count) {
  std::vector<std::string> labels;
  labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) labels.push_back(std::to_string(i));
  return labels;
}

}  // namespace

TimeSeriesPanel::TimeSeriesPanel(std::vector<std::string> ids, std::vector<std::string> times,
                                 Matrix values)
    : ids_(std::move(ids)), times_(std::move(times)), values_(std::move(values)) {
  require(static_cast<std::size_t>(values_.rows()) == ids_.size(), ErrorCode::kDimension,
          "panel has " + std::to_string(values_.rows()) + " rows but " +
              std::to_string(ids_.size()) + " ids");
  require(static_cast<std::size_t>(values_.cols()) == times_.size(), ErrorCode::kDimension,
          "panel has " + std::to_string(values_.cols()) + " columns but " +
              std::to_string(times_.size()) + " time labels");
  require(!times_.empty(), ErrorCode::kDimension, "panel length must be at least 1");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    require(seen.insert(id).second, ErrorCode::kInvalidInput, "duplicate series id '" + id + "'");
  }
  require(values_.allFinite(), ErrorCode::kInvalidInput, "panel contains non-finite values");
}

TimeSeriesPanel::TimeSeriesPanel(std::vector<std::string> ids, Matrix values)
    : TimeSeriesPanel(std::move(ids), counting_labels(static_cast<std::size_t>(values.cols())),
                      values) {}

TimeSeriesPanel::TimeSeriesPanel(Matrix values)
    : TimeSeriesPanel(counting_labels(static_cast<std::size_t>(values.rows())),
                      counting_labels(static_cast<std::size_t>(values.cols())), values) {}

Series TimeSeriesPanel::row(std::size_t i) const {
  Series out(length());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
  return out;
}

std::optional<std::size_t> TimeSeriesPanel::index_of(const std::string& id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

TimeSeriesPanel TimeSeriesPanel::slice(std::size_t begin, std::size_t count) const {
  require(count >= 1 && begin + count <= length(), ErrorCode::kDimension,
          "slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
              ") outside panel of length " + std::to_string(length()));
  std::vector<std::string> times(times_.begin() + static_cast<std::ptrdiff_t>(begin),
                                 times_.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return TimeSeriesPanel(ids_, std::move(times),
                         values_.middleCols(static_cast<Eigen::Index>(begin),
                                            static_cast<Eigen::Index>(count)));
}

SubsequenceUniverse::SubsequenceUniverse(RowMatrix windows, std::vector<WindowOrigin> origin,
                                         std::size_t series_count, std::size_t window_length,
                                         std::size_t shift)
    : windows_(std::move(windows)),
      origin_(std::move(origin)),
      series_count_(series_count),
      window_length_(window_length),
      shift_(shift),
      windows_per_series_(series_count == 0 ? 0 : origin_.size() / series_count) {
  require(window_length_ > 0 && shift_ > 0, ErrorCode::kInvalidParameter,
          "window length and shift must be positive");
  require(static_cast<std::size_t>(windows_.rows()) == origin_.size(), ErrorCode::kDimension,
          "window matrix rows do not match origin count");
  require(static_cast<std::size_t>(windows_.cols()) == window_length_, ErrorCode::kDimension,
          "window matrix columns do not match window length");
  require(series_count_ > 0 && origin_.size() == series_count_ * windows_per_series_ &&
              windows_per_series_ > 0,
          ErrorCode::kDimension, "universe size must be a positive multiple of the series count");
  for (std::size_t r = 0; r < origin_.size(); ++r) {
    const WindowOrigin expected{r / windows_per_series_, (r % windows_per_series_) * shift_};
    require(origin_[r] == expected, ErrorCode::kInvalidInput,
            "window " + std::to_string(r) + " has an origin out of sliding-window order");
  }
}

void ReturnConfig::validate() const {
  require(winsor_bound > 0.0, ErrorCode::kInvalidParameter, "winsor bound must be positive");
}

std::size_t windows_per_series(std::size_t length, std::size_t window_length, std::size_t shift) {
  require(window_length > 0, ErrorCode::kInvalidParameter, "window length q must be positive");
  require(shift > 0, ErrorCode::kInvalidParameter, "shift s must be positive");
  require(window_length <= length, ErrorCode::kInvalidWindow,
          "window length q=" + std::to_string(window_length) + " exceeds series length T=" +
              std::to_string(length));
  return (length - window_length) / shift + 1;
}

SubsequenceUniverse extract_subsequences(const TimeSeriesPanel& panel, std::size_t window_length,
                                         std::size_t shift, WindowScaling scaling) {
  const std::size_t h = windows_per_series(panel.length(), window_length, shift);
  const std::size_t n = panel.series_count();
  RowMatrix windows(static_cast<Eigen::Index>(n * h), static_cast<Eigen::Index>(window_length));
  std::vector<WindowOrigin> origin;
  origin.reserve(n * h);
  const Matrix& values = panel.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t z = 0; z < h; ++z) {
      const auto r = static_cast<Eigen::Index>(i * h + z);
      windows.row(r) = values.row(static_cast<Eigen::Index>(i))
                           .segment(static_cast<Eigen::Index>(z * shift),
                                    static_cast<Eigen::Index>(window_length));
      origin.push_back({i, z * shift});
    }
  }
  if (scaling == WindowScaling::kStandardize) {
    // Zero-variance windows are only centered.
    for (Eigen::Index r = 0; r < windows.rows(); ++r) {
      auto w = windows.row(r);
      const double mean = w.mean();
      w.array() -= mean;
      const double norm = w.norm();
      if (window_length > 1 && norm > 0.0) {
        w /= norm / std::sqrt(static_cast<double>(window_length - 1));
      }
    }
  }
  return SubsequenceUniverse(std::move(windows), std::move(origin), n, window_length, shift);
}

Series winsorize(std::span<const double> x, double bound) {
  require(bound > 0.0, ErrorCode::kInvalidParameter, "winsor bound must be positive");
  Series out(x.size());
  std::transform(x.begin(), x.end(), out.begin(),
                 [bound](double v) { return std::clamp(v, -bound, bound); });
  return out;
}

TimeSeriesPanel excess_returns(const TimeSeriesPanel& panel, std::span<const double> market) {
  require(market.size() == panel.length(), ErrorCode::kDimension,
          "market series has length " + std::to_string(market.size()) + ", panel has " +
              std::to_string(panel.length()));
  const Eigen::Map<const Eigen::RowVectorXd> m(market.data(),
                                               static_cast<Eigen::Index>(market.size()));
  Matrix values = panel.values().rowwise() - m;
  return TimeSeriesPanel(panel.ids(), panel.times(), std::move(values));
}

Series log_returns(std::span<const double> prices) {
  for (double p : prices) {
    require(p > 0.0 && std::isfinite(p), ErrorCode::kDomain, "log returns need positive prices");
  }
  Series out;
  if (prices.size() < 2) return out;
  out.reserve(prices.size() - 1);
  for (std::size_t t = 0; t + 1 < prices.size(); ++t) out.push_back(std::log(prices[t + 1] / prices[t]));
  return out;
}

}  // namespace leadlag
