#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace leadlag {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::MatrixXi;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Series = std::vector<double>;

/// n aligned real-valued series of common length T. Rows are series, columns are time steps.
class TimeSeriesPanel {
 public:
  /// Throws kDimension on shape mismatch, kInvalidInput on duplicate ids or non-finite values.
  TimeSeriesPanel(std::vector<std::string> ids, std::vector<std::string> times, Matrix values);
  /// Times default to "0", "1", ..., "T-1".
  TimeSeriesPanel(std::vector<std::string> ids, Matrix values);
  /// Ids default to "0", "1", ..., "n-1".
  explicit TimeSeriesPanel(Matrix values);

  std::size_t series_count() const { return ids_.size(); }
  std::size_t length() const { return times_.size(); }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& times() const { return times_; }
  const Matrix& values() const { return values_; }

  Series row(std::size_t i) const;
  std::optional<std::size_t> index_of(const std::string& id) const;

  /// Columns [begin, begin + count).
  TimeSeriesPanel slice(std::size_t begin, std::size_t count) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> times_;
  Matrix values_;
};

struct WindowOrigin {
  std::size_t series = 0;
  std::size_t start = 0;  // 0-based

  bool operator==(const WindowOrigin&) const = default;
};

/// Stack of all length-q windows of every series, taken every s steps.
class SubsequenceUniverse {
 public:
  /// Validates N = n*h and that series r/h starts at (r mod h)*s.
  SubsequenceUniverse(RowMatrix windows, std::vector<WindowOrigin> origin, std::size_t series_count,
                      std::size_t window_length, std::size_t shift);

  std::size_t size() const { return origin_.size(); }
  std::size_t series_count() const { return series_count_; }
  std::size_t window_length() const { return window_length_; }
  std::size_t shift() const { return shift_; }
  std::size_t windows_per_series() const { return windows_per_series_; }

  const RowMatrix& windows() const { return windows_; }
  const std::vector<WindowOrigin>& origin() const { return origin_; }

 private:
  RowMatrix windows_;
  std::vector<WindowOrigin> origin_;
  std::size_t series_count_;
  std::size_t window_length_;
  std::size_t shift_;
  std::size_t windows_per_series_;
};

enum class WindowScaling { kRaw, kStandardize };

struct ReturnConfig {
  double winsor_bound = 0.15;
  std::optional<std::string> market_id;

  void validate() const;
};

/// Number of windows per series, h = (T - q) / s + 1 with the trailing remainder dropped.
std::size_t windows_per_series(std::size_t length, std::size_t window_length, std::size_t shift);

SubsequenceUniverse extract_subsequences(const TimeSeriesPanel& panel, std::size_t window_length,
                                         std::size_t shift,
                                         WindowScaling scaling = WindowScaling::kRaw);

Series winsorize(std::span<const double> x, double bound);
TimeSeriesPanel excess_returns(const TimeSeriesPanel& panel, std::span<const double> market);
Series log_returns(std::span<const double> prices);

}  // namespace leadlag
