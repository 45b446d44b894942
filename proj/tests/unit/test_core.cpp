#include "expect_error.hpp"

#include "leadlag/core.hpp"

#include <cmath>

namespace leadlag {
namespace {

TEST(Panel, RejectsBadShapesAndValues) {
  EXPECT_ERROR_CODE(TimeSeriesPanel({"a"}, {"0", "1"}, Matrix::Zero(1, 3)), ErrorCode::kDimension);
  EXPECT_ERROR_CODE(TimeSeriesPanel({"a", "a"}, Matrix::Zero(2, 3)), ErrorCode::kInvalidInput);
  Matrix bad = Matrix::Zero(1, 2);
  bad(0, 1) = std::nan("");
  EXPECT_ERROR_CODE(TimeSeriesPanel(bad), ErrorCode::kInvalidInput);
}

TEST(Panel, DefaultLabelsAndSlice) {
  Matrix m(2, 4);
  m << 1, 2, 3, 4, 5, 6, 7, 8;
  const TimeSeriesPanel p(m);
  EXPECT_EQ(p.ids(), (std::vector<std::string>{"0", "1"}));
  EXPECT_EQ(p.times().back(), "3");
  const TimeSeriesPanel s = p.slice(1, 2);
  EXPECT_EQ(s.times(), (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(s.row(1), (Series{6, 7}));
  EXPECT_EQ(p.index_of("1"), 1u);
  EXPECT_FALSE(p.index_of("x").has_value());
}

TEST(Windows, ExperimentSizes) {
  EXPECT_EQ(windows_per_series(100, 90, 1), 11u);
  EXPECT_EQ(windows_per_series(21, 10, 1), 12u);
  const TimeSeriesPanel p(Matrix::Random(6, 100));
  const SubsequenceUniverse u = extract_subsequences(p, 90, 1);
  EXPECT_EQ(u.size(), 66u);
  EXPECT_EQ(u.windows_per_series(), 11u);
}

TEST(Windows, FullLengthWindowIsThePanel) {
  const TimeSeriesPanel p(Matrix::Random(3, 7));
  for (std::size_t s : {1u, 2u, 5u}) {
    const SubsequenceUniverse u = extract_subsequences(p, 7, s);
    ASSERT_EQ(u.size(), 3u);
    EXPECT_EQ(Matrix(u.windows()), p.values());
  }
}

TEST(Windows, OriginsAndTrailingRemainder) {
  Matrix m(1, 10);
  for (int t = 0; t < 10; ++t) m(0, t) = t;
  const SubsequenceUniverse u = extract_subsequences(TimeSeriesPanel(m), 4, 3);
  // (10 - 4) / 3 + 1 = 3 windows; nothing starts at 9.
  ASSERT_EQ(u.size(), 3u);
  EXPECT_EQ(u.origin()[2].start, 6u);
  EXPECT_EQ(u.windows()(2, 3), 9.0);
  const SubsequenceUniverse v = extract_subsequences(TimeSeriesPanel(m), 4, 4);
  EXPECT_EQ(v.size(), 2u);
}

TEST(Windows, Errors) {
  const TimeSeriesPanel p(Matrix::Random(2, 5));
  EXPECT_ERROR_CODE(extract_subsequences(p, 6, 1), ErrorCode::kInvalidWindow);
  EXPECT_ERROR_CODE(extract_subsequences(p, 0, 1), ErrorCode::kInvalidParameter);
  EXPECT_ERROR_CODE(extract_subsequences(p, 2, 0), ErrorCode::kInvalidParameter);
}

TEST(Windows, StandardizeOption) {
  Matrix m(1, 4);
  m << 1, 2, 3, 5;
  const SubsequenceUniverse u = extract_subsequences(TimeSeriesPanel(m), 3, 1, WindowScaling::kStandardize);
  for (Eigen::Index r = 0; r < 2; ++r) EXPECT_NEAR(u.windows().row(r).mean(), 0.0, 1e-15);
}

TEST(Returns, Winsorize) {
  EXPECT_EQ(winsorize(Series{0.20, -0.20, 0.10}, 0.15), (Series{0.15, -0.15, 0.10}));
  EXPECT_ERROR_CODE(winsorize(Series{1.0}, 0.0), ErrorCode::kInvalidParameter);
}

TEST(Returns, Excess) {
  Matrix m(2, 2);
  m << 0.03, -0.01, 0.01, 0.01;
  const Series market{0.01, 0.01};
  const TimeSeriesPanel out = excess_returns(TimeSeriesPanel(m), market);
  EXPECT_NEAR(out.values()(0, 0), 0.02, 1e-17);
  EXPECT_NEAR(out.values()(0, 1), -0.02, 1e-17);
  EXPECT_EQ(out.values()(1, 0), 0.0);
  EXPECT_EQ(out.values()(1, 1), 0.0);
  EXPECT_ERROR_CODE(excess_returns(TimeSeriesPanel(m), Series{0.0}), ErrorCode::kDimension);
}

TEST(Returns, Log) {
  EXPECT_EQ(log_returns(Series{1, 1}), Series{0.0});
  EXPECT_DOUBLE_EQ(log_returns(Series{1, std::exp(1.0)})[0], 1.0);
  const Series r = log_returns(Series{100, 101, 99});
  EXPECT_DOUBLE_EQ(r[0], std::log(1.01));
  EXPECT_DOUBLE_EQ(r[1], std::log(99.0 / 101.0));
  EXPECT_ERROR_CODE(log_returns(Series{1, 0}), ErrorCode::kDomain);
}

}  // namespace
}  // namespace leadlag
