#include "expect_error.hpp"

#include "leadlag/ingest.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

namespace leadlag {
namespace {

RawTable parse(const std::string& text, CsvLayout layout = CsvLayout::kWide) {
  std::istringstream in(text);
  return read_csv(in, layout);
}

TEST(Csv, WideShape) {
  const RawTable t = parse("date,a,b\n2020-01-01,1,2\n2020-01-02,3,4\n2020-01-06,5,6\n");
  EXPECT_EQ(t.ids, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.values.rows(), 2);
  ASSERT_EQ(t.values.cols(), 3);
  EXPECT_EQ(t.values(1, 2), 6.0);
  EXPECT_EQ(t.dates.back(), "2020-01-06");
}

TEST(Csv, MissingMarkersReadAsZero) {
  const RawTable t = parse("date,a,b\n1,,NA\n2,NaN,0.5\n");
  EXPECT_EQ(t.values(0, 0), 0.0);
  EXPECT_EQ(t.values(1, 0), 0.0);
  EXPECT_EQ(t.values(0, 1), 0.0);
  EXPECT_EQ(t.values(1, 1), 0.5);
}

TEST(Csv, LongLayout) {
  const RawTable t = parse("date,id,value\n1,a,0.1\n1,b,0.2\n2,b,0.3\n", CsvLayout::kLong);
  EXPECT_EQ(t.ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.values(0, 1), 0.0);
  EXPECT_EQ(t.values(1, 1), 0.3);
  EXPECT_ERROR_CODE(parse("date,id,value\n1,a,0.1\n1,a,0.2\n", CsvLayout::kLong), ErrorCode::kDuplicateKey);
}

TEST(Csv, Errors) {
  EXPECT_ERROR_CODE(parse("date,a\n1,x\n"), ErrorCode::kParse);
  EXPECT_ERROR_CODE(parse("date,a\n1,1\n1,2\n"), ErrorCode::kDuplicateKey);
  EXPECT_ERROR_CODE(parse("date,a\n2,1\n1,2\n"), ErrorCode::kNonMonotone);
  EXPECT_ERROR_CODE(parse("date,a,b\n1,1\n"), ErrorCode::kParse);
  EXPECT_ERROR_CODE(load_csv("/nonexistent/panel.csv", CsvLayout::kWide), ErrorCode::kIo);
}

TEST(Csv, NumericDatesCompareNumerically) {
  const RawTable t = parse("date,a\n9,1\n10,2\n");
  EXPECT_EQ(t.dates, (std::vector<std::string>{"9", "10"}));
}

TEST(Csv, RoundTrip) {
  Matrix m(2, 3);
  m << 0.1, 1.0 / 3.0, -2e-9, 5, 6.25, std::exp(1.0);
  const TimeSeriesPanel p({"x", "y"}, {"d1", "d2", "d3"}, m);
  std::stringstream s;
  write_csv(s, p);
  const TimeSeriesPanel back = to_panel(read_csv(s, CsvLayout::kWide));
  EXPECT_EQ(back.values(), m);
  EXPECT_EQ(back.ids(), p.ids());
  EXPECT_EQ(back.times(), p.times());

  const auto path = std::filesystem::temp_directory_path() / "leadlag_ingest_roundtrip.csv";
  save_csv(path, p);
  EXPECT_EQ(to_panel(load_csv(path, CsvLayout::kWide)).values(), m);
  std::filesystem::remove(path);
}

RawTable equity_table(std::size_t assets, std::size_t days) {
  RawTable t;
  for (std::size_t i = 0; i < assets; ++i) t.ids.push_back("s" + std::to_string(i));
  t.ids.push_back("MKT");
  for (std::size_t d = 0; d < days; ++d) t.dates.push_back(std::to_string(100 + d));
  t.values = Matrix(static_cast<Eigen::Index>(assets + 1), static_cast<Eigen::Index>(days));
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    for (Eigen::Index d = 0; d < t.values.cols(); ++d) t.values(i, d) = 0.001 * static_cast<double>(1 + (i * 7 + d * 3) % 11);
  }
  return t;
}

TEST(Equity, DayThenAssetFilter) {
  RawTable t = equity_table(10, 20);
  for (int d = 0; d < 12; ++d) t.values(0, d) = 0.0;  // 60% of days
  t.values(1, 15) = 0.0;
  t.values(2, 15) = 0.0;  // 2 of 10 on day 15
  const Preprocessed p = preprocess_equity(t, "MKT");
  ASSERT_EQ(p.drops.size(), 2u);
  EXPECT_EQ(p.drops[0].kind, DropEntry::Kind::kDay);
  EXPECT_EQ(p.drops[0].label, "115");
  EXPECT_DOUBLE_EQ(p.drops[0].value, 0.2);
  EXPECT_EQ(p.drops[1].kind, DropEntry::Kind::kAsset);
  EXPECT_EQ(p.drops[1].label, "s0");
  EXPECT_EQ(p.panel.series_count(), 9u);
  EXPECT_EQ(p.panel.length(), 19u);
  EXPECT_EQ(p.panel.ids().front(), "s1");
  EXPECT_EQ(to_string(DropEntry::Kind::kAsset), "asset");
}

TEST(Equity, CleanInputIsWinsorizedExcess) {
  RawTable t = equity_table(3, 5);
  t.values(0, 1) = 0.4;
  t.values(1, 2) = -0.4;
  const Preprocessed p = preprocess_equity(t, "MKT");
  EXPECT_TRUE(p.drops.empty());
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index d = 0; d < 5; ++d) {
      const double want = std::clamp(t.values(i, d) - t.values(3, d), -0.15, 0.15);
      EXPECT_EQ(p.panel.values()(i, d), want);
    }
  }
  EXPECT_EQ(p.panel.values()(0, 1), 0.15);
  EXPECT_EQ(p.panel.values()(1, 2), -0.15);
}

TEST(Equity, Errors) {
  RawTable t = equity_table(2, 4);
  EXPECT_ERROR_CODE(preprocess_equity(t, "SPX"), ErrorCode::kMissingSeries);
  t.values.topRows(2).setZero();
  EXPECT_ERROR_CODE(preprocess_equity(t, "MKT"), ErrorCode::kEmptyPanel);
}

TEST(Futures, FillRule) {
  EXPECT_EQ(fill_zeros(Series{0, 5, 0, 6}), (Series{5, 5, 5, 6}));
  EXPECT_EQ(fill_zeros(Series{0, 0, 2}), (Series{2, 2, 2}));
}

RawTable price_table(std::size_t assets, std::size_t days) {
  RawTable t = equity_table(assets, days);
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    double price = 10.0 + static_cast<double>(i);
    for (Eigen::Index d = 0; d < t.values.cols(); ++d) {
      price *= 1.0 + t.values(i, d) - 0.006;
      t.values(i, d) = price;
    }
  }
  return t;
}

TEST(Futures, ZeroDayLimit) {
  RawTable t = price_table(11, 400);
  for (int d = 0; d < 161; ++d) t.values(0, d) = 0.0;
  for (int d = 161; d < 321; ++d) t.values(1, d) = 0.0;
  const Preprocessed p = preprocess_futures(t, "MKT");
  ASSERT_EQ(p.drops.size(), 1u);
  EXPECT_EQ(p.drops[0].label, "s0");
  EXPECT_EQ(p.drops[0].rule, "asset-zero-days");
  EXPECT_EQ(p.drops[0].value, 161.0);
  EXPECT_EQ(p.panel.series_count(), 10u);
  EXPECT_EQ(p.panel.length(), 399u);
}

TEST(Futures, CleanPricesGiveLogReturns) {
  const RawTable t = price_table(2, 6);
  const Preprocessed p = preprocess_futures(t, "MKT");
  ASSERT_EQ(p.panel.length(), 5u);
  EXPECT_EQ(p.panel.times().front(), t.dates[1]);
  const double asset = std::log(t.values(0, 1) / t.values(0, 0));
  const double market = std::log(t.values(2, 1) / t.values(2, 0));
  EXPECT_NEAR(p.panel.values()(0, 0), asset - market, 1e-15);
}

TEST(Futures, AllZeroSeriesIsUnfillable) {
  RawTable t = price_table(11, 20);
  t.values.row(3).setZero();
  EXPECT_ERROR_CODE(preprocess_futures(t, "MKT"), ErrorCode::kUnfillable);
}

}  // namespace
}  // namespace leadlag
