#pragma once

#include "leadlag/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leadlag {

/// Series-by-date values as read from disk. Zero marks a missing observation.
struct RawTable {
  std::vector<std::string> ids;
  std::vector<std::string> dates;
  Matrix values;  // ids.size() x dates.size()

  void validate() const;
};

enum class CsvLayout { kWide, kLong };

/// Wide: header "date,<id>,<id>..." with one row per date.
/// Long: header "date,id,value" with one row per observation; absent pairs read as 0.
/// Empty, NA and NaN cells read as 0.
RawTable read_csv(std::istream& in, CsvLayout layout);
RawTable load_csv(const std::filesystem::path& path, CsvLayout layout);

/// Wide CSV of a panel, dates as rows.
void write_csv(std::ostream& out, const TimeSeriesPanel& panel);
void save_csv(const std::filesystem::path& path, const TimeSeriesPanel& panel);

/// Uses the table as is, without filtering.
TimeSeriesPanel to_panel(const RawTable& raw);

struct DropEntry {
  enum class Kind { kDay, kAsset } kind;
  std::string label;  // date or series id
  std::string rule;
  double value = 0.0;  // zero fraction or zero-day count that triggered the rule
};

struct Preprocessed {
  TimeSeriesPanel panel;
  std::vector<DropEntry> drops;
};

struct EquityRules {
  double day_zero_frac = 0.10;
  double asset_zero_frac = 0.50;
  double winsor = 0.15;
};

struct FuturesRules {
  double day_zero_frac = 0.10;
  std::size_t max_zero_days = 160;
  double winsor = 0.15;
};

/// Input holds daily returns. Drops days, then assets, then returns winsorized excess
/// returns over the market series (which is excluded from the output).
Preprocessed preprocess_equity(const RawTable& raw, const std::string& market_id,
                               const EquityRules& rules = {});

/// Input holds prices. Drops days, then assets, fills zeros forward then backward,
/// and continues with log returns as for equities.
Preprocessed preprocess_futures(const RawTable& raw_prices, const std::string& market_id,
                                const FuturesRules& rules = {});

/// Forward fill then backward fill of zero entries.
Series fill_zeros(std::span<const double> prices);

std::string_view to_string(DropEntry::Kind kind);

}  // namespace leadlag
