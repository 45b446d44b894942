#include "leadlag/ingest.hpp"

#include "leadlag/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace leadlag {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  require(!quoted, ErrorCode::kParse, "line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(trim(cur));
  return fields;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  if (cell.empty()) return 0.0;
  std::string lower(cell);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "na" || lower == "nan" || lower == "null") return 0.0;
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  require(ec == std::errc() && ptr == last && std::isfinite(v), ErrorCode::kParse,
          "line " + std::to_string(line_no) + ": cannot parse '" + cell + "' as a number");
  return v;
}

std::optional<double> as_number(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Numeric labels compare numerically, anything else lexicographically (ISO dates).
bool date_less(const std::string& a, const std::string& b) {
  const auto x = as_number(a);
  const auto y = as_number(b);
  if (x && y) return *x < *y;
  return a < b;
}

std::vector<std::vector<std::string>> read_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split_row(line, line_no));
  }
  return rows;
}

void check_dates(const std::vector<std::string>& dates) {
  for (std::size_t t = 1; t < dates.size(); ++t) {
    require(!(dates[t] == dates[t - 1]), ErrorCode::kDuplicateKey,
            "date '" + dates[t] + "' appears twice");
    require(date_less(dates[t - 1], dates[t]), ErrorCode::kNonMonotone,
            "date '" + dates[t] + "' follows '" + dates[t - 1] + "'");
  }
}

RawTable read_wide(const std::vector<std::vector<std::string>>& rows) {
  require(!rows.empty(), ErrorCode::kParse, "CSV has no header");
  const auto& header = rows.front();
  require(header.size() >= 2, ErrorCode::kParse, "wide CSV needs a date column and one series");
  RawTable raw;
  raw.ids.assign(header.begin() + 1, header.end());
  std::unordered_set<std::string> seen;
  for (const auto& id : raw.ids) {
    require(!id.empty(), ErrorCode::kParse, "empty series id in header");
    require(seen.insert(id).second, ErrorCode::kDuplicateKey, "series id '" + id + "' repeated");
  }
  const std::size_t n = raw.ids.size();
  const std::size_t t_len = rows.size() - 1;
  raw.values = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t_len));
  for (std::size_t t = 0; t < t_len; ++t) {
    const auto& row = rows[t + 1];
    require(row.size() == n + 1, ErrorCode::kParse,
            "row " + std::to_string(t + 2) + " has " + std::to_string(row.size()) +
                " fields, expected " + std::to_string(n + 1));
    raw.dates.push_back(row[0]);
    for (std::size_t i = 0; i < n; ++i) {
      raw.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = parse_cell(row[i + 1], t + 2);
    }
  }
  return raw;
}

RawTable read_long(const std::vector<std::vector<std::string>>& rows) {
  require(!rows.empty(), ErrorCode::kParse, "CSV has no header");
  require(rows.front().size() == 3, ErrorCode::kParse, "long CSV needs columns date,id,value");
  RawTable raw;
  std::unordered_map<std::string, std::size_t> id_index;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    require(row.size() == 3, ErrorCode::kParse,
            "row " + std::to_string(r + 1) + " does not have three fields");
    const std::string& date = row[0];
    if (raw.dates.empty() || raw.dates.back() != date) {
      if (!raw.dates.empty()) {
        require(date_less(raw.dates.back(), date), ErrorCode::kNonMonotone,
                "row " + std::to_string(r + 1) + ": date '" + date + "' is out of order");
      }
      raw.dates.push_back(date);
    }
    require(!row[1].empty(), ErrorCode::kParse, "row " + std::to_string(r + 1) + ": empty id");
    const auto [it, added] = id_index.try_emplace(row[1], raw.ids.size());
    if (added) raw.ids.push_back(row[1]);
    const bool fresh = cells.emplace(std::pair{it->second, raw.dates.size() - 1},
                                     parse_cell(row[2], r + 1)).second;
    require(fresh, ErrorCode::kDuplicateKey,
            "duplicate observation for (" + date + ", " + row[1] + ")");
  }
  raw.values = Matrix::Zero(static_cast<Eigen::Index>(raw.ids.size()),
                            static_cast<Eigen::Index>(raw.dates.size()));
  for (const auto& [key, v] : cells) {
    raw.values(static_cast<Eigen::Index>(key.first), static_cast<Eigen::Index>(key.second)) = v;
  }
  return raw;
}

std::vector<std::size_t> market_and_assets(const RawTable& raw, const std::string& market_id,
                                           std::size_t& market) {
  const auto it = std::find(raw.ids.begin(), raw.ids.end(), market_id);
  require(it != raw.ids.end(), ErrorCode::kMissingSeries,
          "market series '" + market_id + "' not found");
  market = static_cast<std::size_t>(it - raw.ids.begin());
  std::vector<std::size_t> assets;
  for (std::size_t i = 0; i < raw.ids.size(); ++i) {
    if (i != market) assets.push_back(i);
  }
  require(!assets.empty(), ErrorCode::kEmptyPanel, "no series besides the market");
  return assets;
}

struct Filtered {
  std::vector<std::size_t> days;
  std::vector<std::size_t> assets;
};

template <typename AssetRule>
Filtered filter_zeros(const RawTable& raw, const std::vector<std::size_t>& assets,
                      double day_zero_frac, AssetRule&& asset_dropped,
                      std::vector<DropEntry>& drops) {
  Filtered f;
  for (std::size_t t = 0; t < raw.dates.size(); ++t) {
    std::size_t zeros = 0;
    for (std::size_t i : assets) {
      zeros += raw.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) == 0.0;
    }
    const double frac = static_cast<double>(zeros) / static_cast<double>(assets.size());
    if (frac > day_zero_frac) {
      drops.push_back({DropEntry::Kind::kDay, raw.dates[t], "day-zero-fraction", frac});
    } else {
      f.days.push_back(t);
    }
  }
  for (std::size_t i : assets) {
    std::size_t zeros = 0;
    for (std::size_t t : f.days) {
      zeros += raw.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) == 0.0;
    }
    if (auto rule = asset_dropped(zeros, f.days.size())) {
      drops.push_back({DropEntry::Kind::kAsset, raw.ids[i], rule->first, rule->second});
    } else {
      f.assets.push_back(i);
    }
  }
  require(!f.days.empty() && !f.assets.empty(), ErrorCode::kEmptyPanel,
          "no data left after filtering");
  return f;
}

Preprocessed excess_and_winsorize(const std::vector<std::string>& ids,
                                  const std::vector<std::string>& dates, const Matrix& returns,
                                  std::span<const double> market, double winsor,
                                  std::vector<DropEntry> drops) {
  TimeSeriesPanel excess = excess_returns(TimeSeriesPanel(ids, dates, returns), market);
  Matrix values = excess.values();
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index t = 0; t < values.cols(); ++t) values(i, t) = std::clamp(values(i, t), -winsor, winsor);
  }
  return {TimeSeriesPanel(ids, dates, std::move(values)), std::move(drops)};
}

}  // namespace

void RawTable::validate() const {
  require(static_cast<std::size_t>(values.rows()) == ids.size() &&
              static_cast<std::size_t>(values.cols()) == dates.size(),
          ErrorCode::kDimension, "table shape does not match its labels");
  require(values.allFinite(), ErrorCode::kInvalidInput, "table contains non-finite values");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    require(seen.insert(id).second, ErrorCode::kDuplicateKey, "series id '" + id + "' repeated");
  }
  check_dates(dates);
}

RawTable read_csv(std::istream& in, CsvLayout layout) {
  const auto rows = read_rows(in);
  RawTable raw = layout == CsvLayout::kWide ? read_wide(rows) : read_long(rows);
  raw.validate();
  return raw;
}

RawTable load_csv(const std::filesystem::path& path, CsvLayout layout) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return read_csv(in, layout);
}

void write_csv(std::ostream& out, const TimeSeriesPanel& panel) {
  out << "date";
  for (const auto& id : panel.ids()) out << ',' << id;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t t = 0; t < panel.length(); ++t) {
    out << panel.times()[t];
    for (std::size_t i = 0; i < panel.series_count(); ++i) {
      out << ',' << panel.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const TimeSeriesPanel& panel) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path.string() + "'");
  write_csv(out, panel);
}

TimeSeriesPanel to_panel(const RawTable& raw) {
  raw.validate();
  require(!raw.ids.empty() && !raw.dates.empty(), ErrorCode::kEmptyPanel, "table is empty");
  return TimeSeriesPanel(raw.ids, raw.dates, raw.values);
}

std::string_view to_string(DropEntry::Kind kind) {
  return kind == DropEntry::Kind::kDay ? "day" : "asset";
}

Series fill_zeros(std::span<const double> prices) {
  Series out(prices.begin(), prices.end());
  const auto first = std::find_if(out.begin(), out.end(), [](double v) { return v != 0.0; });
  require(first != out.end(), ErrorCode::kUnfillable, "series is entirely zero");
  for (std::size_t t = 1; t < out.size(); ++t) {
    if (out[t] == 0.0) out[t] = out[t - 1];
  }
  std::fill(out.begin(), first, *first);
  return out;
}

Preprocessed preprocess_equity(const RawTable& raw, const std::string& market_id,
                               const EquityRules& rules) {
  raw.validate();
  require(rules.day_zero_frac >= 0.0 && rules.asset_zero_frac >= 0.0, ErrorCode::kInvalidParameter,
          "zero-fraction thresholds must be nonnegative");
  require(rules.winsor > 0.0, ErrorCode::kInvalidParameter, "winsor bound must be positive");
  std::size_t market = 0;
  const auto assets = market_and_assets(raw, market_id, market);
  std::vector<DropEntry> drops;
  const Filtered f = filter_zeros(
      raw, assets, rules.day_zero_frac,
      [&](std::size_t zeros, std::size_t days) -> std::optional<std::pair<std::string, double>> {
        const double frac = static_cast<double>(zeros) / static_cast<double>(days);
        if (frac > rules.asset_zero_frac) return std::pair{std::string("asset-zero-fraction"), frac};
        return std::nullopt;
      },
      drops);

  std::vector<std::string> ids;
  std::vector<std::string> dates;
  for (std::size_t i : f.assets) ids.push_back(raw.ids[i]);
  for (std::size_t t : f.days) dates.push_back(raw.dates[t]);
  Matrix returns(static_cast<Eigen::Index>(f.assets.size()), static_cast<Eigen::Index>(f.days.size()));
  Series mkt(f.days.size());
  for (std::size_t c = 0; c < f.days.size(); ++c) {
    const auto t = static_cast<Eigen::Index>(f.days[c]);
    mkt[c] = raw.values(static_cast<Eigen::Index>(market), t);
    for (std::size_t r = 0; r < f.assets.size(); ++r) {
      returns(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          raw.values(static_cast<Eigen::Index>(f.assets[r]), t);
    }
  }
  return excess_and_winsorize(ids, dates, returns, mkt, rules.winsor, std::move(drops));
}

Preprocessed preprocess_futures(const RawTable& raw_prices, const std::string& market_id,
                                const FuturesRules& rules) {
  raw_prices.validate();
  require(rules.day_zero_frac >= 0.0, ErrorCode::kInvalidParameter,
          "zero-fraction threshold must be nonnegative");
  require(rules.winsor > 0.0, ErrorCode::kInvalidParameter, "winsor bound must be positive");
  std::size_t market = 0;
  const auto assets = market_and_assets(raw_prices, market_id, market);
  std::vector<DropEntry> drops;
  const Filtered f = filter_zeros(
      raw_prices, assets, rules.day_zero_frac,
      [&](std::size_t zeros, std::size_t) -> std::optional<std::pair<std::string, double>> {
        if (zeros > rules.max_zero_days) {
          return std::pair{std::string("asset-zero-days"), static_cast<double>(zeros)};
        }
        return std::nullopt;
      },
      drops);
  require(f.days.size() >= 2, ErrorCode::kEmptyPanel, "fewer than two days left after filtering");

  auto filled_returns = [&](std::size_t i) {
    Series prices(f.days.size());
    for (std::size_t c = 0; c < f.days.size(); ++c) {
      prices[c] = raw_prices.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f.days[c]));
    }
    require(std::any_of(prices.begin(), prices.end(), [](double v) { return v != 0.0; }),
            ErrorCode::kUnfillable, "series '" + raw_prices.ids[i] + "' has no nonzero price");
    return log_returns(fill_zeros(prices));
  };
  std::vector<std::string> ids;
  for (std::size_t i : f.assets) ids.push_back(raw_prices.ids[i]);
  std::vector<std::string> dates;
  for (std::size_t c = 1; c < f.days.size(); ++c) dates.push_back(raw_prices.dates[f.days[c]]);
  Matrix returns(static_cast<Eigen::Index>(f.assets.size()), static_cast<Eigen::Index>(dates.size()));
  for (std::size_t r = 0; r < f.assets.size(); ++r) {
    const Series ret = filled_returns(f.assets[r]);
    for (std::size_t c = 0; c < ret.size(); ++c) {
      returns(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ret[c];
    }
  }
  const Series mkt = filled_returns(market);
  return excess_and_winsorize(ids, dates, returns, mkt, rules.winsor, std::move(drops));
}

}  // namespace leadlag
