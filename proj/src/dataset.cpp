#include "exsim/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "exsim/csv.hpp"
#include "exsim/errors.hpp"
#include "exsim/math.hpp"

namespace exsim {

std::vector<double> FunctionalDataset::column(int t) const {
  if (t < 0 || t >= length) throw DataError("column index out of range");
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back(s.values[t]);
  return out;
}

namespace {

double parse_double(const std::string& cell, std::size_t row, const std::string& col) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    // std::from_chars accepts "nan"/"inf"; anything it rejects is non-numeric.
    throw DataError("row " + std::to_string(row) + ", column " + col +
                    ": non-numeric cell '" + cell + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& cell, std::size_t row,
                       const std::string& col) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("row " + std::to_string(row) + ", column " + col +
                    ": non-integer cell '" + cell + "'");
  }
  return v;
}

}  // namespace

FunctionalDataset load_dataset(const std::filesystem::path& path,
                               const CsvSchema& schema) {
  CsvTable table = read_csv(path);
  int idx_col = table.column(schema.index_column);
  if (idx_col < 0)
    throw DataError("missing index column '" + schema.index_column + "'");
  int ts_col = table.column(schema.timestamp_column);

  std::vector<int> value_cols;
  for (int t = 1;; ++t) {
    int c = table.column(schema.value_prefix + std::to_string(t));
    if (c < 0) break;
    value_cols.push_back(c);
  }
  if (value_cols.empty())
    throw DataError("no value columns '" + schema.value_prefix +
                    "1..' found in header");

  FunctionalDataset ds;
  ds.length = static_cast<int>(value_cols.size());
  ds.delta = 1;
  ds.series.reserve(table.rows.size());

  std::unordered_set<std::int64_t> seen;
  const std::size_t expected_width = table.header.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t rownum = r + 2;  // 1-based, counting the header line
    if (row.size() != expected_width)
      throw DataError("row " + std::to_string(rownum) + ": expected " +
                      std::to_string(expected_width) + " cells, got " +
                      std::to_string(row.size()));
    CycleSeries cs;
    cs.cycle_index = parse_int(row[idx_col], rownum, schema.index_column);
    if (!seen.insert(cs.cycle_index).second)
      throw DataError("row " + std::to_string(rownum) +
                      ": duplicate cycle index " +
                      std::to_string(cs.cycle_index));
    if (ts_col >= 0 && !row[ts_col].empty()) cs.timestamp = row[ts_col];
    cs.values.reserve(value_cols.size());
    for (std::size_t t = 0; t < value_cols.size(); ++t) {
      double v = parse_double(row[value_cols[t]], rownum,
                              schema.value_prefix + std::to_string(t + 1));
      if (!std::isfinite(v))
        throw DataError("row " + std::to_string(rownum) + ", column " +
                        schema.value_prefix + std::to_string(t + 1) +
                        ": non-finite value");
      cs.values.push_back(v);
    }
    ds.series.push_back(std::move(cs));
  }
  std::sort(ds.series.begin(), ds.series.end(),
            [](const CycleSeries& a, const CycleSeries& b) {
              return a.cycle_index < b.cycle_index;
            });
  return ds;
}

void save_dataset(const FunctionalDataset& ds, const std::filesystem::path& path,
                  const CsvSchema& schema) {
  bool has_ts = std::any_of(ds.series.begin(), ds.series.end(),
                            [](const CycleSeries& s) { return s.timestamp.has_value(); });
  std::vector<std::string> header{schema.index_column};
  if (has_ts) header.push_back(schema.timestamp_column);
  for (int t = 1; t <= ds.length; ++t)
    header.push_back(schema.value_prefix + std::to_string(t));
  CsvWriter w(std::move(header));
  for (const auto& s : ds.series) {
    std::vector<std::string> row{std::to_string(s.cycle_index)};
    if (has_ts) row.push_back(s.timestamp.value_or(""));
    for (double v : s.values) row.push_back(format_double(v));
    w.add_row(row);
  }
  w.write(path);
}

int month_of(const std::string& ts) {
  // Expect YYYY-MM-... with digits at fixed positions.
  if (ts.size() < 7 || ts[4] != '-' || !std::isdigit(ts[5]) ||
      !std::isdigit(ts[6]))
    throw DataError("malformed ISO-8601 timestamp '" + ts + "'");
  int m = (ts[5] - '0') * 10 + (ts[6] - '0');
  if (m < 1 || m > 12)
    throw DataError("timestamp month out of range in '" + ts + "'");
  return m;
}

int year_of(const std::string& ts) {
  if (ts.size() < 4) throw DataError("malformed ISO-8601 timestamp '" + ts + "'");
  for (int i = 0; i < 4; ++i)
    if (!std::isdigit(ts[i]))
      throw DataError("malformed ISO-8601 timestamp '" + ts + "'");
  return std::stoi(ts.substr(0, 4));
}

FunctionalDataset filter_season(const FunctionalDataset& ds,
                                const std::set<int>& months) {
  FunctionalDataset out;
  out.length = ds.length;
  out.delta = ds.delta;
  for (const auto& s : ds.series) {
    if (!s.timestamp)
      throw DataError("cycle " + std::to_string(s.cycle_index) +
                      " lacks a timestamp; seasonal filter requires one");
    if (months.count(month_of(*s.timestamp))) out.series.push_back(s);
  }
  return out;
}

FunctionalDataset subsample(const FunctionalDataset& ds, int delta) {
  if (delta < 1) throw DataError("subsample: delta must be >= 1");
  FunctionalDataset out;
  out.length = ds.length;
  out.delta = ds.delta * delta;
  for (std::size_t i = 0; i < ds.series.size();
       i += static_cast<std::size_t>(delta)) {
    out.series.push_back(ds.series[i]);
  }
  return out;
}

TrendModel fit_trend(const FunctionalDataset& ds) {
  const std::size_t n = ds.size();
  if (n < 2) throw DataError("fit_trend: need at least 2 cycles");
  double m_mean = 0.0;
  for (const auto& s : ds.series) m_mean += static_cast<double>(s.cycle_index);
  m_mean /= static_cast<double>(n);
  double sxx = 0.0;
  for (const auto& s : ds.series) {
    double d = static_cast<double>(s.cycle_index) - m_mean;
    sxx += d * d;
  }
  if (sxx <= 0.0)
    throw NumericalError("fit_trend: all cycle indices equal (singular design)");

  TrendModel trend;
  trend.slope.assign(ds.length, 0.0);
  trend.intercept.assign(ds.length, 0.0);
  for (int t = 0; t < ds.length; ++t) {
    double y_mean = 0.0;
    for (const auto& s : ds.series) y_mean += s.values[t];
    y_mean /= static_cast<double>(n);
    double sxy = 0.0;
    for (const auto& s : ds.series) {
      sxy += (static_cast<double>(s.cycle_index) - m_mean) *
             (s.values[t] - y_mean);
    }
    trend.slope[t] = sxy / sxx;
    trend.intercept[t] = y_mean - trend.slope[t] * m_mean;
  }
  return trend;
}

namespace {

void check_trend_dims(const TrendModel& trend, int length) {
  if (static_cast<int>(trend.slope.size()) != length ||
      static_cast<int>(trend.intercept.size()) != length)
    throw DataError("trend dimensions do not match series length");
}

}  // namespace

std::vector<double> detrend_series(std::span<const double> values,
                                   const TrendModel& trend,
                                   std::int64_t cycle_index) {
  if (values.size() != trend.slope.size())
    throw DataError("trend dimensions do not match series length");
  std::vector<double> out(values.size());
  for (std::size_t t = 0; t < values.size(); ++t)
    out[t] = values[t] - trend.slope[t] * static_cast<double>(cycle_index);
  return out;
}

std::vector<double> retrend_series(std::span<const double> values,
                                   const TrendModel& trend,
                                   std::int64_t cycle_index) {
  if (values.size() != trend.slope.size())
    throw DataError("trend dimensions do not match series length");
  std::vector<double> out(values.size());
  for (std::size_t t = 0; t < values.size(); ++t)
    out[t] = values[t] + trend.slope[t] * static_cast<double>(cycle_index);
  return out;
}

FunctionalDataset detrend(const FunctionalDataset& ds, const TrendModel& trend) {
  check_trend_dims(trend, ds.length);
  FunctionalDataset out = ds;
  for (auto& s : out.series)
    s.values = detrend_series(s.values, trend, s.cycle_index);
  return out;
}

FunctionalDataset retrend(const FunctionalDataset& ds, const TrendModel& trend,
                          std::int64_t cycle_index) {
  check_trend_dims(trend, ds.length);
  FunctionalDataset out = ds;
  for (auto& s : out.series) {
    s.values = retrend_series(s.values, trend, cycle_index);
    s.cycle_index = cycle_index;
  }
  return out;
}

FunctionalDataset retrend(const FunctionalDataset& ds, const TrendModel& trend) {
  check_trend_dims(trend, ds.length);
  FunctionalDataset out = ds;
  for (auto& s : out.series)
    s.values = retrend_series(s.values, trend, s.cycle_index);
  return out;
}

nlohmann::json trend_to_json(const TrendModel& trend) {
  return nlohmann::json{{"slope", trend.slope}, {"intercept", trend.intercept}};
}

TrendModel trend_from_json(const nlohmann::json& j) {
  TrendModel t;
  t.slope = j.at("slope").get<std::vector<double>>();
  t.intercept = j.at("intercept").get<std::vector<double>>();
  return t;
}

}  // namespace exsim
