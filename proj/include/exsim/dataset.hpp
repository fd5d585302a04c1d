#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace exsim {

// One fixed-length series: the values recorded over a single cycle.
struct CycleSeries {
  std::vector<double> values;
  std::int64_t cycle_index = 0;
  std::optional<std::string> timestamp;  // ISO-8601, e.g. 1990-10-27T06:10:00
};

// Ordered collection of cycles, all of the same length.
struct FunctionalDataset {
  std::vector<CycleSeries> series;  // sorted ascending by cycle_index
  int length = 37;                  // values per cycle
  int delta = 1;                    // cycle-index spacing between entries

  std::size_t size() const { return series.size(); }
  // Values at a fixed time step across all cycles.
  std::vector<double> column(int t) const;
};

// Per-time-step linear trend in the cycle index.
struct TrendModel {
  std::vector<double> slope;      // units per cycle index
  std::vector<double> intercept;  // level at index 0 (kept in the detrended data)
};

struct CsvSchema {
  std::string index_column = "M";
  std::string timestamp_column = "timestamp";
  std::string value_prefix = "t";  // value columns t1..tT
};

inline const std::set<int> kWinterMonths = {9, 10, 11, 12, 1, 2, 3};

FunctionalDataset load_dataset(const std::filesystem::path& path,
                               const CsvSchema& schema = {});
void save_dataset(const FunctionalDataset& ds, const std::filesystem::path& path,
                  const CsvSchema& schema = {});

FunctionalDataset filter_season(const FunctionalDataset& ds,
                                const std::set<int>& months = kWinterMonths);

// Keeps entries at positions 0, delta, 2*delta, ... of the ordered list.
FunctionalDataset subsample(const FunctionalDataset& ds, int delta);

// Per-time-step OLS of the value on the cycle index.
TrendModel fit_trend(const FunctionalDataset& ds);

// Removes the slope term only; the intercept stays in the detrended values.
FunctionalDataset detrend(const FunctionalDataset& ds, const TrendModel& trend);
// Adds the slope term back at the given cycle index (applied to every entry).
FunctionalDataset retrend(const FunctionalDataset& ds, const TrendModel& trend,
                          std::int64_t cycle_index);
// Adds the slope term back using each entry's own cycle index.
FunctionalDataset retrend(const FunctionalDataset& ds, const TrendModel& trend);

std::vector<double> detrend_series(std::span<const double> values,
                                   const TrendModel& trend,
                                   std::int64_t cycle_index);
std::vector<double> retrend_series(std::span<const double> values,
                                   const TrendModel& trend,
                                   std::int64_t cycle_index);

int month_of(const std::string& iso_timestamp);
int year_of(const std::string& iso_timestamp);

nlohmann::json trend_to_json(const TrendModel& trend);
TrendModel trend_from_json(const nlohmann::json& j);

}  // namespace exsim
