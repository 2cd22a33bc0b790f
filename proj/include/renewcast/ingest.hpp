#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "renewcast/table.hpp"

namespace renewcast::ingest {

// Raw RFC-4180 reader: header row plus data rows, all fields as text.
struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvDocument read_csv(const std::filesystem::path& path);
CsvDocument parse_csv(std::string_view text);

struct LoadOptions {
  // Panel data (several sites per instant) legitimately repeats timestamps.
  bool allow_duplicate_timestamps = false;
};

// Loads a CSV whose header equals the schema names as a set. Rows are sorted
// by timestamp; unparseable numeric cells become missing.
TimeSeriesTable load_csv_table(const std::filesystem::path& path,
                               const std::vector<ColumnMeta>& schema,
                               const LoadOptions& options = {});
TimeSeriesTable table_from_csv(const CsvDocument& doc, const std::vector<ColumnMeta>& schema,
                               const LoadOptions& options = {});

// Inner join on timestamp. Column names must be disjoint.
TimeSeriesTable merge_hourly(const TimeSeriesTable& weather, const TimeSeriesTable& generation);

// Long-format weather (one row per city and instant) to wide hourly columns
// named "<variable>_<City>". Repeated (instant, city) rows keep the first.
struct PivotResult {
  TimeSeriesTable table;
  std::size_t duplicate_rows_skipped = 0;
};
PivotResult pivot_city_weather(const CsvDocument& doc, const std::string& time_column,
                               const std::string& city_column,
                               const std::vector<std::string>& variables);

// Per-column fill values for gaps longer than the forward-fill limit, fitted on
// the training rows only and replayed onto every row.
struct ImputeStats {
  std::size_t fit_rows = 0;
  std::map<std::string, double> means;
  std::map<std::string, std::string> modes;
};

struct ImputeLog {
  std::map<std::string, std::size_t> forward_filled;
  std::map<std::string, std::size_t> statistic_filled;
};

inline constexpr std::size_t kForwardFillLimit = 3;

ImputeStats fit_impute_stats(const TimeSeriesTable& table, std::size_t train_end);
TimeSeriesTable impute_gaps(const TimeSeriesTable& table, const ImputeStats& stats,
                            ImputeLog* log = nullptr);
// Convenience: statistics fitted on every row.
TimeSeriesTable impute_gaps(const TimeSeriesTable& table);

std::pair<TimeSeriesTable, std::vector<std::string>> drop_sparse_columns(
    const TimeSeriesTable& table, double threshold = 0.15);

struct SeasonalTerm {
  double period_steps = 24.0;
  double amplitude = 1.0;
};

struct SyntheticSpec {
  std::size_t n_rows = 5000;
  std::vector<SeasonalTerm> seasonal_periods{{24.0, 1.0}};
  double trend_slope = 0.0;
  double noise_std = 0.05;
  double missing_rate = 0.0;
  std::size_t gap_max_len = 1;
  std::uint64_t seed = 0;
  // Hourly index starts here (2015-01-01 00:00 UTC by default).
  std::int64_t start_utc_seconds = 1420070400;
};

void validate(const SyntheticSpec& spec);
// Columns: timestamp, "target" (kind target).
TimeSeriesTable generate_synthetic(const SyntheticSpec& spec);

// Dataset adapters. Both return an unimputed table with missing_fraction set.
struct DatasetLoad {
  TimeSeriesTable table;
  std::string target;
  std::size_t raw_rows = 0;
  std::size_t raw_columns = 0;
  std::vector<std::string> notes;
};

// Weather CSV may be long (dt_iso, city_name, ...) or already wide; the
// generation CSV has header words joined by underscores on load.
DatasetLoad load_dataset1(const std::filesystem::path& weather_csv,
                          const std::filesystem::path& generation_csv);
// Solar-panel panel data; timestamp composed from Date (YYYYMMDD) and Time
// (HHMM), rows ordered by timestamp then Location.
DatasetLoad load_dataset2(const std::filesystem::path& csv);

}  // namespace renewcast::ingest
