#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace renewcast {

enum class ColumnKind { kContinuous, kCategorical, kTarget, kTimestamp };
enum class Frequency { kHourly, kIrregular };

const char* to_string(ColumnKind kind) noexcept;
const char* to_string(Frequency frequency) noexcept;

struct ColumnMeta {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  // Fraction of raw rows that were missing before any imputation.
  double missing_fraction = 0.0;
  std::string unit;
};

// Wall-clock instant. Ordering and joins use utc_seconds; calendar features
// use the local time utc_seconds + 60 * offset_minutes.
struct Timestamp {
  std::int64_t utc_seconds = 0;
  std::int32_t offset_minutes = 0;

  std::int64_t local_seconds() const noexcept {
    return utc_seconds + 60 * static_cast<std::int64_t>(offset_minutes);
  }
  friend bool operator==(const Timestamp& a, const Timestamp& b) noexcept {
    return a.utc_seconds == b.utc_seconds;
  }
  friend auto operator<=>(const Timestamp& a, const Timestamp& b) noexcept {
    return a.utc_seconds <=> b.utc_seconds;
  }
};

// Parses "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS]" and the same with a 'T'
// separator and an optional "Z" / "+HH:MM" / "-HH:MM" offset.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& ts);

// std::nullopt is the missing marker; real zeros stay zeros.
using NumericValues = std::vector<std::optional<double>>;
using CategoricalValues = std::vector<std::optional<std::string>>;

struct Column {
  ColumnMeta meta;
  std::variant<NumericValues, CategoricalValues> values;

  bool is_numeric() const noexcept { return std::holds_alternative<NumericValues>(values); }
  const NumericValues& numeric() const;
  const CategoricalValues& categorical() const;
  std::size_t size() const noexcept;
  std::size_t missing_count() const noexcept;
};

// Timestamp-indexed columnar table. Instances are values: every operation in
// the ingest and features modules returns a new table.
class TimeSeriesTable {
 public:
  TimeSeriesTable() = default;
  TimeSeriesTable(std::string timestamp_name, std::vector<Timestamp> timestamps);

  std::size_t n_rows() const noexcept { return timestamps_.size(); }
  Frequency frequency() const noexcept { return frequency_; }
  const std::string& timestamp_name() const noexcept { return timestamp_name_; }
  const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  bool has_column(std::string_view name) const noexcept;
  const Column& column(std::string_view name) const;
  std::vector<std::string> column_names() const;
  std::vector<std::string> names_of_kind(ColumnKind kind) const;

  // Dense copy of a numeric column; throws if any cell is missing.
  std::vector<double> dense(std::string_view name) const;

  // Builders used while constructing a new table.
  void add_column(Column column);
  void replace_column(Column column);
  void remove_column(std::string_view name);
  void set_kind(std::string_view name, ColumnKind kind);

  TimeSeriesTable select_rows(std::size_t begin, std::size_t end) const;
  TimeSeriesTable select_rows(const std::vector<std::size_t>& rows) const;

 private:
  std::string timestamp_name_ = "timestamp";
  std::vector<Timestamp> timestamps_;
  std::vector<Column> columns_;
  Frequency frequency_ = Frequency::kIrregular;
};

Frequency infer_frequency(const std::vector<Timestamp>& timestamps) noexcept;

bool operator==(const Column& a, const Column& b);
bool operator==(const TimeSeriesTable& a, const TimeSeriesTable& b);

}  // namespace renewcast
