#include "renewcast/table.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>

#include "renewcast/error.hpp"

namespace renewcast {

const char* to_string(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::kContinuous: return "continuous";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kTarget: return "target";
    case ColumnKind::kTimestamp: return "timestamp";
  }
  return "unknown";
}

const char* to_string(Frequency frequency) noexcept {
  return frequency == Frequency::kHourly ? "hourly" : "irregular";
}

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc() && ptr == first + len;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  std::size_t pos = 10;
  if (pos < text.size() && (text[pos] == ' ' || text[pos] == 'T')) {
    ++pos;
    if (!read_int(text, pos, 2, h) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
        !read_int(text, pos + 3, 2, mi)) {
      return std::nullopt;
    }
    pos += 5;
    if (pos < text.size() && text[pos] == ':') {
      if (!read_int(text, pos + 1, 2, s)) return std::nullopt;
      pos += 3;
    }
  }
  int offset = 0;
  if (pos < text.size()) {
    const char sign = text[pos];
    if (sign == 'Z') {
      ++pos;
    } else if (sign == '+' || sign == '-') {
      int oh = 0, om = 0;
      if (!read_int(text, pos + 1, 2, oh)) return std::nullopt;
      std::size_t next = pos + 3;
      if (next < text.size() && text[next] == ':') ++next;
      if (next < text.size() && !read_int(text, next, 2, om)) return std::nullopt;
      if (next < text.size()) next += 2;
      offset = (sign == '-' ? -1 : 1) * (oh * 60 + om);
      pos = next;
    }
  }
  if (pos != text.size()) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t local = days * 86400 + h * 3600 + mi * 60 + s;
  return Timestamp{local - 60 * static_cast<std::int64_t>(offset), offset};
}

std::string format_timestamp(const Timestamp& ts) {
  using namespace std::chrono;
  const std::int64_t local = ts.local_seconds();
  std::int64_t days = local / 86400;
  std::int64_t rem = local % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[48];
  const int off = ts.offset_minutes;
  const char sign = off < 0 ? '-' : '+';
  const int aoff = off < 0 ? -off : off;
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02d:%02d:%02d%c%02d:%02d",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60), sign,
                aoff / 60, aoff % 60);
  return buf;
}

const NumericValues& Column::numeric() const {
  if (const auto* v = std::get_if<NumericValues>(&values)) return *v;
  throw Error(ErrorCode::kInvalidArgument, "column '" + meta.name + "' is not numeric");
}

const CategoricalValues& Column::categorical() const {
  if (const auto* v = std::get_if<CategoricalValues>(&values)) return *v;
  throw Error(ErrorCode::kInvalidArgument, "column '" + meta.name + "' is not categorical");
}

std::size_t Column::size() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, values);
}

std::size_t Column::missing_count() const noexcept {
  return std::visit(
      [](const auto& v) {
        return static_cast<std::size_t>(
            std::count_if(v.begin(), v.end(), [](const auto& x) { return !x.has_value(); }));
      },
      values);
}

Frequency infer_frequency(const std::vector<Timestamp>& timestamps) noexcept {
  if (timestamps.size() < 2) return Frequency::kHourly;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    const std::int64_t dt = timestamps[i].utc_seconds - timestamps[i - 1].utc_seconds;
    if (dt <= 0 || dt % 3600 != 0) return Frequency::kIrregular;
  }
  return Frequency::kHourly;
}

TimeSeriesTable::TimeSeriesTable(std::string timestamp_name, std::vector<Timestamp> timestamps)
    : timestamp_name_(std::move(timestamp_name)), timestamps_(std::move(timestamps)) {
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    if (timestamps_[i] < timestamps_[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "timestamps must be nondecreasing");
    }
  }
  frequency_ = infer_frequency(timestamps_);
}

bool TimeSeriesTable::has_column(std::string_view name) const noexcept {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.meta.name == name; });
}

const Column& TimeSeriesTable::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.meta.name == name) return c;
  }
  throw Error(ErrorCode::kMissingColumn, std::string(name));
}

std::vector<std::string> TimeSeriesTable::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c.meta.name);
  return names;
}

std::vector<std::string> TimeSeriesTable::names_of_kind(ColumnKind kind) const {
  std::vector<std::string> names;
  for (const auto& c : columns_) {
    if (c.meta.kind == kind) names.push_back(c.meta.name);
  }
  return names;
}

std::vector<double> TimeSeriesTable::dense(std::string_view name) const {
  const auto& values = column(name).numeric();
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    if (!v) throw Error(ErrorCode::kInvalidArgument, "column '" + std::string(name) + "' has missing cells");
    out.push_back(*v);
  }
  return out;
}

void TimeSeriesTable::add_column(Column column) {
  if (column.meta.kind == ColumnKind::kTimestamp) {
    throw Error(ErrorCode::kInvalidArgument, "timestamp column is held separately");
  }
  if (column.size() != n_rows()) {
    throw Error(ErrorCode::kLengthMismatch,
                "column '" + column.meta.name + "' has " + std::to_string(column.size()) +
                    " rows, table has " + std::to_string(n_rows()));
  }
  if (has_column(column.meta.name) || column.meta.name == timestamp_name_) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate column '" + column.meta.name + "'");
  }
  columns_.push_back(std::move(column));
}

void TimeSeriesTable::replace_column(Column column) {
  for (auto& c : columns_) {
    if (c.meta.name == column.meta.name) {
      if (column.size() != n_rows()) {
        throw Error(ErrorCode::kLengthMismatch, "column '" + column.meta.name + "'");
      }
      c = std::move(column);
      return;
    }
  }
  throw Error(ErrorCode::kMissingColumn, column.meta.name);
}

void TimeSeriesTable::remove_column(std::string_view name) {
  auto it = std::find_if(columns_.begin(), columns_.end(),
                         [&](const Column& c) { return c.meta.name == name; });
  if (it == columns_.end()) throw Error(ErrorCode::kMissingColumn, std::string(name));
  columns_.erase(it);
}

void TimeSeriesTable::set_kind(std::string_view name, ColumnKind kind) {
  for (auto& c : columns_) {
    if (c.meta.name == name) {
      c.meta.kind = kind;
      return;
    }
  }
  throw Error(ErrorCode::kMissingColumn, std::string(name));
}

TimeSeriesTable TimeSeriesTable::select_rows(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> rows;
  end = std::min(end, n_rows());
  for (std::size_t i = begin; i < end; ++i) rows.push_back(i);
  return select_rows(rows);
}

TimeSeriesTable TimeSeriesTable::select_rows(const std::vector<std::size_t>& rows) const {
  std::vector<Timestamp> ts;
  ts.reserve(rows.size());
  for (auto r : rows) ts.push_back(timestamps_.at(r));
  TimeSeriesTable out(timestamp_name_, std::move(ts));
  for (const auto& c : columns_) {
    Column sub{c.meta, {}};
    std::visit(
        [&](const auto& v) {
          std::decay_t<decltype(v)> picked;
          picked.reserve(rows.size());
          for (auto r : rows) picked.push_back(v[r]);
          sub.values = std::move(picked);
        },
        c.values);
    out.columns_.push_back(std::move(sub));
  }
  return out;
}

bool operator==(const Column& a, const Column& b) {
  return a.meta.name == b.meta.name && a.meta.kind == b.meta.kind &&
         a.meta.missing_fraction == b.meta.missing_fraction && a.meta.unit == b.meta.unit &&
         a.values == b.values;
}

bool operator==(const TimeSeriesTable& a, const TimeSeriesTable& b) {
  if (a.timestamp_name() != b.timestamp_name() || a.n_rows() != b.n_rows()) return false;
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    if (a.timestamps()[i].utc_seconds != b.timestamps()[i].utc_seconds ||
        a.timestamps()[i].offset_minutes != b.timestamps()[i].offset_minutes) {
      return false;
    }
  }
  return a.columns() == b.columns();
}

}  // namespace renewcast
