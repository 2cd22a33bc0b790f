#include "renewcast/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "renewcast/error.hpp"
#include "renewcast/rng.hpp"

namespace renewcast::ingest {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<double> parse_number(std::string_view text) {
  std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

double missing_fraction_of(const Column& c) {
  const std::size_t n = c.size();
  return n == 0 ? 0.0 : static_cast<double>(c.missing_count()) / static_cast<double>(n);
}

}  // namespace

CsvDocument parse_csv(std::string_view text) {
  CsvDocument doc;
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kParseError, "unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();

  if (records.empty()) throw Error(ErrorCode::kEmptyFile, "no header row");
  doc.header = std::move(records.front());
  // Strip a UTF-8 byte-order mark from the first header cell.
  if (!doc.header.empty() && doc.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    doc.header[0].erase(0, 3);
  }
  for (auto& h : doc.header) h = trim(h);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != doc.header.size()) {
      throw Error(ErrorCode::kParseError, "row " + std::to_string(r + 1) + " has " +
                                              std::to_string(records[r].size()) +
                                              " fields, header has " +
                                              std::to_string(doc.header.size()));
    }
    doc.rows.push_back(std::move(records[r]));
  }
  return doc;
}

CsvDocument read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.empty()) throw Error(ErrorCode::kEmptyFile, path.string());
  return parse_csv(text);
}

TimeSeriesTable table_from_csv(const CsvDocument& doc, const std::vector<ColumnMeta>& schema,
                               const LoadOptions& options) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < doc.header.size(); ++i) index[doc.header[i]] = i;
  const ColumnMeta* ts_meta = nullptr;
  for (const auto& m : schema) {
    if (!index.count(m.name)) throw Error(ErrorCode::kMissingColumn, m.name);
    if (m.kind == ColumnKind::kTimestamp) {
      if (ts_meta) throw Error(ErrorCode::kInvalidArgument, "schema has two timestamp columns");
      ts_meta = &m;
    }
  }
  if (!ts_meta) throw Error(ErrorCode::kNoTimestamp, "schema declares no timestamp column");
  if (index.size() != schema.size()) {
    for (const auto& h : doc.header) {
      if (std::none_of(schema.begin(), schema.end(),
                       [&](const ColumnMeta& m) { return m.name == h; })) {
        throw Error(ErrorCode::kInvalidArgument, "column '" + h + "' not in schema");
      }
    }
  }
  if (doc.rows.empty()) throw Error(ErrorCode::kEmptyFile, "header only");

  const std::size_t ts_col = index.at(ts_meta->name);
  std::vector<Timestamp> stamps;
  stamps.reserve(doc.rows.size());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    auto ts = parse_timestamp(doc.rows[r][ts_col]);
    if (!ts) {
      throw Error(ErrorCode::kParseError,
                  "row " + std::to_string(r + 2) + ": bad timestamp '" + doc.rows[r][ts_col] + "'");
    }
    stamps.push_back(*ts);
  }
  std::vector<std::size_t> order(stamps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return stamps[a] < stamps[b]; });
  std::vector<Timestamp> sorted;
  sorted.reserve(order.size());
  for (auto i : order) sorted.push_back(stamps[i]);
  if (!options.allow_duplicate_timestamps) {
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1]) {
        throw Error(ErrorCode::kDuplicateTimestamp, format_timestamp(sorted[i]));
      }
    }
  }

  TimeSeriesTable table(ts_meta->name, std::move(sorted));
  for (const auto& m : schema) {
    if (m.kind == ColumnKind::kTimestamp) continue;
    const std::size_t col = index.at(m.name);
    Column column{m, {}};
    if (m.kind == ColumnKind::kCategorical) {
      CategoricalValues values;
      values.reserve(order.size());
      for (auto r : order) {
        std::string v = trim(doc.rows[r][col]);
        values.push_back(v.empty() ? std::nullopt : std::optional<std::string>(std::move(v)));
      }
      column.values = std::move(values);
    } else {
      NumericValues values;
      values.reserve(order.size());
      for (auto r : order) values.push_back(parse_number(doc.rows[r][col]));
      column.values = std::move(values);
    }
    column.meta.missing_fraction = missing_fraction_of(column);
    table.add_column(std::move(column));
  }
  return table;
}

TimeSeriesTable load_csv_table(const std::filesystem::path& path,
                               const std::vector<ColumnMeta>& schema, const LoadOptions& options) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kIoError, "no such file " + path.string());
  return table_from_csv(read_csv(path), schema, options);
}

TimeSeriesTable merge_hourly(const TimeSeriesTable& weather, const TimeSeriesTable& generation) {
  if (weather.frequency() != Frequency::kHourly || generation.frequency() != Frequency::kHourly) {
    throw Error(ErrorCode::kFrequencyMismatch, "merge_hourly needs two hourly tables");
  }
  std::vector<std::size_t> wi, gi;
  std::size_t a = 0, b = 0;
  const auto& wt = weather.timestamps();
  const auto& gt = generation.timestamps();
  while (a < wt.size() && b < gt.size()) {
    if (wt[a] < gt[b]) {
      ++a;
    } else if (gt[b] < wt[a]) {
      ++b;
    } else {
      wi.push_back(a++);
      gi.push_back(b++);
    }
  }
  if (wi.empty()) throw Error(ErrorCode::kNoOverlap, "no common timestamps");
  const TimeSeriesTable w = weather.select_rows(wi);
  const TimeSeriesTable g = generation.select_rows(gi);
  // Generation timestamps carry the local offset used for calendar features.
  TimeSeriesTable merged(generation.timestamp_name(), g.timestamps());
  for (const auto& c : g.columns()) merged.add_column(c);
  for (const auto& c : w.columns()) {
    if (merged.has_column(c.meta.name)) {
      throw Error(ErrorCode::kInvalidArgument, "column '" + c.meta.name + "' in both tables");
    }
    merged.add_column(c);
  }
  return merged;
}

PivotResult pivot_city_weather(const CsvDocument& doc, const std::string& time_column,
                               const std::string& city_column,
                               const std::vector<std::string>& variables) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < doc.header.size(); ++i) index[doc.header[i]] = i;
  for (const auto& name : {time_column, city_column}) {
    if (!index.count(name)) throw Error(ErrorCode::kMissingColumn, name);
  }
  std::vector<std::string> present;
  for (const auto& v : variables) {
    if (index.count(v)) present.push_back(v);
  }
  const std::size_t tcol = index.at(time_column);
  const std::size_t ccol = index.at(city_column);

  std::set<std::string> cities;
  std::map<std::int64_t, Timestamp> instants;
  // (instant, city) -> source row; first occurrence wins.
  std::map<std::pair<std::int64_t, std::string>, std::size_t> cell_row;
  PivotResult result;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    auto ts = parse_timestamp(doc.rows[r][tcol]);
    if (!ts) throw Error(ErrorCode::kParseError, "bad timestamp '" + doc.rows[r][tcol] + "'");
    std::string city = trim(doc.rows[r][ccol]);
    cities.insert(city);
    instants.emplace(ts->utc_seconds, *ts);
    if (!cell_row.emplace(std::make_pair(ts->utc_seconds, city), r).second) {
      ++result.duplicate_rows_skipped;
    }
  }
  if (instants.empty()) throw Error(ErrorCode::kEmptyFile, "weather file has no rows");

  std::vector<Timestamp> stamps;
  std::map<std::int64_t, std::size_t> row_of;
  for (const auto& [utc, ts] : instants) {
    row_of[utc] = stamps.size();
    stamps.push_back(ts);
  }
  TimeSeriesTable table(time_column, stamps);
  for (const auto& var : present) {
    const std::size_t vcol = index.at(var);
    for (const auto& city : cities) {
      NumericValues values(stamps.size());
      for (const auto& [utc, ts] : instants) {
        auto it = cell_row.find({utc, city});
        if (it != cell_row.end()) values[row_of[utc]] = parse_number(doc.rows[it->second][vcol]);
      }
      Column c{ColumnMeta{var + "_" + city, ColumnKind::kContinuous, 0.0, ""}, std::move(values)};
      c.meta.missing_fraction = missing_fraction_of(c);
      table.add_column(std::move(c));
    }
  }
  result.table = std::move(table);
  return result;
}

ImputeStats fit_impute_stats(const TimeSeriesTable& table, std::size_t train_end) {
  train_end = std::min(train_end, table.n_rows());
  if (train_end == 0) throw Error(ErrorCode::kEmptyTrainRange, "impute statistics need rows");
  ImputeStats stats;
  stats.fit_rows = train_end;
  for (const auto& c : table.columns()) {
    if (c.is_numeric()) {
      const auto& v = c.numeric();
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < train_end; ++i) {
        if (v[i]) {
          sum += *v[i];
          ++count;
        }
      }
      if (count == 0) throw Error(ErrorCode::kAllMissingColumn, c.meta.name);
      stats.means[c.meta.name] = sum / static_cast<double>(count);
    } else {
      const auto& v = c.categorical();
      std::map<std::string, std::size_t> freq;
      for (std::size_t i = 0; i < train_end; ++i) {
        if (v[i]) ++freq[*v[i]];
      }
      if (freq.empty()) throw Error(ErrorCode::kAllMissingColumn, c.meta.name);
      // Ties resolve to the lexicographically smallest label.
      auto best = freq.begin();
      for (auto it = freq.begin(); it != freq.end(); ++it) {
        if (it->second > best->second) best = it;
      }
      stats.modes[c.meta.name] = best->first;
    }
  }
  return stats;
}

namespace {

template <typename T>
std::pair<std::size_t, std::size_t> fill_runs(std::vector<std::optional<T>>& v, const T& fallback) {
  std::size_t ffill = 0, stat = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    if (v[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < v.size() && !v[j]) ++j;
    const std::size_t run = j - i;
    if (i > 0 && run <= kForwardFillLimit) {
      const T last = *v[i - 1];
      for (std::size_t k = i; k < j; ++k) v[k] = last;
      ffill += run;
    } else {
      for (std::size_t k = i; k < j; ++k) v[k] = fallback;
      stat += run;
    }
    i = j;
  }
  return {ffill, stat};
}

}  // namespace

TimeSeriesTable impute_gaps(const TimeSeriesTable& table, const ImputeStats& stats, ImputeLog* log) {
  TimeSeriesTable out = table;
  for (const auto& c : table.columns()) {
    if (c.missing_count() == 0) continue;
    Column filled = c;
    std::pair<std::size_t, std::size_t> counts;
    if (c.is_numeric()) {
      auto it = stats.means.find(c.meta.name);
      if (it == stats.means.end()) throw Error(ErrorCode::kAllMissingColumn, c.meta.name);
      counts = fill_runs(std::get<NumericValues>(filled.values), it->second);
    } else {
      auto it = stats.modes.find(c.meta.name);
      if (it == stats.modes.end()) throw Error(ErrorCode::kAllMissingColumn, c.meta.name);
      counts = fill_runs(std::get<CategoricalValues>(filled.values), it->second);
    }
    if (log) {
      log->forward_filled[c.meta.name] += counts.first;
      log->statistic_filled[c.meta.name] += counts.second;
    }
    out.replace_column(std::move(filled));
  }
  return out;
}

TimeSeriesTable impute_gaps(const TimeSeriesTable& table) {
  return impute_gaps(table, fit_impute_stats(table, table.n_rows()));
}

std::pair<TimeSeriesTable, std::vector<std::string>> drop_sparse_columns(
    const TimeSeriesTable& table, double threshold) {
  TimeSeriesTable out = table;
  std::vector<std::string> dropped;
  for (const auto& c : table.columns()) {
    if (c.meta.kind == ColumnKind::kTarget) continue;
    if (c.meta.missing_fraction > threshold) {
      dropped.push_back(c.meta.name);
      out.remove_column(c.meta.name);
    }
  }
  if (out.columns().empty()) throw Error(ErrorCode::kAllColumnsDropped, "threshold " + std::to_string(threshold));
  return {std::move(out), std::move(dropped)};
}

void validate(const SyntheticSpec& spec) {
  if (spec.n_rows == 0) throw Error(ErrorCode::kInvalidArgument, "n_rows must be positive");
  if (!(spec.noise_std >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_std must be >= 0");
  if (!(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "missing_rate must lie in [0,1)");
  }
  if (spec.missing_rate > 0.0) {
    if (spec.gap_max_len == 0) throw Error(ErrorCode::kInvalidArgument, "gap_max_len must be >= 1");
    const double mean_run = 0.5 * (1.0 + static_cast<double>(spec.gap_max_len));
    if (spec.missing_rate / (mean_run * (1.0 - spec.missing_rate)) > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "missing_rate unreachable with this gap_max_len");
    }
  }
  for (const auto& term : spec.seasonal_periods) {
    if (!(term.period_steps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "period must be positive");
  }
}

TimeSeriesTable generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::vector<Timestamp> stamps(spec.n_rows);
  for (std::size_t t = 0; t < spec.n_rows; ++t) {
    stamps[t] = Timestamp{spec.start_utc_seconds + static_cast<std::int64_t>(t) * 3600, 0};
  }
  Rng noise_rng(derive_seed(spec.seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  NumericValues target(spec.n_rows);
  for (std::size_t t = 0; t < spec.n_rows; ++t) {
    const double td = static_cast<double>(t);
    double y = spec.trend_slope * td;
    for (const auto& term : spec.seasonal_periods) {
      y += term.amplitude * std::sin(kTwoPi * td / term.period_steps);
    }
    if (spec.noise_std > 0.0) y += spec.noise_std * normal(noise_rng);
    target[t] = y;
  }
  if (spec.missing_rate > 0.0) {
    // Alternating renewal process: after each observed cell a gap starts with
    // probability q; its length is uniform on [1, gap_max_len]. The long-run
    // missing fraction is q*m/(1+q*m) with m the mean gap length.
    Rng gap_rng(derive_seed(spec.seed, 2));
    const double mean_run = 0.5 * (1.0 + static_cast<double>(spec.gap_max_len));
    const double q = spec.missing_rate / (mean_run * (1.0 - spec.missing_rate));
    std::uniform_int_distribution<std::size_t> run_len(1, spec.gap_max_len);
    std::size_t t = 0;
    while (t < spec.n_rows) {
      if (uniform01(gap_rng) < q) {
        const std::size_t len = run_len(gap_rng);
        for (std::size_t k = 0; k < len && t < spec.n_rows; ++k) target[t++] = std::nullopt;
      }
      ++t;  // at least one observed cell between gaps
    }
  }
  TimeSeriesTable table("timestamp", std::move(stamps));
  Column c{ColumnMeta{"target", ColumnKind::kTarget, 0.0, ""}, std::move(target)};
  c.meta.missing_fraction = missing_fraction_of(c);
  table.add_column(std::move(c));
  return table;
}

namespace {

std::string normalize_header(const std::string& h) {
  std::string out;
  for (char c : trim(h)) {
    if (c == ' ' || c == '-' || c == '/') {
      if (!out.empty() && out.back() != '_') out.push_back('_');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

const std::vector<std::string>& weather_variables() {
  static const std::vector<std::string> vars = {"temp",     "temp_min", "temp_max", "pressure",
                                                "humidity", "wind_speed", "wind_deg", "rain_1h",
                                                "rain_3h",  "snow_3h",    "clouds_all"};
  return vars;
}

NumericValues sum_columns(const TimeSeriesTable& t, const std::vector<std::string>& names) {
  NumericValues out(t.n_rows(), 0.0);
  for (const auto& name : names) {
    const auto& v = t.column(name).numeric();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!out[i] || !v[i]) {
        out[i] = std::nullopt;
      } else {
        *out[i] += *v[i];
      }
    }
  }
  return out;
}

}  // namespace

DatasetLoad load_dataset1(const std::filesystem::path& weather_csv,
                          const std::filesystem::path& generation_csv) {
  for (const auto& p : {weather_csv, generation_csv}) {
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::kDatasetMissing, p.string());
  }
  DatasetLoad load;

  CsvDocument gen_doc = read_csv(generation_csv);
  for (auto& h : gen_doc.header) h = normalize_header(h);
  const std::string gen_time = std::find(gen_doc.header.begin(), gen_doc.header.end(), "time") !=
                                       gen_doc.header.end()
                                   ? "time"
                                   : gen_doc.header.front();
  std::vector<ColumnMeta> gen_schema;
  for (const auto& h : gen_doc.header) {
    gen_schema.push_back({h, h == gen_time ? ColumnKind::kTimestamp : ColumnKind::kContinuous, 0.0, ""});
  }
  TimeSeriesTable raw_gen = table_from_csv(gen_doc, gen_schema);

  // Renewable generation variables, aggregating split sub-series when the
  // source file reports them separately.
  TimeSeriesTable gen(raw_gen.timestamp_name(), raw_gen.timestamps());
  auto with_prefix = [&](const std::string& prefix) {
    std::vector<std::string> names;
    for (const auto& n : raw_gen.column_names()) {
      if (n.rfind(prefix, 0) == 0 && n.find("consumption") == std::string::npos &&
          n.find("forecast") == std::string::npos) {
        names.push_back(n);
      }
    }
    return names;
  };
  std::vector<std::string> renewable;
  for (const std::string base : {"generation_hydro", "generation_other_renewable",
                                 "generation_solar", "generation_wind"}) {
    std::vector<std::string> parts;
    if (raw_gen.has_column(base)) {
      parts = {base};
    } else {
      parts = with_prefix(base);
      if (base == "generation_other_renewable" || base == "generation_solar") parts.clear();
    }
    if (parts.empty()) {
      load.notes.push_back("generation file lacks " + base);
      continue;
    }
    Column c{ColumnMeta{base, ColumnKind::kContinuous, 0.0, "MW"}, sum_columns(raw_gen, parts)};
    c.meta.missing_fraction = missing_fraction_of(c);
    gen.add_column(std::move(c));
    renewable.push_back(base);
    if (parts.size() > 1) load.notes.push_back(base + " aggregated from " + std::to_string(parts.size()) + " columns");
  }
  if (renewable.empty()) throw Error(ErrorCode::kMissingColumn, "generation_* columns");
  if (raw_gen.has_column("renewable_total")) {
    gen.add_column(raw_gen.column("renewable_total"));
  } else {
    Column c{ColumnMeta{"renewable_total", ColumnKind::kContinuous, 0.0, "MW"},
             sum_columns(gen, renewable)};
    c.meta.missing_fraction = missing_fraction_of(c);
    gen.add_column(std::move(c));
  }
  gen.set_kind("renewable_total", ColumnKind::kTarget);

  CsvDocument w_doc = read_csv(weather_csv);
  TimeSeriesTable weather;
  const bool long_format =
      std::find(w_doc.header.begin(), w_doc.header.end(), "city_name") != w_doc.header.end();
  if (long_format) {
    const std::string time_col =
        std::find(w_doc.header.begin(), w_doc.header.end(), "dt_iso") != w_doc.header.end()
            ? "dt_iso"
            : "time";
    PivotResult pivot = pivot_city_weather(w_doc, time_col, "city_name", weather_variables());
    if (pivot.duplicate_rows_skipped > 0) {
      load.notes.push_back("weather: skipped " + std::to_string(pivot.duplicate_rows_skipped) +
                           " repeated (instant, city) rows");
    }
    weather = std::move(pivot.table);
  } else {
    std::vector<ColumnMeta> schema;
    for (const auto& h : w_doc.header) {
      schema.push_back({h, schema.empty() ? ColumnKind::kTimestamp : ColumnKind::kContinuous, 0.0, ""});
    }
    weather = table_from_csv(w_doc, schema);
  }

  load.raw_rows = gen.n_rows();
  load.raw_columns = gen_doc.header.size();
  load.table = merge_hourly(weather, gen);
  load.target = "renewable_total";
  return load;
}

DatasetLoad load_dataset2(const std::filesystem::path& csv) {
  if (!std::filesystem::exists(csv)) throw Error(ErrorCode::kDatasetMissing, csv.string());
  const CsvDocument doc = read_csv(csv);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < doc.header.size(); ++i) index[doc.header[i]] = i;
  for (const char* required : {"Location", "Date", "Time", "PolyPwr"}) {
    if (!index.count(required)) throw Error(ErrorCode::kMissingColumn, required);
  }
  DatasetLoad load;
  load.raw_rows = doc.rows.size();
  load.raw_columns = doc.header.size();
  if (doc.rows.empty()) throw Error(ErrorCode::kEmptyFile, csv.string());

  struct Row {
    Timestamp ts;
    std::string location;
    std::size_t source;
  };
  std::vector<Row> rows;
  rows.reserve(doc.rows.size());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    std::string date = trim(doc.rows[r][index["Date"]]);
    std::string time = trim(doc.rows[r][index["Time"]]);
    while (time.size() < 4) time.insert(time.begin(), '0');
    if (date.size() != 8) throw Error(ErrorCode::kParseError, "bad Date '" + date + "'");
    const std::string iso = date.substr(0, 4) + "-" + date.substr(4, 2) + "-" + date.substr(6, 2) +
                            " " + time.substr(0, 2) + ":" + time.substr(2, 2);
    auto ts = parse_timestamp(iso);
    if (!ts) throw Error(ErrorCode::kParseError, "bad Date/Time '" + date + " " + time + "'");
    rows.push_back({*ts, trim(doc.rows[r][index["Location"]]), r});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.ts.utc_seconds != b.ts.utc_seconds) return a.ts.utc_seconds < b.ts.utc_seconds;
    return a.location < b.location;
  });
  std::vector<Timestamp> stamps;
  for (const auto& r : rows) stamps.push_back(r.ts);
  TimeSeriesTable table("timestamp", std::move(stamps));

  CategoricalValues location;
  for (const auto& r : rows) location.emplace_back(r.location);
  table.add_column(Column{ColumnMeta{"Location", ColumnKind::kCategorical, 0.0, ""}, std::move(location)});
  for (const char* name : {"Latitude", "Longitude", "Altitude", "Humidity", "AmbientTemp", "PolyPwr",
                           "Wind.Speed", "Visibility", "Pressure", "Cloud.Ceiling"}) {
    if (!index.count(name)) {
      load.notes.push_back(std::string("dataset-2 file lacks ") + name);
      continue;
    }
    NumericValues values;
    for (const auto& r : rows) values.push_back(parse_number(doc.rows[r.source][index[name]]));
    Column c{ColumnMeta{name, std::string(name) == "PolyPwr" ? ColumnKind::kTarget : ColumnKind::kContinuous,
                        0.0, ""},
             std::move(values)};
    c.meta.missing_fraction = missing_fraction_of(c);
    table.add_column(std::move(c));
  }
  load.notes.push_back("Date/Time/YRMODAHRMI/Month/Hour/Season replaced by calendar features");
  load.table = std::move(table);
  load.target = "PolyPwr";
  return load;
}

}  // namespace renewcast::ingest
