#include "renewcast/features.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "renewcast/error.hpp"

namespace renewcast::features {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_range(const TimeSeriesTable& table, RowRange rows) {
  if (rows.size() == 0) throw Error(ErrorCode::kEmptyTrainRange, "training range is empty");
  if (rows.end > table.n_rows()) {
    throw Error(ErrorCode::kInvalidArgument, "training range exceeds table rows");
  }
}

bool is_feature(const Column& c) {
  return c.is_numeric() && c.meta.kind == ColumnKind::kContinuous;
}

}  // namespace

ScalingParams fit_minmax(const TimeSeriesTable& table, RowRange train_rows,
                         const std::vector<std::string>& columns) {
  check_range(table, train_rows);
  std::vector<std::string> names = columns;
  if (names.empty()) {
    for (const auto& c : table.columns()) {
      if (c.is_numeric()) names.push_back(c.meta.name);
    }
  }
  ScalingParams params;
  params.fit_rows = train_rows;
  for (const auto& name : names) {
    const auto& values = table.column(name).numeric();
    MinMax mm{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = train_rows.begin; i < train_rows.end; ++i) {
      if (!values[i]) continue;
      mm.min = std::min(mm.min, *values[i]);
      mm.max = std::max(mm.max, *values[i]);
    }
    if (mm.min > mm.max) throw Error(ErrorCode::kAllMissingColumn, name);
    params.columns[name] = mm;
  }
  return params;
}

std::vector<double> scale(std::span<const double> values, const MinMax& params, Direction direction) {
  std::vector<double> out(values.size());
  const double range = params.max - params.min;
  const bool degenerate = params.degenerate();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (direction == Direction::kForward) {
      out[i] = degenerate ? 0.0 : (values[i] - params.min) / range;
    } else {
      out[i] = params.min + values[i] * range;
    }
  }
  return out;
}

std::vector<double> scale(std::span<const double> values, const ScalingParams& params,
                          const std::string& column, Direction direction) {
  auto it = params.columns.find(column);
  if (it == params.columns.end()) throw Error(ErrorCode::kUnfittedColumn, column);
  return scale(values, it->second, direction);
}

LooResult loo_encode(const TimeSeriesTable& table, const std::string& cat_column,
                     const std::string& target_column, RowRange train_rows) {
  check_range(table, train_rows);
  const auto& labels = table.column(cat_column).categorical();
  const auto& target = table.column(target_column).numeric();
  LooResult result;
  result.map.column = cat_column;
  double total = 0.0;
  for (std::size_t i = train_rows.begin; i < train_rows.end; ++i) {
    if (!target[i]) {
      throw Error(ErrorCode::kTargetMissingInTrain, target_column + " row " + std::to_string(i));
    }
    total += *target[i];
    if (labels[i]) {
      auto& s = result.map.categories[*labels[i]];
      s.target_sum += *target[i];
      ++s.count;
    }
  }
  result.map.global_target_mean = total / static_cast<double>(train_rows.size());
  std::vector<double> dense(target.size(), 0.0);
  for (std::size_t i = 0; i < target.size(); ++i) dense[i] = target[i].value_or(0.0);
  result.encoded = loo_apply(result.map, labels, dense, train_rows);
  return result;
}

std::vector<double> loo_apply(const LooEncoderMap& map, const CategoricalValues& labels,
                              std::span<const double> target, RowRange train_rows) {
  if (target.size() != labels.size()) throw Error(ErrorCode::kLengthMismatch, "loo_apply");
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = labels[i] ? map.categories.find(*labels[i]) : map.categories.end();
    if (it == map.categories.end()) {
      out[i] = map.global_target_mean;
      continue;
    }
    const CategoryStats& s = it->second;
    if (train_rows.contains(i)) {
      // A training row never sees its own target; with no other rows in its
      // category it falls back to the global mean.
      out[i] = s.count >= 2 ? (s.target_sum - target[i]) / static_cast<double>(s.count - 1)
                            : map.global_target_mean;
    } else {
      out[i] = s.target_sum / static_cast<double>(s.count);
    }
  }
  return out;
}

TimeSeriesTable add_cyclical_calendar(const TimeSeriesTable& table) {
  if (table.timestamp_name().empty()) throw Error(ErrorCode::kNoTimestamp, "table has no timestamp");
  using namespace std::chrono;
  const std::size_t n = table.n_rows();
  std::vector<NumericValues> cols(calendar_columns().size(), NumericValues(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t local = table.timestamps()[i].local_seconds();
    std::int64_t days = local / 86400;
    std::int64_t rem = local % 86400;
    if (rem < 0) {
      rem += 86400;
      --days;
    }
    const sys_days day{std::chrono::days{days}};
    const year_month_day ymd{day};
    const unsigned month = static_cast<unsigned>(ymd.month());
    const double hour = static_cast<double>(rem / 3600);
    const unsigned wd = weekday{day}.c_encoding();  // 0 = Sunday
    const double hour_phase = kTwoPi * hour / 24.0;
    const double month_phase = kTwoPi * static_cast<double>(month - 1) / 12.0;
    cols[0][i] = std::sin(hour_phase);
    cols[1][i] = std::cos(hour_phase);
    cols[2][i] = std::sin(month_phase);
    cols[3][i] = std::cos(month_phase);
    cols[4][i] = (wd == 0 || wd == 6) ? 1.0 : 0.0;
    cols[5][i] = (month >= 3 && month <= 5) ? 1.0 : 0.0;
    cols[6][i] = (month >= 6 && month <= 8) ? 1.0 : 0.0;
    cols[7][i] = (month == 12 || month <= 2) ? 1.0 : 0.0;
  }
  TimeSeriesTable out = table;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.add_column(Column{ColumnMeta{calendar_columns()[k], ColumnKind::kContinuous, 0.0, ""},
                          std::move(cols[k])});
  }
  return out;
}

std::vector<double> difference(std::span<const double> series) {
  if (series.size() < 2) throw Error(ErrorCode::kTooShort, "cannot difference fewer than 2 values");
  std::vector<double> out(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) out[i - 1] = series[i] - series[i - 1];
  return out;
}

std::vector<double> undifference(std::span<const double> diffed,
                                 std::span<const double> initial_values) {
  // initial_values[j] is the first value of the series differenced j times.
  std::vector<double> current(diffed.begin(), diffed.end());
  for (std::size_t j = initial_values.size(); j-- > 0;) {
    std::vector<double> up(current.size() + 1);
    up[0] = initial_values[j];
    for (std::size_t i = 0; i < current.size(); ++i) up[i + 1] = up[i] + current[i];
    current = std::move(up);
  }
  return current;
}

namespace {

stats::StationarityReport retest(std::span<const double> series) {
  const bool constant =
      std::all_of(series.begin(), series.end(), [&](double v) { return v == series.front(); });
  if (constant) {
    stats::StationarityReport r;
    r.adf_pvalue = 0.0;
    r.kpss_pvalue = 0.1;
    r.verdict = stats::Verdict::kStationary;
    return r;
  }
  return stats::stationarity_report(series);
}

}  // namespace

Stationarized stationarize(std::span<const double> series, const stats::StationarityReport& report) {
  Stationarized out;
  out.series.assign(series.begin(), series.end());
  stats::Verdict verdict = report.verdict;
  while (verdict != stats::Verdict::kStationary) {
    if (out.order == kMaxDifferencingOrder) {
      throw Error(ErrorCode::kStillNonStationary,
                  "non-stationary after " + std::to_string(kMaxDifferencingOrder) + " differences");
    }
    out.initial_values.push_back(out.series.front());
    out.series = difference(out.series);
    ++out.order;
    out.retests.push_back(retest(out.series));
    verdict = out.retests.back().verdict;
  }
  return out;
}

CorrelationFilterResult correlation_filter(const TimeSeriesTable& table,
                                           const std::string& target_column, double threshold,
                                           std::optional<RowRange> train_rows) {
  const RowRange rows = train_rows.value_or(RowRange{0, table.n_rows()});
  check_range(table, rows);
  auto slice = [&](const std::string& name) {
    const auto& v = table.column(name).numeric();
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = rows.begin; i < rows.end; ++i) {
      if (!v[i]) throw Error(ErrorCode::kInvalidArgument, "missing value in '" + name + "'");
      out.push_back(*v[i]);
    }
    return out;
  };
  const std::vector<double> target = slice(target_column);
  if (std::all_of(target.begin(), target.end(), [&](double v) { return v == target.front(); })) {
    throw Error(ErrorCode::kZeroVarianceTarget, target_column);
  }

  CorrelationFilterResult result;
  std::vector<std::vector<double>> values;
  for (const auto& c : table.columns()) {
    if (!is_feature(c) || c.meta.name == target_column) continue;
    result.features.push_back(c.meta.name);
    values.push_back(slice(c.meta.name));
  }
  const auto d = static_cast<Eigen::Index>(result.features.size());
  result.correlation = stats::Matrix::Identity(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double r = stats::pearson(values[static_cast<std::size_t>(i)], values[static_cast<std::size_t>(j)]);
      result.correlation(i, j) = r;
      result.correlation(j, i) = r;
    }
  }
  result.table = table;
  for (std::size_t k = 0; k < result.features.size(); ++k) {
    result.target_correlation[result.features[k]] = stats::pearson(values[k], target);
  }
  // A sine/cosine pair encodes one cyclical variable, so both halves share
  // the stronger of their two scores.
  auto score = [&](const std::string& name) {
    double r = std::abs(result.target_correlation.at(name));
    for (const auto& [a, b] : cyclical_pairs()) {
      const std::string* other = name == a ? &b : name == b ? &a : nullptr;
      if (other && result.target_correlation.count(*other)) {
        r = std::max(r, std::abs(result.target_correlation.at(*other)));
      }
    }
    return r;
  };
  for (std::size_t k = 0; k < result.features.size(); ++k) {
    if (score(result.features[k]) < threshold) {
      result.dropped.push_back(result.features[k]);
      result.table.remove_column(result.features[k]);
    }
  }
  return result;
}

std::vector<std::string> TransformPlan::channel_names() const {
  std::vector<std::string> names;
  if (pca) {
    for (std::size_t k = 0; k < pca->n_components(); ++k) names.push_back("pc" + std::to_string(k + 1));
  } else {
    names = features;
  }
  names.push_back(target);
  return names;
}

namespace {

// Imputation, encoding and differencing. Shared verbatim by fit and replay so
// the replayed training rows equal the fitted ones.
TimeSeriesTable pre_scale(const TransformPlan& plan, const TimeSeriesTable& table) {
  TimeSeriesTable t = plan.options.impute ? ingest::impute_gaps(table, plan.impute) : table;
  std::vector<double> target(t.n_rows());
  {
    const auto& tv = t.column(plan.target).numeric();
    for (std::size_t i = 0; i < tv.size(); ++i) {
      if (!tv[i]) throw Error(ErrorCode::kInvalidArgument, "target has missing values");
      target[i] = *tv[i];
    }
  }
  for (const auto& name : t.names_of_kind(ColumnKind::kCategorical)) {
    auto enc = std::find_if(plan.encoders.begin(), plan.encoders.end(),
                            [&](const LooEncoderMap& m) { return m.column == name; });
    if (enc == plan.encoders.end()) {
      t.remove_column(name);
      continue;
    }
    const auto codes = loo_apply(*enc, t.column(name).categorical(), target, plan.fit_rows);
    NumericValues values(codes.begin(), codes.end());
    t.remove_column(name);
    t.add_column(Column{ColumnMeta{name, ColumnKind::kContinuous, 0.0, "encoded"}, std::move(values)});
  }
  for (const auto& [name, order] : plan.differencing) {
    if (order == 0) continue;
    Column c = t.column(name);
    auto& v = std::get<NumericValues>(c.values);
    for (int k = 0; k < order; ++k) {
      for (std::size_t i = v.size(); i-- > 0;) {
        v[i] = (i == 0 || !v[i] || !v[i - 1]) ? std::nullopt : std::optional<double>(*v[i] - *v[i - 1]);
      }
    }
    t.replace_column(std::move(c));
  }
  return t;
}

}  // namespace

TransformPlan fit_plan(const TimeSeriesTable& table, const std::string& target, RowRange train_rows,
                       const PlanOptions& options) {
  check_range(table, train_rows);
  if (!table.has_column(target)) throw Error(ErrorCode::kMissingColumn, target);
  TransformPlan plan;
  plan.fit_rows = train_rows;
  plan.target = target;
  plan.options = options;
  if (options.impute) plan.impute = ingest::fit_impute_stats(table, train_rows.end);
  const TimeSeriesTable imputed = options.impute ? ingest::impute_gaps(table, plan.impute) : table;

  if (options.encode) {
    for (const auto& name : imputed.names_of_kind(ColumnKind::kCategorical)) {
      plan.encoders.push_back(loo_encode(imputed, name, target, train_rows).map);
    }
  }

  if (options.stationarize) {
    const auto& calendar = calendar_columns();
    for (const auto& c : imputed.columns()) {
      if (!is_feature(c)) continue;
      if (std::find(calendar.begin(), calendar.end(), c.meta.name) != calendar.end()) continue;
      std::vector<double> series;
      series.reserve(train_rows.size());
      for (std::size_t i = train_rows.begin; i < train_rows.end; ++i) {
        const auto& v = c.numeric()[i];
        if (!v) throw Error(ErrorCode::kInvalidArgument, "missing value in '" + c.meta.name + "'");
        series.push_back(*v);
      }
      int order = 0;
      if (series.size() >= 50) {
        try {
          order = stationarize(series, retest(series)).order;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kStillNonStationary) {
            order = kMaxDifferencingOrder;
          } else if (e.code() != ErrorCode::kDegenerateSeries && e.code() != ErrorCode::kSingularDesign) {
            throw;
          }
        }
      }
      plan.differencing[c.meta.name] = order;
      plan.lead_rows = std::max(plan.lead_rows, static_cast<std::size_t>(order));
    }
  }

  const TimeSeriesTable pre = pre_scale(plan, table);
  const RowRange fit{std::max(train_rows.begin, plan.lead_rows), train_rows.end};
  if (fit.size() < 2) throw Error(ErrorCode::kEmptyTrainRange, "training rows exhausted by differencing");

  std::vector<std::string> numeric;
  for (const auto& c : pre.columns()) {
    if (c.is_numeric() && (c.meta.kind == ColumnKind::kContinuous || c.meta.name == target)) {
      numeric.push_back(c.meta.name);
    }
  }
  plan.scaling = fit_minmax(pre, fit, numeric);

  // Filter decisions on the scaled training rows.
  TimeSeriesTable scaled(pre.timestamp_name(),
                         std::vector<Timestamp>(pre.timestamps().begin() + static_cast<std::ptrdiff_t>(fit.begin),
                                                pre.timestamps().begin() + static_cast<std::ptrdiff_t>(fit.end)));
  for (const auto& name : numeric) {
    const auto& v = pre.column(name).numeric();
    std::vector<double> raw;
    raw.reserve(fit.size());
    for (std::size_t i = fit.begin; i < fit.end; ++i) raw.push_back(*v[i]);
    const auto s = scale(raw, plan.scaling, name, Direction::kForward);
    ColumnMeta meta = pre.column(name).meta;
    meta.kind = name == target ? ColumnKind::kTarget : ColumnKind::kContinuous;
    scaled.add_column(Column{meta, NumericValues(s.begin(), s.end())});
  }
  for (const auto& c : scaled.columns()) {
    if (c.meta.kind == ColumnKind::kContinuous) plan.features.push_back(c.meta.name);
  }
  if (options.correlation_filter && !plan.features.empty()) {
    auto filtered = correlation_filter(scaled, target, options.correlation_threshold);
    plan.dropped_by_correlation = filtered.dropped;
    std::vector<std::string> kept;
    for (const auto& f : plan.features) {
      if (std::find(filtered.dropped.begin(), filtered.dropped.end(), f) == filtered.dropped.end()) {
        kept.push_back(f);
      }
    }
    plan.features = std::move(kept);
  }
  if (options.pca && plan.features.size() >= 2) {
    stats::Matrix m(static_cast<Eigen::Index>(fit.size()), static_cast<Eigen::Index>(plan.features.size()));
    for (std::size_t j = 0; j < plan.features.size(); ++j) {
      const auto& v = scaled.column(plan.features[j]).numeric();
      for (std::size_t i = 0; i < fit.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v[i];
    }
    plan.pca = stats::pca_fit(m, options.pca_variance_target);
  }
  return plan;
}

Design apply_plan(const TransformPlan& plan, const TimeSeriesTable& table) {
  const TimeSeriesTable pre = pre_scale(plan, table);
  const std::size_t n = pre.n_rows();
  Design design;
  design.lead_rows = plan.lead_rows;
  design.channels = plan.channel_names();

  auto scaled_column = [&](const std::string& name) {
    const auto& v = pre.column(name).numeric();
    std::vector<double> raw(n, kNaN);
    for (std::size_t i = plan.lead_rows; i < n; ++i) {
      if (!v[i]) throw Error(ErrorCode::kInvalidArgument, "missing value in '" + name + "' row " + std::to_string(i));
      raw[i] = *v[i];
    }
    auto s = scale(raw, plan.scaling, name, Direction::kForward);
    for (std::size_t i = 0; i < plan.lead_rows && i < n; ++i) s[i] = kNaN;
    return s;
  };

  stats::Matrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(plan.features.size()));
  for (std::size_t j = 0; j < plan.features.size(); ++j) {
    const auto s = scaled_column(plan.features[j]);
    for (std::size_t i = 0; i < n; ++i) features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s[i];
  }
  design.target = scaled_column(plan.target);
  const stats::Matrix exog = plan.pca ? stats::pca_project(*plan.pca, features) : features;
  design.inputs.resize(static_cast<Eigen::Index>(n), exog.cols() + 1);
  design.inputs.leftCols(exog.cols()) = exog;
  for (std::size_t i = 0; i < n; ++i) {
    design.inputs(static_cast<Eigen::Index>(i), exog.cols()) = design.target[i];
  }
  return design;
}

}  // namespace renewcast::features
