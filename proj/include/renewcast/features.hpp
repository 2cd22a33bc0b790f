#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "renewcast/ingest.hpp"
#include "renewcast/stats.hpp"
#include "renewcast/table.hpp"

namespace renewcast::features {

// Half-open row interval [begin, end).
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  bool contains(std::size_t row) const noexcept { return row >= begin && row < end; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

// ---------------------------------------------------------------------------
// Min-max scaling

struct MinMax {
  double min = 0.0;
  double max = 0.0;
  bool degenerate() const noexcept { return !(max > min); }
  friend bool operator==(const MinMax&, const MinMax&) = default;
};

struct ScalingParams {
  std::map<std::string, MinMax> columns;
  RowRange fit_rows;
  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

enum class Direction { kForward, kInverse };

// Every numeric non-timestamp column when `columns` is empty.
ScalingParams fit_minmax(const TimeSeriesTable& table, RowRange train_rows,
                         const std::vector<std::string>& columns = {});

// forward: (x - min) / (max - min), constant columns map to 0;
// inverse: min + y * (max - min).
std::vector<double> scale(std::span<const double> values, const MinMax& params, Direction direction);
std::vector<double> scale(std::span<const double> values, const ScalingParams& params,
                          const std::string& column, Direction direction);

// ---------------------------------------------------------------------------
// Leave-one-out target encoding

struct CategoryStats {
  double target_sum = 0.0;
  std::size_t count = 0;
  friend bool operator==(const CategoryStats&, const CategoryStats&) = default;
};

struct LooEncoderMap {
  std::string column;
  std::map<std::string, CategoryStats> categories;
  double global_target_mean = 0.0;
  friend bool operator==(const LooEncoderMap&, const LooEncoderMap&) = default;
};

struct LooResult {
  std::vector<double> encoded;
  LooEncoderMap map;
};

LooResult loo_encode(const TimeSeriesTable& table, const std::string& cat_column,
                     const std::string& target_column, RowRange train_rows);

// Replays a fitted map: rows inside `train_rows` exclude their own target
// (which must be supplied), every other row uses the plain category mean.
std::vector<double> loo_apply(const LooEncoderMap& map, const CategoricalValues& labels,
                              std::span<const double> target, RowRange train_rows);

// ---------------------------------------------------------------------------
// Calendar

// Appends sine_hr, cos_hr, sine_mon, cos_mon, is_weekend, Season_Spring,
// Season_Summer, Season_Winter from the local timestamp. Autumn is the
// reference level.
TimeSeriesTable add_cyclical_calendar(const TimeSeriesTable& table);

inline const std::vector<std::string>& calendar_columns() {
  static const std::vector<std::string> names = {"sine_hr",    "cos_hr",        "sine_mon",
                                                 "cos_mon",    "is_weekend",    "Season_Spring",
                                                 "Season_Summer", "Season_Winter"};
  return names;
}

// ---------------------------------------------------------------------------
// Stationarity adjustments

inline constexpr int kMaxDifferencingOrder = 2;

struct Stationarized {
  std::vector<double> series;           // length n - order
  int order = 0;
  std::vector<double> initial_values;   // heads needed to integrate back
  std::vector<stats::StationarityReport> retests;
};

// Identity when `report` says stationary; otherwise difference and retest up
// to kMaxDifferencingOrder times. A constant difference counts as stationary.
Stationarized stationarize(std::span<const double> series, const stats::StationarityReport& report);

std::vector<double> difference(std::span<const double> series);
// Integrates `order` times given the heads recorded by stationarize.
std::vector<double> undifference(std::span<const double> diffed,
                                 std::span<const double> initial_values);

// ---------------------------------------------------------------------------
// Correlation filter

struct CorrelationFilterResult {
  TimeSeriesTable table;
  std::vector<std::string> dropped;
  std::vector<std::string> features;  // order of the correlation matrix
  stats::Matrix correlation;          // feature x feature on the training rows
  std::map<std::string, double> target_correlation;
};

inline constexpr double kCorrelationThreshold = 0.1;

// Calendar sine/cosine columns that together encode one cyclical variable.
inline const std::vector<std::pair<std::string, std::string>>& cyclical_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {{"sine_hr", "cos_hr"},
                                                                         {"sine_mon", "cos_mon"}};
  return pairs;
}

// Drops numeric non-target columns with |r| < threshold against the target,
// using training rows only. Members of a cyclical pair are kept or dropped
// together on the larger |r| of the two.
CorrelationFilterResult correlation_filter(const TimeSeriesTable& table,
                                           const std::string& target_column,
                                           double threshold = kCorrelationThreshold,
                                           std::optional<RowRange> train_rows = std::nullopt);

// ---------------------------------------------------------------------------
// Replayable plan

struct PlanOptions {
  bool impute = true;
  bool encode = true;
  bool stationarize = true;
  bool correlation_filter = true;
  bool pca = true;
  double correlation_threshold = kCorrelationThreshold;
  double pca_variance_target = 0.80;
};

struct TransformPlan {
  RowRange fit_rows;
  std::string target;
  PlanOptions options;
  ingest::ImputeStats impute;
  std::vector<LooEncoderMap> encoders;
  std::map<std::string, int> differencing;  // every stationarity-checked column
  std::size_t lead_rows = 0;                // rows lost to differencing
  ScalingParams scaling;
  std::vector<std::string> dropped_by_correlation;
  std::vector<std::string> features;  // surviving exogenous features, in order
  std::optional<stats::PcaModel> pca;

  // Input channels of the design: PCA scores (or raw features), then target.
  std::vector<std::string> channel_names() const;
};

struct Design {
  stats::Matrix inputs;         // n_rows x channels, rows < lead_rows are NaN
  std::vector<double> target;   // scaled target, NaN for rows < lead_rows
  std::size_t lead_rows = 0;
  std::vector<std::string> channels;
};

TransformPlan fit_plan(const TimeSeriesTable& table, const std::string& target,
                       RowRange train_rows, const PlanOptions& options = {});
Design apply_plan(const TransformPlan& plan, const TimeSeriesTable& table);

}  // namespace renewcast::features
