#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "renewcast/features.hpp"
#include "renewcast/models.hpp"
#include "renewcast/serialize.hpp"
#include "renewcast/stats.hpp"

namespace renewcast::eval {

enum class Metric { kTrainRmse, kValRmse, kTrainMae, kValMae, kTrainR2, kValR2, kTrainLoss, kValLoss };

const std::array<Metric, 8>& all_metrics();
const char* metric_key(Metric m) noexcept;    // "val_rmse"
const char* metric_label(Metric m) noexcept;  // "Validation RMSE"
bool lower_is_better(Metric m) noexcept;

struct MetricSet {
  double train_rmse = 0.0, val_rmse = 0.0;
  double train_mae = 0.0, val_mae = 0.0;
  double train_r2 = 0.0, val_r2 = 0.0;
  double train_loss = 0.0, val_loss = 0.0;
  bool train_r2_degenerate = false, val_r2_degenerate = false;

  double get(Metric m) const noexcept;
  void set(Metric m, double v) noexcept;
};

struct RSquared {
  double value = 0.0;
  bool degenerate = false;  // zero-variance truth; value reported as 0
};
RSquared r_squared(std::span<const double> y_true, std::span<const double> y_pred);

// loss = MSE + penalty on each side.
MetricSet compute_metrics(std::span<const double> train_true, std::span<const double> train_pred,
                          std::span<const double> val_true, std::span<const double> val_pred,
                          double penalty = 0.0);

// ---------------------------------------------------------------------------
// Splits

struct Split {
  features::RowRange train;
  features::RowRange validation;
};

// The final round(ratio * n) rows validate.
Split chronological_split(std::size_t n_rows, double ratio);

// k forward-chaining folds: validation blocks of round(ratio * n) rows whose
// starts advance by floor(train_max / 2k); the last fold equals the
// chronological split.
std::vector<Split> forward_chaining_folds(std::size_t n_rows, double ratio, std::size_t k);

// ---------------------------------------------------------------------------
// Sweep

struct SweepOptions {
  std::vector<double> ratios{0.2, 0.3, 0.4, 0.5};
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t lookback = 24;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  features::PlanOptions plan;
  std::size_t jobs = 1;
  bool arima_select_orders = false;
  std::size_t plot_points = 500;
  std::function<void(const std::string&)> log;
};

// Plan and design for one (ratio, fold); shared by every model.
struct FoldData {
  double ratio = 0.0;
  std::size_t fold = 0;
  Split split;
  features::TransformPlan plan;
  features::Design design;
};

std::vector<FoldData> prepare_folds(const TimeSeriesTable& table, const std::string& target,
                                    const SweepOptions& options);

struct FoldOutcome {
  MetricSet metrics;
  MetricSet original_units;  // rmse/mae/loss rescaled by the target range
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  std::vector<double> val_actual;
  std::vector<double> val_predicted;
};

// Training seed derives from (seed, ratio index, fold) only, so identical
// architectures give identical cells.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t ratio_index, std::size_t fold) noexcept;

FoldOutcome evaluate_split(const models::ModelSpec& spec, const FoldData& data, std::uint64_t seed,
                           const SweepOptions& options);

struct CellResult {
  std::string model;  // token, e.g. "reg_dnn"
  std::string label;  // "Regularized DNN"
  double ratio = 0.0;
  bool failed = false;
  std::string error;
  std::vector<MetricSet> folds;
  std::vector<MetricSet> folds_original;
  std::vector<std::size_t> epochs;
  MetricSet mean;
  MetricSet mean_original;
  std::map<Metric, stats::ConfidenceInterval> ci;  // empty when k < 2
  std::vector<double> plot_actual;
  std::vector<double> plot_predicted;
};

struct RatioSweepReport {
  std::vector<std::string> models;  // tokens in row order
  std::vector<std::string> labels;
  std::vector<double> ratios;
  std::size_t k = 0;
  std::vector<CellResult> cells;  // model-major, then ratio

  const CellResult* find(const std::string& model, double ratio) const;
  std::size_t failed_cells() const;
};

RatioSweepReport ratio_sweep(const std::vector<models::ModelSpec>& specs, const std::vector<FoldData>& folds,
                             const SweepOptions& options);
RatioSweepReport ratio_sweep(const std::vector<models::ModelSpec>& specs, const TimeSeriesTable& table,
                             const std::string& target, const SweepOptions& options);

std::map<Metric, stats::ConfidenceInterval> crossval_ci(const std::vector<MetricSet>& folds);

// Blocks are ratios, treatments are models; models with any failed cell are
// left out.
stats::Matrix friedman_matrix(const RatioSweepReport& report, Metric metric, std::vector<std::string>* models = nullptr);

struct FriedmanRow {
  Metric metric;
  stats::FriedmanResult result;
};
// Empty when fewer than two blocks or two usable models remain.
std::vector<FriedmanRow> friedman_all(const RatioSweepReport& report);

// ---------------------------------------------------------------------------
// Output

Json to_json(const RatioSweepReport& report);
RatioSweepReport report_from_json(const Json& j);

std::string format_number(double v);  // %.6g
std::string metrics_csv(const RatioSweepReport& report);
std::string metrics_all_csv(const RatioSweepReport& report);
std::string friedman_csv(const std::vector<FriedmanRow>& rows);
std::string plot_svg(const std::string& title, std::span<const double> actual, std::span<const double> predicted);

// metrics.csv, metrics_all.csv, friedman.csv, plots/<model>_<ratio>.svg and,
// when given, manifest.json. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const RatioSweepReport& report, const std::vector<FriedmanRow>& friedman,
                                               const std::filesystem::path& out_dir,
                                               const Json* manifest = nullptr);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace renewcast::eval
