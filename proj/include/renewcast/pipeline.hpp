#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "renewcast/eval.hpp"
#include "renewcast/features.hpp"
#include "renewcast/ingest.hpp"
#include "renewcast/serialize.hpp"

namespace renewcast::pipeline {

enum class Command { kInspect, kRun, kHpo, kReport };
const char* to_string(Command c) noexcept;

enum class DatasetKind { kSynthetic, kDataset1, kDataset2 };
const char* to_string(DatasetKind d) noexcept;

struct RunConfig {
  Command command = Command::kRun;
  DatasetKind dataset = DatasetKind::kSynthetic;
  std::filesystem::path weather_csv;
  std::filesystem::path generation_csv;
  std::filesystem::path dataset2_csv;
  // Synthetic data; its seed is derived from `seed`.
  std::size_t synthetic_rows = 5000;
  std::vector<ingest::SeasonalTerm> synthetic_seasonal{{24.0, 1.0}};
  double synthetic_trend = 1e-4;
  double synthetic_noise = 0.05;
  double synthetic_missing_rate = 0.0;
  std::size_t synthetic_gap_max_len = 1;

  features::PlanOptions plan;
  double sparse_threshold = 0.15;
  std::vector<std::string> families;  // model tokens, default_families() order by default
  std::vector<double> ratios{0.2, 0.3, 0.4, 0.5};
  std::size_t k = 5;
  std::optional<std::uint64_t> seed;  // required
  std::size_t lookback = 24;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::size_t hpo_budget = 0;
  std::size_t hpo_max_epochs = 30;
  std::size_t hpo_patience = 5;
  bool arima_select_orders = false;
  std::size_t plot_points = 500;
  std::size_t jobs = 1;
  std::filesystem::path out;
  std::filesystem::path manifest;  // report: defaults to <out>/manifest.json
};

// Every neural family plain and regularized, then ARIMA.
std::vector<std::string> default_families();

// Nested sections: dataset, pipeline, models, training, eval, hpo; top-level
// command, seed, jobs, out, manifest. Unknown keys are rejected.
// Throws ConfigInvalid(field).
RunConfig config_from_json(const Json& j);
Json to_json(const RunConfig& config);

// ConfigInvalid(field) or DatasetMissing(path). Touches nothing on disk.
void validate(const RunConfig& config);

struct LoadedData {
  TimeSeriesTable table;  // sparse columns dropped, calendar columns added
  std::string target;
  std::vector<std::string> dropped_sparse;
  Json info;
};
LoadedData load_data(const RunConfig& config);

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 1 failed cells or runtime error, 2 config error
  std::size_t cells = 0;
  std::size_t failed_cells = 0;
  std::vector<std::filesystem::path> files;
};

using Log = std::function<void(const std::string&)>;

// Validates, then runs the command. Config problems throw before anything is
// written; the manifest lands before any model trains.
RunOutcome execute_config(const RunConfig& config, const Log& log = {});

// Stats tables for the inspect command (also written by run).
std::vector<std::filesystem::path> write_inspection(const LoadedData& data, const features::PlanOptions& plan,
                                                    const std::filesystem::path& out_dir, Json* summary = nullptr);

// One row per model: built-walk count, closed form and the reference range.
std::string parameters_csv(const std::vector<models::ModelSpec>& specs, const models::WindowSpec& window);

}  // namespace renewcast::pipeline
