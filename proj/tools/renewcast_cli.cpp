// Command-line front end. Builds a JSON run configuration from an optional
// config file plus flags and hands it to the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "renewcast/renewcast.h"

namespace {

using Json = nlohmann::ordered_json;

struct Flags {
  std::string config_file;
  std::optional<std::string> dataset, weather_csv, generation_csv, dataset2_csv, out, manifest;
  std::vector<std::string> families;
  std::vector<double> ratios;
  std::optional<std::size_t> k, hpo_budget, jobs, max_epochs, patience, lookback, rows;
  std::optional<std::uint64_t> seed;
  bool no_impute = false, no_encode = false, no_stationarize = false, no_filter = false, no_pca = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "JSON config file; flags override its values");
  cmd->add_option("--dataset", f.dataset, "synthetic, dataset1 or dataset2");
  cmd->add_option("--weather-csv", f.weather_csv, "Dataset-1 weather CSV");
  cmd->add_option("--generation-csv", f.generation_csv, "Dataset-1 generation CSV");
  cmd->add_option("--dataset2-csv", f.dataset2_csv, "Dataset-2 solar panel CSV");
  cmd->add_option("--families", f.families, "Model tokens, e.g. dnn,reg_lstm,arima")->delimiter(',');
  cmd->add_option("--ratios", f.ratios, "Validation ratios, e.g. 0.2,0.3")->delimiter(',');
  cmd->add_option("--k", f.k, "Forward-chaining folds per ratio");
  cmd->add_option("--seed", f.seed, "Run seed (required here or in the config)");
  cmd->add_option("--hpo-budget", f.hpo_budget, "Random-search trials per family (0 disables search)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--jobs", f.jobs, "Worker threads");
  cmd->add_option("--max-epochs", f.max_epochs, "Epoch cap for final training");
  cmd->add_option("--patience", f.patience, "Early-stopping patience");
  cmd->add_option("--lookback", f.lookback, "Window length in rows");
  cmd->add_option("--synthetic-rows", f.rows, "Rows of synthetic data");
  cmd->add_flag("--no-impute", f.no_impute, "Skip gap imputation");
  cmd->add_flag("--no-encode", f.no_encode, "Drop categoricals instead of encoding them");
  cmd->add_flag("--no-stationarize", f.no_stationarize, "Skip differencing");
  cmd->add_flag("--no-correlation-filter", f.no_filter, "Keep weakly correlated features");
  cmd->add_flag("--no-pca", f.no_pca, "Feed features without PCA");
  cmd->add_flag("-q,--quiet", f.quiet, "No progress output");
}

Json build_config(const std::string& command, const Flags& f) {
  Json j = Json::object();
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw std::runtime_error("cannot read config file " + f.config_file);
    std::stringstream ss;
    ss << in.rdbuf();
    j = Json::parse(ss.str());
  }
  j["command"] = command;
  if (f.dataset) j["dataset"]["name"] = *f.dataset;
  if (f.weather_csv) j["dataset"]["weather_csv"] = *f.weather_csv;
  if (f.generation_csv) j["dataset"]["generation_csv"] = *f.generation_csv;
  if (f.dataset2_csv) j["dataset"]["dataset2_csv"] = *f.dataset2_csv;
  if (f.rows) j["dataset"]["synthetic"]["n_rows"] = *f.rows;
  if (!f.families.empty()) j["models"]["families"] = f.families;
  if (!f.ratios.empty()) j["eval"]["ratios"] = f.ratios;
  if (f.k) j["eval"]["k"] = *f.k;
  if (f.seed) j["seed"] = *f.seed;
  if (f.hpo_budget) j["hpo"]["budget"] = *f.hpo_budget;
  if (f.out) j["out"] = *f.out;
  if (f.manifest) j["manifest"] = *f.manifest;
  if (f.jobs) j["jobs"] = *f.jobs;
  if (f.max_epochs) j["training"]["max_epochs"] = *f.max_epochs;
  if (f.patience) j["training"]["patience"] = *f.patience;
  if (f.lookback) j["training"]["lookback"] = *f.lookback;
  if (f.no_impute) j["pipeline"]["impute"] = false;
  if (f.no_encode) j["pipeline"]["encode"] = false;
  if (f.no_stationarize) j["pipeline"]["stationarize"] = false;
  if (f.no_filter) j["pipeline"]["correlation_filter"] = false;
  if (f.no_pca) j["pipeline"]["pca"] = false;
  return j;
}

void print_log(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int report_failure(rc_status status) {
  std::fprintf(stderr, "renewcast: %s\n", rc_last_error());
  return status == RC_CONFIG_INVALID || status == RC_DATASET_MISSING ? RC_EXIT_CONFIG : RC_EXIT_FAILED_CELLS;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renewable generation forecasting pipeline"};
  app.set_version_flag("--version", rc_version());
  app.require_subcommand(1);
  Flags flags;
  auto* inspect = app.add_subcommand("inspect", "Descriptive, stationarity, MI and PCA tables");
  auto* run = app.add_subcommand("run", "Full pipeline: preprocessing, optional search, ratio sweep, report");
  auto* hpo = app.add_subcommand("hpo", "Hyperparameter search only");
  auto* report = app.add_subcommand("report", "Re-emit report files from a manifest");
  for (auto* cmd : {inspect, run, hpo, report}) add_common(cmd, flags);
  report->add_option("--manifest", flags.manifest, "Manifest to re-emit (default <out>/manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : RC_EXIT_CONFIG;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::string text;
  try {
    text = build_config(command, flags).dump();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "renewcast: config: %s\n", e.what());
    return RC_EXIT_CONFIG;
  }

  rc_config* config = nullptr;
  if (rc_status s = rc_config_from_json(text.c_str(), &config); s != RC_OK) return report_failure(s);
  int exit_code = RC_EXIT_FAILED_CELLS;
  const rc_status s = rc_execute(config, flags.quiet ? nullptr : print_log, nullptr, &exit_code);
  rc_config_free(config);
  if (s != RC_OK) {
    report_failure(s);
    return exit_code;
  }
  return exit_code;
}
