#include "renewcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "renewcast/error.hpp"
#include "renewcast/hpo.hpp"
#include "renewcast/version.hpp"

namespace renewcast::pipeline {

namespace fs = std::filesystem;
using models::Family;

namespace {

[[noreturn]] void invalid(const std::string& field) { throw Error(ErrorCode::kConfigInvalid, field); }

// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) invalid(name_.empty() ? "config" : name_);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      const auto& v = j_.at(key);
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) invalid(key);
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) invalid(key);
        if (std::is_unsigned_v<T> && !v.is_number_unsigned() && v.get<long long>() < 0) invalid(key);
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) invalid(key);
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) invalid(key);
      }
      out = v.get<T>();
    } catch (const nlohmann::json::exception&) {
      invalid(key);
    }
  }

  void path(const std::string& key, fs::path& out) {
    std::string s;
    read(key, s);
    if (has(key)) out = s;
  }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) invalid(key);
    }
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

Command command_from_string(const std::string& s) {
  if (s == "inspect") return Command::kInspect;
  if (s == "run") return Command::kRun;
  if (s == "hpo") return Command::kHpo;
  if (s == "report") return Command::kReport;
  invalid("command");
}

DatasetKind dataset_from_string(const std::string& s) {
  if (s == "synthetic") return DatasetKind::kSynthetic;
  if (s == "dataset1") return DatasetKind::kDataset1;
  if (s == "dataset2") return DatasetKind::kDataset2;
  invalid("dataset");
}

bool is_calendar(const std::string& name) {
  const auto& cal = features::calendar_columns();
  return std::find(cal.begin(), cal.end(), name) != cal.end();
}

// Continuous columns plus the target, calendar columns excluded.
std::vector<std::string> analysed_columns(const LoadedData& data) {
  std::vector<std::string> out;
  for (const auto& c : data.table.columns()) {
    if (!c.is_numeric() || is_calendar(c.meta.name)) continue;
    if (c.meta.kind == ColumnKind::kContinuous && c.meta.name != data.target) out.push_back(c.meta.name);
  }
  out.push_back(data.target);
  return out;
}

std::vector<models::ModelSpec> specs_for(const std::vector<std::string>& tokens) {
  std::vector<models::ModelSpec> specs;
  for (const auto& t : tokens) specs.push_back(models::parse_model_token(t));
  return specs;
}

eval::SweepOptions sweep_options(const RunConfig& c, const Log& log) {
  eval::SweepOptions o;
  o.ratios = c.ratios;
  o.k = c.k;
  o.seed = *c.seed;
  o.lookback = c.lookback;
  o.max_epochs = c.max_epochs;
  o.patience = c.patience;
  o.plan = c.plan;
  o.jobs = c.jobs;
  o.arima_select_orders = c.arima_select_orders;
  o.plot_points = c.plot_points;
  o.log = log;
  return o;
}

Json folds_json(const std::vector<eval::FoldData>& folds) {
  Json out = Json::array();
  for (const auto& f : folds) {
    out.push_back({{"ratio", f.ratio},
                   {"fold", f.fold},
                   {"train", {f.split.train.begin, f.split.train.end}},
                   {"validation", {f.split.validation.begin, f.split.validation.end}},
                   {"plan", renewcast::to_json(f.plan)}});
  }
  return out;
}

Json models_json(const std::vector<models::ModelSpec>& specs, const models::WindowSpec& window) {
  Json out = Json::array();
  for (const auto& s : specs) {
    Json m{{"token", s.token()}, {"label", s.label()}, {"spec", renewcast::to_json(s)}};
    if (s.family != Family::kArima) m["parameters"] = models::closed_form_parameter_count(s, window);
    out.push_back(m);
  }
  return out;
}

void log_line(const Log& log, const std::string& msg) {
  if (log) log(msg);
}

// Searches each neural family once and rewrites every selected spec of that
// family with the refined configuration.
Json run_search(const RunConfig& config, const std::vector<eval::FoldData>& folds,
                std::vector<models::ModelSpec>& specs, const fs::path& out_dir, std::vector<fs::path>& files,
                const Log& log) {
  // Chronological split per ratio: the last forward-chaining fold.
  std::vector<eval::FoldData> search_folds;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if (i + 1 == folds.size() || folds[i + 1].ratio != folds[i].ratio) search_folds.push_back(folds[i]);
  }
  const hpo::SearchSpace space;
  Json out = Json::array();
  std::vector<Family> done;
  const auto selected = specs;
  for (const auto& spec : selected) {
    if (spec.family == Family::kArima) continue;
    if (std::find(done.begin(), done.end(), spec.family) != done.end()) continue;
    done.push_back(spec.family);
    const std::string fam = models::to_string(spec.family);
    log_line(log, "hpo: searching " + fam);
    const auto base = models::ModelSpec::defaults(spec.family, true);
    const auto evaluator = hpo::sweep_evaluator(base, space, search_folds,
                                                {config.lookback, config.hpo_max_epochs, config.hpo_patience});
    hpo::SearchOptions so;
    so.budget = config.hpo_budget;
    so.seed = derive_seed(*config.seed, 500 + static_cast<std::uint64_t>(spec.family));
    so.jobs = config.jobs;
    const auto trials = hpo::random_search(space, evaluator, so);
    const auto refined = hpo::grid_refine(space, trials.front(), evaluator, config.jobs);

    auto all = trials;
    all.insert(all.end(), refined.evaluated.begin(), refined.evaluated.end());
    const auto path = out_dir / ("hpo_" + fam + ".csv");
    eval::write_text(path, hpo::trials_csv(all));
    files.push_back(path);

    Json top = Json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, trials.size()); ++i) {
      top.push_back({{"id", trials[i].id},
                     {"mean_val_rmse", trials[i].mean_val_rmse},
                     {"mean_train_rmse", trials[i].mean_train_rmse},
                     {"gap", trials[i].gap()},
                     {"status", hpo::to_string(trials[i].status)}});
    }
    out.push_back({{"family", fam},
                   {"budget", config.hpo_budget},
                   {"random_best", hpo::to_json(trials.front())},
                   {"refined_best", hpo::to_json(refined.best)},
                   {"top5", top}});
    for (auto& s : specs) {
      if (s.family == spec.family) s = hpo::apply_trial(s, space, refined.best.config);
    }
    log_line(log, "hpo: " + fam + " best val_rmse " + eval::format_number(refined.best.mean_val_rmse));
  }
  return out;
}

}  // namespace

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::kInspect: return "inspect";
    case Command::kRun: return "run";
    case Command::kHpo: return "hpo";
    case Command::kReport: return "report";
  }
  return "?";
}

const char* to_string(DatasetKind d) noexcept {
  switch (d) {
    case DatasetKind::kSynthetic: return "synthetic";
    case DatasetKind::kDataset1: return "dataset1";
    case DatasetKind::kDataset2: return "dataset2";
  }
  return "?";
}

std::vector<std::string> default_families() {
  const Family order[] = {Family::kLstm,
                          Family::kStackedLstm,
                          Family::kCnnLstm,
                          Family::kEncoderDecoder,
                          Family::kDnn,
                          Family::kTimeDistributedMlp,
                          Family::kCnn};
  std::vector<std::string> out;
  for (Family f : order) out.push_back(models::to_string(f));
  for (Family f : order) out.push_back(std::string("reg_") + models::to_string(f));
  out.push_back("arima");
  return out;
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  c.families = default_families();
  Section top(j, "");
  std::string s;
  if (top.has("command")) {
    top.read("command", s);
    c.command = command_from_string(s);
  }
  if (top.has("dataset")) {
    Section d(top.at("dataset"), "dataset");
    if (d.has("name")) {
      std::string name;
      d.read("name", name);
      c.dataset = dataset_from_string(name);
    }
    d.path("weather_csv", c.weather_csv);
    d.path("generation_csv", c.generation_csv);
    d.path("dataset2_csv", c.dataset2_csv);
    if (d.has("synthetic")) {
      Section syn(d.at("synthetic"), "synthetic");
      syn.read("n_rows", c.synthetic_rows);
      syn.read("trend_slope", c.synthetic_trend);
      syn.read("noise_std", c.synthetic_noise);
      syn.read("missing_rate", c.synthetic_missing_rate);
      syn.read("gap_max_len", c.synthetic_gap_max_len);
      if (syn.has("seasonal")) {
        c.synthetic_seasonal.clear();
        const auto& arr = syn.at("seasonal");
        if (!arr.is_array()) invalid("seasonal");
        for (const auto& term : arr) {
          if (!term.is_array() || term.size() != 2 || !term[0].is_number() || !term[1].is_number()) {
            invalid("seasonal");
          }
          c.synthetic_seasonal.push_back({term[0].get<double>(), term[1].get<double>()});
        }
      }
      syn.finish();
    }
    d.finish();
  }
  if (top.has("pipeline")) {
    Section p(top.at("pipeline"), "pipeline");
    p.read("impute", c.plan.impute);
    p.read("encode", c.plan.encode);
    p.read("stationarize", c.plan.stationarize);
    p.read("correlation_filter", c.plan.correlation_filter);
    p.read("pca", c.plan.pca);
    p.read("correlation_threshold", c.plan.correlation_threshold);
    p.read("pca_variance_target", c.plan.pca_variance_target);
    p.read("sparse_threshold", c.sparse_threshold);
    p.finish();
  }
  if (top.has("models")) {
    Section m(top.at("models"), "models");
    m.read("families", c.families);
    m.read("arima_select_orders", c.arima_select_orders);
    m.finish();
  }
  if (top.has("training")) {
    Section t(top.at("training"), "training");
    t.read("lookback", c.lookback);
    t.read("max_epochs", c.max_epochs);
    t.read("patience", c.patience);
    t.finish();
  }
  if (top.has("eval")) {
    Section e(top.at("eval"), "eval");
    e.read("ratios", c.ratios);
    e.read("k", c.k);
    e.read("plot_points", c.plot_points);
    e.finish();
  }
  if (top.has("hpo")) {
    Section h(top.at("hpo"), "hpo");
    h.read("budget", c.hpo_budget);
    h.read("max_epochs", c.hpo_max_epochs);
    h.read("patience", c.hpo_patience);
    h.finish();
  }
  if (top.has("seed")) {
    std::uint64_t seed = 0;
    top.read("seed", seed);
    c.seed = seed;
  }
  top.read("jobs", c.jobs);
  top.path("out", c.out);
  top.path("manifest", c.manifest);
  top.finish();
  return c;
}

Json to_json(const RunConfig& c) {
  Json seasonal = Json::array();
  for (const auto& t : c.synthetic_seasonal) seasonal.push_back({t.period_steps, t.amplitude});
  Json j;
  j["command"] = to_string(c.command);
  j["dataset"] = {{"name", to_string(c.dataset)},
                  {"weather_csv", c.weather_csv.string()},
                  {"generation_csv", c.generation_csv.string()},
                  {"dataset2_csv", c.dataset2_csv.string()},
                  {"synthetic",
                   {{"n_rows", c.synthetic_rows},
                    {"seasonal", seasonal},
                    {"trend_slope", c.synthetic_trend},
                    {"noise_std", c.synthetic_noise},
                    {"missing_rate", c.synthetic_missing_rate},
                    {"gap_max_len", c.synthetic_gap_max_len}}}};
  j["pipeline"] = {{"impute", c.plan.impute},
                   {"encode", c.plan.encode},
                   {"stationarize", c.plan.stationarize},
                   {"correlation_filter", c.plan.correlation_filter},
                   {"pca", c.plan.pca},
                   {"correlation_threshold", c.plan.correlation_threshold},
                   {"pca_variance_target", c.plan.pca_variance_target},
                   {"sparse_threshold", c.sparse_threshold}};
  j["models"] = {{"families", c.families}, {"arima_select_orders", c.arima_select_orders}};
  j["training"] = {{"lookback", c.lookback}, {"max_epochs", c.max_epochs}, {"patience", c.patience}};
  j["eval"] = {{"ratios", c.ratios}, {"k", c.k}, {"plot_points", c.plot_points}};
  j["hpo"] = {{"budget", c.hpo_budget}, {"max_epochs", c.hpo_max_epochs}, {"patience", c.hpo_patience}};
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["jobs"] = c.jobs;
  j["out"] = c.out.string();
  if (!c.manifest.empty()) j["manifest"] = c.manifest.string();
  return j;
}

void validate(const RunConfig& c) {
  if (!c.seed) invalid("seed");
  if (c.out.empty()) invalid("out");
  if (c.jobs < 1) invalid("jobs");
  if (c.command == Command::kReport) {
    const auto m = c.manifest.empty() ? c.out / "manifest.json" : c.manifest;
    if (!fs::is_regular_file(m)) throw Error(ErrorCode::kDatasetMissing, m.string());
    return;
  }
  if (c.ratios.empty()) invalid("ratios");
  std::set<double> seen_ratios;
  for (double r : c.ratios) {
    if (!(r > 0.0 && r < 1.0) || !seen_ratios.insert(r).second) invalid("ratios");
  }
  if (c.k < 1 || c.k > 64) invalid("k");
  if (c.families.empty()) invalid("families");
  std::set<std::string> seen_tokens;
  for (const auto& t : c.families) {
    try {
      models::parse_model_token(t).validate();
    } catch (const Error&) {
      invalid("families");
    }
    if (!seen_tokens.insert(t).second) invalid("families");
  }
  if (c.lookback < 1) invalid("lookback");
  if (c.max_epochs < 1) invalid("max_epochs");
  if (c.hpo_max_epochs < 1) invalid("hpo.max_epochs");
  if (c.command == Command::kHpo && c.hpo_budget < 1) invalid("hpo_budget");
  if (!(c.sparse_threshold >= 0.0 && c.sparse_threshold <= 1.0)) invalid("sparse_threshold");
  if (!(c.plan.pca_variance_target > 0.0 && c.plan.pca_variance_target <= 1.0)) invalid("pca_variance_target");
  if (!(c.plan.correlation_threshold >= 0.0 && c.plan.correlation_threshold < 1.0)) invalid("correlation_threshold");

  auto require_file = [](const fs::path& p, const char* field) {
    if (p.empty()) invalid(field);
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::kDatasetMissing, p.string());
  };
  switch (c.dataset) {
    case DatasetKind::kSynthetic: {
      ingest::SyntheticSpec spec;
      spec.n_rows = c.synthetic_rows;
      spec.seasonal_periods = c.synthetic_seasonal;
      spec.trend_slope = c.synthetic_trend;
      spec.noise_std = c.synthetic_noise;
      spec.missing_rate = c.synthetic_missing_rate;
      spec.gap_max_len = c.synthetic_gap_max_len;
      try {
        ingest::validate(spec);
      } catch (const Error&) {
        invalid("synthetic");
      }
      break;
    }
    case DatasetKind::kDataset1:
      require_file(c.weather_csv, "weather_csv");
      require_file(c.generation_csv, "generation_csv");
      break;
    case DatasetKind::kDataset2:
      require_file(c.dataset2_csv, "dataset2_csv");
      break;
  }
}

LoadedData load_data(const RunConfig& c) {
  ingest::DatasetLoad load;
  switch (c.dataset) {
    case DatasetKind::kSynthetic: {
      ingest::SyntheticSpec spec;
      spec.n_rows = c.synthetic_rows;
      spec.seasonal_periods = c.synthetic_seasonal;
      spec.trend_slope = c.synthetic_trend;
      spec.noise_std = c.synthetic_noise;
      spec.missing_rate = c.synthetic_missing_rate;
      spec.gap_max_len = c.synthetic_gap_max_len;
      spec.seed = derive_seed(*c.seed, 7);
      load.table = ingest::generate_synthetic(spec);
      load.target = "target";
      load.raw_rows = load.table.n_rows();
      load.raw_columns = load.table.columns().size();
      break;
    }
    case DatasetKind::kDataset1:
      load = ingest::load_dataset1(c.weather_csv, c.generation_csv);
      break;
    case DatasetKind::kDataset2:
      load = ingest::load_dataset2(c.dataset2_csv);
      break;
  }
  LoadedData out;
  out.target = load.target;
  auto [kept, dropped] = ingest::drop_sparse_columns(load.table, c.sparse_threshold);
  if (std::find(dropped.begin(), dropped.end(), load.target) != dropped.end()) {
    throw Error(ErrorCode::kAllColumnsDropped, "target column " + load.target + " is too sparse");
  }
  out.dropped_sparse = dropped;
  out.table = features::add_cyclical_calendar(kept);

  Json missing;
  for (const auto& col : load.table.columns()) missing[col.meta.name] = col.meta.missing_fraction;
  out.info = {{"name", to_string(c.dataset)},
              {"target", out.target},
              {"raw_rows", load.raw_rows},
              {"raw_columns", load.raw_columns},
              {"rows", out.table.n_rows()},
              {"columns", out.table.column_names()},
              {"dropped_sparse", out.dropped_sparse},
              {"missing_fraction", missing},
              {"notes", load.notes}};
  return out;
}

std::vector<fs::path> write_inspection(const LoadedData& data, const features::PlanOptions& plan,
                                       const fs::path& out_dir, Json* summary) {
  const auto table = ingest::impute_gaps(data.table);
  const auto columns = analysed_columns(data);
  std::vector<fs::path> files;

  std::ostringstream desc;
  desc << "column,n,mean,std,min,median,max,skewness,kurtosis,missing_fraction\n";
  std::ostringstream stat;
  stat << "column,adf_statistic,adf_pvalue,adf_lags,kpss_statistic,kpss_pvalue,verdict\n";
  std::ostringstream mi;
  mi << "feature,mutual_information_nats,pearson\n";
  const auto target = table.dense(data.target);
  std::size_t stationary = 0, tested = 0;
  Json verdicts;
  for (const auto& name : columns) {
    const auto x = table.dense(name);
    const auto s = stats::summary_stats(x);
    desc << name << ',' << s.n << ',' << eval::format_number(s.mean) << ',' << eval::format_number(s.std) << ','
         << eval::format_number(s.min) << ',' << eval::format_number(s.median) << ','
         << eval::format_number(s.max) << ',' << eval::format_number(s.skewness) << ','
         << eval::format_number(s.kurtosis) << ',' << eval::format_number(data.table.column(name).meta.missing_fraction)
         << '\n';
    try {
      const auto r = stats::stationarity_report(x);
      ++tested;
      if (r.verdict == stats::Verdict::kStationary) ++stationary;
      verdicts[name] = stats::to_string(r.verdict);
      stat << name << ',' << eval::format_number(r.adf_stat) << ',' << eval::format_number(r.adf_pvalue) << ','
           << r.lags_used << ',' << eval::format_number(r.kpss_stat) << ',' << eval::format_number(r.kpss_pvalue)
           << ',' << stats::to_string(r.verdict) << '\n';
    } catch (const Error& e) {
      verdicts[name] = "untestable";
      stat << name << ",,,,,,untestable\n";
    }
    if (name != data.target) {
      mi << name << ',' << eval::format_number(stats::mutual_information(x, target)) << ','
         << eval::format_number(stats::pearson(x, target)) << '\n';
    }
  }
  for (const auto& [file, text] : {std::pair{"descriptive.csv", desc.str()}, std::pair{"stationarity.csv", stat.str()},
                                   std::pair{"mutual_information.csv", mi.str()}}) {
    eval::write_text(out_dir / file, text);
    files.push_back(out_dir / file);
  }

  // PCA on the min-max scaled exogenous columns, every row.
  std::vector<std::string> exog(columns.begin(), columns.end() - 1);
  Json pca_summary;
  if (exog.size() >= 2) {
    const auto scaling = features::fit_minmax(table, {0, table.n_rows()}, exog);
    stats::Matrix m(static_cast<Eigen::Index>(table.n_rows()), static_cast<Eigen::Index>(exog.size()));
    for (std::size_t c = 0; c < exog.size(); ++c) {
      const auto v = features::scale(table.dense(exog[c]), scaling, exog[c], features::Direction::kForward);
      for (std::size_t r = 0; r < v.size(); ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r];
    }
    const auto pca = stats::pca_fit(m, plan.pca_variance_target);
    std::ostringstream os;
    os << "component,explained_variance_ratio,cumulative_ratio,selected\n";
    double cum = 0.0;
    for (Eigen::Index i = 0; i < pca.all_ratios.size(); ++i) {
      cum += pca.all_ratios(i);
      os << i + 1 << ',' << eval::format_number(pca.all_ratios(i)) << ',' << eval::format_number(cum) << ','
         << (static_cast<std::size_t>(i) < pca.n_components() ? 1 : 0) << '\n';
    }
    eval::write_text(out_dir / "pca.csv", os.str());
    files.push_back(out_dir / "pca.csv");
    pca_summary = {{"inputs", exog.size()},
                   {"variance_target", plan.pca_variance_target},
                   {"components", pca.n_components()},
                   {"explained", pca.explained_variance_ratio.sum()}};
  }
  if (summary) {
    *summary = {{"columns_tested", tested}, {"stationary", stationary}, {"verdicts", verdicts}};
    if (!pca_summary.is_null()) (*summary)["pca"] = pca_summary;
  }
  return files;
}

std::string parameters_csv(const std::vector<models::ModelSpec>& specs, const models::WindowSpec& window) {
  std::ostringstream os;
  os << "model,token,parameters,closed_form,reference_min,reference_max,within_reference\n";
  for (const auto& s : specs) {
    if (s.family == Family::kArima) continue;
    const auto walked = models::count_parameters(models::build_model(s, window, 0));
    const auto closed = models::closed_form_parameter_count(s, window);
    const auto range = models::reference_parameter_range(s.family);
    os << s.label() << ',' << s.token() << ',' << walked << ',' << closed << ',';
    if (range) {
      os << range->first << ',' << range->second << ','
         << (walked >= range->first && walked <= range->second ? "yes" : "no");
    } else {
      os << ",,";
    }
    os << '\n';
  }
  return os.str();
}

RunOutcome execute_config(const RunConfig& config, const Log& log) {
  validate(config);
  RunOutcome outcome;
  const fs::path out_dir = config.out;

  if (config.command == Command::kReport) {
    const auto path = config.manifest.empty() ? out_dir / "manifest.json" : config.manifest;
    Json manifest;
    try {
      manifest = Json::parse(eval::read_text(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
    }
    if (!manifest.contains("report")) throw Error(ErrorCode::kParseError, path.string() + ": no report section");
    const auto report = eval::report_from_json(manifest.at("report"));
    outcome.files = eval::emit_report(report, eval::friedman_all(report), out_dir, &manifest);
    outcome.cells = report.cells.size();
    outcome.failed_cells = report.failed_cells();
    outcome.exit_code = outcome.failed_cells > 0 ? 1 : 0;
    return outcome;
  }

  log_line(log, std::string("loading ") + to_string(config.dataset));
  const auto data = load_data(config);
  fs::create_directories(out_dir);

  Json manifest;
  manifest["format"] = "renewcast-run";
  manifest["version"] = kVersionString;
  manifest["config"] = to_json(config);
  manifest["dataset"] = data.info;
  manifest["status"] = "started";

  Json inspection;
  auto stats_files = write_inspection(data, config.plan, out_dir, &inspection);
  outcome.files.insert(outcome.files.end(), stats_files.begin(), stats_files.end());
  manifest["inspection"] = inspection;

  const auto manifest_path = out_dir / "manifest.json";
  if (config.command == Command::kInspect) {
    manifest["status"] = "complete";
    eval::write_text(manifest_path, manifest.dump(2) + "\n");
    outcome.files.push_back(manifest_path);
    return outcome;
  }

  auto specs = specs_for(config.families);
  const auto options = sweep_options(config, log);
  log_line(log, "fitting transform plans");
  const auto folds = eval::prepare_folds(data.table, data.target, options);
  const models::WindowSpec window{config.lookback, static_cast<std::size_t>(folds.front().design.inputs.cols())};
  manifest["folds"] = folds_json(folds);
  manifest["models"] = models_json(specs, window);
  eval::write_text(manifest_path, manifest.dump(2) + "\n");

  if (config.hpo_budget > 0) {
    manifest["hpo"] = run_search(config, folds, specs, out_dir, outcome.files, log);
    manifest["models"] = models_json(specs, window);
    eval::write_text(manifest_path, manifest.dump(2) + "\n");
  }
  if (config.command == Command::kHpo) {
    manifest["status"] = "complete";
    eval::write_text(manifest_path, manifest.dump(2) + "\n");
    outcome.files.push_back(manifest_path);
    return outcome;
  }

  const auto params_path = out_dir / "parameters.csv";
  eval::write_text(params_path, parameters_csv(specs, window));
  outcome.files.push_back(params_path);

  const auto report = eval::ratio_sweep(specs, folds, options);
  const auto friedman = eval::friedman_all(report);
  manifest["status"] = "complete";
  manifest["report"] = eval::to_json(report);
  Json fr = Json::array();
  for (const auto& row : friedman) {
    fr.push_back({{"metric", eval::metric_key(row.metric)}, {"result", renewcast::to_json(row.result)}});
  }
  manifest["friedman"] = fr;
  auto written = eval::emit_report(report, friedman, out_dir, &manifest);
  outcome.files.insert(outcome.files.end(), written.begin(), written.end());
  outcome.cells = report.cells.size();
  outcome.failed_cells = report.failed_cells();
  outcome.exit_code = outcome.failed_cells > 0 ? 1 : 0;
  log_line(log, "done: " + std::to_string(outcome.cells - outcome.failed_cells) + "/" +
                    std::to_string(outcome.cells) + " cells");
  return outcome;
}

}  // namespace renewcast::pipeline
