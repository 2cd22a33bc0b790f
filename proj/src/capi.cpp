#include "renewcast/renewcast.h"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "renewcast/error.hpp"
#include "renewcast/ingest.hpp"
#include "renewcast/models.hpp"
#include "renewcast/pipeline.hpp"
#include "renewcast/serialize.hpp"
#include "renewcast/stats.hpp"
#include "renewcast/version.hpp"

using namespace renewcast;

struct rc_config {
  pipeline::RunConfig config;
  std::string json;
};

struct rc_table {
  TimeSeriesTable table;
};

struct rc_model {
  models::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_detail;

rc_status fail(ErrorCode code, const std::string& message, const std::string& detail) {
  g_error = message;
  g_detail = detail;
  return static_cast<rc_status>(code);
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
rc_status guarded(Fn&& fn) {
  g_error.clear();
  g_detail.clear();
  try {
    fn();
    return RC_OK;
  } catch (const Error& e) {
    return fail(e.code(), e.what(), e.detail());
  } catch (const nlohmann::json::exception& e) {
    return fail(ErrorCode::kParseError, std::string("ParseError: ") + e.what(), "");
  } catch (const std::bad_alloc&) {
    return fail(ErrorCode::kInternal, "Internal: out of memory", "");
  } catch (const std::exception& e) {
    return fail(ErrorCode::kInternal, std::string("Internal: ") + e.what(), "");
  } catch (...) {
    return fail(ErrorCode::kInternal, "Internal: unknown exception", "");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

ColumnKind kind_from_string(const std::string& s) {
  if (s == "continuous") return ColumnKind::kContinuous;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "target") return ColumnKind::kTarget;
  if (s == "timestamp") return ColumnKind::kTimestamp;
  throw Error(ErrorCode::kInvalidArgument, "unknown column kind " + s);
}

}  // namespace

extern "C" {

const char* rc_version(void) { return kVersionString; }

const char* rc_status_name(rc_status status) { return error_code_name(static_cast<ErrorCode>(status)); }

const char* rc_last_error(void) { return g_error.c_str(); }

const char* rc_last_error_detail(void) { return g_detail.c_str(); }

rc_status rc_config_from_json(const char* json, rc_config** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = nullptr;
    Json j;
    try {
      j = Json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfigInvalid, std::string("config: ") + e.what());
    }
    auto c = std::make_unique<rc_config>();
    c->config = pipeline::config_from_json(j);
    pipeline::validate(c->config);
    *out = c.release();
  });
}

void rc_config_free(rc_config* config) { delete config; }

rc_status rc_config_to_json(rc_config* config, const char** json) {
  return guarded([&] {
    require(config && json, "null argument");
    config->json = pipeline::to_json(config->config).dump(2);
    *json = config->json.c_str();
  });
}

rc_status rc_execute(const rc_config* config, rc_log_fn log, void* user, int* exit_code) {
  if (exit_code) *exit_code = RC_EXIT_FAILED_CELLS;
  return guarded([&] {
    require(config && exit_code, "null argument");
    pipeline::Log sink;
    if (log) sink = [log, user](const std::string& line) { log(line.c_str(), user); };
    try {
      *exit_code = pipeline::execute_config(config->config, sink).exit_code;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfigInvalid || e.code() == ErrorCode::kDatasetMissing) {
        *exit_code = RC_EXIT_CONFIG;
      }
      throw;
    }
  });
}

rc_status rc_table_synthetic(const char* spec_json, rc_table** out) {
  return guarded([&] {
    require(spec_json && out, "null argument");
    *out = nullptr;
    const auto j = Json::parse(spec_json);
    ingest::SyntheticSpec spec;
    spec.n_rows = j.value("n_rows", spec.n_rows);
    if (j.contains("seasonal")) {
      spec.seasonal_periods.clear();
      for (const auto& t : j.at("seasonal")) spec.seasonal_periods.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
    }
    spec.trend_slope = j.value("trend_slope", spec.trend_slope);
    spec.noise_std = j.value("noise_std", spec.noise_std);
    spec.missing_rate = j.value("missing_rate", spec.missing_rate);
    spec.gap_max_len = j.value("gap_max_len", spec.gap_max_len);
    spec.seed = j.value("seed", spec.seed);
    *out = new rc_table{ingest::generate_synthetic(spec)};
  });
}

rc_status rc_table_load_csv(const char* path, const char* schema_json, rc_table** out) {
  return guarded([&] {
    require(path && schema_json && out, "null argument");
    *out = nullptr;
    std::vector<ColumnMeta> schema;
    for (const auto& c : Json::parse(schema_json)) {
      ColumnMeta m;
      m.name = c.at("name").get<std::string>();
      m.kind = kind_from_string(c.value("kind", std::string("continuous")));
      m.unit = c.value("unit", std::string());
      schema.push_back(m);
    }
    *out = new rc_table{ingest::load_csv_table(path, schema)};
  });
}

void rc_table_free(rc_table* table) { delete table; }

rc_status rc_table_shape(const rc_table* table, size_t* rows, size_t* columns) {
  return guarded([&] {
    require(table && rows && columns, "null argument");
    *rows = table->table.n_rows();
    *columns = table->table.columns().size();
  });
}

rc_status rc_table_column_name(const rc_table* table, size_t index, const char** name) {
  return guarded([&] {
    require(table && name, "null argument");
    require(index < table->table.columns().size(), "column index out of range");
    *name = table->table.columns()[index].meta.name.c_str();
  });
}

rc_status rc_table_column(const rc_table* table, const char* name, double* out, size_t capacity) {
  return guarded([&] {
    require(table && name && out, "null argument");
    const auto& col = table->table.column(name);
    require(col.is_numeric(), "column is not numeric");
    const auto& v = col.numeric();
    if (capacity < v.size()) throw Error(ErrorCode::kLengthMismatch, "buffer holds fewer values than the column");
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].value_or(std::numeric_limits<double>::quiet_NaN());
  });
}

rc_status rc_stationarity_test(const double* series, size_t n, rc_stationarity* out) {
  return guarded([&] {
    require(series && out, "null argument");
    const auto r = stats::stationarity_report({series, n});
    out->adf_stat = r.adf_stat;
    out->adf_pvalue = r.adf_pvalue;
    out->adf_lags = r.lags_used;
    out->kpss_stat = r.kpss_stat;
    out->kpss_pvalue = r.kpss_pvalue;
    out->stationary = r.verdict == stats::Verdict::kStationary ? 1 : 0;
  });
}

rc_status rc_mutual_information(const double* x, const double* y, size_t n, size_t bins, double* out) {
  return guarded([&] {
    require(x && y && out, "null argument");
    *out = stats::mutual_information({x, n}, {y, n}, bins);
  });
}

rc_status rc_confidence_interval(const double* samples, size_t k, double* mean, double* half_width) {
  return guarded([&] {
    require(samples && mean && half_width, "null argument");
    const auto ci = stats::confidence_interval({samples, k});
    *mean = ci.mean;
    *half_width = ci.half_width;
  });
}

rc_status rc_friedman(const double* scores, size_t blocks, size_t treatments, int lower_is_better,
                      double* chi_squared, int* df, double* p_value) {
  return guarded([&] {
    require(scores && chi_squared && df && p_value, "null argument");
    stats::Matrix m(static_cast<Eigen::Index>(blocks), static_cast<Eigen::Index>(treatments));
    for (size_t b = 0; b < blocks; ++b) {
      for (size_t t = 0; t < treatments; ++t) {
        m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)) = scores[b * treatments + t];
      }
    }
    const auto r = stats::friedman_test(m, lower_is_better != 0);
    *chi_squared = r.chi_squared;
    *df = r.df;
    *p_value = r.p_value;
  });
}

rc_status rc_model_build(const char* token, size_t lookback, size_t features, uint64_t seed, rc_model** out) {
  return guarded([&] {
    require(token && out, "null argument");
    *out = nullptr;
    auto m = std::make_unique<rc_model>();
    m->checkpoint.spec = models::parse_model_token(token);
    if (m->checkpoint.spec.family == models::Family::kArima) {
      throw Error(ErrorCode::kInvalidSpec, "arima is not a network");
    }
    m->checkpoint.window = {lookback, features};
    m->checkpoint.seed = seed;
    m->checkpoint.network = models::build_model(m->checkpoint.spec, m->checkpoint.window, seed);
    *out = m.release();
  });
}

rc_status rc_model_load(const char* path, rc_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    *out = new rc_model{models::load_checkpoint(path)};
  });
}

rc_status rc_model_save(const rc_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    models::save_checkpoint(path, model->checkpoint);
  });
}

void rc_model_free(rc_model* model) { delete model; }

rc_status rc_model_parameter_count(const rc_model* model, size_t* count) {
  return guarded([&] {
    require(model && count, "null argument");
    *count = models::count_parameters(model->checkpoint.network);
  });
}

rc_status rc_model_predict(rc_model* model, const double* windows, size_t n, double* out) {
  return guarded([&] {
    require(model && windows && out, "null argument");
    const auto& w = model->checkpoint.window;
    nn::Tensor x({n, w.lookback, w.features}, std::vector<double>(windows, windows + n * w.lookback * w.features));
    const auto y = nn::predict(model->checkpoint.network, x);
    std::copy(y.begin(), y.end(), out);
  });
}

}  // extern "C"
