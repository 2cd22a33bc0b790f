#include "renewcast/serialize.hpp"

#include "renewcast/error.hpp"

namespace renewcast {

namespace {

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

Json to_json(const models::ModelSpec& spec) {
  Json j;
  j["family"] = models::to_string(spec.family);
  j["regularized"] = spec.regularized;
  if (spec.family == models::Family::kArima) {
    j["orders"] = {spec.ar_order, spec.diff_order, spec.ma_order};
    return j;
  }
  j["conv_filters"] = spec.conv_filters;
  j["layer_widths"] = spec.layer_widths;
  j["decoder_widths"] = spec.decoder_widths;
  Json acts = Json::array();
  for (auto a : spec.activations) acts.push_back(nn::to_string(a));
  j["activations"] = acts;
  j["kernel_width"] = spec.kernel_width;
  j["pool"] = spec.pool;
  j["learning_rate"] = spec.learning_rate;
  j["dropout"] = spec.dropout;
  j["batch_size"] = spec.batch_size;
  j["optimizer"] = nn::to_string(spec.optimizer);
  j["l2_lambda"] = spec.l2_lambda;
  return j;
}

models::ModelSpec model_spec_from_json(const Json& j) {
  try {
    models::ModelSpec s = models::ModelSpec::defaults(models::family_from_string(j.at("family").get<std::string>()),
                                                      j.value("regularized", true));
    if (s.family == models::Family::kArima) {
      if (j.contains("orders")) {
        const auto o = j.at("orders").get<std::vector<int>>();
        if (o.size() != 3) throw Error(ErrorCode::kInvalidSpec, "orders must have three entries");
        s.ar_order = o[0];
        s.diff_order = o[1];
        s.ma_order = o[2];
      }
      s.validate();
      return s;
    }
    if (j.contains("conv_filters")) s.conv_filters = j.at("conv_filters").get<std::vector<int>>();
    if (j.contains("layer_widths")) s.layer_widths = j.at("layer_widths").get<std::vector<int>>();
    if (j.contains("decoder_widths")) s.decoder_widths = j.at("decoder_widths").get<std::vector<int>>();
    if (j.contains("activations")) {
      s.activations.clear();
      for (const auto& a : j.at("activations")) s.activations.push_back(nn::activation_from_string(a.get<std::string>()));
    }
    s.kernel_width = j.value("kernel_width", s.kernel_width);
    s.pool = j.value("pool", s.pool);
    s.learning_rate = j.value("learning_rate", s.learning_rate);
    s.dropout = j.value("dropout", s.dropout);
    s.batch_size = j.value("batch_size", s.batch_size);
    if (j.contains("optimizer")) s.optimizer = nn::optimizer_from_string(j.at("optimizer").get<std::string>());
    s.l2_lambda = j.value("l2_lambda", s.l2_lambda);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, e.what());
  }
}

Json to_json(const nn::TrainConfig& c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["dropout_rate"] = c.dropout_rate;
  j["batch_size"] = c.batch_size;
  j["optimizer"] = nn::to_string(c.optimizer);
  j["l2_lambda"] = c.l2_lambda;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["seed"] = c.seed;
  j["lookback"] = c.lookback;
  j["clip_norm"] = c.clip_norm;
  return j;
}

Json to_json(const nn::EpochMetrics& m) {
  return Json{{"epoch", m.epoch},
              {"train_loss", m.train_loss},
              {"val_loss", m.val_loss},
              {"train_rmse", m.train_rmse},
              {"val_rmse", m.val_rmse}};
}

Json to_json(const stats::PcaModel& pca) {
  Json j;
  j["input_dim"] = pca.input_dim();
  j["n_components"] = pca.n_components();
  j["mean"] = vector_json(pca.mean);
  j["components"] = matrix_json(pca.components);
  j["explained_variance_ratio"] = vector_json(pca.explained_variance_ratio);
  j["rank_deficient"] = pca.rank_deficient;
  return j;
}

Json to_json(const features::TransformPlan& plan) {
  Json j;
  j["fit_rows"] = {plan.fit_rows.begin, plan.fit_rows.end};
  j["target"] = plan.target;
  j["options"] = {{"impute", plan.options.impute},
                  {"encode", plan.options.encode},
                  {"stationarize", plan.options.stationarize},
                  {"correlation_filter", plan.options.correlation_filter},
                  {"pca", plan.options.pca},
                  {"correlation_threshold", plan.options.correlation_threshold},
                  {"pca_variance_target", plan.options.pca_variance_target}};
  Json impute;
  impute["fit_rows"] = plan.impute.fit_rows;
  impute["means"] = plan.impute.means;
  impute["modes"] = plan.impute.modes;
  j["impute"] = impute;
  Json encoders = Json::array();
  for (const auto& e : plan.encoders) {
    Json cats;
    for (const auto& [label, s] : e.categories) cats[label] = {{"target_sum", s.target_sum}, {"count", s.count}};
    encoders.push_back({{"column", e.column}, {"global_target_mean", e.global_target_mean}, {"categories", cats}});
  }
  j["encoders"] = encoders;
  j["differencing"] = plan.differencing;
  j["lead_rows"] = plan.lead_rows;
  Json scaling;
  for (const auto& [name, mm] : plan.scaling.columns) scaling[name] = {mm.min, mm.max};
  j["scaling"] = scaling;
  j["dropped_by_correlation"] = plan.dropped_by_correlation;
  j["features"] = plan.features;
  j["channels"] = plan.channel_names();
  if (plan.pca) j["pca"] = to_json(*plan.pca);
  return j;
}

Json to_json(const stats::StationarityReport& r) {
  return Json{{"adf_stat", r.adf_stat},   {"adf_pvalue", r.adf_pvalue},   {"lags_used", r.lags_used},
              {"kpss_stat", r.kpss_stat}, {"kpss_pvalue", r.kpss_pvalue}, {"verdict", stats::to_string(r.verdict)}};
}

Json to_json(const stats::FriedmanResult& r) {
  return Json{{"chi_squared", r.chi_squared},
              {"df", r.df},
              {"p_value", r.p_value},
              {"blocks", r.blocks},
              {"rank_sums", r.rank_sums}};
}

}  // namespace renewcast
