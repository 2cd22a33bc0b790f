#include "renewcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "renewcast/error.hpp"
#include "renewcast/parallel.hpp"

namespace renewcast::eval {

namespace {

constexpr std::array<Metric, 8> kMetrics = {Metric::kTrainRmse, Metric::kValRmse, Metric::kTrainMae,  Metric::kValMae,
                                            Metric::kTrainR2,   Metric::kValR2,   Metric::kTrainLoss, Metric::kValLoss};

double mse_of(std::span<const double> a, std::span<const double> b) {
  const double r = nn::rmse(a, b);
  return r * r;
}

std::vector<double> tail(std::span<const double> v, std::size_t n) {
  const std::size_t start = v.size() > n ? v.size() - n : 0;
  return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(start), v.end());
}

}  // namespace

const std::array<Metric, 8>& all_metrics() { return kMetrics; }

const char* metric_key(Metric m) noexcept {
  switch (m) {
    case Metric::kTrainRmse: return "train_rmse";
    case Metric::kValRmse: return "val_rmse";
    case Metric::kTrainMae: return "train_mae";
    case Metric::kValMae: return "val_mae";
    case Metric::kTrainR2: return "train_r2";
    case Metric::kValR2: return "val_r2";
    case Metric::kTrainLoss: return "train_loss";
    case Metric::kValLoss: return "val_loss";
  }
  return "?";
}

const char* metric_label(Metric m) noexcept {
  switch (m) {
    case Metric::kTrainRmse: return "Train RMSE";
    case Metric::kValRmse: return "Validation RMSE";
    case Metric::kTrainMae: return "Train MAE";
    case Metric::kValMae: return "Validation MAE";
    case Metric::kTrainR2: return "Train R-Square";
    case Metric::kValR2: return "Validation R-Square";
    case Metric::kTrainLoss: return "Train Loss";
    case Metric::kValLoss: return "Validation Loss";
  }
  return "?";
}

bool lower_is_better(Metric m) noexcept { return m != Metric::kTrainR2 && m != Metric::kValR2; }

double MetricSet::get(Metric m) const noexcept {
  switch (m) {
    case Metric::kTrainRmse: return train_rmse;
    case Metric::kValRmse: return val_rmse;
    case Metric::kTrainMae: return train_mae;
    case Metric::kValMae: return val_mae;
    case Metric::kTrainR2: return train_r2;
    case Metric::kValR2: return val_r2;
    case Metric::kTrainLoss: return train_loss;
    case Metric::kValLoss: return val_loss;
  }
  return 0.0;
}

void MetricSet::set(Metric m, double v) noexcept {
  switch (m) {
    case Metric::kTrainRmse: train_rmse = v; break;
    case Metric::kValRmse: val_rmse = v; break;
    case Metric::kTrainMae: train_mae = v; break;
    case Metric::kValMae: val_mae = v; break;
    case Metric::kTrainR2: train_r2 = v; break;
    case Metric::kValR2: val_r2 = v; break;
    case Metric::kTrainLoss: train_loss = v; break;
    case Metric::kValLoss: val_loss = v; break;
  }
}

RSquared r_squared(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorCode::kLengthMismatch, "r_squared");
  if (y_true.empty()) throw Error(ErrorCode::kLengthMismatch, "r_squared: empty");
  const double m = stats::mean(y_true);
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - m) * (y_true[i] - m);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (ss_tot == 0.0) return {0.0, true};
  return {1.0 - ss_res / ss_tot, false};
}

MetricSet compute_metrics(std::span<const double> train_true, std::span<const double> train_pred,
                          std::span<const double> val_true, std::span<const double> val_pred, double penalty) {
  MetricSet m;
  m.train_rmse = nn::rmse(train_true, train_pred);
  m.val_rmse = nn::rmse(val_true, val_pred);
  m.train_mae = nn::mae(train_true, train_pred);
  m.val_mae = nn::mae(val_true, val_pred);
  const auto tr = r_squared(train_true, train_pred);
  const auto vr = r_squared(val_true, val_pred);
  m.train_r2 = tr.value;
  m.train_r2_degenerate = tr.degenerate;
  m.val_r2 = vr.value;
  m.val_r2_degenerate = vr.degenerate;
  m.train_loss = m.train_rmse * m.train_rmse + penalty;
  m.val_loss = m.val_rmse * m.val_rmse + penalty;
  return m;
}

// ---------------------------------------------------------------------------

Split chronological_split(std::size_t n_rows, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::kInvalidArgument, "ratio must be in (0, 1)");
  const auto v = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_rows)));
  if (v < 2 || v + 2 > n_rows) {
    throw Error(ErrorCode::kSplitTooSmall, std::to_string(n_rows) + " rows at ratio " + format_number(ratio));
  }
  return Split{{0, n_rows - v}, {n_rows - v, n_rows}};
}

std::vector<Split> forward_chaining_folds(std::size_t n_rows, double ratio, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::kTooFewFolds, "k must be at least 1");
  const Split last = chronological_split(n_rows, ratio);
  const std::size_t train_max = last.train.end;
  const std::size_t v = last.validation.size();
  const std::size_t step = train_max / (2 * k);
  if (k > 1 && step == 0) throw Error(ErrorCode::kSplitTooSmall, "too few rows for " + std::to_string(k) + " folds");
  std::vector<Split> folds;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t t = train_max - (k - 1 - i) * step;
    if (t < 2) throw Error(ErrorCode::kSplitTooSmall, "fold training range is empty");
    folds.push_back(Split{{0, t}, {t, t + v}});
  }
  return folds;
}

std::vector<FoldData> prepare_folds(const TimeSeriesTable& table, const std::string& target,
                                    const SweepOptions& options) {
  std::vector<FoldData> out;
  for (double r : options.ratios) {
    const auto splits = forward_chaining_folds(table.n_rows(), r, options.k);
    for (std::size_t f = 0; f < splits.size(); ++f) {
      FoldData d;
      d.ratio = r;
      d.fold = f;
      d.split = splits[f];
      out.push_back(std::move(d));
    }
  }
  parallel_for(out.size(), options.jobs, [&](std::size_t i) {
    out[i].plan = features::fit_plan(table, target, out[i].split.train, options.plan);
    out[i].design = features::apply_plan(out[i].plan, table);
  });
  return out;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t ratio_index, std::size_t fold) noexcept {
  return derive_seed(seed, 1000 + ratio_index * 64 + fold);
}

FoldOutcome evaluate_split(const models::ModelSpec& spec, const FoldData& data, std::uint64_t seed,
                           const SweepOptions& options) {
  const auto& design = data.design;
  const std::size_t lead = design.lead_rows;
  const std::size_t L = options.lookback;
  const features::RowRange train{std::max(data.split.train.begin, lead), data.split.train.end};
  const features::RowRange val = data.split.validation;
  if (train.size() <= L + 1 || val.size() <= L) {
    throw Error(ErrorCode::kSplitTooSmall, "split leaves no windows at lookback " + std::to_string(L));
  }

  FoldOutcome out;
  std::vector<double> train_true, train_pred, val_true, val_pred;
  double penalty = 0.0;
  if (spec.family == models::Family::kArima) {
    const std::vector<double> series(design.target.begin() + static_cast<std::ptrdiff_t>(train.begin),
                                     design.target.begin() + static_cast<std::ptrdiff_t>(val.end));
    const std::size_t train_end = train.size();
    const auto fc = options.arima_select_orders
                        ? models::arima_select_orders(series, spec.diff_order, train_end)
                        : models::arima_fit_forecast(series, spec.ar_order, spec.diff_order, spec.ma_order, train_end);
    train_true.assign(series.begin() + static_cast<std::ptrdiff_t>(fc.first_fitted),
                      series.begin() + static_cast<std::ptrdiff_t>(train_end));
    train_pred = fc.fitted;
    // Score the same validation rows the windowed models predict.
    val_true.assign(series.begin() + static_cast<std::ptrdiff_t>(train_end + L), series.end());
    val_pred.assign(fc.forecasts.begin() + static_cast<std::ptrdiff_t>(L), fc.forecasts.end());
  } else {
    const auto train_w = models::make_windows(design.inputs, design.target, L, train);
    const auto val_w = models::make_windows(design.inputs, design.target, L, val);
    nn::Network net = models::build_model(spec, {L, static_cast<std::size_t>(design.inputs.cols())}, seed);
    const auto cfg = models::train_config(spec, L, seed, options.max_epochs, options.patience);
    const auto fit = nn::fit(net, train_w, val_w, cfg);
    out.epochs = fit.stopped_epoch;
    out.best_epoch = fit.best_epoch;
    train_true = train_w.targets;
    train_pred = nn::predict(net, train_w);
    val_true = val_w.targets;
    val_pred = nn::predict(net, val_w);
    auto params = net.parameters();
    penalty = nn::l2_penalty(params, cfg.l2_lambda);
  }
  out.metrics = compute_metrics(train_true, train_pred, val_true, val_pred, penalty);

  const auto& mm = data.plan.scaling.columns.at(data.plan.target);
  const double range = mm.degenerate() ? 1.0 : mm.max - mm.min;
  out.original_units = out.metrics;
  for (Metric m : {Metric::kTrainRmse, Metric::kValRmse, Metric::kTrainMae, Metric::kValMae}) {
    out.original_units.set(m, out.metrics.get(m) * range);
  }
  out.original_units.train_loss = mse_of(train_true, train_pred) * range * range;
  out.original_units.val_loss = mse_of(val_true, val_pred) * range * range;
  out.val_actual = tail(val_true, options.plot_points);
  out.val_predicted = tail(val_pred, options.plot_points);
  return out;
}

// ---------------------------------------------------------------------------

const CellResult* RatioSweepReport::find(const std::string& model, double ratio) const {
  for (const auto& c : cells) {
    if (c.model == model && c.ratio == ratio) return &c;
  }
  return nullptr;
}

std::size_t RatioSweepReport::failed_cells() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return c.failed; }));
}

std::map<Metric, stats::ConfidenceInterval> crossval_ci(const std::vector<MetricSet>& folds) {
  if (folds.size() < 2) throw Error(ErrorCode::kTooFewFolds, "confidence intervals need k >= 2");
  std::map<Metric, stats::ConfidenceInterval> out;
  std::vector<double> v(folds.size());
  for (Metric m : kMetrics) {
    for (std::size_t i = 0; i < folds.size(); ++i) v[i] = folds[i].get(m);
    out[m] = stats::confidence_interval(v);
  }
  return out;
}

namespace {

MetricSet mean_of(const std::vector<MetricSet>& folds) {
  MetricSet m;
  for (Metric metric : kMetrics) {
    double s = 0.0;
    for (const auto& f : folds) s += f.get(metric);
    m.set(metric, s / static_cast<double>(folds.size()));
  }
  for (const auto& f : folds) {
    m.train_r2_degenerate = m.train_r2_degenerate || f.train_r2_degenerate;
    m.val_r2_degenerate = m.val_r2_degenerate || f.val_r2_degenerate;
  }
  return m;
}

void finalize_cell(CellResult& cell) {
  if (cell.failed || cell.folds.empty()) return;
  cell.mean = mean_of(cell.folds);
  cell.mean_original = mean_of(cell.folds_original);
  cell.ci.clear();
  if (cell.folds.size() >= 2) cell.ci = crossval_ci(cell.folds);
}

}  // namespace

RatioSweepReport ratio_sweep(const std::vector<models::ModelSpec>& specs, const std::vector<FoldData>& folds,
                             const SweepOptions& options) {
  if (specs.empty()) throw Error(ErrorCode::kInvalidArgument, "no model families to run");
  RatioSweepReport report;
  report.ratios = options.ratios;
  report.k = options.k;
  for (const auto& s : specs) {
    report.models.push_back(s.token());
    report.labels.push_back(s.label());
  }
  for (const auto& s : specs) {
    for (double r : options.ratios) {
      CellResult c;
      c.model = s.token();
      c.label = s.label();
      c.ratio = r;
      report.cells.push_back(std::move(c));
    }
  }
  std::mutex log_mutex;
  const std::size_t n_ratios = options.ratios.size();
  parallel_for(report.cells.size(), options.jobs, [&](std::size_t idx) {
    CellResult& cell = report.cells[idx];
    const auto& spec = specs[idx / n_ratios];
    const std::size_t ri = idx % n_ratios;
    try {
      for (const auto& fd : folds) {
        if (fd.ratio != cell.ratio) continue;
        const auto o = evaluate_split(spec, fd, fold_seed(options.seed, ri, fd.fold), options);
        cell.folds.push_back(o.metrics);
        cell.folds_original.push_back(o.original_units);
        cell.epochs.push_back(o.epochs);
        cell.plot_actual = o.val_actual;
        cell.plot_predicted = o.val_predicted;
      }
      if (cell.folds.empty()) throw Error(ErrorCode::kInternal, "no folds prepared for this ratio");
      finalize_cell(cell);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
    if (options.log) {
      std::lock_guard<std::mutex> lock(log_mutex);
      options.log(cell.label + " @ " + format_number(cell.ratio) +
                  (cell.failed ? ": FAILED " + cell.error : ": val_rmse " + format_number(cell.mean.val_rmse)));
    }
  });
  return report;
}

RatioSweepReport ratio_sweep(const std::vector<models::ModelSpec>& specs, const TimeSeriesTable& table,
                             const std::string& target, const SweepOptions& options) {
  return ratio_sweep(specs, prepare_folds(table, target, options), options);
}

stats::Matrix friedman_matrix(const RatioSweepReport& report, Metric metric, std::vector<std::string>* models) {
  std::vector<std::string> usable;
  for (const auto& m : report.models) {
    bool ok = true;
    for (double r : report.ratios) {
      const auto* c = report.find(m, r);
      ok = ok && c && !c->failed;
    }
    if (ok) usable.push_back(m);
  }
  stats::Matrix out(static_cast<Eigen::Index>(report.ratios.size()), static_cast<Eigen::Index>(usable.size()));
  for (std::size_t b = 0; b < report.ratios.size(); ++b) {
    for (std::size_t t = 0; t < usable.size(); ++t) {
      out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)) =
          report.find(usable[t], report.ratios[b])->mean.get(metric);
    }
  }
  if (models) *models = usable;
  return out;
}

std::vector<FriedmanRow> friedman_all(const RatioSweepReport& report) {
  std::vector<FriedmanRow> rows;
  for (Metric m : kMetrics) {
    const auto scores = friedman_matrix(report, m);
    if (scores.rows() < 2 || scores.cols() < 2) return {};
    rows.push_back({m, stats::friedman_test(scores, lower_is_better(m))});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

Json metrics_json(const MetricSet& m) {
  Json j;
  for (Metric metric : kMetrics) j[metric_key(metric)] = m.get(metric);
  j["train_r2_degenerate"] = m.train_r2_degenerate;
  j["val_r2_degenerate"] = m.val_r2_degenerate;
  return j;
}

MetricSet metrics_from_json(const Json& j) {
  MetricSet m;
  for (Metric metric : kMetrics) m.set(metric, j.at(metric_key(metric)).get<double>());
  m.train_r2_degenerate = j.value("train_r2_degenerate", false);
  m.val_r2_degenerate = j.value("val_r2_degenerate", false);
  return m;
}

}  // namespace

Json to_json(const RatioSweepReport& report) {
  Json j;
  j["models"] = report.models;
  j["labels"] = report.labels;
  j["ratios"] = report.ratios;
  j["k"] = report.k;
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json cj;
    cj["model"] = c.model;
    cj["label"] = c.label;
    cj["ratio"] = c.ratio;
    cj["failed"] = c.failed;
    if (c.failed) cj["error"] = c.error;
    Json folds = Json::array(), orig = Json::array();
    for (const auto& f : c.folds) folds.push_back(metrics_json(f));
    for (const auto& f : c.folds_original) orig.push_back(metrics_json(f));
    cj["folds"] = folds;
    cj["folds_original"] = orig;
    cj["epochs"] = c.epochs;
    if (!c.failed && !c.folds.empty()) cj["mean"] = metrics_json(c.mean);
    cj["plot_actual"] = c.plot_actual;
    cj["plot_predicted"] = c.plot_predicted;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  return j;
}

RatioSweepReport report_from_json(const Json& j) {
  try {
    RatioSweepReport r;
    r.models = j.at("models").get<std::vector<std::string>>();
    r.labels = j.at("labels").get<std::vector<std::string>>();
    r.ratios = j.at("ratios").get<std::vector<double>>();
    r.k = j.at("k").get<std::size_t>();
    for (const auto& cj : j.at("cells")) {
      CellResult c;
      c.model = cj.at("model").get<std::string>();
      c.label = cj.at("label").get<std::string>();
      c.ratio = cj.at("ratio").get<double>();
      c.failed = cj.at("failed").get<bool>();
      c.error = cj.value("error", std::string());
      for (const auto& f : cj.at("folds")) c.folds.push_back(metrics_from_json(f));
      for (const auto& f : cj.at("folds_original")) c.folds_original.push_back(metrics_from_json(f));
      c.epochs = cj.at("epochs").get<std::vector<std::size_t>>();
      c.plot_actual = cj.at("plot_actual").get<std::vector<double>>();
      c.plot_predicted = cj.at("plot_predicted").get<std::vector<double>>();
      finalize_cell(c);
      r.cells.push_back(std::move(c));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("report: ") + e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string metrics_csv(const RatioSweepReport& report) {
  std::ostringstream out;
  out << "model,ratio,train_rmse,train_rmse_ci,val_rmse,val_rmse_ci\n";
  for (const auto& c : report.cells) {
    out << c.label << ',' << format_number(c.ratio) << ',';
    if (c.failed) {
      out << ",,,\n";
      continue;
    }
    auto ci = [&](Metric m) { return c.ci.empty() ? std::string() : format_number(c.ci.at(m).half_width); };
    out << format_number(c.mean.train_rmse) << ',' << ci(Metric::kTrainRmse) << ',' << format_number(c.mean.val_rmse)
        << ',' << ci(Metric::kValRmse) << '\n';
  }
  return out.str();
}

std::string metrics_all_csv(const RatioSweepReport& report) {
  std::ostringstream out;
  out << "model,token,ratio,status,metric,mean,ci_half_width,folds,mean_original,degenerate\n";
  for (const auto& c : report.cells) {
    for (Metric m : kMetrics) {
      out << c.label << ',' << c.model << ',' << format_number(c.ratio) << ',' << (c.failed ? "failed" : "ok") << ','
          << metric_key(m) << ',';
      if (c.failed) {
        out << ",,,,\n";
        continue;
      }
      out << format_number(c.mean.get(m)) << ',' << (c.ci.empty() ? "" : format_number(c.ci.at(m).half_width)) << ',';
      for (std::size_t i = 0; i < c.folds.size(); ++i) out << (i ? ";" : "") << format_number(c.folds[i].get(m));
      out << ',';
      const bool r2 = m == Metric::kTrainR2 || m == Metric::kValR2;
      if (!r2) out << format_number(c.mean_original.get(m));
      out << ',';
      if (m == Metric::kTrainR2) out << (c.mean.train_r2_degenerate ? "true" : "false");
      if (m == Metric::kValR2) out << (c.mean.val_r2_degenerate ? "true" : "false");
      out << '\n';
    }
  }
  return out.str();
}

std::string friedman_csv(const std::vector<FriedmanRow>& rows) {
  std::ostringstream out;
  out << "metric,df,chi_squared,p_value\n";
  for (const auto& r : rows) {
    out << metric_label(r.metric) << ',' << r.result.df << ',' << format_number(r.result.chi_squared) << ','
        << format_number(r.result.p_value) << '\n';
  }
  return out.str();
}

std::string plot_svg(const std::string& title, std::span<const double> actual, std::span<const double> predicted) {
  constexpr double kW = 800, kH = 320, kPad = 40;
  double lo = 0.0, hi = 1.0;
  if (!actual.empty() || !predicted.empty()) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (auto s : {actual, predicted}) {
      for (double v : s) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(hi > lo)) hi = lo + 1.0;
  }
  const std::size_t n = std::max(actual.size(), predicted.size());
  auto polyline = [&](std::span<const double> s, const char* color) {
    std::ostringstream p;
    p << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    char buf[48];
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double x = kPad + (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0) * (kW - 2 * kPad);
      const double y = kH - kPad - (s[i] - lo) / (hi - lo) * (kH - 2 * kPad);
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", x, y);
      p << buf;
    }
    p << "\"/>\n";
    return p.str();
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kW - 2 * kPad << "\" height=\""
      << kH - 2 * kPad << "\" fill=\"white\" stroke=\"#999\"/>\n"
      << "<text x=\"" << kPad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
      << "<text x=\"4\" y=\"" << kPad + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">" << format_number(hi)
      << "</text>\n"
      << "<text x=\"4\" y=\"" << kH - kPad << "\" font-family=\"sans-serif\" font-size=\"10\">" << format_number(lo)
      << "</text>\n"
      << polyline(actual, "#1f77b4") << polyline(predicted, "#ff7f0e")
      << "<text x=\"" << kW - 200 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#1f77b4\">actual</text>\n"
      << "<text x=\"" << kW - 120 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#ff7f0e\">predicted</text>\n"
      << "</svg>\n";
  return svg.str();
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<std::filesystem::path> emit_report(const RatioSweepReport& report, const std::vector<FriedmanRow>& friedman,
                                               const std::filesystem::path& out_dir, const Json* manifest) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "plots", ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::filesystem::path& p, const std::string& text) {
    write_text(p, text);
    written.push_back(p);
  };
  put(out_dir / "metrics.csv", metrics_csv(report));
  put(out_dir / "metrics_all.csv", metrics_all_csv(report));
  put(out_dir / "friedman.csv", friedman_csv(friedman));
  for (const auto& c : report.cells) {
    if (c.failed) continue;
    put(out_dir / "plots" / (c.model + "_" + format_number(c.ratio) + ".svg"),
        plot_svg(c.label + " at ratio " + format_number(c.ratio), c.plot_actual, c.plot_predicted));
  }
  if (manifest) put(out_dir / "manifest.json", manifest->dump(2) + "\n");
  return written;
}

}  // namespace renewcast::eval
