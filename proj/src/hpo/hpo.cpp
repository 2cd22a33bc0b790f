#include "renewcast/hpo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "renewcast/error.hpp"
#include "renewcast/parallel.hpp"

namespace renewcast::hpo {

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return lo + std::min(hi - lo, static_cast<int>(uniform01(rng) * span));
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& options) {
  return options[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(options.size()) - 1))];
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrialConfig sample(const SearchSpace& space, Rng& rng) {
  TrialConfig c;
  c.layers = uniform_int(rng, space.min_layers, space.max_layers);
  c.neurons = uniform_int(rng, space.min_neurons, space.max_neurons);
  const double lo = std::log(space.min_learning_rate), hi = std::log(space.max_learning_rate);
  c.learning_rate = std::clamp(std::exp(lo + (hi - lo) * uniform01(rng)), space.min_learning_rate,
                               space.max_learning_rate);
  c.dropout = space.min_dropout + (space.max_dropout - space.min_dropout) * uniform01(rng);
  c.batch_size = pick(rng, space.batch_sizes);
  c.activation = pick(rng, space.activations);
  return c;
}

bool contains(const SearchSpace& space, const TrialConfig& c) {
  return c.layers >= space.min_layers && c.layers <= space.max_layers && c.neurons >= space.min_neurons &&
         c.neurons <= space.max_neurons && c.learning_rate >= space.min_learning_rate &&
         c.learning_rate <= space.max_learning_rate && c.dropout >= space.min_dropout &&
         c.dropout <= space.max_dropout &&
         std::find(space.batch_sizes.begin(), space.batch_sizes.end(), c.batch_size) != space.batch_sizes.end() &&
         std::find(space.activations.begin(), space.activations.end(), c.activation) != space.activations.end();
}

std::vector<int> layer_widths(const SearchSpace& space, const TrialConfig& c) {
  std::vector<int> w;
  int width = c.neurons;
  for (int i = 0; i < c.layers; ++i) {
    w.push_back(width);
    width = std::max(space.min_neurons, width / 2);
  }
  return w;
}

const char* to_string(TrialStatus s) noexcept { return s == TrialStatus::kOk ? "ok" : "diverged"; }

bool ranks_before(const TrialResult& a, const TrialResult& b) {
  const bool a_ok = a.status == TrialStatus::kOk, b_ok = b.status == TrialStatus::kOk;
  if (a_ok != b_ok) return a_ok;
  if (a_ok) {
    if (a.mean_val_rmse != b.mean_val_rmse) return a.mean_val_rmse < b.mean_val_rmse;
    if (a.gap() != b.gap()) return a.gap() < b.gap();
    if (a.parameters != b.parameters) return a.parameters < b.parameters;
  }
  return a.id < b.id;
}

TrialResult run_trial(std::size_t id, const TrialConfig& config, std::uint64_t seed, const Evaluator& evaluate) {
  TrialResult r;
  r.id = id;
  r.config = config;
  r.seed = seed;
  try {
    auto e = evaluate(config, seed);
    r.fold_val_rmse = std::move(e.fold_val_rmse);
    r.fold_train_rmse = std::move(e.fold_train_rmse);
    r.parameters = e.parameters;
    r.mean_val_rmse = mean_of(r.fold_val_rmse);
    r.mean_train_rmse = mean_of(r.fold_train_rmse);
    if (r.fold_val_rmse.empty() || !all_finite(r.fold_val_rmse) || !all_finite(r.fold_train_rmse)) {
      r.status = TrialStatus::kDiverged;
      r.error = "non-finite score";
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDivergenceDetected) throw;
    r.status = TrialStatus::kDiverged;
    r.error = e.what();
  }
  return r;
}

std::vector<TrialResult> random_search(const SearchSpace& space, const Evaluator& evaluate,
                                       const SearchOptions& options) {
  if (options.budget < 1) throw Error(ErrorCode::kInvalidArgument, "search budget must be at least 1");
  std::vector<TrialResult> trials(options.budget);
  parallel_for(options.budget, options.jobs, [&](std::size_t i) {
    Rng rng(derive_seed(options.seed, 1000 + i));
    trials[i] = run_trial(i, sample(space, rng), derive_seed(options.seed, i), evaluate);
  });
  std::sort(trials.begin(), trials.end(), ranks_before);
  if (trials.front().status != TrialStatus::kOk) {
    throw Error(ErrorCode::kAllTrialsDiverged, std::to_string(options.budget) + " trials");
  }
  return trials;
}

std::vector<TrialConfig> neighborhood(const SearchSpace& space, const TrialConfig& center) {
  const std::array<double, 3> lr{center.learning_rate / 2.0, center.learning_rate, center.learning_rate * 2.0};
  const std::array<int, 3> neurons{center.neurons - 32, center.neurons, center.neurons + 32};
  const std::array<double, 3> dropout{center.dropout - 0.1, center.dropout, center.dropout + 0.1};
  std::vector<TrialConfig> out;
  for (double l : lr) {
    for (int n : neurons) {
      for (double d : dropout) {
        TrialConfig c = center;
        c.learning_rate = std::clamp(l, space.min_learning_rate, space.max_learning_rate);
        c.neurons = std::clamp(n, space.min_neurons, space.max_neurons);
        c.dropout = std::clamp(d, space.min_dropout, space.max_dropout);
        out.push_back(c);
      }
    }
  }
  return out;
}

RefineResult grid_refine(const SearchSpace& space, const TrialResult& incumbent, const Evaluator& evaluate,
                         std::size_t jobs) {
  if (incumbent.status != TrialStatus::kOk) {
    throw Error(ErrorCode::kInvalidArgument, "grid refinement needs a successful incumbent");
  }
  const auto grid = neighborhood(space, incumbent.config);
  RefineResult out;
  out.evaluated.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    out.evaluated[i] = run_trial(incumbent.id, grid[i], incumbent.seed, evaluate);
  });
  out.best = incumbent;
  for (const auto& t : out.evaluated) {
    if (t.status == TrialStatus::kOk && ranks_before(t, out.best)) out.best = t;
  }
  return out;
}

models::ModelSpec apply_trial(const models::ModelSpec& base, const SearchSpace& space, const TrialConfig& config) {
  using models::Family;
  models::ModelSpec s = base;
  s.learning_rate = config.learning_rate;
  s.dropout = config.dropout;
  s.batch_size = config.batch_size;
  const auto widths = layer_widths(space, config);
  const auto n = widths.size();
  const auto act = config.activation;
  const auto tanh = nn::Activation::kTanh;
  s.conv_filters.clear();
  s.decoder_widths.clear();
  switch (base.family) {
    case Family::kDnn:
    case Family::kTimeDistributedMlp:
      s.layer_widths = widths;
      s.activations.assign(n, act);
      break;
    case Family::kLstm:
    case Family::kStackedLstm:
      s.layer_widths = widths;
      s.activations.assign(n, tanh);
      break;
    case Family::kCnn:
      // conv layers first, one dense layer last
      s.conv_filters.assign(widths.begin(), widths.end() - 1);
      s.layer_widths = {widths.back()};
      s.activations.assign(n, act);
      break;
    case Family::kCnnLstm:
      s.conv_filters = {widths.front()};
      s.layer_widths.assign(widths.begin() + 1, widths.end());
      s.activations.assign(n, tanh);
      s.activations.front() = act;
      break;
    case Family::kEncoderDecoder: {
      const auto enc = (n + 1) / 2;
      s.layer_widths.assign(widths.begin(), widths.begin() + static_cast<std::ptrdiff_t>(enc));
      s.decoder_widths.assign(widths.begin() + static_cast<std::ptrdiff_t>(enc), widths.end());
      s.activations.assign(n, tanh);
      break;
    }
    case Family::kArima:
      throw Error(ErrorCode::kInvalidSpec, "arima has no searchable network");
  }
  s.validate();
  return s;
}

Evaluator sweep_evaluator(const models::ModelSpec& base, const SearchSpace& space, std::vector<eval::FoldData> folds,
                          const SweepEvaluatorOptions& options) {
  if (folds.empty()) throw Error(ErrorCode::kInvalidArgument, "no folds to evaluate trials on");
  return [base, space, folds = std::move(folds), options](const TrialConfig& config, std::uint64_t seed) {
    const auto spec = apply_trial(base, space, config);
    eval::SweepOptions sweep;
    sweep.lookback = options.lookback;
    sweep.max_epochs = options.max_epochs;
    sweep.patience = options.patience;
    Evaluation e;
    e.parameters = models::closed_form_parameter_count(
        spec, {options.lookback, static_cast<std::size_t>(folds.front().design.inputs.cols())});
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto o = eval::evaluate_split(spec, folds[f], derive_seed(seed, f), sweep);
      e.fold_val_rmse.push_back(o.metrics.val_rmse);
      e.fold_train_rmse.push_back(o.metrics.train_rmse);
    }
    return e;
  };
}

std::string trials_csv(const std::vector<TrialResult>& trials) {
  std::size_t folds = 0;
  for (const auto& t : trials) folds = std::max(folds, t.fold_val_rmse.size());
  std::ostringstream os;
  os << "trial_id,layers,neurons,learning_rate,dropout,batch_size,activation";
  for (std::size_t f = 0; f < folds; ++f) os << ",fold" << f + 1 << "_val_rmse";
  os << ",mean_val_rmse,mean_train_rmse,gap,parameters,status\n";
  for (const auto& t : trials) {
    const auto& c = t.config;
    os << t.id << ',' << c.layers << ',' << c.neurons << ',' << eval::format_number(c.learning_rate) << ','
       << eval::format_number(c.dropout) << ',' << c.batch_size << ',' << nn::to_string(c.activation);
    for (std::size_t f = 0; f < folds; ++f) {
      os << ',';
      if (f < t.fold_val_rmse.size()) os << eval::format_number(t.fold_val_rmse[f]);
    }
    const bool ok = t.status == TrialStatus::kOk;
    os << ',' << (ok ? eval::format_number(t.mean_val_rmse) : "") << ','
       << (ok ? eval::format_number(t.mean_train_rmse) : "") << ',' << (ok ? eval::format_number(t.gap()) : "")
       << ',' << t.parameters << ',' << to_string(t.status) << '\n';
  }
  return os.str();
}

Json to_json(const TrialConfig& c) {
  return Json{{"layers", c.layers},         {"neurons", c.neurons},
              {"learning_rate", c.learning_rate}, {"dropout", c.dropout},
              {"batch_size", c.batch_size}, {"activation", nn::to_string(c.activation)}};
}

Json to_json(const TrialResult& t) {
  Json j{{"id", t.id},
         {"config", to_json(t.config)},
         {"seed", t.seed},
         {"fold_val_rmse", t.fold_val_rmse},
         {"fold_train_rmse", t.fold_train_rmse},
         {"mean_val_rmse", t.mean_val_rmse},
         {"mean_train_rmse", t.mean_train_rmse},
         {"parameters", t.parameters},
         {"status", to_string(t.status)}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

}  // namespace renewcast::hpo
