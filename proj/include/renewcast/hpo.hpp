#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "renewcast/eval.hpp"
#include "renewcast/models.hpp"

namespace renewcast::hpo {

struct SearchSpace {
  int min_layers = 2, max_layers = 5;
  int min_neurons = 32, max_neurons = 256;
  double min_learning_rate = 1e-4, max_learning_rate = 1e-2;  // sampled log-uniformly
  double min_dropout = 0.1, max_dropout = 0.5;
  std::vector<std::size_t> batch_sizes{32, 64, 128};
  std::vector<nn::Activation> activations{nn::Activation::kRelu, nn::Activation::kTanh, nn::Activation::kSigmoid};
};

struct TrialConfig {
  int layers = 2;
  int neurons = 64;  // first layer; later layers halve, floored at the space minimum
  double learning_rate = 1e-3;
  double dropout = 0.2;
  std::size_t batch_size = 64;
  nn::Activation activation = nn::Activation::kRelu;

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

TrialConfig sample(const SearchSpace& space, Rng& rng);
bool contains(const SearchSpace& space, const TrialConfig& config);
std::vector<int> layer_widths(const SearchSpace& space, const TrialConfig& config);

enum class TrialStatus { kOk, kDiverged };
const char* to_string(TrialStatus s) noexcept;

struct TrialResult {
  std::size_t id = 0;
  TrialConfig config;
  std::uint64_t seed = 0;
  std::vector<double> fold_val_rmse;
  std::vector<double> fold_train_rmse;
  double mean_val_rmse = 0.0;
  double mean_train_rmse = 0.0;
  std::size_t parameters = 0;
  TrialStatus status = TrialStatus::kOk;
  std::string error;

  double gap() const noexcept { return mean_val_rmse - mean_train_rmse; }
};

struct Evaluation {
  std::vector<double> fold_val_rmse;
  std::vector<double> fold_train_rmse;
  std::size_t parameters = 0;
};

// Trains and scores one configuration. Throwing DivergenceDetected (or
// returning non-finite scores) marks the trial diverged.
using Evaluator = std::function<Evaluation(const TrialConfig& config, std::uint64_t seed)>;

// Ascending mean validation RMSE, then smaller gap, then fewer parameters,
// then trial id; diverged trials last.
bool ranks_before(const TrialResult& a, const TrialResult& b);

TrialResult run_trial(std::size_t id, const TrialConfig& config, std::uint64_t seed, const Evaluator& evaluate);

struct SearchOptions {
  std::size_t budget = 20;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// Trial i samples from stream (seed, 1000 + i) and trains with (seed, i).
std::vector<TrialResult> random_search(const SearchSpace& space, const Evaluator& evaluate,
                                       const SearchOptions& options);

// Neighbors per numeric axis: lr x/÷ 2, neurons +/- 32, dropout +/- 0.1, all
// clamped into the space; categorical axes stay fixed.
std::vector<TrialConfig> neighborhood(const SearchSpace& space, const TrialConfig& center);

struct RefineResult {
  TrialResult best;
  std::vector<TrialResult> evaluated;  // center included
};

// Every neighbor trains with the incumbent's seed; the incumbent is kept
// unless a neighbor ranks strictly before it.
RefineResult grid_refine(const SearchSpace& space, const TrialResult& incumbent, const Evaluator& evaluate,
                         std::size_t jobs = 1);

// Search parameters applied to a family's default spec. Recurrent layers keep
// tanh; the sampled activation drives dense and conv layers.
models::ModelSpec apply_trial(const models::ModelSpec& base, const SearchSpace& space, const TrialConfig& config);

// Scores a trial on each prepared fold (one per ratio) with a short budget.
struct SweepEvaluatorOptions {
  std::size_t lookback = 24;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
};
Evaluator sweep_evaluator(const models::ModelSpec& base, const SearchSpace& space,
                          std::vector<eval::FoldData> folds, const SweepEvaluatorOptions& options = {});

std::string trials_csv(const std::vector<TrialResult>& trials);
Json to_json(const TrialConfig& config);
Json to_json(const TrialResult& trial);

}  // namespace renewcast::hpo
