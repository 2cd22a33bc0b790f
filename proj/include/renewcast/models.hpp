#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "renewcast/features.hpp"
#include "renewcast/nn.hpp"
#include "renewcast/table.hpp"

namespace renewcast::models {

enum class Family {
  kLstm,
  kStackedLstm,
  kCnn,
  kCnnLstm,
  kDnn,
  kTimeDistributedMlp,
  kEncoderDecoder,
  kArima,
};

// Stable identifiers: lstm, stacked_lstm, cnn, cnn_lstm, dnn,
// time_distributed_mlp, encoder_decoder, arima.
const char* to_string(Family f) noexcept;
Family family_from_string(const std::string& name);
const char* display_name(Family f) noexcept;
const std::vector<Family>& neural_families();

inline constexpr double kDefaultL2Lambda = 1e-4;

struct ModelSpec {
  Family family = Family::kDnn;
  std::vector<int> conv_filters;    // cnn, cnn_lstm
  std::vector<int> layer_widths;    // dense / recurrent / encoder widths
  std::vector<int> decoder_widths;  // encoder_decoder
  // One per hidden layer in build order: conv, layer_widths, decoder.
  // Recurrent layers must say tanh.
  std::vector<nn::Activation> activations;
  std::size_t kernel_width = 3;
  std::size_t pool = 2;  // cnn only
  double learning_rate = 1e-3;
  double dropout = 0.0;
  std::size_t batch_size = 64;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;
  double l2_lambda = kDefaultL2Lambda;
  bool regularized = true;
  // arima
  int ar_order = 2;
  int diff_order = 1;
  int ma_order = 2;

  static ModelSpec defaults(Family family, bool regularized = true);

  void validate() const;
  double effective_dropout() const noexcept { return regularized ? dropout : 0.0; }
  double effective_l2() const noexcept { return regularized ? l2_lambda : 0.0; }
  // "DNN" or "Regularized DNN"; ARIMA has no variant.
  std::string label() const;
  // Token accepted by parse_model_token: "dnn" or "reg_dnn".
  std::string token() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// "dnn" -> unregularized DNN, "reg_dnn" -> regularized, "arima" -> ARIMA.
ModelSpec parse_model_token(const std::string& token);

struct WindowSpec {
  std::size_t lookback = 24;
  std::size_t features = 1;
};

nn::TrainConfig train_config(const ModelSpec& spec, std::size_t lookback, std::uint64_t seed,
                             std::size_t max_epochs = 100, std::size_t patience = 10);

// Every neural model maps (B, L, d) to (B, 1). Initial weights depend only on
// the architecture and seed, so the regularized and plain variants match.
nn::Network build_model(const ModelSpec& spec, const WindowSpec& window, std::uint64_t seed);

// Walk over the built parameter tensors.
std::size_t count_parameters(const nn::Network& model);
// Closed forms per layer, computed without building anything.
std::size_t closed_form_parameter_count(const ModelSpec& spec, const WindowSpec& window);
// Informational reference parameter ranges per family at L=24, d=13;
// nullopt for ARIMA.
std::optional<std::pair<std::size_t, std::size_t>> reference_parameter_range(Family f);

// ---------------------------------------------------------------------------
// Windows

// Windows lying entirely inside `rows`: rows.size() - lookback of them, the
// i-th reading rows.begin + i .. + lookback - 1 and predicting row
// rows.begin + i + lookback.
nn::WindowSet make_windows(const nn::Matrix& inputs, std::span<const double> target, std::size_t lookback,
                           features::RowRange rows);
// Table overload: every numeric column in table order, target included.
nn::WindowSet make_windows(const TimeSeriesTable& table, const WindowSpec& window, const std::string& target,
                           std::optional<features::RowRange> rows = std::nullopt);

// ---------------------------------------------------------------------------
// Checkpoints: "RCKP", u32 version, u64 json length, json, u64 count, f64 LE.

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelSpec spec;
  WindowSpec window;
  std::uint64_t seed = 0;
  nn::Network network;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// ARIMA

struct ArimaParams {
  int p = 0, d = 0, q = 0;
  std::vector<double> phi;
  std::vector<double> theta;
  double intercept = 0.0;  // only estimated when d = 0
  double css = 0.0;        // mean squared one-step error on the differenced training rows
  std::size_t iterations = 0;
};

struct ArimaOptions {
  double learning_rate = 0.01;
  std::size_t max_iterations = 3000;
  double tolerance = 1e-10;
};

struct ArimaForecast {
  ArimaParams params;
  std::vector<double> fitted;     // one-step predictions for rows [first_fitted, train_end)
  std::size_t first_fitted = 0;
  std::vector<double> forecasts;  // rolling one-step predictions for rows [train_end, n)
};

// Conditional sum of squares on the training rows [0, train_end), optimized
// with Adam; forecasts use the observed history.
ArimaForecast arima_fit_forecast(std::span<const double> series, int p, int d, int q, std::size_t train_end,
                                 const ArimaOptions& options = {});

// Grid over p, q in {0, 1, 2} at fixed d, scored on the rows after train_end.
ArimaForecast arima_select_orders(std::span<const double> series, int d, std::size_t train_end,
                                  const ArimaOptions& options = {});

}  // namespace renewcast::models
