#include "renewcast/models.hpp"

#include <algorithm>
#include <array>

#include "renewcast/error.hpp"

namespace renewcast::models {

namespace {

using nn::Activation;

struct FamilyInfo {
  Family family;
  const char* id;
  const char* display;
};

constexpr std::array<FamilyInfo, 8> kFamilies = {{
    {Family::kLstm, "lstm", "LSTM"},
    {Family::kStackedLstm, "stacked_lstm", "Stacked LSTM"},
    {Family::kCnn, "cnn", "CNN"},
    {Family::kCnnLstm, "cnn_lstm", "CNN-LSTM"},
    {Family::kDnn, "dnn", "DNN"},
    {Family::kTimeDistributedMlp, "time_distributed_mlp", "Time-Distributed MLP"},
    {Family::kEncoderDecoder, "encoder_decoder", "Encoder-Decoder"},
    {Family::kArima, "arima", "ARIMA"},
}};

std::vector<Activation> repeat(Activation a, std::size_t n) { return std::vector<Activation>(n, a); }

bool is_recurrent_family(Family f) {
  return f == Family::kLstm || f == Family::kStackedLstm || f == Family::kEncoderDecoder;
}

void invalid(const std::string& what) { throw Error(ErrorCode::kInvalidSpec, what); }

}  // namespace

const char* to_string(Family f) noexcept {
  for (const auto& info : kFamilies) {
    if (info.family == f) return info.id;
  }
  return "?";
}

const char* display_name(Family f) noexcept {
  for (const auto& info : kFamilies) {
    if (info.family == f) return info.display;
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  for (const auto& info : kFamilies) {
    if (name == info.id) return info.family;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown model family '" + name + "'");
}

const std::vector<Family>& neural_families() {
  static const std::vector<Family> all = {Family::kLstm,   Family::kStackedLstm,         Family::kCnn,
                                          Family::kCnnLstm, Family::kDnn, Family::kTimeDistributedMlp,
                                          Family::kEncoderDecoder};
  return all;
}

ModelSpec ModelSpec::defaults(Family family, bool regularized) {
  ModelSpec s;
  s.family = family;
  s.regularized = family != Family::kArima && regularized;
  switch (family) {
    case Family::kLstm:
      s.layer_widths = {64, 64, 32};
      s.activations = repeat(Activation::kTanh, 3);
      s.dropout = 0.3;
      break;
    case Family::kStackedLstm:
      s.layer_widths = {128, 128, 64, 32};
      s.activations = repeat(Activation::kTanh, 4);
      s.dropout = 0.3;
      break;
    case Family::kCnn:
      s.conv_filters = {64, 128};
      s.layer_widths = {64};
      s.activations = repeat(Activation::kRelu, 3);
      s.learning_rate = 5e-4;
      s.dropout = 0.25;
      s.batch_size = 32;
      break;
    case Family::kCnnLstm:
      s.conv_filters = {64, 128};
      s.layer_widths = {64, 64};
      s.activations = {Activation::kRelu, Activation::kRelu, Activation::kTanh, Activation::kTanh};
      s.dropout = 0.3;
      break;
    case Family::kDnn:
      s.layer_widths = {256, 128, 64, 32};
      s.activations = repeat(Activation::kRelu, 4);
      s.dropout = 0.4;
      s.batch_size = 128;
      break;
    case Family::kTimeDistributedMlp:
      s.layer_widths = {128, 64, 32};
      s.activations = repeat(Activation::kRelu, 3);
      s.learning_rate = 5e-4;
      s.dropout = 0.2;
      s.optimizer = nn::OptimizerKind::kRmsprop;
      break;
    case Family::kEncoderDecoder:
      s.layer_widths = {128, 128};
      s.decoder_widths = {64, 64};
      s.activations = repeat(Activation::kTanh, 4);
      s.learning_rate = 5e-4;
      s.dropout = 0.3;
      break;
    case Family::kArima:
      s.l2_lambda = 0.0;
      break;
  }
  return s;
}

void ModelSpec::validate() const {
  if (family == Family::kArima) {
    if (ar_order < 0 || ar_order > 5 || ma_order < 0 || ma_order > 5 || diff_order < 0 || diff_order > 2) {
      invalid("arima orders out of range");
    }
    return;
  }
  auto positive = [](const std::vector<int>& v) { return std::all_of(v.begin(), v.end(), [](int x) { return x > 0; }); };
  if (!positive(conv_filters) || !positive(layer_widths) || !positive(decoder_widths)) invalid("widths must be positive");
  if (layer_widths.empty()) invalid("layer_widths is empty");
  const bool conv = family == Family::kCnn || family == Family::kCnnLstm;
  if (conv != !conv_filters.empty()) invalid(std::string("conv_filters do not fit family ") + to_string(family));
  if ((family == Family::kEncoderDecoder) == decoder_widths.empty()) {
    invalid(std::string("decoder_widths do not fit family ") + to_string(family));
  }
  if (activations.size() != conv_filters.size() + layer_widths.size() + decoder_widths.size()) {
    invalid("activations must list one entry per hidden layer");
  }
  const bool recurrent_widths = is_recurrent_family(family) || family == Family::kCnnLstm;
  if (recurrent_widths) {
    for (std::size_t i = conv_filters.size(); i < activations.size(); ++i) {
      if (activations[i] != Activation::kTanh) invalid("recurrent layers use tanh");
    }
  }
  if (conv && kernel_width < 1) invalid("kernel_width");
  if (family == Family::kCnn && pool < 1) invalid("pool");
  if (!(learning_rate > 0.0)) invalid("learning_rate");
  if (!(dropout >= 0.0 && dropout < 1.0)) invalid("dropout");
  if (batch_size < 1) invalid("batch_size");
  if (!(l2_lambda >= 0.0)) invalid("l2_lambda");
}

std::string ModelSpec::label() const {
  std::string base = display_name(family);
  return regularized && family != Family::kArima ? "Regularized " + base : base;
}

std::string ModelSpec::token() const {
  std::string base = to_string(family);
  return regularized && family != Family::kArima ? "reg_" + base : base;
}

ModelSpec parse_model_token(const std::string& token) {
  const bool reg = token.rfind("reg_", 0) == 0;
  const Family f = family_from_string(reg ? token.substr(4) : token);
  if (reg && f == Family::kArima) throw Error(ErrorCode::kInvalidSpec, "arima has no regularized variant");
  return ModelSpec::defaults(f, reg);
}

nn::TrainConfig train_config(const ModelSpec& spec, std::size_t lookback, std::uint64_t seed, std::size_t max_epochs,
                             std::size_t patience) {
  nn::TrainConfig c;
  c.learning_rate = spec.learning_rate;
  c.dropout_rate = spec.effective_dropout();
  c.batch_size = spec.batch_size;
  c.optimizer = spec.optimizer;
  c.l2_lambda = spec.effective_l2();
  c.max_epochs = max_epochs;
  c.patience = patience;
  c.seed = seed;
  c.lookback = lookback;
  return c;
}

// ---------------------------------------------------------------------------
// Construction. build_model and closed_form_parameter_count follow the same
// layer order but share no code.

nn::Network build_model(const ModelSpec& spec, const WindowSpec& window, std::uint64_t seed) {
  spec.validate();
  if (spec.family == Family::kArima) throw Error(ErrorCode::kInvalidSpec, "arima is not a neural family");
  if (window.lookback < 1 || window.features < 1) throw Error(ErrorCode::kInvalidSpec, "empty window");
  Rng rng(derive_seed(seed, 0));
  const double rate = spec.effective_dropout();
  nn::Network net;
  std::size_t dim = window.features;
  std::size_t steps = window.lookback;
  std::size_t a = 0;

  auto dense = [&](std::size_t width) {
    net.add(std::make_unique<nn::Dense>(dim, width, spec.activations[a++], rng));
    net.add(std::make_unique<nn::Dropout>(rate));
    dim = width;
  };
  auto lstm = [&](std::size_t width) {
    net.add(std::make_unique<nn::Lstm>(dim, width, rng));
    net.add(std::make_unique<nn::Dropout>(rate));
    ++a;
    dim = width;
  };
  auto conv = [&](std::size_t filters) {
    if (steps < spec.kernel_width) throw Error(ErrorCode::kInvalidSpec, "lookback too short for the conv stack");
    net.add(std::make_unique<nn::Conv1d>(dim, filters, spec.kernel_width, spec.activations[a++], rng));
    dim = filters;
    steps -= spec.kernel_width - 1;
  };

  switch (spec.family) {
    case Family::kDnn:
      net.add(std::make_unique<nn::LastStep>());
      for (int w : spec.layer_widths) dense(static_cast<std::size_t>(w));
      break;
    case Family::kLstm:
    case Family::kStackedLstm:
      for (int w : spec.layer_widths) lstm(static_cast<std::size_t>(w));
      net.add(std::make_unique<nn::LastStep>());
      break;
    case Family::kCnn:
      for (int f : spec.conv_filters) conv(static_cast<std::size_t>(f));
      if (steps < spec.pool) throw Error(ErrorCode::kInvalidSpec, "lookback too short for pooling");
      net.add(std::make_unique<nn::MaxPool>(spec.pool));
      steps /= spec.pool;
      net.add(std::make_unique<nn::Flatten>());
      net.add(std::make_unique<nn::Dropout>(rate));
      dim *= steps;
      for (int w : spec.layer_widths) dense(static_cast<std::size_t>(w));
      break;
    case Family::kCnnLstm:
      for (int f : spec.conv_filters) conv(static_cast<std::size_t>(f));
      for (int w : spec.layer_widths) lstm(static_cast<std::size_t>(w));
      net.add(std::make_unique<nn::LastStep>());
      break;
    case Family::kTimeDistributedMlp:
      for (int w : spec.layer_widths) dense(static_cast<std::size_t>(w));
      net.add(std::make_unique<nn::MeanPool>());
      break;
    case Family::kEncoderDecoder:
      for (int w : spec.layer_widths) lstm(static_cast<std::size_t>(w));
      net.add(std::make_unique<nn::LastStep>());
      for (int w : spec.decoder_widths) lstm(static_cast<std::size_t>(w));
      break;
    case Family::kArima:
      break;
  }
  net.add(std::make_unique<nn::Dense>(dim, 1, Activation::kIdentity, rng));
  return net;
}

std::size_t count_parameters(const nn::Network& model) {
  std::size_t n = 0;
  for (const auto& layer : model.layers()) {
    for (const nn::Param* p : layer->params()) n += static_cast<std::size_t>(p->value.rows() * p->value.cols());
  }
  return n;
}

std::size_t closed_form_parameter_count(const ModelSpec& spec, const WindowSpec& window) {
  spec.validate();
  if (spec.family == Family::kArima) {
    return static_cast<std::size_t>(spec.ar_order + spec.ma_order + (spec.diff_order == 0 ? 1 : 0));
  }
  auto dense = [](std::size_t in, std::size_t out) { return out * (in + 1); };
  auto lstm = [](std::size_t in, std::size_t h) { return 4 * h * (in + h + 1); };
  auto conv = [](std::size_t in_ch, std::size_t filters, std::size_t width) { return filters * (in_ch * width + 1); };

  std::size_t total = 0, dim = window.features, steps = window.lookback;
  for (int f : spec.conv_filters) {
    total += conv(dim, static_cast<std::size_t>(f), spec.kernel_width);
    dim = static_cast<std::size_t>(f);
    steps -= spec.kernel_width - 1;
  }
  if (spec.family == Family::kCnn) dim *= steps / spec.pool;
  const bool recurrent = spec.family != Family::kCnn && spec.family != Family::kDnn &&
                         spec.family != Family::kTimeDistributedMlp;
  for (int w : spec.layer_widths) {
    total += recurrent ? lstm(dim, static_cast<std::size_t>(w)) : dense(dim, static_cast<std::size_t>(w));
    dim = static_cast<std::size_t>(w);
  }
  for (int w : spec.decoder_widths) {
    total += lstm(dim, static_cast<std::size_t>(w));
    dim = static_cast<std::size_t>(w);
  }
  return total + dense(dim, 1);
}

std::optional<std::pair<std::size_t, std::size_t>> reference_parameter_range(Family f) {
  switch (f) {
    case Family::kLstm: return std::pair<std::size_t, std::size_t>{100'000, 150'000};
    case Family::kStackedLstm: return std::pair<std::size_t, std::size_t>{400'000, 600'000};
    case Family::kCnn: return std::pair<std::size_t, std::size_t>{50'000, 150'000};
    case Family::kCnnLstm: return std::pair<std::size_t, std::size_t>{300'000, 500'000};
    case Family::kDnn: return std::pair<std::size_t, std::size_t>{300'000, 450'000};
    case Family::kTimeDistributedMlp: return std::pair<std::size_t, std::size_t>{150'000, 250'000};
    case Family::kEncoderDecoder: return std::pair<std::size_t, std::size_t>{400'000, 600'000};
    case Family::kArima: return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Windows

nn::WindowSet make_windows(const nn::Matrix& inputs, std::span<const double> target, std::size_t lookback,
                           features::RowRange rows) {
  if (lookback < 1) throw Error(ErrorCode::kInvalidArgument, "lookback must be at least 1");
  if (static_cast<std::size_t>(inputs.rows()) != target.size()) {
    throw Error(ErrorCode::kLengthMismatch, "inputs and target rows differ");
  }
  if (rows.end > target.size()) throw Error(ErrorCode::kInvalidArgument, "row range exceeds data");
  if (rows.size() <= lookback) {
    throw Error(ErrorCode::kTooShort, std::to_string(rows.size()) + " rows for lookback " + std::to_string(lookback));
  }
  nn::WindowSet w;
  w.lookback = lookback;
  w.inputs = inputs.middleRows(static_cast<Eigen::Index>(rows.begin), static_cast<Eigen::Index>(rows.size()));
  const std::size_t count = rows.size() - lookback;
  w.starts.resize(count);
  w.targets.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    w.starts[i] = i;
    w.targets[i] = target[rows.begin + i + lookback];
  }
  return w;
}

nn::WindowSet make_windows(const TimeSeriesTable& table, const WindowSpec& window, const std::string& target,
                           std::optional<features::RowRange> rows) {
  std::vector<std::string> names;
  for (const auto& c : table.columns()) {
    if (c.is_numeric() && (c.meta.kind == ColumnKind::kContinuous || c.meta.kind == ColumnKind::kTarget)) {
      names.push_back(c.meta.name);
    }
  }
  if (std::find(names.begin(), names.end(), target) == names.end()) throw Error(ErrorCode::kMissingColumn, target);
  if (window.features != 0 && window.features != names.size()) {
    throw Error(ErrorCode::kShapeMismatch, "window feature count differs from table columns");
  }
  nn::Matrix inputs(static_cast<Eigen::Index>(table.n_rows()), static_cast<Eigen::Index>(names.size()));
  std::vector<double> y;
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto values = table.dense(names[j]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i];
    }
    if (names[j] == target) y = values;
  }
  return make_windows(inputs, y, window.lookback, rows.value_or(features::RowRange{0, table.n_rows()}));
}

}  // namespace renewcast::models
