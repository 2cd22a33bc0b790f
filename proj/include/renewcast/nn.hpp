#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "renewcast/rng.hpp"

namespace renewcast::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One B x features matrix per timestep.
using Seq = std::vector<Matrix>;

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;  // row-major

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape_);
  Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

  std::size_t size() const noexcept { return data.size(); }
  double& at(std::size_t i, std::size_t j, std::size_t k);
  double at(std::size_t i, std::size_t j, std::size_t k) const;
};

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };
const char* to_string(Activation a) noexcept;
Activation activation_from_string(const std::string& name);

void activate(Matrix& z, Activation a);
// Derivative expressed through the activated output y.
Matrix activation_grad(const Matrix& y, Activation a);

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  bool is_weight = true;  // biases are excluded from the L2 penalty
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Seq forward(const Seq& x, bool training, Rng& rng) = 0;
  // Accumulates parameter gradients and returns the input gradient.
  virtual Seq backward(const Seq& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  virtual bool recurrent() const { return false; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

// Applied to every timestep independently.
class Dense final : public Layer {
 public:
  Dense(std::size_t in, std::size_t out, Activation act, Rng& rng);
  std::string kind() const override { return "dense"; }
  Seq forward(const Seq& x, bool training, Rng& rng) override;
  Seq backward(const Seq& grad_out) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  Param& weight() { return w_; }  // in x out
  Param& bias() { return b_; }    // 1 x out

 private:
  Activation act_;
  Param w_, b_;
  Seq x_, y_;
};

// Full-sequence LSTM, zero initial state. Gate column blocks are i, f, g, o.
class Lstm final : public Layer {
 public:
  Lstm(std::size_t in, std::size_t hidden, Rng& rng);
  std::string kind() const override { return "lstm"; }
  Seq forward(const Seq& x, bool training, Rng& rng) override;
  Seq backward(const Seq& grad_out) override;
  std::vector<Param*> params() override { return {&wx_, &wh_, &b_}; }
  bool recurrent() const override { return true; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Lstm>(*this); }

  std::size_t hidden() const noexcept { return hidden_; }
  Param& input_weight() { return wx_; }      // in x 4H
  Param& recurrent_weight() { return wh_; }  // H x 4H
  Param& bias() { return b_; }               // 1 x 4H
  // Cell state after step t of the last forward pass.
  Matrix cell_state(std::size_t t) const;

 private:
  std::size_t hidden_;
  Param wx_, wh_, b_;
  // Steps stacked row-wise (step t occupies rows t*B .. t*B+B-1). h_ and c_
  // carry the zero initial state in their first B rows.
  std::size_t steps_ = 0;
  Eigen::Index batch_ = 0;
  RowMajorMatrix x_, h_, c_, tc_, gates_;  // gates_ holds activated i|f|g|o
};

// Valid cross-correlation with stride 1. The kernel is stored as
// (width * in_ch) x filters, row index k * in_ch + c.
class Conv1d final : public Layer {
 public:
  Conv1d(std::size_t in_ch, std::size_t filters, std::size_t width, Activation act, Rng& rng);
  std::string kind() const override { return "conv1d"; }
  Seq forward(const Seq& x, bool training, Rng& rng) override;
  Seq backward(const Seq& grad_out) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1d>(*this); }

  std::size_t width() const noexcept { return width_; }
  Param& kernel() { return w_; }
  Param& bias() { return b_; }

 private:
  std::size_t in_ch_, width_;
  Activation act_;
  Param w_, b_;
  Seq patches_, y_;
};

// Inverted dropout.
class Dropout final : public Layer {
 public:
  explicit Dropout(double rate);
  std::string kind() const override { return "dropout"; }
  Seq forward(const Seq& x, bool training, Rng& rng) override;
  Seq backward(const Seq& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }
  double rate() const noexcept { return rate_; }

 private:
  double rate_;
  Seq mask_;
};

class LastStep final : public Layer {
 public:
  std::string kind() const override { return "last_step"; }
  Seq forward(const Seq& x, bool training, Rng& rng) override;
  Seq backward(const Seq& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<LastStep>(*this); }

 private:
  std::size_t steps_ = 0;
};

class MeanPool final : public Layer {
 public:
  std::string kind() const override { return "mean_pool"; }
  Seq forward(const Seq& x, bool training, Rng& rng) override;
  Seq backward(const Seq& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MeanPool>(*this); }

 private:
  std::size_t steps_ = 0;
};

// Non-overlapping max over `pool` steps; a short tail is dropped.
class MaxPool final : public Layer {
 public:
  explicit MaxPool(std::size_t pool) : pool_(pool) {}
  std::string kind() const override { return "max_pool"; }
  Seq forward(const Seq& x, bool training, Rng& rng) override;
  Seq backward(const Seq& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool>(*this); }

 private:
  std::size_t pool_;
  std::size_t steps_ = 0;
  std::vector<Eigen::MatrixXi> argmax_;
};

// Concatenates all steps into one B x (T * f) step.
class Flatten final : public Layer {
 public:
  std::string kind() const override { return "flatten"; }
  Seq forward(const Seq& x, bool training, Rng& rng) override;
  Seq backward(const Seq& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  std::size_t steps_ = 0, features_ = 0;
};

class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  void add(std::unique_ptr<Layer> layer);
  Seq forward(const Seq& x, bool training, Rng& rng);
  Seq backward(const Seq& grad_out);

  std::vector<Param*> parameters();
  std::size_t parameter_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);
  void zero_grad();
  bool recurrent() const;
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// ---------------------------------------------------------------------------
// Loss and metrics

struct LossResult {
  double loss = 0.0;     // data MSE + penalty
  double mse = 0.0;      // data term only
  double penalty = 0.0;
  std::vector<double> grad;  // d loss / d y_pred
};

double l2_penalty(std::span<Param* const> params, double lambda);
// Also adds 2 * lambda * W to weight gradients.
LossResult mse_loss(std::span<const double> y_true, std::span<const double> y_pred, double l2_lambda,
                    std::span<Param* const> params);
double rmse(std::span<const double> y_true, std::span<const double> y_pred);
double mae(std::span<const double> y_true, std::span<const double> y_pred);

// ---------------------------------------------------------------------------
// Optimizers

enum class OptimizerKind { kAdam, kRmsprop };
const char* to_string(OptimizerKind k) noexcept;
OptimizerKind optimizer_from_string(const std::string& name);

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate);
  void step(std::span<Param* const> params);
  std::size_t steps() const noexcept { return t_; }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kRmsDecay = 0.9;
  static constexpr double kEps = 1e-8;

 private:
  OptimizerKind kind_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_, v_;
};

// Scales all gradients so their global L2 norm is at most max_norm.
double clip_global_norm(std::span<Param* const> params, double max_norm);

// ---------------------------------------------------------------------------
// Training

// Window i covers rows starts[i] .. starts[i] + lookback - 1 of `inputs` and
// predicts targets[i].
struct WindowSet {
  Matrix inputs;
  std::vector<double> targets;
  std::vector<std::size_t> starts;
  std::size_t lookback = 1;

  std::size_t size() const noexcept { return starts.size(); }
  std::size_t features() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
  Seq batch(std::span<const std::size_t> indices) const;
  Tensor materialize() const;  // n x L x d
  static WindowSet from_tensor(const Tensor& x, std::span<const double> y);
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double dropout_rate = 0.0;
  std::size_t batch_size = 64;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double l2_lambda = 0.0;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  std::size_t lookback = 24;
  double clip_norm = 5.0;  // applied to recurrent networks only

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_rmse = 0.0;
  double val_rmse = 0.0;
};

// Stops after `patience` epochs without a strict val-loss improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  // Returns true when training should stop after this epoch.
  bool update(std::size_t epoch, double val_loss);
  bool improved() const noexcept { return improved_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  std::size_t waited_ = 0;
  double best_ = 0.0;
  bool improved_ = false;
};

struct FitResult {
  std::vector<EpochMetrics> history;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;
};

FitResult fit(Network& model, const WindowSet& train, const WindowSet& val, const TrainConfig& config);

std::vector<double> predict(Network& model, const WindowSet& windows);
std::vector<double> predict(Network& model, const Tensor& windows);

}  // namespace renewcast::nn
