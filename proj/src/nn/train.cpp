#include <algorithm>
#include <cmath>
#include <numeric>

#include "renewcast/error.hpp"
#include "renewcast/nn.hpp"

namespace renewcast::nn {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::string(who) + ": " + std::to_string(a.size()) + " vs " +
                                                std::to_string(b.size()));
  }
}

}  // namespace

double l2_penalty(std::span<Param* const> params, double lambda) {
  if (lambda == 0.0) return 0.0;
  double sum = 0.0;
  for (const Param* p : params) {
    if (p->is_weight) sum += p->value.squaredNorm();
  }
  return lambda * sum;
}

LossResult mse_loss(std::span<const double> y_true, std::span<const double> y_pred, double l2_lambda,
                    std::span<Param* const> params) {
  require_same_length(y_true, y_pred, "mse_loss");
  if (y_true.empty()) throw Error(ErrorCode::kLengthMismatch, "mse_loss: empty");
  LossResult r;
  const double n = static_cast<double>(y_true.size());
  r.grad.resize(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_true[i] - y_pred[i];
    r.mse += e * e;
    r.grad[i] = -2.0 * e / n;
  }
  r.mse /= n;
  r.penalty = l2_penalty(params, l2_lambda);
  r.loss = r.mse + r.penalty;
  if (l2_lambda != 0.0) {
    for (Param* p : params) {
      if (p->is_weight) p->grad += 2.0 * l2_lambda * p->value;
    }
  }
  return r;
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  require_same_length(y_true, y_pred, "rmse");
  if (y_true.empty()) throw Error(ErrorCode::kLengthMismatch, "rmse: empty");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  return std::sqrt(s / static_cast<double>(y_true.size()));
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
  require_same_length(y_true, y_pred, "mae");
  if (y_true.empty()) throw Error(ErrorCode::kLengthMismatch, "mae: empty");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += std::abs(y_true[i] - y_pred[i]);
  return s / static_cast<double>(y_true.size());
}

// ---------------------------------------------------------------------------

const char* to_string(OptimizerKind k) noexcept {
  return k == OptimizerKind::kAdam ? "adam" : "rmsprop";
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "rmsprop") return OptimizerKind::kRmsprop;
  throw Error(ErrorCode::kInvalidSpec, "unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {}

void Optimizer::step(std::span<Param* const> params) {
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  if (kind_ == OptimizerKind::kAdam) {
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Param& p = *params[k];
      m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * p.grad;
      v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * p.grad.cwiseAbs2();
      p.value.array() -= lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + kEps);
    }
  } else {
    for (std::size_t k = 0; k < params.size(); ++k) {
      Param& p = *params[k];
      v_[k] = kRmsDecay * v_[k] + (1.0 - kRmsDecay) * p.grad.cwiseAbs2();
      p.value.array() -= lr_ * p.grad.array() / (v_[k].array().sqrt() + kEps);
    }
  }
}

double clip_global_norm(std::span<Param* const> params, double max_norm) {
  double sq = 0.0;
  for (const Param* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (Param* p : params) p->grad *= s;
  }
  return norm;
}

// ---------------------------------------------------------------------------

Seq WindowSet::batch(std::span<const std::size_t> indices) const {
  const auto b = static_cast<Eigen::Index>(indices.size());
  Seq x(lookback, Matrix(b, inputs.cols()));
  for (Eigen::Index r = 0; r < b; ++r) {
    const std::size_t s = starts[static_cast<std::size_t>(indices[static_cast<std::size_t>(r)])];
    for (std::size_t t = 0; t < lookback; ++t) x[t].row(r) = inputs.row(static_cast<Eigen::Index>(s + t));
  }
  return x;
}

Tensor WindowSet::materialize() const {
  Tensor out({size(), lookback, features()});
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t t = 0; t < lookback; ++t) {
      for (std::size_t k = 0; k < features(); ++k) {
        out.at(i, t, k) = inputs(static_cast<Eigen::Index>(starts[i] + t), static_cast<Eigen::Index>(k));
      }
    }
  }
  return out;
}

WindowSet WindowSet::from_tensor(const Tensor& x, std::span<const double> y) {
  if (x.shape.size() != 3) throw Error(ErrorCode::kShapeMismatch, "expected an (n, L, d) tensor");
  const std::size_t n = x.shape[0], steps = x.shape[1], d = x.shape[2];
  if (!y.empty() && y.size() != n) throw Error(ErrorCode::kLengthMismatch, "targets vs windows");
  WindowSet w;
  w.lookback = steps;
  w.inputs.resize(static_cast<Eigen::Index>(n * steps), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    w.starts.push_back(i * steps);
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t k = 0; k < d; ++k) {
        w.inputs(static_cast<Eigen::Index>(i * steps + t), static_cast<Eigen::Index>(k)) = x.at(i, t, k);
      }
    }
  }
  w.targets.assign(y.begin(), y.end());
  if (w.targets.empty()) w.targets.assign(n, 0.0);
  return w;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidSpec, "learning_rate must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error(ErrorCode::kInvalidSpec, "dropout_rate");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidSpec, "batch_size");
  if (!(l2_lambda >= 0.0)) throw Error(ErrorCode::kInvalidSpec, "l2_lambda");
  if (max_epochs < 1) throw Error(ErrorCode::kInvalidSpec, "max_epochs");
  if (patience < 1) throw Error(ErrorCode::kInvalidSpec, "patience");
  if (lookback < 1) throw Error(ErrorCode::kInvalidSpec, "lookback");
}

bool EarlyStopping::update(std::size_t epoch, double val_loss) {
  improved_ = best_epoch_ == 0 || val_loss < best_;
  if (improved_) {
    best_ = val_loss;
    best_epoch_ = epoch;
    waited_ = 0;
    return false;
  }
  return ++waited_ >= patience_;
}

namespace {

std::vector<double> column(const Matrix& m) { return std::vector<double>(m.data(), m.data() + m.rows()); }

std::vector<double> predict_batched(Network& model, const WindowSet& windows) {
  constexpr std::size_t kChunk = 512;
  std::vector<double> out;
  out.reserve(windows.size());
  std::vector<std::size_t> idx;
  Rng unused(0);
  for (std::size_t begin = 0; begin < windows.size(); begin += kChunk) {
    const std::size_t end = std::min(windows.size(), begin + kChunk);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Seq y = model.forward(windows.batch(idx), false, unused);
    if (y.size() != 1 || y[0].cols() != 1) throw Error(ErrorCode::kShapeMismatch, "model output is not (B, 1)");
    const auto c = column(y[0]);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

}  // namespace

FitResult fit(Network& model, const WindowSet& train, const WindowSet& val, const TrainConfig& config) {
  config.validate();
  if (train.size() == 0 || val.size() == 0) throw Error(ErrorCode::kTooFewSamples, "empty train or validation windows");
  if (train.features() != val.features() || train.lookback != val.lookback) {
    throw Error(ErrorCode::kShapeMismatch, "train and validation windows differ in shape");
  }
  Rng shuffle_rng(derive_seed(config.seed, 11));
  Rng dropout_rng(derive_seed(config.seed, 12));
  Optimizer optimizer(config.optimizer, config.learning_rate);
  EarlyStopping stopper(config.patience);
  const bool clip = model.recurrent() && config.clip_norm > 0.0;
  std::vector<Param*> params = model.parameters();

  FitResult result;
  std::vector<double> best = model.flat_parameters();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> y_batch;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(shuffle_rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    double sum_mse = 0.0, sum_penalty = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      y_batch.resize(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) y_batch[k] = train.targets[idx[k]];
      model.zero_grad();
      const Seq out = model.forward(train.batch(idx), true, dropout_rng);
      if (out.size() != 1 || out[0].cols() != 1) throw Error(ErrorCode::kShapeMismatch, "model output is not (B, 1)");
      const auto pred = column(out[0]);
      const LossResult loss = mse_loss(y_batch, pred, config.l2_lambda, params);
      if (!std::isfinite(loss.loss)) {
        throw Error(ErrorCode::kDivergenceDetected, "non-finite loss at epoch " + std::to_string(epoch));
      }
      model.backward(Seq{Eigen::Map<const Matrix>(loss.grad.data(), static_cast<Eigen::Index>(loss.grad.size()), 1)});
      if (clip) clip_global_norm(params, config.clip_norm);
      optimizer.step(params);
      sum_mse += loss.mse * static_cast<double>(idx.size());
      sum_penalty += loss.penalty * static_cast<double>(idx.size());
    }
    EpochMetrics m;
    m.epoch = epoch;
    const double n = static_cast<double>(train.size());
    m.train_rmse = std::sqrt(sum_mse / n);
    m.train_loss = sum_mse / n + sum_penalty / n;
    const auto val_pred = predict_batched(model, val);
    const double val_rmse = rmse(val.targets, val_pred);
    m.val_rmse = val_rmse;
    m.val_loss = val_rmse * val_rmse + l2_penalty(params, config.l2_lambda);
    if (!std::isfinite(m.val_loss)) {
      throw Error(ErrorCode::kDivergenceDetected, "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back(m);
    result.stopped_epoch = epoch;
    const bool stop = stopper.update(epoch, m.val_loss);
    if (stopper.improved()) best = model.flat_parameters();
    if (stop) break;
  }
  result.best_epoch = stopper.best_epoch();
  model.set_flat_parameters(best);
  return result;
}

std::vector<double> predict(Network& model, const WindowSet& windows) { return predict_batched(model, windows); }

std::vector<double> predict(Network& model, const Tensor& windows) {
  return predict_batched(model, WindowSet::from_tensor(windows, {}));
}

}  // namespace renewcast::nn
