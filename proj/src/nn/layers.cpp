#include <algorithm>
#include <cmath>
#include <numeric>

#include "renewcast/error.hpp"
#include "renewcast/nn.hpp"

namespace renewcast::nn {

namespace {

void fill_uniform(Matrix& m, double limit, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
  }
}

Param make_param(std::string name, Eigen::Index rows, Eigen::Index cols, bool is_weight) {
  return Param{std::move(name), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), is_weight};
}

void require_steps(const Seq& x, const char* who) {
  if (x.empty()) throw Error(ErrorCode::kShapeMismatch, std::string(who) + ": empty sequence");
}

void require_cols(const Matrix& m, Eigen::Index cols, const char* who) {
  if (m.cols() != cols) {
    throw Error(ErrorCode::kShapeMismatch, std::string(who) + ": expected " + std::to_string(cols) +
                                               " features, got " + std::to_string(m.cols()));
  }
}

Matrix sigmoid(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

}  // namespace

// ---------------------------------------------------------------------------

Tensor::Tensor(std::vector<std::size_t> shape_) : shape(std::move(shape_)) {
  data.assign(std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>()), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  if (n != data.size()) throw Error(ErrorCode::kShapeMismatch, "tensor data does not match shape");
}

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
  return data[(i * shape[1] + j) * shape[2] + k];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  return data[(i * shape[1] + j) * shape[2] + k];
}

const char* to_string(Activation a) noexcept {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw Error(ErrorCode::kInvalidSpec, "unknown activation '" + name + "'");
}

void activate(Matrix& z, Activation a) {
  switch (a) {
    case Activation::kIdentity: break;
    case Activation::kRelu: z = z.cwiseMax(0.0); break;
    case Activation::kTanh: z = z.array().tanh().matrix(); break;
    case Activation::kSigmoid: z = sigmoid(z); break;
  }
}

Matrix activation_grad(const Matrix& y, Activation a) {
  switch (a) {
    case Activation::kIdentity: return Matrix::Ones(y.rows(), y.cols());
    case Activation::kRelu: return (y.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh: return (1.0 - y.array().square()).matrix();
    case Activation::kSigmoid: return (y.array() * (1.0 - y.array())).matrix();
  }
  return y;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::size_t in, std::size_t out, Activation act, Rng& rng)
    : act_(act),
      w_(make_param("W", static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out), true)),
      b_(make_param("b", 1, static_cast<Eigen::Index>(out), false)) {
  fill_uniform(w_.value, std::sqrt(6.0 / static_cast<double>(in + out)), rng);
}

Seq Dense::forward(const Seq& x, bool, Rng&) {
  require_steps(x, "dense");
  x_ = x;
  y_.resize(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    require_cols(x[t], w_.value.rows(), "dense");
    Matrix z = x[t] * w_.value;
    z.rowwise() += b_.value.row(0);
    activate(z, act_);
    y_[t] = std::move(z);
  }
  return y_;
}

Seq Dense::backward(const Seq& grad_out) {
  Seq dx(grad_out.size());
  for (std::size_t t = 0; t < grad_out.size(); ++t) {
    const Matrix dz = grad_out[t].cwiseProduct(activation_grad(y_[t], act_));
    w_.grad.noalias() += x_[t].transpose() * dz;
    b_.grad += dz.colwise().sum();
    dx[t].noalias() = dz * w_.value.transpose();
  }
  return dx;
}

// ---------------------------------------------------------------------------
// LSTM

Lstm::Lstm(std::size_t in, std::size_t hidden, Rng& rng)
    : hidden_(hidden),
      wx_(make_param("Wx", static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(4 * hidden), true)),
      wh_(make_param("Wh", static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(4 * hidden), true)),
      b_(make_param("b", 1, static_cast<Eigen::Index>(4 * hidden), false)) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(in + hidden));
  fill_uniform(wx_.value, limit, rng);
  fill_uniform(wh_.value, limit, rng);
  const auto h = static_cast<Eigen::Index>(hidden);
  b_.value.block(0, h, 1, h).setOnes();  // forget gate
}

Matrix Lstm::cell_state(std::size_t t) const {
  return c_.middleRows(static_cast<Eigen::Index>(t + 1) * batch_, batch_);
}

Seq Lstm::forward(const Seq& x, bool, Rng&) {
  require_steps(x, "lstm");
  const auto h = static_cast<Eigen::Index>(hidden_);
  const Eigen::Index b = x[0].rows();
  steps_ = x.size();
  batch_ = b;
  const auto T = static_cast<Eigen::Index>(steps_);
  x_.resize(T * b, wx_.value.rows());
  for (std::size_t t = 0; t < steps_; ++t) {
    require_cols(x[t], wx_.value.rows(), "lstm");
    x_.middleRows(static_cast<Eigen::Index>(t) * b, b) = x[t];
  }
  // Input projections for every step in one product.
  gates_.noalias() = x_ * wx_.value;
  gates_.rowwise() += b_.value.row(0);
  h_.setZero((T + 1) * b, h);
  c_.setZero((T + 1) * b, h);
  tc_.resize(T * b, h);
  Seq out(steps_);
  for (Eigen::Index t = 0; t < T; ++t) {
    auto z = gates_.middleRows(t * b, b);
    z.noalias() += h_.middleRows(t * b, b) * wh_.value;
    z.leftCols(2 * h) = sigmoid(z.leftCols(2 * h));
    z.middleCols(2 * h, h) = z.middleCols(2 * h, h).array().tanh().matrix();
    z.rightCols(h) = sigmoid(z.rightCols(h));
    c_.middleRows((t + 1) * b, b) =
        z.middleCols(h, h).cwiseProduct(c_.middleRows(t * b, b)) + z.leftCols(h).cwiseProduct(z.middleCols(2 * h, h));
    tc_.middleRows(t * b, b) = c_.middleRows((t + 1) * b, b).array().tanh().matrix();
    h_.middleRows((t + 1) * b, b) = z.rightCols(h).cwiseProduct(tc_.middleRows(t * b, b));
    out[static_cast<std::size_t>(t)] = h_.middleRows((t + 1) * b, b);
  }
  return out;
}

Seq Lstm::backward(const Seq& grad_out) {
  const auto h = static_cast<Eigen::Index>(hidden_);
  const Eigen::Index b = batch_;
  const auto T = static_cast<Eigen::Index>(steps_);
  RowMajorMatrix dz_all(T * b, 4 * h);
  Matrix dh_next = Matrix::Zero(b, h);
  Matrix dc_next = Matrix::Zero(b, h);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto g = gates_.middleRows(t * b, b);
    const auto i = g.leftCols(h).array();
    const auto f = g.middleCols(h, h).array();
    const auto cand = g.middleCols(2 * h, h).array();
    const auto o = g.rightCols(h).array();
    const Eigen::ArrayXXd dh = (grad_out[static_cast<std::size_t>(t)] + dh_next).array();
    const auto tc = tc_.middleRows(t * b, b).array();
    const Eigen::ArrayXXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();
    auto dz = dz_all.middleRows(t * b, b);
    dz.leftCols(h) = (dc * cand * i * (1.0 - i)).matrix();
    dz.middleCols(h, h) = (dc * c_.middleRows(t * b, b).array() * f * (1.0 - f)).matrix();
    dz.middleCols(2 * h, h) = (dc * i * (1.0 - cand.square())).matrix();
    dz.rightCols(h) = (dh * tc * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();
    dh_next.noalias() = dz * wh_.value.transpose();
  }
  wx_.grad.noalias() += x_.transpose() * dz_all;
  wh_.grad.noalias() += h_.topRows(T * b).transpose() * dz_all;
  b_.grad += dz_all.colwise().sum();
  const RowMajorMatrix dx_all = dz_all * wx_.value.transpose();
  Seq dx(steps_);
  for (Eigen::Index t = 0; t < T; ++t) dx[static_cast<std::size_t>(t)] = dx_all.middleRows(t * b, b);
  return dx;
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(std::size_t in_ch, std::size_t filters, std::size_t width, Activation act, Rng& rng)
    : in_ch_(in_ch),
      width_(width),
      act_(act),
      w_(make_param("K", static_cast<Eigen::Index>(in_ch * width), static_cast<Eigen::Index>(filters), true)),
      b_(make_param("b", 1, static_cast<Eigen::Index>(filters), false)) {
  if (width == 0) throw Error(ErrorCode::kInvalidSpec, "conv width must be positive");
  fill_uniform(w_.value, std::sqrt(6.0 / static_cast<double>((in_ch + filters) * width)), rng);
}

Seq Conv1d::forward(const Seq& x, bool, Rng&) {
  if (x.size() < width_) {
    throw Error(ErrorCode::kSequenceTooShort,
                "sequence of " + std::to_string(x.size()) + " steps, kernel width " + std::to_string(width_));
  }
  const std::size_t out_steps = x.size() - width_ + 1;
  const auto in = static_cast<Eigen::Index>(in_ch_);
  const Eigen::Index batch = x[0].rows();
  patches_.assign(out_steps, Matrix());
  y_.assign(out_steps, Matrix());
  for (std::size_t t = 0; t < out_steps; ++t) {
    Matrix patch(batch, in * static_cast<Eigen::Index>(width_));
    for (std::size_t k = 0; k < width_; ++k) {
      require_cols(x[t + k], in, "conv1d");
      patch.middleCols(static_cast<Eigen::Index>(k) * in, in) = x[t + k];
    }
    Matrix z = patch * w_.value;
    z.rowwise() += b_.value.row(0);
    activate(z, act_);
    y_[t] = std::move(z);
    patches_[t] = std::move(patch);
  }
  return y_;
}

Seq Conv1d::backward(const Seq& grad_out) {
  const std::size_t out_steps = grad_out.size();
  const auto in = static_cast<Eigen::Index>(in_ch_);
  const Eigen::Index batch = grad_out[0].rows();
  Seq dx(out_steps + width_ - 1, Matrix::Zero(batch, in));
  for (std::size_t t = 0; t < out_steps; ++t) {
    const Matrix dz = grad_out[t].cwiseProduct(activation_grad(y_[t], act_));
    w_.grad.noalias() += patches_[t].transpose() * dz;
    b_.grad += dz.colwise().sum();
    const Matrix dpatch = dz * w_.value.transpose();
    for (std::size_t k = 0; k < width_; ++k) {
      dx[t + k] += dpatch.middleCols(static_cast<Eigen::Index>(k) * in, in);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Shape-only layers

Dropout::Dropout(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::kInvalidSpec, "dropout rate must be in [0, 1)");
}

Seq Dropout::forward(const Seq& x, bool training, Rng& rng) {
  if (!training || rate_ == 0.0) {
    mask_.clear();
    return x;
  }
  const double keep_scale = 1.0 / (1.0 - rate_);
  mask_.assign(x.size(), Matrix());
  Seq y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    Matrix m(x[t].rows(), x[t].cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = uniform01(rng) < rate_ ? 0.0 : keep_scale;
    }
    y[t] = x[t].cwiseProduct(m);
    mask_[t] = std::move(m);
  }
  return y;
}

Seq Dropout::backward(const Seq& grad_out) {
  if (mask_.empty()) return grad_out;
  Seq dx(grad_out.size());
  for (std::size_t t = 0; t < grad_out.size(); ++t) dx[t] = grad_out[t].cwiseProduct(mask_[t]);
  return dx;
}

Seq LastStep::forward(const Seq& x, bool, Rng&) {
  require_steps(x, "last_step");
  steps_ = x.size();
  return Seq{x.back()};
}

Seq LastStep::backward(const Seq& grad_out) {
  Seq dx(steps_, Matrix::Zero(grad_out[0].rows(), grad_out[0].cols()));
  dx.back() = grad_out[0];
  return dx;
}

Seq MeanPool::forward(const Seq& x, bool, Rng&) {
  require_steps(x, "mean_pool");
  steps_ = x.size();
  Matrix sum = x[0];
  for (std::size_t t = 1; t < x.size(); ++t) sum += x[t];
  return Seq{sum / static_cast<double>(steps_)};
}

Seq MeanPool::backward(const Seq& grad_out) {
  return Seq(steps_, grad_out[0] / static_cast<double>(steps_));
}

Seq MaxPool::forward(const Seq& x, bool, Rng&) {
  if (x.size() < pool_) throw Error(ErrorCode::kSequenceTooShort, "max_pool");
  steps_ = x.size();
  const std::size_t out_steps = x.size() / pool_;
  Seq y(out_steps);
  argmax_.assign(out_steps, Eigen::MatrixXi());
  for (std::size_t t = 0; t < out_steps; ++t) {
    Matrix best = x[t * pool_];
    Eigen::MatrixXi arg = Eigen::MatrixXi::Zero(best.rows(), best.cols());
    for (std::size_t k = 1; k < pool_; ++k) {
      const Matrix& cand = x[t * pool_ + k];
      for (Eigen::Index j = 0; j < best.cols(); ++j) {
        for (Eigen::Index i = 0; i < best.rows(); ++i) {
          if (cand(i, j) > best(i, j)) {
            best(i, j) = cand(i, j);
            arg(i, j) = static_cast<int>(k);
          }
        }
      }
    }
    y[t] = std::move(best);
    argmax_[t] = std::move(arg);
  }
  return y;
}

Seq MaxPool::backward(const Seq& grad_out) {
  Seq dx(steps_, Matrix::Zero(grad_out[0].rows(), grad_out[0].cols()));
  for (std::size_t t = 0; t < grad_out.size(); ++t) {
    for (Eigen::Index j = 0; j < grad_out[t].cols(); ++j) {
      for (Eigen::Index i = 0; i < grad_out[t].rows(); ++i) {
        dx[t * pool_ + static_cast<std::size_t>(argmax_[t](i, j))](i, j) += grad_out[t](i, j);
      }
    }
  }
  return dx;
}

Seq Flatten::forward(const Seq& x, bool, Rng&) {
  require_steps(x, "flatten");
  steps_ = x.size();
  features_ = static_cast<std::size_t>(x[0].cols());
  const auto f = static_cast<Eigen::Index>(features_);
  Matrix y(x[0].rows(), f * static_cast<Eigen::Index>(steps_));
  for (std::size_t t = 0; t < steps_; ++t) y.middleCols(static_cast<Eigen::Index>(t) * f, f) = x[t];
  return Seq{std::move(y)};
}

Seq Flatten::backward(const Seq& grad_out) {
  const auto f = static_cast<Eigen::Index>(features_);
  Seq dx(steps_);
  for (std::size_t t = 0; t < steps_; ++t) dx[t] = grad_out[0].middleCols(static_cast<Eigen::Index>(t) * f, f);
  return dx;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(const Network& other) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    layers_.clear();
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
  }
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

Seq Network::forward(const Seq& x, bool training, Rng& rng) {
  Seq out = x;
  for (auto& l : layers_) out = l->forward(out, training, rng);
  return out;
}

Seq Network::backward(const Seq& grad_out) {
  Seq g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<Param*> Network::parameters() {
  std::vector<Param*> out;
  for (auto& l : layers_) {
    for (Param* p : l->params()) out.push_back(p);
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (Param* p : const_cast<Network*>(this)->parameters()) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> out;
  for (Param* p : const_cast<Network*>(this)->parameters()) {
    out.insert(out.end(), p->value.data(), p->value.data() + p->value.size());
  }
  return out;
}

void Network::set_flat_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw Error(ErrorCode::kShapeMismatch, "parameter vector length");
  std::size_t offset = 0;
  for (Param* p : parameters()) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), p->value.size(), p->value.data());
    offset += static_cast<std::size_t>(p->value.size());
  }
}

void Network::zero_grad() {
  for (Param* p : parameters()) p->grad.setZero();
}

bool Network::recurrent() const {
  return std::any_of(layers_.begin(), layers_.end(), [](const auto& l) { return l->recurrent(); });
}

}  // namespace renewcast::nn
