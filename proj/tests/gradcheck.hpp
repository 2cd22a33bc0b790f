// Finite-difference gradient checking shared by the nn tests and the
// acceptance runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "renewcast/models.hpp"
#include "renewcast/nn.hpp"
#include "renewcast/rng.hpp"

namespace gradcheck {

using namespace renewcast;
using namespace renewcast::nn;

inline Seq random_seq(std::size_t steps, Eigen::Index batch, Eigen::Index features, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Seq x(steps, Matrix(batch, features));
  for (auto& m : x)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return x;
}

inline void randomize(Network& net, Rng& rng, double sd) {
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> p(net.parameter_count());
  for (auto& v : p) v = normal(rng);
  net.set_flat_parameters(p);
}

inline double project(const Seq& y, const Seq& r) {
  double s = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) s += y[t].cwiseProduct(r[t]).sum();
  return s;
}

struct GradCheck {
  std::size_t compared = 0;
  std::size_t failed = 0;
  double worst = 0.0;

  void compare(double analytic, double numeric) {
    ++compared;
    const double diff = std::abs(analytic - numeric);
    // Below 1e-6 the difference quotient itself carries ~1e-11 of rounding,
    // so the denominator is floored there.
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    const double err = diff / scale;
    worst = std::max(worst, err);
    if (err > 1e-4) ++failed;
  }
};

// Central differences (eps 1e-5) of <R, net(x)> against backward, for every
// parameter and every input entry. Dropout masks are held fixed by replaying
// the same RNG seed on each forward pass.
inline void check_network(Network& net, Seq x, bool training, std::uint64_t mask_seed, Rng& rng, GradCheck& gc) {
  constexpr double eps = 1e-5;
  auto run = [&](const Seq& in) {
    Rng mask(mask_seed);
    return net.forward(in, training, mask);
  };
  const Seq y0 = run(x);
  Seq r = y0;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& m : r)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  net.zero_grad();
  run(x);
  const Seq grad_in = net.backward(r);

  std::vector<Matrix> analytic;
  for (Param* p : net.parameters()) analytic.push_back(p->grad);
  auto params = net.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& v = params[k]->value;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double orig = v.data()[i];
      v.data()[i] = orig + eps;
      const double up = project(run(x), r);
      v.data()[i] = orig - eps;
      const double down = project(run(x), r);
      v.data()[i] = orig;
      gc.compare(analytic[k].data()[i], (up - down) / (2 * eps));
    }
  }
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (Eigen::Index i = 0; i < x[t].size(); ++i) {
      const double orig = x[t].data()[i];
      x[t].data()[i] = orig + eps;
      const double up = project(run(x), r);
      x[t].data()[i] = orig - eps;
      const double down = project(run(x), r);
      x[t].data()[i] = orig;
      gc.compare(grad_in[t].data()[i], (up - down) / (2 * eps));
    }
  }
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

inline Activation pick_activation(Rng& rng) {
  const Activation all[] = {Activation::kRelu, Activation::kTanh, Activation::kSigmoid};
  return all[pick(rng, 0, 2)];
}

inline models::ModelSpec small_spec(models::Family f, Rng& rng) {
  models::ModelSpec s;
  s.family = f;
  s.regularized = true;
  s.dropout = 0.2;
  s.kernel_width = 2;
  s.pool = 2;
  const auto w = [&] { return static_cast<int>(pick(rng, 2, 4)); };
  switch (f) {
    case models::Family::kDnn:
    case models::Family::kTimeDistributedMlp:
      s.layer_widths = {w(), w()};
      s.activations = {pick_activation(rng), pick_activation(rng)};
      break;
    case models::Family::kLstm:
      s.layer_widths = {w(), w()};
      s.activations = {Activation::kTanh, Activation::kTanh};
      break;
    case models::Family::kStackedLstm:
      s.layer_widths = {w(), w(), w()};
      s.activations = std::vector<Activation>(3, Activation::kTanh);
      break;
    case models::Family::kCnn:
      s.conv_filters = {w(), w()};
      s.layer_widths = {w()};
      s.activations = {pick_activation(rng), pick_activation(rng), pick_activation(rng)};
      break;
    case models::Family::kCnnLstm:
      s.conv_filters = {w()};
      s.layer_widths = {w()};
      s.activations = {pick_activation(rng), Activation::kTanh};
      break;
    case models::Family::kEncoderDecoder:
      s.layer_widths = {w()};
      s.decoder_widths = {w()};
      s.activations = {Activation::kTanh, Activation::kTanh};
      break;
    case models::Family::kArima:
      break;
  }
  return s;
}

}  // namespace gradcheck
