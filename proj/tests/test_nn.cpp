#include <doctest.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "renewcast/error.hpp"
#include "renewcast/models.hpp"
#include "renewcast/nn.hpp"
#include "renewcast/rng.hpp"

#include "gradcheck.hpp"

using namespace renewcast;
using namespace renewcast::nn;
using namespace gradcheck;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

Network single(std::unique_ptr<Layer> layer) {
  Network n;
  n.add(std::move(layer));
  return n;
}

WindowSet linear_windows(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  WindowSet w;
  w.lookback = 1;
  w.inputs = Matrix(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = uniform01(rng) * 0.5;
    w.inputs(static_cast<Eigen::Index>(i), 0) = x;
    w.targets.push_back(2.0 * x);
    w.starts.push_back(i);
  }
  return w;
}

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("finite-difference gradient checks per layer") {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(1234);
    constexpr int kTrials = 50;

    for (Activation act : {Activation::kRelu, Activation::kTanh, Activation::kSigmoid, Activation::kIdentity}) {
      const std::string name = to_string(act);
      CAPTURE(name);
      GradCheck gc;
      for (int trial = 0; trial < kTrials; ++trial) {
        const auto in = pick(rng, 1, 5), out = pick(rng, 1, 5);
        auto net = single(std::make_unique<Dense>(in, out, act, rng));
        randomize(net, rng, 0.8);
        check_network(net, random_seq(pick(rng, 1, 3), static_cast<Eigen::Index>(pick(rng, 1, 4)),
                                      static_cast<Eigen::Index>(in), rng),
                      false, 0, rng, gc);
      }
      CHECK(gc.failed == 0);
      CHECK(gc.compared > 500);
      MESSAGE("dense " << name << " worst relative error " << gc.worst);
    }

    {
      GradCheck gc;
      for (int trial = 0; trial < kTrials; ++trial) {
        const auto in = pick(rng, 1, 4);
        auto net = single(std::make_unique<Lstm>(in, 3, rng));
        randomize(net, rng, 0.6);
        check_network(net, random_seq(2, static_cast<Eigen::Index>(pick(rng, 1, 3)), static_cast<Eigen::Index>(in), rng),
                      false, 0, rng, gc);
      }
      CHECK(gc.failed == 0);
      MESSAGE("lstm worst relative error " << gc.worst);
    }

    {
      GradCheck gc;
      for (int trial = 0; trial < kTrials; ++trial) {
        const auto in = pick(rng, 1, 3), filters = pick(rng, 1, 4), width = pick(rng, 1, 3);
        auto net = single(std::make_unique<Conv1d>(in, filters, width, pick_activation(rng), rng));
        randomize(net, rng, 0.7);
        check_network(net,
                      random_seq(width + pick(rng, 0, 3), static_cast<Eigen::Index>(pick(rng, 1, 3)),
                                 static_cast<Eigen::Index>(in), rng),
                      false, 0, rng, gc);
      }
      CHECK(gc.failed == 0);
      MESSAGE("conv1d worst relative error " << gc.worst);
    }

    {
      // Shape layers and dropout with a fixed mask.
      GradCheck gc;
      for (int trial = 0; trial < kTrials; ++trial) {
        const auto f = static_cast<Eigen::Index>(pick(rng, 1, 3));
        const auto steps = pick(rng, 2, 6);
        for (int kind = 0; kind < 5; ++kind) {
          Network net;
          switch (kind) {
            case 0: net.add(std::make_unique<Dropout>(0.4)); break;
            case 1: net.add(std::make_unique<LastStep>()); break;
            case 2: net.add(std::make_unique<MeanPool>()); break;
            case 3: net.add(std::make_unique<MaxPool>(2)); break;
            default: net.add(std::make_unique<Flatten>()); break;
          }
          check_network(net, random_seq(steps, 2, f, rng), true, 77 + static_cast<std::uint64_t>(trial), rng, gc);
        }
      }
      CHECK(gc.failed == 0);
    }
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::minutes(1));
  }

  TEST_CASE("finite-difference gradient checks on full stacked models") {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(99);
    for (models::Family f : models::neural_families()) {
      const std::string name = models::to_string(f);
      CAPTURE(name);
      GradCheck gc;
      for (int trial = 0; trial < 50; ++trial) {
        const auto spec = small_spec(f, rng);
        const models::WindowSpec window{pick(rng, 4, 6), pick(rng, 1, 3)};
        auto net = models::build_model(spec, window, static_cast<std::uint64_t>(trial));
        randomize(net, rng, 0.6);
        check_network(net,
                      random_seq(window.lookback, 2, static_cast<Eigen::Index>(window.features), rng),
                      true, 500 + static_cast<std::uint64_t>(trial), rng, gc);
      }
      CHECK(gc.failed == 0);
      MESSAGE(name << " worst relative error " << gc.worst);
    }
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::minutes(1));
  }

  TEST_CASE("dense examples") {
    Rng rng(1);
    Dense identity(3, 3, Activation::kIdentity, rng);
    identity.weight().value = Matrix::Identity(3, 3);
    identity.bias().value.setZero();
    Rng unused(0);
    const Seq x = random_seq(2, 4, 3, rng);
    const Seq y = identity.forward(x, false, unused);
    CHECK(y[0] == x[0]);
    CHECK(y[1] == x[1]);

    Dense zero(3, 2, Activation::kRelu, rng);
    zero.weight().value.setZero();
    zero.bias().value.setZero();
    const Seq z = zero.forward(x, false, unused);
    CHECK(z[0].isZero(0.0));
    const Seq g = zero.backward(Seq{Matrix::Ones(4, 2), Matrix::Ones(4, 2)});
    CHECK(g[0].isZero(0.0));
    CHECK(code_of([&] { zero.forward(random_seq(1, 2, 5, rng), false, unused); }) == ErrorCode::kShapeMismatch);
  }

  TEST_CASE("lstm examples") {
    Rng rng(2), unused(0);
    Lstm cell(2, 3, rng);
    for (Param* p : cell.params()) p->value.setZero();
    const Seq h = cell.forward(random_seq(4, 2, 2, rng), false, unused);
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(h[t].isZero(0.0));
      CHECK(cell.cell_state(t).isZero(0.0));
    }

    // Forget gate saturated open, input gate shut except on the first step.
    Lstm memory(1, 1, rng);
    for (Param* p : memory.params()) p->value.setZero();
    memory.bias().value << -20.0, 20.0, 0.5, 0.0;        // i, f, g, o
    memory.input_weight().value << 40.0, 0.0, 0.0, 0.0;  // x only opens i
    Seq x(6, Matrix::Zero(1, 1));
    x[0](0, 0) = 1.0;
    memory.forward(x, false, unused);
    const double c0 = memory.cell_state(0)(0, 0);
    CHECK(c0 > 0.4);
    for (std::size_t t = 1; t < x.size(); ++t) {
      CHECK(std::abs(memory.cell_state(t)(0, 0) - memory.cell_state(t - 1)(0, 0)) <= 1e-6);
    }
  }

  TEST_CASE("conv1d examples") {
    Rng rng(3), unused(0);
    Conv1d unit(1, 1, 1, Activation::kIdentity, rng);
    unit.kernel().value << 1.0;
    unit.bias().value << 0.0;
    Seq x{Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, 5.0), Matrix::Constant(1, 1, 9.0)};
    const Seq same = unit.forward(x, false, unused);
    REQUIRE(same.size() == 3);
    CHECK(same[2](0, 0) == 9.0);

    Conv1d diff(1, 1, 2, Activation::kIdentity, rng);
    diff.kernel().value << 1.0, -1.0;
    diff.bias().value << 0.0;
    const Seq d = diff.forward(x, false, unused);
    REQUIRE(d.size() == 2);
    CHECK(d[0](0, 0) == -2.0);
    CHECK(d[1](0, 0) == -4.0);

    Conv1d wide(1, 1, 4, Activation::kIdentity, rng);
    CHECK(code_of([&] { wide.forward(x, false, unused); }) == ErrorCode::kSequenceTooShort);
  }

  TEST_CASE("dropout") {
    Rng rng(4);
    Seq x{Matrix::Constant(1000, 100, 2.0)};
    Dropout none(0.0);
    CHECK(none.forward(x, true, rng)[0] == x[0]);
    Dropout half(0.5);
    CHECK(half.forward(x, false, rng)[0] == x[0]);
    const Matrix y = half.forward(x, true, rng)[0];
    const double zeroed = static_cast<double>((y.array() == 0.0).count()) / static_cast<double>(y.size());
    CHECK(std::abs(zeroed - 0.5) <= 0.01);
    CHECK(std::abs(y.mean() - 2.0) <= 0.02 * 2.0);
    CHECK(((y.array() == 0.0) || (y.array() == 4.0)).all());
  }

  TEST_CASE("loss and metric examples") {
    std::vector<Param*> none;
    CHECK(mse_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2}, 0.0, none).loss == 0.0);
    const auto l = mse_loss(std::vector<double>{0, 0}, std::vector<double>{1, 1}, 0.0, none);
    CHECK(l.loss == 1.0);
    CHECK(l.grad == std::vector<double>{1.0, 1.0});
    CHECK(rmse(std::vector<double>{3, 4}, std::vector<double>{3, 4}) == 0.0);
    CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 1.0);
    CHECK(rmse(std::vector<double>{1, 3}, std::vector<double>{2, 5}) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
    CHECK(mae(std::vector<double>{1, 3}, std::vector<double>{2, 5}) == 1.5);

    Param w{"W", Matrix::Constant(1, 1, 2.0), Matrix::Zero(1, 1), true};
    Param b{"b", Matrix::Constant(1, 1, 5.0), Matrix::Zero(1, 1), false};
    std::vector<Param*> params{&w, &b};
    const auto pen = mse_loss(std::vector<double>{1}, std::vector<double>{1}, 0.1, params);
    CHECK(pen.loss == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(pen.mse == 0.0);
    CHECK(w.grad(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(b.grad(0, 0) == 0.0);
    CHECK(code_of([] { rmse(std::vector<double>{1}, std::vector<double>{1, 2}); }) == ErrorCode::kLengthMismatch);
  }

  TEST_CASE("property: rmse squared equals the mse data term") {
    Rng rng(5);
    std::vector<Param*> none;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto n = pick(rng, 1, 64);
      std::vector<double> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = uniform01(rng) * 4 - 2;
        b[i] = uniform01(rng) * 4 - 2;
      }
      const double r = rmse(a, b);
      CHECK(std::abs(r * r - mse_loss(a, b, 0.0, none).mse) <= 1e-10);
    }
  }

  TEST_CASE("optimizer examples") {
    Param w{"W", Matrix::Constant(1, 1, 0.7), Matrix::Zero(1, 1), true};
    std::vector<Param*> ps{&w};
    Optimizer adam(OptimizerKind::kAdam, 0.001);
    adam.step(ps);
    CHECK(w.value(0, 0) == 0.7);

    w.grad(0, 0) = 1.0;
    Optimizer first(OptimizerKind::kAdam, 0.001);
    first.step(ps);
    CHECK(std::abs((0.7 - w.value(0, 0)) - 0.001) <= 1e-6);

    Param rw{"W", Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0), true};
    std::vector<Param*> rps{&rw};
    Optimizer rms(OptimizerKind::kRmsprop, 0.01);
    rms.step(rps);
    // v = 0.1 * g^2 after one step
    CHECK(rw.value(0, 0) == doctest::Approx(1.0 - 0.01 * 2.0 / (std::sqrt(0.4) + 1e-8)).epsilon(1e-14));

    Param q{"W", Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1), true};
    std::vector<Param*> qs{&q};
    Optimizer quad(OptimizerKind::kAdam, 0.01);
    for (int i = 0; i < 500; ++i) {
      q.grad(0, 0) = 2.0 * q.value(0, 0);
      quad.step(qs);
    }
    CHECK(std::abs(q.value(0, 0)) < 0.01);
  }

  TEST_CASE("gradient clipping") {
    Param a{"a", Matrix::Constant(1, 2, 3.0), Matrix::Constant(1, 2, 3.0), true};
    Param b{"b", Matrix::Zero(1, 1), Matrix::Constant(1, 1, 4.0), false};
    std::vector<Param*> ps{&a, &b};
    const double norm = clip_global_norm(ps, 1.0);
    CHECK(norm == doctest::Approx(std::sqrt(34.0)));
    CHECK(std::sqrt(a.grad.squaredNorm() + b.grad.squaredNorm()) == doctest::Approx(1.0));
  }

  TEST_CASE("property: weight decay alone shrinks the weights every step") {
    for (OptimizerKind kind : {OptimizerKind::kAdam, OptimizerKind::kRmsprop}) {
      Param w{"W", Matrix::Constant(2, 2, 1.5), Matrix::Zero(2, 2), true};
      w.value(1, 0) = -0.8;
      std::vector<Param*> ps{&w};
      Optimizer opt(kind, 1e-3);
      double previous = w.value.norm();
      for (int step = 0; step < 200; ++step) {
        w.grad.setZero();
        mse_loss(std::vector<double>{0.3}, std::vector<double>{0.3}, 0.05, ps);
        opt.step(ps);
        CHECK(w.value.norm() < previous);
        previous = w.value.norm();
      }
    }
  }

  TEST_CASE("early stopping rule") {
    EarlyStopping stop(3);
    CHECK_FALSE(stop.update(1, 1.0));
    CHECK_FALSE(stop.update(2, 1.1));
    CHECK_FALSE(stop.update(3, 1.2));
    CHECK(stop.update(4, 1.3));
    CHECK(stop.best_epoch() == 1);
  }

  TEST_CASE("fit learns a linear target and restores the best epoch") {
    Rng rng(6);
    Network net;
    net.add(std::make_unique<Dense>(1, 16, Activation::kTanh, rng));
    net.add(std::make_unique<Dense>(16, 1, Activation::kIdentity, rng));
    const auto train = linear_windows(1000, 1), val = linear_windows(200, 2);
    TrainConfig cfg;
    cfg.learning_rate = 5e-3;
    cfg.batch_size = 32;
    cfg.max_epochs = 150;
    cfg.patience = 15;
    cfg.lookback = 1;
    cfg.seed = 3;
    Network copy = net;
    const auto result = fit(net, train, val, cfg);
    const double final_rmse = rmse(val.targets, predict(net, val));
    CHECK(final_rmse < 0.01);
    CHECK(final_rmse == doctest::Approx(result.history[result.best_epoch - 1].val_rmse).epsilon(1e-12));

    const auto again = fit(copy, train, val, cfg);
    REQUIRE(again.history.size() == result.history.size());
    for (std::size_t e = 0; e < again.history.size(); ++e) {
      CHECK(again.history[e].train_loss == result.history[e].train_loss);
      CHECK(again.history[e].val_loss == result.history[e].val_loss);
    }
    CHECK(copy.flat_parameters() == net.flat_parameters());
    for (const auto& m : result.history) CHECK(std::abs(m.val_rmse * m.val_rmse - m.val_loss) <= 1e-10);
  }

  TEST_CASE("fit stops when validation loss keeps rising") {
    // Training pulls the output to 0 while validation wants 10, so every
    // epoch moves away from the validation target.
    Rng rng(7);
    Network net;
    net.add(std::make_unique<Dense>(1, 1, Activation::kIdentity, rng));
    net.parameters()[0]->value.setConstant(0.0);
    net.parameters()[1]->value.setConstant(5.0);
    WindowSet train = linear_windows(64, 3), val = linear_windows(16, 4);
    for (auto& t : train.targets) t = 0.0;
    for (auto& t : val.targets) t = 10.0;
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 64;
    cfg.max_epochs = 50;
    cfg.patience = 3;
    cfg.lookback = 1;
    const auto initial = net.flat_parameters();
    const auto result = fit(net, train, val, cfg);
    for (std::size_t e = 1; e < result.history.size(); ++e) {
      REQUIRE(result.history[e].val_loss > result.history[e - 1].val_loss);
    }
    CHECK(result.stopped_epoch == 4);
    CHECK(result.best_epoch == 1);
    CHECK(net.flat_parameters() != initial);  // weights after epoch 1
  }

  TEST_CASE("property: small-step full-batch training loss never rises on a linear model") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(seed);
      Network net;
      net.add(std::make_unique<Dense>(1, 1, Activation::kIdentity, rng));
      const auto train = linear_windows(200, 10 + seed), val = linear_windows(50, 20 + seed);
      TrainConfig cfg;
      cfg.learning_rate = 1e-4;
      cfg.batch_size = 200;
      cfg.max_epochs = 60;
      cfg.patience = 60;
      cfg.lookback = 1;
      const auto r = fit(net, train, val, cfg);
      for (std::size_t e = 1; e < r.history.size(); ++e) CHECK(r.history[e].train_loss <= r.history[e - 1].train_loss);
    }
  }

  TEST_CASE("predict") {
    Rng rng(8);
    const auto windows = linear_windows(40, 5);
    Network net;
    net.add(std::make_unique<Dense>(1, 4, Activation::kRelu, rng));
    net.add(std::make_unique<Dropout>(0.5));
    net.add(std::make_unique<Dense>(4, 1, Activation::kIdentity, rng));
    const auto a = predict(net, windows);
    CHECK(a == predict(net, windows));

    Network no_drop;
    no_drop.add(net.layers()[0]->clone());
    no_drop.add(std::make_unique<Dropout>(0.0));
    no_drop.add(net.layers()[2]->clone());
    CHECK(predict(no_drop, windows) == a);

    Network zero;
    zero.add(std::make_unique<Dense>(1, 3, Activation::kRelu, rng));
    zero.add(std::make_unique<Dense>(3, 1, Activation::kIdentity, rng));
    std::vector<double> p(zero.parameter_count(), 0.0);
    p.back() = 0.25;  // output bias
    zero.set_flat_parameters(p);
    for (double v : predict(zero, windows)) CHECK(v == 0.25);
  }

  TEST_CASE("tensor and window materialization") {
    Tensor t({2, 3, 4});
    CHECK(t.size() == 24);
    t.at(1, 2, 3) = 7.0;
    CHECK(t.data.back() == 7.0);
    CHECK(code_of([] { Tensor({2, 2}, std::vector<double>(3)); }) == ErrorCode::kShapeMismatch);

    WindowSet w;
    w.lookback = 2;
    w.inputs = Matrix(4, 1);
    w.inputs << 1, 2, 3, 4;
    w.starts = {0, 1, 2};
    w.targets = {3, 4, 5};
    const Tensor m = w.materialize();
    CHECK(m.shape == std::vector<std::size_t>{3, 2, 1});
    CHECK(m.data == std::vector<double>{1, 2, 2, 3, 3, 4});
    const auto back = WindowSet::from_tensor(m, w.targets);
    CHECK(back.materialize().data == m.data);
  }
}
