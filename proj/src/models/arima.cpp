#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "renewcast/error.hpp"
#include "renewcast/models.hpp"

namespace renewcast::models {

namespace {

constexpr double kMaxMa = 0.99;  // keeps the error recursion invertible

std::vector<double> difference_n(std::span<const double> x, int d) {
  std::vector<double> w(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = w.size() - 1; i > 0; --i) w[i] -= w[i - 1];
    w.erase(w.begin());
  }
  return w;
}

// One-step errors e_t = w_t - c - sum phi_i w_{t-i} - sum theta_j e_{t-j},
// with e_t = 0 before t = p. Optionally the Jacobian rows de_t/d(c, phi, theta).
void css_errors(std::span<const double> w, std::size_t n, double c, const std::vector<double>& phi,
                const std::vector<double>& theta, bool with_intercept, std::vector<double>& e,
                std::vector<double>* jac) {
  const std::size_t p = phi.size(), q = theta.size();
  const std::size_t k = (with_intercept ? 1 : 0) + p + q;
  e.assign(n, 0.0);
  if (jac) jac->assign(n * k, 0.0);
  for (std::size_t t = p; t < n; ++t) {
    double pred = c;
    for (std::size_t i = 0; i < p; ++i) pred += phi[i] * w[t - i - 1];
    for (std::size_t j = 0; j < q; ++j) {
      if (t >= j + 1 + p) pred += theta[j] * e[t - j - 1];
    }
    e[t] = w[t] - pred;
    if (!jac) continue;
    double* row = jac->data() + t * k;
    std::size_t col = 0;
    if (with_intercept) row[col++] = -1.0;
    for (std::size_t i = 0; i < p; ++i) row[col++] = -w[t - i - 1];
    for (std::size_t j = 0; j < q; ++j) row[col++] = t >= j + 1 + p ? -e[t - j - 1] : 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      if (t < j + 1 + p) continue;
      const double* prev = jac->data() + (t - j - 1) * k;
      for (std::size_t m = 0; m < k; ++m) row[m] -= theta[j] * prev[m];
    }
  }
}

}  // namespace

ArimaForecast arima_fit_forecast(std::span<const double> series, int p, int d, int q, std::size_t train_end,
                                 const ArimaOptions& options) {
  if (p < 0 || q < 0 || p > 5 || q > 5 || d < 0 || d > 2) {
    throw Error(ErrorCode::kInvalidOrders, "orders (" + std::to_string(p) + "," + std::to_string(d) + "," +
                                               std::to_string(q) + ")");
  }
  const auto up = static_cast<std::size_t>(p), ud = static_cast<std::size_t>(d), uq = static_cast<std::size_t>(q);
  if (train_end > series.size()) throw Error(ErrorCode::kInvalidArgument, "train_end beyond series");
  if (train_end < ud + up + uq + 10) throw Error(ErrorCode::kInvalidOrders, "series too short for the orders");

  const std::vector<double> w = difference_n(series, d);
  const std::size_t n_train = train_end - ud;
  const bool with_intercept = d == 0;

  // Fit in standardized units; phi and theta are scale free.
  double mean = 0.0;
  if (with_intercept) mean = std::accumulate(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n_train), 0.0) / static_cast<double>(n_train);
  double ss = 0.0;
  for (std::size_t t = 0; t < n_train; ++t) ss += (w[t] - mean) * (w[t] - mean);
  double scale = std::sqrt(ss / static_cast<double>(n_train));
  if (!(scale > 0.0)) scale = 1.0;
  std::vector<double> z(n_train);
  for (std::size_t t = 0; t < n_train; ++t) z[t] = (w[t] - mean) / scale;

  const std::size_t k = (with_intercept ? 1 : 0) + up + uq;
  nn::Param theta_all{"arima", nn::Matrix::Zero(static_cast<Eigen::Index>(std::max<std::size_t>(k, 1)), 1),
                      nn::Matrix::Zero(static_cast<Eigen::Index>(std::max<std::size_t>(k, 1)), 1), false};
  nn::Optimizer opt(nn::OptimizerKind::kAdam, options.learning_rate);
  nn::Param* handle[] = {&theta_all};

  auto unpack = [&](double& c, std::vector<double>& phi, std::vector<double>& th) {
    std::size_t col = 0;
    c = with_intercept ? theta_all.value(static_cast<Eigen::Index>(col++), 0) : 0.0;
    phi.resize(up);
    th.resize(uq);
    for (auto& v : phi) v = theta_all.value(static_cast<Eigen::Index>(col++), 0);
    for (auto& v : th) v = theta_all.value(static_cast<Eigen::Index>(col++), 0);
  };

  std::vector<double> e, jac, phi, th;
  double c = 0.0, css = std::numeric_limits<double>::infinity();
  const double count = static_cast<double>(n_train - up);
  std::size_t iter = 0;
  for (; iter < options.max_iterations && k > 0; ++iter) {
    unpack(c, phi, th);
    css_errors(z, n_train, c, phi, th, with_intercept, e, &jac);
    double s = 0.0;
    theta_all.grad.setZero();
    for (std::size_t t = up; t < n_train; ++t) {
      s += e[t] * e[t];
      for (std::size_t m = 0; m < k; ++m) theta_all.grad(static_cast<Eigen::Index>(m), 0) += 2.0 * e[t] * jac[t * k + m];
    }
    s /= count;
    theta_all.grad /= count;
    if (!std::isfinite(s)) throw Error(ErrorCode::kNonConvergence, "non-finite conditional sum of squares");
    const bool flat = std::abs(css - s) <= options.tolerance * (1.0 + s);
    css = s;
    if (flat || theta_all.grad.norm() < 1e-8) break;
    opt.step(handle);
    for (std::size_t m = k - uq; m < k; ++m) {
      auto& v = theta_all.value(static_cast<Eigen::Index>(m), 0);
      v = std::clamp(v, -kMaxMa, kMaxMa);
    }
  }
  unpack(c, phi, th);

  ArimaForecast out;
  out.params.p = p;
  out.params.d = d;
  out.params.q = q;
  out.params.phi = phi;
  out.params.theta = th;
  out.params.iterations = iter;
  const double phi_sum = std::accumulate(phi.begin(), phi.end(), 0.0);
  out.params.intercept = with_intercept ? mean * (1.0 - phi_sum) + scale * c : 0.0;

  // Errors over the whole differenced series in original units; the MA terms
  // keep consuming observed errors through the validation rows.
  css_errors(w, w.size(), out.params.intercept, phi, th, with_intercept, e, nullptr);
  double css_orig = 0.0;
  for (std::size_t t = up; t < n_train; ++t) css_orig += e[t] * e[t];
  out.params.css = count > 0 ? css_orig / count : 0.0;
  if (!std::isfinite(out.params.css)) throw Error(ErrorCode::kNonConvergence, "non-finite residuals");

  auto integrate = [&](std::size_t row) {
    // x_row = w_{row-d} + sum_k (-1)^{k+1} C(d,k) x_{row-k}
    double base = 0.0;
    if (d == 1) base = series[row - 1];
    if (d == 2) base = 2.0 * series[row - 1] - series[row - 2];
    const std::size_t t = row - ud;
    return base + (w[t] - e[t]);
  };
  out.first_fitted = ud + up;
  for (std::size_t row = out.first_fitted; row < train_end; ++row) out.fitted.push_back(integrate(row));
  for (std::size_t row = train_end; row < series.size(); ++row) out.forecasts.push_back(integrate(row));
  return out;
}

ArimaForecast arima_select_orders(std::span<const double> series, int d, std::size_t train_end,
                                  const ArimaOptions& options) {
  std::optional<ArimaForecast> best;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= 2; ++p) {
    for (int q = 0; q <= 2; ++q) {
      try {
        auto f = arima_fit_forecast(series, p, d, q, train_end, options);
        const double r = nn::rmse(series.subspan(train_end), f.forecasts);
        if (r < best_rmse) {
          best_rmse = r;
          best = std::move(f);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonConvergence) throw;
      }
    }
  }
  if (!best) throw Error(ErrorCode::kNonConvergence, "no ARIMA order converged");
  return *best;
}

}  // namespace renewcast::models
