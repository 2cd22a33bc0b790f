#include <algorithm>
#include <array>
#include <cmath>

#include "renewcast/error.hpp"
#include "renewcast/stats.hpp"

namespace renewcast::stats {

namespace {

// Standard normal CDF.
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

constexpr double kTauMax = 2.74;
constexpr double kTauMin = -18.83;
constexpr double kTauStar = -1.61;
constexpr std::array<double, 3> kSmallP = {2.1659, 1.4412, 0.038269};
constexpr std::array<double, 4> kLargeP = {1.7339, 0.93202, -0.12745, -0.010368};

constexpr double kLagPruneCritical = 1.6448536269514722;

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

}  // namespace

const char* to_string(Verdict v) noexcept {
  return v == Verdict::kStationary ? "stationary" : "non_stationary";
}

int adf_default_max_lags(std::size_t n) noexcept {
  const int schwert = static_cast<int>(std::ceil(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
  const int cap = static_cast<int>(n / 2) - 2;
  return std::max(0, std::min(cap, schwert));
}

double mackinnon_pvalue(double tau) noexcept {
  constexpr double kFloor = 1e-30;
  if (tau > kTauMax) return 1.0;
  if (tau < kTauMin) return kFloor;
  double poly = 0.0;
  if (tau <= kTauStar) {
    for (std::size_t i = kSmallP.size(); i-- > 0;) poly = poly * tau + kSmallP[i];
  } else {
    for (std::size_t i = kLargeP.size(); i-- > 0;) poly = poly * tau + kLargeP[i];
  }
  return std::clamp(norm_cdf(poly), kFloor, 1.0);
}

namespace {

// Design for the ADF regression with `lags` lagged differences on the sample
// that starts after `skip` leading differences. Columns: level, const,
// lag_1..lag_p; response: the differences.
void adf_design(std::span<const double> x, int lags, int skip, Matrix& design, Vector& response) {
  const std::size_t n = x.size();
  const std::size_t rows = n - 1 - static_cast<std::size_t>(skip);
  design.resize(static_cast<Eigen::Index>(rows), lags + 2);
  response.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t j = 0; j < rows; ++j) {
    const std::size_t t = static_cast<std::size_t>(skip) + j;  // index into the differences
    const auto r = static_cast<Eigen::Index>(j);
    response(r) = x[t + 1] - x[t];
    design(r, 0) = x[t];
    design(r, 1) = 1.0;
    for (int i = 1; i <= lags; ++i) {
      design(r, i + 1) = x[t - i + 1] - x[t - i];
    }
  }
}

}  // namespace

AdfResult adf_test(std::span<const double> series, std::optional<int> max_lags) {
  const std::size_t n = series.size();
  if (n < 12) throw Error(ErrorCode::kTooShort, "ADF needs more observations");
  if (is_constant(series)) throw Error(ErrorCode::kDegenerateSeries, "constant series");
  const int maxlag = max_lags ? *max_lags : adf_default_max_lags(n);
  if (maxlag < 0 || n <= static_cast<std::size_t>(maxlag) + 10 ||
      maxlag > static_cast<int>(n / 2) - 2) {
    throw Error(ErrorCode::kTooShort, "n=" + std::to_string(n) + " too short for " +
                                          std::to_string(maxlag) + " lags");
  }

  // Lag pruning on the common sample. With columns ordered const, level,
  // lag_1..lag_p, a single Householder QR serves every nested regression:
  // the t statistic of the last column of the leading m-column block is
  // c_m * sign(R_mm) / sigma_m, with c = Q'y and RSS_m = sum_{i>=m} c_i^2.
  Matrix design;
  Vector y;
  adf_design(series, maxlag, maxlag, design, y);
  Matrix ordered(design.rows(), design.cols());
  ordered.col(0) = design.col(1);
  ordered.col(1) = design.col(0);
  ordered.rightCols(maxlag) = design.rightCols(maxlag);
  const Eigen::Index rows = ordered.rows();
  Eigen::HouseholderQR<Matrix> qr(ordered);
  const Vector c = qr.householderQ().transpose() * y;
  const Matrix& r = qr.matrixQR();
  std::vector<double> tail(static_cast<std::size_t>(rows) + 1, 0.0);
  for (Eigen::Index i = rows; i-- > 0;) {
    tail[static_cast<std::size_t>(i)] = tail[static_cast<std::size_t>(i) + 1] + c(i) * c(i);
  }
  int best = maxlag;
  for (int lag = maxlag; lag >= 0; --lag) {
    best = lag;
    const Eigen::Index m = lag + 2;
    const double rdiag = r(m - 1, m - 1);
    if (std::abs(rdiag) < 1e-12 * std::max(1.0, r.diagonal().cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::kSingularDesign, "collinear ADF regressors");
    }
    const double rss = tail[static_cast<std::size_t>(m)];
    const double sigma = std::sqrt(rss / static_cast<double>(rows - m));
    const double t = c(m - 1) * (rdiag < 0 ? -1.0 : 1.0) / sigma;
    if (std::abs(t) >= kLagPruneCritical) break;
  }

  adf_design(series, best, best, design, y);
  const Eigen::Index k = design.cols();
  const Eigen::Index nobs = design.rows();
  Eigen::ColPivHouseholderQR<Matrix> fit(design);
  if (fit.rank() < k) throw Error(ErrorCode::kSingularDesign, "rank-deficient ADF design");
  const Vector beta = fit.solve(y);
  const Vector resid = y - design * beta;
  const double sigma2 = resid.squaredNorm() / static_cast<double>(nobs - k);
  const Matrix xtx_inv = (design.transpose() * design).inverse();
  const double se = std::sqrt(sigma2 * xtx_inv(0, 0));

  AdfResult out;
  out.stat = beta(0) / se;
  out.p_value = mackinnon_pvalue(out.stat);
  out.lags_used = best;
  out.max_lags = maxlag;
  out.nobs = static_cast<std::size_t>(nobs);
  return out;
}

int kpss_default_lags(std::size_t n) noexcept {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

KpssResult kpss_test(std::span<const double> series, std::optional<int> lags) {
  const std::size_t n = series.size();
  if (n < 30) throw Error(ErrorCode::kTooShort, "KPSS needs n >= 30");
  const int nlags = lags ? *lags : kpss_default_lags(n);
  if (nlags < 0 || static_cast<std::size_t>(nlags) >= n) {
    throw Error(ErrorCode::kInvalidArgument, "KPSS lags must be in [0, n)");
  }
  const double m = mean(series);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = series[i] - m;

  double eta = 0.0, partial = 0.0;
  for (double v : e) {
    partial += v;
    eta += partial * partial;
  }
  const double nd = static_cast<double>(n);
  eta /= nd * nd;

  double s_hat = 0.0;
  for (double v : e) s_hat += v * v;
  for (int i = 1; i <= nlags; ++i) {
    double gamma = 0.0;
    for (std::size_t t = static_cast<std::size_t>(i); t < n; ++t) gamma += e[t] * e[t - i];
    s_hat += 2.0 * gamma * (1.0 - static_cast<double>(i) / (nlags + 1.0));
  }
  s_hat /= nd;
  if (!(s_hat > 1e-300)) throw Error(ErrorCode::kDegenerateSeries, "zero long-run variance");

  KpssResult out;
  out.stat = eta / s_hat;
  out.lags = nlags;
  static constexpr std::array<double, 4> crit = {0.347, 0.463, 0.574, 0.739};
  static constexpr std::array<double, 4> pvals = {0.10, 0.05, 0.025, 0.01};
  if (out.stat <= crit.front()) {
    out.p_value = pvals.front();
  } else if (out.stat >= crit.back()) {
    out.p_value = pvals.back();
  } else {
    for (std::size_t i = 1; i < crit.size(); ++i) {
      if (out.stat <= crit[i]) {
        const double w = (out.stat - crit[i - 1]) / (crit[i] - crit[i - 1]);
        out.p_value = pvals[i - 1] + w * (pvals[i] - pvals[i - 1]);
        break;
      }
    }
  }
  return out;
}

Verdict joint_verdict(double adf_pvalue, double kpss_pvalue, double alpha) noexcept {
  return adf_pvalue < alpha && kpss_pvalue > alpha ? Verdict::kStationary : Verdict::kNonStationary;
}

StationarityReport stationarity_report(std::span<const double> series) {
  const AdfResult adf = adf_test(series);
  const KpssResult kpss = kpss_test(series);
  StationarityReport r;
  r.adf_stat = adf.stat;
  r.adf_pvalue = adf.p_value;
  r.lags_used = adf.lags_used;
  r.kpss_stat = kpss.stat;
  r.kpss_pvalue = kpss.p_value;
  r.verdict = joint_verdict(adf.p_value, kpss.p_value);
  return r;
}

}  // namespace renewcast::stats
