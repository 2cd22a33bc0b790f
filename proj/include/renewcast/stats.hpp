#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace renewcast::stats {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;       // sample, n-1
  double skewness = 0.0;  // adjusted Fisher-Pearson
  double kurtosis = 0.0;  // excess, bias-adjusted
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

SummaryStats summary_stats(std::span<const double> series);

// ---------------------------------------------------------------------------
// Unit-root / stationarity tests

struct AdfResult {
  double stat = 0.0;
  double p_value = 1.0;
  int lags_used = 0;
  int max_lags = 0;
  std::size_t nobs = 0;  // observations in the final regression
};

// Schwert ceiling rule ceil(12 * (n/100)^(1/4)), capped at n/2 - 2.
int adf_default_max_lags(std::size_t n) noexcept;

// Regression with intercept. Lag order: start at max_lags and drop the
// longest lag while its |t| < 1.6448536 (10% two-sided). All candidate
// regressions share the sample of the longest one; the chosen order is then
// refit on its own maximal sample.
AdfResult adf_test(std::span<const double> series, std::optional<int> max_lags = std::nullopt);

// MacKinnon (1994/2010) asymptotic surface, constant-only, one I(1) series.
// Clamped to [1e-30, 1].
double mackinnon_pvalue(double tau) noexcept;

struct KpssResult {
  double stat = 0.0;
  double p_value = 0.1;
  int lags = 0;
};

// floor(4 * (n/100)^(1/4))
int kpss_default_lags(std::size_t n) noexcept;

// Level-stationarity KPSS with a Bartlett-weighted Newey-West long-run
// variance. p interpolated on the {0.347, 0.463, 0.574, 0.739} table and
// clamped to [0.01, 0.10].
KpssResult kpss_test(std::span<const double> series, std::optional<int> lags = std::nullopt);

enum class Verdict { kStationary, kNonStationary };
const char* to_string(Verdict v) noexcept;

inline constexpr double kStationarityAlpha = 0.05;

// Stationary iff ADF rejects a unit root and KPSS does not reject
// stationarity, both at alpha.
Verdict joint_verdict(double adf_pvalue, double kpss_pvalue,
                      double alpha = kStationarityAlpha) noexcept;

struct StationarityReport {
  double adf_stat = 0.0;
  double adf_pvalue = 1.0;
  int lags_used = 0;
  double kpss_stat = 0.0;
  double kpss_pvalue = 0.1;
  Verdict verdict = Verdict::kNonStationary;
};

StationarityReport stationarity_report(std::span<const double> series);

// ---------------------------------------------------------------------------
// Dependence measures

double pearson(std::span<const double> x, std::span<const double> y);

// Equal-width histogram estimate in nats.
double mutual_information(std::span<const double> x, std::span<const double> y,
                          std::size_t bins = 16);
// Same double sum for a joint probability table that is already given.
double mutual_information_from_joint(const Matrix& joint);
// Entropy (nats) of x under the same equal-width binning.
double binned_entropy(std::span<const double> x, std::size_t bins = 16);

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
  Vector mean;                   // length d
  Matrix components;             // k x d, orthonormal rows
  Vector explained_variance_ratio;  // length k, nonincreasing
  Vector all_ratios;             // every retained singular direction
  bool rank_deficient = false;

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
  std::size_t n_components() const noexcept { return static_cast<std::size_t>(components.rows()); }
};

// Smallest k whose cumulative explained-variance ratio reaches the target.
PcaModel pca_fit(const Matrix& data, double variance_target = 0.80);
PcaModel pca_fit_components(const Matrix& data, std::size_t k);
Matrix pca_project(const PcaModel& model, const Matrix& data);
Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores);

// ---------------------------------------------------------------------------
// Friedman test

struct FriedmanResult {
  double chi_squared = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::vector<double> rank_sums;
  std::size_t blocks = 0;
};

// Average ranks within each row of blocks x treatments. Ties share ranks.
std::vector<double> rank_with_ties(std::span<const double> values, bool ascending = true);

FriedmanResult friedman_test(const Matrix& scores, bool lower_is_better = true);

// Regularized upper incomplete gamma Q(a, x): series below x = a + 1,
// continued fraction above.
double regularized_gamma_q(double a, double x);
double chi_squared_upper_tail(double x, double df);

// ---------------------------------------------------------------------------
// Confidence interval mean +/- 1.96 * sigma / sqrt(k)

inline constexpr double kZ95 = 1.96;

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t k = 0;
};

ConfidenceInterval confidence_interval(std::span<const double> samples);

double mean(std::span<const double> x);
double sample_std(std::span<const double> x);

}  // namespace renewcast::stats
