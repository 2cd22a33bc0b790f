#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "renewcast/error.hpp"
#include "renewcast/stats.hpp"

namespace renewcast::stats {

std::vector<double> rank_with_ties(std::span<const double> values, bool ascending) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ascending ? values[a] < values[b] : values[a] > values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

namespace {

constexpr double kEps = 1e-15;
constexpr int kMaxIter = 10000;

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
  // Modified Lentz evaluation of the Legendre continued fraction.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw Error(ErrorCode::kInvalidArgument, "gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi_squared_upper_tail(double x, double df) {
  if (x <= 0.0) return 1.0;
  return std::clamp(regularized_gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0);
}

FriedmanResult friedman_test(const Matrix& scores, bool lower_is_better) {
  const auto n_blocks = static_cast<std::size_t>(scores.rows());
  const auto k = static_cast<std::size_t>(scores.cols());
  if (n_blocks < 2 || k < 2) {
    throw Error(ErrorCode::kTooFewSamples, "Friedman test needs >= 2 blocks and >= 2 treatments");
  }
  FriedmanResult out;
  out.blocks = n_blocks;
  out.df = static_cast<int>(k) - 1;
  out.rank_sums.assign(k, 0.0);
  std::vector<double> row(k);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = scores(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
      if (!std::isfinite(row[j])) throw Error(ErrorCode::kInvalidArgument, "non-finite score");
    }
    const auto ranks = rank_with_ties(row, lower_is_better);
    for (std::size_t j = 0; j < k; ++j) out.rank_sums[j] += ranks[j];
  }
  const double nd = static_cast<double>(n_blocks);
  const double kd = static_cast<double>(k);
  const double expected = nd * (kd + 1.0) / 2.0;
  double ss = 0.0;
  for (double r : out.rank_sums) ss += (r - expected) * (r - expected);
  out.chi_squared = 12.0 / (nd * kd * (kd + 1.0)) * ss;
  out.p_value = chi_squared_upper_tail(out.chi_squared, static_cast<double>(out.df));
  return out;
}

}  // namespace renewcast::stats
