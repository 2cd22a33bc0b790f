#include <algorithm>
#include <cmath>
#include <numeric>

#include "renewcast/error.hpp"
#include "renewcast/stats.hpp"

namespace renewcast::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::kTooFewSamples, "mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_std(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorCode::kTooFewSamples, "std needs two samples");
  // Shifted by the first sample so identical inputs give exactly zero.
  const double shift = x.front();
  double m = 0.0;
  for (double v : x) m += v - shift;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - shift - m) * (v - shift - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

SummaryStats summary_stats(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw Error(ErrorCode::kTooFewSamples, "summary statistics need n >= 2");
  for (double v : series) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite sample");
  }
  SummaryStats s;
  s.n = n;
  s.mean = mean(series);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : series) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double nd = static_cast<double>(n);
  s.std = std::sqrt(m2 / (nd - 1.0));
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  if (m2 > 0.0) {
    if (n >= 3) {
      const double g1 = m3 / std::pow(m2, 1.5);
      s.skewness = std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * g1;
    }
    if (n >= 4) {
      const double g2 = m4 / (m2 * m2) - 3.0;
      s.kurtosis = ((nd + 1.0) * g2 + 6.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
    }
  }
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return s;
}

ConfidenceInterval confidence_interval(std::span<const double> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::kTooFewSamples, "confidence interval needs k >= 2");
  ConfidenceInterval ci;
  ci.k = samples.size();
  ci.mean = mean(samples);
  ci.half_width = kZ95 * sample_std(samples) / std::sqrt(static_cast<double>(ci.k));
  return ci;
}

}  // namespace renewcast::stats
