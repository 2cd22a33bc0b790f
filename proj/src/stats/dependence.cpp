#include <algorithm>
#include <cmath>

#include "renewcast/error.hpp"
#include "renewcast/stats.hpp"

namespace renewcast::stats {

namespace {

std::vector<std::size_t> bin_indices(std::span<const double> x, std::size_t bins) {
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<std::size_t> idx(x.size(), 0);
  if (hi > lo) {
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto b = static_cast<std::size_t>((x[i] - lo) * scale);
      idx[i] = std::min(b, bins - 1);
    }
  }
  return idx;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "pearson");
  if (x.size() < 2) throw Error(ErrorCode::kTooFewSamples, "pearson needs two samples");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double mutual_information_from_joint(const Matrix& joint) {
  const Vector row = joint.rowwise().sum();
  const Vector col = joint.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < joint.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint.cols(); ++j) {
      const double p = joint(i, j);
      if (p > 0.0) mi += p * std::log(p / (row(i) * col(j)));
    }
  }
  return std::max(mi, 0.0);
}

double mutual_information(std::span<const double> x, std::span<const double> y, std::size_t bins) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "mutual_information");
  if (x.empty()) throw Error(ErrorCode::kTooFewSamples, "mutual_information of empty sample");
  if (bins == 0) throw Error(ErrorCode::kInvalidArgument, "bins must be positive");
  const auto bx = bin_indices(x, bins);
  const auto by = bin_indices(y, bins);
  std::vector<double> joint(bins * bins, 0.0), px(bins, 0.0), py(bins, 0.0);
  const double w = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[bx[i] * bins + by[i]] += w;
    px[bx[i]] += w;
    py[by[i]] += w;
  }
  double mi = 0.0;
  for (std::size_t a = 0; a < bins; ++a) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double p = joint[a * bins + b];
      if (p > 0.0) mi += p * std::log(p / (px[a] * py[b]));
    }
  }
  return std::max(mi, 0.0);
}

double binned_entropy(std::span<const double> x, std::size_t bins) {
  if (x.empty()) throw Error(ErrorCode::kTooFewSamples, "entropy of empty sample");
  const auto bx = bin_indices(x, bins);
  std::vector<double> p(bins, 0.0);
  for (auto b : bx) p[b] += 1.0 / static_cast<double>(x.size());
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace renewcast::stats
