// Fixture for the leakage checks: a table with gaps, a categorical and a
// seasonal target, plus a helper that scrambles every row from a cut onward.
#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "renewcast/features.hpp"
#include "renewcast/rng.hpp"
#include "test_util.hpp"

namespace leakage {

using namespace renewcast;
using namespace testutil;

// Table with noisy continuous features, a categorical, gaps and a target.
inline TimeSeriesTable leakage_table(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  TimeSeriesTable t("t", hourly(n));
  NumericValues y(n), a(n), b(n), c(n), noise(n);
  CategoricalValues site(n);
  const char* labels[] = {"north", "south", "east"};
  double walk = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sin(2.0 * M_PI * static_cast<double>(i) / 24.0);
    walk += normal(rng);
    a[i] = 3.0 * s + 0.3 * normal(rng);
    b[i] = walk;
    c[i] = -2.0 * s + 0.5 * normal(rng);
    noise[i] = normal(rng);
    site[i] = std::string(labels[i % 3]);
    y[i] = 5.0 + 2.0 * s + 0.2 * normal(rng) + (i % 3 == 0 ? 1.0 : 0.0);
  }
  for (std::size_t i = 10; i < n; i += 37) a[i] = std::nullopt;
  for (std::size_t i = 50; i < 56; ++i) c[i] = std::nullopt;
  add_numeric(t, "a", a);
  add_numeric(t, "b", b);
  add_numeric(t, "c", c);
  add_numeric(t, "noise", noise);
  add_categorical(t, "site", site);
  add_numeric(t, "y", y, ColumnKind::kTarget);
  return features::add_cyclical_calendar(t);
}

// Copy of `t` with every cell in rows >= from replaced by unrelated values.
inline TimeSeriesTable perturb_after(const TimeSeriesTable& t, std::size_t from, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 50.0);
  TimeSeriesTable out = t;
  for (const auto& col : t.columns()) {
    Column c = col;
    if (c.is_numeric()) {
      auto& v = std::get<NumericValues>(c.values);
      for (std::size_t i = from; i < v.size(); ++i) {
        v[i] = uniform01(rng) < 0.1 ? std::nullopt : std::optional<double>(normal(rng));
      }
    } else {
      auto& v = std::get<CategoricalValues>(c.values);
      for (std::size_t i = from; i < v.size(); ++i) v[i] = std::string(uniform01(rng) < 0.5 ? "west" : "north");
    }
    out.replace_column(std::move(c));
  }
  return out;
}

inline bool same_pca(const std::optional<stats::PcaModel>& a, const std::optional<stats::PcaModel>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->mean == b->mean && a->components == b->components &&
         a->explained_variance_ratio == b->explained_variance_ratio;
}

}  // namespace leakage
