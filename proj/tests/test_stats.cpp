#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "renewcast/error.hpp"
#include "renewcast/rng.hpp"
#include "renewcast/stats.hpp"

using namespace renewcast;
using namespace renewcast::stats;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-12); }

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
  auto x = normal_sample(n, seed);
  for (std::size_t i = 1; i < n; ++i) x[i] += x[i - 1];
  return x;
}

// Series-expansion oracle for the chi-squared upper tail with even df:
// Q = exp(-x/2) * sum_{i < df/2} (x/2)^i / i!
double chi2_tail_even_df(double x, int df) {
  double term = 1.0, sum = 1.0;
  for (int i = 1; i < df / 2; ++i) {
    term *= (x / 2.0) / i;
    sum += term;
  }
  return std::exp(-x / 2.0) * sum;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("summary statistics") {
    const std::vector<double> a{1, 2, 3};
    const auto s = summary_stats(a);
    CHECK(s.mean == 2.0);
    CHECK(s.median == 2.0);
    CHECK(std::abs(s.skewness) <= 1e-12);
    CHECK(summary_stats(std::vector<double>{0, 0, 0, 10}).skewness > 0.0);
    CHECK(summary_stats(std::vector<double>{4, 1, 3, 2}).median == 2.5);
    CHECK(code_of([] { summary_stats(std::vector<double>{1}); }) == ErrorCode::kTooFewSamples);
  }

  TEST_CASE("summary statistics agree with direct moment formulas") {
    const auto x = normal_sample(501, 5);
    const double n = static_cast<double>(x.size());
    double m = 0;
    for (double v : x) m += v;
    m /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
      const double d = v - m;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    m2 /= n, m3 /= n, m4 /= n;
    const double g1 = m3 / std::pow(m2, 1.5);
    const double skew = std::sqrt(n * (n - 1)) / (n - 2) * g1;
    const double g2 = m4 / (m2 * m2) - 3.0;
    const double kurt = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0);
    const auto s = summary_stats(x);
    CHECK(s.mean == doctest::Approx(m).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(std::sqrt(m2 * n / (n - 1))).epsilon(1e-12));
    CHECK(s.skewness == doctest::Approx(skew).epsilon(1e-9));
    CHECK(s.kurtosis == doctest::Approx(kurt).epsilon(1e-9));
    CHECK(s.min <= s.median);
    CHECK(s.median <= s.max);
  }

  TEST_CASE("property: symmetric samples have zero skewness") {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> x;
      const double c = uniform01(rng) * 10;
      for (int i = 0; i < 20; ++i) {
        const double d = uniform01(rng) * 5;
        x.push_back(c + d);
        x.push_back(c - d);
      }
      CHECK(std::abs(summary_stats(x).skewness) <= 1e-12);
    }
  }

  TEST_CASE("stationarity tests match the reference fixture") {
    const auto start = std::chrono::steady_clock::now();
    std::ifstream in(std::string(RENEWCAST_FIXTURES) + "/stationarity_reference.json");
    REQUIRE(in);
    const auto fixture = nlohmann::json::parse(in);
    REQUIRE(fixture["series"].size() == 20);
    int stationary = 0;
    for (const auto& s : fixture["series"]) {
      const std::string name = s["name"];
      CAPTURE(name);
      const auto values = s["values"].get<std::vector<double>>();
      const auto adf = adf_test(values);
      const auto kpss = kpss_test(values);
      const double ref_adf_p = s["adf_pvalue"], ref_kpss_p = s["kpss_pvalue"];
      CHECK(rel_err(adf.stat, s["adf_stat"].get<double>()) <= 0.02);
      CHECK(rel_err(kpss.stat, s["kpss_stat"].get<double>()) <= 0.02);
      CHECK(adf.lags_used == s["adf_lags"].get<int>());
      CHECK((adf.p_value < kStationarityAlpha) == (ref_adf_p < kStationarityAlpha));
      CHECK((kpss.p_value > kStationarityAlpha) == (ref_kpss_p > kStationarityAlpha));
      const auto verdict = stationarity_report(values).verdict;
      CHECK(verdict == joint_verdict(ref_adf_p, ref_kpss_p));
      stationary += s["constructed_stationary"].get<bool>() ? 1 : 0;
    }
    CHECK(stationary == 10);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(30));
  }

  TEST_CASE("stationarity examples on long series") {
    const auto noise = normal_sample(2000, 11);
    const auto walk = random_walk(2000, 12);
    CHECK(adf_test(noise).p_value < 0.01);
    CHECK(adf_test(walk).p_value > 0.10);
    const auto kn = kpss_test(noise);
    CHECK(kn.stat < 0.463);
    CHECK(kn.p_value > 0.05);
    // p saturates at the 10% table entry
    CHECK((kn.p_value == 0.10) == (kn.stat <= 0.347));
    const auto kw = kpss_test(walk);
    CHECK(kw.stat > 0.739);
    CHECK(kw.p_value == 0.01);
    CHECK(kpss_default_lags(2000) == 8);
    CHECK(code_of([] { kpss_test(std::vector<double>(100, 3.0)); }) == ErrorCode::kDegenerateSeries);
    CHECK(code_of([] { kpss_test(std::vector<double>(10, 1.0)); }) == ErrorCode::kTooShort);
    CHECK(code_of([] { adf_test(std::vector<double>{1, 2, 3, 4, 5}); }) == ErrorCode::kTooShort);
  }

  TEST_CASE("property: stationarity statistics are location invariant") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto x = seed % 2 ? random_walk(300, seed) : normal_sample(300, seed);
      auto shifted = x;
      for (auto& v : shifted) v += 37.5;
      const auto a = adf_test(x), b = adf_test(shifted);
      CHECK(std::abs(a.stat - b.stat) <= 1e-8);
      CHECK(a.lags_used == b.lags_used);
      CHECK(std::abs(kpss_test(x).stat - kpss_test(shifted).stat) <= 1e-8);
    }
  }

  TEST_CASE("joint verdict rule") {
    CHECK(joint_verdict(0.01, 0.10) == Verdict::kStationary);
    CHECK(joint_verdict(0.01, 0.01) == Verdict::kNonStationary);
    CHECK(joint_verdict(0.20, 0.10) == Verdict::kNonStationary);
    CHECK(joint_verdict(0.20, 0.01) == Verdict::kNonStationary);
  }

  TEST_CASE("mutual information") {
    Matrix joint(2, 2);
    joint << 0.5, 0.0, 0.0, 0.5;
    CHECK(std::abs(mutual_information_from_joint(joint) - std::log(2.0)) <= 1e-12);

    const auto x = normal_sample(50000, 31), y = normal_sample(50000, 32);
    const double indep = mutual_information(x, y);
    CHECK(indep < 0.01);
    CHECK(indep >= -1e-12);
    CHECK(std::abs(mutual_information(x, y) - mutual_information(y, x)) <= 1e-12);

    // y = x: MI equals the binned entropy, computed here from the histogram.
    const auto z = normal_sample(5000, 33);
    const double lo = *std::min_element(z.begin(), z.end()), hi = *std::max_element(z.begin(), z.end());
    std::vector<double> counts(16, 0.0);
    for (double v : z) {
      const auto b = std::min<std::size_t>(15, static_cast<std::size_t>((v - lo) / (hi - lo) * 16));
      counts[b] += 1;
    }
    double h = 0;
    for (double c : counts) {
      if (c > 0) h -= c / 5000.0 * std::log(c / 5000.0);
    }
    CHECK(mutual_information(z, z) == doctest::Approx(h).epsilon(1e-12));
    CHECK(code_of([&] { mutual_information(x, z); }) == ErrorCode::kLengthMismatch);
  }

  TEST_CASE("property: mutual information is symmetric and nonnegative") {
    Rng rng(44);
    for (int trial = 0; trial < 50; ++trial) {
      const auto x = normal_sample(800, 1000 + static_cast<std::uint64_t>(trial));
      auto y = normal_sample(800, 2000 + static_cast<std::uint64_t>(trial));
      const double w = uniform01(rng);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = w * x[i] + (1 - w) * y[i];
      const double a = mutual_information(x, y), b = mutual_information(y, x);
      CHECK(std::abs(a - b) <= 1e-12);
      CHECK(a >= -1e-12);
    }
  }

  TEST_CASE("pca") {
    // Rank-1 data on a line in 3-D.
    Matrix line(50, 3);
    for (int i = 0; i < 50; ++i) line.row(i) << i * 1.0, i * 2.0 - 3, i * -0.5 + 1;
    const auto m1 = pca_fit(line);
    CHECK(m1.n_components() == 1);
    CHECK(std::abs(m1.explained_variance_ratio[0] - 1.0) <= 1e-10);

    // Isotropic 2-D Gaussian.
    const auto g1 = normal_sample(10000, 50), g2 = normal_sample(10000, 51);
    Matrix iso(10000, 2);
    for (int i = 0; i < 10000; ++i) iso.row(i) << g1[static_cast<std::size_t>(i)], g2[static_cast<std::size_t>(i)];
    const auto m2 = pca_fit(iso, 0.80);
    CHECK(m2.n_components() == 2);
    CHECK(std::abs(m2.explained_variance_ratio[0] - 0.5) <= 0.02);
    CHECK(std::abs(m2.explained_variance_ratio[1] - 0.5) <= 0.02);

    // Projection of the mean is zero; 2-D toy drops the second coordinate.
    const Matrix mean_row = m2.mean.transpose();
    CHECK(pca_project(m2, mean_row).norm() <= 1e-12);
    PcaModel toy;
    toy.mean = Vector::Zero(2);
    toy.components = Matrix(1, 2);
    toy.components << 1, 0;
    toy.explained_variance_ratio = Vector::Ones(1);
    Matrix p(1, 2);
    p << 3, 4;
    CHECK(pca_project(toy, p)(0, 0) == 3.0);
    CHECK(code_of([&] { pca_project(toy, Matrix::Zero(1, 3)); }) == ErrorCode::kDimensionMismatch);
  }

  TEST_CASE("property: pca orthonormality, ordering and reconstruction") {
    Rng rng(60);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 3 + trial % 5;
      Matrix mix(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) mix(i, j) = normal(rng);
      Matrix x(200, d);
      for (int i = 0; i < 200; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = normal(rng);
      x = x * mix;
      const auto full = pca_fit_components(x, static_cast<std::size_t>(d));
      const Matrix gram = full.components * full.components.transpose();
      CHECK((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8);
      for (int i = 1; i < d; ++i) CHECK(full.explained_variance_ratio[i] <= full.explained_variance_ratio[i - 1]);
      CHECK(full.explained_variance_ratio.sum() <= 1.0 + 1e-12);
      const Matrix back = pca_reconstruct(full, pca_project(full, x));
      CHECK((back - x).cwiseAbs().maxCoeff() <= 1e-8);
      for (int r = 0; r < d; ++r) {
        Eigen::Index arg;
        full.components.row(r).cwiseAbs().maxCoeff(&arg);
        CHECK(full.components(r, arg) > 0);
      }
      double previous = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= d; ++k) {
        const auto m = pca_fit_components(x, static_cast<std::size_t>(k));
        const double err = (pca_reconstruct(m, pca_project(m, x)) - x).squaredNorm();
        CHECK(err <= previous + 1e-9);
        previous = err;
      }
      // Variance-target selection: smallest k reaching 0.8.
      const auto chosen = pca_fit(x, 0.80);
      double cum = 0;
      std::size_t k = 0;
      while (cum < 0.80 - 1e-12) cum += full.explained_variance_ratio[static_cast<Eigen::Index>(k++)];
      CHECK(chosen.n_components() == k);
    }
  }

  TEST_CASE("friedman test") {
    Matrix ranks(4, 3);
    for (int i = 0; i < 4; ++i) ranks.row(i) << 1, 2, 3;
    const auto r = friedman_test(ranks);
    CHECK(r.chi_squared == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(r.df == 2);
    CHECK(std::abs(r.p_value - 0.0183) <= 1e-3);
    CHECK(r.p_value == doctest::Approx(chi2_tail_even_df(8.0, 2)).epsilon(1e-10));

    const auto ties = friedman_test(Matrix::Constant(5, 4, 0.3));
    CHECK(ties.chi_squared == 0.0);
    CHECK(ties.p_value == doctest::Approx(1.0));

    CHECK(rank_with_ties(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
    CHECK(code_of([] { friedman_test(Matrix::Ones(1, 3)); }) == ErrorCode::kTooFewSamples);
  }

  TEST_CASE("property: friedman invariants") {
    Rng rng(70);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + trial % 6, k = 2 + trial % 9;
      Matrix s(n, k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) s(i, j) = 0.01 + std::floor(uniform01(rng) * 8) / 8.0;  // forces ties
      const auto a = friedman_test(s);
      const auto b = friedman_test(s.array().square().matrix());
      CHECK(a.chi_squared == b.chi_squared);
      double total = 0;
      for (double v : a.rank_sums) total += v;
      CHECK(total == doctest::Approx(n * k * (k + 1) / 2.0).epsilon(1e-12));
      CHECK(a.chi_squared >= 0.0);
      CHECK(a.p_value >= 0.0);
      CHECK(a.p_value <= 1.0);
    }
  }

  TEST_CASE("chi-squared tail against the even-df closed form") {
    for (int df = 2; df <= 30; df += 2) {
      for (double x : {0.5, 3.0, 8.0, 20.0, 49.64, 80.0}) {
        CHECK(chi_squared_upper_tail(x, df) == doctest::Approx(chi2_tail_even_df(x, df)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("confidence interval") {
    const auto ci = confidence_interval(std::vector<double>{1, 2, 3, 4, 5});
    CHECK(ci.mean == 3.0);
    CHECK(std::abs(ci.half_width - 1.96 * std::sqrt(2.5) / std::sqrt(5.0)) <= 1e-6);
    CHECK(ci.k == 5);
    CHECK(confidence_interval(std::vector<double>{0.4, 0.4, 0.4}).half_width == 0.0);
    CHECK(code_of([] { confidence_interval(std::vector<double>{1.0}); }) == ErrorCode::kTooFewSamples);
  }

  TEST_CASE("property: confidence interval scales with the samples") {
    Rng rng(80);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> x(5);
      for (auto& v : x) v = uniform01(rng);
      const double c = std::ldexp(1.0, static_cast<int>(uniform01(rng) * 10) - 5) * (trial % 2 ? -1 : 1);
      auto y = x;
      for (auto& v : y) v *= c;
      CHECK(confidence_interval(y).half_width == std::abs(c) * confidence_interval(x).half_width);
    }
  }
}
