#include <doctest.h>

#include "csure/distributions.hpp"
#include "csure/errors.hpp"
#include "csure/frechet.hpp"
#include "test_support.hpp"

using namespace csure;
constexpr double kPiD = testing::kPi;

namespace {

/// Asymptotic two-sample Kolmogorov-Smirnov p-value.
double ks_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double q = 0;
  for (int k = 1; k <= 100; ++k) q += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace

TEST_SUITE("distributions") {
  TEST_CASE("degenerate covariance returns the mean") {
    const Complex mean(2.0, 0.7);
    for (const auto& x : sample_ln(LogNormalOnC(mean, 0.0), 100, 3)) CHECK(x == mean);
    CHECK_THROWS_AS(LogNormalOnC(mean, -1.0), UsageError);
  }

  TEST_CASE("sample mean of log coordinates") {
    const auto xs = sample_ln(LogNormalOnC(Complex(1.0, 0.0), 0.01), 100000, 21);
    double u = 0, s = 0;
    for (const auto& x : xs) {
      u += x.scale.log_r();
      s += x.angle.tilde();
    }
    u /= xs.size();
    s /= xs.size();
    const double bound = 3 * 0.1 / std::sqrt(1e5);
    CHECK(std::abs(u) < bound);
    CHECK(std::abs(s) < bound);
  }

  TEST_CASE("means near the cut are not split") {
    const double target = kPiD - 0.05;
    const auto xs = sample_ln(LogNormalOnC(Complex(1.0, target), 0.04), 20000, 22);
    std::vector<Angle> a;
    for (const auto& x : xs) a.push_back(x.angle);
    const double m = fm_so2<double>(a, ConvexWeights<double>::uniform(static_cast<Eigen::Index>(a.size()))).theta();
    // angle sd = sqrt(0.04 / 2) since the tilde coordinate carries the variance
    const double se = std::sqrt(0.02 / 20000.0);
    CHECK(testing::brute_dist_so2(m, target) / std::sqrt(2.0) < 3 * se);
    CHECK(std::abs(m) > 2.0);
  }

  TEST_CASE("mixture sampling") {
    const LogNormalOnC a(Complex(1.0, 0.0), 0.1), b(Complex(3.0, 2.0), 0.1);
    const MixtureLogNormal only_first({1.0, 0.0}, {a, b});
    Rng rng(23);
    for (int i = 0; i < 10000; ++i) REQUIRE(only_first.draw_component(rng) == 0);

    const MixtureLogNormal mix({0.3, 0.7}, {a, b});
    Rng rng2(24);
    size_t first = 0;
    const size_t n = 100000;
    for (size_t i = 0; i < n; ++i) first += mix.draw_component(rng2) == 0;
    CHECK(std::abs(static_cast<double>(first) / n - 0.3) < 0.01);

    CHECK_THROWS_AS(MixtureLogNormal({0.5, 0.6}, {a, b}), UsageError);
    CHECK_THROWS_AS(MixtureLogNormal({}, {}), UsageError);
  }

  TEST_CASE("identical components match a single component") {
    const LogNormalOnC a(Complex(1.5, -0.4), 0.2);
    const auto single = sample_ln(a, 10000, 31);
    const auto mixed = sample_mln(MixtureLogNormal({0.4, 0.6}, {a, a}), 10000, 32);
    std::vector<double> su, ss, mu, ms;
    for (const auto& x : single) su.push_back(x.scale.log_r()), ss.push_back(x.theta());
    for (const auto& x : mixed) mu.push_back(x.scale.log_r()), ms.push_back(x.theta());
    CHECK(ks_pvalue(su, mu) > 0.01);
    CHECK(ks_pvalue(ss, ms) > 0.01);

    const MixtureLogNormal k1({1.0}, {a});
    const auto one = sample_mln(k1, 10000, 33);
    std::vector<double> ou;
    for (const auto& x : one) ou.push_back(x.scale.log_r());
    CHECK(ks_pvalue(su, ou) > 0.01);
  }

  TEST_CASE("fixed seed streams are bit identical") {
    const MixtureLogNormal mix({0.3, 0.7}, {LogNormalOnC(Complex(1.0, 0.0), 0.1), LogNormalOnC(Complex(2.0, 1.0), 0.3)});
    CHECK(sample_mln(mix, 1000, 7) == sample_mln(mix, 1000, 7));
    CHECK_FALSE(sample_mln(mix, 1000, 7) == sample_mln(mix, 1000, 8));
  }

  TEST_CASE("logpdf values") {
    const LogNormalOnC unit(Complex(1.0, 0.0), 1.0);
    CHECK(std::abs(logpdf(unit, Complex(1.0, 0.0)) - std::log(1.0 / (2 * kPiD))) < 1e-12);
    const MixtureLogNormal twin({0.5, 0.5}, {unit, unit});
    const Complex x(0.7, 2.0);
    CHECK(std::abs(logpdf(twin, x) - logpdf(unit, x)) < 1e-12);
  }

  TEST_CASE("density integrates to one over the fundamental domain") {
    Rng rng(41);
    for (int trial = 0; trial < 3; ++trial) {
      const double var = rng.uniform(0.05, 0.5);
      const LogNormalOnC d(testing::random_point(rng, 1.0), var);
      const double sd = std::sqrt(var);
      const double u0 = d.mean().scale.log_r() - 8 * sd, u1 = d.mean().scale.log_r() + 8 * sd;
      const double s0 = -std::sqrt(2.0) * kPiD, s1 = std::sqrt(2.0) * kPiD;
      const int n = 400;
      const double hu = (u1 - u0) / n, hs = (s1 - s0) / n;
      double total = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double u = u0 + (i + 0.5) * hu, s = s0 + (j + 0.5) * hs;
          total += std::exp(logpdf(d, Complex(Scale::from_log(u), Angle(s / std::sqrt(2.0))))) * hu * hs;
        }
      }
      CHECK(std::abs(total - 1.0) < 1e-3);
    }
  }

  TEST_CASE("mixture JSON round trip") {
    const MixtureLogNormal mix({0.25, 0.75}, {LogNormalOnC(Complex(1.5, 0.1), 0.2), LogNormalOnC(Complex(0.3, -2.0), 0.4)});
    const auto j = mix.to_json();
    CHECK(j.contains("weights"));
    CHECK(j.at("components").at(0).contains("mean_r"));
    CHECK(j.at("components").at(0).contains("mean_theta"));
    CHECK(j.at("components").at(0).contains("var"));
    const auto back = MixtureLogNormal::from_json(j);
    CHECK(back.weights() == mix.weights());
    for (size_t k = 0; k < 2; ++k) {
      CHECK(dist_c(back.components()[k].mean(), mix.components()[k].mean()) < 1e-12);
      CHECK(back.components()[k].cov_scale() == mix.components()[k].cov_scale());
    }
  }
}
