#include <doctest.h>

#include "csure/distributions.hpp"
#include "csure/errors.hpp"
#include "csure/shrinkage.hpp"
#include "test_support.hpp"

using namespace csure;
constexpr double kPiD = testing::kPi;

namespace {

SampleSummary random_summary(Rng& rng, size_t p, size_t n, double spread = 1.0) {
  std::vector<Complex> xbar(p);
  for (auto& x : xbar) x = testing::random_point(rng, spread);
  return SampleSummary(std::move(xbar), n);
}

/// Angles confined to [-1, 1], far from the cut, where the log-domain
/// formulas are linear.
Complex local_point(Rng& rng, double log_r_half = 0.5) {
  return Complex(Scale::from_log(rng.uniform(-log_r_half, log_r_half)), Angle(rng.uniform(-1.0, 1.0)));
}

double dispersion(const SampleSummary& s, const Complex& mu) {
  double acc = 0;
  for (const auto& x : s.xbar) acc += std::pow(dist_c(x, mu), 2);
  return acc;
}

}  // namespace

TEST_SUITE("shrinkage") {
  TEST_CASE("HierarchicalModel validation") {
    const std::vector<Complex> mu{Complex(1.0, 0.0)};
    CHECK_NOTHROW(HierarchicalModel(0.0, {1.0}, mu, {1.0}));
    CHECK_THROWS_AS(HierarchicalModel(-1.0, {1.0}, mu, {1.0}), UsageError);
    CHECK_THROWS_AS(HierarchicalModel(1.0, {0.5}, mu, {1.0}), UsageError);
    CHECK_THROWS_AS(HierarchicalModel(1.0, {1.0}, mu, {0.0}), UsageError);
    CHECK_THROWS_AS(HierarchicalModel(1.0, {0.5, 0.5}, mu, {1.0}), UsageError);
  }

  TEST_CASE("map_component_mean examples") {
    Rng rng(61);
    for (int i = 0; i < 200; ++i) {
      const auto x = testing::random_point(rng), mu = testing::random_point(rng);
      REQUIRE(map_component_mean(x, mu, 0.7, 0.0) == x);
      REQUIRE(map_component_mean(x, mu, 0.0, 0.7) == mu);
      REQUIRE(dist_c(map_component_mean(x, mu, 1e-14, 0.7), mu) < 1e-12);
      // lambda == v: the log-domain midpoint, i.e. the equal-weight wFM.
      const std::vector<Complex> pair{x, mu};
      bool deg = false;
      const auto mid = wfm_c<double>(pair, ConvexWeights<double>::uniform(2), &deg);
      if (!deg) REQUIRE(dist_c(map_component_mean(x, mu, 0.4, 0.4), mid) < 1e-12);
    }
    CHECK_THROWS_AS(map_component_mean(Complex(1.0, 0.0), Complex(1.0, 0.0), 0.0, 0.0), UsageError);
  }

  TEST_CASE("sure_objective examples") {
    const Complex m(1.0, 0.3);
    const SampleSummary flat(std::vector<Complex>(4, m), 3);
    CHECK(sure_objective(flat, m, 0.5, 0.5) == 0.0);
    // p = 1, N = 1, v = 1, lambda = 1, squared log distance 4.
    const SampleSummary one({Complex(Scale::from_log(2.0), Angle(0.0))}, 1);
    CHECK(std::abs(sure_objective(one, Complex(1.0, 0.0), 1.0, 1.0) - 1.0) < 1e-15);
  }

  TEST_CASE("Frechet mean of the sample means minimizes SURE over mu") {
    Rng rng(62);
    const auto s = random_summary(rng, 12, 5);
    const auto fm = frechet_mean<double>(s.xbar);
    for (double lambda : {0.01, 0.3, 4.0}) {
      const double at_fm = sure_objective(s, fm, lambda, 0.25);
      for (int i = 0; i < 100; ++i) REQUIRE(at_fm <= sure_objective(s, testing::random_point(rng), lambda, 0.25));
    }
  }

  TEST_CASE("sure_objective is translation invariant") {
    Rng rng(63);
    for (int i = 0; i < 200; ++i) {
      auto s = random_summary(rng, 6, 4, 0.5);
      const auto mu = testing::random_point(rng, 0.5), g = testing::random_point(rng);
      const double before = sure_objective(s, mu, 0.3, 0.2);
      for (auto& x : s.xbar) x = compose(g, x);
      REQUIRE(std::abs(sure_objective(s, compose(g, mu), 0.3, 0.2) - before) < 1e-10);
    }
  }

  TEST_CASE("fit_sure_component matches the closed form and a dense grid") {
    Rng rng(64);
    for (int trial = 0; trial < 50; ++trial) {
      const size_t p = 4 + rng.below(60), n = 1 + rng.below(20);
      const double v = rng.uniform(0.05, 1.0);
      const auto s = random_summary(rng, p, n, rng.uniform(0.2, 2.0));
      const auto fit = fit_sure_component(s, v);
      const double S = dispersion(s, fit.mu_hat);
      // d/d lambda of SURE vanishes at lambda = S N / (p d) - v.
      const double closed = std::max(S * n / (p * 2.0) - v, 1e-6);
      auto f = [&](double l) { return sure_profile(S, p, n, l, v); };
      if (closed < 1e3 && closed > 1e-6) REQUIRE(testing::rel_err(fit.lambda_hat, closed) < 1e-4);
      // Brute-force oracle on 10^4 log-spaced points.
      double best = 0, best_f = INFINITY;
      for (int i = 0; i < 10000; ++i) {
        const double l = std::exp(std::log(1e-6) + (std::log(1e3) - std::log(1e-6)) * i / 9999.0);
        if (f(l) < best_f) best_f = f(l), best = l;
      }
      REQUIRE(fit.sure_value <= best_f + 1e-12 * std::abs(best_f));
      if (best > 1e-6 && best < 1e3) REQUIRE(testing::rel_err(fit.lambda_hat, best) < 1e-2 * std::max(1.0, best));
      for (const auto& probe : fit.trace) REQUIRE(fit.sure_value <= probe.f);
    }
  }

  TEST_CASE("fit_sure_component edge cases") {
    const Complex m(2.0, 1.0);
    const auto flat = fit_sure_component(SampleSummary(std::vector<Complex>(5, m), 10), 0.25);
    CHECK(flat.at_floor);
    CHECK(flat.lambda_hat == 1e-6);
    CHECK(dist_c(flat.mu_hat, m) < 1e-12);

    // lambda_hat grows with the dispersion.
    std::vector<double> lambdas;
    for (double spread : {0.5, 1.0, 2.0}) {
      std::vector<Complex> xs;
      for (int i = 0; i < 8; ++i) xs.push_back(Complex(Scale::from_log(spread * (i % 2 ? 1 : -1)), Angle(0.0)));
      lambdas.push_back(fit_sure_component(SampleSummary(xs, 4), 0.25).lambda_hat);
    }
    CHECK(lambdas[0] < lambdas[1]);
    CHECK(lambdas[1] < lambdas[2]);

    std::vector<Complex> wide;
    for (int i = 0; i < 8; ++i) wide.push_back(Complex(Scale::from_log(50.0 * (i % 2 ? 1 : -1)), Angle(0.0)));
    CHECK(fit_sure_component(SampleSummary(wide, 100), 0.01).saturated);

    CHECK(fit_sure_component(SampleSummary({m}, 3), 0.25).small_dim);
    const auto mle = fit_sure_component(SampleSummary({m, Complex(1.0, 0.0)}, 3), 0.0);
    CHECK(mle.mle_mode);
  }

  TEST_CASE("fit_sure_component is invariant under relabeling") {
    Rng rng(65);
    auto s = random_summary(rng, 20, 6);
    const auto a = fit_sure_component(s, 0.3);
    std::reverse(s.xbar.begin(), s.xbar.end());
    const auto b = fit_sure_component(s, 0.3);
    CHECK(testing::rel_err(a.lambda_hat, b.lambda_hat) < 1e-9);
    CHECK(dist_c(a.mu_hat, b.mu_hat) < 1e-12);
  }

  TEST_CASE("csure_estimate reductions") {
    Rng rng(66);
    const auto s = random_summary(rng, 10, 5);
    const auto fit = fit_sure_component(s, 0.5);
    SureFit one{{fit}};
    const HierarchicalModel k1(0.5, {1.0}, {fit.mu_hat}, {fit.lambda_hat});
    const auto est = csure_estimate(s, k1, one);
    const auto ref = map_estimate(s, fit.mu_hat, fit.lambda_hat, 0.5);
    for (size_t i = 0; i < s.dim(); ++i) CHECK(dist_c(est[i], ref[i]) < 1e-15);

    SureFit two{{fit, fit}};
    const HierarchicalModel k2(0.5, {0.5, 0.5}, {fit.mu_hat, fit.mu_hat}, {fit.lambda_hat, fit.lambda_hat});
    const auto est2 = csure_estimate(s, k2, two);
    for (size_t i = 0; i < s.dim(); ++i) CHECK(dist_c(est2[i], est[i]) < 1e-12);

    // v = 0 returns the sample means for any K and w.
    auto other = fit;
    other.mu_hat = testing::random_point(rng);
    const HierarchicalModel mle(0.0, {0.2, 0.8}, {fit.mu_hat, other.mu_hat}, {0.3, 2.0});
    const auto same = csure_estimate(s, mle, SureFit{{fit, other}});
    for (size_t i = 0; i < s.dim(); ++i) {
      CHECK(std::abs(same[i].scale.log_r() - s.xbar[i].scale.log_r()) <= 1e-12);
      CHECK(std::abs(same[i].theta() - s.xbar[i].theta()) <= 1e-12);
    }
  }

  TEST_CASE("shrinkage moves estimates towards the mixed prior mean") {
    Rng rng(67);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Complex> xs(8);
      for (auto& x : xs) x = local_point(rng);
      const SampleSummary s(xs, 4);
      auto f1 = fit_sure_component(s, 0.4);
      auto f2 = f1;
      f2.mu_hat = local_point(rng);
      const double w0 = rng.uniform(0.1, 0.9);
      const HierarchicalModel model(0.4, {w0, 1 - w0}, {f1.mu_hat, f2.mu_hat}, {f1.lambda_hat, f1.lambda_hat});
      const auto est = csure_estimate(s, model, SureFit{{f1, f2}});
      const std::vector<Complex> mus{f1.mu_hat, f2.mu_hat};
      bool deg = false;
      const auto center = wfm_c<double>(mus, ConvexWeights<double>(Eigen::Vector2d(w0, 1 - w0)), &deg);
      if (deg) continue;
      for (size_t i = 0; i < s.dim(); ++i) REQUIRE(dist_c(est[i], center) <= dist_c(s.xbar[i], center) + 1e-12);
    }
  }

  TEST_CASE("literal scale-sum mixing keeps the algebra angle") {
    Rng rng(68);
    const auto s = random_summary(rng, 5, 3);
    const auto f = fit_sure_component(s, 0.5);
    const HierarchicalModel model(0.5, {0.5, 0.5}, {f.mu_hat, f.mu_hat}, {f.lambda_hat, f.lambda_hat});
    const auto alg = csure_estimate(s, model, SureFit{{f, f}});
    const auto lit = csure_estimate(s, model, SureFit{{f, f}}, MixingMode::kLiteralScaleSum);
    for (size_t i = 0; i < s.dim(); ++i) {
      CHECK(std::abs(lit[i].theta() - alg[i].theta()) < 1e-15);
      CHECK(std::abs(lit[i].r() - 2 * std::exp(0.5 * alg[i].scale.log_r())) < 1e-12 * lit[i].r());
    }
  }

  TEST_CASE("manifold_loss") {
    Rng rng(69);
    std::vector<Complex> a(7), b(7);
    for (auto& x : a) x = testing::random_point(rng);
    for (auto& x : b) x = testing::random_point(rng);
    CHECK(manifold_loss(a, a) == 0.0);
    const std::vector<Complex> one{Complex(1.0, 0.0)}, scaled{Complex(std::exp(1.0), 0.0)};
    CHECK(std::abs(manifold_loss(one, scaled) - 1.0) < 1e-15);
    double ref = 0;
    for (size_t i = 0; i < 7; ++i) {
      ref += std::pow(a[i].scale.log_r() - b[i].scale.log_r(), 2) + std::pow(testing::brute_dist_so2(a[i].theta(), b[i].theta()), 2);
    }
    CHECK(std::abs(manifold_loss(a, b) - ref) < 1e-12);
    CHECK_THROWS_AS(manifold_loss(a, std::span<const Complex>(b).first(3)), UsageError);
  }

  TEST_CASE("analytic_risk") {
    const Complex m(1.0, 0.0);
    const HierarchicalModel model(1.0, {1.0}, {m}, {1.0});
    const std::vector<Complex> truth{m};
    // A single real coordinate: (1/4)(0 + 1).
    CHECK(std::abs(analytic_risk(model, truth, 0, 1, 1) - 0.25) < 1e-15);
    // Both log coordinates of C carry the sampling variance.
    CHECK(std::abs(analytic_risk(model, truth, 0, 1) - 0.5) < 1e-15);
    const HierarchicalModel tight(1.0, {1.0}, {m}, {1e-12});
    CHECK(analytic_risk(tight, std::vector<Complex>(5, m), 0, 4) < 1e-20);
  }

  TEST_CASE("analytic_risk matches Monte Carlo loss") {
    Rng rng(70);
    const size_t p = 6, n = 5;
    const double v = 0.3, lambda = 0.7;
    std::vector<Complex> truth(p);
    for (auto& x : truth) x = local_point(rng);
    const Complex mu = local_point(rng);
    const HierarchicalModel model(v, {1.0}, {mu}, {lambda});
    std::vector<double> losses;
    for (int t = 0; t < 10000; ++t) {
      std::vector<std::vector<Complex>> obs(p);
      for (size_t i = 0; i < p; ++i) obs[i] = sample_ln(LogNormalOnC(truth[i], v), n, derive_seed(70, t, i));
      const auto s = SampleSummary::from_observations(obs);
      losses.push_back(manifold_loss(map_estimate(s, mu, lambda, v), truth));
    }
    const auto ms = testing::mean_stderr(losses);
    CHECK(std::abs(ms.mean - analytic_risk(model, truth, 0, n)) <= 3 * ms.stderr_);
  }

  TEST_CASE("SureFit JSON round trip is exact") {
    Rng rng(71);
    const auto f = fit_sure_component(random_summary(rng, 9, 4), 0.25);
    const auto back = SureFit::from_json(SureFit{{f}}.to_json());
    CHECK(back.components[0].lambda_hat == f.lambda_hat);
    CHECK(back.components[0].sure_value == f.sure_value);
    CHECK(back.components[0].mu_hat == f.mu_hat);
  }
}
