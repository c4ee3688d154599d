#include <doctest.h>

#include <stdexcept>

#include "csure/manifold.hpp"
#include "test_support.hpp"

using namespace csure;
constexpr double kPiD = testing::kPi;

TEST_SUITE("manifold") {
  TEST_CASE("canonicalize_angle examples") {
    CHECK(canonicalize_angle(0.0).theta() == 0.0);
    CHECK(canonicalize_angle(3 * kPiD).theta() == doctest::Approx(kPiD).epsilon(1e-15));
    CHECK(canonicalize_angle(-kPiD).theta() == doctest::Approx(kPiD).epsilon(1e-15));
    // -7.5 + 2 pi = -1.2168...
    const double got = canonicalize_angle(-7.5).theta();
    CHECK(std::abs(got - testing::brute_canonical(-7.5)) < 1e-12);
    CHECK(std::abs(got - (-7.5 + 2 * kPiD)) < 1e-12);
  }

  TEST_CASE("canonicalize_angle rejects non-finite input") {
    CHECK_THROWS_AS(canonicalize_angle(std::nan("")), std::domain_error);
    CHECK_THROWS_AS(canonicalize_angle(INFINITY), std::domain_error);
  }

  TEST_CASE("canonicalize_angle range and congruence on random inputs") {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
      const double raw = rng.uniform(-60.0, 60.0);
      const double t = canonicalize_angle(raw).theta();
      REQUIRE(t > -kPiD);
      REQUIRE(t <= kPiD);
      const double k = (raw - t) / (2 * kPiD);
      REQUIRE(std::abs(k - std::round(k)) < 1e-9);
      REQUIRE(std::abs(t - testing::brute_canonical(raw)) < 1e-9);
    }
  }

  TEST_CASE("dist_so2 examples") {
    CHECK(dist_so2(Angle(0.0), Angle(0.0)) == 0.0);
    CHECK(std::abs(dist_so2(Angle(kPiD - 0.1), Angle(-kPiD + 0.1)) - std::sqrt(2.0) * 0.2) < 1e-12);
    const double d = dist_so2(Angle(0.0), Angle(kPiD / 2));
    CHECK(std::abs(d - std::sqrt(2.0) * kPiD / 2) < 1e-12);
    CHECK(2 * std::sqrt(2.0) * kPiD - d > d);
  }

  TEST_CASE("dist_p1 and dist_c examples") {
    CHECK(dist_p1(Scale(1.0), Scale(1.0)) == 0.0);
    CHECK(dist_p1(Scale(1.0), Scale(std::exp(1.0))) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(dist_p1(Scale(0.5), Scale(2.0)) - std::log(4.0)) < 1e-12);
    const Complex a(1.0, 0.0);
    CHECK(dist_c(a, a) == 0.0);
    CHECK(std::abs(dist_c(a, Complex(std::exp(1.0), 0.0)) - 1.0) < 1e-12);
    CHECK(std::abs(dist_c(a, Complex(std::exp(1.0), kPiD / 2)) - std::sqrt(1 + kPiD * kPiD / 2)) < 1e-12);
  }

  TEST_CASE("metric axioms on random triples") {
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
      const auto a = testing::random_point(rng), b = testing::random_point(rng), c = testing::random_point(rng);
      REQUIRE(dist_so2(a.angle, b.angle) == dist_so2(b.angle, a.angle));
      REQUIRE(dist_p1(a.scale, b.scale) == dist_p1(b.scale, a.scale));
      REQUIRE(dist_c(a, b) == dist_c(b, a));
      REQUIRE(dist_so2(a.angle, c.angle) <= dist_so2(a.angle, b.angle) + dist_so2(b.angle, c.angle) + 1e-12);
      REQUIRE(dist_p1(a.scale, c.scale) <= dist_p1(a.scale, b.scale) + dist_p1(b.scale, c.scale) + 1e-12);
      REQUIRE(dist_c(a, c) <= dist_c(a, b) + dist_c(b, c) + 1e-12);
      REQUIRE(std::abs(dist_so2(a.angle, b.angle) - testing::brute_dist_so2(a.theta(), b.theta())) < 1e-12);
      REQUIRE(dist_so2(a.angle, b.angle) <= std::sqrt(2.0) * kPiD);
    }
  }

  TEST_CASE("dist_so2 is invariant under 2 pi shifts and maximal only at antipodes") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
      const double t = rng.uniform(-kPiD, kPiD);
      for (int k = -3; k <= 3; ++k) REQUIRE(dist_so2(Angle(t), canonicalize_angle(t + 2 * kPiD * k)) < 1e-12);
      const double other = rng.uniform(-kPiD, kPiD);
      if (std::abs(std::abs(canonical_theta(t - other)) - kPiD) > 1e-6) {
        REQUIRE(dist_so2(Angle(t), Angle(other)) < std::sqrt(2.0) * kPiD);
      }
    }
    CHECK(std::abs(dist_so2(Angle(0.3), Angle(0.3 - kPiD)) - std::sqrt(2.0) * kPiD) < 1e-12);
  }

  TEST_CASE("log and exp maps") {
    const auto id = log_map(Complex(1.0, 0.0));
    CHECK(id(0) == 0.0);
    CHECK(id(1) == 0.0);
    const auto q = exp_map(LogCoordd(LogCoordd(0, 0) + LogCoordd(0, std::sqrt(2.0) * kPiD / 2)));
    CHECK(std::abs(q.theta() - kPiD / 2) < 1e-15);
    const auto l = log_map(Complex(2.0, kPiD / 3));
    CHECK(std::abs(l(0) - std::log(2.0)) < 1e-15);
    CHECK(std::abs(l(1) - std::sqrt(2.0) * kPiD / 3) < 1e-15);

    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
      const auto x = testing::random_point(rng);
      const auto y = exp_map(log_map(x));
      REQUIRE(std::abs(y.scale.log_r() - x.scale.log_r()) < 1e-15);
      REQUIRE(std::abs(y.theta() - x.theta()) < 1e-14);
      // exp(log a + log b) is the complex product.
      const auto a = testing::random_point(rng, 1.0), b = testing::random_point(rng, 1.0);
      const auto ab = compose(a, b).to_complex();
      const auto ref = a.to_complex() * b.to_complex();
      REQUIRE(std::abs(ab - ref) <= 1e-12 * std::abs(ref));
    }
  }

  TEST_CASE("cartesian round trip and degenerate scale") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
      const double re = rng.uniform(-5, 5), im = rng.uniform(-5, 5);
      const auto c = Complex::from_cartesian(re, im).to_complex();
      const double r = std::hypot(re, im);
      REQUIRE(std::abs(c.real() - re) <= 1e-12 * r);
      REQUIRE(std::abs(c.imag() - im) <= 1e-12 * r);
    }
    const auto zero = Complex::from_cartesian(0.0, 0.0);
    CHECK(zero.degenerate());
    CHECK(zero.r() == doctest::Approx(1e-6));
    CHECK_FALSE(Complex::from_cartesian(1.0, 0.0).degenerate());
  }

  TEST_CASE("left translation invariance of dist_c") {
    Rng rng(6);
    for (int i = 0; i < 10000; ++i) {
      const auto a = testing::random_point(rng), b = testing::random_point(rng), g = testing::random_point(rng);
      REQUIRE(std::abs(dist_c(compose(g, a), compose(g, b)) - dist_c(a, b)) < 1e-12);
    }
  }

  TEST_CASE("log_difference norm is dist_c") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
      const auto a = testing::random_point(rng), b = testing::random_point(rng);
      REQUIRE(std::abs(log_difference(a, b).norm() - dist_c(a, b)) < 1e-12);
      const auto back = translate(b, log_difference(a, b));
      REQUIRE(dist_c(back, a) < 1e-12);
    }
  }
}
