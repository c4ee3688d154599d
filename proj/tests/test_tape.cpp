#include <doctest.h>

#include <functional>

#include "csure/ad/tape.hpp"
#include "csure/rng.hpp"
#include "test_support.hpp"

using namespace csure;
namespace ad = csure::ad;

namespace {

using Fn = std::function<ad::Var(ad::Tape&, std::span<const ad::Var>)>;

/// Compares tape adjoints with central differences of the same function
/// evaluated through a fresh tape.
void check_gradient(const Fn& f, std::vector<double> x, double tol = 1e-7) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (double xi : x) vars.push_back(tape.variable(xi));
  const auto out = f(tape, vars);
  const auto adj = tape.adjoints(out);

  auto eval = [&](const std::vector<double>& at) {
    ad::Tape t;
    std::vector<ad::Var> vs;
    for (double a : at) vs.push_back(t.variable(a));
    return f(t, vs).value();
  };
  const double h = 1e-6;
  for (size_t i = 0; i < x.size(); ++i) {
    auto hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    const double fd = (eval(hi) - eval(lo)) / (2 * h);
    INFO("coordinate " << i);
    CHECK(std::abs(adj[vars[i].index()] - fd) <= tol * std::max(1.0, std::abs(fd)));
  }
}

std::vector<double> random_vec(Rng& rng, size_t n, double lo = -1.5, double hi = 1.5) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_SUITE("tape") {
  TEST_CASE("arithmetic") {
    Rng rng(91);
    for (int t = 0; t < 20; ++t) {
      const auto x = random_vec(rng, 2, 0.5, 2.0);
      check_gradient([](ad::Tape&, auto v) { return v[0] * v[1] + v[0] / v[1] - v[1]; }, x);
      check_gradient([](ad::Tape&, auto v) { return -(2.0 * v[0] + 3.0) / 4.0 - (1.0 - v[1]) * v[0]; }, x);
      check_gradient([](ad::Tape&, auto v) { return 1.0 + v[0] * 5.0 - v[0] + (v[1] - 2.0); }, x);
    }
  }

  TEST_CASE("elementary functions") {
    Rng rng(92);
    for (int t = 0; t < 20; ++t) {
      const auto x = random_vec(rng, 1, 0.2, 2.0);
      check_gradient([](ad::Tape&, auto v) { return ad::exp(v[0]); }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::log(v[0]); }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::tanh(v[0]); }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::sqrt(v[0]); }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::exp(ad::tanh(v[0]) * v[0]); }, x);
    }
  }

  TEST_CASE("fused operations") {
    Rng rng(93);
    for (int t = 0; t < 20; ++t) {
      const auto x = random_vec(rng, 7);
      const std::vector<double> consts{0.3, -1.2, 2.0};
      check_gradient([&](ad::Tape&, auto v) { return ad::weighted_sum(v.first(3), consts); }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::affine(v.first(3), v.subspan(3, 3), v[6]); }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::softmax(v.first(4))[1] * 3.0; }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::norm2d(v[0], v[1]); }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::cross_entropy(v.first(5), 2); }, x);
      check_gradient([](ad::Tape&, auto v) { return ad::mean(v); }, x);
    }
  }

  TEST_CASE("double and Var overloads agree") {
    Rng rng(94);
    const auto x = random_vec(rng, 6);
    ad::Tape tape;
    std::vector<ad::Var> v;
    for (double a : x) v.push_back(tape.variable(a));
    const auto sd = ad::softmax(std::span<const double>(x));
    const auto sv = ad::softmax(std::span<const ad::Var>(v));
    for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(sd[i] - sv[i].value()) < 1e-15);
    CHECK(ad::cross_entropy(std::span<const double>(x), 3) == doctest::Approx(ad::cross_entropy(std::span<const ad::Var>(v), 3).value()).epsilon(1e-14));
    CHECK(ad::norm2d(3.0, 4.0) == 5.0);
  }

  TEST_CASE("cross entropy is stable for large logits") {
    const std::vector<double> big{1000.0, 0.0, -1000.0};
    CHECK(std::abs(ad::cross_entropy(std::span<const double>(big), 0)) < 1e-12);
    CHECK(std::abs(ad::cross_entropy(std::span<const double>(big), 1) - 1000.0) < 1e-9);
  }

  TEST_CASE("norm2d gradient at the origin is zero") {
    ad::Tape tape;
    const auto a = tape.variable(0.0), b = tape.variable(0.0);
    const auto adj = tape.adjoints(ad::norm2d(a, b));
    CHECK(adj[a.index()] == 0.0);
    CHECK(adj[b.index()] == 0.0);
  }

  TEST_CASE("shared subexpressions accumulate adjoints") {
    ad::Tape tape;
    const auto x = tape.variable(3.0);
    const auto y = x * x + x;
    const auto adj = tape.adjoints(y * y);
    // d/dx (x^2 + x)^2 = 2 (x^2 + x)(2x + 1)
    CHECK(adj[x.index()] == doctest::Approx(2 * 12 * 7));
    tape.clear();
    CHECK(tape.size() == 0);
  }
}
