#include "csure/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csure/errors.hpp"

namespace csure {

namespace {

// Images of the angle coordinate summed on each side of the principal cell.
constexpr int kWrapImages = 3;

}  // namespace

LogNormalOnC::LogNormalOnC(Complex mean, double cov_scale) : mean_(mean), cov_scale_(cov_scale) {
  if (!(cov_scale >= 0.0) || !std::isfinite(cov_scale)) {
    throw UsageError("LogNormalOnC: covariance scale must be finite and non-negative");
  }
}

Complex LogNormalOnC::draw(Rng& rng) const {
  const double sd = std::sqrt(cov_scale_);
  const double du = rng.normal(0.0, sd);
  const double ds = rng.normal(0.0, sd);
  return translate(mean_, LogCoordd(du, ds));
}

MixtureLogNormal::MixtureLogNormal(std::vector<double> weights, std::vector<LogNormalOnC> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw UsageError("MixtureLogNormal: need at least one component");
  if (weights_.size() != components_.size()) throw UsageError("MixtureLogNormal: weight/component count mismatch");
  for (double w : weights_) {
    if (!(w >= 0.0 && w <= 1.0)) throw UsageError("MixtureLogNormal: weights must lie in [0, 1]");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw UsageError("MixtureLogNormal: weights must sum to one");
}

size_t MixtureLogNormal::draw_component(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t k = 0; k < weights_.size(); ++k) {
    acc += weights_[k];
    if (u < acc) return k;
  }
  // Rounding left u above the last partial sum; take the last positive weight.
  for (size_t k = weights_.size(); k-- > 0;) {
    if (weights_[k] > 0.0) return k;
  }
  return weights_.size() - 1;
}

Complex MixtureLogNormal::draw(Rng& rng) const { return components_[draw_component(rng)].draw(rng); }

nlohmann::json MixtureLogNormal::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components_) {
    comps.push_back({{"mean_r", c.mean().r()}, {"mean_theta", c.mean().theta()}, {"var", c.cov_scale()}});
  }
  return {{"weights", weights_}, {"components", comps}};
}

MixtureLogNormal MixtureLogNormal::from_json(const nlohmann::json& j) {
  try {
    std::vector<LogNormalOnC> comps;
    for (const auto& c : j.at("components")) {
      comps.emplace_back(Complex(c.at("mean_r").get<double>(), c.at("mean_theta").get<double>()),
                         c.at("var").get<double>());
    }
    return MixtureLogNormal(j.at("weights").get<std::vector<double>>(), std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mixture JSON: ") + e.what());
  }
}

std::vector<Complex> sample_ln(const LogNormalOnC& dist, size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("sample_ln: n must be positive");
  Rng rng(seed);
  std::vector<Complex> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(dist.draw(rng));
  return out;
}

std::vector<Complex> sample_mln(const MixtureLogNormal& dist, size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("sample_mln: n must be positive");
  Rng rng(seed);
  std::vector<Complex> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(dist.draw(rng));
  return out;
}

double logpdf(const LogNormalOnC& dist, const Complex& x) {
  const double var = dist.cov_scale();
  if (var == 0.0) {
    return x == dist.mean() ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  const double du = x.scale.log_r() - dist.mean().scale.log_r();
  const double ds = kSqrt2<double> * angle_difference(x.angle, dist.mean().angle);
  const double period = 2.0 * kSqrt2<double> * kPi<double>;
  // Wrapped normal in the angle coordinate: log-sum-exp over images.
  double max_term = -std::numeric_limits<double>::infinity();
  double terms[2 * kWrapImages + 1];
  for (int k = -kWrapImages; k <= kWrapImages; ++k) {
    const double s = ds + period * k;
    terms[k + kWrapImages] = -0.5 * s * s / var;
    max_term = std::max(max_term, terms[k + kWrapImages]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  const double log_angle = max_term + std::log(acc);
  return -std::log(2.0 * kPi<double> * var) - 0.5 * du * du / var + log_angle;
}

double logpdf(const MixtureLogNormal& dist, const Complex& x) {
  std::vector<double> terms;
  terms.reserve(dist.size());
  for (size_t k = 0; k < dist.size(); ++k) {
    if (dist.weights()[k] == 0.0) continue;
    terms.push_back(std::log(dist.weights()[k]) + logpdf(dist.components()[k], x));
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

}  // namespace csure
