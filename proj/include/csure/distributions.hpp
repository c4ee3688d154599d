#pragma once

// Log-Normal and mixture-of-Log-Normal distributions on C.
//
// X ~ LN(M, s I) means log X ~ N(log M, s I) in the 2-D log domain. Draws are
// taken unwrapped and then canonicalized, so the angle marginal is a wrapped
// normal; logpdf evaluates that wrapped density.

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "csure/manifold.hpp"
#include "csure/rng.hpp"

namespace csure {

class LogNormalOnC {
 public:
  LogNormalOnC(Complex mean, double cov_scale);

  const Complex& mean() const { return mean_; }
  double cov_scale() const { return cov_scale_; }

  Complex draw(Rng& rng) const;

 private:
  Complex mean_;
  double cov_scale_;
};

class MixtureLogNormal {
 public:
  MixtureLogNormal(std::vector<double> weights, std::vector<LogNormalOnC> components);

  size_t size() const { return components_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<LogNormalOnC>& components() const { return components_; }

  /// Index of a component drawn according to the weights.
  size_t draw_component(Rng& rng) const;
  Complex draw(Rng& rng) const;

  nlohmann::json to_json() const;
  static MixtureLogNormal from_json(const nlohmann::json& j);

 private:
  std::vector<double> weights_;
  std::vector<LogNormalOnC> components_;
};

std::vector<Complex> sample_ln(const LogNormalOnC& dist, size_t n, std::uint64_t seed);
std::vector<Complex> sample_mln(const MixtureLogNormal& dist, size_t n, std::uint64_t seed);

double logpdf(const LogNormalOnC& dist, const Complex& x);
double logpdf(const MixtureLogNormal& dist, const Complex& x);

}  // namespace csure
