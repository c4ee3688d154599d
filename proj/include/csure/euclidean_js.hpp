#pragma once

// Classical James-Stein machinery in R^p: the estimator, the MAP estimate
// under a N(mu 1, tau^2 I) prior, and Stein's unbiased risk estimate of the
// MAP family. Serves as the flat-space reference for the manifold version.

#include <Eigen/Core>

#include "csure/errors.hpp"

namespace csure::euclidean {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Observation {
  Vector<Scalar> x;
  Scalar sigma2 = 1;

  Observation(Vector<Scalar> x_, Scalar sigma2_) : x(std::move(x_)), sigma2(sigma2_) {
    if (x.size() < 1) throw UsageError("Observation: dimension must be at least 1");
    if (!(sigma2 > 0)) throw UsageError("Observation: sigma2 must be positive");
  }

  Eigen::Index dim() const { return x.size(); }
};

template <typename Scalar>
struct Prior {
  Scalar mu = 0;
  Scalar tau2 = 0;

  Prior(Scalar mu_, Scalar tau2_) : mu(mu_), tau2(tau2_) {
    if (!(tau2 >= 0)) throw UsageError("Prior: tau2 must be non-negative");
  }
};

template <typename Scalar>
struct JsEstimate {
  Vector<Scalar> value;
  bool singular = false;       // ||x|| == 0
  bool below_dominance = false;  // p < 3
};

/// (1 - (p - 2) sigma^2 / ||x||^2) x. Plain, not positive-part.
template <typename Scalar>
JsEstimate<Scalar> js_estimate(const Observation<Scalar>& obs) {
  JsEstimate<Scalar> out;
  const auto p = obs.dim();
  out.below_dominance = p < 3;
  const Scalar norm2 = obs.x.squaredNorm();
  if (norm2 == Scalar(0)) {
    out.value = Vector<Scalar>::Zero(p);
    out.singular = true;
    return out;
  }
  const Scalar factor = Scalar(1) - Scalar(p - 2) * obs.sigma2 / norm2;
  out.value = factor * obs.x;
  return out;
}

/// Shrinkage factor tau^2 / (tau^2 + sigma^2) of the MAP estimate.
template <typename Scalar>
Scalar map_factor(const Observation<Scalar>& obs, const Prior<Scalar>& prior) {
  return prior.tau2 / (prior.tau2 + obs.sigma2);
}

template <typename Scalar>
Vector<Scalar> map_estimate(const Observation<Scalar>& obs, const Prior<Scalar>& prior) {
  const Scalar b = map_factor(obs, prior);
  return (b * obs.x.array() + (Scalar(1) - b) * prior.mu).matrix();
}

/// -p sigma^2 + ||theta_hat - x||^2 + 2 sigma^2 * div(theta_hat), with the
/// divergence p * tau^2 / (tau^2 + sigma^2) for the MAP family.
template <typename Scalar>
Scalar sure_euclidean(const Observation<Scalar>& obs, const Prior<Scalar>& prior) {
  const auto p = static_cast<Scalar>(obs.dim());
  const Scalar b = map_factor(obs, prior);
  const Scalar residual = (map_estimate(obs, prior) - obs.x).squaredNorm();
  return -p * obs.sigma2 + residual + 2 * obs.sigma2 * p * b;
}

}  // namespace csure::euclidean
