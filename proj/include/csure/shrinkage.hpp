#pragma once

// James-Stein shrinkage of Frechet means on C.
//
// Model: X_ij | M_i ~ LN(M_i, v I) for j = 1..N, and M_i ~ MLN(w, mu, D) with
// D = Diag(lambda_k I). Per component k, the MAP estimate moves the sample
// mean Xbar_i towards mu_k by the factor v / (lambda_k + v) in the log
// domain; (mu_k, lambda_k) are chosen by minimizing Stein's unbiased risk
// estimate, and the components are mixed with weights w.

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "csure/frechet.hpp"
#include "csure/golden_section.hpp"
#include "csure/manifold.hpp"

namespace csure {

/// Dimension of the log domain of one point of C. Enters SURE and the risk
/// through the trace of the sample-mean covariance, dim * v / N.
inline constexpr int kComplexTangentDim = 2;

struct HierarchicalModel {
  double v = 0;
  std::vector<double> w;
  std::vector<Complex> mu;
  std::vector<double> lambda;

  HierarchicalModel(double v, std::vector<double> w, std::vector<Complex> mu, std::vector<double> lambda);

  size_t components() const { return w.size(); }
  /// v == 0: no shrinkage, every estimate reduces to the sample mean.
  bool mle_mode() const { return v == 0.0; }
};

struct SampleSummary {
  std::vector<Complex> xbar;
  size_t n_samples = 1;

  SampleSummary(std::vector<Complex> xbar, size_t n_samples);

  /// observations[i] holds the N samples of dimension i; each Xbar_i is
  /// their equal-weight Frechet mean.
  static SampleSummary from_observations(const std::vector<std::vector<Complex>>& observations);

  size_t dim() const { return xbar.size(); }
};

/// Log-spaced bracket for the lambda search, refined by golden section.
struct LambdaSearch {
  double lambda_min = 1e-6;
  double lambda_max = 1e3;
  int grid_points = 61;
  double tolerance = 1e-8;
};

struct ComponentFit {
  Complex mu_hat;
  double lambda_hat = 0;
  double sure_value = 0;
  bool at_floor = false;    // objective increasing from lambda_min
  bool saturated = false;   // objective still decreasing at lambda_max
  bool small_dim = false;   // p < 2, shrinkage is vacuous
  bool mle_mode = false;    // v == 0, objective identically zero
  int iterations = 0;
  std::vector<ProbePoint> trace;
};

struct SureFit {
  std::vector<ComponentFit> components;

  nlohmann::json to_json() const;
  static SureFit from_json(const nlohmann::json& j);
};

/// How the K component log-contributions are mixed.
enum class MixingMode {
  /// exp of the w-weighted log-domain mean (wrap-aware on the angle).
  kAlgebra,
  /// Scale factor as the literal sum of K exponentials; angle as kAlgebra.
  kLiteralScaleSum,
};

/// exp((lambda/(lambda+v)) log xbar + (v/(lambda+v)) log mu), interpolating
/// the angle along the shorter arc.
Complex map_component_mean(const Complex& xbar, const Complex& mu, double lambda, double v);

double sure_objective(const SampleSummary& summary, const Complex& mu, double lambda, double v,
                      int tangent_dim = kComplexTangentDim);

/// SURE as a function of lambda alone, given the summed squared dispersion
/// of the sample means about mu.
double sure_profile(double dispersion, size_t p, size_t n_samples, double lambda, double v,
                    int tangent_dim = kComplexTangentDim);

ComponentFit fit_sure_component(const SampleSummary& summary, double v, const LambdaSearch& search = {},
                                int tangent_dim = kComplexTangentDim);

std::vector<Complex> csure_estimate(const SampleSummary& summary, const HierarchicalModel& model, const SureFit& fits,
                                    MixingMode mode = MixingMode::kAlgebra);

/// The shrinkage estimate for fixed (mu, lambda) applied to every dimension.
std::vector<Complex> map_estimate(const SampleSummary& summary, const Complex& mu, double lambda, double v);

double manifold_loss(std::span<const Complex> estimate, std::span<const Complex> truth);

double analytic_risk(const HierarchicalModel& model, std::span<const Complex> truth, size_t k, size_t n_samples,
                     int tangent_dim = kComplexTangentDim);

nlohmann::json to_json(const Complex& c);
Complex complex_from_json(const nlohmann::json& j);

}  // namespace csure
