#include "csure/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csure/errors.hpp"

namespace csure {

HierarchicalModel::HierarchicalModel(double v_, std::vector<double> w_, std::vector<Complex> mu_,
                                     std::vector<double> lambda_)
    : v(v_), w(std::move(w_)), mu(std::move(mu_)), lambda(std::move(lambda_)) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw UsageError("HierarchicalModel: v must be finite and non-negative");
  if (w.empty()) throw UsageError("HierarchicalModel: need at least one component");
  if (mu.size() != w.size() || lambda.size() != w.size()) {
    throw UsageError("HierarchicalModel: w, mu and lambda must have K entries");
  }
  for (double wk : w) {
    if (!(wk >= 0.0 && wk <= 1.0)) throw UsageError("HierarchicalModel: weights must lie in [0, 1]");
  }
  if (std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) > 1e-9) {
    throw UsageError("HierarchicalModel: weights must sum to one");
  }
  for (double l : lambda) {
    if (!(l > 0.0)) throw UsageError("HierarchicalModel: lambda must be positive");
  }
}

SampleSummary::SampleSummary(std::vector<Complex> xbar_, size_t n_samples_)
    : xbar(std::move(xbar_)), n_samples(n_samples_) {
  if (xbar.empty()) throw UsageError("SampleSummary: need at least one dimension");
  if (n_samples < 1) throw UsageError("SampleSummary: need at least one sample");
}

SampleSummary SampleSummary::from_observations(const std::vector<std::vector<Complex>>& observations) {
  if (observations.empty()) throw UsageError("SampleSummary: need at least one dimension");
  const size_t n = observations.front().size();
  std::vector<Complex> xbar;
  xbar.reserve(observations.size());
  for (const auto& row : observations) {
    if (row.size() != n || n == 0) throw UsageError("SampleSummary: every dimension needs the same positive N");
    xbar.push_back(frechet_mean<double>(row));
  }
  return SampleSummary(std::move(xbar), n);
}

Complex map_component_mean(const Complex& xbar, const Complex& mu, double lambda, double v) {
  if (!(lambda + v > 0.0)) throw UsageError("map_component_mean: lambda + v must be positive");
  if (v == 0.0) return xbar;
  if (lambda == 0.0) return mu;
  const double factor = lambda / (lambda + v);
  return translate(mu, LogCoordd(factor * log_difference(xbar, mu)));
}

double sure_profile(double dispersion, size_t p, size_t n_samples, double lambda, double v, int tangent_dim) {
  const double denom = lambda + v;
  if (!(denom > 0.0)) throw UsageError("sure_objective: lambda + v must be positive");
  const double variance_term = static_cast<double>(p) * tangent_dim * (lambda * lambda - v * v) /
                               static_cast<double>(n_samples);
  return v / (denom * denom) * (v * dispersion + variance_term);
}

double sure_objective(const SampleSummary& summary, const Complex& mu, double lambda, double v, int tangent_dim) {
  double dispersion = 0.0;
  for (const auto& x : summary.xbar) dispersion += log_difference(x, mu).squaredNorm();
  return sure_profile(dispersion, summary.dim(), summary.n_samples, lambda, v, tangent_dim);
}

ComponentFit fit_sure_component(const SampleSummary& summary, double v, const LambdaSearch& search, int tangent_dim) {
  if (!(v >= 0.0)) throw UsageError("fit_sure_component: v must be non-negative");
  if (!(search.lambda_min > 0.0 && search.lambda_max > search.lambda_min && search.grid_points >= 3)) {
    throw UsageError("fit_sure_component: invalid lambda search bracket");
  }
  ComponentFit fit;
  fit.small_dim = summary.dim() < 2;
  // The mu-coefficient v/(lambda+v)^2 does not depend on i, so the argmin over
  // mu is the Frechet mean of the sample means for every lambda.
  fit.mu_hat = frechet_mean<double>(summary.xbar);
  double dispersion = 0.0;
  for (const auto& x : summary.xbar) dispersion += log_difference(x, fit.mu_hat).squaredNorm();

  auto objective = [&](double lambda) {
    return sure_profile(dispersion, summary.dim(), summary.n_samples, lambda, v, tangent_dim);
  };

  if (v == 0.0) {
    fit.mle_mode = true;
    fit.lambda_hat = search.lambda_max;
    fit.sure_value = 0.0;
    return fit;
  }

  const int n = search.grid_points;
  const double log_lo = std::log(search.lambda_min);
  const double log_hi = std::log(search.lambda_max);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = i == 0 ? search.lambda_min
                     : (i == n - 1 ? search.lambda_max : std::exp(log_lo + (log_hi - log_lo) * i / (n - 1)));
    fit.trace.push_back({grid[i], objective(grid[i])});
  }
  const auto best_it = std::min_element(fit.trace.begin(), fit.trace.end(),
                                        [](const ProbePoint& a, const ProbePoint& b) { return a.f < b.f; });
  const int best = static_cast<int>(best_it - fit.trace.begin());

  if (best == n - 1) {
    fit.saturated = true;
    fit.lambda_hat = search.lambda_max;
    fit.sure_value = best_it->f;
    return fit;
  }

  const double lo = grid[std::max(best - 1, 0)];
  const double hi = grid[best + 1];
  const auto refined = golden_section_minimize(objective, lo, hi, search.tolerance, &fit.trace);
  fit.iterations = refined.iterations;

  const auto overall = std::min_element(fit.trace.begin(), fit.trace.end(),
                                        [](const ProbePoint& a, const ProbePoint& b) { return a.f < b.f; });
  fit.lambda_hat = overall->x;
  fit.sure_value = overall->f;
  fit.at_floor = fit.lambda_hat == search.lambda_min;
  return fit;
}

std::vector<Complex> map_estimate(const SampleSummary& summary, const Complex& mu, double lambda, double v) {
  std::vector<Complex> out;
  out.reserve(summary.dim());
  for (const auto& x : summary.xbar) out.push_back(map_component_mean(x, mu, lambda, v));
  return out;
}

std::vector<Complex> csure_estimate(const SampleSummary& summary, const HierarchicalModel& model, const SureFit& fits,
                                    MixingMode mode) {
  const size_t K = model.components();
  if (fits.components.size() != K) throw UsageError("csure_estimate: fit count does not match the model");
  if (model.mle_mode()) return summary.xbar;

  const auto weights = ConvexWeights<double>(Eigen::Map<const Eigen::VectorXd>(model.w.data(), K));
  std::vector<Complex> contributions(K);
  std::vector<Complex> out;
  out.reserve(summary.dim());
  for (const auto& x : summary.xbar) {
    for (size_t k = 0; k < K; ++k) {
      const auto& f = fits.components[k];
      contributions[k] = map_component_mean(x, f.mu_hat, f.lambda_hat, model.v);
    }
    Complex mixed = wfm_c<double>(contributions, weights);
    if (mode == MixingMode::kLiteralScaleSum) {
      double r = 0.0;
      for (size_t k = 0; k < K; ++k) r += std::exp(model.w[k] * contributions[k].scale.log_r());
      mixed.scale = Scale(r);
    }
    out.push_back(mixed);
  }
  return out;
}

double manifold_loss(std::span<const Complex> estimate, std::span<const Complex> truth) {
  if (estimate.size() != truth.size()) throw UsageError("manifold_loss: length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < estimate.size(); ++i) {
    const double d = dist_c(estimate[i], truth[i]);
    acc += d * d;
  }
  return acc;
}

double analytic_risk(const HierarchicalModel& model, std::span<const Complex> truth, size_t k, size_t n_samples,
                     int tangent_dim) {
  if (k >= model.components()) throw UsageError("analytic_risk: component index out of range");
  if (n_samples < 1) throw UsageError("analytic_risk: need at least one sample");
  const double v = model.v;
  const double lambda = model.lambda[k];
  const double coeff = v / ((lambda + v) * (lambda + v));
  double acc = 0.0;
  for (const auto& m : truth) {
    const double bias = log_difference(model.mu[k], m).squaredNorm();
    acc += coeff * (v * bias + tangent_dim * lambda * lambda / static_cast<double>(n_samples));
  }
  return acc;
}

// log r rather than r so that values round-trip bit-exactly.
nlohmann::json to_json(const Complex& c) { return {{"log_r", c.scale.log_r()}, {"theta", c.theta()}}; }

Complex complex_from_json(const nlohmann::json& j) {
  return Complex(Scale::from_log(j.at("log_r").get<double>()), Angle(j.at("theta").get<double>()));
}

nlohmann::json SureFit::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components) {
    comps.push_back({{"mu_hat", csure::to_json(c.mu_hat)},
                     {"lambda_hat", c.lambda_hat},
                     {"sure_value", c.sure_value},
                     {"at_floor", c.at_floor},
                     {"saturated", c.saturated},
                     {"small_dim", c.small_dim},
                     {"mle_mode", c.mle_mode},
                     {"iterations", c.iterations}});
  }
  return {{"components", comps}};
}

SureFit SureFit::from_json(const nlohmann::json& j) {
  SureFit fit;
  for (const auto& c : j.at("components")) {
    ComponentFit f;
    f.mu_hat = complex_from_json(c.at("mu_hat"));
    f.lambda_hat = c.at("lambda_hat").get<double>();
    f.sure_value = c.at("sure_value").get<double>();
    f.at_floor = c.value("at_floor", false);
    f.saturated = c.value("saturated", false);
    f.small_dim = c.value("small_dim", false);
    f.mle_mode = c.value("mle_mode", false);
    f.iterations = c.value("iterations", 0);
    fit.components.push_back(std::move(f));
  }
  return fit;
}

}  // namespace csure
