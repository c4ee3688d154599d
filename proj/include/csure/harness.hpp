#pragma once

// Monte Carlo checks of the two asymptotic claims behind C-SURE:
//  - SURE tracks the realized loss uniformly over (mu, lambda) as p grows;
//  - the SURE-tuned estimator has no larger risk than the Frechet mean.
//
// Gaps and risks are reported per dimension (divided by p), so that the
// p -> infinity behaviour is visible as convergence rather than growth.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csure/manifold.hpp"

namespace csure {

/// How the true means M_i are generated.
struct TruthSpec {
  enum class Kind { kBox, kLogNormal };
  Kind kind = Kind::kBox;
  /// kBox: log M_i uniform on [-h, h]^2 in log coordinates.
  double box_halfwidth = 2.0;
  /// kLogNormal: M_i ~ LN(prior_mu, prior_lambda I).
  Complex prior_mu = Complex(1.0, 0.0);
  double prior_lambda = 0.5;
};

struct ExperimentConfig {
  std::vector<size_t> p_grid{8, 32, 128, 512};
  size_t n_samples = 10;
  double v = 0.25;
  TruthSpec truth;
  size_t trials_theorem1 = 100;
  size_t trials_theorem2 = 200;
  std::uint64_t seed = 2020;

  // Probe grid for the supremum over (mu, lambda).
  int lambda_points = 61;
  double lambda_min = 1e-6;
  double lambda_max = 1e3;
  int mu_directions = 8;
  int mu_radii = 8;

  /// When set, the supremum is taken over this single (mu, lambda) only.
  std::optional<std::pair<Complex, double>> fixed_probe;

  size_t inner_resamples = 64;
  /// 0 = one worker per hardware thread.
  size_t threads = 0;

  /// Sets a field from its config-file key. Throws UsageError on unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  nlohmann::json to_json() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct TrialRecord {
  size_t p = 0;
  size_t trial = 0;
  double sup_gap = 0;    // sup over lambda of |SURE - loss| / p
  double risk_sure = 0;  // per-dimension risk of the C-SURE estimate
  double risk_mle = 0;   // per-dimension risk of the Frechet mean
  /// (SURE - loss) / p at the probe attaining the supremum. Not written to CSV.
  double signed_gap = 0;

  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    return a.p == b.p && a.trial == b.trial && a.sup_gap == b.sup_gap && a.risk_sure == b.risk_sure &&
           a.risk_mle == b.risk_mle;
  }
};

struct HarnessResult {
  std::vector<TrialRecord> records;
  /// Trials dropped because every probe violated ||log mu|| < max ||log Xbar||.
  size_t skipped = 0;
};

/// Per trial: sup over the probe grid of |SURE(mu, lambda) - loss| / p.
/// risk_sure / risk_mle hold the single-draw losses of the fitted estimator
/// and the Frechet mean.
HarnessResult run_theorem1(const ExperimentConfig& config);

/// Per trial: risks of the C-SURE estimate (K = 1) and of the Frechet mean,
/// each averaged over `inner_resamples` fresh observation sets for fixed M.
/// sup_gap is NaN.
HarnessResult run_theorem2(const ExperimentConfig& config);

/// Header `p,trial,sup_gap,risk_sure,risk_mle`, rows sorted by (p, trial),
/// 17 significant digits.
void emit_csv(std::vector<TrialRecord> records, const std::filesystem::path& path);
std::vector<TrialRecord> read_trial_csv(const std::filesystem::path& path);

struct PSummary {
  size_t p = 0;
  size_t trials = 0;
  double median_gap = 0;
  double mean_risk_sure = 0;
  double mean_risk_mle = 0;
  /// Standard error of the paired difference risk_mle - risk_sure.
  double stderr_diff = 0;
  double stderr_sure = 0;
  double dominance_fraction = 0;
};

std::vector<PSummary> summarize_by_p(const std::vector<TrialRecord>& records);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> xs);

}  // namespace csure
