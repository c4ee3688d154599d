#include "csure/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "csure/config.hpp"
#include "csure/distributions.hpp"
#include "csure/errors.hpp"
#include "csure/frechet.hpp"
#include "csure/rng.hpp"
#include "csure/shrinkage.hpp"

namespace csure {

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto positive = [&](long long n) {
    if (n < 1) throw UsageError(key + " must be positive");
    return static_cast<size_t>(n);
  };
  if (key == "p_grid") {
    p_grid = parse_size_list(key, value);
  } else if (key == "N" || key == "n_samples") {
    n_samples = positive(parse_int(key, value));
  } else if (key == "v") {
    v = parse_double(key, value);
    if (!(v >= 0.0)) throw UsageError("v must be non-negative");
  } else if (key == "truth") {
    if (value == "box") {
      truth.kind = TruthSpec::Kind::kBox;
    } else if (value == "lognormal") {
      truth.kind = TruthSpec::Kind::kLogNormal;
    } else {
      throw UsageError("truth must be 'box' or 'lognormal'");
    }
  } else if (key == "box_halfwidth") {
    truth.box_halfwidth = parse_double(key, value);
    if (!(truth.box_halfwidth > 0.0)) throw UsageError("box_halfwidth must be positive");
  } else if (key == "prior_mu_r") {
    truth.prior_mu = Complex(parse_double(key, value), truth.prior_mu.theta());
  } else if (key == "prior_mu_theta") {
    truth.prior_mu = Complex(truth.prior_mu.scale, Angle(parse_double(key, value)));
  } else if (key == "prior_lambda") {
    truth.prior_lambda = parse_double(key, value);
    if (!(truth.prior_lambda > 0.0)) throw UsageError("prior_lambda must be positive");
  } else if (key == "trials") {
    trials_theorem1 = trials_theorem2 = positive(parse_int(key, value));
  } else if (key == "trials_theorem1") {
    trials_theorem1 = positive(parse_int(key, value));
  } else if (key == "trials_theorem2") {
    trials_theorem2 = positive(parse_int(key, value));
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "lambda_points") {
    lambda_points = static_cast<int>(positive(parse_int(key, value)));
  } else if (key == "lambda_min") {
    lambda_min = parse_double(key, value);
  } else if (key == "lambda_max") {
    lambda_max = parse_double(key, value);
  } else if (key == "mu_directions") {
    mu_directions = static_cast<int>(positive(parse_int(key, value)));
  } else if (key == "mu_radii") {
    mu_radii = static_cast<int>(positive(parse_int(key, value)));
  } else if (key == "inner_resamples") {
    inner_resamples = positive(parse_int(key, value));
  } else if (key == "threads") {
    const auto n = parse_int(key, value);
    if (n < 0) throw UsageError("threads must be non-negative");
    threads = static_cast<size_t>(n);
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
  if (!(lambda_min > 0.0 && lambda_max > lambda_min)) throw UsageError("need 0 < lambda_min < lambda_max");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = {{"p_grid", p_grid},
                      {"N", n_samples},
                      {"v", v},
                      {"truth", truth.kind == TruthSpec::Kind::kBox ? "box" : "lognormal"},
                      {"box_halfwidth", truth.box_halfwidth},
                      {"prior_mu_r", truth.prior_mu.r()},
                      {"prior_mu_theta", truth.prior_mu.theta()},
                      {"prior_lambda", truth.prior_lambda},
                      {"trials_theorem1", trials_theorem1},
                      {"trials_theorem2", trials_theorem2},
                      {"seed", seed},
                      {"lambda_points", lambda_points},
                      {"lambda_min", lambda_min},
                      {"lambda_max", lambda_max},
                      {"mu_directions", mu_directions},
                      {"mu_radii", mu_radii},
                      {"inner_resamples", inner_resamples}};
  return j;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig config;
  for (const auto& [key, value] : read_key_values(path)) config.set(key, value);
  return config;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

struct Job {
  size_t p;
  size_t trial;
};

std::vector<Job> make_jobs(const std::vector<size_t>& p_grid, size_t trials) {
  std::vector<size_t> ps = p_grid;
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  std::vector<Job> jobs;
  for (size_t p : ps) {
    for (size_t t = 0; t < trials; ++t) jobs.push_back({p, t});
  }
  return jobs;
}

/// Runs fn(job) for every job on a small worker pool. Each job writes only
/// its own slot, so the merged output is independent of scheduling.
template <typename Fn>
void run_jobs(size_t n_jobs, size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max<size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<size_t>(n_jobs, 1));
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < n_jobs; i = next++) fn(i);
  };
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
}

std::vector<Complex> draw_truth(const TruthSpec& truth, size_t p, Rng& rng) {
  std::vector<Complex> out;
  out.reserve(p);
  if (truth.kind == TruthSpec::Kind::kBox) {
    const double h = truth.box_halfwidth;
    for (size_t i = 0; i < p; ++i) {
      const double u = rng.uniform(-h, h);
      const double s = rng.uniform(-h, h);
      out.push_back(exp_map(LogCoordd(u, s)));
    }
  } else {
    const LogNormalOnC prior(truth.prior_mu, truth.prior_lambda);
    for (size_t i = 0; i < p; ++i) out.push_back(prior.draw(rng));
  }
  return out;
}

SampleSummary draw_summary(const std::vector<Complex>& truth, size_t n, double v, Rng& rng) {
  std::vector<Complex> xbar;
  xbar.reserve(truth.size());
  std::vector<Complex> obs(n);
  for (const auto& m : truth) {
    const LogNormalOnC dist(m, v);
    for (auto& o : obs) o = dist.draw(rng);
    xbar.push_back(frechet_mean<double>(obs));
  }
  return SampleSummary(std::move(xbar), n);
}

std::vector<double> lambda_grid(const ExperimentConfig& c) {
  std::vector<double> grid(c.lambda_points);
  if (c.lambda_points == 1) return {c.lambda_min};
  for (int i = 0; i < c.lambda_points; ++i) {
    grid[i] = std::exp(std::log(c.lambda_min) +
                       (std::log(c.lambda_max) - std::log(c.lambda_min)) * i / (c.lambda_points - 1));
  }
  return grid;
}

/// Probe means on rays through the origin of the log domain, out to the
/// corner of the truth box.
std::vector<Complex> mu_probes(const ExperimentConfig& c) {
  const double reach = c.truth.kind == TruthSpec::Kind::kBox
                           ? c.truth.box_halfwidth * kSqrt2<double>
                           : log_map(c.truth.prior_mu).norm() + 3.0 * std::sqrt(c.truth.prior_lambda);
  std::vector<Complex> out;
  for (int d = 0; d < c.mu_directions; ++d) {
    const double phi = 2.0 * kPi<double> * d / c.mu_directions;
    for (int j = 0; j < c.mu_radii; ++j) {
      const double rho = reach * (j + 1) / c.mu_radii;
      out.push_back(exp_map(LogCoordd(rho * std::cos(phi), rho * std::sin(phi))));
    }
  }
  return out;
}

}  // namespace

HarnessResult run_theorem1(const ExperimentConfig& config) {
  const auto jobs = make_jobs(config.p_grid, config.trials_theorem1);
  const auto lambdas = lambda_grid(config);
  const auto mus = mu_probes(config);
  std::vector<TrialRecord> records(jobs.size());
  std::vector<char> skipped(jobs.size(), 0);
  const double v = config.v;

  run_jobs(jobs.size(), config.threads, [&](size_t idx) {
    const auto [p, trial] = jobs[idx];
    Rng rng(derive_seed(config.seed, 1, p, trial));
    const auto truth = draw_truth(config.truth, p, rng);
    const auto summary = draw_summary(truth, config.n_samples, v, rng);

    double radius = 0.0;
    for (const auto& x : summary.xbar) radius = std::max(radius, log_map(x).norm());

    std::vector<Complex> probe_mus;
    std::vector<double> probe_lambdas;
    if (config.fixed_probe) {
      probe_mus.push_back(config.fixed_probe->first);
      probe_lambdas.push_back(config.fixed_probe->second);
    } else {
      for (const auto& mu : mus) {
        if (log_map(mu).norm() < radius) probe_mus.push_back(mu);
      }
      probe_lambdas = lambdas;
    }

    TrialRecord rec{p, trial, 0.0, 0.0, 0.0, 0.0};
    if (probe_mus.empty()) {
      skipped[idx] = 1;
      records[idx] = rec;
      return;
    }

    std::vector<LogCoordd> deltas(p);
    double best = -1.0;
    for (const auto& mu : probe_mus) {
      double dispersion = 0.0;
      for (size_t i = 0; i < p; ++i) {
        deltas[i] = log_difference(summary.xbar[i], mu);
        dispersion += deltas[i].squaredNorm();
      }
      for (double lambda : probe_lambdas) {
        const double factor = v == 0.0 ? 1.0 : lambda / (lambda + v);
        double loss = 0.0;
        for (size_t i = 0; i < p; ++i) {
          const double d = dist_c(translate(mu, LogCoordd(factor * deltas[i])), truth[i]);
          loss += d * d;
        }
        const double sure = sure_profile(dispersion, p, config.n_samples, lambda, v);
        const double gap = (sure - loss) / static_cast<double>(p);
        if (std::abs(gap) > best) {
          best = std::abs(gap);
          rec.signed_gap = gap;
        }
      }
    }
    rec.sup_gap = best;

    LambdaSearch search{config.lambda_min, config.lambda_max, config.lambda_points};
    const auto fit = fit_sure_component(summary, v, search);
    const auto estimate = map_estimate(summary, fit.mu_hat, fit.lambda_hat, v);
    rec.risk_sure = manifold_loss(estimate, truth) / static_cast<double>(p);
    rec.risk_mle = manifold_loss(summary.xbar, truth) / static_cast<double>(p);
    records[idx] = rec;
  });

  HarnessResult result;
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (skipped[i]) {
      ++result.skipped;
    } else {
      result.records.push_back(records[i]);
    }
  }
  return result;
}

HarnessResult run_theorem2(const ExperimentConfig& config) {
  const auto jobs = make_jobs(config.p_grid, config.trials_theorem2);
  std::vector<TrialRecord> records(jobs.size());
  const double v = config.v;
  const LambdaSearch search{config.lambda_min, config.lambda_max, config.lambda_points};

  run_jobs(jobs.size(), config.threads, [&](size_t idx) {
    const auto [p, trial] = jobs[idx];
    Rng rng(derive_seed(config.seed, 2, p, trial));
    const auto truth = draw_truth(config.truth, p, rng);
    double loss_sure = 0.0;
    double loss_mle = 0.0;
    for (size_t r = 0; r < config.inner_resamples; ++r) {
      const auto summary = draw_summary(truth, config.n_samples, v, rng);
      SureFit fits;
      fits.components.push_back(fit_sure_component(summary, v, search));
      const HierarchicalModel model(v, {1.0}, {fits.components[0].mu_hat}, {fits.components[0].lambda_hat});
      loss_sure += manifold_loss(csure_estimate(summary, model, fits), truth);
      loss_mle += manifold_loss(summary.xbar, truth);
    }
    const double scale = 1.0 / (static_cast<double>(config.inner_resamples) * static_cast<double>(p));
    records[idx] = {p, trial, std::numeric_limits<double>::quiet_NaN(), loss_sure * scale, loss_mle * scale, 0.0};
  });
  return {std::move(records), 0};
}

// ---------------------------------------------------------------------------
// CSV

void emit_csv(std::vector<TrialRecord> records, const std::filesystem::path& path) {
  std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return a.p != b.p ? a.p < b.p : a.trial < b.trial;
  });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "p,trial,sup_gap,risk_sure,risk_mle\n";
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g\n", r.p, r.trial, r.sup_gap, r.risk_sure, r.risk_mle);
    out << buf;
  }
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<TrialRecord> read_trial_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "p,trial,sup_gap,risk_sure,risk_mle") {
    throw DataError(path.string() + ": unexpected header");
  }
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw DataError(path.string() + ": expected 5 fields");
    TrialRecord r;
    r.p = std::stoull(fields[0]);
    r.trial = std::stoull(fields[1]);
    r.sup_gap = std::strtod(fields[2].c_str(), nullptr);
    r.risk_sure = std::strtod(fields[3].c_str(), nullptr);
    r.risk_mle = std::strtod(fields[4].c_str(), nullptr);
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<size_t> order(x.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("spearman: need two equal-length samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<PSummary> summarize_by_p(const std::vector<TrialRecord>& records) {
  std::map<size_t, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) groups[r.p].push_back(&r);
  std::vector<PSummary> out;
  for (const auto& [p, rs] : groups) {
    PSummary s;
    s.p = p;
    s.trials = rs.size();
    std::vector<double> gaps;
    double sum_s = 0, sum_m = 0, sum_d = 0, sum_d2 = 0, sum_s2 = 0;
    size_t wins = 0;
    for (const auto* r : rs) {
      gaps.push_back(r->sup_gap);
      sum_s += r->risk_sure;
      sum_s2 += r->risk_sure * r->risk_sure;
      sum_m += r->risk_mle;
      const double d = r->risk_mle - r->risk_sure;
      sum_d += d;
      sum_d2 += d * d;
      if (r->risk_sure <= r->risk_mle) ++wins;
    }
    const double n = static_cast<double>(rs.size());
    s.median_gap = median(gaps);
    s.mean_risk_sure = sum_s / n;
    s.mean_risk_mle = sum_m / n;
    s.dominance_fraction = static_cast<double>(wins) / n;
    if (rs.size() > 1) {
      const double var_d = std::max(0.0, (sum_d2 - sum_d * sum_d / n) / (n - 1));
      const double var_s = std::max(0.0, (sum_s2 - sum_s * sum_s / n) / (n - 1));
      s.stderr_diff = std::sqrt(var_d / n);
      s.stderr_sure = std::sqrt(var_s / n);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace csure
