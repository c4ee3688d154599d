// csure: data generation, SURE fitting, dominance simulations, training and
// evaluation of the prototype classifier.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csure/classifier/model.hpp"
#include "csure/classifier/signal.hpp"
#include "csure/config.hpp"
#include "csure/errors.hpp"
#include "csure/harness.hpp"
#include "csure/shrinkage.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw csure::DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw csure::DataError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw csure::DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw csure::DataError(path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw csure::DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_run_json(const fs::path& dir, const std::string& command, json resolved) {
  write_json({{"command", command}, {"config", std::move(resolved)}}, dir / "run.json");
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
  int classes = 4;
  int per_class = 40;
  std::vector<double> snr{10.0};
  bool full_snr = false;
  std::uint64_t seed = 1;
  int length = csure::classifier::kDefaultSignalLength;
  int samples_per_symbol = 8;
  std::string out_dir = ".";
  std::string out = "data.csv";
};

void cmd_gen_data(const GenDataArgs& a) {
  if (a.classes < 2) throw csure::UsageError("--classes must be at least 2");
  csure::classifier::SyntheticSpec spec;
  spec.classes = a.classes;
  spec.per_class = a.per_class;
  spec.snr_db = a.full_snr ? csure::classifier::full_snr_range() : a.snr;
  spec.seed = a.seed;
  spec.length = a.length;
  spec.samples_per_symbol = a.samples_per_symbol;
  ensure_dir(a.out_dir);
  const fs::path out = fs::path(a.out_dir) / a.out;
  csure::classifier::write_dataset_csv(csure::classifier::generate_psk(spec), out);
  json resolved = spec.to_json();
  resolved["out"] = out.string();
  write_run_json(a.out_dir, "gen-data", resolved);
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out_dir = ".";
  std::vector<std::string> settings;  // key=value
  std::optional<std::string> p_grid;
  std::optional<long long> trials;
  std::optional<long long> n;
  std::optional<double> v;
  std::optional<long long> seed;
  std::optional<long long> threads;
};

json summary_json(const std::vector<csure::PSummary>& rows) {
  json out = json::array();
  for (const auto& s : rows) {
    out.push_back({{"p", s.p},
                   {"trials", s.trials},
                   {"median_gap", s.median_gap},
                   {"mean_risk_sure", s.mean_risk_sure},
                   {"mean_risk_mle", s.mean_risk_mle},
                   {"stderr_diff", s.stderr_diff},
                   {"dominance_fraction", s.dominance_fraction}});
  }
  return out;
}

void cmd_simulate(const SimulateArgs& a) {
  csure::ExperimentConfig cfg;
  if (!a.config.empty()) cfg = csure::load_experiment_config(a.config);
  for (const auto& kv : a.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw csure::UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.p_grid) cfg.set("p_grid", *a.p_grid);
  if (a.trials) cfg.set("trials", std::to_string(*a.trials));
  if (a.n) cfg.set("N", std::to_string(*a.n));
  if (a.v) {
    if (!(*a.v >= 0.0)) throw csure::UsageError("--v must be non-negative");
    cfg.v = *a.v;
  }
  if (a.seed) cfg.set("seed", std::to_string(*a.seed));
  if (a.threads) cfg.set("threads", std::to_string(*a.threads));

  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  const auto t1 = csure::run_theorem1(cfg);
  csure::emit_csv(t1.records, dir / "theorem1.csv");
  const auto t2 = csure::run_theorem2(cfg);
  csure::emit_csv(t2.records, dir / "theorem2.csv");

  const auto s1 = csure::summarize_by_p(t1.records);
  const auto s2 = csure::summarize_by_p(t2.records);
  std::vector<double> ps, gaps;
  for (const auto& s : s1) {
    ps.push_back(static_cast<double>(s.p));
    gaps.push_back(s.median_gap);
  }
  json summary = {{"theorem1", summary_json(s1)},
                  {"theorem1_skipped", t1.skipped},
                  {"theorem2", summary_json(s2)}};
  if (ps.size() >= 2) summary["theorem1_spearman"] = csure::spearman(ps, gaps);
  write_json(summary, dir / "summary.json");
  write_run_json(dir, "simulate", cfg.to_json());

  for (const auto& s : s1) std::printf("theorem1 p=%zu median_gap=%.6g\n", s.p, s.median_gap);
  for (const auto& s : s2) {
    std::printf("theorem2 p=%zu risk_sure=%.6g risk_mle=%.6g dominance=%.3f\n", s.p, s.mean_risk_sure,
                s.mean_risk_mle, s.dominance_fraction);
  }
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data;
  double v = 0.25;
  int components = 1;
  std::string out_dir = ".";
};

// Observations CSV: header `dim,re,im`, one row per sample. Every dimension
// must carry the same number of samples.
std::vector<std::vector<csure::Complex>> read_observations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw csure::DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw csure::DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "dim,re,im") throw csure::DataError(path.string() + ": expected header dim,re,im");
  std::map<long long, std::vector<csure::Complex>> rows;
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 3) throw csure::DataError(path.string() + ":" + std::to_string(row) + ": expected 3 fields");
    try {
      const long long dim = std::stoll(f[0]);
      const double re = std::stod(f[1]);
      const double im = std::stod(f[2]);
      if (!std::isfinite(re) || !std::isfinite(im)) throw std::invalid_argument("non-finite");
      rows[dim].push_back(csure::Complex::from_cartesian(re, im));
    } catch (const std::exception&) {
      throw csure::DataError(path.string() + ":" + std::to_string(row) + ": invalid number");
    }
  }
  if (rows.empty()) throw csure::DataError(path.string() + ": no observations");
  const size_t n = rows.begin()->second.size();
  std::vector<std::vector<csure::Complex>> out;
  for (auto& [dim, xs] : rows) {
    if (xs.size() != n) {
      throw csure::DataError(path.string() + ": every dimension needs the same number of samples");
    }
    out.push_back(std::move(xs));
  }
  return out;
}

void cmd_fit(const FitArgs& a) {
  if (a.components < 1) throw csure::UsageError("--components must be positive");
  if (!(a.v >= 0.0)) throw csure::UsageError("--v must be non-negative");
  const auto summary = csure::SampleSummary::from_observations(read_observations(a.data));
  const auto assign = csure::classifier::kmeans_assign(summary.xbar, a.components, 50);
  csure::SureFit fit;
  for (int k = 0; k < a.components; ++k) {
    std::vector<csure::Complex> group;
    for (size_t i = 0; i < summary.dim(); ++i) {
      if (assign[i] == k) group.push_back(summary.xbar[i]);
    }
    if (group.empty()) group = summary.xbar;
    fit.components.push_back(csure::fit_sure_component(csure::SampleSummary(group, summary.n_samples), a.v));
  }
  std::vector<double> w(a.components, 1.0 / a.components);
  std::vector<csure::Complex> mu;
  std::vector<double> lambda;
  for (const auto& c : fit.components) {
    mu.push_back(c.mu_hat);
    lambda.push_back(std::max(c.lambda_hat, 1e-300));
  }
  const csure::HierarchicalModel model(a.v, w, mu, lambda);
  const auto estimate = csure::csure_estimate(summary, model, fit);

  json est = json::array();
  json xbar = json::array();
  for (size_t i = 0; i < summary.dim(); ++i) {
    const auto e = estimate[i].to_complex();
    const auto x = summary.xbar[i].to_complex();
    est.push_back({{"re", e.real()}, {"im", e.imag()}});
    xbar.push_back({{"re", x.real()}, {"im", x.imag()}});
  }
  ensure_dir(a.out_dir);
  write_json({{"mode", a.v == 0.0 ? "MLE" : "C-SURE"},
              {"dim", summary.dim()},
              {"n_samples", summary.n_samples},
              {"weights", w},
              {"assignment", assign},
              {"sure_fit", fit.to_json()},
              {"sample_means", xbar},
              {"estimate", est}},
             fs::path(a.out_dir) / "fit.json");
  write_run_json(a.out_dir, "fit", {{"data", a.data}, {"v", a.v}, {"components", a.components}});
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train;
  std::string test;
  std::string out_dir = ".";
  csure::classifier::TrainConfig config;
};

void cmd_train(const TrainArgs& a) {
  const auto train_set = csure::classifier::read_dataset_csv(a.train);
  const auto test_set = a.test.empty() ? csure::classifier::Dataset{} : csure::classifier::read_dataset_csv(a.test);
  const auto result = csure::classifier::train(train_set, test_set, a.config);
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  csure::classifier::write_metrics_csv(result.metrics, dir / "metrics.csv");
  write_json(result.model.to_json(), dir / "model.json");
  json resolved = result.model.config.to_json();
  resolved["train"] = a.train;
  resolved["test"] = a.test;
  write_run_json(dir, "train", resolved);
  const auto& last = result.metrics.back();
  std::printf("epoch %d train_acc=%.4f test_acc=%.4f loss=%.6g\n", last.epoch, last.train_acc, last.test_acc,
              last.loss);
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string out_dir = ".";
};

void cmd_eval(const EvalArgs& a) {
  csure::classifier::Model model;
  try {
    model = csure::classifier::Model::from_json(read_json(a.model));
  } catch (const json::exception& e) {
    throw csure::DataError(a.model + ": " + e.what());
  }
  const auto data = csure::classifier::read_dataset_csv(a.data);
  const auto report = csure::classifier::evaluate(model, data);
  ensure_dir(a.out_dir);
  write_json(report.to_json(), fs::path(a.out_dir) / "report.json");
  write_run_json(a.out_dir, "eval", {{"model", a.model}, {"data", a.data}});
  std::printf("accuracy=%.17g\n", report.accuracy);
}

struct BaselineArgs {
  std::string train;
  std::string test;
  std::string out_dir = ".";
  csure::classifier::BaselineConfig config;
};

void cmd_baseline(const BaselineArgs& a) {
  const auto train_set = csure::classifier::read_dataset_csv(a.train);
  const auto test_set = csure::classifier::read_dataset_csv(a.test);
  const auto model = csure::classifier::train_baseline(train_set, a.config);
  const auto train_report = csure::classifier::evaluate_baseline(model, train_set);
  const auto test_report = csure::classifier::evaluate_baseline(model, test_set);
  ensure_dir(a.out_dir);
  write_json({{"train", train_report.to_json()}, {"test", test_report.to_json()}},
             fs::path(a.out_dir) / "baseline_report.json");
  write_run_json(a.out_dir, "baseline",
                 {{"train", a.train},
                  {"test", a.test},
                  {"hidden", a.config.hidden},
                  {"epochs", a.config.epochs},
                  {"learning_rate", a.config.learning_rate},
                  {"seed", a.config.seed}});
  std::printf("train_acc=%.4f test_acc=%.4f\n", train_report.accuracy, test_report.accuracy);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C-SURE shrinkage of Frechet means on C, and a prototype classifier"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic PSK-style dataset CSV");
  gen_cmd->add_option("--classes", gen.classes, "Number of classes (>= 2)");
  gen_cmd->add_option("--per-class", gen.per_class, "Signals per class")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--snr", gen.snr, "SNR values in dB, assigned round-robin")->delimiter(',');
  gen_cmd->add_flag("--full-snr", gen.full_snr, "Use SNR -20..18 dB in steps of 2");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--length", gen.length, "Samples per signal")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--samples-per-symbol", gen.samples_per_symbol)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory");
  gen_cmd->add_option("--out", gen.out, "Dataset file name inside the output directory");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo dominance experiments");
  sim_cmd->add_option("--config", sim.config, "key = value config file")->check(CLI::ExistingFile);
  sim_cmd->add_option("--set", sim.settings, "Override a config key: key=value");
  sim_cmd->add_option("--p-grid", sim.p_grid, "Comma-separated dimensions");
  sim_cmd->add_option("--trials", sim.trials, "Trials per p for both experiments");
  sim_cmd->add_option("--n", sim.n, "Samples per dimension");
  sim_cmd->add_option("--v", sim.v, "Data variance");
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = hardware)");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit SURE shrinkage to observations (CSV dim,re,im)");
  fit_cmd->add_option("--data", fit.data, "Observations CSV")->required();
  fit_cmd->add_option("--v", fit.v, "Data variance");
  fit_cmd->add_option("--components", fit.components, "Mixture components");
  fit_cmd->add_option("--out-dir", fit.out_dir, "Output directory");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the prototype classifier");
  train_cmd->add_option("--train", tr.train, "Training dataset CSV")->required();
  train_cmd->add_option("--test", tr.test, "Test dataset CSV");
  train_cmd->add_option("--v", tr.config.v, "Data variance; 0 gives the Frechet-mean (MLE) prototypes");
  train_cmd->add_option("--epochs", tr.config.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", tr.config.batch)->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.config.learning_rate);
  train_cmd->add_option("--momentum", tr.config.momentum, "Running-mean momentum");
  train_cmd->add_option("--channels", tr.config.shape.channels)->check(CLI::PositiveNumber);
  train_cmd->add_option("--window", tr.config.shape.window)->check(CLI::PositiveNumber);
  train_cmd->add_option("--stride", tr.config.shape.stride)->check(CLI::PositiveNumber);
  train_cmd->add_option("--components", tr.config.shape.components)->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden", tr.config.shape.hidden)->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tr.config.seed);
  train_cmd->add_option("--out-dir", tr.out_dir, "Output directory");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained checkpoint");
  eval_cmd->add_option("--model", ev.model, "Checkpoint JSON")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset CSV")->required();
  eval_cmd->add_option("--out-dir", ev.out_dir, "Output directory");

  BaselineArgs bl;
  auto* base_cmd = app.add_subcommand("baseline", "Real-valued MLP baseline on flattened (re, im)");
  base_cmd->add_option("--train", bl.train)->required();
  base_cmd->add_option("--test", bl.test)->required();
  base_cmd->add_option("--hidden", bl.config.hidden)->check(CLI::PositiveNumber);
  base_cmd->add_option("--epochs", bl.config.epochs)->check(CLI::PositiveNumber);
  base_cmd->add_option("--lr", bl.config.learning_rate);
  base_cmd->add_option("--seed", bl.config.seed);
  base_cmd->add_option("--out-dir", bl.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) cmd_gen_data(gen);
    if (*sim_cmd) cmd_simulate(sim);
    if (*fit_cmd) cmd_fit(fit);
    if (*train_cmd) cmd_train(tr);
    if (*eval_cmd) cmd_eval(ev);
    if (*base_cmd) cmd_baseline(bl);
  } catch (const csure::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const csure::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const csure::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
