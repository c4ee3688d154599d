#include "csure/classifier/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "csure/rng.hpp"

namespace csure::classifier {

namespace {

Complex to_complex_point(const Feature<double>& f) { return Complex(Scale::from_log(f.log_r), Angle(f.theta)); }

Feature<double> to_feature(const Complex& c) { return {c.scale.log_r(), c.theta()}; }

int argmax(std::span<const double> xs) {
  return static_cast<int>(std::max_element(xs.begin(), xs.end()) - xs.begin());
}

std::span<const double> block(const Eigen::VectorXd& params, Eigen::Index offset, Eigen::Index n) {
  return {params.data() + offset, static_cast<size_t>(n)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Shape and layout

void ModelShape::validate() const {
  if (window < 1 || stride < 1 || length < window) throw UsageError("model shape: need 1 <= window <= length");
  if (channels < 1 || classes < 1 || components < 1) throw UsageError("model shape: sizes must be positive");
  if (conv_width < 1 || conv_width > features()) throw UsageError("model shape: conv width exceeds feature length");
  if (conv_filters < 1 || hidden < 1) throw UsageError("model shape: head sizes must be positive");
}

nlohmann::json ModelShape::to_json() const {
  return {{"length", length},       {"window", window},         {"stride", stride},
          {"channels", channels},   {"classes", classes},       {"components", components},
          {"conv_width", conv_width}, {"conv_filters", conv_filters}, {"hidden", hidden}};
}

ModelShape ModelShape::from_json(const nlohmann::json& j) {
  ModelShape s;
  s.length = j.at("length").get<int>();
  s.window = j.at("window").get<int>();
  s.stride = j.at("stride").get<int>();
  s.channels = j.at("channels").get<int>();
  s.classes = j.at("classes").get<int>();
  s.components = j.at("components").get<int>();
  s.conv_width = j.at("conv_width").get<int>();
  s.conv_filters = j.at("conv_filters").get<int>();
  s.hidden = j.at("hidden").get<int>();
  s.validate();
  return s;
}

ParamLayout::ParamLayout(const ModelShape& shape) {
  Eigen::Index at = 0;
  auto take = [&](Eigen::Index n) {
    const auto start = at;
    at += n;
    return start;
  };
  wfm = take(static_cast<Eigen::Index>(shape.channels) * shape.window);
  mixture = take(static_cast<Eigen::Index>(shape.classes) * shape.components);
  conv_w = take(static_cast<Eigen::Index>(shape.conv_filters) * shape.conv_width);
  conv_b = take(shape.conv_filters);
  const Eigen::Index in1 = static_cast<Eigen::Index>(shape.conv_filters) * shape.conv_outputs();
  fc1_w = take(in1 * shape.hidden);
  fc1_b = take(shape.hidden);
  fc2_w = take(static_cast<Eigen::Index>(shape.classes) * shape.hidden);
  fc2_b = take(shape.classes);
  size = at;
}

// ---------------------------------------------------------------------------
// Serialization

bool PrototypeSet::fitted() const {
  if (classes.empty()) return false;
  return std::all_of(classes.begin(), classes.end(),
                     [](const ClassState& c) { return c.initialized && !c.fit.components.empty(); });
}

nlohmann::json PrototypeSet::to_json() const {
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& c : classes) {
    nlohmann::json running = nlohmann::json::array();
    for (const auto& x : c.running) running.push_back(csure::to_json(x));
    cls.push_back({{"initialized", c.initialized},
                   {"running_mean", running},
                   {"assignment", c.assignment},
                   {"sure_fit", c.fit.to_json()}});
  }
  nlohmann::json means_json = nlohmann::json::array();
  for (const auto& m : means) means_json.push_back(csure::to_json(m));
  return {{"v", v}, {"classes", cls}, {"means", means_json}};
}

PrototypeSet PrototypeSet::from_json(const nlohmann::json& j) {
  PrototypeSet p;
  p.v = j.at("v").get<double>();
  for (const auto& c : j.at("classes")) {
    ClassState s;
    s.initialized = c.at("initialized").get<bool>();
    for (const auto& x : c.at("running_mean")) s.running.push_back(complex_from_json(x));
    s.assignment = c.at("assignment").get<std::vector<int>>();
    s.fit = SureFit::from_json(c.at("sure_fit"));
    p.classes.push_back(std::move(s));
  }
  for (const auto& m : j.at("means")) p.means.push_back(complex_from_json(m));
  return p;
}

nlohmann::json TrainConfig::to_json() const {
  return {{"v", v},
          {"epochs", epochs},
          {"batch", batch},
          {"learning_rate", learning_rate},
          {"beta1", beta1},
          {"beta2", beta2},
          {"epsilon", epsilon},
          {"momentum", momentum},
          {"kmeans_iterations", kmeans_iterations},
          {"lambda_min", search.lambda_min},
          {"lambda_max", search.lambda_max},
          {"lambda_points", search.grid_points},
          {"lambda_tolerance", search.tolerance},
          {"seed", seed},
          {"shape", shape.to_json()}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.v = j.at("v").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch = j.at("batch").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.kmeans_iterations = j.at("kmeans_iterations").get<int>();
  c.search.lambda_min = j.at("lambda_min").get<double>();
  c.search.lambda_max = j.at("lambda_max").get<double>();
  c.search.grid_points = j.at("lambda_points").get<int>();
  c.search.tolerance = j.at("lambda_tolerance").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.shape = ModelShape::from_json(j.at("shape"));
  return c;
}

std::string Model::mode() const { return config.v == 0.0 ? "MLE" : "C-SURE"; }

nlohmann::json Model::to_json() const {
  return {{"mode", mode()},
          {"config", config.to_json()},
          {"params", std::vector<double>(params.data(), params.data() + params.size())},
          {"prototypes", protos.to_json()}};
}

Model Model::from_json(const nlohmann::json& j) {
  Model m;
  m.config = TrainConfig::from_json(j.at("config"));
  const auto p = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(p.size()) != ParamLayout(m.config.shape).size) {
    throw DataError("checkpoint: parameter count does not match the model shape");
  }
  m.params = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  m.protos = PrototypeSet::from_json(j.at("prototypes"));
  if (m.protos.frozen() &&
      m.protos.means.size() != static_cast<size_t>(m.config.shape.classes) * m.config.shape.channels) {
    throw DataError("checkpoint: prototype count does not match the model shape");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Model construction and forward passes

Model init_model(const TrainConfig& config) {
  config.shape.validate();
  const auto& shape = config.shape;
  const ParamLayout layout(shape);
  Model m;
  m.config = config;
  m.params = Eigen::VectorXd::Zero(layout.size);
  Rng rng(derive_seed(config.seed, 0x696e6974));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(shape.channels) * shape.window; ++i) {
    m.params(layout.wfm + i) = rng.normal();
  }
  auto glorot = [&](Eigen::Index offset, Eigen::Index count, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index i = 0; i < count; ++i) m.params(offset + i) = rng.uniform(-limit, limit);
  };
  const double in1 = static_cast<double>(shape.conv_filters) * shape.conv_outputs();
  glorot(layout.conv_w, layout.conv_b - layout.conv_w, shape.conv_width, shape.conv_filters);
  glorot(layout.fc1_w, layout.fc1_b - layout.fc1_w, in1, shape.hidden);
  glorot(layout.fc2_w, layout.fc2_b - layout.fc2_w, shape.hidden, shape.classes);

  m.protos.v = config.v;
  m.protos.classes.resize(shape.classes);
  return m;
}

FeatureGrid<double> compute_features(const Model& model, const ComplexSignal& x) {
  const ParamLayout layout(model.shape());
  return wfm_forward<double>(x, block(model.params, layout.wfm, layout.mixture - layout.wfm), model.shape());
}

std::vector<Feature<double>> frozen_prototypes(const Model& model) {
  if (!model.protos.frozen()) throw UsageError("prototypes are not fitted; train the model first");
  std::vector<Feature<double>> out;
  out.reserve(model.protos.means.size());
  for (const auto& m : model.protos.means) out.push_back(to_feature(m));
  return out;
}

std::vector<Feature<double>> current_prototypes(const Model& model) {
  const auto& shape = model.shape();
  if (!model.protos.fitted()) throw UsageError("prototypes are not fitted");
  const ParamLayout layout(shape);
  std::vector<Feature<double>> out;
  for (int c = 0; c < shape.classes; ++c) {
    const auto free = block(model.params, layout.mixture + static_cast<Eigen::Index>(c) * shape.components,
                            shape.components);
    for (int j = 0; j < shape.channels; ++j) {
      out.push_back(prototype_mean<double>(model.protos.classes[c], j, free, model.protos.v));
    }
  }
  return out;
}

namespace {

std::vector<double> logits_from_grid(const Model& model, const FeatureGrid<double>& grid,
                                     std::span<const Feature<double>> protos) {
  const ParamLayout layout(model.shape());
  const auto dist = distance_features<double>(grid, protos, model.shape());
  return head_forward<double>(dist, block(model.params, 0, layout.size), layout, model.shape());
}

}  // namespace

std::vector<double> predict_logits(const Model& model, const ComplexSignal& x) {
  const auto protos = frozen_prototypes(model);
  return logits_from_grid(model, compute_features(model, x), protos);
}

// ---------------------------------------------------------------------------
// Prototype statistics

void update_running_fm(PrototypeSet& protos, std::span<const FeatureGrid<double>> grids, std::span<const int> labels,
                       const ModelShape& shape, double momentum) {
  if (grids.size() != labels.size()) throw UsageError("update_running_fm: grids and labels differ in length");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw UsageError("update_running_fm: momentum must lie in [0, 1)");
  const int J = shape.channels;
  const auto blend = ConvexWeights<double>(Eigen::Vector2d(momentum, 1.0 - momentum));
  for (int c = 0; c < static_cast<int>(protos.classes.size()); ++c) {
    std::vector<size_t> members;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    if (members.empty()) continue;
    auto& state = protos.classes[c];
    if (!state.initialized) state.running.assign(J, Complex());
    std::vector<Complex> points;
    for (int j = 0; j < J; ++j) {
      points.clear();
      for (size_t i : members) {
        const auto& g = grids[i];
        for (size_t t = j; t < g.size(); t += J) points.push_back(to_complex_point(g[t]));
      }
      const Complex batch_mean = frechet_mean<double>(points);
      if (!state.initialized || momentum == 0.0) {
        state.running[j] = batch_mean;
      } else {
        const Complex pair[2] = {state.running[j], batch_mean};
        state.running[j] = wfm_c<double>(pair, blend);
      }
    }
    state.initialized = true;
  }
}

std::vector<int> kmeans_assign(std::span<const Complex> points, int k, int max_iterations) {
  const size_t n = points.size();
  if (n == 0 || k < 1) throw UsageError("kmeans_assign: need points and k >= 1");
  std::vector<Complex> centers{points[0]};
  while (static_cast<int>(centers.size()) < k) {
    size_t far = 0;
    double far_d = -1.0;
    for (size_t i = 0; i < n; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) d = std::min(d, dist_c(points[i], c));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    centers.push_back(points[far]);
  }

  std::vector<int> assign(n, -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist_c(points[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist_c(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      std::vector<Complex> members;
      for (size_t i = 0; i < n; ++i) {
        if (assign[i] == c) members.push_back(points[i]);
      }
      if (!members.empty()) centers[c] = frechet_mean<double>(members);
    }
  }
  return assign;
}

void refit_prototypes(PrototypeSet& protos, std::span<const size_t> class_counts, const TrainConfig& config) {
  const int K = config.shape.components;
  for (size_t c = 0; c < protos.classes.size(); ++c) {
    auto& state = protos.classes[c];
    if (!state.initialized) throw DataError("class " + std::to_string(c) + " has no training instances");
    state.assignment = kmeans_assign(state.running, K, config.kmeans_iterations);
    state.fit.components.clear();
    for (int k = 0; k < K; ++k) {
      std::vector<Complex> group;
      for (size_t j = 0; j < state.running.size(); ++j) {
        if (state.assignment[j] == k) group.push_back(state.running[j]);
      }
      if (group.empty()) group = state.running;
      state.fit.components.push_back(
          fit_sure_component(SampleSummary(std::move(group), class_counts[c]), protos.v, config.search));
    }
  }
}

void freeze_prototypes(Model& model) {
  model.protos.means.clear();
  for (const auto& f : current_prototypes(model)) model.protos.means.push_back(to_complex_point(f));
}

// ---------------------------------------------------------------------------
// Loss and gradient

double batch_loss(const Model& model, const Dataset& data, std::span<const size_t> batch, Eigen::VectorXd* grad) {
  if (batch.empty()) throw UsageError("batch_loss: empty batch");
  const auto& shape = model.shape();
  const ParamLayout layout(shape);
  const double scale = 1.0 / static_cast<double>(batch.size());
  if (grad) grad->setZero(layout.size);

  if (!grad) {
    const auto protos = current_prototypes(model);
    double loss = 0.0;
    for (size_t i : batch) {
      const auto logits = logits_from_grid(model, compute_features(model, data[i]), protos);
      loss += ad::cross_entropy(logits, static_cast<size_t>(data[i].label));
    }
    return loss * scale;
  }

  if (!model.protos.fitted()) throw UsageError("prototypes are not fitted");
  ad::Tape tape;
  std::vector<ad::Var> p(static_cast<size_t>(layout.size));
  double loss = 0.0;
  for (size_t i : batch) {
    tape.clear();
    for (Eigen::Index q = 0; q < layout.size; ++q) p[q] = tape.variable(model.params(q));
    const std::span<const ad::Var> ps(p);

    const auto grid = wfm_forward<ad::Var>(data[i], ps.subspan(layout.wfm, layout.mixture - layout.wfm), shape);
    std::vector<Feature<ad::Var>> protos;
    protos.reserve(static_cast<size_t>(shape.features()));
    for (int c = 0; c < shape.classes; ++c) {
      const auto free = ps.subspan(layout.mixture + static_cast<Eigen::Index>(c) * shape.components, shape.components);
      for (int j = 0; j < shape.channels; ++j) {
        protos.push_back(prototype_mean<ad::Var>(model.protos.classes[c], j, free, model.protos.v));
      }
    }
    const auto dist = distance_features<ad::Var>(grid, protos, shape);
    const auto logits = head_forward<ad::Var>(dist, ps, layout, shape);
    const auto ce = ad::cross_entropy(logits, static_cast<size_t>(data[i].label));
    loss += ce.value();
    const auto adj = tape.adjoints(ce);
    for (Eigen::Index q = 0; q < layout.size; ++q) (*grad)(q) += scale * adj[p[q].index()];
  }
  return loss * scale;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Adam {
  Eigen::VectorXd m, v;
  long step = 0;

  explicit Adam(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void apply(Eigen::VectorXd& params, const Eigen::VectorXd& grad, const TrainConfig& c) {
    ++step;
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseAbs2();
    const double b1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
    const double b2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
    params.array() -= c.learning_rate * (m.array() / b1) / ((v.array() / b2).sqrt() + c.epsilon);
  }
};

void shuffle(std::vector<size_t>& order, Rng& rng) {
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
}

double accuracy_from_grids(const Model& model, const Dataset& data, const std::vector<FeatureGrid<double>>& grids) {
  const auto protos = frozen_prototypes(model);
  size_t correct = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    if (argmax(logits_from_grid(model, grids[i], protos)) == data[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<FeatureGrid<double>> all_features(const Model& model, const Dataset& data) {
  std::vector<FeatureGrid<double>> out;
  out.reserve(data.size());
  for (const auto& x : data) out.push_back(compute_features(model, x));
  return out;
}

}  // namespace

TrainResult train(const Dataset& train_set, const Dataset& test_set, const TrainConfig& config) {
  if (train_set.empty()) throw DataError("training set is empty");
  if (config.epochs < 1 || config.batch < 1) throw UsageError("epochs and batch must be positive");
  if (!(config.v >= 0.0)) throw UsageError("v must be non-negative");

  TrainConfig cfg = config;
  cfg.shape.classes = std::max(count_classes(train_set), count_classes(test_set));
  cfg.shape.length = static_cast<int>(train_set.front().samples.size());
  for (const auto* set : {&train_set, &test_set}) {
    for (const auto& x : *set) {
      if (static_cast<int>(x.samples.size()) != cfg.shape.length) throw DataError("signals differ in length");
    }
  }
  cfg.shape.validate();

  TrainResult result{init_model(cfg), {}};
  Model& model = result.model;
  const ParamLayout layout(cfg.shape);

  std::vector<size_t> class_counts(cfg.shape.classes, 0);
  for (const auto& x : train_set) ++class_counts[x.label];

  Rng rng(derive_seed(cfg.seed, 0x73687566));
  Adam adam(layout.size);
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto grids = all_features(model, train_set);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    std::vector<std::span<const size_t>> batches;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch)) {
      batches.emplace_back(order.data() + start, std::min(order.size() - start, static_cast<size_t>(cfg.batch)));
    }

    // Refresh the running means with the features of the current weights,
    // then refit SURE once for the epoch.
    for (const auto& b : batches) {
      std::vector<FeatureGrid<double>> g;
      std::vector<int> labels;
      for (size_t i : b) {
        g.push_back(grids[i]);
        labels.push_back(train_set[i].label);
      }
      update_running_fm(model.protos, g, labels, cfg.shape, cfg.momentum);
    }
    refit_prototypes(model.protos, class_counts, cfg);

    double loss_sum = 0.0;
    Eigen::VectorXd grad;
    for (const auto& b : batches) {
      const double loss = batch_loss(model, train_set, b, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(b.size());
      adam.apply(model.params, grad, cfg);
    }

    freeze_prototypes(model);
    grids = all_features(model, train_set);
    EpochMetrics m;
    m.epoch = epoch;
    m.loss = loss_sum / static_cast<double>(train_set.size());
    m.train_acc = accuracy_from_grids(model, train_set, grids);
    m.test_acc = test_set.empty() ? std::nan("") : evaluate(model, test_set).accuracy;
    result.metrics.push_back(m);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation

nlohmann::json EvalReport::to_json() const {
  nlohmann::json conf = nlohmann::json::array();
  for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) row.push_back(confusion(r, c));
    conf.push_back(row);
  }
  nlohmann::json snr = nlohmann::json::array();
  for (const auto& [s, counts] : per_snr) {
    snr.push_back({{"snr_db", s},
                   {"correct", counts.first},
                   {"total", counts.second},
                   {"accuracy", static_cast<double>(counts.first) / static_cast<double>(counts.second)}});
  }
  return {{"accuracy", accuracy}, {"total", total}, {"confusion", conf}, {"per_snr", snr}};
}

namespace {

EvalReport make_report(const Dataset& data, std::vector<int> predictions, int classes) {
  EvalReport r;
  r.total = data.size();
  r.confusion = Eigen::MatrixXi::Zero(classes, classes);
  size_t correct = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const int truth = data[i].label;
    if (truth >= classes) throw DataError("label " + std::to_string(truth) + " outside the model's classes");
    ++r.confusion(truth, predictions[i]);
    const bool ok = predictions[i] == truth;
    correct += ok;
    if (data[i].snr_db) {
      auto& slot = r.per_snr[*data[i].snr_db];
      slot.first += ok;
      ++slot.second;
    }
  }
  r.accuracy = data.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
  r.predictions = std::move(predictions);
  return r;
}

}  // namespace

EvalReport evaluate(const Model& model, const Dataset& data) {
  const auto protos = frozen_prototypes(model);
  std::vector<int> pred;
  pred.reserve(data.size());
  for (const auto& x : data) {
    if (static_cast<int>(x.samples.size()) != model.shape().length) throw DataError("signal length does not match");
    pred.push_back(argmax(logits_from_grid(model, compute_features(model, x), protos)));
  }
  return make_report(data, std::move(pred), model.shape().classes);
}

void write_metrics_csv(const std::vector<EpochMetrics>& metrics, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,train_acc,test_acc,loss\n";
  char buf[128];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", m.epoch, m.train_acc, m.test_acc, m.loss);
    out << buf;
  }
  if (!out) throw DataError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Baseline

namespace {

Eigen::VectorXd flatten(const ComplexSignal& x) {
  Eigen::VectorXd v(2 * static_cast<Eigen::Index>(x.samples.size()));
  for (size_t t = 0; t < x.samples.size(); ++t) {
    const auto c = x.samples[t].to_complex();
    v(2 * t) = c.real();
    v(2 * t + 1) = c.imag();
  }
  return v;
}

}  // namespace

Eigen::VectorXd BaselineMlp::logits(const ComplexSignal& x) const {
  return w2 * (w1 * flatten(x) + b1).array().tanh().matrix() + b2;
}

BaselineMlp train_baseline(const Dataset& data, const BaselineConfig& config) {
  if (data.empty()) throw DataError("training set is empty");
  const int classes = count_classes(data);
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index d = 2 * static_cast<Eigen::Index>(data.front().samples.size());

  Eigen::MatrixXd X(d, n);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(classes, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (2 * static_cast<Eigen::Index>(data[i].samples.size()) != d) throw DataError("signals differ in length");
    X.col(i) = flatten(data[i]);
    Y(data[i].label, i) = 1.0;
  }

  BaselineMlp m;
  Rng rng(derive_seed(config.seed, 0x626173));
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) w(r, c) = rng.uniform(-limit, limit);
    }
    return w;
  };
  m.w1 = glorot(config.hidden, d);
  m.b1 = Eigen::VectorXd::Zero(config.hidden);
  m.w2 = glorot(classes, config.hidden);
  m.b2 = Eigen::VectorXd::Zero(classes);

  // Flat views for a single Adam state.
  const Eigen::Index sizes[4] = {m.w1.size(), m.b1.size(), m.w2.size(), m.b2.size()};
  const Eigen::Index total = sizes[0] + sizes[1] + sizes[2] + sizes[3];
  Eigen::VectorXd theta(total), grad(total);
  auto pack = [&](Eigen::VectorXd& out, const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& c,
                  const Eigen::VectorXd& e) {
    out << Eigen::Map<const Eigen::VectorXd>(a.data(), a.size()), b, Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()),
        e;
  };
  auto unpack = [&](const Eigen::VectorXd& in) {
    Eigen::Index at = 0;
    m.w1 = Eigen::Map<const Eigen::MatrixXd>(in.data() + at, m.w1.rows(), m.w1.cols());
    at += sizes[0];
    m.b1 = in.segment(at, sizes[1]);
    at += sizes[1];
    m.w2 = Eigen::Map<const Eigen::MatrixXd>(in.data() + at, m.w2.rows(), m.w2.cols());
    at += sizes[2];
    m.b2 = in.segment(at, sizes[3]);
  };
  pack(theta, m.w1, m.b1, m.w2, m.b2);

  TrainConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;
  Adam adam(total);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Eigen::MatrixXd H = ((m.w1 * X).colwise() + m.b1).array().tanh().matrix();
    Eigen::MatrixXd Z = (m.w2 * H).colwise() + m.b2;
    const Eigen::RowVectorXd zmax = Z.colwise().maxCoeff();
    Eigen::MatrixXd P = (Z.rowwise() - zmax).array().exp().matrix();
    P.array().rowwise() /= P.colwise().sum().array();
    const Eigen::MatrixXd dZ = (P - Y) / static_cast<double>(n);
    const Eigen::MatrixXd gw2 = dZ * H.transpose();
    const Eigen::VectorXd gb2 = dZ.rowwise().sum();
    const Eigen::MatrixXd dH = (m.w2.transpose() * dZ).cwiseProduct((1.0 - H.array().square()).matrix());
    const Eigen::MatrixXd gw1 = dH * X.transpose();
    const Eigen::VectorXd gb1 = dH.rowwise().sum();
    pack(grad, gw1, gb1, gw2, gb2);
    adam.apply(theta, grad, adam_cfg);
    unpack(theta);
  }
  return m;
}

EvalReport evaluate_baseline(const BaselineMlp& model, const Dataset& data) {
  std::vector<int> pred;
  pred.reserve(data.size());
  for (const auto& x : data) {
    if (2 * static_cast<Eigen::Index>(x.samples.size()) != model.w1.cols()) {
      throw DataError("signal length does not match the baseline");
    }
    const Eigen::VectorXd z = model.logits(x);
    pred.push_back(argmax(std::span<const double>(z.data(), static_cast<size_t>(z.size()))));
  }
  return make_report(data, std::move(pred), static_cast<int>(model.b2.size()));
}

}  // namespace csure::classifier
