#pragma once

// Prototype classifier on complex sequences.
//
//   signal -> wFM convolution -> per-class shrunk means -> min distances
//          -> conv1d + two dense layers -> logits
//
// Layer code is templated on the scalar S so that the same function
// evaluates with plain doubles or records onto an ad::Tape (S = ad::Var).
// Inputs and prototype statistics are always constants; only the trainable
// parameters are S.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "csure/ad/tape.hpp"
#include "csure/classifier/signal.hpp"
#include "csure/errors.hpp"
#include "csure/frechet.hpp"
#include "csure/manifold.hpp"
#include "csure/shrinkage.hpp"

namespace csure::classifier {

struct ModelShape {
  int length = kDefaultSignalLength;
  int window = 5;
  int stride = 2;
  int channels = 8;
  int classes = 2;
  /// Mixture components per class.
  int components = 2;
  int conv_width = 3;
  int conv_filters = 8;
  int hidden = 16;

  int positions() const { return (length - window) / stride + 1; }
  int features() const { return classes * channels; }
  int conv_outputs() const { return features() - conv_width + 1; }
  /// Throws UsageError when any size is out of range.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelShape from_json(const nlohmann::json& j);
};

/// Offsets of each parameter block inside the flat parameter vector.
struct ParamLayout {
  Eigen::Index wfm = 0;      // channels x window, row j = free weights of channel j
  Eigen::Index mixture = 0;  // classes x components
  Eigen::Index conv_w = 0;   // conv_filters x conv_width
  Eigen::Index conv_b = 0;
  Eigen::Index fc1_w = 0;    // hidden x (conv_filters * conv_outputs)
  Eigen::Index fc1_b = 0;
  Eigen::Index fc2_w = 0;    // classes x hidden
  Eigen::Index fc2_b = 0;
  Eigen::Index size = 0;

  explicit ParamLayout(const ModelShape& shape);
};

// ---------------------------------------------------------------------------
// Generic layers

/// A point of C with possibly differentiable coordinates. theta is on the
/// principal branch up to rounding.
template <typename S>
struct Feature {
  S log_r;
  S theta;
};

/// Weighted Frechet mean of constant points. The angle uses the branch
/// selected by the exact circular mean at the current weight values; on that
/// branch the mean is linear in the weights.
template <typename S>
Feature<S> weighted_fm(std::span<const S> weights, std::span<const Complex> points) {
  const size_t n = points.size();
  std::vector<double> u(n), theta(n), alpha(n);
  for (size_t i = 0; i < n; ++i) {
    u[i] = points[i].scale.log_r();
    theta[i] = points[i].theta();
    alpha[i] = ad::value_of(weights[i]);
  }
  const auto cm = circular_mean<double>(theta, alpha);
  for (size_t i = 0; i < n; ++i) theta[i] += cm.offsets[i];
  return {ad::weighted_sum(weights, u), ad::weighted_sum(weights, theta) - cm.shift};
}

/// Output index t * channels + j.
template <typename S>
using FeatureGrid = std::vector<Feature<S>>;

/// wFM convolution of one input channel. `free` holds channels x window free
/// weights, row-major by channel.
template <typename S>
FeatureGrid<S> wfm_forward(const ComplexSignal& x, std::span<const S> free, const ModelShape& shape) {
  const int k = shape.window;
  if (static_cast<int>(x.samples.size()) < k) throw UsageError("wfm_forward: signal shorter than the window");
  const int positions = (static_cast<int>(x.samples.size()) - k) / shape.stride + 1;
  std::vector<std::vector<S>> alpha(shape.channels);
  for (int j = 0; j < shape.channels; ++j) alpha[j] = ad::softmax(free.subspan(static_cast<size_t>(j) * k, k));

  FeatureGrid<S> out;
  out.reserve(static_cast<size_t>(positions) * shape.channels);
  for (int t = 0; t < positions; ++t) {
    const std::span<const Complex> window(x.samples.data() + static_cast<ptrdiff_t>(t) * shape.stride, k);
    for (int j = 0; j < shape.channels; ++j) out.push_back(weighted_fm<S>(alpha[j], window));
  }
  return out;
}

/// Per-class statistics behind the prototypes.
struct ClassState {
  bool initialized = false;
  /// Running log-domain mean of the wFM features, one per channel.
  std::vector<Complex> running;
  /// Component index of each channel, from the k-means split.
  std::vector<int> assignment;
  SureFit fit;
};

struct PrototypeSet {
  double v = 1.0;
  std::vector<ClassState> classes;
  /// Frozen prototypes, classes x channels, row-major. Empty until frozen.
  std::vector<Complex> means;

  bool fitted() const;
  bool frozen() const { return !means.empty(); }

  nlohmann::json to_json() const;
  static PrototypeSet from_json(const nlohmann::json& j);
};

/// Prototype of (class c, channel j): the w_c-weighted mean of the K
/// component shrinkage estimates of the running mean. `mixture_free` holds
/// the K free weights of class c.
template <typename S>
Feature<S> prototype_mean(const ClassState& state, int j, std::span<const S> mixture_free, double v) {
  const auto w = ad::softmax(mixture_free);
  const auto& comps = state.fit.components;
  std::vector<Complex> xi(comps.size());
  for (size_t k = 0; k < comps.size(); ++k) {
    xi[k] = map_component_mean(state.running[j], comps[k].mu_hat, comps[k].lambda_hat, v);
  }
  return weighted_fm<S>(w, xi);
}

template <typename S>
S feature_distance(const Feature<S>& a, const Feature<S>& b) {
  const double raw = ad::value_of(a.theta) - ad::value_of(b.theta);
  const double wrap = raw - canonical_theta(raw);
  return ad::norm2d(a.log_r - b.log_r, kSqrt2<double> * (a.theta - b.theta - wrap));
}

/// O[c * channels + j] = min over positions t of dist(grid[t, j], protos[c, j]).
template <typename S>
std::vector<S> distance_features(const FeatureGrid<S>& grid, std::span<const Feature<S>> protos,
                                 const ModelShape& shape) {
  const int J = shape.channels;
  const size_t positions = grid.size() / J;
  std::vector<S> out;
  out.reserve(protos.size());
  for (size_t cj = 0; cj < protos.size(); ++cj) {
    const int j = static_cast<int>(cj % J);
    const Feature<double> p{ad::value_of(protos[cj].log_r), ad::value_of(protos[cj].theta)};
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < positions; ++t) {
      const auto& f = grid[t * J + j];
      const double d = feature_distance<double>({ad::value_of(f.log_r), ad::value_of(f.theta)}, p);
      if (d < best_d) {
        best_d = d;
        best = t;
      }
    }
    out.push_back(feature_distance<S>(grid[best * J + j], protos[cj]));
  }
  return out;
}

/// conv1d (valid, tanh) -> dense (tanh) -> dense.
template <typename S>
std::vector<S> head_forward(std::span<const S> features, std::span<const S> params, const ParamLayout& layout,
                            const ModelShape& shape) {
  const int n = shape.features();
  if (static_cast<int>(features.size()) != n) throw UsageError("head_forward: wrong feature length");
  const int width = shape.conv_width;
  const int outputs = shape.conv_outputs();

  std::vector<S> conv;
  conv.reserve(static_cast<size_t>(shape.conv_filters) * outputs);
  for (int f = 0; f < shape.conv_filters; ++f) {
    const auto w = params.subspan(layout.conv_w + static_cast<Eigen::Index>(f) * width, width);
    for (int i = 0; i < outputs; ++i) {
      conv.push_back(ad::tanh(ad::affine(w, features.subspan(i, width), params[layout.conv_b + f])));
    }
  }

  const auto in1 = conv.size();
  std::vector<S> hidden;
  hidden.reserve(shape.hidden);
  for (int h = 0; h < shape.hidden; ++h) {
    const auto w = params.subspan(layout.fc1_w + static_cast<Eigen::Index>(h * in1), in1);
    hidden.push_back(ad::tanh(ad::affine(w, std::span<const S>(conv), params[layout.fc1_b + h])));
  }

  std::vector<S> logits;
  logits.reserve(shape.classes);
  for (int c = 0; c < shape.classes; ++c) {
    const auto w = params.subspan(layout.fc2_w + static_cast<Eigen::Index>(c) * shape.hidden, shape.hidden);
    logits.push_back(ad::affine(w, std::span<const S>(hidden), params[layout.fc2_b + c]));
  }
  return logits;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double v = 1.0;
  int epochs = 120;
  int batch = 400;
  double learning_rate = 0.03;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Momentum of the running log-domain mean.
  double momentum = 0.9;
  int kmeans_iterations = 50;
  LambdaSearch search;
  std::uint64_t seed = 1;
  ModelShape shape;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochMetrics {
  int epoch = 0;
  double train_acc = 0;
  double test_acc = 0;
  double loss = 0;
};

struct Model {
  TrainConfig config;
  Eigen::VectorXd params;
  PrototypeSet protos;

  const ModelShape& shape() const { return config.shape; }
  /// "MLE" when v == 0, otherwise "C-SURE".
  std::string mode() const;

  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json& j);
};

/// Fresh model: wFM free weights N(0, 1), mixture weights zero, dense
/// layers Glorot-uniform, biases zero.
Model init_model(const TrainConfig& config);

/// Forward pass with plain doubles.
FeatureGrid<double> compute_features(const Model& model, const ComplexSignal& x);

/// Frozen prototypes as Feature values, classes x channels.
std::vector<Feature<double>> frozen_prototypes(const Model& model);

/// Prototypes recomputed from the current fits and mixture weights.
std::vector<Feature<double>> current_prototypes(const Model& model);

/// Logits from frozen prototypes. Throws UsageError if they are not frozen.
std::vector<double> predict_logits(const Model& model, const ComplexSignal& x);

/// Log-domain EMA of per-class Frechet means over the batch features
/// (instances x positions per channel). A class's first batch initializes
/// its state; absent classes are left unchanged.
void update_running_fm(PrototypeSet& protos, std::span<const FeatureGrid<double>> grids, std::span<const int> labels,
                       const ModelShape& shape, double momentum);

/// Deterministic k-means on C: farthest-point seeding from index 0, nearest
/// center with ties to the lower index, Frechet-mean centers.
std::vector<int> kmeans_assign(std::span<const Complex> points, int k, int max_iterations);

/// Splits each class's channels into K groups and fits SURE per group with
/// N = class_counts[c]. Groups left empty are fitted on all channels.
void refit_prototypes(PrototypeSet& protos, std::span<const size_t> class_counts, const TrainConfig& config);

/// Stores current_prototypes(model) as the frozen means.
void freeze_prototypes(Model& model);

/// Mean cross-entropy over `batch` with prototypes from the current fits
/// (constants) and current parameters. If `grad` is given it receives the
/// gradient with respect to every parameter.
double batch_loss(const Model& model, const Dataset& data, std::span<const size_t> batch,
                  Eigen::VectorXd* grad = nullptr);

struct TrainResult {
  Model model;
  std::vector<EpochMetrics> metrics;
};

/// Throws NumericalError naming the epoch if the loss becomes non-finite.
TrainResult train(const Dataset& train_set, const Dataset& test_set, const TrainConfig& config);

struct EvalReport {
  double accuracy = 0;
  size_t total = 0;
  /// confusion(true, predicted).
  Eigen::MatrixXi confusion;
  /// snr_db -> (correct, total), only for tagged rows.
  std::map<double, std::pair<size_t, size_t>> per_snr;
  std::vector<int> predictions;

  nlohmann::json to_json() const;
};

EvalReport evaluate(const Model& model, const Dataset& data);

void write_metrics_csv(const std::vector<EpochMetrics>& metrics, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reference baseline: a one-hidden-layer perceptron on flattened (re, im),
// trained full-batch with Adam.

struct BaselineConfig {
  int hidden = 32;
  int epochs = 300;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;
};

struct BaselineMlp {
  Eigen::MatrixXd w1;  // hidden x 2L
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // classes x hidden
  Eigen::VectorXd b2;

  Eigen::VectorXd logits(const ComplexSignal& x) const;
};

BaselineMlp train_baseline(const Dataset& data, const BaselineConfig& config);
EvalReport evaluate_baseline(const BaselineMlp& model, const Dataset& data);

}  // namespace csure::classifier
