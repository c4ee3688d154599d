#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "csure/classifier/model.hpp"

namespace testing {

namespace cls = csure::classifier;

inline cls::TrainConfig small_train_config(const cls::Dataset& data, double v, int channels = 4) {
  cls::TrainConfig cfg;
  cfg.v = v;
  cfg.shape.channels = channels;
  cfg.shape.classes = cls::count_classes(data);
  cfg.shape.length = static_cast<int>(data.front().samples.size());
  cfg.seed = 5;
  return cfg;
}

/// A model whose prototypes come from one pass of running means over `data`.
inline cls::Model fitted_model(const cls::Dataset& data, const cls::TrainConfig& cfg) {
  auto model = cls::init_model(cfg);
  std::vector<cls::FeatureGrid<double>> grids;
  std::vector<int> labels;
  std::vector<size_t> counts(cfg.shape.classes, 0);
  for (const auto& x : data) {
    grids.push_back(cls::compute_features(model, x));
    labels.push_back(x.label);
    ++counts[x.label];
  }
  cls::update_running_fm(model.protos, grids, labels, cfg.shape, 0.0);
  cls::refit_prototypes(model.protos, counts, cfg);
  cls::freeze_prototypes(model);
  return model;
}

struct GradCheck {
  double max_rel = 0;
  Eigen::Index worst = -1;
};

/// Central differences of batch_loss over params[offset, offset + count)
/// against the tape gradient. Relative error uses max(|fd|, |analytic|,
/// floor) as the scale so that exact zeros do not divide by zero.
inline GradCheck check_param_gradient(const cls::Model& model, const cls::Dataset& data, std::span<const size_t> batch,
                                      Eigen::Index offset, Eigen::Index count, double step, double floor = 1e-6) {
  Eigen::VectorXd grad;
  cls::batch_loss(model, data, batch, &grad);
  cls::Model probe = model;
  GradCheck out;
  for (Eigen::Index q = offset; q < offset + count; ++q) {
    const double orig = probe.params(q);
    probe.params(q) = orig + step;
    const double hi = cls::batch_loss(probe, data, batch);
    probe.params(q) = orig - step;
    const double lo = cls::batch_loss(probe, data, batch);
    probe.params(q) = orig;
    const double fd = (hi - lo) / (2 * step);
    const double rel = std::abs(fd - grad(q)) / std::max({std::abs(fd), std::abs(grad(q)), floor});
    if (rel > out.max_rel) out.max_rel = rel, out.worst = q;
  }
  return out;
}

}  // namespace testing
