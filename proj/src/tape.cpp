#include "csure/ad/tape.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

#include "csure/errors.hpp"

namespace csure::ad {

Var Tape::variable(double value) { return node(value, {}, {}); }

Var Tape::node(double value, std::span<const Var> parents, std::span<const double> partials) {
  assert(parents.size() == partials.size());
  const auto index = static_cast<std::uint32_t>(values_.size());
  values_.push_back(value);
  edge_begin_.push_back(static_cast<std::uint32_t>(edge_parent_.size()));
  for (size_t i = 0; i < parents.size(); ++i) {
    assert(parents[i].tape() == this);
    edge_parent_.push_back(parents[i].index());
    edge_partial_.push_back(partials[i]);
  }
  return Var(this, index, value);
}

Var Tape::node(double value, const Var& a, double da) {
  const Var parents[1] = {a};
  const double partials[1] = {da};
  return node(value, parents, partials);
}

Var Tape::node(double value, const Var& a, double da, const Var& b, double db) {
  const Var parents[2] = {a, b};
  const double partials[2] = {da, db};
  return node(value, parents, partials);
}

std::vector<double> Tape::adjoints(const Var& output) const {
  std::vector<double> adj(values_.size(), 0.0);
  if (output.tape() != this) throw UsageError("Tape::adjoints: output belongs to another tape");
  adj[output.index()] = 1.0;
  for (size_t n = output.index() + 1; n-- > 0;) {
    const double a = adj[n];
    if (a == 0.0) continue;
    const std::uint32_t end = n + 1 < edge_begin_.size() ? edge_begin_[n + 1]
                                                         : static_cast<std::uint32_t>(edge_parent_.size());
    for (std::uint32_t e = edge_begin_[n]; e < end; ++e) adj[edge_parent_[e]] += a * edge_partial_[e];
  }
  return adj;
}

void Tape::clear() {
  values_.clear();
  edge_begin_.clear();
  edge_parent_.clear();
  edge_partial_.clear();
}

void Tape::reserve(size_t nodes, size_t edges) {
  values_.reserve(nodes);
  edge_begin_.reserve(nodes);
  edge_parent_.reserve(edges);
  edge_partial_.reserve(edges);
}

Var operator+(const Var& a, const Var& b) { return a.tape()->node(a.value() + b.value(), a, 1.0, b, 1.0); }
Var operator-(const Var& a, const Var& b) { return a.tape()->node(a.value() - b.value(), a, 1.0, b, -1.0); }
Var operator*(const Var& a, const Var& b) {
  return a.tape()->node(a.value() * b.value(), a, b.value(), b, a.value());
}
Var operator/(const Var& a, const Var& b) {
  const double q = a.value() / b.value();
  return a.tape()->node(q, a, 1.0 / b.value(), b, -q / b.value());
}
Var operator-(const Var& a) { return a.tape()->node(-a.value(), a, -1.0); }
Var operator+(const Var& a, double b) { return a.tape()->node(a.value() + b, a, 1.0); }
Var operator+(double a, const Var& b) { return b + a; }
Var operator-(const Var& a, double b) { return a.tape()->node(a.value() - b, a, 1.0); }
Var operator-(double a, const Var& b) { return b.tape()->node(a - b.value(), b, -1.0); }
Var operator*(const Var& a, double b) { return a.tape()->node(a.value() * b, a, b); }
Var operator*(double a, const Var& b) { return b * a; }
Var operator/(const Var& a, double b) { return a.tape()->node(a.value() / b, a, 1.0 / b); }

Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return a.tape()->node(e, a, e);
}
Var log(const Var& a) { return a.tape()->node(std::log(a.value()), a, 1.0 / a.value()); }
Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return a.tape()->node(t, a, 1.0 - t * t);
}
Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value());
  return a.tape()->node(s, a, s > 0.0 ? 0.5 / s : 0.0);
}

double weighted_sum(std::span<const double> weights, std::span<const double> values) {
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) acc += weights[i] * values[i];
  return acc;
}

Var weighted_sum(std::span<const Var> weights, std::span<const double> values) {
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) acc += weights[i].value() * values[i];
  return weights.front().tape()->node(acc, weights, values);
}

double affine(std::span<const double> w, std::span<const double> x, double bias) {
  double acc = bias;
  for (size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
  return acc;
}

Var affine(std::span<const Var> w, std::span<const Var> x, const Var& bias) {
  const size_t n = w.size();
  std::vector<Var> parents;
  std::vector<double> partials;
  parents.reserve(2 * n + 1);
  partials.reserve(2 * n + 1);
  double acc = bias.value();
  for (size_t i = 0; i < n; ++i) {
    acc += w[i].value() * x[i].value();
    parents.push_back(w[i]);
    partials.push_back(x[i].value());
    parents.push_back(x[i]);
    partials.push_back(w[i].value());
  }
  parents.push_back(bias);
  partials.push_back(1.0);
  return bias.tape()->node(acc, parents, partials);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) total += (out[i] = std::exp(logits[i] - m));
  for (double& o : out) o /= total;
  return out;
}

std::vector<Var> softmax(std::span<const Var> logits) {
  std::vector<double> raw(logits.size());
  std::transform(logits.begin(), logits.end(), raw.begin(), [](const Var& v) { return v.value(); });
  const auto p = softmax(std::span<const double>(raw));
  std::vector<Var> out;
  out.reserve(p.size());
  std::vector<double> partials(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    for (size_t j = 0; j < p.size(); ++j) partials[j] = p[i] * ((i == j ? 1.0 : 0.0) - p[j]);
    out.push_back(logits.front().tape()->node(p[i], logits, partials));
  }
  return out;
}

double norm2d(double a, double b) { return std::hypot(a, b); }

Var norm2d(const Var& a, const Var& b) {
  const double n = std::hypot(a.value(), b.value());
  if (n == 0.0) return a.tape()->node(0.0, a, 0.0, b, 0.0);
  return a.tape()->node(n, a, a.value() / n, b, b.value() / n);
}

double cross_entropy(std::span<const double> logits, size_t label) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - m);
  return m + std::log(total) - logits[label];
}

Var cross_entropy(std::span<const Var> logits, size_t label) {
  std::vector<double> raw(logits.size());
  std::transform(logits.begin(), logits.end(), raw.begin(), [](const Var& v) { return v.value(); });
  auto partials = softmax(std::span<const double>(raw));
  partials[label] -= 1.0;
  return logits.front().tape()->node(cross_entropy(std::span<const double>(raw), label), logits, partials);
}

double mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

Var mean(std::span<const Var> xs) {
  double acc = 0.0;
  for (const auto& x : xs) acc += x.value();
  const double inv = 1.0 / static_cast<double>(xs.size());
  std::vector<double> partials(xs.size(), inv);
  return xs.front().tape()->node(acc * inv, xs, partials);
}

}  // namespace csure::ad
