#pragma once

// Scalar reverse-mode differentiation.
//
// Every operation appends one node to a Tape recording its value and the
// partial derivatives with respect to its parents. Fused n-ary nodes (dot
// products, softmax entries, weighted sums) keep the tape short for the
// layer computations. adjoints() sweeps the tape once in reverse.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace csure::ad {

class Tape;

/// Handle to a tape node. Cheap to copy; valid while its tape is alive and
/// not cleared.
class Var {
 public:
  Var() = default;

  double value() const { return value_; }
  std::uint32_t index() const { return index_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index, double value) : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
  double value_ = 0;
};

class Tape {
 public:
  /// New leaf (no parents).
  Var variable(double value);

  /// New node with the given parents and partials d(node)/d(parent).
  Var node(double value, std::span<const Var> parents, std::span<const double> partials);
  Var node(double value, const Var& a, double da);
  Var node(double value, const Var& a, double da, const Var& b, double db);

  /// d(output)/d(node) for every node recorded so far.
  std::vector<double> adjoints(const Var& output) const;

  size_t size() const { return values_.size(); }
  void clear();
  void reserve(size_t nodes, size_t edges);

 private:
  std::vector<double> values_;
  std::vector<std::uint32_t> edge_begin_;
  std::vector<std::uint32_t> edge_parent_;
  std::vector<double> edge_partial_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator+(const Var& a, double b);
Var operator+(double a, const Var& b);
Var operator-(const Var& a, double b);
Var operator-(double a, const Var& b);
Var operator*(const Var& a, double b);
Var operator*(double a, const Var& b);
Var operator/(const Var& a, double b);

Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var sqrt(const Var& a);

// ---------------------------------------------------------------------------
// Fused operations, with plain-double overloads so layer code can be written
// once over a Scalar template parameter.

inline double value_of(double x) { return x; }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double tanh(double x) { return std::tanh(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double value_of(const Var& x) { return x.value(); }

/// sum_i weights_i * values_i, with constant values.
double weighted_sum(std::span<const double> weights, std::span<const double> values);
Var weighted_sum(std::span<const Var> weights, std::span<const double> values);

/// sum_i w_i * x_i + bias.
double affine(std::span<const double> w, std::span<const double> x, double bias);
Var affine(std::span<const Var> w, std::span<const Var> x, const Var& bias);

/// Normalized exponential.
std::vector<double> softmax(std::span<const double> logits);
std::vector<Var> softmax(std::span<const Var> logits);

/// sqrt(a^2 + b^2); the gradient at the origin is taken as zero.
double norm2d(double a, double b);
Var norm2d(const Var& a, const Var& b);

/// -log softmax(logits)[label].
double cross_entropy(std::span<const double> logits, size_t label);
Var cross_entropy(std::span<const Var> logits, size_t label);

/// Arithmetic mean of a list of nodes.
double mean(std::span<const double> xs);
Var mean(std::span<const Var> xs);

}  // namespace csure::ad
