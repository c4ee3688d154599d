#pragma once

// Weighted Frechet means on P1, SO(2) and their product.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "csure/errors.hpp"
#include "csure/manifold.hpp"

namespace csure {

/// Non-negative weights summing to one.
template <typename Scalar>
class ConvexWeights {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit ConvexWeights(Vector alpha) : alpha_(std::move(alpha)) {
    if (alpha_.size() == 0) throw UsageError("ConvexWeights: empty weight vector");
    if ((alpha_.array() < Scalar(0)).any() || !alpha_.allFinite()) {
      throw UsageError("ConvexWeights: weights must be finite and non-negative");
    }
    if (std::abs(alpha_.sum() - Scalar(1)) > Scalar(1e-9)) {
      throw UsageError("ConvexWeights: weights must sum to one");
    }
  }

  /// Normalized exponential of free parameters.
  static ConvexWeights from_logits(const Vector& logits) {
    Vector e = (logits.array() - logits.maxCoeff()).exp();
    return ConvexWeights(Vector(e / e.sum()));
  }

  static ConvexWeights uniform(Eigen::Index n) { return ConvexWeights(Vector::Constant(n, Scalar(1) / Scalar(n))); }

  static ConvexWeights one_hot(Eigen::Index n, Eigen::Index hot) {
    Vector v = Vector::Zero(n);
    v(hot) = 1;
    return ConvexWeights(std::move(v));
  }

  Eigen::Index size() const { return alpha_.size(); }
  Scalar operator[](Eigen::Index i) const { return alpha_(i); }
  const Vector& vector() const { return alpha_; }
  std::span<const Scalar> span() const { return {alpha_.data(), static_cast<size_t>(alpha_.size())}; }

 private:
  Vector alpha_;
};

/// Result of the circular weighted mean, with the branch it was found on.
///
/// The mean satisfies theta = sum_i alpha_i * (theta_i + offset_i) - shift,
/// where each offset_i is 0 or 2 pi, and shift is the multiple of 2 pi that
/// returns the sum to (-pi, pi]. Both are piecewise constant in the inputs.
template <typename Scalar>
struct CircularMean {
  Scalar theta = 0;
  Scalar objective = 0;
  std::vector<Scalar> offsets;
  Scalar shift = 0;
  bool degenerate = false;
};

/// Global minimizer of sum_i alpha_i * dist_so2(x, theta_i)^2.
///
/// Each of the n cuts between circularly consecutive angles unrolls the
/// points onto a line; the minimizer is the flat weighted mean on the cut
/// whose unrolled weighted variance is smallest. Variances are updated in
/// O(1) per cut after sorting, and the near-best cuts are re-scored with the
/// exact wrapped objective. Exact ties between distinct candidates resolve to
/// the smallest theta and set `degenerate`.
template <typename Scalar>
CircularMean<Scalar> circular_mean(std::span<const Scalar> thetas, std::span<const Scalar> alpha) {
  const size_t n = thetas.size();
  if (n == 0) throw UsageError("circular_mean: no points");
  if (alpha.size() != n) throw UsageError("circular_mean: weight/point length mismatch");

  const Scalar two_pi = 2 * kPi<Scalar>;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return thetas[a] < thetas[b]; });

  Scalar total = 0, s1 = 0, s2 = 0;
  for (size_t i = 0; i < n; ++i) {
    total += alpha[i];
    s1 += alpha[i] * thetas[i];
    s2 += alpha[i] * thetas[i] * thetas[i];
  }
  if (!(total > 0)) throw UsageError("circular_mean: weights sum to zero");

  // Cut j lifts sorted positions < j by 2 pi.
  std::vector<Scalar> variance(n, std::numeric_limits<Scalar>::infinity());
  Scalar best_variance = std::numeric_limits<Scalar>::infinity();
  for (size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const size_t q = order[j - 1];
      s1 += alpha[q] * two_pi;
      s2 += alpha[q] * (2 * two_pi * thetas[q] + two_pi * two_pi);
      if (thetas[order[j]] == thetas[q]) continue;
    }
    variance[j] = s2 - s1 * s1 / total;
    best_variance = std::min(best_variance, variance[j]);
  }

  auto objective_at = [&](Scalar m) {
    Scalar acc = 0;
    for (size_t i = 0; i < n; ++i) {
      const Scalar d = canonical_theta(m - thetas[i]);
      acc += alpha[i] * d * d;
    }
    return acc;
  };

  const Scalar shortlist = best_variance + Scalar(1e-9) * std::max(Scalar(1), std::abs(best_variance));
  CircularMean<Scalar> best;
  std::vector<Scalar> offsets(n);
  bool have_best = false;
  for (size_t j = 0; j < n; ++j) {
    if (!(variance[j] <= shortlist)) continue;
    std::fill(offsets.begin(), offsets.end(), Scalar(0));
    for (size_t q = 0; q < j; ++q) offsets[order[q]] = two_pi;
    Scalar raw = 0;
    for (size_t i = 0; i < n; ++i) raw += alpha[i] * (thetas[i] + offsets[i]);
    const Scalar m = canonical_theta(raw);
    const Scalar obj = objective_at(m);
    if (!have_best) {
      best = {m, obj, offsets, raw - m, false};
      have_best = true;
      continue;
    }
    const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), best.objective);
    if (obj < best.objective - tol) {
      best = {m, obj, offsets, raw - m, false};
    } else if (std::abs(obj - best.objective) <= tol && std::abs(canonical_theta(m - best.theta)) > Scalar(1e-9)) {
      if (m < best.theta) best = {m, obj, offsets, raw - m, false};
      best.degenerate = true;
    }
  }
  return best;
}

template <typename Scalar>
ScaleP1<Scalar> fm_p1(std::span<const ScaleP1<Scalar>> points, const ConvexWeights<Scalar>& weights) {
  if (points.empty()) throw UsageError("fm_p1: no points");
  if (static_cast<Eigen::Index>(points.size()) != weights.size()) {
    throw UsageError("fm_p1: weight/point length mismatch");
  }
  Scalar acc = 0;
  for (size_t i = 0; i < points.size(); ++i) acc += weights[i] * points[i].log_r();
  return ScaleP1<Scalar>::from_log(acc);
}

/// Frechet mean on SO(2). Sets *degenerate (if given) on antipodal ties.
template <typename Scalar>
AngleSO2<Scalar> fm_so2(std::span<const AngleSO2<Scalar>> points, const ConvexWeights<Scalar>& weights,
                        bool* degenerate = nullptr) {
  if (points.empty()) throw UsageError("fm_so2: no points");
  if (static_cast<Eigen::Index>(points.size()) != weights.size()) {
    throw UsageError("fm_so2: weight/point length mismatch");
  }
  std::vector<Scalar> thetas(points.size());
  std::transform(points.begin(), points.end(), thetas.begin(), [](const auto& a) { return a.theta(); });
  const auto mean = circular_mean<Scalar>(thetas, weights.span());
  if (degenerate) *degenerate = mean.degenerate;
  return AngleSO2<Scalar>(mean.theta);
}

/// Weighted Frechet mean on C; the product objective separates by factor.
template <typename Scalar>
PolarComplex<Scalar> wfm_c(std::span<const PolarComplex<Scalar>> points, const ConvexWeights<Scalar>& weights,
                           bool* degenerate = nullptr) {
  if (points.empty()) throw UsageError("wfm_c: no points");
  if (static_cast<Eigen::Index>(points.size()) != weights.size()) {
    throw UsageError("wfm_c: weight/point length mismatch");
  }
  std::vector<ScaleP1<Scalar>> scales(points.size());
  std::vector<AngleSO2<Scalar>> angles(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    scales[i] = points[i].scale;
    angles[i] = points[i].angle;
  }
  return PolarComplex<Scalar>(fm_p1<Scalar>(scales, weights), fm_so2<Scalar>(angles, weights, degenerate));
}

/// Equal-weight Frechet mean.
template <typename Scalar>
PolarComplex<Scalar> frechet_mean(std::span<const PolarComplex<Scalar>> points) {
  return wfm_c(points, ConvexWeights<Scalar>::uniform(static_cast<Eigen::Index>(points.size())));
}

}  // namespace csure
