#pragma once

// The complex plane as the product P1 x SO(2) under the Log-Euclidean metric.
//
// A point c = r e^{i theta} is stored as (log r, theta) with theta on the
// principal branch (-pi, pi]. The flat log-domain coordinate is the 2-vector
// (log r, sqrt(2) theta); all Gaussian and mean computations happen there.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>

namespace csure {

template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

template <typename Scalar>
inline constexpr Scalar kSqrt2 = std::numbers::sqrt2_v<Scalar>;

/// Smallest representable scale; magnitudes at or below it are clamped here.
template <typename Scalar>
inline constexpr Scalar kScaleFloor = Scalar(1e-6);

/// Log-domain coordinate (log r, sqrt(2) theta).
template <typename Scalar>
using LogCoord = Eigen::Matrix<Scalar, 2, 1>;

/// Reduces an unbounded angle to (-pi, pi]. Throws std::domain_error on
/// non-finite input.
template <typename Scalar>
Scalar canonical_theta(Scalar raw) {
  if (!std::isfinite(raw)) {
    throw std::domain_error("angle is not finite");
  }
  const Scalar two_pi = 2 * kPi<Scalar>;
  Scalar t = std::remainder(raw, two_pi);
  if (t <= -kPi<Scalar>) t += two_pi;
  if (t > kPi<Scalar>) t -= two_pi;
  return t;
}

/// Element of SO(2), identified with its principal rotation angle.
template <typename Scalar>
class AngleSO2 {
 public:
  AngleSO2() = default;
  explicit AngleSO2(Scalar raw) : theta_(canonical_theta(raw)) {}

  Scalar theta() const { return theta_; }
  /// sqrt(2) * theta: the size of the rotation in the Frobenius norm of log.
  Scalar tilde() const { return kSqrt2<Scalar> * theta_; }

  /// Rotation matrix [[cos, -sin], [sin, cos]].
  Eigen::Matrix<Scalar, 2, 2> matrix() const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << std::cos(theta_), -std::sin(theta_), std::sin(theta_), std::cos(theta_);
    return m;
  }

  friend bool operator==(const AngleSO2&, const AngleSO2&) = default;

 private:
  Scalar theta_ = 0;
};

template <typename Scalar>
AngleSO2<Scalar> canonicalize_angle(Scalar raw) {
  return AngleSO2<Scalar>(raw);
}

/// Element of P1 (positive reals). Stored as log r.
template <typename Scalar>
class ScaleP1 {
 public:
  ScaleP1() = default;

  /// Magnitudes r <= kScaleFloor (including zero and negatives) clamp to the
  /// floor and set degenerate().
  explicit ScaleP1(Scalar r) {
    if (!(r > kScaleFloor<Scalar>)) {
      r = kScaleFloor<Scalar>;
      degenerate_ = true;
    }
    log_r_ = std::log(r);
  }

  static ScaleP1 from_log(Scalar log_r) {
    ScaleP1 s;
    s.log_r_ = log_r;
    return s;
  }

  Scalar r() const { return std::exp(log_r_); }
  Scalar log_r() const { return log_r_; }
  bool degenerate() const { return degenerate_; }

  friend bool operator==(const ScaleP1& a, const ScaleP1& b) { return a.log_r_ == b.log_r_; }

 private:
  Scalar log_r_ = 0;
  bool degenerate_ = false;
};

/// A point of C \ {0} in polar form.
template <typename Scalar>
struct PolarComplex {
  ScaleP1<Scalar> scale;
  AngleSO2<Scalar> angle;

  PolarComplex() = default;
  PolarComplex(ScaleP1<Scalar> s, AngleSO2<Scalar> a) : scale(s), angle(a) {}
  PolarComplex(Scalar r, Scalar theta) : scale(r), angle(theta) {}

  static PolarComplex from_cartesian(Scalar re, Scalar im) {
    return PolarComplex(std::hypot(re, im), std::atan2(im, re));
  }
  static PolarComplex from_complex(const std::complex<Scalar>& c) {
    return from_cartesian(c.real(), c.imag());
  }

  std::complex<Scalar> to_complex() const { return std::polar(scale.r(), angle.theta()); }

  Scalar r() const { return scale.r(); }
  Scalar theta() const { return angle.theta(); }
  bool degenerate() const { return scale.degenerate(); }

  friend bool operator==(const PolarComplex& a, const PolarComplex& b) {
    return a.scale == b.scale && a.angle == b.angle;
  }
};

// ---------------------------------------------------------------------------
// Distances

/// Signed shorter-arc difference a - b in (-pi, pi].
template <typename Scalar>
Scalar angle_difference(const AngleSO2<Scalar>& a, const AngleSO2<Scalar>& b) {
  return canonical_theta(a.theta() - b.theta());
}

template <typename Scalar>
Scalar dist_so2(const AngleSO2<Scalar>& a, const AngleSO2<Scalar>& b) {
  const Scalar gap = std::abs(a.tilde() - b.tilde());
  return std::min(gap, 2 * kSqrt2<Scalar> * kPi<Scalar> - gap);
}

template <typename Scalar>
Scalar dist_p1(const ScaleP1<Scalar>& a, const ScaleP1<Scalar>& b) {
  return std::abs(a.log_r() - b.log_r());
}

/// Product metric: the two factor distances combined in quadrature.
template <typename Scalar>
Scalar dist_c(const PolarComplex<Scalar>& a, const PolarComplex<Scalar>& b) {
  return std::hypot(dist_p1(a.scale, b.scale), dist_so2(a.angle, b.angle));
}

// ---------------------------------------------------------------------------
// Log / exp on the abelian group P1 x SO(2)

template <typename Scalar>
LogCoord<Scalar> log_map(const PolarComplex<Scalar>& x) {
  return LogCoord<Scalar>(x.scale.log_r(), x.angle.tilde());
}

template <typename Derived>
auto exp_map(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  return PolarComplex<Scalar>(ScaleP1<Scalar>::from_log(v(0)),
                              AngleSO2<Scalar>(v(1) / kSqrt2<Scalar>));
}

/// log x - log y with the angle taken along the shorter arc. Its norm is
/// dist_c(x, y).
template <typename Scalar>
LogCoord<Scalar> log_difference(const PolarComplex<Scalar>& x, const PolarComplex<Scalar>& y) {
  return LogCoord<Scalar>(x.scale.log_r() - y.scale.log_r(),
                          kSqrt2<Scalar> * angle_difference(x.angle, y.angle));
}

/// Group product: exp(log a + log b), i.e. complex multiplication.
template <typename Scalar>
PolarComplex<Scalar> compose(const PolarComplex<Scalar>& a, const PolarComplex<Scalar>& b) {
  return exp_map(LogCoord<Scalar>(log_map(a) + log_map(b)));
}

template <typename Scalar>
PolarComplex<Scalar> inverse(const PolarComplex<Scalar>& a) {
  return exp_map(LogCoord<Scalar>(-log_map(a)));
}

/// Moves from `base` along the log-domain displacement `delta`.
template <typename Scalar>
PolarComplex<Scalar> translate(const PolarComplex<Scalar>& base, const LogCoord<Scalar>& delta) {
  return PolarComplex<Scalar>(ScaleP1<Scalar>::from_log(base.scale.log_r() + delta(0)),
                              AngleSO2<Scalar>(base.angle.theta() + delta(1) / kSqrt2<Scalar>));
}

using Angle = AngleSO2<double>;
using Scale = ScaleP1<double>;
using Complex = PolarComplex<double>;
using LogCoordd = LogCoord<double>;

}  // namespace csure
