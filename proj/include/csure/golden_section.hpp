#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace csure {

struct ProbePoint {
  double x;
  double f;
};

struct LineMinimum {
  double x;
  double f;
  int iterations = 0;
};

/// Golden-section search for a minimum of f on [a, b], stopping when the
/// bracket is narrower than `tol`. Returns the best point evaluated, so the
/// result is never worse than any probe. Probes are appended to `trace` when
/// it is non-null.
inline LineMinimum golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol,
                                           std::vector<ProbePoint>* trace = nullptr, int max_iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double x) {
    const double y = f(x);
    if (trace) trace->push_back({x, y});
    return y;
  };

  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  LineMinimum best = fc <= fd ? LineMinimum{c, fc} : LineMinimum{d, fd};

  int it = 0;
  for (; it < max_iterations && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
      if (fc < best.f) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
      if (fd < best.f) best = {d, fd};
    }
  }
  best.iterations = it;
  return best;
}

}  // namespace csure
