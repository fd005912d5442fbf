#pragma once

#include <cmath>

namespace mrgp {

// Digamma via upward shift and the asymptotic series; ~1e-13 for x > 0.
inline double digamma(double x) {
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  acc += std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return acc;
}

// KL(Gamma(a, b) || Gamma(a0, b0)) with shape/inverse-scale parameters.
inline double gamma_kl(double a, double b, double a0, double b0) {
  return (a - a0) * digamma(a) - std::lgamma(a) + std::lgamma(a0) +
         a0 * (std::log(b) - std::log(b0)) + a * (b0 - b) / b;
}

}  // namespace mrgp
