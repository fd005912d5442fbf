#pragma once

// Reduced-rank GP machinery: eigenfunctions of the Laplace operator on a
// centered box, their eigenvalues, and the Matern spectral density that
// weights the expansion.

#include <cmath>
#include <numbers>

#include "mrgp/errors.hpp"
#include "mrgp/types.hpp"

namespace mrgp {

// sin(pi*s) with exact zeros at integer s. Arguments of the basis sines are
// rational in (x+tau)/(2*tau), so boundary hits land on exact integers.
template <typename Scalar>
Scalar sin_pi(Scalar s) {
  const Scalar k = std::round(s);
  const Scalar r = s - k;
  if (r == Scalar(0)) return Scalar(0);
  const Scalar val = std::sin(std::numbers::pi_v<Scalar> * r);
  return (static_cast<long long>(k) % 2 == 0) ? val : -val;
}

struct SpectralSpec {
  double nu = 1.5;       // Matern order
  double length = 1.0;   // lengthscale
  double variance = 1.0; // signal variance sigma^2
  int dx = 1;            // input dimension
};

// Matern spectral density over angular frequency s (isotropic, dx dims):
//   S(s) = sigma^2 2^dx pi^(dx/2) Gamma(nu+dx/2) (2 nu)^nu
//          / (Gamma(nu) l^(2 nu)) * (2 nu / l^2 + s^2)^-(nu+dx/2)
inline double spectral_density(const SpectralSpec& spec, double s) {
  const double d = static_cast<double>(spec.dx);
  const double two_nu = 2.0 * spec.nu;
  const double lead = spec.variance * std::pow(2.0, d) *
                      std::pow(std::numbers::pi, 0.5 * d) *
                      std::exp(std::lgamma(spec.nu + 0.5 * d) - std::lgamma(spec.nu)) *
                      std::pow(two_nu, spec.nu) / std::pow(spec.length, two_nu);
  return lead * std::pow(two_nu / (spec.length * spec.length) + s * s,
                         -(spec.nu + 0.5 * d));
}

namespace detail {
template <typename Scalar>
void check_tau(const Eigen::Ref<const VectorT<Scalar>>& tau) {
  for (Index d = 0; d < tau.size(); ++d) {
    if (!(tau[d] > Scalar(0)))
      throw NumericError("basis interval tau must be positive in every dimension");
  }
}
}  // namespace detail

// One-dimensional factor of the i-th eigenfunction.
template <typename Scalar>
Scalar eigenfunction_1d(int i, Scalar x, Scalar tau) {
  if (!(tau > Scalar(0))) throw NumericError("basis interval tau must be positive");
  return sin_pi<Scalar>(Scalar(i) * (x + tau) / (Scalar(2) * tau)) / std::sqrt(tau);
}

// phi_i(x, tau) = prod_d tau_d^(-1/2) sin(pi i (x_d + tau_d) / (2 tau_d))
template <typename Scalar>
Scalar eigenfunction(int i, const Eigen::Ref<const VectorT<Scalar>>& x,
                     const Eigen::Ref<const VectorT<Scalar>>& tau) {
  detail::check_tau<Scalar>(tau);
  Scalar out(1);
  for (Index d = 0; d < x.size(); ++d)
    out *= sin_pi<Scalar>(Scalar(i) * (x[d] + tau[d]) / (Scalar(2) * tau[d])) /
           std::sqrt(tau[d]);
  return out;
}

// lambda_i(tau) = sum_d (pi i / (2 tau_d))^2
template <typename Scalar>
Scalar eigenvalue(int i, const Eigen::Ref<const VectorT<Scalar>>& tau) {
  detail::check_tau<Scalar>(tau);
  Scalar out(0);
  for (Index d = 0; d < tau.size(); ++d) {
    const Scalar w = std::numbers::pi_v<Scalar> * Scalar(i) / (Scalar(2) * tau[d]);
    out += w * w;
  }
  return out;
}

inline double eigenvalue_1d(int i, double tau) {
  const double w = std::numbers::pi * static_cast<double>(i) / (2.0 * tau);
  return w * w;
}

// Row of the design matrix: [phi_1(x), ..., phi_p(x)].
inline Vector design_row(const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& tau, int p) {
  Vector row(p);
  for (int i = 1; i <= p; ++i) row[i - 1] = eigenfunction<double>(i, x, tau);
  return row;
}

// Design matrix for a batch of (already centered) inputs, one row per sample.
inline Matrix design_matrix(const Eigen::Ref<const Matrix>& x,
                            const Eigen::Ref<const Vector>& tau, int p) {
  Matrix phi(x.rows(), p);
  for (Index t = 0; t < x.rows(); ++t)
    phi.row(t) = design_row(x.row(t).transpose(), tau, p).transpose();
  return phi;
}

// Truncated expansion of the kernel: sum_i S(sqrt(lambda_i)) phi_i(x) phi_i(x').
inline double kernel_approx(const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const Vector>& xp,
                            const Eigen::Ref<const Vector>& tau, int p,
                            const SpectralSpec& spec) {
  double out = 0.0;
  for (int i = 1; i <= p; ++i) {
    const double s = spectral_density(spec, std::sqrt(eigenvalue<double>(i, tau)));
    out += s * eigenfunction<double>(i, x, tau) * eigenfunction<double>(i, xp, tau);
  }
  return out;
}

}  // namespace mrgp
