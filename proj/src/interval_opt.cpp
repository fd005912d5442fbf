#include "mrgp/interval_opt.hpp"

#include <algorithm>
#include <cmath>

#include "mrgp/errors.hpp"

namespace mrgp {

double objective_h(const IntervalObjective& obj, double tau_d) {
  if (!(tau_d > obj.lower && tau_d < obj.upper))
    throw NumericError("interval objective evaluated outside its bounds");

  const Index p = obj.r_mean.size();
  const Index n = obj.x_d.size();

  double h_prior = 0.0;
  for (Index i = 0; i < p; ++i) {
    const double lam = eigenvalue_1d(static_cast<int>(i + 1), tau_d) + obj.lambda_other[i];
    const double s = spectral_density(obj.spec, std::sqrt(lam));
    h_prior += std::log(s) - obj.r_mean[i] * obj.a2[i] / (2.0 * s);
  }
  h_prior *= -0.5;

  double h_lik = 0.0;
  for (Index t = 0; t < n; ++t) {
    for (Index i = 0; i < p; ++i) {
      const double w = obj.phi_other(t, i) *
                       eigenfunction_1d<double>(static_cast<int>(i + 1), obj.x_d[t], tau_d);
      h_lik += w * w * obj.q[i] + 2.0 * w * obj.dots(t, i);
    }
  }
  h_lik *= -obj.gamma_mean;

  return h_prior + h_lik;
}

double optimize_tau(const IntervalObjective& obj, double incumbent) {
  const double span = obj.upper - obj.lower;
  const double margin = 1e-6 * span;
  const double inc = std::clamp(incumbent, obj.lower + margin, obj.upper - margin);
  const double h_inc = objective_h(obj, inc);

  // coarse grid
  constexpr int grid_points = 64;
  double best_tau = inc;
  double best_h = h_inc;
  for (int g = 0; g < grid_points; ++g) {
    const double tau = obj.lower + margin +
                       (span - 2.0 * margin) * (g + 0.5) / static_cast<double>(grid_points);
    const double h = objective_h(obj, tau);
    if (h > best_h) {
      best_h = h;
      best_tau = tau;
    }
  }

  // golden-section refinement around the best grid point
  const double cell = (span - 2.0 * margin) / grid_points;
  double a = std::max(obj.lower + margin, best_tau - cell);
  double b = std::min(obj.upper - margin, best_tau + cell);
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective_h(obj, x1);
  double f2 = objective_h(obj, x2);
  for (int it = 0; it < 200 && (b - a) > 1e-6 * (std::abs(best_tau) + 1e-12); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective_h(obj, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective_h(obj, x1);
    }
  }
  const double mid = 0.5 * (a + b);
  const double f_mid = objective_h(obj, mid);
  if (f_mid > best_h) {
    best_h = f_mid;
    best_tau = mid;
  }

  return (best_h >= h_inc) ? best_tau : inc;
}

}  // namespace mrgp
