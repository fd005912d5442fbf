#pragma once

// Maximum-likelihood point estimation of the basis interval variables, one
// input dimension at a time with the other dimensions held at their previous
// optimized values.

#include "mrgp/basis.hpp"
#include "mrgp/types.hpp"

namespace mrgp {

struct IntervalObjective {
  double lower = 0;  // strict bounds: L < tau < L + p/L
  double upper = 0;
  SpectralSpec spec;
  double gamma_mean = 1;
  Vector x_d;           // centered coordinates of the optimized dimension
  Vector r_mean;        // p
  Vector a2;            // p
  Vector q;             // p: |<a u>|^2 + <|au - <au>|^2>
  Matrix dots;          // n x p: k_t' <a_i u_i>
  Matrix phi_other;     // n x p cross-dimension eigenfunction products
  Vector lambda_other;  // p cross-dimension eigenvalue remainders
};

// h(tau) = h_prior + h_likelihood as a function of one interval coordinate.
double objective_h(const IntervalObjective& obj, double tau_d);

// Coarse 64-point grid followed by golden-section refinement; never returns
// a value with h below the (clamped) incumbent.
double optimize_tau(const IntervalObjective& obj, double incumbent);

}  // namespace mrgp
