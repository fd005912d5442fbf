#pragma once

// Bingham distribution on the unit sphere S^{d-1}, density proportional to
// exp(u' B u). The normalizing constant has no closed form; log_norm_const
// implements the third-order saddle-point approximation of Kume & Wood, and
// moment_rho its exact gradient, so that sum(rho) = 1 holds to roundoff.

#include "mrgp/types.hpp"

namespace mrgp {

struct BinghamParams {
  Matrix M;      // orthonormal eigenvectors of B, one per column
  Vector kappa;  // canonical eigenvalues (max element 0)

  Index dim() const { return kappa.size(); }
  Matrix matrix() const { return M * kappa.asDiagonal() * M.transpose(); }
};

// Subtract the max element; u'u = 1 makes the density invariant under the
// shift, and log C transforms as log C(kappa) = log C(kappa - c) + c.
Vector canonicalize(const Vector& kappa);

// Eigendecompose a symmetric B into canonical (M, kappa).
BinghamParams bingham_from_matrix(const Eigen::Ref<const Matrix>& b);

// log integral over S^{d-1} of exp(u' diag(kappa) u).
double log_norm_const(const Vector& kappa);

// rho_d = d log C / d kappa_d = E[u_d^2] in the eigenbasis.
Vector moment_rho(const Vector& kappa);

// <u u'> = M diag(rho) M'.
Matrix second_moment(const BinghamParams& params);

// Cached per-axis quantities used throughout the inference sweeps.
struct BinghamMoments {
  Vector rho;
  Matrix uu;    // <u u'>
  double log_c; // log C(kappa)
};

BinghamMoments bingham_moments(const BinghamParams& params);

}  // namespace mrgp
