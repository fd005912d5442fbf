#pragma once

// Posterior state of the trained model. Naming follows the roles the
// variables play: scale posteriors are Gaussian conditionals on the shared
// axes, axis posteriors are Bingham, precision and noise posteriors are
// Gamma, the index map is a doubly stochastic alignment of axis indices
// between consecutive resolutions.

#include <vector>

#include "mrgp/bingham.hpp"
#include "mrgp/config.hpp"
#include "mrgp/dataset.hpp"
#include "mrgp/numeric.hpp"
#include "mrgp/partition.hpp"
#include "mrgp/types.hpp"

namespace mrgp {

// Conditional Gaussian posterior of the basis-axis scales of one region,
// q(a_i | u_i) = N(zeta_i u_i' ztilde_i, 1 / v_i), plus the joint moments
// with the axes that every other update consumes.
struct ScaleBlock {
  Vector v;        // precision, length p
  Vector zeta;     // explained-variance ratio <gamma>/v, length p
  Matrix ztilde;   // p x d_y data vectors
  Matrix au;       // p x d_y rows <a_i u_i>
  Vector a2;       // <a_i^2>
  Vector central;  // <|a_i u_i - <a_i u_i>|^2>

  void init(int p, Index d_y) {
    v = Vector::Zero(p);
    zeta = Vector::Zero(p);
    ztilde = Matrix::Zero(p, d_y);
    au = Matrix::Zero(p, d_y);
    a2 = Vector::Zero(p);
    central = Vector::Zero(p);
  }
};

// Gaussian-Gamma posterior of the per-region bias and noise precision.
struct BiasNoise {
  Vector nu;  // bias mean
  double theta = 0, c = 0, d = 0;
  double theta0 = 0, c0 = 0, d0 = 0;  // priors (bias prior mean is zero)

  double gamma_mean() const { return c / d; }
  double log_gamma_mean() const { return digamma(c) - std::log(d); }
  // Marginal per-dimension variance of the bias, E[1/(theta gamma)]; the
  // inverse-Gamma mean needs c > 1, below that fall back to 1/(theta <gamma>).
  double bias_var() const {
    return (c > 1.0 + 1e-9) ? d / (theta * (c - 1.0)) : d / (theta * c);
  }
};

struct RegionPosterior {
  IndexRange range;
  Vector center;      // input box center (basis is applied to centered inputs)
  Vector half_range;  // effective half-width L per dimension
  Vector tau;         // basis intervals
  ScaleBlock scales;
  BiasNoise bias;
};

// Shared posteriors: the p Bingham axis posteriors, the Gamma scale-precision
// posteriors, and (when recursion is active) the index-map posterior. The
// conditionally independent mode keeps one block per resolution; the fully
// independent mode keeps one per region.
struct AxesBlock {
  std::vector<BinghamParams> axes;
  std::vector<BinghamMoments> mom;  // cached rho / <uu'> / log C
  Vector alpha, beta;               // precision posterior
  Vector r_mean, log_r_mean;        // cached
  Matrix omega;                     // p x p, rows/cols sum to one
  bool has_omega = false;

  // prior side: zero matrices at a fresh start, previous-resolution
  // posteriors in recursive mode
  std::vector<Matrix> b_prime;
  Vector log_c_prime;
  Vector alpha_prime, beta_prime;

  void refresh_axis_moments() {
    mom.resize(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) mom[i] = bingham_moments(axes[i]);
  }
  void refresh_precision_moments() {
    r_mean = alpha.cwiseQuotient(beta);
    log_r_mean.resize(alpha.size());
    for (Index i = 0; i < alpha.size(); ++i)
      log_r_mean[i] = digamma(alpha[i]) - std::log(beta[i]);
  }
};

struct LevelPosterior {
  std::vector<RegionPosterior> regions;
  std::vector<AxesBlock> blocks;  // 1 (shared) or regions.size() (independent)

  Index block_of(Index l) const {
    return blocks.size() == 1 ? Index{0} : l;
  }
};

// One surrogate-objective record per sweep.
struct ElboRecord {
  int level = 0;
  int cycle = 0;  // interval-refresh cycle within the level
  int sweep = 0;
  double data_term = 0;
  double kl_scales = 0;
  double kl_axes = 0;
  double kl_precisions = 0;
  double kl_index_map = 0;
  double kl_bias_noise = 0;
  double surrogate = 0;
};

struct TrainedModel {
  ModelConfig config;
  Index n = 0, d_x = 0, d_y = 0;
  int p = 0;  // resolved basis count
  Standardizer standardizer;
  PartitionTree partition;
  LevelBoxes boxes;
  std::vector<LevelPosterior> levels;
  std::vector<ElboRecord> elbo;
};

}  // namespace mrgp
