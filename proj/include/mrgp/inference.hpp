#pragma once

// Structured variational inference for the multiresolution GP. Resolutions
// are fit in order; within a resolution, coordinate ascent sweeps run
// scales -> axes -> precisions -> index map -> bias/noise until the
// surrogate objective stalls. In the conditionally independent mode the
// axis, precision and index-map posteriors of one resolution become the
// priors of the next; the fully independent mode severs that recursion.

#include <vector>

#include "mrgp/state.hpp"

namespace mrgp {

// App-C joint moments of (a_i, u_i) given the conditional scale posterior
// and the axis second moment.
struct JointMoments {
  Vector au;       // <a u>
  double a2 = 0;   // <a^2>
  double central = 0;  // <|a u - <a u>|^2>
};

JointMoments joint_moments(double zeta, const Eigen::Ref<const Vector>& ztilde,
                           double v, const Eigen::Ref<const Matrix>& uu);

// Doubly stochastic normalization of exp(log_w) by alternating row/column
// scaling; max deviation 1e-8, fatal after 1e4 rounds.
Matrix sinkhorn(const Eigen::Ref<const Matrix>& log_w);

class Trainer {
 public:
  // y must already be standardized; inputs are used as given.
  Trainer(Matrix x, Matrix y, ModelConfig config);

  // Full training schedule; consumes the trainer.
  TrainedModel run(const Standardizer& standardizer);

  // Stepwise interface (drives the same state as run()).
  void begin_level(int level);
  void update_scales(Index l);
  void update_axes();
  void update_precisions();
  void update_index_map();
  void update_bias_noise(Index l);
  ElboRecord sweep();       // one full update cycle; records/returns the surrogate
  int run_level_block();    // sweeps until convergence or the sweep cap
  void refresh_intervals();
  void finish_level();

  double surrogate() const;
  ElboRecord elbo_terms() const;

  // Targets entering the current level: y minus lower-resolution means.
  const Matrix& residual_targets(Index l) const { return work_[l].targets; }
  // Literal posterior remainder mean / variance of the current level.
  Matrix remainder_means(Index l) const;
  double remainder_variance(Index l) const;

  const LevelPosterior& level_state() const { return post_; }
  LevelPosterior& mutable_level_state() { return post_; }
  const Matrix& cumulative_mean() const { return cum_f_; }
  const Vector& cumulative_trace() const { return cum_tr_; }
  const PartitionTree& partition() const { return tree_; }
  int current_level() const { return level_; }
  int basis_count() const { return p_; }

 private:
  struct RegionWork {
    Matrix xc;        // centered inputs
    Matrix phi;       // design matrix
    Vector sumphi2;   // column sums of phi^2
    Vector spectral;  // S(sqrt(lambda_i(tau)))
    Matrix targets;   // residual targets
    Matrix resid;     // targets - 1 nu' - phi <au>
    Vector g;         // propagated second central moments per sample
  };

  void rebuild_design(Index l);
  void refresh_region_moments(Index l);
  AxesBlock make_fresh_block() const;
  AxesBlock make_recursive_block(const AxesBlock& prev) const;
  static Matrix weighted_prior_flat(const AxesBlock& block);

  Matrix x_, y_;
  ModelConfig cfg_;
  int p_ = 0;
  Index n_ = 0, dx_ = 0, dy_ = 0;
  PartitionTree tree_;
  LevelBoxes boxes_;

  Matrix cum_f_;   // n x d_y mean of the finished resolutions
  Vector cum_tr_;  // n propagated predictive traces

  int level_ = -1;
  int cycle_ = 0;
  int sweep_no_ = 0;
  LevelPosterior post_;
  std::vector<RegionWork> work_;
  std::vector<LevelPosterior> finished_;
  std::vector<ElboRecord> elbo_;
};

TrainedModel fit(const Dataset& data, const ModelConfig& config);

}  // namespace mrgp
