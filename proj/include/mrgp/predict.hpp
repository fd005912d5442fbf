#pragma once

// Predictive process evaluation and test metrics. A test point that resolves
// to a unique region chain through all resolutions receives the sum of the
// per-resolution contributions; when the chain breaks at some level, the
// contributions of the resolved prefix are used (root-only in the worst
// case).

#include <utility>
#include <vector>

#include "mrgp/state.hpp"

namespace mrgp {

struct PredictiveSummary {
  Vector mean;  // d_y
  Matrix cov;   // d_y x d_y
  std::vector<std::pair<int, Index>> resolutions_used;  // (level, region)
};

struct GaussianParams {
  Vector mean;
  Matrix cov;
};

// Region chain of a test point: region index per level over the resolved
// prefix (always starts with level 0).
std::vector<Index> region_chain(const TrainedModel& model,
                                const Eigen::Ref<const Vector>& x_star);

PredictiveSummary predict_point(const TrainedModel& model,
                                const Eigen::Ref<const Vector>& x_star);

// Observation-space density parameters: latent covariance plus the root
// noise posterior mean variance.
GaussianParams predictive_y_params(const PredictiveSummary& summary,
                                   const TrainedModel& model);

// Batch prediction in standardized target space.
struct BatchPrediction {
  Matrix mean;      // n x d_y
  Matrix var_diag;  // n x d_y marginal latent variances
};

BatchPrediction predict_batch(const TrainedModel& model,
                              const Eigen::Ref<const Matrix>& x);

// Pooled root-mean-square error over all points and output dimensions.
double rmse(const Eigen::Ref<const Matrix>& predictions,
            const Eigen::Ref<const Matrix>& targets);

// Mean multivariate Gaussian log-density of the targets.
double mll(const std::vector<GaussianParams>& params,
           const Eigen::Ref<const Matrix>& targets);

// Full-covariance evaluation against standardized targets, streamed in
// chunks so the d_y x d_y covariances never materialize for all points.
struct EvalResult {
  double rmse = 0;
  double mll = 0;
};

EvalResult evaluate(const TrainedModel& model, const Eigen::Ref<const Matrix>& x_test,
                    const Eigen::Ref<const Matrix>& y_test_std);

}  // namespace mrgp
