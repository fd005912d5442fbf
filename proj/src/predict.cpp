#include "mrgp/predict.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "mrgp/basis.hpp"
#include "mrgp/errors.hpp"

namespace mrgp {

std::vector<Index> region_chain(const TrainedModel& model,
                                const Eigen::Ref<const Vector>& x_star) {
  std::vector<Index> chain{0};
  for (int j = 1; j <= model.config.m; ++j) {
    const auto hit = locate_region(model.boxes[j], x_star);
    if (!hit) break;
    chain.push_back(*hit);
  }
  return chain;
}

namespace {

void accumulate_region(const TrainedModel& model, int level, Index l,
                       const Eigen::Ref<const Vector>& x_star, Vector& mean,
                       Matrix* cov) {
  const RegionPosterior& r = model.levels[level].regions[l];
  const Vector xc = x_star - r.center;
  const Vector phi = design_row(xc, r.tau, model.p);
  mean.noalias() += r.scales.au.transpose() * phi;
  mean += r.bias.nu;
  if (cov) {
    const AxesBlock& block = model.levels[level].blocks[model.levels[level].block_of(l)];
    cov->diagonal().array() += r.bias.bias_var();
    for (int i = 0; i < model.p; ++i) {
      const double w = phi[i] * phi[i];
      const Vector au = r.scales.au.row(i).transpose();
      cov->noalias() += w * (r.scales.a2[i] * block.mom[i].uu - au * au.transpose());
    }
  }
}

}  // namespace

PredictiveSummary predict_point(const TrainedModel& model,
                                const Eigen::Ref<const Vector>& x_star) {
  PredictiveSummary out;
  out.mean = Vector::Zero(model.d_y);
  out.cov = Matrix::Zero(model.d_y, model.d_y);
  const auto chain = region_chain(model, x_star);
  for (std::size_t j = 0; j < chain.size(); ++j) {
    accumulate_region(model, static_cast<int>(j), chain[j], x_star, out.mean, &out.cov);
    out.resolutions_used.emplace_back(static_cast<int>(j), chain[j]);
  }
  return out;
}

GaussianParams predictive_y_params(const PredictiveSummary& summary,
                                   const TrainedModel& model) {
  GaussianParams params;
  params.mean = summary.mean;
  params.cov = summary.cov;
  const BiasNoise& root = model.levels[0].regions[0].bias;
  params.cov.diagonal().array() += 1.0 / root.gamma_mean();
  return params;
}

double rmse(const Eigen::Ref<const Matrix>& predictions,
            const Eigen::Ref<const Matrix>& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
    throw DataError("rmse: prediction/target shape mismatch");
  return std::sqrt((predictions - targets).squaredNorm() /
                   static_cast<double>(predictions.size()));
}

namespace {

double gaussian_log_density(const GaussianParams& g, const Eigen::Ref<const Vector>& y) {
  const Index d = y.size();
  Eigen::LLT<Matrix> llt(g.cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("mll: predictive covariance is not positive definite");
  const Vector e = y - g.mean;
  const Vector z = llt.matrixL().solve(e);
  double log_det = 0.0;
  for (Index i = 0; i < d; ++i) log_det += std::log(llt.matrixL()(i, i));
  return -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - log_det -
         0.5 * z.squaredNorm();
}

}  // namespace

double mll(const std::vector<GaussianParams>& params,
           const Eigen::Ref<const Matrix>& targets) {
  if (static_cast<Index>(params.size()) != targets.rows())
    throw DataError("mll: parameter/target count mismatch");
  double acc = 0.0;
  for (Index t = 0; t < targets.rows(); ++t)
    acc += gaussian_log_density(params[t], targets.row(t).transpose());
  return acc / static_cast<double>(targets.rows());
}

namespace {

// Per-(level, region) matrices reused across test points: coefficient matrix
// for the mean and stacked vec(G_i) for the covariance contraction, where
// G_i = <a^2> <u u'> - <a u><a u>'.
struct RegionCache {
  Matrix au;      // p x d_y
  Matrix g_flat;  // p x d_y^2
  Vector nu;
  double bias_var = 0;
  Vector center;
  Vector tau;
};

RegionCache make_cache(const TrainedModel& model, int level, Index l) {
  const auto& lev = model.levels[level];
  const RegionPosterior& r = lev.regions[l];
  const AxesBlock& block = lev.blocks[lev.block_of(l)];
  const Index d = model.d_y;
  RegionCache cache;
  cache.au = r.scales.au;
  cache.g_flat.resize(model.p, d * d);
  for (int i = 0; i < model.p; ++i) {
    const Vector au = r.scales.au.row(i).transpose();
    const Matrix gi = r.scales.a2[i] * block.mom[i].uu - au * au.transpose();
    cache.g_flat.row(i) = Eigen::Map<const Vector>(gi.data(), d * d).transpose();
  }
  cache.nu = r.bias.nu;
  cache.bias_var = r.bias.bias_var();
  cache.center = r.center;
  cache.tau = r.tau;
  return cache;
}

}  // namespace

EvalResult evaluate(const TrainedModel& model, const Eigen::Ref<const Matrix>& x_test,
                    const Eigen::Ref<const Matrix>& y_test_std) {
  const Index n = x_test.rows();
  const Index d = model.d_y;
  if (y_test_std.rows() != n || y_test_std.cols() != d)
    throw DataError("evaluate: test target shape mismatch");

  // region chain per point
  std::vector<std::vector<Index>> chains(n);
  for (Index t = 0; t < n; ++t)
    chains[t] = region_chain(model, x_test.row(t).transpose());

  Matrix mean = Matrix::Zero(n, d);
  Matrix cov_flat = Matrix::Zero(n, d * d);

  for (int level = 0; level <= model.config.m; ++level) {
    const Index n_regions = model.partition.num_regions(level);
    for (Index l = 0; l < n_regions; ++l) {
      std::vector<Index> rows;
      for (Index t = 0; t < n; ++t)
        if (static_cast<int>(chains[t].size()) > level && chains[t][level] == l)
          rows.push_back(t);
      if (rows.empty()) continue;
      const RegionCache cache = make_cache(model, level, l);

      constexpr Index chunk = 4096;
      for (std::size_t base = 0; base < rows.size(); base += chunk) {
        const Index nc = std::min<Index>(chunk, static_cast<Index>(rows.size() - base));
        Matrix xc(nc, model.d_x);
        for (Index i = 0; i < nc; ++i)
          xc.row(i) = x_test.row(rows[base + i]) - cache.center.transpose();
        const Matrix phi = design_matrix(xc, cache.tau, model.p);
        const Matrix mu = phi * cache.au;
        const Matrix cv = phi.array().square().matrix() * cache.g_flat;
        for (Index i = 0; i < nc; ++i) {
          const Index t = rows[base + i];
          mean.row(t) += mu.row(i) + cache.nu.transpose();
          cov_flat.row(t) += cv.row(i);
          for (Index k = 0; k < d; ++k) cov_flat(t, k * d + k) += cache.bias_var;
        }
      }
    }
  }

  EvalResult out;
  out.rmse = rmse(mean, y_test_std);

  const double noise_var = 1.0 / model.levels[0].regions[0].bias.gamma_mean();
  double acc = 0.0;
  for (Index t = 0; t < n; ++t) {
    const Vector cv = cov_flat.row(t).transpose();
    Matrix cov = Eigen::Map<const Matrix>(cv.data(), d, d);
    cov.diagonal().array() += noise_var;
    GaussianParams params{mean.row(t).transpose(), cov};
    acc += gaussian_log_density(params, y_test_std.row(t).transpose());
  }
  out.mll = acc / static_cast<double>(n);
  return out;
}

BatchPrediction predict_batch(const TrainedModel& model,
                              const Eigen::Ref<const Matrix>& x) {
  BatchPrediction out;
  const Index n = x.rows();
  out.mean = Matrix::Zero(n, model.d_y);
  out.var_diag = Matrix::Zero(n, model.d_y);
  for (Index t = 0; t < n; ++t) {
    const PredictiveSummary s = predict_point(model, x.row(t).transpose());
    out.mean.row(t) = s.mean.transpose();
    out.var_diag.row(t) = s.cov.diagonal().transpose();
  }
  return out;
}

}  // namespace mrgp
