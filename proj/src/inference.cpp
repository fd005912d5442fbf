#include "mrgp/inference.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mrgp/errors.hpp"
#include "mrgp/interval_opt.hpp"

namespace mrgp {

namespace {

// Noninformative prior mass for the Gamma and Gaussian-Gamma families.
constexpr double prior_eps = 1e-3;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

JointMoments joint_moments(double zeta, const Eigen::Ref<const Vector>& ztilde,
                           double v, const Eigen::Ref<const Matrix>& uu) {
  JointMoments m;
  const Vector uz = uu * ztilde;
  m.au = zeta * uz;
  m.a2 = 1.0 / v + zeta * zeta * ztilde.dot(uz);
  m.central = 1.0 / v + zeta * zeta * (ztilde.dot(uz) - uz.squaredNorm());
  return m;
}

Matrix sinkhorn(const Eigen::Ref<const Matrix>& log_w) {
  const Index p = log_w.rows();
  if (log_w.cols() != p) throw NumericError("sinkhorn: matrix must be square");
  if (!log_w.allFinite()) throw NumericError("sinkhorn: non-finite similarities");

  Matrix a = (log_w.array() - log_w.maxCoeff()).cwiseMax(-500.0).exp();
  constexpr int max_rounds = 10000;
  for (int round = 0; round < max_rounds; ++round) {
    for (Index i = 0; i < p; ++i) a.row(i) /= a.row(i).sum();
    for (Index k = 0; k < p; ++k) a.col(k) /= a.col(k).sum();
    const double dev_row = (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double dev_col = (a.colwise().sum().array() - 1.0).abs().maxCoeff();
    if (dev_row < 1e-8 && dev_col < 1e-8) return a;
  }
  throw NumericError("sinkhorn: no convergence after 10000 rounds (row deviation " +
                     std::to_string((a.rowwise().sum().array() - 1.0).abs().maxCoeff()) +
                     ")");
}

Trainer::Trainer(Matrix x, Matrix y, ModelConfig config)
    : x_(std::move(x)), y_(std::move(y)), cfg_(std::move(config)) {
  cfg_.validate();
  n_ = x_.rows();
  dx_ = x_.cols();
  dy_ = y_.cols();
  if (y_.rows() != n_) throw DataError("fit: input/target row mismatch");
  if (dy_ < 2) throw DataError("fit: the axis prior requires at least two output dimensions");
  if (!x_.allFinite() || !y_.allFinite()) throw DataError("fit: non-finite training data");
  p_ = cfg_.resolve_p(n_);
  tree_ = build_partition(n_, cfg_.m, cfg_.q);
  boxes_ = region_boxes(tree_, x_);
  cum_f_ = Matrix::Zero(n_, dy_);
  cum_tr_ = Vector::Zero(n_);
}

AxesBlock Trainer::make_fresh_block() const {
  AxesBlock block;
  block.axes.resize(p_);
  for (auto& ax : block.axes) {
    ax.M = Matrix::Identity(dy_, dy_);
    ax.kappa = Vector::Zero(dy_);
  }
  block.refresh_axis_moments();
  block.alpha = Vector::Constant(p_, prior_eps);
  block.beta = Vector::Constant(p_, prior_eps);
  block.refresh_precision_moments();
  block.b_prime.assign(p_, Matrix::Zero(dy_, dy_));
  block.log_c_prime = Vector::Constant(p_, log_norm_const(Vector::Zero(dy_)));
  block.alpha_prime = Vector::Constant(p_, prior_eps);
  block.beta_prime = Vector::Constant(p_, prior_eps);
  block.has_omega = false;
  return block;
}

AxesBlock Trainer::make_recursive_block(const AxesBlock& prev) const {
  AxesBlock block;
  block.axes = prev.axes;  // warm start at the prior
  block.refresh_axis_moments();
  block.alpha = prev.alpha;
  block.beta = prev.beta;
  block.refresh_precision_moments();
  block.b_prime.resize(p_);
  block.log_c_prime.resize(p_);
  for (int i = 0; i < p_; ++i) {
    block.b_prime[i] = prev.axes[i].matrix();
    block.log_c_prime[i] = prev.mom[i].log_c;
  }
  block.alpha_prime = prev.alpha;
  block.beta_prime = prev.beta;
  block.has_omega = true;
  block.omega = Matrix::Identity(p_, p_);  // aligned start; the first index-map
                                           // update replaces it
  return block;
}

void Trainer::rebuild_design(Index l) {
  RegionWork& w = work_[l];
  RegionPosterior& r = post_.regions[l];
  w.phi = design_matrix(w.xc, r.tau, p_);
  w.sumphi2 = w.phi.array().square().colwise().sum().transpose();
  w.spectral.resize(p_);
  for (int i = 0; i < p_; ++i)
    w.spectral[i] = spectral_density(cfg_.spectral,
                                     std::sqrt(eigenvalue<double>(i + 1, r.tau)));
}

void Trainer::begin_level(int level) {
  level_ = level;
  cycle_ = 0;
  sweep_no_ = 0;
  post_ = LevelPosterior{};
  const auto& ranges = tree_.levels[level];
  const Index n_regions = static_cast<Index>(ranges.size());
  post_.regions.resize(n_regions);
  work_.assign(n_regions, RegionWork{});

  const Vector l0_lo = x_.colwise().minCoeff().transpose();
  const Vector l0_hi = x_.colwise().maxCoeff().transpose();
  const double level_scale = std::pow(static_cast<double>(cfg_.q), -level);

  for (Index l = 0; l < n_regions; ++l) {
    RegionPosterior& r = post_.regions[l];
    RegionWork& w = work_[l];
    r.range = ranges[l];
    const Index nl = r.range.size();
    const auto rows = x_.middleRows(r.range.lo, nl);
    const Vector lo = rows.colwise().minCoeff().transpose();
    const Vector hi = rows.colwise().maxCoeff().transpose();
    r.center = 0.5 * (lo + hi);
    r.half_range.resize(dx_);
    r.tau.resize(dx_);
    for (Index d = 0; d < dx_; ++d) {
      double half = 0.5 * (hi[d] - lo[d]);
      // degenerate extent (few or coincident samples): fall back to the
      // expected subdivision width of the level-0 range
      const double fallback =
          std::max(0.5 * (l0_hi[d] - l0_lo[d]) * level_scale, 1e-9);
      if (!(half > 1e-9 * std::max(1.0, 0.5 * (l0_hi[d] - l0_lo[d])))) half = fallback;
      r.half_range[d] = half;
      const double upper = half + static_cast<double>(p_) / half;
      r.tau[d] = std::min(2.0 * half, half + 0.9 * (upper - half));
    }

    w.xc = rows.rowwise() - r.center.transpose();
    w.targets = y_.middleRows(r.range.lo, nl) - cum_f_.middleRows(r.range.lo, nl);
    w.g = cum_tr_.segment(r.range.lo, nl);
    rebuild_design(l);

    r.scales.init(p_, dy_);
    r.bias.nu = Vector::Zero(dy_);
    r.bias.theta0 = prior_eps;
    r.bias.c0 = prior_eps;
    r.bias.d0 = prior_eps;
    r.bias.theta = r.bias.theta0;
    r.bias.c = r.bias.c0;
    r.bias.d = r.bias.d0;
    w.resid = w.targets;
  }

  const bool shared = cfg_.mode == Mode::ConditionallyIndependent;
  if (shared) {
    if (level == 0) {
      post_.blocks.push_back(make_fresh_block());
    } else {
      post_.blocks.push_back(make_recursive_block(finished_.back().blocks[0]));
    }
  } else {
    for (Index l = 0; l < n_regions; ++l) post_.blocks.push_back(make_fresh_block());
  }
}

void Trainer::update_scales(Index l) {
  RegionPosterior& r = post_.regions[l];
  RegionWork& w = work_[l];
  const AxesBlock& block = post_.blocks[post_.block_of(l)];
  const double gamma_mean = r.bias.gamma_mean();

  for (int i = 0; i < p_; ++i) {
    const double s = w.spectral[i];
    const double v = block.r_mean[i] / s + gamma_mean * w.sumphi2[i];
    const Vector ztilde =
        w.phi.col(i).transpose() * w.resid + w.sumphi2[i] * r.scales.au.row(i);
    const double zeta = gamma_mean / v;
    const JointMoments m = joint_moments(zeta, ztilde, v, block.mom[i].uu);
    w.resid.noalias() += w.phi.col(i) * (r.scales.au.row(i) - m.au.transpose());
    r.scales.v[i] = v;
    r.scales.zeta[i] = zeta;
    r.scales.ztilde.row(i) = ztilde.transpose();
    r.scales.au.row(i) = m.au.transpose();
    r.scales.a2[i] = m.a2;
    r.scales.central[i] = m.central;
  }
}

void Trainer::refresh_region_moments(Index l) {
  RegionPosterior& r = post_.regions[l];
  RegionWork& w = work_[l];
  const AxesBlock& block = post_.blocks[post_.block_of(l)];
  for (int i = 0; i < p_; ++i) {
    if (!(r.scales.v[i] > 0)) continue;  // untouched scales stay at init
    const JointMoments m = joint_moments(r.scales.zeta[i], r.scales.ztilde.row(i),
                                         r.scales.v[i], block.mom[i].uu);
    r.scales.au.row(i) = m.au.transpose();
    r.scales.a2[i] = m.a2;
    r.scales.central[i] = m.central;
  }
  w.resid = w.targets;
  w.resid.rowwise() -= r.bias.nu.transpose();
  w.resid.noalias() -= w.phi * r.scales.au;
}

Matrix Trainer::weighted_prior_flat(const AxesBlock& block) {
  const Index p = static_cast<Index>(block.b_prime.size());
  const Index d2 = block.b_prime.front().size();
  Matrix flat(p, d2);
  for (Index k = 0; k < p; ++k)
    flat.row(k) = Eigen::Map<const Vector>(block.b_prime[k].data(), d2).transpose();
  if (!block.has_omega) return flat;
  return block.omega * flat;
}

void Trainer::update_axes() {
  for (std::size_t b = 0; b < post_.blocks.size(); ++b) {
    AxesBlock& block = post_.blocks[b];
    const Matrix prior_flat = weighted_prior_flat(block);
    for (int i = 0; i < p_; ++i) {
      const Vector prior_vec = prior_flat.row(i).transpose();
      Matrix bi = Eigen::Map<const Matrix>(prior_vec.data(), dy_, dy_);
      if (post_.blocks.size() == 1) {
        for (Index l = 0; l < static_cast<Index>(post_.regions.size()); ++l) {
          const RegionPosterior& r = post_.regions[l];
          bi.noalias() += (0.5 * r.bias.gamma_mean() * r.scales.zeta[i]) *
                          (r.scales.ztilde.row(i).transpose() * r.scales.ztilde.row(i));
        }
      } else {
        const RegionPosterior& r = post_.regions[b];
        bi.noalias() += (0.5 * r.bias.gamma_mean() * r.scales.zeta[i]) *
                        (r.scales.ztilde.row(i).transpose() * r.scales.ztilde.row(i));
      }
      block.axes[i] = bingham_from_matrix(bi);
    }
    block.refresh_axis_moments();
  }
  for (Index l = 0; l < static_cast<Index>(post_.regions.size()); ++l)
    refresh_region_moments(l);
}

void Trainer::update_precisions() {
  for (std::size_t b = 0; b < post_.blocks.size(); ++b) {
    AxesBlock& block = post_.blocks[b];
    const bool shared = post_.blocks.size() == 1;
    const Index n_gov = shared ? static_cast<Index>(post_.regions.size()) : 1;
    Vector alpha_w = block.alpha_prime;
    Vector beta_w = block.beta_prime;
    if (block.has_omega) {
      alpha_w = block.omega * block.alpha_prime;
      beta_w = block.omega * block.beta_prime;
    }
    block.alpha = alpha_w.array() + 0.5 * static_cast<double>(n_gov);
    block.beta = beta_w;
    for (int i = 0; i < p_; ++i) {
      double acc = 0.0;
      if (shared) {
        for (Index l = 0; l < n_gov; ++l)
          acc += post_.regions[l].scales.a2[i] / work_[l].spectral[i];
      } else {
        acc = post_.regions[b].scales.a2[i] / work_[b].spectral[i];
      }
      block.beta[i] += 0.5 * acc;
    }
    block.refresh_precision_moments();
  }
}

void Trainer::update_index_map() {
  for (AxesBlock& block : post_.blocks) {
    if (!block.has_omega) continue;
    Matrix log_w(p_, p_);
    for (int i = 0; i < p_; ++i) {
      for (int k = 0; k < p_; ++k) {
        log_w(i, k) = (block.b_prime[k].array() * block.mom[i].uu.array()).sum() -
                      block.log_c_prime[k] +
                      block.alpha_prime[k] * std::log(block.beta_prime[k]) -
                      std::lgamma(block.alpha_prime[k]) +
                      (block.alpha_prime[k] - 1.0) * block.log_r_mean[i] -
                      block.beta_prime[k] * block.r_mean[i];
      }
    }
    block.omega = sinkhorn(log_w);
  }
}

void Trainer::update_bias_noise(Index l) {
  RegionPosterior& r = post_.regions[l];
  RegionWork& w = work_[l];
  const Index nl = r.range.size();
  const double dyd = static_cast<double>(dy_);

  // residual without the bias term
  const Matrix ytil = w.resid.rowwise() + r.bias.nu.transpose();
  const Vector nu_bar = ytil.colwise().sum().transpose();

  r.bias.theta = r.bias.theta0 + static_cast<double>(nl);
  const Vector nu_new = nu_bar / r.bias.theta;  // prior mean is zero
  r.bias.c = r.bias.c0 + 0.5 * dyd * static_cast<double>(nl);

  double d_bar = -r.bias.theta * nu_new.squaredNorm();
  d_bar += ytil.squaredNorm();
  d_bar += w.sumphi2.dot(r.scales.central);
  d_bar += w.g.sum();
  r.bias.d = r.bias.d0 + 0.5 * d_bar;
  if (!(r.bias.d > 0) || !std::isfinite(r.bias.d))
    throw NumericError("bias/noise update produced a nonpositive inverse scale");

  r.bias.nu = nu_new;
  w.resid = ytil.rowwise() - nu_new.transpose();
}

double Trainer::surrogate() const { return elbo_terms().surrogate; }

ElboRecord Trainer::elbo_terms() const {
  ElboRecord rec;
  rec.level = level_;
  rec.cycle = cycle_;
  rec.sweep = sweep_no_;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const double dyd = static_cast<double>(dy_);

  for (Index l = 0; l < static_cast<Index>(post_.regions.size()); ++l) {
    const RegionPosterior& r = post_.regions[l];
    const RegionWork& w = work_[l];
    const AxesBlock& block = post_.blocks[post_.block_of(l)];
    const double nl = static_cast<double>(r.range.size());
    const double gm = r.bias.gamma_mean();

    const double quad = w.resid.squaredNorm() + w.sumphi2.dot(r.scales.central) + w.g.sum();
    rec.data_term += nl * 0.5 * dyd * (r.bias.log_gamma_mean() - log2pi) -
                     0.5 * (gm * quad + nl * dyd / r.bias.theta);

    rec.kl_bias_noise += 0.5 * dyd * std::log(r.bias.theta / r.bias.theta0) -
                         0.5 * dyd + 0.5 * r.bias.theta0 * dyd / r.bias.theta +
                         0.5 * r.bias.theta0 * gm * r.bias.nu.squaredNorm();
    rec.kl_bias_noise += gamma_kl(r.bias.c, r.bias.d, r.bias.c0, r.bias.d0);

    for (int i = 0; i < p_; ++i) {
      if (!(r.scales.v[i] > 0)) continue;
      rec.kl_scales += 0.5 * (std::log(r.scales.v[i]) - 1.0 + std::log(w.spectral[i]) -
                              block.log_r_mean[i]) +
                       0.5 * block.r_mean[i] * r.scales.a2[i] / w.spectral[i];
    }
  }

  for (const AxesBlock& block : post_.blocks) {
    for (int i = 0; i < p_; ++i) {
      const double e_q = block.axes[i].kappa.dot(block.mom[i].rho) - block.mom[i].log_c;
      double e_p = 0.0;
      if (block.has_omega) {
        for (int k = 0; k < p_; ++k)
          e_p += block.omega(i, k) *
                 ((block.b_prime[k].array() * block.mom[i].uu.array()).sum() -
                  block.log_c_prime[k]);
      } else {
        e_p = (block.b_prime[i].array() * block.mom[i].uu.array()).sum() -
              block.log_c_prime[i];
      }
      rec.kl_axes += e_q - e_p;

      const double lr = block.log_r_mean[i];
      const double rm = block.r_mean[i];
      const double e_q_r = (block.alpha[i] - 1.0) * lr - block.beta[i] * rm +
                           block.alpha[i] * std::log(block.beta[i]) -
                           std::lgamma(block.alpha[i]);
      double e_p_r = 0.0;
      auto prior_term = [&](int k) {
        return (block.alpha_prime[k] - 1.0) * lr - block.beta_prime[k] * rm +
               block.alpha_prime[k] * std::log(block.beta_prime[k]) -
               std::lgamma(block.alpha_prime[k]);
      };
      if (block.has_omega) {
        for (int k = 0; k < p_; ++k) e_p_r += block.omega(i, k) * prior_term(k);
      } else {
        e_p_r = prior_term(i);
      }
      rec.kl_precisions += e_q_r - e_p_r;
    }
    if (block.has_omega) {
      double ent = 0.0;
      for (Index i = 0; i < block.omega.rows(); ++i)
        for (Index k = 0; k < block.omega.cols(); ++k) ent += xlogx(block.omega(i, k));
      rec.kl_index_map += ent + static_cast<double>(p_) * std::log(static_cast<double>(p_));
    }
  }

  rec.surrogate = rec.data_term - rec.kl_scales - rec.kl_axes - rec.kl_precisions -
                  rec.kl_index_map - rec.kl_bias_noise;
  if (!std::isfinite(rec.surrogate))
    throw NumericError("surrogate objective is not finite");
  return rec;
}

ElboRecord Trainer::sweep() {
  ++sweep_no_;
  const Index n_regions = static_cast<Index>(post_.regions.size());
  try {
    for (Index l = 0; l < n_regions; ++l) update_scales(l);
    update_axes();
    update_precisions();
    if (level_ >= 1) update_index_map();
    for (Index l = 0; l < n_regions; ++l) update_bias_noise(l);
    ElboRecord rec = elbo_terms();
    elbo_.push_back(rec);
    return rec;
  } catch (const NumericError& err) {
    throw NumericError("level " + std::to_string(level_) + ", sweep " +
                       std::to_string(sweep_no_) + ": " + err.what());
  }
}

int Trainer::run_level_block() {
  double prev = 0.0;
  bool have_prev = false;
  int count = 0;
  for (; count < cfg_.sweeps_per_resolution; ++count) {
    const ElboRecord rec = sweep();
    if (have_prev) {
      const double rel = std::abs(rec.surrogate - prev) /
                         std::max(1.0, std::abs(rec.surrogate));
      if (rel < cfg_.convergence_tol) {
        ++count;
        break;
      }
    }
    prev = rec.surrogate;
    have_prev = true;
  }
  return count;
}

void Trainer::refresh_intervals() {
  ++cycle_;
  for (Index l = 0; l < static_cast<Index>(post_.regions.size()); ++l) {
    RegionPosterior& r = post_.regions[l];
    RegionWork& w = work_[l];
    const AxesBlock& block = post_.blocks[post_.block_of(l)];
    const Index nl = r.range.size();

    // carrier vectors k_t = <b> + sum of lower-resolution means - y_t / 2
    Matrix carrier = cum_f_.middleRows(r.range.lo, nl);
    carrier.rowwise() += r.bias.nu.transpose();
    carrier -= 0.5 * y_.middleRows(r.range.lo, nl);

    for (int pass = 0; pass < 2; ++pass) {
      for (Index d = 0; d < dx_; ++d) {
        IntervalObjective obj;
        obj.spec = cfg_.spectral;
        obj.gamma_mean = r.bias.gamma_mean();
        obj.lower = r.half_range[d];
        obj.upper = r.half_range[d] + static_cast<double>(p_) / r.half_range[d];
        obj.x_d = w.xc.col(d);
        obj.r_mean = block.r_mean;
        obj.a2 = r.scales.a2;
        obj.q = r.scales.au.rowwise().squaredNorm() + r.scales.central;
        obj.dots.noalias() = carrier * r.scales.au.transpose();
        obj.phi_other.resize(nl, p_);
        obj.lambda_other = Vector::Zero(p_);
        for (int i = 0; i < p_; ++i) {
          double lam = 0.0;
          Vector prod = Vector::Ones(nl);
          for (Index k = 0; k < dx_; ++k) {
            if (k == d) continue;
            lam += eigenvalue_1d(i + 1, r.tau[k]);
            for (Index t = 0; t < nl; ++t)
              prod[t] *= eigenfunction_1d<double>(i + 1, w.xc(t, k), r.tau[k]);
          }
          obj.lambda_other[i] = lam;
          obj.phi_other.col(i) = prod;
        }
        r.tau[d] = optimize_tau(obj, r.tau[d]);
      }
    }
    rebuild_design(l);
    w.resid = w.targets;
    w.resid.rowwise() -= r.bias.nu.transpose();
    w.resid.noalias() -= w.phi * r.scales.au;
  }
}

void Trainer::finish_level() {
  for (Index l = 0; l < static_cast<Index>(post_.regions.size()); ++l) {
    const RegionPosterior& r = post_.regions[l];
    const RegionWork& w = work_[l];
    const Index nl = r.range.size();
    Matrix mean = w.phi * r.scales.au;
    mean.rowwise() += r.bias.nu.transpose();
    cum_f_.middleRows(r.range.lo, nl) += mean;
    const Vector trace = w.phi.array().square().matrix() * r.scales.central;
    cum_tr_.segment(r.range.lo, nl) +=
        trace + Vector::Constant(nl, static_cast<double>(dy_) * r.bias.bias_var());
  }
  finished_.push_back(std::move(post_));
  post_ = LevelPosterior{};
}

Matrix Trainer::remainder_means(Index l) const {
  const RegionPosterior& r = post_.regions[l];
  const RegionWork& w = work_[l];
  const Index nl = r.range.size();
  Matrix mean = cum_f_.middleRows(r.range.lo, nl);
  mean.rowwise() += r.bias.nu.transpose();
  mean.noalias() += w.phi * r.scales.au;
  return mean;
}

double Trainer::remainder_variance(Index l) const {
  return 1.0 / post_.regions[l].bias.gamma_mean();
}

TrainedModel Trainer::run(const Standardizer& standardizer) {
  for (int j = 0; j <= cfg_.m; ++j) {
    begin_level(j);
    run_level_block();
    for (int cycle = 0; cycle < cfg_.tau_update_period; ++cycle) {
      refresh_intervals();
      run_level_block();
    }
    finish_level();
  }

  TrainedModel model;
  model.config = cfg_;
  model.n = n_;
  model.d_x = dx_;
  model.d_y = dy_;
  model.p = p_;
  model.standardizer = standardizer;
  model.partition = std::move(tree_);
  model.boxes = std::move(boxes_);
  model.levels = std::move(finished_);
  model.elbo = std::move(elbo_);
  return model;
}

TrainedModel fit(const Dataset& data, const ModelConfig& config) {
  const Standardizer st = Standardizer::fit(data.y);
  Trainer trainer(data.x, st.apply(data.y), config);
  return trainer.run(st);
}

}  // namespace mrgp
