#include <doctest.h>

#include <cmath>
#include <random>

#include "mrgp/inference.hpp"
#include "mrgp/synth.hpp"
#include "sweep_oracle.hpp"

using namespace mrgp;

namespace {

ModelConfig base_config(int m, Mode mode = Mode::ConditionallyIndependent) {
  ModelConfig cfg;
  cfg.m = m;
  cfg.mode = mode;
  cfg.tau_update_period = 0;  // most tests pin the intervals
  return cfg;
}

Dataset smooth_dataset(Index n, std::uint64_t seed, double noise = 0.05) {
  NormalSampler normal(seed);
  Dataset data;
  data.x.resize(n, 1);
  data.y.resize(n, 2);
  for (Index t = 0; t < n; ++t) {
    const double x = 10.0 * static_cast<double>(t) / static_cast<double>(n - 1);
    data.x(t, 0) = x;
    data.y(t, 0) = std::sin(x) + 0.2 * std::cos(3.0 * x) + noise * normal();
    data.y(t, 1) = std::cos(0.5 * x) + noise * normal();
  }
  return data;
}

}  // namespace

TEST_SUITE_BEGIN("inference");

TEST_CASE("joint moments: spec substitution examples") {
  Matrix uu = Matrix::Identity(2, 2) / 2.0;  // uniform axes
  Vector zt(2);
  zt << 1.0, -2.0;

  // ztilde = 0: <a u> = 0, <a^2> = 1/v
  auto m0 = joint_moments(0.7, Vector::Zero(2), 4.0, uu);
  CHECK(m0.au.norm() == 0.0);
  CHECK(m0.a2 == doctest::Approx(0.25).epsilon(1e-14));

  // uniform axes: <a u> = zeta ztilde / d
  auto m1 = joint_moments(0.5, zt, 2.0, uu);
  CHECK((m1.au - 0.5 * zt / 2.0).norm() < 1e-14);
  CHECK(m1.a2 >= 1.0 / 2.0);
  CHECK(m1.central >= 1.0 / 2.0 - 1e-15);

  // concentrated axis: <a u> -> zeta (mu' ztilde) mu
  Vector mu(2);
  mu << 1.0, 0.0;
  Matrix uu_conc = mu * mu.transpose();
  auto m2 = joint_moments(0.5, zt, 2.0, uu_conc);
  CHECK((m2.au - 0.5 * mu.dot(zt) * mu).norm() < 1e-14);
  // central moment collapses to 1/v when the axis is deterministic
  CHECK(m2.central == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sinkhorn: permutation recovery, symmetry, IPF oracle") {
  Matrix logw = Matrix::Constant(3, 3, -30.0);
  logw.diagonal().setZero();
  const Matrix omega = sinkhorn(logw);
  CHECK((omega - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);

  const Matrix flat = sinkhorn(Matrix::Zero(2, 2));
  CHECK(flat(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(flat(1, 1) == doctest::Approx(0.5).epsilon(1e-10));

  // independent iterative-proportional-fitting oracle on a random 5x5
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  Matrix w(5, 5);
  for (Index r = 0; r < 5; ++r)
    for (Index c = 0; c < 5; ++c) w(r, c) = unif(eng);
  const Matrix ours = sinkhorn(w.array().log());
  Matrix ref = w;
  for (int it = 0; it < 200000; ++it) {
    for (Index r = 0; r < 5; ++r) ref.row(r) /= ref.row(r).sum();
    for (Index c = 0; c < 5; ++c) ref.col(c) /= ref.col(c).sum();
  }
  CHECK((ours - ref).cwiseAbs().maxCoeff() < 1e-7);

  for (Index r = 0; r < 5; ++r) CHECK(ours.row(r).sum() == doctest::Approx(1.0).epsilon(1e-8));
  for (Index c = 0; c < 5; ++c) CHECK(ours.col(c).sum() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("initial priors match the noninformative defaults") {
  Dataset data = smooth_dataset(16, 1);
  const Standardizer st = Standardizer::fit(data.y);
  Trainer tr(data.x, st.apply(data.y), base_config(0));
  tr.begin_level(0);
  const auto& level = tr.level_state();

  // axis prior: B' = 0 means a uniform Bingham with second moment I / d_y
  const auto& block = level.blocks[0];
  CHECK(block.b_prime[0].isZero());
  CHECK((block.mom[0].uu - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);

  // precision prior 1e-3/1e-3, bias/noise priors 1e-3
  CHECK(block.alpha_prime[0] == 1e-3);
  CHECK(block.beta_prime[0] == 1e-3);
  CHECK(block.r_mean[0] == doctest::Approx(1.0).epsilon(1e-14));
  const auto& bias = level.regions[0].bias;
  CHECK(bias.theta0 == 1e-3);
  CHECK(bias.c0 == 1e-3);
  CHECK(bias.d0 == 1e-3);
  CHECK(bias.nu.isZero());
  CHECK(bias.gamma_mean() == doctest::Approx(1.0).epsilon(1e-14));

  // prior scale precision example: S = 2, <r> = 1 gives precision 0.5
  CHECK(1.0 / 2.0 == doctest::Approx(0.5));

  // all KL terms vanish while the posteriors still equal the priors
  const ElboRecord rec = tr.elbo_terms();
  CHECK(std::abs(rec.kl_axes) < 1e-8);
  CHECK(std::abs(rec.kl_precisions) < 1e-8);
  CHECK(std::abs(rec.kl_bias_noise) < 1e-8);
  CHECK(std::abs(rec.kl_scales) < 1e-8);
  CHECK(std::abs(rec.kl_index_map) < 1e-8);
}

TEST_CASE("one j=0 sweep matches the straight-line transcription oracle") {
  // 3 samples, p = 2, d_y = 2
  Dataset data;
  data.x.resize(3, 1);
  data.x << 0.0, 1.0, 2.5;
  data.y.resize(3, 2);
  data.y << 0.7, -1.1, 1.4, 0.3, -0.6, 0.9;

  ModelConfig cfg = base_config(0);
  cfg.p = 2;
  // no standardization here: the oracle consumes the raw targets
  Trainer tr(data.x, data.y, cfg);
  tr.begin_level(0);
  const auto& region = tr.level_state().regions[0];
  const double tau = region.tau[0];
  const double center = region.center[0];

  std::vector<double> xc = {0.0 - center, 1.0 - center, 2.5 - center};
  std::vector<std::array<double, 2>> y = {{0.7, -1.1}, {1.4, 0.3}, {-0.6, 0.9}};
  const auto oracle_state =
      sweep_oracle::run_sweep(xc, y, 2, tau, cfg.spectral, 1e-3);

  tr.update_scales(0);
  tr.update_axes();
  tr.update_precisions();
  tr.update_bias_noise(0);

  const auto& reg = tr.level_state().regions[0];
  const auto& block = tr.level_state().blocks[0];
  for (int i = 0; i < 2; ++i) {
    CHECK(reg.scales.v[i] == doctest::Approx(oracle_state.v[i]).epsilon(1e-10));
    CHECK(reg.scales.zeta[i] == doctest::Approx(oracle_state.zeta[i]).epsilon(1e-10));
    for (int d = 0; d < 2; ++d) {
      CHECK(reg.scales.ztilde(i, d) ==
            doctest::Approx(oracle_state.ztilde[i][d]).epsilon(1e-10));
      CHECK(reg.scales.au(i, d) == doctest::Approx(oracle_state.au[i][d]).epsilon(1e-10));
    }
    CHECK(reg.scales.a2[i] == doctest::Approx(oracle_state.a2[i]).epsilon(1e-10));
    CHECK(reg.scales.central[i] ==
          doctest::Approx(oracle_state.central[i]).epsilon(1e-10));
    CHECK(block.alpha[i] == doctest::Approx(oracle_state.alpha[i]).epsilon(1e-10));
    CHECK(block.beta[i] == doctest::Approx(oracle_state.beta[i]).epsilon(1e-10));
    // canonical eigenvalues agree
    CHECK(block.axes[i].kappa.minCoeff() ==
          doctest::Approx(oracle_state.axes[i].kappa[1]).epsilon(1e-10));
    CHECK(block.axes[i].kappa.maxCoeff() == doctest::Approx(0.0).epsilon(1e-10));
  }
  for (int d = 0; d < 2; ++d)
    CHECK(reg.bias.nu[d] == doctest::Approx(oracle_state.nu[d]).epsilon(1e-10));
  CHECK(reg.bias.theta == doctest::Approx(oracle_state.theta).epsilon(1e-12));
  CHECK(reg.bias.c == doctest::Approx(oracle_state.c).epsilon(1e-12));
  CHECK(reg.bias.d == doctest::Approx(oracle_state.d).epsilon(1e-10));
}

TEST_CASE("scale update: zero design column recovers the prior") {
  // singleton region centered at zero: even-index basis functions vanish
  Dataset data;
  data.x = Matrix::Zero(1, 1);
  data.y.resize(1, 2);
  data.y << 1.0, 2.0;
  ModelConfig cfg = base_config(0);
  cfg.p = 4;
  Trainer tr(data.x, data.y, cfg);
  tr.begin_level(0);
  tr.update_scales(0);
  const auto& reg = tr.level_state().regions[0];
  const auto& block = tr.level_state().blocks[0];
  const auto& work_spectral = reg;  // silence unused warnings
  (void)work_spectral;
  for (int i : {1, 3}) {  // 0-based even basis indices are i = 2, 4
    const double s = spectral_density(
        cfg.spectral, std::sqrt(eigenvalue<double>(i + 1, reg.tau)));
    CHECK(reg.scales.v[i] == doctest::Approx(block.r_mean[i] / s).epsilon(1e-12));
    CHECK(reg.scales.au.row(i).norm() == 0.0);
    CHECK(reg.scales.a2[i] == doctest::Approx(1.0 / reg.scales.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("axis update: rank-one data term aligns the top eigenvector") {
  Dataset data = smooth_dataset(12, 3);
  const Standardizer st = Standardizer::fit(data.y);
  ModelConfig cfg = base_config(0);
  cfg.p = 3;
  Trainer tr(data.x, st.apply(data.y), cfg);
  tr.begin_level(0);
  tr.update_scales(0);
  tr.update_axes();
  const auto& reg = tr.level_state().regions[0];
  const auto& block = tr.level_state().blocks[0];
  for (int i = 0; i < 3; ++i) {
    const Vector zt = reg.scales.ztilde.row(i).transpose();
    if (zt.norm() < 1e-12) continue;
    Index top;
    block.axes[i].kappa.maxCoeff(&top);
    const Vector u = block.axes[i].M.col(top);
    CHECK(std::abs(std::abs(u.dot(zt.normalized())) - 1.0) < 1e-10);
  }
}

TEST_CASE("precision update: prior pass-through and count identity") {
  Dataset data = smooth_dataset(20, 5);
  const Standardizer st = Standardizer::fit(data.y);
  ModelConfig cfg = base_config(1);
  cfg.p = 3;
  Trainer tr(data.x, st.apply(data.y), cfg);
  tr.begin_level(0);
  // before any scale update a2 = 0, so beta keeps only the weighted prior
  tr.update_precisions();
  const auto& block = tr.level_state().blocks[0];
  for (int i = 0; i < 3; ++i) {
    CHECK(block.beta[i] == doctest::Approx(block.beta_prime[i]).epsilon(1e-14));
    // alpha gains half the number of governed regions on top of the prior
    CHECK(block.alpha[i] ==
          doctest::Approx(block.alpha_prime[i] + 0.5).epsilon(1e-14));
  }
}

TEST_CASE("residual targets: raw observations at the root, centered later") {
  Dataset data = smooth_dataset(32, 7, 0.01);
  const Standardizer st = Standardizer::fit(data.y);
  const Matrix ystd = st.apply(data.y);
  ModelConfig cfg = base_config(1);
  Trainer tr(data.x, ystd, cfg);
  tr.begin_level(0);
  CHECK((tr.residual_targets(0) - ystd).cwiseAbs().maxCoeff() == 0.0);
  tr.run_level_block();
  tr.finish_level();
  tr.begin_level(1);
  // lower-resolution fit is decent, so residuals are roughly centered noise
  Matrix all(ystd.rows(), ystd.cols());
  Index row = 0;
  for (Index l = 0; l < 2; ++l) {
    const Matrix& t = tr.residual_targets(l);
    all.middleRows(row, t.rows()) = t;
    row += t.rows();
  }
  CHECK((ystd - tr.cumulative_mean() - all).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(all.col(0).mean()) < 0.1);
}

TEST_CASE("remainder state follows the posterior mean identity") {
  Dataset data = smooth_dataset(24, 11);
  const Standardizer st = Standardizer::fit(data.y);
  ModelConfig cfg = base_config(1);
  Trainer tr(data.x, st.apply(data.y), cfg);
  tr.begin_level(0);
  tr.run_level_block();
  tr.finish_level();
  tr.begin_level(1);
  tr.sweep();
  for (Index l = 0; l < 2; ++l) {
    const auto& reg = tr.level_state().regions[l];
    const Matrix zbar = tr.remainder_means(l);
    // independent recomputation: cumulative mean + bias + basis expansion
    const Index nl = reg.range.size();
    Matrix expect = tr.cumulative_mean().middleRows(reg.range.lo, nl);
    for (Index t = 0; t < nl; ++t) {
      Vector x = data.x.row(reg.range.lo + t).transpose() - reg.center;
      const Vector phi = design_row(x, reg.tau, tr.basis_count());
      expect.row(t) += reg.bias.nu.transpose() + phi.transpose() * reg.scales.au;
    }
    CHECK((zbar - expect).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(tr.remainder_variance(l) ==
          doctest::Approx(1.0 / reg.bias.gamma_mean()).epsilon(1e-14));
  }
}

TEST_CASE("surrogate is monotone within a resolution block") {
  for (Mode mode : {Mode::ConditionallyIndependent, Mode::FullyIndependent}) {
    Dataset data = smooth_dataset(48, 13);
    const Standardizer st = Standardizer::fit(data.y);
    ModelConfig cfg = base_config(2, mode);
    cfg.sweeps_per_resolution = 40;
    Trainer tr(data.x, st.apply(data.y), cfg);
    for (int level = 0; level <= 2; ++level) {
      tr.begin_level(level);
      double prev = -std::numeric_limits<double>::infinity();
      for (int s = 0; s < 25; ++s) {
        const ElboRecord rec = tr.sweep();
        CHECK(rec.surrogate >=
              prev - 1e-6 * std::max(1.0, std::abs(rec.surrogate)));
        prev = rec.surrogate;
      }
      tr.finish_level();
    }
  }
}

TEST_CASE("modes produce identical state at m = 0") {
  Dataset data = smooth_dataset(40, 17);
  const Standardizer st = Standardizer::fit(data.y);
  TrainedModel ci = fit(data, base_config(0, Mode::ConditionallyIndependent));
  TrainedModel fi = fit(data, base_config(0, Mode::FullyIndependent));
  const auto& rc = ci.levels[0].regions[0];
  const auto& rf = fi.levels[0].regions[0];
  CHECK((rc.scales.v - rf.scales.v).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rc.scales.ztilde - rf.scales.ztilde).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rc.scales.au - rf.scales.au).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rc.bias.nu - rf.bias.nu).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rc.bias.d == rf.bias.d);
  const auto& bc = ci.levels[0].blocks[0];
  const auto& bf = fi.levels[0].blocks[0];
  CHECK((bc.alpha - bf.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK((bc.beta - bf.beta).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < ci.p; ++i)
    CHECK((bc.axes[i].kappa - bf.axes[i].kappa).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("recursive axis priors equal the previous resolution posterior") {
  Dataset data = smooth_dataset(32, 19);
  ModelConfig cfg = base_config(1);
  cfg.p = 4;
  const Standardizer st = Standardizer::fit(data.y);
  Trainer tr(data.x, st.apply(data.y), cfg);
  tr.begin_level(0);
  tr.run_level_block();
  const std::vector<BinghamParams> level0_axes = tr.level_state().blocks[0].axes;
  const Vector alpha0 = tr.level_state().blocks[0].alpha;
  tr.finish_level();
  tr.begin_level(1);
  const auto& block = tr.level_state().blocks[0];
  CHECK(block.has_omega);
  for (int i = 0; i < 4; ++i)
    CHECK((block.b_prime[i] - level0_axes[i].matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((block.alpha_prime - alpha0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("automatic relevance determination shrinks surplus axes") {
  // data generated from two active axes, fit with p = 10
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    NormalSampler normal(seed);
    const Index n = 64;
    Dataset data;
    data.x.resize(n, 1);
    data.y.resize(n, 2);
    const double lo = 0.0, hi = 10.0;
    const double half = 0.5 * (hi - lo);
    const double tau = 2.0 * half;
    Vector u1(2), u2(2);
    u1 << std::cos(0.3), std::sin(0.3);
    u2 << std::cos(2.1), std::sin(2.1);
    for (Index t = 0; t < n; ++t) {
      const double x = lo + (hi - lo) * static_cast<double>(t) / (n - 1);
      const double xc = x - 0.5 * (lo + hi);
      data.x(t, 0) = x;
      const double phi1 = eigenfunction_1d<double>(1, xc, tau);
      const double phi2 = eigenfunction_1d<double>(2, xc, tau);
      const Vector f = 2.0 * phi1 * u1 + 1.5 * phi2 * u2;
      data.y(t, 0) = f[0] + 0.05 * normal();
      data.y(t, 1) = f[1] + 0.05 * normal();
    }
    ModelConfig cfg = base_config(0);
    cfg.p = 10;
    const TrainedModel model = fit(data, cfg);
    const Vector a2 = model.levels[0].regions[0].scales.a2;
    const double active = std::min(a2[0], a2[1]);
    double surplus = 0.0;
    for (int i = 2; i < 10; ++i) surplus = std::max(surplus, a2[i]);
    CHECK(active >= 10.0 * surplus);
  }
}

TEST_CASE("fatal numeric errors carry context") {
  Dataset data = smooth_dataset(8, 23);
  data.y(3, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit(data, base_config(0)), DataError);
}

TEST_SUITE_END();
