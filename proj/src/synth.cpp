#include "mrgp/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mrgp/errors.hpp"

namespace mrgp {

double NormalSampler::operator()() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double toy_f1(double x) {
  return std::exp(std::sin(std::cos(x)) * std::sin(std::log1p(std::abs(x * x - 3.0 * x))));
}

double toy_f2(double x) {
  return std::log(std::abs(std::tan(-2.0 * x) * std::cos(2.0 * x) + 1.0)) * std::sin(x);
}

namespace {

Matrix toy_targets(const Vector& x) {
  Matrix y(x.size(), 2);
  for (Index t = 0; t < x.size(); ++t) {
    y(t, 0) = toy_f1(x[t]);
    y(t, 1) = toy_f2(x[t]);
  }
  return y;
}

Vector linspace(double lo, double hi, Index n) {
  Vector x(n);
  if (n == 1) {
    x[0] = lo;
    return x;
  }
  for (Index t = 0; t < n; ++t)
    x[t] = lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(n - 1);
  return x;
}

void add_relative_noise(Matrix& y, double noise_rel, NormalSampler& normal) {
  for (Index d = 0; d < y.cols(); ++d) {
    const double mean = y.col(d).mean();
    const double sd = std::sqrt((y.col(d).array() - mean).square().sum() /
                                static_cast<double>(y.rows()));
    const double level = noise_rel * sd;
    for (Index t = 0; t < y.rows(); ++t) y(t, d) += level * normal();
  }
}

}  // namespace

Dataset gen_toydata(Index n, double noise_rel, std::uint64_t seed) {
  if (n < 2) throw DataError("toydata: need at least two samples");
  Dataset data;
  data.x = linspace(0.0, 12.0, n);
  data.y = toy_targets(data.x.col(0));
  data.x_names = {"x"};
  data.y_names = {"f1", "f2"};
  NormalSampler normal(seed);
  add_relative_noise(data.y, noise_rel, normal);
  return data;
}

Dataset toydata_grid(Index n_test) {
  Dataset data;
  data.x = linspace(0.0, 12.0, n_test);
  data.y = toy_targets(data.x.col(0));
  data.x_names = {"x"};
  data.y_names = {"f1", "f2"};
  return data;
}

namespace {

Vector lorenz_rhs(const Vector& x, double forcing) {
  const Index k = x.size();
  Vector dx(k);
  for (Index i = 0; i < k; ++i) {
    const Index im1 = (i - 1 + k) % k;
    const Index im2 = (i - 2 + k) % k;
    const Index ip1 = (i + 1) % k;
    dx[i] = -x[im1] * (x[im2] - x[ip1]) - x[i] + forcing;
  }
  return dx;
}

struct Trajectory {
  double h;
  std::vector<Vector> states;  // one per step, t = step * h
  std::vector<Vector> derivs;

  Vector at(double t) const {
    const double pos = t / h;
    Index i = static_cast<Index>(std::floor(pos));
    const Index last = static_cast<Index>(states.size()) - 1;
    if (i >= last) return states[last];
    if (i < 0) i = 0;
    const double u = pos - static_cast<double>(i);
    // cubic Hermite between stored steps
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * states[i] + h * h10 * derivs[i] + h01 * states[i + 1] +
           h * h11 * derivs[i + 1];
  }
};

Trajectory integrate_lorenz(Vector x, double forcing, double t_end, double h) {
  Trajectory traj;
  traj.h = h;
  const Index steps = static_cast<Index>(std::llround(t_end / h));
  traj.states.reserve(steps + 1);
  traj.derivs.reserve(steps + 1);
  traj.states.push_back(x);
  traj.derivs.push_back(lorenz_rhs(x, forcing));
  for (Index s = 0; s < steps; ++s) {
    const Vector k1 = traj.derivs.back();
    const Vector k2 = lorenz_rhs(x + 0.5 * h * k1, forcing);
    const Vector k3 = lorenz_rhs(x + 0.5 * h * k2, forcing);
    const Vector k4 = lorenz_rhs(x + h * k3, forcing);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e6)
      throw NumericError("lorenz96: integrator unstable at step " + std::to_string(s + 1) +
                         " (t = " + std::to_string((s + 1) * h) + ")");
    traj.states.push_back(x);
    traj.derivs.push_back(lorenz_rhs(x, forcing));
  }
  return traj;
}

}  // namespace

Lorenz96Data gen_lorenz96(int k_dim, double forcing, Index n_train, Index n_test,
                          double noise_rel, std::uint64_t seed) {
  if (k_dim < 4) throw DataError("lorenz96: state dimension must be at least 4");
  if (n_train < 2 || n_test < 2) throw DataError("lorenz96: need at least two samples");

  NormalSampler normal(seed);
  Vector x0 = Vector::Constant(k_dim, forcing);
  x0[static_cast<Index>(normal.next_u64() % static_cast<std::uint64_t>(k_dim))] += 0.01;

  const double t_end = 8.0;
  const Trajectory traj = integrate_lorenz(x0, forcing, t_end, 1e-3);

  auto sample = [&](const Vector& times) {
    Matrix y(times.size(), k_dim);
    for (Index t = 0; t < times.size(); ++t) y.row(t) = traj.at(times[t]).transpose();
    return y;
  };

  Lorenz96Data out;
  out.train.x = linspace(0.0, t_end, n_train);
  out.train.y = sample(out.train.x.col(0));
  out.test.x = linspace(0.0, t_end, n_test);
  out.test.y = sample(out.test.x.col(0));
  out.train.x_names = out.test.x_names = {"t"};
  for (int d = 0; d < k_dim; ++d) {
    out.train.y_names.push_back("x" + std::to_string(d + 1));
    out.test.y_names.push_back("x" + std::to_string(d + 1));
  }
  add_relative_noise(out.train.y, noise_rel, normal);
  return out;
}

}  // namespace mrgp
