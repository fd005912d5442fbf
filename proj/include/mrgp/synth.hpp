#pragma once

// Synthetic-data generators. Both are pure functions of (params, seed).

#include <cstdint>
#include <random>

#include "mrgp/dataset.hpp"
#include "mrgp/types.hpp"

namespace mrgp {

// Deterministic standard-normal stream (Box-Muller over mt19937_64, whose
// output sequence the standard pins down), so generated datasets are
// identical across platforms.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}
  double operator()();
  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Noiseless target functions of the two-output toy regression problem.
double toy_f1(double x);
double toy_f2(double x);

// n linearly spaced inputs on [0, 12]; outputs (f1, f2) plus Gaussian noise
// with standard deviation noise_rel * std(clean signal) per dimension.
Dataset gen_toydata(Index n, double noise_rel, std::uint64_t seed);

// Noiseless toy targets on a linearly spaced test grid.
Dataset toydata_grid(Index n_test);

struct Lorenz96Data {
  Dataset train;  // noisy samples on n_train linearly spaced times in [0, 8]
  Dataset test;   // noiseless trajectory values on the n_test grid
};

// Integrates dx_k/dt = -x_{k-1}(x_{k-2} - x_{k+1}) - x_k + F from the
// equilibrium x_k = F with a 0.01 perturbation on one seeded coordinate,
// classical RK4 with fixed step 1e-3.
Lorenz96Data gen_lorenz96(int k_dim, double forcing, Index n_train, Index n_test,
                          double noise_rel, std::uint64_t seed);

}  // namespace mrgp
