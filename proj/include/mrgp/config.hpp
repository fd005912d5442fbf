#pragma once

#include <cstdint>
#include <string>

#include "mrgp/basis.hpp"

namespace mrgp {

enum class Mode { ConditionallyIndependent, FullyIndependent };

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct ModelConfig {
  int m = 0;                        // max resolution
  int q = 2;                        // subdivision factor
  int p = 0;                        // basis count; 0 resolves to min(n, 100)
  Mode mode = Mode::ConditionallyIndependent;
  SpectralSpec spectral{};          // Matern 3/2, lengthscale 1, variance 1
  int sweeps_per_resolution = 200;
  double convergence_tol = 1e-6;
  int tau_update_period = 1;        // interval-refresh cycles per resolution; 0 disables
  std::uint64_t seed = 0;

  void validate() const;
  int resolve_p(Index n) const;
};

// Flat key=value text file; '#' starts a comment, unknown keys are errors.
ModelConfig parse_config_file(const std::string& path);
void apply_config_line(ModelConfig& config, const std::string& key,
                       const std::string& value);
std::string config_to_text(const ModelConfig& config);

}  // namespace mrgp
