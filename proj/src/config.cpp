#include "mrgp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mrgp/errors.hpp"

namespace mrgp {

std::string mode_name(Mode mode) {
  return mode == Mode::ConditionallyIndependent ? "ci" : "fi";
}

Mode mode_from_name(const std::string& name) {
  if (name == "ci") return Mode::ConditionallyIndependent;
  if (name == "fi") return Mode::FullyIndependent;
  throw DataError("config: unknown mode '" + name + "' (expected ci or fi)");
}

void ModelConfig::validate() const {
  if (m < 0) throw DataError("config: m must be nonnegative");
  if (q < 2) throw DataError("config: q must be at least 2");
  if (p < 0) throw DataError("config: p must be nonnegative");
  if (sweeps_per_resolution < 1) throw DataError("config: sweeps_per_resolution must be positive");
  if (!(convergence_tol > 0)) throw DataError("config: convergence_tol must be positive");
  if (tau_update_period < 0) throw DataError("config: tau_update_period must be nonnegative");
  if (!(spectral.nu > 0) || !(spectral.length > 0) || !(spectral.variance > 0))
    throw DataError("config: spectral parameters must be positive");
}

int ModelConfig::resolve_p(Index n) const {
  if (p > 0) return p;
  return static_cast<int>(std::min<Index>(n, 100));
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("config: bad numeric value for '" + key + "': '" + value + "'");
  }
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("config: bad integer value for '" + key + "': '" + value + "'");
  }
}

}  // namespace

void apply_config_line(ModelConfig& config, const std::string& key,
                       const std::string& value) {
  if (key == "m")
    config.m = static_cast<int>(to_int(key, value));
  else if (key == "q")
    config.q = static_cast<int>(to_int(key, value));
  else if (key == "p")
    config.p = static_cast<int>(to_int(key, value));
  else if (key == "mode")
    config.mode = mode_from_name(value);
  else if (key == "nu")
    config.spectral.nu = to_double(key, value);
  else if (key == "lengthscale")
    config.spectral.length = to_double(key, value);
  else if (key == "variance")
    config.spectral.variance = to_double(key, value);
  else if (key == "sweeps_per_resolution")
    config.sweeps_per_resolution = static_cast<int>(to_int(key, value));
  else if (key == "convergence_tol")
    config.convergence_tol = to_double(key, value);
  else if (key == "tau_update_period")
    config.tau_update_period = static_cast<int>(to_int(key, value));
  else if (key == "seed")
    config.seed = static_cast<std::uint64_t>(to_int(key, value));
  else
    throw DataError("config: unknown key '" + key + "'");
}

ModelConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open '" + path + "'");
  ModelConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("config: line " + std::to_string(lineno) + " is not key=value");
    apply_config_line(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

std::string config_to_text(const ModelConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "m = " << config.m << "\n"
      << "q = " << config.q << "\n"
      << "p = " << config.p << "\n"
      << "mode = " << mode_name(config.mode) << "\n"
      << "nu = " << config.spectral.nu << "\n"
      << "lengthscale = " << config.spectral.length << "\n"
      << "variance = " << config.spectral.variance << "\n"
      << "sweeps_per_resolution = " << config.sweeps_per_resolution << "\n"
      << "convergence_tol = " << config.convergence_tol << "\n"
      << "tau_update_period = " << config.tau_update_period << "\n"
      << "seed = " << config.seed << "\n";
  return out.str();
}

}  // namespace mrgp
