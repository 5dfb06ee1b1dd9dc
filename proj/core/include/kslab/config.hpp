#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kslab/error.hpp"

namespace kslab {

struct ConfigIssue {
  int line = 0;  // 0 when the key is missing altogether
  Errc code = Errc::type_error;
  std::string message;
};

// Carries every problem found in a config, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;

  int n_x = 0;
  int n_v = 0;
  double length_x = 0.0;
  double v_max = 0.0;
  double v_required = 5.0;
  int n_min = 64;  // smallest sweep grid

  std::string kernel_type;
  double kernel_epsilon = 0.1;
  double kernel_sigma = 1.0;
  int kernel_sign = 1;

  double hbar = 0.0;
  std::vector<double> hbar_sweep;

  std::string family;
  double mass = 1.0;
  double temperature = 1.0;
  double drift = 0.0;
  double x0 = 0.0;
  double v0 = 0.0;
  double var_x = 1.0;
  double var_v = 1.0;
  double separation = 2.0;

  std::optional<int> perturbation_mode;
  double perturbation_amplitude = 0.0;

  double t_end = 1.0;
  double dt = 0.01;
  int record_every = 10;

  double slack = 0.1;
  std::optional<double> constant;
  double lorentz_p = 3.0;
  double lorentz_q = 1.0;
  int probes = 8;
  double commutator_eps = 1.0;

  std::optional<double> hyp_sigma, hyp_m, hyp_n0, hyp_n, hyp_n1;

  std::string output_dir;

  // Raw "section.key" -> value text as written, used for the canonical echo.
  std::map<std::string, std::string> raw;
};

extern const std::vector<std::string> experiment_kinds;

bool is_quantum_kind(const std::string& kind);
bool is_sweep_kind(const std::string& kind);

// Line-oriented `key = value`, `#` comments, `[section]` headers. Throws ConfigError listing
// all UnknownKey, TypeError and CompatibilityError issues with line numbers.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical text: schema order, one `key = value` per line, raw values preserved.
std::string serialize(const ExperimentConfig& config);

}  // namespace kslab
