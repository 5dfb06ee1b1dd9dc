#include "kslab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "kslab/numeric.hpp"

namespace kslab {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  os << issues.size() << " config issue" << (issues.size() == 1 ? "" : "s");
  for (const auto& i : issues) {
    os << "\n  ";
    if (i.line > 0)
      os << "line " << i.line;
    else
      os << "missing";
    os << ": " << errc_name(i.code) << ": " << i.message;
  }
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(issues.empty() ? Errc::type_error : issues.front().code, join_issues(issues)), issues_(std::move(issues)) {}

const std::vector<std::string> experiment_kinds = {"l1_stability", "l2_stability",    "commutator",      "rate_study",
                                                   "wh_stability", "simulate_vlasov", "simulate_hartree"};

bool is_quantum_kind(const std::string& kind) { return kind == "wh_stability" || kind == "simulate_hartree"; }
bool is_sweep_kind(const std::string& kind) { return kind == "rate_study" || kind == "commutator"; }

namespace {

enum class Type { text, integer, real, real_list, choice };

struct Field {
  const char* key;
  Type type;
  std::vector<std::string> choices;
};

const std::vector<Field>& schema() {
  static const std::vector<Field> s = {
      {"experiment.kind", Type::choice, experiment_kinds},
      {"experiment.seed", Type::integer, {}},
      {"grid.n_x", Type::integer, {}},
      {"grid.n_v", Type::integer, {}},
      {"grid.length_x", Type::real, {}},
      {"grid.v_max", Type::real, {}},
      {"grid.v_required", Type::real, {}},
      {"grid.n_min", Type::integer, {}},
      {"kernel.type", Type::choice, {"regularized_coulomb", "coulomb3d", "coulomb1d", "gaussian", "harmonic", "zero"}},
      {"kernel.epsilon", Type::real, {}},
      {"kernel.sigma", Type::real, {}},
      {"kernel.sign", Type::integer, {}},
      {"quantum.hbar", Type::real, {}},
      {"quantum.hbar_sweep", Type::real_list, {}},
      {"initial.family", Type::choice, {"maxwellian", "gaussian_bump", "two_stream"}},
      {"initial.mass", Type::real, {}},
      {"initial.temperature", Type::real, {}},
      {"initial.drift", Type::real, {}},
      {"initial.x0", Type::real, {}},
      {"initial.v0", Type::real, {}},
      {"initial.var_x", Type::real, {}},
      {"initial.var_v", Type::real, {}},
      {"initial.separation", Type::real, {}},
      {"perturbation.mode", Type::integer, {}},
      {"perturbation.amplitude", Type::real, {}},
      {"time.t_end", Type::real, {}},
      {"time.dt", Type::real, {}},
      {"time.record_every", Type::integer, {}},
      {"stability.slack", Type::real, {}},
      {"stability.constant", Type::real, {}},
      {"stability.lorentz_p", Type::real, {}},
      {"stability.lorentz_q", Type::real, {}},
      {"stability.probes", Type::integer, {}},
      {"stability.commutator_eps", Type::real, {}},
      {"hypothesis.sigma", Type::real, {}},
      {"hypothesis.m", Type::real, {}},
      {"hypothesis.n0", Type::real, {}},
      {"hypothesis.n", Type::real, {}},
      {"hypothesis.n1", Type::real, {}},
      {"output.dir", Type::text, {}},
  };
  return s;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : schema())
    if (key == f.key) return &f;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_list(const std::string& s, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_real(trim(item), v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::vector<ConfigIssue> issues;
  ExperimentConfig c;
  std::map<std::string, int> line_of;
  std::string section;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({lineno, Errc::type_error, "malformed section header '" + line + "'"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({lineno, Errc::type_error, "expected 'key = value', got '" + line + "'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    const std::string value = trim(line.substr(eq + 1));
    const Field* f = find_field(full);
    if (!f) {
      issues.push_back({lineno, Errc::unknown_key, "unknown key '" + full + "'"});
      continue;
    }
    if (line_of.count(full)) {
      issues.push_back({lineno, Errc::type_error, "duplicate key '" + full + "' (first on line " +
                                                     std::to_string(line_of[full]) + ")"});
      continue;
    }
    bool ok = true;
    switch (f->type) {
      case Type::text: ok = !value.empty(); break;
      case Type::integer: {
        long long v;
        ok = parse_int(value, v);
        break;
      }
      case Type::real: {
        double v;
        ok = parse_real(value, v);
        break;
      }
      case Type::real_list: {
        std::vector<double> v;
        ok = parse_list(value, v);
        break;
      }
      case Type::choice: ok = std::find(f->choices.begin(), f->choices.end(), value) != f->choices.end(); break;
    }
    if (!ok) {
      std::string expect;
      switch (f->type) {
        case Type::text: expect = "a non-empty string"; break;
        case Type::integer: expect = "an integer"; break;
        case Type::real: expect = "a finite number"; break;
        case Type::real_list: expect = "a comma-separated list of numbers"; break;
        case Type::choice: {
          expect = "one of";
          for (const auto& ch : f->choices) expect += " " + ch;
          break;
        }
      }
      issues.push_back({lineno, Errc::type_error, "'" + full + "' must be " + expect + ", got '" + value + "'"});
      continue;
    }
    c.raw[full] = value;
    line_of[full] = lineno;
  }

  auto has = [&](const char* k) { return c.raw.count(k) > 0; };
  auto real = [&](const char* k, double& dst) {
    if (has(k)) parse_real(c.raw[k], dst);
  };
  auto integer = [&](const char* k, int& dst) {
    long long v;
    if (has(k) && parse_int(c.raw[k], v)) dst = static_cast<int>(v);
  };
  auto opt_real = [&](const char* k, std::optional<double>& dst) {
    double v;
    if (has(k) && parse_real(c.raw[k], v)) dst = v;
  };
  auto at = [&](const char* k) { return line_of.count(k) ? line_of[k] : 0; };

  c.kind = has("experiment.kind") ? c.raw["experiment.kind"] : "";
  if (has("experiment.seed")) {
    long long v;
    parse_int(c.raw["experiment.seed"], v);
    if (v < 0) issues.push_back({at("experiment.seed"), Errc::type_error, "experiment.seed must be nonnegative"});
    c.seed = static_cast<std::uint64_t>(std::max(v, 0LL));
  }
  integer("grid.n_x", c.n_x);
  integer("grid.n_v", c.n_v);
  real("grid.length_x", c.length_x);
  real("grid.v_max", c.v_max);
  real("grid.v_required", c.v_required);
  integer("grid.n_min", c.n_min);
  if (has("kernel.type")) c.kernel_type = c.raw["kernel.type"];
  real("kernel.epsilon", c.kernel_epsilon);
  real("kernel.sigma", c.kernel_sigma);
  integer("kernel.sign", c.kernel_sign);
  real("quantum.hbar", c.hbar);
  if (has("quantum.hbar_sweep")) parse_list(c.raw["quantum.hbar_sweep"], c.hbar_sweep);
  if (has("initial.family")) c.family = c.raw["initial.family"];
  real("initial.mass", c.mass);
  real("initial.temperature", c.temperature);
  real("initial.drift", c.drift);
  real("initial.x0", c.x0);
  real("initial.v0", c.v0);
  real("initial.var_x", c.var_x);
  real("initial.var_v", c.var_v);
  real("initial.separation", c.separation);
  if (has("perturbation.mode")) {
    int m = 0;
    integer("perturbation.mode", m);
    c.perturbation_mode = m;
  }
  real("perturbation.amplitude", c.perturbation_amplitude);
  real("time.t_end", c.t_end);
  real("time.dt", c.dt);
  integer("time.record_every", c.record_every);
  real("stability.slack", c.slack);
  opt_real("stability.constant", c.constant);
  real("stability.lorentz_p", c.lorentz_p);
  real("stability.lorentz_q", c.lorentz_q);
  integer("stability.probes", c.probes);
  real("stability.commutator_eps", c.commutator_eps);
  opt_real("hypothesis.sigma", c.hyp_sigma);
  opt_real("hypothesis.m", c.hyp_m);
  opt_real("hypothesis.n0", c.hyp_n0);
  opt_real("hypothesis.n", c.hyp_n);
  opt_real("hypothesis.n1", c.hyp_n1);
  if (has("output.dir")) c.output_dir = c.raw["output.dir"];

  // Required keys.
  std::vector<std::string> required = {"experiment.kind", "experiment.seed", "grid.length_x", "kernel.type",
                                       "initial.family",  "time.t_end",      "time.dt",       "output.dir"};
  if (!c.kind.empty()) {
    if (is_sweep_kind(c.kind)) {
      required.push_back("quantum.hbar_sweep");
    } else {
      required.push_back("grid.n_x");
      if (!is_quantum_kind(c.kind)) {
        required.push_back("grid.n_v");
        required.push_back("grid.v_max");
      }
    }
    if (is_quantum_kind(c.kind)) required.push_back("quantum.hbar");
    if (c.kind == "l1_stability" || c.kind == "l2_stability") {
      required.push_back("perturbation.mode");
      required.push_back("perturbation.amplitude");
    }
  }
  for (const auto& k : required)
    if (!c.raw.count(k)) issues.push_back({0, Errc::type_error, "required key '" + k + "' is missing"});

  // Value constraints.
  auto positive = [&](const char* k, double v) {
    if (has(k) && !(v > 0.0)) issues.push_back({at(k), Errc::type_error, std::string(k) + " must be positive"});
  };
  positive("grid.length_x", c.length_x);
  positive("grid.v_max", c.v_max);
  positive("grid.v_required", c.v_required);
  positive("kernel.epsilon", c.kernel_epsilon);
  positive("kernel.sigma", c.kernel_sigma);
  positive("quantum.hbar", c.hbar);
  positive("initial.mass", c.mass);
  positive("initial.temperature", c.temperature);
  positive("initial.var_x", c.var_x);
  positive("initial.var_v", c.var_v);
  positive("time.dt", c.dt);
  positive("stability.lorentz_p", c.lorentz_p);
  positive("stability.lorentz_q", c.lorentz_q);
  if (has("time.t_end") && c.t_end < 0.0) issues.push_back({at("time.t_end"), Errc::type_error, "time.t_end must be >= 0"});
  if (has("stability.slack") && c.slack < 0.0)
    issues.push_back({at("stability.slack"), Errc::type_error, "stability.slack must be >= 0"});
  if (has("time.record_every") && c.record_every < 1)
    issues.push_back({at("time.record_every"), Errc::type_error, "time.record_every must be >= 1"});
  if (has("stability.probes") && c.probes < 1)
    issues.push_back({at("stability.probes"), Errc::type_error, "stability.probes must be >= 1"});
  if (has("kernel.sign") && c.kernel_sign != 1 && c.kernel_sign != -1)
    issues.push_back({at("kernel.sign"), Errc::type_error, "kernel.sign must be 1 or -1"});
  for (const char* k : {"grid.n_x", "grid.n_v", "grid.n_min"}) {
    int v = 0;
    integer(k, v);
    if (has(k) && (v < 8 || !is_power_of_two(static_cast<std::size_t>(v))))
      issues.push_back({at(k), Errc::type_error, std::string(k) + " must be a power of two >= 8"});
  }
  if (has("perturbation.amplitude") && std::abs(c.perturbation_amplitude) >= 1.0)
    issues.push_back({at("perturbation.amplitude"), Errc::type_error, "perturbation.amplitude must lie in (-1, 1)"});
  for (double h : c.hbar_sweep)
    if (!(h > 0.0)) issues.push_back({at("quantum.hbar_sweep"), Errc::type_error, "hbar_sweep entries must be positive"});

  // Grid and hbar compatibility.
  if (is_quantum_kind(c.kind) && has("quantum.hbar") && has("grid.n_x") && has("grid.length_x") && c.hbar > 0.0 &&
      c.length_x > 0.0) {
    const double want = pi * c.hbar * c.n_x / c.length_x;
    if (has("grid.n_v") && c.n_v != c.n_x)
      issues.push_back({at("grid.n_v"), Errc::compatibility_error,
                        "quantum experiments need n_v = n_x (v_max = pi*hbar*n_x/L pairing); got n_v = " +
                            std::to_string(c.n_v) + ", n_x = " + std::to_string(c.n_x)});
    if (has("grid.v_max") && std::abs(c.v_max - want) > 1e-12 * want) {
      std::ostringstream os;
      os.precision(17);
      os << "grid.v_max = " << c.raw["grid.v_max"] << " violates v_max = pi*hbar*n_x/L = " << want;
      issues.push_back({at("grid.v_max"), Errc::compatibility_error, os.str()});
    }
    if (!has("grid.n_v")) c.n_v = c.n_x;
    if (!has("grid.v_max")) c.v_max = want;
    if (c.n_x > 512)
      issues.push_back({at("grid.n_x"), Errc::compatibility_error, "quantum experiments are capped at n_x = 512"});
  }
  if (is_sweep_kind(c.kind) && !c.hbar_sweep.empty() && c.length_x > 0.0) {
    if (c.hbar_sweep.size() < 4)
      issues.push_back({at("quantum.hbar_sweep"), Errc::compatibility_error, "hbar_sweep needs at least 4 values"});
    for (double h : c.hbar_sweep) {
      int n = 1;
      while (n < c.n_min) n *= 2;
      while (h > 0.0 && pi * h * n / c.length_x < c.v_required && n <= 512) n *= 2;
      if (n > 512)
        issues.push_back({at("quantum.hbar_sweep"), Errc::compatibility_error,
                          "hbar = " + std::to_string(h) + " needs n_x > 512 to reach v_required with v_max = pi*hbar*n_x/L"});
    }
  }
  if (c.kind == "simulate_vlasov" || c.kind == "l1_stability" || c.kind == "l2_stability") {
    if (has("quantum.hbar") || has("quantum.hbar_sweep"))
      issues.push_back({at(has("quantum.hbar") ? "quantum.hbar" : "quantum.hbar_sweep"), Errc::compatibility_error,
                        "classical experiments take no hbar"});
  }
  if (c.kernel_type == "regularized_coulomb" && has("grid.n_x") && c.length_x > 0.0 && c.n_x > 0 &&
      c.kernel_epsilon < c.length_x / c.n_x)
    issues.push_back({at("kernel.epsilon"), Errc::compatibility_error, "kernel.epsilon must be >= dx = L/n_x"});
  if (c.kernel_type == "regularized_coulomb" && is_sweep_kind(c.kind) && c.length_x > 0.0 && c.n_min > 0 &&
      c.kernel_epsilon < c.length_x / c.n_min)
    issues.push_back({at("kernel.epsilon"), Errc::compatibility_error,
                      "kernel.epsilon must be >= L/n_min, the coarsest sweep spacing (raise grid.n_min)"});

  // Hypothesis exponents.
  auto hyp = [&](const char* k, const std::optional<double>& v, bool ok, const std::string& rule) {
    if (v && !ok) issues.push_back({at(k), Errc::compatibility_error, std::string(k) + " violates " + rule});
  };
  hyp("hypothesis.m", c.hyp_m, c.hyp_m && *c.hyp_m > 3.0, "m > 3");
  hyp("hypothesis.sigma", c.hyp_sigma, c.hyp_sigma && (!c.hyp_m || *c.hyp_sigma > *c.hyp_m + 6.0), "sigma > m + 6");
  hyp("hypothesis.n0", c.hyp_n0, c.hyp_n0 && *c.hyp_n0 > 6.0, "n0 > 6");
  hyp("hypothesis.n", c.hyp_n, c.hyp_n && *c.hyp_n > 3.0, "n > 3");
  hyp("hypothesis.n1", c.hyp_n1, c.hyp_n1 && *c.hyp_n1 > 6.0, "n1 > 6");

  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(), [](const ConfigIssue& a, const ConfigIssue& b) {
      return (a.line == 0 ? 1 << 30 : a.line) < (b.line == 0 ? 1 << 30 : b.line);
    });
    throw ConfigError(std::move(issues));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::io_error, "cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const ExperimentConfig& config) {
  std::ostringstream os;
  std::string section;
  bool first = true;
  for (const auto& f : schema()) {
    auto it = config.raw.find(f.key);
    if (it == config.raw.end()) continue;
    const std::string key(f.key);
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!first) os << "\n";
      os << "[" << sec << "]\n";
      section = sec;
      first = false;
    }
    os << key.substr(dot + 1) << " = " << it->second << "\n";
  }
  return os.str();
}

}  // namespace kslab
