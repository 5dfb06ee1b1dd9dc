#include "kslab/experiment.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "kslab/error.hpp"
#include "kslab/harness.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/numeric.hpp"
#include "kslab/report.hpp"

namespace kslab {

namespace fs = std::filesystem;

int effective_jobs(int requested) {
  int jobs = std::max(1, requested);
  if (const char* env = std::getenv("KSLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) jobs = std::min(jobs, cap);
  }
  return jobs;
}

PhaseGrid config_grid(const ExperimentConfig& c) { return PhaseGrid::make(c.n_x, c.n_v, c.length_x, c.v_max); }

InteractionKernel config_kernel(const ExperimentConfig& c, const PhaseGrid& grid) {
  const std::string& t = c.kernel_type;
  if (t == "regularized_coulomb") return InteractionKernel::regularized_coulomb(grid, c.kernel_epsilon, c.kernel_sign);
  if (t == "coulomb3d")
    return InteractionKernel::coulomb3d(grid, c.kernel_sign, c.raw.count("kernel.epsilon") ? c.kernel_epsilon : 0.0);
  if (t == "coulomb1d") return InteractionKernel::coulomb1d(grid, c.kernel_sign);
  if (t == "gaussian") return InteractionKernel::gaussian(grid, c.kernel_sigma, c.kernel_sign);
  if (t == "harmonic") return InteractionKernel::harmonic(grid, c.kernel_sign);
  if (t == "zero") return InteractionKernel::zero(grid);
  fail(Errc::unsupported_spec, "unknown kernel type '" + t + "'");
}

KineticDensity config_initial(const ExperimentConfig& c, const PhaseGrid& grid, bool with_perturbation) {
  KineticDensity f = [&] {
    if (c.family == "maxwellian") return maxwellian(grid, c.mass, c.temperature, c.drift);
    if (c.family == "gaussian_bump") return gaussian_bump(grid, c.mass, c.x0, c.v0, c.var_x, c.var_v);
    if (c.family == "two_stream") return two_stream(grid, c.mass, c.separation, c.temperature);
    fail(Errc::unsupported_spec, "unknown initial family '" + c.family + "'");
  }();
  if (with_perturbation && c.perturbation_mode) f = perturbed(f, *c.perturbation_mode, c.perturbation_amplitude);
  return f;
}

std::vector<double> probe_points(std::uint64_t seed, int count, double length_x) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.push_back((u - 0.5) * 0.5 * length_x);
  }
  return out;
}

namespace {

struct Artifacts {
  std::string verdict;  // PASS | FAIL | COMPLETE
  double measured = 0.0;
  double slack = 0.0;
  std::vector<std::string> extra_summary;
  CsvTable result;
  std::vector<std::pair<std::string, CsvTable>> extra_csv;
  std::string plot;
  std::vector<std::string> meta;
};

std::string fmt(double x) { return format_double(x); }

// Smallest C with m(t) <= m(0) exp(C int lambda) at every sample.
double minimal_constant(const StabilityEnvelope& e) {
  const std::vector<double> lam = cumulative_integral(e.t, e.rate);
  double c = 0.0;
  for (std::size_t k = 1; k < e.t.size(); ++k)
    if (e.metric[k] > 0.0 && e.metric.front() > 0.0 && lam[k] > 0.0)
      c = std::max(c, std::log(e.metric[k] / e.metric.front()) / lam[k]);
  return c;
}

CsvTable envelope_table(const StabilityEnvelope& e, const std::string& unit) {
  CsvTable t;
  t.header = {"t [time]", "metric [" + unit + "]", "bound [" + unit + "]", "lambda [1/time]", "Lambda [1]", "verdict [0/1]"};
  for (std::size_t k = 0; k < e.t.size(); ++k)
    t.rows.push_back({e.t[k], e.metric[k], e.bound[k], e.rate[k], e.integral[k], static_cast<double>(e.verdict[k])});
  return t;
}

std::string envelope_plot(const StabilityEnvelope& e, const std::string& title, const std::string& unit) {
  PlotStyle st;
  st.title = title;
  st.xlabel = "t";
  st.ylabel = unit;
  bool positive = std::all_of(e.metric.begin(), e.metric.end(), [](double v) { return v > 0.0; });
  st.logy = positive;
  return emit_plot({{"metric", e.t, e.metric}, {"bound", e.t, e.bound}}, st);
}

Artifacts run_l1(const ExperimentConfig& c) {
  const PhaseGrid g = config_grid(c);
  const InteractionKernel k = config_kernel(c, g);
  const KineticDensity f2 = config_initial(c, g, false);
  const KineticDensity f1 = config_initial(c, g, true);
  const LorentzPair pair{c.lorentz_p, c.lorentz_q};
  const double C = c.constant ? *c.constant : calibrate_l1_constant(k, pair);
  const PairedRunOptions opt{c.t_end, c.dt, c.record_every, c.slack, pair};
  const StabilityEnvelope e = check_l1_stability(f1, f2, k, C, opt);
  Artifacts a;
  a.verdict = e.pass() ? "PASS" : "FAIL";
  a.measured = minimal_constant(e);
  a.slack = c.slack;
  a.extra_summary = {"declared_constant = " + fmt(C), "worst_ratio = " + fmt(e.worst_ratio())};
  a.result = envelope_table(e, "L1 norm");
  a.plot = envelope_plot(e, "L1 stability envelope", "||f1 - f2||_1");
  return a;
}

Artifacts run_l2(const ExperimentConfig& c) {
  const PhaseGrid g = config_grid(c);
  const InteractionKernel k = config_kernel(c, g);
  const KineticDensity f2 = config_initial(c, g, false);
  const KineticDensity f1 = config_initial(c, g, true);
  const LorentzPair pair{c.lorentz_p, c.lorentz_q};
  const double C = c.constant ? *c.constant : calibrate_l2_constant(k, pair);
  const PairedRunOptions opt{c.t_end, c.dt, c.record_every, c.slack, pair};
  const L2Stability r = check_l2_stability(f1, f2, k, C, opt);
  Artifacts a;
  a.verdict = r.pass() ? "PASS" : "FAIL";
  a.measured = minimal_constant(r.main);
  a.slack = c.slack;
  a.extra_summary = {"declared_constant = " + fmt(C), "c_inf = " + fmt(r.c_inf),
                     std::string("main = ") + (r.main.pass() ? "PASS" : "FAIL"),
                     std::string("corollary = ") + (r.corollary.pass() ? "PASS" : "FAIL"),
                     std::string("pointwise_consistent = ") + (r.pointwise_consistent ? "true" : "false")};
  a.result = envelope_table(r.main, "L2 norm of sqrt difference");
  a.extra_csv.push_back({"corollary.csv", envelope_table(r.corollary, "L2 norm")});
  a.plot = envelope_plot(r.main, "L2 stability envelope (square roots)", "||sqrt f1 - sqrt f2||_2");
  return a;
}

Artifacts run_commutator(const ExperimentConfig& c) {
  const std::vector<double> probes = probe_points(c.seed, c.probes, c.length_x);
  const ExperimentConfig cc = c;
  auto family = [cc](PlanckScale s) {
    const PhaseGrid g = sweep_grid(s.hbar, cc.length_x, cc.v_required, cc.n_min);
    return weyl_quantize(config_initial(cc, g, true), s);
  };
  auto kernel = [cc](const PhaseGrid& g) { return config_kernel(cc, g); };
  const CommutatorStudy st = check_commutator_inequality(family, kernel, probes, c.hbar_sweep, c.commutator_eps);
  Artifacts a;
  const bool ok = st.fit.slope >= 0.8 && st.fit.slope <= 1.2;
  a.verdict = ok ? "PASS" : "FAIL";
  a.measured = st.constant;
  a.slack = 0.0;
  a.extra_summary = {"slope = " + fmt(st.fit.slope), "slope_half_width = " + fmt(st.fit.half_width)};
  a.result.header = {"hbar [action]", "lhs [trace norm]", "rhs [density norm]", "ratio [1]"};
  for (std::size_t i = 0; i < st.lhs.size(); ++i) a.result.rows.push_back({c.hbar_sweep[i], st.lhs[i], st.rhs[i], st.ratio[i]});
  PlotStyle ps{"commutator norm vs hbar", "hbar", "sup_x ||[K(.-x), op]||_1", true, true, true};
  a.plot = emit_plot({{"lhs", c.hbar_sweep, st.lhs}}, ps);
  return a;
}

Artifacts run_rate(const ExperimentConfig& c, int jobs) {
  const ExperimentConfig cc = c;
  RateStudyOptions opt;
  opt.t_end = c.t_end;
  opt.dt = c.dt;
  opt.record_every = c.record_every;
  opt.length_x = c.length_x;
  opt.v_required = c.v_required;
  opt.n_min = c.n_min;
  const RateStudy st = semiclassical_rate_study(
      c.hbar_sweep, [cc](const PhaseGrid& g) { return config_initial(cc, g, true); },
      [cc](const PhaseGrid& g) { return config_kernel(cc, g); }, opt, jobs);
  Artifacts a;
  const bool ok = st.fit_l1.slope >= 0.7 && st.fit_l1.slope <= 1.3 && st.fit_l2.slope >= 0.7 && st.fit_l2.slope <= 1.3 &&
                  st.fourier_ok();
  a.verdict = ok ? "PASS" : "FAIL";
  a.measured = st.fit_l1.slope;
  a.slack = 0.0;
  a.extra_summary = {"slope_l1 = " + fmt(st.fit_l1.slope), "slope_l2 = " + fmt(st.fit_l2.slope),
                     std::string("fourier_corollary = ") + (st.fourier_ok() ? "PASS" : "FAIL")};
  a.result.header = {"hbar [action]",        "n_x [1]",           "initial_l1 [trace norm]", "initial_l2 [HS norm]",
                     "final_l1 [trace norm]", "final_l2 [HS norm]", "fourier_excess [1]",      "fourier_ok [0/1]"};
  std::vector<double> hb, l1, l2;
  for (const auto& p : st.points) {
    a.result.rows.push_back({p.hbar, static_cast<double>(p.n), p.initial_l1, p.initial_l2, p.final_l1, p.final_l2,
                             p.fourier_excess, p.fourier_ok ? 1.0 : 0.0});
    hb.push_back(p.hbar);
    l1.push_back(p.final_l1);
    l2.push_back(p.final_l2);
  }
  PlotStyle ps{"semiclassical distance at t_end", "hbar", "distance", true, true, true};
  a.plot = emit_plot({{"trace norm", hb, l1}, {"Hilbert-Schmidt norm", hb, l2}}, ps);
  return a;
}

Artifacts run_wh(const ExperimentConfig& c) {
  const PhaseGrid g = config_grid(c);
  const PlanckScale s{c.hbar};
  const InteractionKernel k = config_kernel(c, g);
  const KineticDensity f0 = config_initial(c, g, true);
  // The coupling is built from coherent projectors, so op0 is too (the routes part on coarse grids).
  const DensityOperator op0 = wick_quantize(f0, s, WickRoute::coherent_sum);
  WhOptions opt;
  opt.t_end = c.t_end;
  opt.dt = c.dt;
  opt.record_every = c.record_every;
  opt.slack = c.slack;
  opt.zero_lambda = k.kind() == KernelKind::zero;
  const WhStability r = check_wh_stability(f0, op0, k, opt);
  Artifacts a;
  a.verdict = r.pass() ? "PASS" : "FAIL";
  a.measured = r.c0;
  a.slack = c.slack;
  a.extra_summary = {"lower<=upper, " + fmt(r.lower.back()) + ", " + fmt(r.upper.back()) + ", " +
                         (r.bracket_ok ? "true" : "false"),
                     std::string("chain = ") + (r.chain_ok ? "PASS" : "FAIL"),
                     std::string("lower_bound = ") + (r.lower_bound_ok ? "PASS" : "FAIL"),
                     std::string("envelope = ") + (r.envelope.pass() ? "PASS" : "FAIL"),
                     "initial_cost = " + fmt(r.toplitz_initial)};
  a.result.header = {"t [time]",         "e2 [length^2]",    "rho_sum [density]", "c [1/time]",
                     "w [length]",       "bound [length]",   "w2_upper [length]", "lower [length^2]",
                     "upper [length^2]", "verdict [0/1]"};
  for (std::size_t i = 0; i < r.t.size(); ++i)
    a.result.rows.push_back({r.t[i], r.e2[i], r.rho_sum[i], r.c0 * r.rho_sum[i], r.envelope.metric[i], r.envelope.bound[i],
                             r.w2_upper[i], r.lower[i], r.upper[i], static_cast<double>(r.envelope.verdict[i])});
  a.plot = envelope_plot(r.envelope, "W_hbar envelope", "sqrt(E2)");
  return a;
}

Artifacts run_sim_vlasov(const ExperimentConfig& c) {
  const PhaseGrid g = config_grid(c);
  const InteractionKernel k = config_kernel(c, g);
  VlasovState st(config_initial(c, g, true), k, c.dt);
  st = solve_vlasov(st, c.t_end, {}, c.record_every);
  const auto& d = st.diagnostics;
  Artifacts a;
  a.verdict = "COMPLETE";
  a.measured = std::abs(d.energy.back() - d.energy.front()) / std::max(std::abs(d.energy.front()), 1e-300);
  a.result.header = {"t [time]", "mass [1]", "l2 [density]", "energy [energy]", "rho_inf [density]"};
  for (std::size_t i = 0; i < d.t.size(); ++i) a.result.rows.push_back({d.t[i], d.mass[i], d.l2[i], d.energy[i], d.rho_inf[i]});
  PlotStyle ps{"Vlasov diagnostics", "t", "value"};
  a.plot = emit_plot({{"energy", d.t, d.energy}, {"rho_inf", d.t, d.rho_inf}}, ps);
  return a;
}

Artifacts run_sim_hartree(const ExperimentConfig& c) {
  const PhaseGrid g = config_grid(c);
  const PlanckScale s{c.hbar};
  const InteractionKernel k = config_kernel(c, g);
  HartreeState st(wick_quantize(config_initial(c, g, true), s), k, c.dt);
  st = solve_hartree(st, c.t_end, {}, c.record_every);
  const auto& d = st.diagnostics;
  Artifacts a;
  a.verdict = "COMPLETE";
  a.measured = std::abs(d.energy.back() - d.energy.front()) / std::max(std::abs(d.energy.front()), 1e-300);
  a.result.header = {"t [time]",        "trace [1]",       "l1 [trace norm]",  "l2 [HS norm]",
                     "linf [operator]", "min_eig [operator]", "energy [energy]", "diag_inf [density]"};
  for (std::size_t i = 0; i < d.t.size(); ++i)
    a.result.rows.push_back({d.t[i], d.trace[i], d.l1[i], d.l2[i], d.linf[i], d.min_eig[i], d.energy[i], d.diag_inf[i]});
  PlotStyle ps{"Hartree diagnostics", "t", "value"};
  a.plot = emit_plot({{"energy", d.t, d.energy}, {"diag_inf", d.t, d.diag_inf}}, ps);
  return a;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  RunOutcome out;
  out.out_dir = options.out_dir.empty() ? config.output_dir : options.out_dir;
  if (out.out_dir.empty()) fail(Errc::invalid_argument, "run_experiment: no output directory");
  fs::create_directories(out.out_dir);
  const fs::path dir(out.out_dir);
  fs::remove(dir / "FAILED");
  const int jobs = effective_jobs(options.jobs);
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> meta = {"format_version = 1", std::string("kslab_version = ") + kslab_version,
                                   "eigen_version = " + std::to_string(EIGEN_WORLD_VERSION) + "." +
                                       std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION),
                                   "kind = " + config.kind, "jobs = " + std::to_string(jobs)};
  auto write_meta = [&](const std::string& status) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream os;
    for (const auto& m : meta) os << m << "\n";
    os << "status = " << status << "\n";
    os << "wall_time_s = " << fmt(wall) << "\n";
    os << "\n# config\n" << serialize(config);
    write_text((dir / "meta.txt").string(), os.str());
  };
  try {
    Artifacts a;
    const std::string& k = config.kind;
    if (k == "l1_stability")
      a = run_l1(config);
    else if (k == "l2_stability")
      a = run_l2(config);
    else if (k == "commutator")
      a = run_commutator(config);
    else if (k == "rate_study")
      a = run_rate(config, jobs);
    else if (k == "wh_stability")
      a = run_wh(config);
    else if (k == "simulate_vlasov")
      a = run_sim_vlasov(config);
    else if (k == "simulate_hartree")
      a = run_sim_hartree(config);
    else
      fail(Errc::unsupported_spec, "unknown experiment kind '" + k + "'");
    write_csv((dir / "result.csv").string(), a.result);
    for (const auto& [name, table] : a.extra_csv) write_csv((dir / name).string(), table);
    write_text((dir / "plot.svg").string(), a.plot);
    std::ostringstream sm;
    sm << a.verdict << ", " << fmt(a.measured) << ", " << fmt(a.slack) << "\n";
    for (const auto& l : a.extra_summary) sm << l << "\n";
    sm << "format_version = 1\n";
    write_text((dir / "summary.txt").string(), sm.str());
    out.verdict = a.verdict;
    out.exit_code = a.verdict == "FAIL" ? 1 : 0;
    write_meta(a.verdict);
    if (out.exit_code != 0) write_text((dir / "FAILED").string(), "verdict FAIL\n");
  } catch (const std::exception& e) {
    out.verdict = "ERROR";
    out.exit_code = 2;
    meta.push_back(std::string("error = ") + e.what());
    write_meta("ERROR");
    write_text((dir / "FAILED").string(), std::string(e.what()) + "\n");
    spdlog::error("{}", e.what());
  }
  return out;
}

}  // namespace kslab
