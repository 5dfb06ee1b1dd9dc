// Runs the thirteen acceptance criteria at desk scale (d = 1, L = 16, T = 1) and prints one
// verdict line per criterion. Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include "kslab/config.hpp"
#include "kslab/experiment.hpp"
#include "kslab/harness.hpp"
#include "kslab/hartree.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/quantum.hpp"
#include "kslab/semiclassical.hpp"
#include "kslab/transport.hpp"
#include "kslab/vlasov.hpp"
#include "oracles.hpp"

using namespace kslab;

namespace {

constexpr double L = 16.0;
constexpr double kEps = 0.1;
constexpr double T = 1.0;
constexpr double kDt = 0.01;
const std::vector<double> kSweep = {0.4, 0.2, 0.1, 0.05};
// Smallest sweep grid with dx <= eps for the regularized kernel.
constexpr int kSweepMin = 256;
// Single-hbar quantum runs: n = 256 pairs hbar = 0.1 with v_max ~ 5.
constexpr double kWhHbar = 0.1;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

PhaseGrid paired(int n, double hbar) { return PhaseGrid::make(n, n, L, pi * hbar * n / L); }

KineticDensity bump(const PhaseGrid& g) { return gaussian_bump(g, 1.0, 0.0, 0.0, 1.0, 1.0); }

InteractionKernel smooth_kernel(const PhaseGrid& g) { return InteractionKernel::regularized_coulomb(g, kEps, 1); }

// 1. wigner(weyl(f)) = f for band-limited f.
Verdict c01() {
  const double hbar = 0.2;
  const PhaseGrid g = paired(128, hbar);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ph(0.0, 2 * pi);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    PhaseField f{g, std::vector<double>(g.size(), 0.0)};
    for (int a = 0; a <= 12; ++a)
      for (int b = -12; b <= 12; ++b) {
        const double c = u(rng) / (1 + a * a + b * b), p = ph(rng);
        for (int i = 0; i < g.n_x; ++i)
          for (int k = 0; k < g.n_v; ++k)
            f.values[static_cast<std::size_t>(i) * g.n_v + k] +=
                c * std::cos(2 * pi * (double(a) * i + double(b) * k) / g.n_x + p);
      }
    const PhaseField back = wigner_transform(weyl_quantize(f, {hbar}));
    for (std::size_t q = 0; q < f.values.size(); ++q) worst = std::max(worst, std::abs(back.values[q] - f.values[q]));
  }
  return {worst < 1e-10, "max_err=" + num(worst) + " (tol 1e-10)"};
}

// 2. Wick(f) >= 0 for random f >= 0.
Verdict c02() {
  const double hbar = 0.2;
  const PhaseGrid g = paired(128, hbar);
  std::mt19937_64 rng(202);
  double worst = inf;
  for (int trial = 0; trial < 50; ++trial) {
    const KineticDensity f = trial % 2 ? oracle::random_rough_density(g, rng) : oracle::random_density(g, rng);
    const DensityOperator op = wick_quantize(f, {hbar});
    worst = std::min(worst, op.min_eigenvalue());
  }
  return {worst >= -1e-10, "min_eig=" + num(worst) + " over 50 densities (tol -1e-10)"};
}

// 3. Quantization gaps in hbar.
Verdict c03() {
  std::vector<double> gap2, gap1;
  for (double hbar : kSweep) {
    const PhaseGrid g = sweep_grid(hbar, L, 5.0, kSweepMin);
    const PlanckScale s{hbar};
    const KineticDensity f = bump(g);
    const DensityOperator wick = wick_quantize(f, s);
    gap2.push_back(schatten_norm(wick.matrix() - weyl_quantize(f, s).matrix(), s.h(), 2.0));
    gap1.push_back(schatten_norm(wick_sqrt_squared(f, s).matrix() - wick.matrix(), s.h(), 1.0));
  }
  const RateFit r2 = fit_rate(kSweep, gap2), r1 = fit_rate(kSweep, gap1);
  return {r2.slope >= 0.9 && r1.slope >= 0.9,
          "slope_wick_weyl_L2=" + num(r2.slope) + " slope_sqrt_L1=" + num(r1.slope) + " (need >= 0.9)"};
}

// 4. Conservation along both solvers.
Verdict c04() {
  const PhaseGrid gc = PhaseGrid::make(256, 256, L, 6.0);
  const KineticDensity f0 = perturbed(maxwellian(gc, 1.0, 1.0), 1, 0.05);
  VlasovState vs(f0, smooth_kernel(gc), kDt);
  vs = solve_vlasov(vs, T, {}, 10);
  const auto& dv = vs.diagnostics;
  const double mass_drift = std::abs(dv.mass.back() - dv.mass.front());
  double energy_drift = 0.0;
  for (double e : dv.energy) energy_drift = std::max(energy_drift, std::abs(e - dv.energy.front()) / std::abs(dv.energy.front()));

  const double hbar = 0.1;
  const PhaseGrid gq = paired(256, hbar);
  HartreeState hs(wick_quantize(bump(gq), {hbar}), smooth_kernel(gq), kDt);
  hs = solve_hartree(hs, T, {}, 10);
  const auto& dh = hs.diagnostics;
  double trace_drift = 0.0, schatten_drift = 0.0;
  for (std::size_t k = 0; k < dh.t.size(); ++k) {
    trace_drift = std::max(trace_drift, std::abs(dh.trace[k] - dh.trace.front()));
    schatten_drift = std::max({schatten_drift, std::abs(dh.l1[k] / dh.l1.front() - 1),
                               std::abs(dh.l2[k] / dh.l2.front() - 1), std::abs(dh.linf[k] / dh.linf.front() - 1)});
  }
  const bool ok = mass_drift < 1e-8 && energy_drift < 1e-3 && trace_drift < 1e-10 && schatten_drift < 1e-8;
  return {ok, "vlasov mass=" + num(mass_drift) + " energy=" + num(energy_drift) + "; hartree trace=" + num(trace_drift) +
                  " schatten=" + num(schatten_drift)};
}

struct Pair {
  PhaseGrid grid;
  KineticDensity f1, f2;
  InteractionKernel kernel;
};

Pair maxwellian_pair() {
  const PhaseGrid g = PhaseGrid::make(256, 256, L, 6.0);
  const KineticDensity f2 = maxwellian(g, 1.0, 1.0);
  return {g, perturbed(f2, 1, 0.01), f2, smooth_kernel(g)};
}

// 5. L1 weak-strong envelope.
Verdict c05() {
  const Pair p = maxwellian_pair();
  const double C = calibrate_l1_constant(p.kernel);
  const PairedRunOptions opt{T, kDt, 10, 0.1, {}};
  const StabilityEnvelope e = check_l1_stability(p.f1, p.f2, p.kernel, C, opt);
  const StabilityEnvelope same = check_l1_stability(p.f2, p.f2, p.kernel, C, opt);
  bool zero = same.pass();
  for (double m : same.metric) zero = zero && m == 0.0;
  return {e.pass() && zero, "C=" + num(C) + " worst_ratio=" + num(e.worst_ratio()) + " identical_zero=" + (zero ? "yes" : "no")};
}

// 6. L2 weak-strong envelope and its corollary.
Verdict c06() {
  const Pair p = maxwellian_pair();
  const double C = calibrate_l2_constant(p.kernel);
  const L2Stability r = check_l2_stability(p.f1, p.f2, p.kernel, C, {T, kDt, 10, 0.1, {}});
  return {r.pass(), "C=" + num(C) + " main_ratio=" + num(r.main.worst_ratio()) + " corollary_ratio=" +
                        num(r.corollary.worst_ratio()) + " pointwise=" + (r.pointwise_consistent ? "yes" : "no")};
}

// 7. Commutator rate.
Verdict c07() {
  const std::vector<double> probes = probe_points(7, 8, L);
  const CommutatorStudy st = check_commutator_inequality(
      [](PlanckScale s) { return weyl_quantize(bump(sweep_grid(s.hbar, L, 5.0, kSweepMin)), s); }, smooth_kernel, probes,
      kSweep);
  const double rmin = *std::min_element(st.ratio.begin(), st.ratio.end());
  const double rmax = *std::max_element(st.ratio.begin(), st.ratio.end());
  const bool bounded = std::isfinite(rmax) && rmax <= 10.0 * rmin;
  const bool ok = st.fit.slope >= 0.8 && st.fit.slope <= 1.2 && bounded;
  return {ok, "slope=" + num(st.fit.slope) + " (need [0.8,1.2]) ratio_range=[" + num(rmin) + "," + num(rmax) + "]"};
}

// 8. B-term rate, and exact vanishing for a quadratic kernel.
Verdict c08() {
  std::vector<double> norms;
  for (double hbar : kSweep) {
    const PhaseGrid g = sweep_grid(hbar, L, 5.0, kSweepMin);
    norms.push_back(b_term(bump(g), smooth_kernel(g), {hbar}).trace_norm);
  }
  const RateFit fit = fit_rate(kSweep, norms);
  // x^2/2 wraps at separation L/2; the data must vanish there and at the velocity box edge.
  const double hbar = 0.2;
  const PhaseGrid g = paired(128, hbar);
  const KineticDensity f = gaussian_bump(g, 1.0, 0.0, 0.0, 0.25, 0.25);
  const double quad = b_term(f, InteractionKernel::harmonic(g), {hbar}).trace_norm;
  const double scale = schatten_norm(weyl_quantize(f, {hbar}), 1.0);
  const bool ok = fit.slope >= 1.7 && fit.slope <= 2.3 && quad <= 1e-12 * scale;
  return {ok, "slope=" + num(fit.slope) + " (need [1.7,2.3]) harmonic=" + num(quad)};
}

// 9. Semiclassical convergence and the Fourier corollary.
Verdict c09() {
  RateStudyOptions opt;
  opt.t_end = T;
  opt.dt = kDt;
  opt.record_every = 10;
  opt.length_x = L;
  opt.n_min = kSweepMin;
  const RateStudy st = semiclassical_rate_study(kSweep, bump, smooth_kernel, opt, effective_jobs(4));
  double excess = -inf;
  for (const auto& p : st.points) excess = std::max(excess, p.fourier_excess);
  const bool ok = st.fit_l1.slope >= 0.7 && st.fit_l1.slope <= 1.3 && st.fit_l2.slope >= 0.7 && st.fit_l2.slope <= 1.3 &&
                  st.fourier_ok();
  return {ok, "slope_L1=" + num(st.fit_l1.slope) + " slope_L2=" + num(st.fit_l2.slope) +
                  " fourier_excess=" + num(excess) + (st.fourier_ok() ? " fourier=ok" : " fourier=VIOLATED")};
}

// 10. Transport solvers.
Verdict c10() {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(0.05, 1.0), pos(-3.0, 3.0);
  double lp_err = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> a(4), b(4);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
    for (auto& x : a) x /= sa;
    for (auto& x : b) x /= sb;
    Eigen::MatrixXd c(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) c(i, j) = u(rng) * 4.0;
    lp_err = std::max(lp_err, std::abs(network_simplex(a, b, c).cost - oracle::brute_force_transport(a, b, c)));
  }

  const PhaseGrid g = PhaseGrid::make(64, 32, L, 4.0);
  const KineticDensity f = gaussian_bump(g, 1.0, 0.0, 0.0, 0.25, 0.25);
  const double shift = 6 * g.dx();
  const KineticDensity ft = translated(f, shift);
  TransportOptions topt;
  topt.threshold = 1e-8;
  const double w = wasserstein(f, ft, 2.0, TransportMethod::exact, topt).value;
  const double trans_err = std::abs(w - shift);

  double sk_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Measure mu, nu;
    for (int q = 0; q < 30; ++q) {
      mu.points.push_back({pos(rng), pos(rng)});
      mu.weights.push_back(u(rng));
      nu.points.push_back({pos(rng) + 1.0, pos(rng)});
      nu.weights.push_back(u(rng));
    }
    const double sm = mu.total(), sn = nu.total();
    for (auto& x : mu.weights) x /= sm;
    for (auto& x : nu.weights) x /= sn;
    const double exact = wasserstein(mu, nu, 2.0, TransportMethod::exact).value;
    const double ent = wasserstein(mu, nu, 2.0, TransportMethod::entropic).value;
    sk_err = std::max(sk_err, std::abs(ent - exact) / exact);
  }
  const bool ok = lp_err <= 1e-12 && trans_err <= 1e-6 && sk_err <= 0.01;
  return {ok, "lp_vs_vertices=" + num(lp_err) + " translate_err=" + num(trans_err) + " sinkhorn_rel=" + num(sk_err)};
}

// The T = 1 wh run is shared by criteria 11 and 12.
struct WhRuns {
  WhStability main;
  WhStability control;
};

const WhRuns& wh_runs() {
  static std::optional<WhRuns> runs;
  if (!runs) {
    const PhaseGrid g = paired(256, kWhHbar);
    // Narrower in velocity so no atom starts at the box edge.
    const KineticDensity f0 = gaussian_bump(g, 1.0, 0.0, 0.0, 1.0, 0.5);
    const DensityOperator op0 = wick_quantize(f0, {kWhHbar});
    WhOptions opt;
    opt.t_end = T;
    opt.dt = kDt;
    opt.record_every = 10;
    WhRuns r;
    r.main = check_wh_stability(f0, op0, smooth_kernel(g), opt);
    opt.zero_lambda = true;
    r.control = check_wh_stability(f0, op0, InteractionKernel::zero(g), opt);
    runs = std::move(r);
  }
  return *runs;
}

// 11. W_hbar lower bound, Toeplitz diagonal cost, W2 comparison chain.
Verdict c11() {
  std::mt19937_64 rng(1111);
  double worst_lower = inf, worst_diag = 0.0;
  for (double hbar : {0.4, 0.2}) {
    const PhaseGrid g = paired(128, hbar);
    const PlanckScale s{hbar};
    for (int trial = 0; trial < 3; ++trial) {
      const KineticDensity f = oracle::interior_density(g, rng);
      const OperatorCoupling d = toplitz_diagonal(f, s);
      const double cd = semiclassical_cost(f, d);
      worst_diag = std::max(worst_diag, cd / hbar);
      worst_lower = std::min(worst_lower, cd - hbar);
      // Any valid coupling obeys the bound: a random plan between random interior grid points.
      std::uniform_int_distribution<int> cell(0, g.n_x - 1), vcell(g.n_v / 4, 3 * g.n_v / 4 - 1);
      std::uniform_real_distribution<double> wt(0.1, 1.0);
      std::vector<DiscreteCoupling::Atom> atoms(200);
      double total = 0.0;
      for (auto& a : atoms) {
        a = {{g.x(cell(rng)), g.v(vcell(rng))}, {g.x(cell(rng)), g.v(vcell(rng))}, wt(rng)};
        total += a.w;
      }
      for (auto& a : atoms) a.w /= total;
      const OperatorCoupling t = toplitz_coupling(DiscreteCoupling::from_atoms(atoms), g, s);
      worst_lower = std::min(worst_lower, semiclassical_cost(t) - hbar * t.total_mass());
    }
  }
  const WhRuns& r = wh_runs();
  const bool run_lower = r.main.lower_bound_ok && r.control.lower_bound_ok;
  const bool chain = r.main.chain_ok && r.control.chain_ok;
  const bool ok = worst_lower >= -1e-10 && worst_diag <= 1.02 && run_lower && chain;
  return {ok, "min(cost - hbar)=" + num(worst_lower) + " diag_cost/hbar=" + num(worst_diag) +
                  " run_lower=" + (run_lower ? "ok" : "VIOLATED") + " chain=" + (chain ? "ok" : "VIOLATED")};
}

// 12. W_hbar stability with fitted C(t), and the free control.
Verdict c12() {
  const WhRuns& r = wh_runs();
  const bool diff_ok = r.main.differential.t.empty() || r.main.differential.pass();
  const bool ok = r.main.envelope.pass() && diff_ok && r.control.envelope.pass();
  return {ok, "c0=" + num(r.main.c0) + " envelope_ratio=" + num(r.main.envelope.worst_ratio()) +
                  " differential=" + (diff_ok ? "ok" : "VIOLATED") + " control_ratio=" + num(r.control.envelope.worst_ratio())};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 13. Byte-identical reruns.
Verdict c13() {
  const auto root = std::filesystem::temp_directory_path() / ("kslab_accept_" + std::to_string(::getpid()));
  const std::string configs[] = {
      "[experiment]\nkind = l1_stability\nseed = 11\n[grid]\nn_x = 64\nn_v = 64\nlength_x = 16\nv_max = 6\n"
      "[kernel]\ntype = regularized_coulomb\nepsilon = 0.25\n[initial]\nfamily = maxwellian\nmass = 1\ntemperature = 1\n"
      "[perturbation]\nmode = 1\namplitude = 0.01\n[time]\nt_end = 0.5\ndt = 0.02\n[output]\ndir = unused\n",
      "[experiment]\nkind = simulate_hartree\nseed = 12\n[grid]\nn_x = 64\nlength_x = 16\n"
      "[kernel]\ntype = regularized_coulomb\nepsilon = 0.25\n[quantum]\nhbar = 0.4\n[initial]\nfamily = gaussian_bump\n"
      "mass = 1\nvar_x = 1\nvar_v = 1\n[time]\nt_end = 0.5\ndt = 0.02\n[output]\ndir = unused\n"};
  bool same = true;
  std::string detail;
  int idx = 0;
  for (const auto& text : configs) {
    const ExperimentConfig c = parse_config(text);
    const auto a = root / (std::to_string(idx) + "a"), b = root / (std::to_string(idx) + "b");
    run_experiment(c, {a.string(), 1});
    run_experiment(c, {b.string(), 1});
    const std::string ra = slurp(a / "result.csv"), rb = slurp(b / "result.csv");
    const bool eq = !ra.empty() && ra == rb;
    same = same && eq;
    detail += c.kind + (eq ? "=identical " : "=DIFFERENT ");
    ++idx;
  }
  std::filesystem::remove_all(root);
  return {same, detail};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"quantization round-trip", c01},   {"wick positivity", c02},         {"quantization-gap rates", c03},
      {"conservation suite", c04},        {"L1 weak-strong envelope", c05}, {"L2 weak-strong envelope", c06},
      {"commutator inequality", c07},     {"B-term rate", c08},             {"semiclassical convergence", c09},
      {"transport metrics", c10},         {"W_hbar bracket", c11},          {"W_hbar stability", c12},
      {"determinism", c13}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %-28s %s  %s  [%.1fs]\n", id, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
