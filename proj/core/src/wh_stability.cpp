#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "kslab/error.hpp"
#include "kslab/harness.hpp"
#include "kslab/numeric.hpp"

namespace kslab {

bool WhStability::pass() const {
  const bool diff_ok = differential.t.empty() || differential.pass();
  return envelope.pass() && diff_ok && lower_bound_ok && chain_ok && bracket_ok;
}

WhStability check_wh_stability(const KineticDensity& f0, const DensityOperator& op0, const InteractionKernel& kernel,
                               const WhOptions& opt) {
  const PhaseGrid& g = f0.grid();
  const PlanckScale scale = op0.scale();
  if (!(op0.grid() == g)) fail(Errc::grid_mismatch, "wh_stability: density and operator grids differ");
  if (opt.record_every < 1) fail(Errc::invalid_argument, "wh_stability: record_every must be >= 1");
  const double hbar = scale.hbar;

  // Toeplitz diagonal coupling of f0 with Wick(f0), cells below the mass threshold dropped.
  OperatorCoupling coupling = toplitz_diagonal(f0, scale, 0.0);
  double dropped = 0.0;
  {
    std::vector<PhasePoint> pts;
    std::vector<long> keep;
    for (std::size_t a = 0; a < coupling.size(); ++a) {
      const double m = coupling.atom_mass(a);
      if (m >= opt.atom_threshold * f0.mass()) {
        keep.push_back(static_cast<long>(a));
        pts.push_back(coupling.points[a]);
      } else {
        dropped += m;
      }
    }
    Eigen::MatrixXcd fac(g.n_x, static_cast<long>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) fac.col(static_cast<long>(c)) = coupling.factors.col(keep[c]);
    coupling.points = std::move(pts);
    coupling.factors = std::move(fac);
    spdlog::info("wh_stability: {} coupling atoms, dropped mass {}", coupling.size(), dropped);
    check_marginals(coupling, f0, op0, std::max(1e-6, 2.0 * dropped / f0.mass()));
  }

  std::vector<double> sample_times;
  const long steps = static_cast<long>(std::ceil(opt.t_end / opt.dt - 1e-9));
  sample_times.push_back(0.0);
  for (long s = 1; s <= steps; ++s)
    if (s % opt.record_every == 0 || s == steps) sample_times.push_back(s == steps ? opt.t_end : s * opt.dt);

  // Classical run with recorded field, then the atom flow.
  std::vector<KineticDensity> fs;
  std::vector<double> rho_f;
  VlasovState vs(f0, kernel, opt.dt, true);
  vs = solve_vlasov(vs, opt.t_end, [&](const VlasovState& s) {
    fs.push_back(s.f);
    rho_f.push_back(norm(spatial_density(s.f), NormSpec::lebesgue(inf)));
  }, opt.record_every);
  const FlowMap flow = characteristics(vs.history, coupling.points, sample_times, opt.dt);

  // Quantum run carrying the coupling vectors.
  std::vector<DensityOperator> ops;
  std::vector<Eigen::MatrixXcd> factors;
  HartreeState hs(op0, kernel, opt.dt);
  hs.passengers = coupling.factors;
  solve_hartree(hs, opt.t_end, [&](const HartreeState& s) {
    ops.push_back(s.op);
    factors.push_back(s.passengers);
  }, opt.record_every);
  if (fs.size() != sample_times.size() || ops.size() != sample_times.size())
    fail(Errc::history_gap, "wh_stability: classical and quantum samples are misaligned");

  WhStability out;
  out.t = sample_times;
  out.dropped_mass = dropped;
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    OperatorCoupling ck{g, scale, flow.at(sample_times[k]), factors[k]};
    double min_trace = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < ck.size(); ++a) min_trace = std::min(min_trace, ck.atom_mass(a));
    if (min_trace < -1e-12) fail(Errc::coupling_degenerate, "wh_stability: negative atom trace");
    const double e2 = semiclassical_cost(ck);
    const double mass = ck.total_mass();
    out.min_atom_trace.push_back(min_trace);
    out.e2.push_back(e2);
    out.rho_sum.push_back(rho_f[k] + norm(diag_operator(ops[k]), NormSpec::lebesgue(inf)));
    if (e2 < hbar * mass - 1e-10) out.lower_bound_ok = false;
    const WhBracket br = wh_bracket(fs[k], ops[k], std::nullopt, opt.w2_atoms);
    out.w2_upper.push_back(br.w2_upper);
    out.lower.push_back(br.lower);
    out.upper.push_back(br.upper);
    if (br.lower > br.upper) out.bracket_ok = false;
    if (br.w2_upper * br.w2_upper > e2 + hbar) out.chain_ok = false;
    spdlog::debug("wh_stability: t = {}, E2 = {}, W2 <= {}", sample_times[k], e2, br.w2_upper);
  }
  out.toplitz_initial = out.e2.front();

  // C(t) = c0 (||rho_f||_inf + ||rho||_inf), c0 fitted on the difference quotients of E2.
  auto phi = [](double e) { return e * std::max(1.0, -std::log(e)); };
  std::vector<double> tm, dq, base;
  for (std::size_t k = 0; k + 1 < out.t.size(); ++k) {
    const double dt = out.t[k + 1] - out.t[k];
    tm.push_back(0.5 * (out.t[k] + out.t[k + 1]));
    dq.push_back((out.e2[k + 1] - out.e2[k]) / dt);
    base.push_back(0.5 * (out.rho_sum[k] + out.rho_sum[k + 1]) * phi(0.5 * (out.e2[k] + out.e2[k + 1])));
  }
  if (opt.zero_lambda) {
    out.c0 = 0.0;
  } else {
    for (std::size_t k = 0; k < dq.size(); ++k) out.c0 = std::max(out.c0, dq[k] / base[k]);
    StabilityEnvelope d;
    d.name = "wh_differential";
    d.t = tm;
    d.metric = dq;
    for (double b : base) d.bound.push_back(out.c0 * b);
    d.rate = base;
    d.integral.assign(tm.size(), 0.0);
    d.theta.assign(tm.size(), 0.0);
    d.constant = out.c0;
    d.slack = opt.slack;
    if (!d.t.empty()) apply_verdict(d);
    out.differential = std::move(d);
  }
  std::vector<double> w, c;
  for (std::size_t k = 0; k < out.t.size(); ++k) {
    w.push_back(std::sqrt(out.e2[k]));
    c.push_back(out.c0 * out.rho_sum[k]);
  }
  out.envelope = double_exponential_envelope("wh_envelope", out.t, w, c, opt.slack);
  out.envelope.constant = out.c0;
  return out;
}

}  // namespace kslab
