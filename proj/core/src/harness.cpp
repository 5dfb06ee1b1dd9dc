#include "kslab/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <future>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"

namespace kslab {

namespace {

// Steps both densities in lockstep; `sample` is called at t = 0, every record_every steps and at t_end.
void paired_vlasov(const KineticDensity& f1, const KineticDensity& f2, const InteractionKernel& kernel,
                   const PairedRunOptions& opt,
                   const std::function<void(double, const KineticDensity&, const KineticDensity&)>& sample) {
  if (!(f1.grid() == f2.grid())) fail(Errc::grid_mismatch, "paired run: the two densities live on different grids");
  if (opt.record_every < 1) fail(Errc::invalid_argument, "paired run: record_every must be >= 1");
  VlasovState s1(f1, kernel, opt.dt), s2(f2, kernel, opt.dt);
  sample(0.0, s1.f, s2.f);
  const long steps = static_cast<long>(std::ceil(opt.t_end / opt.dt - 1e-9));
  for (long s = 1; s <= steps; ++s) {
    if (s == steps) s1.dt = s2.dt = opt.t_end - s1.t;
    s1 = vlasov_step(s1);
    s2 = vlasov_step(s2);
    if (s == steps) s1.t = s2.t = opt.t_end;
    if (s % opt.record_every == 0 || s == steps) sample(s1.t, s1.f, s2.f);
  }
}

double diff_norm(const KineticDensity& a, const KineticDensity& b, double p, bool roots) {
  std::vector<double> d(a.values().size());
  for (std::size_t c = 0; c < d.size(); ++c) {
    const double x = roots ? std::sqrt(a.values()[c]) : a.values()[c];
    const double y = roots ? std::sqrt(b.values()[c]) : b.values()[c];
    d[c] = x - y;
  }
  return norm(PhaseField{a.grid(), std::move(d)}, NormSpec::lebesgue(p));
}

double dual_exponent(double p) { return p / (p - 1.0); }

std::vector<double> abs_values(const std::vector<double>& v) {
  std::vector<double> out(v);
  for (double& x : out) x = std::abs(x);
  return out;
}

}  // namespace

double kernel_lorentz_constant(const InteractionKernel& kernel, LorentzPair pair) {
  const PhaseGrid& g = kernel.grid();
  return lorentz_norm(abs_values(kernel.grad_samples()), g.dx(), dual_exponent(pair.p),
                      pair.q == 1.0 ? inf : dual_exponent(pair.q));
}

double calibrate_l1_constant(const InteractionKernel& kernel, LorentzPair pair) {
  const PhaseGrid& g = kernel.grid();
  const int n = g.n_x;
  const double pd = dual_exponent(pair.p);
  const double qd = pair.q == 1.0 ? inf : dual_exponent(pair.q);
  double best = kernel_lorentz_constant(kernel, pair);
  auto ratio = [&](const std::vector<double>& h) {
    std::vector<double> a(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) a[i] = std::abs(h[i]) * g.dx();
    const double l1 = pairwise_sum(a);
    const SpatialField e = force_field(SpatialField{g, h}, kernel);
    return lorentz_norm(abs_values(e.values), g.dx(), pd, qd) / l1;
  };
  // Single deltas, signed pairs at several separations, and Gaussian bumps of several widths.
  std::vector<double> h(n);
  for (int sep : {1, 2, 4, n / 8, n / 4, n / 2}) {
    std::fill(h.begin(), h.end(), 0.0);
    h[0] = 1.0 / g.dx();
    if (sep < n) h[sep % n] -= 1.0 / g.dx();
    best = std::max(best, ratio(h));
  }
  for (double width : {1.0, 2.0, 4.0, 8.0}) {
    for (int i = 0; i < n; ++i) {
      const double y = wrap(g.x(i), g.length_x) / (width * g.dx());
      h[i] = std::exp(-0.5 * y * y);
    }
    best = std::max(best, ratio(h));
  }
  return best;
}

double calibrate_l2_constant(const InteractionKernel& kernel, LorentzPair pair) {
  const PhaseGrid& g = kernel.grid();
  const double pd = dual_exponent(pair.p);
  const SpatialField grad{g, kernel.grad_samples()};
  return 2.0 * std::max(kernel_lorentz_constant(kernel, pair), norm(grad, NormSpec::lebesgue(pd)));
}

StabilityEnvelope check_l1_stability(const KineticDensity& f1, const KineticDensity& f2, const InteractionKernel& kernel,
                                     double constant, const PairedRunOptions& opt) {
  std::vector<double> t, m, rate;
  paired_vlasov(f1, f2, kernel, opt, [&](double tt, const KineticDensity& a, const KineticDensity& b) {
    t.push_back(tt);
    m.push_back(diff_norm(a, b, 1.0, false));
    rate.push_back(lambda_l1(b, kernel, opt.pair));
  });
  return gronwall_envelope("l1_stability", t, m, rate, constant, opt.slack);
}

L2Stability check_l2_stability(const KineticDensity& f1, const KineticDensity& f2, const InteractionKernel& kernel,
                               double constant, const PairedRunOptions& opt) {
  std::vector<double> t, m_root, m_plain, sup1, sup2;
  std::vector<KineticDensity> strong;
  paired_vlasov(f1, f2, kernel, opt, [&](double tt, const KineticDensity& a, const KineticDensity& b) {
    t.push_back(tt);
    m_root.push_back(diff_norm(a, b, 2.0, true));
    m_plain.push_back(diff_norm(a, b, 2.0, false));
    sup1.push_back(a.max_value());
    sup2.push_back(b.max_value());
    strong.push_back(b);
  });
  L2Stability out;
  out.c_inf = std::max(*std::max_element(sup1.begin(), sup1.end()), *std::max_element(sup2.begin(), sup2.end()));
  std::vector<double> rate;
  for (const auto& b : strong) rate.push_back(lambda_l2(b, out.c_inf, opt.pair).total());
  out.main = gronwall_envelope("l2_stability", t, m_root, rate, constant, opt.slack);
  const double l1_0 = diff_norm(f1, f2, 1.0, false);
  out.corollary = scaled_gronwall_envelope("l2_corollary", t, m_plain, rate, constant,
                                           2.0 * std::sqrt(out.c_inf) * std::sqrt(l1_0), opt.slack);
  for (std::size_t k = 0; k < t.size(); ++k)
    if (m_plain[k] > 2.0 * std::sqrt(out.c_inf) * m_root[k] * (1.0 + 1e-12) + 1e-300) out.pointwise_consistent = false;
  return out;
}

double commutator_norm(const DensityOperator& op, const InteractionKernel& kernel, double x) {
  const PhaseGrid& g = op.grid();
  if (!kernel.grid().same_spatial(g)) fail(Errc::grid_mismatch, "commutator_norm: kernel grid differs");
  const int n = g.n_x;
  std::vector<double> k(n);
  for (int i = 0; i < n; ++i) k[i] = kernel.value(wrap(g.x(i) - x, g.length_x));
  Eigen::MatrixXcd c(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) c(i, j) = (k[i] - k[j]) * op.matrix()(i, j);
  return schatten_norm(c, op.scale().h(), 1.0);
}

double commutator_rhs(const DensityOperator& op, double eps) {
  if (!(eps > 0.0 && eps < 2.0)) fail(Errc::invalid_argument, "commutator_rhs: eps must lie in (0, 2)");
  const DensityOperator a = operator_abs(quantum_gradient(op, Axis::xi));
  const SpatialField d = diag_operator(a);
  return norm(d, NormSpec::lebesgue(3.0 - eps)) + norm(d, NormSpec::lebesgue(3.0 + eps));
}

CommutatorStudy check_commutator_inequality(const OperatorFamily& family, const KernelFactory& kernel,
                                            const std::vector<double>& probes, const std::vector<double>& hbar_sweep,
                                            double eps) {
  if (probes.empty()) fail(Errc::invalid_argument, "commutator study: empty probe set");
  CommutatorStudy st;
  st.probes = probes;
  for (double hbar : hbar_sweep) {
    const DensityOperator op = family(PlanckScale{hbar});
    const InteractionKernel k = kernel(op.grid());
    double lhs = 0.0;
    for (double x : probes) lhs = std::max(lhs, commutator_norm(op, k, x));
    const double rhs = commutator_rhs(op, eps);
    st.lhs.push_back(lhs);
    st.rhs.push_back(rhs);
    st.ratio.push_back(rhs > 0.0 ? lhs / (hbar * rhs) : 0.0);
  }
  st.constant = *std::max_element(st.ratio.begin(), st.ratio.end());
  st.fit = fit_rate(hbar_sweep, st.lhs);
  return st;
}

PhaseGrid sweep_grid(double hbar, double length_x, double v_required, int n_min) {
  if (!(hbar > 0.0)) fail(Errc::invalid_argument, "sweep_grid: hbar must be positive");
  int n = 1;
  while (n < n_min) n *= 2;
  while (pi * hbar * n / length_x < v_required) {
    n *= 2;
    if (n > 512) fail(Errc::unsupported_spec, "sweep_grid: hbar too small for the n_x <= 512 operator cap");
  }
  return PhaseGrid::make(n, n, length_x, pi * hbar * n / length_x);
}

RateStudyPoint semiclassical_rate_point(double hbar, const DensityFactory& f0_factory, const KernelFactory& kernel_factory,
                                        const RateStudyOptions& opt) {
  const PhaseGrid g = sweep_grid(hbar, opt.length_x, opt.v_required, opt.n_min);
  const PlanckScale scale{hbar};
  const KineticDensity f0 = f0_factory(g);
  const InteractionKernel kernel = kernel_factory(g);
  const DensityOperator op0 = wick_quantize(f0, scale);
  RateStudyPoint pt;
  pt.hbar = hbar;
  pt.n = g.n_x;
  {
    const Eigen::MatrixXcd d = op0.matrix() - weyl_quantize(f0, scale).matrix();
    pt.initial_l1 = schatten_norm(d, scale.h(), 1.0);
    pt.initial_l2 = schatten_norm(d, scale.h(), 2.0);
  }
  VlasovState vs(f0, kernel, opt.dt);
  HartreeState hs(op0, kernel, opt.dt);
  auto sample = [&](double t, bool last) {
    const DensityOperator w = weyl_quantize(vs.f, scale);
    const Eigen::MatrixXcd d = hs.op.matrix() - w.matrix();
    const double l1 = schatten_norm(d, scale.h(), 1.0);
    const Eigen::MatrixXcd fq = characteristic_function(hs.op);
    const Eigen::MatrixXcd fc = phase_space_fourier(vs.f.field());
    const double sup = (fq - fc).cwiseAbs().maxCoeff();
    pt.times.push_back(t);
    pt.l1_series.push_back(l1);
    pt.fourier_series.push_back(sup);
    pt.fourier_excess = std::max(pt.fourier_excess, sup - l1);
    if (sup > l1 * (1.0 + 1e-8)) pt.fourier_ok = false;
    if (last) {
      pt.final_l1 = l1;
      pt.final_l2 = schatten_norm(d, scale.h(), 2.0);
    }
  };
  const long steps = static_cast<long>(std::ceil(opt.t_end / opt.dt - 1e-9));
  sample(0.0, steps == 0);
  for (long s = 1; s <= steps; ++s) {
    if (s == steps) vs.dt = hs.dt = opt.t_end - vs.t;
    vs = vlasov_step(vs);
    hs = hartree_step(hs);
    if (s == steps) vs.t = hs.t = opt.t_end;
    if (s % opt.record_every == 0 || s == steps) sample(vs.t, s == steps);
  }
  spdlog::info("rate study: hbar = {} (n = {}): L1 distance {} -> {}", hbar, g.n_x, pt.initial_l1, pt.final_l1);
  return pt;
}

bool RateStudy::fourier_ok() const {
  return std::all_of(points.begin(), points.end(), [](const RateStudyPoint& p) { return p.fourier_ok; });
}

RateStudy semiclassical_rate_study(const std::vector<double>& hbar_sweep, const DensityFactory& f0,
                                   const KernelFactory& kernel, const RateStudyOptions& opt, int jobs) {
  if (hbar_sweep.size() < 4) fail(Errc::insufficient_sweep, "rate study: at least 4 hbar points are required");
  RateStudy st;
  st.points.resize(hbar_sweep.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < hbar_sweep.size(); ++i)
      st.points[i] = semiclassical_rate_point(hbar_sweep[i], f0, kernel, opt);
  } else {
    std::size_t next = 0;
    while (next < hbar_sweep.size()) {
      std::vector<std::future<RateStudyPoint>> batch;
      const std::size_t first = next;
      for (int j = 0; j < jobs && next < hbar_sweep.size(); ++j, ++next)
        batch.push_back(std::async(std::launch::async, semiclassical_rate_point, hbar_sweep[next], f0, kernel, opt));
      for (std::size_t j = 0; j < batch.size(); ++j) st.points[first + j] = batch[j].get();
    }
  }
  std::vector<double> l1, l2;
  for (const auto& p : st.points) {
    l1.push_back(p.final_l1);
    l2.push_back(p.final_l2);
  }
  st.fit_l1 = fit_rate(hbar_sweep, l1);
  st.fit_l2 = fit_rate(hbar_sweep, l2);
  return st;
}

LogLipschitz log_lipschitz_modulus(const SpatialField& e, const std::vector<double>& probes,
                                   const std::vector<double>& separations) {
  const PhaseGrid& g = e.grid;
  if (probes.empty() || separations.empty()) fail(Errc::invalid_argument, "log_lipschitz_modulus: empty probe set");
  const PeriodicSpline s(e.values, g.x(0), g.dx());
  LogLipschitz out;
  for (double r : separations) {
    if (r < g.dx() * (1.0 - 1e-12) || r > 0.25 * g.length_x * (1.0 + 1e-12))
      fail(Errc::invalid_argument, "log_lipschitz_modulus: separations must lie in [dx, L/4]");
    double w = 0.0;
    for (double x : probes) w = std::max(w, std::abs(s(x) - s(x + r)) / r);
    out.r.push_back(r);
    out.omega.push_back(w);
    out.constant = std::max(out.constant, w / std::max(1.0, -std::log(r)));
  }
  const auto [lo, hi] = std::minmax_element(out.omega.begin(), out.omega.end());
  out.lipschitz = *hi - *lo <= 1e-9 * std::max(*hi, 1e-300);
  if (out.lipschitz) spdlog::debug("log_lipschitz_modulus: field is Lipschitz; the log fit is degenerate");
  return out;
}

}  // namespace kslab
