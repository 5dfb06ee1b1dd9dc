#include "kslab/semiclassical.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"

namespace kslab {

double OperatorCoupling::atom_mass(std::size_t a) const {
  return scale.h() * factors.col(static_cast<long>(a)).squaredNorm();
}

double OperatorCoupling::total_mass() const { return scale.h() * factors.squaredNorm(); }

Measure OperatorCoupling::first_marginal() const {
  Measure m;
  m.points = points;
  for (std::size_t a = 0; a < size(); ++a) m.weights.push_back(atom_mass(a));
  return m;
}

std::vector<double> OperatorCoupling::first_marginal_on_grid() const {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t a = 0; a < size(); ++a) {
    const double xs = wrap(points[a].x, grid.length_x);
    const int i = ((static_cast<int>(std::lround((xs - grid.x(0)) / grid.dx())) % grid.n_x) + grid.n_x) % grid.n_x;
    const int k = std::clamp(static_cast<int>(std::lround((points[a].xi - grid.v(0)) / grid.dv())), 0, grid.n_v - 1);
    out[static_cast<std::size_t>(i) * grid.n_v + k] += atom_mass(a);
  }
  return out;
}

Eigen::MatrixXcd OperatorCoupling::second_marginal() const { return factors * factors.adjoint(); }

namespace {

double marginal1_defect(const OperatorCoupling& g, const KineticDensity& f) {
  const std::vector<double> m = g.first_marginal_on_grid();
  const double vol = f.grid().cell_volume();
  std::vector<double> diff(m.size());
  for (std::size_t c = 0; c < m.size(); ++c) diff[c] = std::abs(m[c] - f.values()[c] * vol);
  return pairwise_sum(diff);
}

}  // namespace

void check_marginals(const OperatorCoupling& g, const KineticDensity& f, const DensityOperator& op, double tolerance) {
  if (!(g.grid == f.grid())) fail(Errc::grid_mismatch, "check_marginals: coupling and density grids differ");
  const double mass = std::max(f.mass(), 1e-300);
  const double d1 = marginal1_defect(g, f);
  if (d1 > tolerance * mass)
    fail(Errc::marginal_mismatch, "operator coupling: first marginal off by " + std::to_string(d1) + " in L^1");
  const double d2 = schatten_norm(g.second_marginal() - op.matrix(), g.scale.h(), 1.0);
  if (d2 > tolerance * mass)
    fail(Errc::marginal_mismatch, "operator coupling: second marginal off by " + std::to_string(d2) + " in trace norm");
}

double semiclassical_cost(const OperatorCoupling& g) {
  const PhaseGrid& grid = g.grid;
  const int n = grid.n_x;
  const double h = g.scale.h();
  std::vector<double> terms(g.size());
  std::vector<cplx> buf(n);
  for (std::size_t a = 0; a < g.size(); ++a) {
    const auto phi = g.factors.col(static_cast<long>(a));
    const PhasePoint z = g.points[a];
    double pos = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = wrap(grid.x(i) - z.x, grid.length_x);
      pos += std::norm(phi(i)) * d * d;
    }
    for (int i = 0; i < n; ++i) buf[i] = phi(i);
    fft(buf);
    double mom = 0.0;
    for (int b = 0; b < n; ++b) {
      const double d = momentum(b, grid, g.scale) - z.xi;
      mom += std::norm(buf[b]) * d * d;
    }
    terms[a] = h * (pos + mom / n);
  }
  return pairwise_sum(terms);
}

double semiclassical_cost(const KineticDensity& f, const OperatorCoupling& g) {
  if (!(g.grid == f.grid())) fail(Errc::grid_mismatch, "semiclassical_cost: coupling and density grids differ");
  const double d1 = marginal1_defect(g, f);
  if (d1 > 1e-6 * std::max(f.mass(), 1e-300))
    fail(Errc::marginal_mismatch, "semiclassical_cost: first marginal off by " + std::to_string(d1) + " in L^1");
  return semiclassical_cost(g);
}

OperatorCoupling toplitz_coupling(const DiscreteCoupling& gamma, const PhaseGrid& grid, PlanckScale scale, double mass) {
  grid.require_momentum_pairing(scale.hbar);
  OperatorCoupling g{grid, scale, {}, Eigen::MatrixXcd(grid.n_x, static_cast<long>(gamma.atoms().size()))};
  const double h = scale.h();
  long col = 0;
  for (const auto& at : gamma.atoms()) {
    g.points.push_back(at.z1);
    g.factors.col(col++) = std::sqrt(mass * at.w / h) * coherent_state(grid, scale, at.z2.x, at.z2.xi);
  }
  return g;
}

OperatorCoupling toplitz_diagonal(const KineticDensity& f, PlanckScale scale, double threshold) {
  const PhaseGrid& grid = f.grid();
  grid.require_momentum_pairing(scale.hbar);
  const double cut = threshold * f.max_value();
  const double vol = grid.cell_volume();
  const double h = scale.h();
  std::vector<PhasePoint> pts;
  std::vector<double> w;
  for (int i = 0; i < grid.n_x; ++i)
    for (int k = 0; k < grid.n_v; ++k)
      if (f.at(i, k) > cut && f.at(i, k) > 0.0) {
        pts.push_back({grid.x(i), grid.v(k)});
        w.push_back(f.at(i, k) * vol);
      }
  OperatorCoupling g{grid, scale, pts, Eigen::MatrixXcd(grid.n_x, static_cast<long>(pts.size()))};
  for (std::size_t a = 0; a < pts.size(); ++a)
    g.factors.col(static_cast<long>(a)) = std::sqrt(w[a] / h) * coherent_state(grid, scale, pts[a].x, pts[a].xi);
  return g;
}

WhBracket wh_bracket(const KineticDensity& f, const DensityOperator& op, const std::optional<KineticDensity>& g,
                     std::size_t max_atoms) {
  if (f.grid().dim != 1) fail(Errc::unsupported_spec, "wh_bracket is implemented for d = 1");
  const double hbar = op.scale().hbar;
  const double dh = hbar;  // d * hbar with d = 1
  const KineticDensity hus = husimi_transform(op);
  const W2Bracket w2 = w2_bracket(f, hus, max_atoms);
  const DensityOperator root = operator_sqrt(op);
  const double gx = schatten_norm(quantum_gradient(root, Axis::x), 2.0);
  const double gxi = schatten_norm(quantum_gradient(root, Axis::xi), 2.0);
  WhBracket out;
  out.w2_lower = w2.lower;
  out.w2_upper = w2.upper;
  out.gradient_term = hbar * std::hypot(gx, gxi);
  out.lower = std::max(dh, w2.lower * w2.lower - dh);
  const double up = w2.upper + std::sqrt(dh) + out.gradient_term;
  out.upper = up * up;
  if (g) {
    const Measure mf = atomize(f), mg = atomize(*g);
    if (mf.size() <= max_atoms && mg.size() <= max_atoms) {
      TransportOptions opt;
      opt.geometry.period_x = f.grid().length_x;
      opt.max_atoms = max_atoms;
      opt.keep_plan = true;
      const TransportResult r = wasserstein(mf, mg, 2.0, TransportMethod::exact, opt);
      std::vector<DiscreteCoupling::Atom> atoms = r.plan;
      const double total = f.mass();
      for (auto& a : atoms) a.w /= total;
      double s = 0.0;
      for (const auto& a : atoms) s += a.w;
      for (auto& a : atoms) a.w /= s;
      const OperatorCoupling tc = toplitz_coupling(DiscreteCoupling::from_atoms(std::move(atoms)), f.grid(), op.scale(), total);
      out.toplitz_upper = semiclassical_cost(tc);
      out.upper = std::min(out.upper, *out.toplitz_upper);
    } else {
      spdlog::debug("wh_bracket: {} / {} atoms exceed the exact cap; Toeplitz tightening skipped", mf.size(), mg.size());
    }
  }
  if (out.lower > out.upper * (1.0 + 1e-12))
    fail(Errc::non_convergence, "wh_bracket: lower bound exceeds upper bound");
  return out;
}

}  // namespace kslab
