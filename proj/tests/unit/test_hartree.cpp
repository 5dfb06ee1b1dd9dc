#include <doctest.h>

#include <cmath>
#include <random>

#include "kslab/error.hpp"
#include "kslab/hartree.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/numeric.hpp"
#include "kslab/vlasov.hpp"
#include "oracles.hpp"

using namespace kslab;

namespace {

constexpr double L = 16.0;

PhaseGrid paired(int n, double hbar) { return PhaseGrid::make(n, n, L, pi * hbar * n / L); }

DensityOperator pure(const Eigen::VectorXcd& u, const PhaseGrid& g, PlanckScale s) {
  return DensityOperator::state(u * u.adjoint() / (u.squaredNorm() * s.h()), g, s);
}

double position_variance(const DensityOperator& op) {
  const SpatialField d = diag_operator(op);
  const PhaseGrid& g = op.grid();
  double m = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < g.n_x; ++i) {
    m += d.values[i] * g.dx();
    m1 += d.values[i] * g.x(i) * g.dx();
    m2 += d.values[i] * g.x(i) * g.x(i) * g.dx();
  }
  return m2 / m - (m1 / m) * (m1 / m);
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  return schatten_norm(a.matrix() - b.matrix(), a.scale().h(), 1.0);
}

}  // namespace

TEST_CASE("free Gaussian spreads by the closed form and stays pure") {
  const double hbar = 0.5;
  const PhaseGrid g = paired(128, hbar);
  const PlanckScale s{hbar};
  const DensityOperator op0 = pure(coherent_state(g, s, 0.0, 0.0), g, s);
  const double purity0 = (op0.matrix() * op0.matrix()).trace().real();
  HartreeState st(op0, InteractionKernel::zero(g), 0.01);
  std::vector<double> times, vars, purity;
  st = solve_hartree(st, 1.0, [&](const HartreeState& x) {
    times.push_back(x.t);
    vars.push_back(position_variance(x.op));
    purity.push_back((x.op.matrix() * x.op.matrix()).trace().real());
  }, 10);
  REQUIRE(times.size() == 11);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(std::abs(vars[k] - 0.5 * hbar * (1.0 + times[k] * times[k])) < 1e-4);
    CHECK(std::abs(purity[k] - purity0) < 1e-12 * purity0);
  }
}

TEST_CASE("self-consistent spectral projector is stationary") {
  const double hbar = 0.2;
  const PhaseGrid g = paired(64, hbar);
  const PlanckScale s{hbar};
  const InteractionKernel k = InteractionKernel::gaussian(g, 1.0, -1);
  // Aufbau: op = projector onto the N lowest eigenvectors of H[op], iterated to a fixed point.
  const int N = 4;
  const double mass = N * s.h();
  DensityOperator op = wick_quantize(gaussian_bump(g, mass, 0.0, 0.0, 1.0, 0.5), s);
  double change = 1.0;
  for (int it = 0; it < 500 && change > 1e-14; ++it) {
    const Eigen::MatrixXcd H = hartree_hamiltonian(g, s, hartree_potential(op, k));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::MatrixXcd u = es.eigenvectors().leftCols(N);
    const Eigen::MatrixXcd next = u * u.adjoint();
    change = (next - op.matrix()).cwiseAbs().maxCoeff();
    op = DensityOperator::state(next, g, s, mass);
  }
  REQUIRE(change < 1e-12);
  const SpatialField d0 = diag_operator(op);
  double spread = 0.0;
  for (double v : d0.values) spread = std::max(spread, std::abs(v - d0.values[0]));
  REQUIRE(spread > 1e-2);  // genuinely non-uniform
  auto drift = [&](double dt) {
    const SpatialField d1 = diag_operator(solve_hartree(HartreeState(op, k, dt), 1.0).op);
    double m = 0.0;
    for (int i = 0; i < g.n_x; ++i) m = std::max(m, std::abs(d1.values[i] - d0.values[i]));
    return m;
  };
  // What remains is the splitting error, second order in dt.
  const double coarse = drift(0.02), fine = drift(0.01);
  CHECK(std::log2(coarse / fine) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(drift(1.0 / 2048) < 1e-6);
}

TEST_CASE("Hartree invariants, energy, convergence order") {
  const double hbar = 0.2;
  const PhaseGrid g = paired(64, hbar);
  const PlanckScale s{hbar};
  const InteractionKernel k = InteractionKernel::regularized_coulomb(g, 0.5);
  const DensityOperator op0 = wick_quantize(perturbed(gaussian_bump(g, 1.0, 0.0, 0.0, 2.0, 0.5), 1, 0.3), s);

  const HartreeState same = solve_hartree(HartreeState(op0, k, 0.05), 0.0);
  CHECK(same.op.matrix() == op0.matrix());

  const HartreeState run = solve_hartree(HartreeState(op0, k, 0.01), 1.0, {}, 10);
  const auto& d = run.diagnostics;
  REQUIRE(d.t.size() == 11);
  for (std::size_t m = 0; m < d.t.size(); ++m) {
    CHECK(std::abs(d.trace[m] - d.trace[0]) < 1e-10);
    CHECK(std::abs(d.l1[m] - d.l1[0]) < 1e-8 * d.l1[0]);
    CHECK(std::abs(d.l2[m] - d.l2[0]) < 1e-8 * d.l2[0]);
    CHECK(std::abs(d.linf[m] - d.linf[0]) < 1e-8 * d.linf[0]);
    CHECK(d.min_eig[m] >= -1e-9 * d.linf[0]);
    CHECK(std::abs(d.energy[m] - d.energy[0]) < 1e-3 * std::abs(d.energy[0]));
    REQUIRE(d.moments[m].size() == 8);
    for (double mo : d.moments[m]) CHECK(std::isfinite(mo));
  }

  // Self-convergence in dt at T = 0.5.
  std::vector<DensityOperator> sols;
  for (double dt : {0.05, 0.025, 0.0125}) sols.push_back(solve_hartree(HartreeState(op0, k, dt), 0.5).op);
  const double e1 = trace_distance(sols[0], sols[1]), e2 = trace_distance(sols[1], sols[2]);
  CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("energy functionals") {
  const double hbar = 0.2;
  const PhaseGrid g = paired(64, hbar);
  const PlanckScale s{hbar};
  // Zero momentum, uniform diagonal: the constant wave function.
  const DensityOperator flat = pure(Eigen::VectorXcd::Ones(g.n_x), g, s);
  CHECK(std::abs(kinetic_energy(flat)) < 1e-12);
  CHECK(std::abs(total_energy(flat, InteractionKernel::regularized_coulomb(g, 0.5))) < 1e-12);

  // Kinetic energy is half the second momentum moment of the Wigner function.
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    const DensityOperator op = wick_quantize(oracle::interior_density(g, rng), s);
    const PhaseField w = wigner_transform(op);
    double m2 = 0.0;
    for (int i = 0; i < g.n_x; ++i)
      for (int kk = 0; kk < g.n_v; ++kk) m2 += g.v(kk) * g.v(kk) * w.values[static_cast<std::size_t>(i) * g.n_v + kk];
    m2 *= g.cell_volume();
    CHECK(std::abs(kinetic_energy(op) - 0.5 * m2) < 1e-4);
    CHECK(momentum_moment(op, 2.0) == doctest::Approx(2.0 * kinetic_energy(op)).epsilon(1e-14));
  }
}

TEST_CASE("linear Hartree dynamics") {
  const double hbar = 0.4;
  const PhaseGrid g = paired(64, hbar);
  const PlanckScale s{hbar};
  const InteractionKernel k = InteractionKernel::gaussian(g, 1.0, 1);
  const KineticDensity f0 = gaussian_bump(g, 1.0, 0.0, 0.0, 1.0, 0.5);

  SUBCASE("initial datum has the coherent-overlap trace") {
    // h Tr Wick(g)^2 = h^-1 sum sum g(z) g(z') exp(-|z - z'|^2 / (2 hbar)) dz dz' with g = sqrt f.
    const DensityOperator w2 = wick_sqrt_squared(f0, s);
    std::vector<PhasePoint> z;
    std::vector<double> gv;
    for (int i = 0; i < g.n_x; ++i)
      for (int kk = 0; kk < g.n_v; ++kk)
        if (f0.at(i, kk) > 1e-30) {
          z.push_back({g.x(i), g.v(kk)});
          gv.push_back(std::sqrt(f0.at(i, kk)));
        }
    double sum = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a)
      for (std::size_t b = 0; b < z.size(); ++b) {
        const double dx = wrap(z[a].x - z[b].x, L), dv = z[a].xi - z[b].xi;
        sum += gv[a] * gv[b] * std::exp(-(dx * dx + dv * dv) / (2.0 * hbar));
      }
    const double want = sum * g.cell_volume() * g.cell_volume() / s.h();
    CHECK(w2.scaled_trace() == doctest::Approx(want).epsilon(1e-6));
    CHECK(w2.min_eigenvalue() >= -1e-12);
  }

  SUBCASE("uniform history means free evolution") {
    DensityHistory hist;
    for (int m = 0; m <= 100; ++m) hist.record(0.01 * m, SpatialField{g, std::vector<double>(g.n_x, 1.0 / L)});
    const DensityOperator op0 = wick_sqrt_squared(f0, s);
    const LinearHartreeRun lin = solve_linear_hartree(op0, k, hist, 1.0, 0.01, {0.5, 1.0});
    REQUIRE(lin.ops.size() == 2);
    const HartreeState free = solve_hartree(HartreeState(op0, InteractionKernel::zero(g), 0.01), 1.0);
    CHECK(trace_distance(lin.ops.back(), free.op) < 1e-10);
    const double p0 = (op0.matrix() * op0.matrix()).trace().real();
    for (const auto& op : lin.ops) CHECK(std::abs((op.matrix() * op.matrix()).trace().real() - p0) < 1e-12 * p0);
  }

  SUBCASE("driven by its own density it reproduces the Hartree flow") {
    const DensityOperator op0 = wick_quantize(f0, s);
    DensityHistory hist;
    const HartreeState end = solve_hartree(HartreeState(op0, k, 0.01), 1.0, [&](const HartreeState& x) {
      hist.record(x.t, diag_operator(x.op));
    });
    const LinearHartreeRun lin = solve_linear_hartree(op0, k, hist, 1.0, 0.01, {1.0});
    CHECK(trace_distance(lin.ops.back(), end.op) < 1e-2);
  }

  SUBCASE("history gaps are rejected") {
    DensityHistory coarse;
    for (int m = 0; m <= 10; ++m) coarse.record(0.1 * m, SpatialField{g, std::vector<double>(g.n_x, 1.0 / L)});
    const DensityOperator op0 = wick_quantize(f0, s);
    CHECK_THROWS_AS(solve_linear_hartree(op0, k, coarse, 1.0, 0.01, {1.0}), Error);
    CHECK_THROWS_AS(solve_linear_hartree(op0, k, coarse, 2.0, 0.1, {1.0}), Error);
    CHECK_THROWS_AS(solve_linear_hartree(op0, k, DensityHistory{}, 1.0, 0.1, {1.0}), Error);
  }
}

TEST_CASE("B-term") {
  const double hbar = 0.2;
  const PhaseGrid g = paired(128, hbar);
  const PlanckScale s{hbar};
  // Data vanishing at separation L/2 and at the velocity edge, where the quadratic kernel has its kink.
  const KineticDensity f = gaussian_bump(g, 1.0, 0.0, 0.0, 0.25, 0.25);
  CHECK(b_term(f, InteractionKernel::harmonic(g), s).trace_norm < 1e-12);

  const InteractionKernel k = InteractionKernel::regularized_coulomb(g, 0.5);
  const BTerm b1 = b_term(f, k, s);
  CHECK(b1.trace_norm > 0.0);
  const KineticDensity f2 = gaussian_bump(g, 2.0, 0.0, 0.0, 0.25, 0.25);
  const BTerm b2 = b_term(f2, k, s);
  CHECK(b2.trace_norm == doctest::Approx(4.0 * b1.trace_norm).epsilon(1e-10));
  CHECK((b2.op.matrix() - 4.0 * b1.op.matrix()).cwiseAbs().maxCoeff() < 1e-12 * b2.op.matrix().cwiseAbs().maxCoeff());
}
