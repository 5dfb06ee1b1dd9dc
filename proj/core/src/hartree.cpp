#include "kslab/hartree.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"
#include "kslab/vlasov.hpp"

namespace kslab {

using Eigen::MatrixXcd;

namespace {

// Multiplies each column of m (in momentum space) by phase[a].
void momentum_multiply_columns(MatrixXcd& m, const std::vector<cplx>& phase) {
  const int n = static_cast<int>(m.rows());
  std::vector<cplx> buf(n);
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < n; ++r) buf[r] = m(r, c);
    fft(buf);
    for (int a = 0; a < n; ++a) buf[a] *= phase[a];
    ifft(buf);
    for (int r = 0; r < n; ++r) m(r, c) = buf[r];
  }
}

std::vector<cplx> kinetic_phase(const PhaseGrid& g, PlanckScale s, double dt) {
  std::vector<cplx> ph(g.n_x);
  for (int a = 0; a < g.n_x; ++a) {
    const double kk = wavenumber(a, g.n_x, g.length_x);
    ph[a] = std::polar(1.0, -0.5 * s.hbar * kk * kk * dt);
  }
  return ph;
}

std::vector<cplx> potential_phase(const std::vector<double>& v, double hbar, double tau) {
  std::vector<cplx> ph(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) ph[i] = std::polar(1.0, -v[i] * tau / hbar);
  return ph;
}

void conjugate_diagonal(MatrixXcd& m, const std::vector<cplx>& d) {
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) m(i, j) *= d[i] * std::conj(d[j]);
}

void left_diagonal(MatrixXcd& m, const std::vector<cplx>& d) {
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) m(i, j) *= d[i];
}

void conjugate_kinetic(MatrixXcd& m, const std::vector<cplx>& ph) {
  momentum_multiply_columns(m, ph);
  MatrixXcd a = m.adjoint();
  momentum_multiply_columns(a, ph);
  m = a.adjoint();
}

std::vector<double> diag_density(const MatrixXcd& m, const PhaseGrid& g, PlanckScale s) {
  std::vector<double> rho(g.n_x);
  const double c = s.h() / g.dx();
  for (int i = 0; i < g.n_x; ++i) rho[i] = c * m(i, i).real();
  return rho;
}

std::vector<double> potential_of(const std::vector<double>& rho, const PhaseGrid& g, const InteractionKernel& k) {
  return potential(SpatialField{g, rho}, k).values;
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

// One split step with potentials supplied by callbacks: v_begin for the first half, v_end(matrix after
// the kinetic phase) for the second.
template <class VEnd>
void split_step(MatrixXcd& m, MatrixXcd& passengers, const PhaseGrid& g, PlanckScale s, double dt,
                const std::vector<double>& v_begin, VEnd&& v_end) {
  const auto p1 = potential_phase(v_begin, s.hbar, 0.5 * dt);
  const auto kin = kinetic_phase(g, s, dt);
  conjugate_diagonal(m, p1);
  conjugate_kinetic(m, kin);
  const std::vector<double> v2 = v_end(m);
  const auto p2 = potential_phase(v2, s.hbar, 0.5 * dt);
  conjugate_diagonal(m, p2);
  if (passengers.size() > 0) {
    left_diagonal(passengers, p1);
    momentum_multiply_columns(passengers, kin);
    left_diagonal(passengers, p2);
  }
}

}  // namespace

HartreeState::HartreeState(DensityOperator op0, InteractionKernel k, double dt_)
    : op(std::move(op0)), kernel(std::move(k)), dt(dt_) {
  if (!(dt > 0.0)) fail(Errc::invalid_argument, "HartreeState: dt must be positive");
  if (!kernel.grid().same_spatial(op.grid())) fail(Errc::grid_mismatch, "HartreeState: kernel and operator grids differ");
}

std::vector<double> hartree_potential(const DensityOperator& op, const InteractionKernel& kernel) {
  return potential_of(diag_density(op.matrix(), op.grid(), op.scale()), op.grid(), kernel);
}

MatrixXcd hartree_hamiltonian(const PhaseGrid& grid, PlanckScale scale, const std::vector<double>& v) {
  const int n = grid.n_x;
  MatrixXcd h = MatrixXcd::Identity(n, n);
  std::vector<cplx> w(n);
  for (int a = 0; a < n; ++a) {
    const double p = momentum(a, grid, scale);
    w[a] = 0.5 * p * p;
  }
  momentum_multiply_columns(h, w);
  for (int i = 0; i < n; ++i) h(i, i) += v[i];
  return 0.5 * (h + h.adjoint());
}

HartreeState hartree_step(const HartreeState& state) {
  HartreeState next = state;
  const PhaseGrid& g = state.op.grid();
  const PlanckScale s = state.op.scale();
  MatrixXcd m = state.op.matrix();
  const std::vector<double> rho0 = diag_density(m, g, s);
  const std::vector<double> v0 = potential_of(rho0, g, state.kernel);
  split_step(m, next.passengers, g, s, state.dt, v0, [&](const MatrixXcd& mm) {
    return potential_of(diag_density(mm, g, s), g, state.kernel);
  });
  const double before = sup_abs(rho0);
  const double after = sup_abs(diag_density(m, g, s));
  if (!std::isfinite(after) || (before > 0.0 && after > 10.0 * before))
    fail(Errc::blowup_detected, "hartree_step: diagonal sup norm grew more than tenfold in one step");
  next.op = state.op.with_matrix(std::move(m), state.op.kind());
  next.t = state.t + state.dt;
  return next;
}

double momentum_moment(const DensityOperator& op, double k) {
  const Eigen::VectorXd d = momentum_diagonal(op.matrix());
  std::vector<double> terms(d.size());
  for (int a = 0; a < d.size(); ++a) terms[a] = std::pow(std::abs(momentum(a, op.grid(), op.scale())), k) * d(a);
  return op.scale().h() * pairwise_sum(terms);
}

double kinetic_energy(const DensityOperator& op) { return 0.5 * momentum_moment(op, 2.0); }

double total_energy(const DensityOperator& op, const InteractionKernel& kernel) {
  const SpatialField rho = diag_operator(op);
  return kinetic_energy(op) + potential_energy(rho, kernel);
}

double total_energy(const HartreeState& state) { return total_energy(state.op, state.kernel); }

void record_diagnostics(HartreeState& s) {
  auto& d = s.diagnostics;
  const double h = s.op.scale().h();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (s.op.matrix() + s.op.matrix().adjoint()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lam = es.eigenvalues();
  std::vector<double> a1(lam.size()), a2(lam.size());
  for (int i = 0; i < lam.size(); ++i) {
    a1[i] = std::abs(lam(i));
    a2[i] = lam(i) * lam(i);
  }
  d.t.push_back(s.t);
  d.trace.push_back(s.op.scaled_trace());
  d.l1.push_back(h * pairwise_sum(a1));
  d.l2.push_back(std::sqrt(h * pairwise_sum(a2)));
  d.linf.push_back(lam.cwiseAbs().maxCoeff());
  d.min_eig.push_back(lam.minCoeff());
  d.energy.push_back(total_energy(s));
  d.diag_inf.push_back(sup_abs(diag_operator(s.op).values));
  std::vector<double> mom;
  for (int k = 2; k <= 16; k += 2) mom.push_back(momentum_moment(s.op, k));
  d.moments.push_back(std::move(mom));
}

HartreeState solve_hartree(HartreeState state, double t_end, const HartreeObserver& observer, int cadence) {
  if (t_end < state.t) fail(Errc::invalid_argument, "solve_hartree: t_end precedes the current time");
  if (cadence < 1) fail(Errc::invalid_argument, "solve_hartree: cadence must be positive");
  record_diagnostics(state);
  if (observer) observer(state);
  const double dt = state.dt;
  int step = 0;
  while (t_end - state.t > 1e-12 * std::max(1.0, t_end)) {
    const double remaining = t_end - state.t;
    const bool last = remaining <= dt * (1.0 + 1e-9);
    if (last) state.dt = remaining;
    state = hartree_step(state);
    ++step;
    if (last) {
      state.t = t_end;
      state.dt = dt;
    }
    if (last || step % cadence == 0) {
      record_diagnostics(state);
      if (observer) observer(state);
    }
  }
  return state;
}

void DensityHistory::record(double t, SpatialField rho) {
  if (!times_.empty() && t <= times_.back()) fail(Errc::invalid_argument, "DensityHistory: times must increase");
  times_.push_back(t);
  rho_.push_back(std::move(rho));
}

double DensityHistory::t_begin() const {
  if (times_.empty()) fail(Errc::empty_series, "DensityHistory is empty");
  return times_.front();
}

double DensityHistory::t_end() const {
  if (times_.empty()) fail(Errc::empty_series, "DensityHistory is empty");
  return times_.back();
}

double DensityHistory::max_gap() const {
  double g = 0.0;
  for (std::size_t m = 1; m < times_.size(); ++m) g = std::max(g, times_[m] - times_[m - 1]);
  return g;
}

SpatialField DensityHistory::at(double t) const {
  if (times_.empty()) fail(Errc::empty_series, "DensityHistory is empty");
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  if (t < times_.front() - tol || t > times_.back() + tol)
    fail(Errc::history_gap, "DensityHistory: time " + std::to_string(t) + " outside the recorded window");
  if (times_.size() == 1) return rho_.front();
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t m = static_cast<std::size_t>(std::distance(times_.begin(), it));
  if (m == 0) m = 1;
  if (m >= times_.size()) m = times_.size() - 1;
  const double t0 = times_[m - 1], t1 = times_[m];
  const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
  SpatialField out = rho_[m - 1];
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = (1.0 - w) * rho_[m - 1].values[i] + w * rho_[m].values[i];
  return out;
}

LinearHartreeRun solve_linear_hartree(const DensityOperator& op0, const InteractionKernel& kernel,
                                      const DensityHistory& history, double t_end, double dt,
                                      const std::vector<double>& sample_times, Eigen::MatrixXcd passengers) {
  if (!(dt > 0.0)) fail(Errc::invalid_argument, "solve_linear_hartree: dt must be positive");
  if (history.empty()) fail(Errc::history_gap, "solve_linear_hartree: empty density history");
  if (history.t_begin() > 1e-12 || history.t_end() < t_end - 1e-9 * std::max(1.0, t_end))
    fail(Errc::history_gap, "solve_linear_hartree: density history does not cover [0, t_end]");
  if (history.max_gap() > dt * (1.0 + 1e-9))
    fail(Errc::history_gap, "solve_linear_hartree: density history cadence exceeds dt");
  for (double ts : sample_times)
    if (ts < -1e-12 || ts > t_end + 1e-9) fail(Errc::invalid_argument, "solve_linear_hartree: sample time outside [0, t_end]");

  const PhaseGrid& g = op0.grid();
  const PlanckScale s = op0.scale();
  auto v_at = [&](double t) { return potential(history.at(std::min(t, history.t_end())), kernel).values; };

  LinearHartreeRun run;
  MatrixXcd m = op0.matrix();
  std::vector<double> pending(sample_times);
  std::sort(pending.begin(), pending.end());
  std::size_t next_sample = 0;
  auto emit = [&](double t) {
    while (next_sample < pending.size() && pending[next_sample] <= t + 1e-9 * std::max(1.0, t)) {
      run.times.push_back(pending[next_sample]);
      run.ops.push_back(op0.with_matrix(m, op0.kind()));
      ++next_sample;
    }
  };
  double t = 0.0;
  emit(t);
  while (t_end - t > 1e-12 * std::max(1.0, t_end)) {
    const double h = std::min(dt, t_end - t);
    // Stop exactly on sample times so that snapshots are not interpolated.
    double step = h;
    if (next_sample < pending.size() && pending[next_sample] > t && pending[next_sample] < t + h) step = pending[next_sample] - t;
    const std::vector<double> v0 = v_at(t);
    const std::vector<double> v1 = v_at(t + step);
    split_step(m, passengers, g, s, step, v0, [&](const MatrixXcd&) { return v1; });
    t += step;
    if (t_end - t <= 1e-12 * std::max(1.0, t_end)) t = t_end;
    emit(t);
  }
  run.passengers = std::move(passengers);
  return run;
}

DensityOperator wick_sqrt_squared(const KineticDensity& f, PlanckScale scale) {
  std::vector<double> r(f.values().begin(), f.values().end());
  for (double& v : r) v = std::sqrt(v);
  const DensityOperator w = wick_quantize(KineticDensity(f.grid(), std::move(r)), scale);
  MatrixXcd sq = w.matrix() * w.matrix();
  sq = 0.5 * (sq + sq.adjoint()).eval();
  const double tr = scale.h() * sq.trace().real();
  return DensityOperator::state(std::move(sq), f.grid(), scale, tr);
}

BTerm b_term(const KineticDensity& f, const InteractionKernel& kernel, PlanckScale scale) {
  const PhaseGrid& g = f.grid();
  const int n = g.n_x;
  const double dx = g.dx();
  const SpatialField rho = spatial_density(f);
  // V at grid points and V' at half-grid points x_0 + l dx/2, by direct quadrature.
  std::vector<double> v(n), dv(2 * n);
  std::vector<double> terms(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) terms[j] = kernel.value(wrap(g.x(i) - g.x(j), g.length_x)) * rho.values[j] * dx;
    v[i] = pairwise_sum(terms);
  }
  for (int l = 0; l < 2 * n; ++l) {
    const double m = g.x(0) + 0.5 * l * dx;
    for (int j = 0; j < n; ++j) terms[j] = kernel.gradient(wrap(m - g.x(j), g.length_x)) * rho.values[j] * dx;
    dv[l] = pairwise_sum(terms);
  }
  const DensityOperator w = weyl_quantize(f, scale);
  MatrixXcd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int delta = wrap_index(i - j, n);
      const int l = ((2 * j + delta) % (2 * n) + 2 * n) % (2 * n);
      const double r = v[i] - v[j] - dv[l] * (delta * dx);
      b(i, j) = r * w.matrix()(i, j);
    }
  DensityOperator op = DensityOperator::general(std::move(b), g, scale);
  const double nrm = schatten_norm(op, 1.0);
  return BTerm{std::move(op), nrm};
}

}  // namespace kslab
