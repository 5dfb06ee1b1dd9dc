#include "kslab/vlasov.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"

namespace kslab {

void FieldHistory::record(double t, std::vector<double> field) {
  if (field.size() != static_cast<std::size_t>(grid_.n_x))
    fail(Errc::invalid_argument, "FieldHistory: field size does not match grid");
  if (!times_.empty() && !(t > times_.back())) fail(Errc::invalid_argument, "FieldHistory: times must increase");
  splines_.emplace_back(field, grid_.x(0), grid_.dx());
  times_.push_back(t);
  fields_.push_back(std::move(field));
}

double FieldHistory::t_begin() const { return times_.empty() ? 0.0 : times_.front(); }
double FieldHistory::t_end() const { return times_.empty() ? 0.0 : times_.back(); }

double FieldHistory::max_gap() const {
  double g = 0.0;
  for (std::size_t m = 1; m < times_.size(); ++m) g = std::max(g, times_[m] - times_[m - 1]);
  return g;
}

double FieldHistory::operator()(double t, double x) const {
  if (times_.empty()) fail(Errc::history_gap, "FieldHistory is empty");
  if (t <= times_.front()) return splines_.front()(x);
  if (t >= times_.back()) return splines_.back()(x);
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t m = static_cast<std::size_t>(it - times_.begin());
  const double t0 = times_[m - 1], t1 = times_[m];
  const double s = (t - t0) / (t1 - t0);
  return (1.0 - s) * splines_[m - 1](x) + s * splines_[m](x);
}

double kinetic_energy(const KineticDensity& f) {
  const PhaseGrid& g = f.grid();
  if (g.dim != 1) fail(Errc::unsupported_spec, "kinetic_energy is implemented for d = 1");
  std::vector<double> terms(f.values().size());
  for (int i = 0; i < g.n_x; ++i)
    for (int k = 0; k < g.n_v; ++k) {
      const std::size_t idx = static_cast<std::size_t>(i) * g.n_v + k;
      terms[idx] = 0.5 * g.v(k) * g.v(k) * f.values()[idx];
    }
  return pairwise_sum(terms) * g.cell_volume();
}

double potential_energy(const SpatialField& rho, const InteractionKernel& kernel) {
  const SpatialField V = potential(rho, kernel);
  const double mean = pairwise_sum(rho.values) / static_cast<double>(rho.values.size());
  std::vector<double> terms(rho.values.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = 0.5 * (rho.values[i] - mean) * V.values[i];
  return pairwise_sum(terms) * rho.grid.dx();
}

double total_energy(const KineticDensity& f, const InteractionKernel& kernel) {
  return kinetic_energy(f) + potential_energy(spatial_density(f), kernel);
}

VlasovState::VlasovState(KineticDensity f0, InteractionKernel k, double dt_, bool record)
    : f(std::move(f0)), kernel(std::move(k)), t(f.time()), dt(dt_), record_field(record), history(f.grid()) {
  if (f.grid().dim != 1) fail(Errc::unsupported_spec, "the Vlasov solver is implemented for d = 1");
  if (!f.grid().same_spatial(kernel.grid())) fail(Errc::grid_mismatch, "VlasovState: kernel grid differs");
  if (!(dt > 0.0)) fail(Errc::invalid_argument, "VlasovState: dt must be positive");
  if (dt > f.grid().dx() / f.grid().v_max)
    spdlog::warn("vlasov: dt = {} exceeds dx/v_max = {}; advection is under-resolved", dt,
                 f.grid().dx() / f.grid().v_max);
  if (record_field) history.record(t, force_field(spatial_density(f), kernel).values);
}

namespace {

void advect_x(std::vector<double>& v, const PhaseGrid& g, double tau, std::vector<double>& scratch) {
  const int nx = g.n_x, nv = g.n_v;
  scratch.resize(v.size());
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < nv; ++k) scratch[static_cast<std::size_t>(k) * nx + i] = v[static_cast<std::size_t>(i) * nv + k];
  std::vector<double> shifts(nv);
  for (int k = 0; k < nv; ++k) shifts[k] = g.v(k) * tau / g.dx();
  spline_shift_rows(scratch, nx, shifts);
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < nv; ++k) v[static_cast<std::size_t>(i) * nv + k] = scratch[static_cast<std::size_t>(k) * nx + i];
}

}  // namespace

VlasovState vlasov_step(const VlasovState& state) {
  const PhaseGrid& g = state.f.grid();
  const double dt = state.dt;
  const double before_max = state.f.max_value();
  const double mass = state.f.mass();
  std::vector<double> v(state.f.values().begin(), state.f.values().end());
  std::vector<double> scratch;

  advect_x(v, g, 0.5 * dt, scratch);
  SpatialField rho{g, std::vector<double>(g.n_x)};
  for (int i = 0; i < g.n_x; ++i)
    rho.values[i] = pairwise_sum(std::span<const double>(v).subspan(static_cast<std::size_t>(i) * g.n_v, g.n_v)) * g.dv();
  const SpatialField E = force_field(rho, state.kernel);
  std::vector<double> shifts(g.n_x);
  for (int i = 0; i < g.n_x; ++i) shifts[i] = E.values[i] * dt / g.dv();
  spline_shift_rows(v, g.n_v, shifts);
  advect_x(v, g, 0.5 * dt, scratch);

  double removed = 0.0, after_max = 0.0;
  for (double& x : v) {
    if (x < 0.0) {
      removed -= x;
      x = 0.0;
    }
    after_max = std::max(after_max, x);
  }
  if (before_max > 0.0 && after_max > 10.0 * before_max)
    fail(Errc::blowup_detected, "vlasov_step: sup norm grew more than tenfold in one step");
  const double m_now = grid_mass(g, v);
  if (m_now > 0.0)
    for (double& x : v) x *= mass / m_now;
  if (removed > 0.0) spdlog::debug("vlasov: clamped {} of negative mass at t = {}", removed * g.cell_volume(), state.t);

  VlasovState next = state;
  next.t = state.t + dt;
  next.f = KineticDensity(g, std::move(v), next.t);
  next.diagnostics.clamped_mass += removed * g.cell_volume();
  if (state.record_field) next.history.record(state.t + 0.5 * dt, E.values);
  return next;
}

void record_diagnostics(VlasovState& s) {
  const SpatialField rho = spatial_density(s.f);
  s.diagnostics.t.push_back(s.t);
  s.diagnostics.mass.push_back(grid_mass(s.f.grid(), s.f.values()));
  s.diagnostics.l2.push_back(norm(s.f, NormSpec::lebesgue(2.0)));
  s.diagnostics.energy.push_back(kinetic_energy(s.f) + potential_energy(rho, s.kernel));
  s.diagnostics.rho_inf.push_back(norm(rho, NormSpec::lebesgue(inf)));
}

VlasovState solve_vlasov(VlasovState state, double t_end, const VlasovObserver& observer, int cadence) {
  if (cadence < 1) fail(Errc::invalid_argument, "solve_vlasov: cadence must be >= 1");
  const double span = t_end - state.t;
  if (span < -1e-12) fail(Errc::invalid_argument, "solve_vlasov: t_end precedes the current time");
  record_diagnostics(state);
  if (observer) observer(state);
  if (span <= 1e-12) return state;
  const long steps = static_cast<long>(std::ceil(span / state.dt - 1e-9));
  const double dt_nominal = state.dt;
  for (long s = 1; s <= steps; ++s) {
    if (s == steps) state.dt = t_end - state.t;
    state = vlasov_step(state);
    if (s == steps) {
      state.t = t_end;
      state.f = state.f.at_time(t_end);
    }
    if (s % cadence == 0 || s == steps) {
      record_diagnostics(state);
      if (observer) observer(state);
    }
  }
  state.dt = dt_nominal;
  if (state.record_field)
    state.history.record(state.t + 1e-12 * std::max(1.0, std::abs(state.t)),
                         force_field(spatial_density(state.f), state.kernel).values);
  return state;
}

}  // namespace kslab
