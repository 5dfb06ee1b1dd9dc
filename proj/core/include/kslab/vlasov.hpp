#pragma once

#include <functional>
#include <vector>

#include "kslab/numeric.hpp"
#include "kslab/phase_space.hpp"
#include "kslab/transport.hpp"

namespace kslab {

struct VlasovDiagnostics {
  std::vector<double> t;
  std::vector<double> mass;
  std::vector<double> l2;
  std::vector<double> energy;
  std::vector<double> rho_inf;
  double clamped_mass = 0.0;  // total mass removed by clamping before rescaling
};

// Force field samples E(t_m, x_i) on the spatial grid; linear in t, periodic cubic spline in x.
class FieldHistory {
 public:
  FieldHistory() = default;
  explicit FieldHistory(PhaseGrid grid) : grid_(grid) {}

  void record(double t, std::vector<double> field);
  bool empty() const { return times_.empty(); }
  double t_begin() const;
  double t_end() const;
  double max_gap() const;
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& field(std::size_t m) const { return fields_[m]; }
  const PhaseGrid& grid() const { return grid_; }

  double operator()(double t, double x) const;

 private:
  PhaseGrid grid_;
  std::vector<double> times_;
  std::vector<std::vector<double>> fields_;
  std::vector<PeriodicSpline> splines_;
};

double kinetic_energy(const KineticDensity& f);
double potential_energy(const SpatialField& rho, const InteractionKernel& kernel);
double total_energy(const KineticDensity& f, const InteractionKernel& kernel);

struct VlasovState {
  KineticDensity f;
  InteractionKernel kernel;
  double t = 0.0;
  double dt = 0.01;
  VlasovDiagnostics diagnostics;
  bool record_field = false;
  FieldHistory history;

  VlasovState(KineticDensity f0, InteractionKernel k, double dt_, bool record = false);
};

// Strang split semi-Lagrangian step: half x-advection, full xi-advection with the field of the
// half-advected density, half x-advection; periodic cubic splines in both directions.
VlasovState vlasov_step(const VlasovState& state);

using VlasovObserver = std::function<void(const VlasovState&)>;

// Steps to t_end (the last step is shortened if t_end is not a multiple of dt). Diagnostics are
// sampled at the start, every `cadence` steps, and at the end; the observer is called there too.
VlasovState solve_vlasov(VlasovState state, double t_end, const VlasovObserver& observer = {}, int cadence = 1);

void record_diagnostics(VlasovState& state);

struct FlowMap {
  std::vector<PhasePoint> seeds;
  std::vector<double> times;
  std::vector<std::vector<PhasePoint>> states;  // states[m][a]: trajectory a at times[m]; x unwrapped

  const std::vector<PhasePoint>& at(double t) const;
};

using FieldFunction = std::function<double(double t, double x)>;

// Leapfrog (kick-drift-kick) trajectories from t = 0, sampled at `sample_times` (must include the
// final time). Throws OutOfDomain if |xi| exceeds v_max (v_max <= 0 disables the check).
FlowMap characteristics(const FieldFunction& field, const std::vector<PhasePoint>& seeds,
                        const std::vector<double>& sample_times, double dt, double v_max = 0.0);
// Same, driven by a recorded field history; throws HistoryGap if the history does not cover
// [0, t_end] or its sampling is coarser than dt.
FlowMap characteristics(const FieldHistory& history, const std::vector<PhasePoint>& seeds,
                        const std::vector<double>& sample_times, double dt);

// Transports each atom of gamma0 along the two flows (atom a must sit on seed a of each flow).
DiscreteCoupling transport_coupling(const DiscreteCoupling& gamma0, const FlowMap& flow1, const FlowMap& flow2,
                                    double t);

}  // namespace kslab
