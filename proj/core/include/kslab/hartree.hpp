#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "kslab/phase_space.hpp"
#include "kslab/quantum.hpp"

namespace kslab {

struct HartreeDiagnostics {
  std::vector<double> t;
  std::vector<double> trace;     // h Tr op
  std::vector<double> l1;        // Schatten norms
  std::vector<double> l2;
  std::vector<double> linf;
  std::vector<double> min_eig;
  std::vector<double> energy;
  std::vector<double> diag_inf;  // sup of h rho(x, x)
  std::vector<std::vector<double>> moments;  // h Tr(|p|^k op), k = 2, 4, ..., 16
};

struct HartreeState {
  DensityOperator op;
  InteractionKernel kernel;
  double t = 0.0;
  double dt = 0.01;
  HartreeDiagnostics diagnostics;
  // Vectors (columns) carried along by the same unitary as op.
  Eigen::MatrixXcd passengers;

  HartreeState(DensityOperator op0, InteractionKernel k, double dt_);
};

// Mean-field potential K * (rho - mean rho) of the operator diagonal.
std::vector<double> hartree_potential(const DensityOperator& op, const InteractionKernel& kernel);
// Matrix of -(hbar^2/2) Laplacian + V in the operator convention (acts on grid vectors).
Eigen::MatrixXcd hartree_hamiltonian(const PhaseGrid& grid, PlanckScale scale, const std::vector<double>& v);

// Strang step exp(-i V dt/2hbar) exp(i hbar Laplacian dt/2) exp(-i V' dt/2hbar): V from the diagonal at
// the start, V' from the diagonal after the kinetic phase. Each factor is exactly unitary.
HartreeState hartree_step(const HartreeState& state);

using HartreeObserver = std::function<void(const HartreeState&)>;

HartreeState solve_hartree(HartreeState state, double t_end, const HartreeObserver& observer = {}, int cadence = 1);

void record_diagnostics(HartreeState& state);

// Kinetic h Tr(p^2/2 op) plus potential (1/2) sum (rho - mean) V dx.
double kinetic_energy(const DensityOperator& op);
double total_energy(const HartreeState& state);
double total_energy(const DensityOperator& op, const InteractionKernel& kernel);
// h Tr(|p|^k op).
double momentum_moment(const DensityOperator& op, double k);

// Spatial densities sampled in time; linear interpolation between samples.
class DensityHistory {
 public:
  void record(double t, SpatialField rho);
  bool empty() const { return times_.empty(); }
  double t_begin() const;
  double t_end() const;
  double max_gap() const;
  SpatialField at(double t) const;

 private:
  std::vector<double> times_;
  std::vector<SpatialField> rho_;
};

struct LinearHartreeRun {
  std::vector<double> times;
  std::vector<DensityOperator> ops;
  Eigen::MatrixXcd passengers;  // at the final time
};

// Same stepper with V = K * (rho_f - mean) from the classical history. Operators are stored at
// `sample_times` (which must lie in [0, t_end]). Throws HistoryGap if the history does not cover
// [t0, t_end] or is sampled more coarsely than dt.
LinearHartreeRun solve_linear_hartree(const DensityOperator& op0, const InteractionKernel& kernel,
                                      const DensityHistory& history, double t_end, double dt,
                                      const std::vector<double>& sample_times,
                                      Eigen::MatrixXcd passengers = {});

// Wick(sqrt f)^2, the initial datum of the linear dynamics.
DensityOperator wick_sqrt_squared(const KineticDensity& f, PlanckScale scale);

struct BTerm {
  DensityOperator op;
  double trace_norm = 0.0;
};

// B(x, y) = (V(x) - V(y) - V'((x + y)/2)(x - y)) Weyl(f)(x, y) with V = K * rho_f, x - y minimal image.
BTerm b_term(const KineticDensity& f, const InteractionKernel& kernel, PlanckScale scale);

}  // namespace kslab
