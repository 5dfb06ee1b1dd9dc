#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>

#include "kslab/phase_space.hpp"

namespace kslab {

struct PlanckScale {
  double hbar = 1.0;
  double h() const;
};

// Operator on L^2 of the periodic spatial grid, stored as the matrix M = kernel(x_i, x_j) dx,
// so that operator products are matrix products and h Tr M is the scaled trace.
class DensityOperator {
 public:
  enum class Kind { state, symbol, general };

  // Hermitian, positive (min eigenvalue >= -1e-10 ||M||) and h Tr M = trace_target (1e-10).
  static DensityOperator state(Eigen::MatrixXcd matrix, const PhaseGrid& grid, PlanckScale scale,
                               double trace_target = 1.0);
  // Weyl quantization of a classical density: Hermitian but possibly indefinite.
  static DensityOperator symbol(Eigen::MatrixXcd matrix, const PhaseGrid& grid, PlanckScale scale);
  static DensityOperator general(Eigen::MatrixXcd matrix, const PhaseGrid& grid, PlanckScale scale);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const PhaseGrid& grid() const { return grid_; }
  PlanckScale scale() const { return scale_; }
  Kind kind() const { return kind_; }
  double trace_target() const { return trace_target_; }
  int n() const { return static_cast<int>(matrix_.rows()); }

  double scaled_trace() const;
  double hermiticity_defect() const;  // ||M - M*|| / ||M||
  double min_eigenvalue() const;

  DensityOperator with_matrix(Eigen::MatrixXcd m, Kind kind) const;

 private:
  DensityOperator(Eigen::MatrixXcd m, PhaseGrid g, PlanckScale s, Kind k, double target);
  Eigen::MatrixXcd matrix_;
  PhaseGrid grid_;
  PlanckScale scale_;
  Kind kind_ = Kind::general;
  double trace_target_ = 1.0;
};

// Coherent state psi_z sampled as u_i = psi_z(x_i) sqrt(dx), so |psi_z><psi_z| has matrix u u*.
// The Gaussian uses the minimal-image distance and is renormalized on the grid.
Eigen::VectorXcd coherent_state(const PhaseGrid& grid, PlanckScale scale, double x0, double xi0);
// Real Gaussian profile g(wrap(x_i - x0)) with sum g^2 dx = 1.
Eigen::VectorXd coherent_profile(const PhaseGrid& grid, PlanckScale scale, double x0);

DensityOperator weyl_quantize(const PhaseField& f, PlanckScale scale);
DensityOperator weyl_quantize(const KineticDensity& f, PlanckScale scale);

PhaseField wigner_transform(const DensityOperator& op);

// G_hbar * f with G_hbar(z) = (pi hbar)^{-1} exp(-|z|^2 / hbar), applied spectrally on the grid.
PhaseField gaussian_smooth(const PhaseField& f, PlanckScale scale);

enum class WickRoute { smoothed_weyl, coherent_sum };

// Wick(f) = h^{-1} sum_z f(z) |psi_z><psi_z| dz; the default route is Weyl(G_hbar * f).
DensityOperator wick_quantize(const KineticDensity& f, PlanckScale scale, WickRoute route = WickRoute::smoothed_weyl);

// <psi_z| op |psi_z> on the grid points z (nonnegative for positive op); clamped at zero.
KineticDensity husimi_transform(const DensityOperator& op);
// Same values, unclamped and without positivity requirement.
PhaseField husimi_values(const DensityOperator& op);

// h rho(x, x) with rho(x, y) the kernel: h M_ii / dx.
SpatialField diag_operator(const DensityOperator& op);

double schatten_norm(const Eigen::MatrixXcd& m, double h, double p);
double schatten_norm(const DensityOperator& op, double p);

enum class Axis { x, xi };

// [d/dx, op] (spectral derivative) or [x/(i hbar), op] (sawtooth position).
DensityOperator quantum_gradient(const DensityOperator& op, Axis axis);

// ||m op||_p + (k = 1) ||m grad_x op||_p + ||m grad_xi op||_p with m = 1 + |p|^n applied on the left.
double quantum_sobolev_norm(const DensityOperator& op, int k, double p, double n);

// Momentum multiplier applied on the left: F^{-1} diag(w(p_a)) F M.
Eigen::MatrixXcd apply_momentum_left(const Eigen::MatrixXcd& m, const PhaseGrid& grid, PlanckScale scale,
                                     const std::function<double(double)>& w);
// Diagonal of F M F^{-1} in momentum order a = 0..n-1 (FFT order).
Eigen::VectorXd momentum_diagonal(const Eigen::MatrixXcd& m);
// Momentum of FFT bin a.
double momentum(int a, const PhaseGrid& grid, PlanckScale scale);

// h Tr exp(-2 pi i (y x + w p)) op at y = a / L, w = b / (2 v_max).
std::complex<double> fourier_of_wigner(const DensityOperator& op, int a, int b);
// All dual-grid values; entry (a + n/2, b + n/2) for a, b in [-n/2, n/2).
Eigen::MatrixXcd characteristic_function(const DensityOperator& op);
// Discrete Fourier transform of a phase-space function on the same dual grid:
// sum_{i,k} exp(-2 pi i (y_a x_i + w_b v_k)) f(i, k) dx dv.
Eigen::MatrixXcd phase_space_fourier(const PhaseField& f);

// Spectral functions of Hermitian operators (eigenvalues clamped at 0 for sqrt).
DensityOperator operator_sqrt(const DensityOperator& op);
DensityOperator operator_abs(const DensityOperator& op);
Eigen::MatrixXcd hermitian_function(const Eigen::MatrixXcd& m, const std::function<double(double)>& fn);

// Binary dump: row-major (re, im) little-endian float64 pairs at `path`, metadata at `path + ".txt"`.
void write_operator(const std::string& path, const DensityOperator& op);
DensityOperator read_operator(const std::string& path);

}  // namespace kslab
