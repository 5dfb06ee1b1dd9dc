#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kslab {

// Periodic position axis of length L (points x_i = -L/2 + i dx) times a velocity box
// [-v_max, v_max) (points v_k = -v_max + k dv). Storage is x-block major: the flat index of
// (X, V) is X * n_v^d + V, each block row-major over its d axes.
struct PhaseGrid {
  int dim = 1;
  int n_x = 0;
  int n_v = 0;
  double length_x = 0.0;
  double v_max = 0.0;

  static PhaseGrid make(int n_x, int n_v, double length_x, double v_max, int dim = 1);

  double dx() const { return length_x / n_x; }
  double dv() const { return 2.0 * v_max / n_v; }
  double x(int i) const { return -0.5 * length_x + i * dx(); }
  double v(int k) const { return -v_max + k * dv(); }

  std::size_t spatial_size() const;
  std::size_t velocity_size() const;
  std::size_t size() const { return spatial_size() * velocity_size(); }
  double cell_volume() const;
  double spatial_cell_volume() const;
  double velocity_cell_volume() const;

  // Throws GridIncompatible unless n_v == n_x and v_max == pi hbar n_x / L (relative 1e-12).
  void require_momentum_pairing(double hbar) const;
  bool pairs_with(double hbar) const;

  bool same_spatial(const PhaseGrid& o) const;
  bool operator==(const PhaseGrid& o) const = default;
};

struct SpatialField {
  PhaseGrid grid;
  std::vector<double> values;
};

// Real (possibly signed) function on the phase grid.
struct PhaseField {
  PhaseGrid grid;
  std::vector<double> values;
};

class KineticDensity {
 public:
  // Values within -1e-12 * max(1, max|f|) of zero are clamped; anything more negative throws
  // NegativeDensity. If declared_mass is given it must match the grid mass to 1e-10 relative.
  KineticDensity(PhaseGrid grid, std::vector<double> values, double time = 0.0,
                 std::optional<double> declared_mass = std::nullopt);

  static KineticDensity zeros(const PhaseGrid& grid, double time = 0.0);

  const PhaseGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double time() const { return time_; }
  double mass() const { return mass_; }
  double at(int i, int k) const { return values_[static_cast<std::size_t>(i) * grid_.n_v + k]; }
  double max_value() const;

  PhaseField field() const { return PhaseField{grid_, values_}; }
  KineticDensity at_time(double t) const;

 private:
  PhaseGrid grid_;
  std::vector<double> values_;
  double time_ = 0.0;
  double mass_ = 0.0;
};

double grid_mass(const PhaseGrid& grid, std::span<const double> values);

enum class KernelKind { coulomb3d, coulomb1d, regularized_coulomb, gaussian, custom, zero };

class InteractionKernel {
 public:
  using Profile = std::function<double(double)>;

  // 1/sqrt(x^2 + eps^2) on the minimal-image coordinate; requires eps >= dx.
  static InteractionKernel regularized_coulomb(const PhaseGrid& grid, double eps, int sign = 1);
  // The 1/|x| profile; in d = 1 it is always mollified at eps (default dx).
  static InteractionKernel coulomb3d(const PhaseGrid& grid, int sign = 1, double eps = 0.0);
  // Periodic Green's function of -d^2/dx^2 with neutralizing background: -|x|/2 + x^2/(2L) + L/12 (zero mean).
  static InteractionKernel coulomb1d(const PhaseGrid& grid, int sign = 1);
  static InteractionKernel gaussian(const PhaseGrid& grid, double sigma, int sign = 1);
  // Analytic profile and gradient, evaluated on the minimal-image coordinate.
  static InteractionKernel custom(const PhaseGrid& grid, Profile value, Profile gradient, int sign = 1);
  // x^2/2 on the minimal-image coordinate.
  static InteractionKernel harmonic(const PhaseGrid& grid, int sign = 1);
  // Samples K(wrap(j dx)), j = 0..n_x-1; gradient and off-grid values by spectral interpolation.
  static InteractionKernel from_table(const PhaseGrid& grid, std::vector<double> samples, int sign = 1);
  static InteractionKernel zero(const PhaseGrid& grid);

  KernelKind kind() const { return kind_; }
  int sign() const { return sign_; }
  double parameter() const { return param_; }
  const PhaseGrid& grid() const { return grid_; }
  std::string name() const;

  // Signed samples at offsets j dx (j = 0..n_x-1, wrapped to [-L/2, L/2)).
  const std::vector<double>& samples() const { return samples_; }
  const std::vector<double>& grad_samples() const { return grad_samples_; }
  const std::vector<std::complex<double>>& spectrum() const { return spectrum_; }
  const std::vector<std::complex<double>>& grad_spectrum() const { return grad_spectrum_; }

  double value(double x) const;
  double gradient(double x) const;

 private:
  InteractionKernel() = default;
  void finish();

  KernelKind kind_ = KernelKind::zero;
  int sign_ = 1;
  double param_ = 0.0;
  PhaseGrid grid_;
  Profile value_fn_;
  Profile grad_fn_;
  std::vector<double> samples_;
  std::vector<double> grad_samples_;
  std::vector<std::complex<double>> spectrum_;
  std::vector<std::complex<double>> grad_spectrum_;
};

SpatialField spatial_density(const KineticDensity& f);
SpatialField spatial_density(const PhaseField& f);

// E = -(grad K) * (rho - mean rho) by circular convolution.
SpatialField force_field(const SpatialField& rho, const InteractionKernel& kernel);
// V = K * (rho - mean rho) by circular convolution.
SpatialField potential(const SpatialField& rho, const InteractionKernel& kernel);

enum class NormFamily { lebesgue, mixed, lorentz, lorentz_mixed, weighted_sobolev };

struct NormSpec {
  NormFamily family = NormFamily::lebesgue;
  double p = 2.0;
  double q = 2.0;     // lorentz second index, or the velocity exponent of mixed
  double q_xi = 1.0;  // inner velocity exponent of lorentz_mixed
  double k = 0.0;     // Sobolev derivative order
  double n = 0.0;     // Sobolev velocity weight exponent
  int stencil_order = 4;

  static NormSpec lebesgue(double p);
  static NormSpec mixed(double p_x, double q_xi);
  static NormSpec lorentz(double p, double q);
  static NormSpec lorentz_mixed(double p, double q, double q_xi);
  static NormSpec weighted_sobolev(int k, double p, double n);
};

inline constexpr double inf = std::numeric_limits<double>::infinity();

double norm(const PhaseField& f, const NormSpec& spec);
double norm(const KineticDensity& f, const NormSpec& spec);
double norm(const SpatialField& f, const NormSpec& spec);

// Lorentz quasi-norm of a simple function: values with cell measures.
double lorentz_norm(std::span<const double> values, std::span<const double> measures, double p, double q);
double lorentz_norm(std::span<const double> values, double cell_measure, double p, double q);

// Central finite difference along velocity axis `axis` (zero extension outside the box).
std::vector<double> velocity_derivative(const PhaseField& f, int axis = 0, int order = 4);
// Periodic central finite difference along position axis `axis`.
std::vector<double> position_derivative(const PhaseField& f, int axis = 0, int order = 4);

struct LorentzPair {
  double p = 3.0;
  double q = 1.0;
};

// || int |grad_xi f| dxi ||_{L^{p,q}_x}.
double lambda_l1(const KineticDensity& f, const InteractionKernel& kernel, LorentzPair pair = {});

struct LambdaL2 {
  double first = 0.0;   // ||rho||_inf^{1/2} ||grad_xi sqrt f||_{L^p_x L^2_xi}
  double second = 0.0;  // c_inf^{1/2} ||grad_xi sqrt f||_{L^{p,q}_x L^1_xi}
  double total() const { return first + second; }
};

LambdaL2 lambda_l2(const KineticDensity& f, double c_inf, LorentzPair pair = {});

}  // namespace kslab
