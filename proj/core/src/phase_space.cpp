#include "kslab/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"

namespace kslab {

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void require_same_spatial(const PhaseGrid& a, const PhaseGrid& b, const char* what) {
  if (!a.same_spatial(b)) fail(Errc::grid_mismatch, std::string(what) + ": spatial grids differ");
}

std::vector<cplx> spectrum_of(const std::vector<double>& s) {
  std::vector<cplx> buf(s.begin(), s.end());
  fft(buf);
  return buf;
}

}  // namespace

PhaseGrid PhaseGrid::make(int n_x, int n_v, double length_x, double v_max, int dim) {
  if (dim < 1) fail(Errc::invalid_argument, "grid dimension must be positive");
  if (!is_power_of_two(n_x) || n_x < 8) fail(Errc::invalid_argument, "n_x must be a power of two >= 8");
  if (!is_power_of_two(n_v) || n_v < 8) fail(Errc::invalid_argument, "n_v must be a power of two >= 8");
  if (!(length_x > 0.0) || !(v_max > 0.0)) fail(Errc::invalid_argument, "length_x and v_max must be positive");
  return PhaseGrid{dim, n_x, n_v, length_x, v_max};
}

std::size_t PhaseGrid::spatial_size() const { return ipow(static_cast<std::size_t>(n_x), dim); }
std::size_t PhaseGrid::velocity_size() const { return ipow(static_cast<std::size_t>(n_v), dim); }
double PhaseGrid::spatial_cell_volume() const { return std::pow(dx(), dim); }
double PhaseGrid::velocity_cell_volume() const { return std::pow(dv(), dim); }
double PhaseGrid::cell_volume() const { return spatial_cell_volume() * velocity_cell_volume(); }

bool PhaseGrid::pairs_with(double hbar) const {
  const double want = pi * hbar * n_x / length_x;
  return n_v == n_x && std::abs(v_max - want) <= 1e-12 * want;
}

void PhaseGrid::require_momentum_pairing(double hbar) const {
  if (!(hbar > 0.0)) fail(Errc::grid_incompatible, "hbar must be positive");
  if (!pairs_with(hbar)) {
    fail(Errc::grid_incompatible,
         "velocity grid must equal the momentum lattice: need n_v = n_x and v_max = pi*hbar*n_x/L = " +
             std::to_string(pi * hbar * n_x / length_x));
  }
}

bool PhaseGrid::same_spatial(const PhaseGrid& o) const {
  return dim == o.dim && n_x == o.n_x && length_x == o.length_x;
}

double grid_mass(const PhaseGrid& grid, std::span<const double> values) {
  return pairwise_sum(values) * grid.cell_volume();
}

KineticDensity::KineticDensity(PhaseGrid grid, std::vector<double> values, double time,
                               std::optional<double> declared_mass)
    : grid_(grid), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.size()) fail(Errc::invalid_argument, "KineticDensity: value count does not match grid");
  double peak = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) fail(Errc::invalid_argument, "KineticDensity: non-finite value");
    peak = std::max(peak, std::abs(v));
  }
  const double tol = 1e-12 * std::max(1.0, peak);
  for (double& v : values_) {
    if (v < -tol) fail(Errc::negative_density, "KineticDensity: value " + std::to_string(v) + " below zero");
    if (v < 0.0) v = 0.0;
  }
  mass_ = grid_mass(grid_, values_);
  if (declared_mass) {
    const double d = *declared_mass;
    if (std::abs(d - mass_) > 1e-10 * std::max(std::abs(d), 1e-300))
      fail(Errc::mass_mismatch, "KineticDensity: declared mass differs from grid mass");
    mass_ = d;
  }
}

KineticDensity KineticDensity::zeros(const PhaseGrid& grid, double time) {
  return KineticDensity(grid, std::vector<double>(grid.size(), 0.0), time);
}

double KineticDensity::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

KineticDensity KineticDensity::at_time(double t) const {
  KineticDensity out = *this;
  out.time_ = t;
  return out;
}

InteractionKernel InteractionKernel::regularized_coulomb(const PhaseGrid& grid, double eps, int sign) {
  if (grid.dim != 1) fail(Errc::unsupported_spec, "kernels are implemented for d = 1");
  if (!(eps >= grid.dx() * (1.0 - 1e-12)))
    fail(Errc::invalid_argument, "regularized_coulomb requires eps >= dx");
  InteractionKernel k;
  k.kind_ = KernelKind::regularized_coulomb;
  k.param_ = eps;
  k.sign_ = sign;
  k.grid_ = grid;
  k.value_fn_ = [eps](double x) { return 1.0 / std::sqrt(x * x + eps * eps); };
  k.grad_fn_ = [eps](double x) { return -x / std::pow(x * x + eps * eps, 1.5); };
  k.finish();
  return k;
}

InteractionKernel InteractionKernel::coulomb3d(const PhaseGrid& grid, int sign, double eps) {
  InteractionKernel k = regularized_coulomb(grid, eps > 0.0 ? eps : grid.dx(), sign);
  k.kind_ = KernelKind::coulomb3d;
  return k;
}

InteractionKernel InteractionKernel::coulomb1d(const PhaseGrid& grid, int sign) {
  if (grid.dim != 1) fail(Errc::unsupported_spec, "kernels are implemented for d = 1");
  InteractionKernel k;
  k.kind_ = KernelKind::coulomb1d;
  k.sign_ = sign;
  k.grid_ = grid;
  const double L = grid.length_x;
  k.value_fn_ = [L](double x) { return -0.5 * std::abs(x) + x * x / (2.0 * L) + L / 12.0; };
  k.grad_fn_ = [L](double x) {
    if (x == 0.0) return 0.0;
    return (x > 0 ? -0.5 : 0.5) + x / L;
  };
  k.finish();
  return k;
}

InteractionKernel InteractionKernel::gaussian(const PhaseGrid& grid, double sigma, int sign) {
  if (grid.dim != 1) fail(Errc::unsupported_spec, "kernels are implemented for d = 1");
  if (!(sigma > 0.0)) fail(Errc::invalid_argument, "gaussian kernel width must be positive");
  InteractionKernel k;
  k.kind_ = KernelKind::gaussian;
  k.param_ = sigma;
  k.sign_ = sign;
  k.grid_ = grid;
  k.value_fn_ = [sigma](double x) { return std::exp(-x * x / (2.0 * sigma * sigma)); };
  k.grad_fn_ = [sigma](double x) { return -x / (sigma * sigma) * std::exp(-x * x / (2.0 * sigma * sigma)); };
  k.finish();
  return k;
}

InteractionKernel InteractionKernel::custom(const PhaseGrid& grid, Profile value, Profile gradient, int sign) {
  if (grid.dim != 1) fail(Errc::unsupported_spec, "kernels are implemented for d = 1");
  if (!value || !gradient) fail(Errc::invalid_argument, "custom kernel needs value and gradient profiles");
  InteractionKernel k;
  k.kind_ = KernelKind::custom;
  k.sign_ = sign;
  k.grid_ = grid;
  k.value_fn_ = std::move(value);
  k.grad_fn_ = std::move(gradient);
  k.finish();
  return k;
}

InteractionKernel InteractionKernel::harmonic(const PhaseGrid& grid, int sign) {
  InteractionKernel k = custom(grid, [](double x) { return 0.5 * x * x; }, [](double x) { return x; }, sign);
  return k;
}

InteractionKernel InteractionKernel::from_table(const PhaseGrid& grid, std::vector<double> samples, int sign) {
  if (grid.dim != 1) fail(Errc::unsupported_spec, "kernels are implemented for d = 1");
  if (samples.size() != static_cast<std::size_t>(grid.n_x))
    fail(Errc::invalid_argument, "kernel table must have n_x samples");
  InteractionKernel k;
  k.kind_ = KernelKind::custom;
  k.sign_ = sign;
  k.grid_ = grid;
  const int n = grid.n_x;
  const double L = grid.length_x;
  auto spec = std::make_shared<std::vector<cplx>>(spectrum_of(samples));
  (*spec)[n / 2] = 0.5 * (*spec)[n / 2];
  // Trigonometric interpolant with the Nyquist term split between +-n/2 (real for real tables).
  k.value_fn_ = [spec, n, L](double x) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      const double kk = wavenumber(a, n, L);
      s += ((*spec)[a] * std::polar(1.0, kk * x)).real();
      if (a == n / 2) s += ((*spec)[a] * std::polar(1.0, -kk * x)).real();
    }
    return s / n;
  };
  k.grad_fn_ = [spec, n, L](double x) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      if (a == n / 2) continue;
      const double kk = wavenumber(a, n, L);
      s += ((*spec)[a] * cplx(0.0, kk) * std::polar(1.0, kk * x)).real();
    }
    return s / n;
  };
  k.finish();
  return k;
}

InteractionKernel InteractionKernel::zero(const PhaseGrid& grid) {
  if (grid.dim != 1) fail(Errc::unsupported_spec, "kernels are implemented for d = 1");
  InteractionKernel k;
  k.kind_ = KernelKind::zero;
  k.grid_ = grid;
  k.value_fn_ = [](double) { return 0.0; };
  k.grad_fn_ = [](double) { return 0.0; };
  k.finish();
  return k;
}

void InteractionKernel::finish() {
  const int n = grid_.n_x;
  const double dx = grid_.dx();
  samples_.assign(n, 0.0);
  grad_samples_.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double x = wrap(j * dx, grid_.length_x);
    samples_[j] = sign_ * value_fn_(x);
    // The antipode is a kink of every minimal-image profile; its one-sided slopes cancel.
    grad_samples_[j] = (j == n / 2) ? 0.0 : sign_ * grad_fn_(x);
  }
  double peak = 0.0;
  for (double g : grad_samples_) peak = std::max(peak, std::abs(g));
  for (int j = 0; j < n; ++j) {
    const double defect = std::abs(grad_samples_[j] + grad_samples_[(n - j) % n]);
    if (defect > 1e-12 * std::max(peak, 1.0))
      fail(Errc::invalid_argument, "kernel gradient samples are not antisymmetric under x -> -x");
  }
  spectrum_ = spectrum_of(samples_);
  grad_spectrum_ = spectrum_of(grad_samples_);
}

std::string InteractionKernel::name() const {
  switch (kind_) {
    case KernelKind::coulomb3d: return "coulomb3d";
    case KernelKind::coulomb1d: return "coulomb1d";
    case KernelKind::regularized_coulomb: return "regularized_coulomb";
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::custom: return "custom";
    case KernelKind::zero: return "zero";
  }
  return "unknown";
}

double InteractionKernel::value(double x) const { return sign_ * value_fn_(wrap(x, grid_.length_x)); }

double InteractionKernel::gradient(double x) const {
  const double w = wrap(x, grid_.length_x);
  if (w == -0.5 * grid_.length_x) return 0.0;
  return sign_ * grad_fn_(w);
}

SpatialField spatial_density(const PhaseField& f) {
  const std::size_t nx = f.grid.spatial_size();
  const std::size_t nv = f.grid.velocity_size();
  SpatialField rho{f.grid, std::vector<double>(nx)};
  const double vol = f.grid.velocity_cell_volume();
  for (std::size_t X = 0; X < nx; ++X)
    rho.values[X] = pairwise_sum(std::span<const double>(f.values).subspan(X * nv, nv)) * vol;
  return rho;
}

SpatialField spatial_density(const KineticDensity& f) { return spatial_density(f.field()); }

namespace {

SpatialField convolve(const SpatialField& rho, const std::vector<cplx>& spec, double scale, const char* what) {
  if (rho.grid.dim != 1) fail(Errc::unsupported_spec, std::string(what) + " is implemented for d = 1");
  const std::size_t n = rho.values.size();
  if (n != spec.size()) fail(Errc::grid_mismatch, std::string(what) + ": kernel grid differs from density grid");
  const double mean = pairwise_sum(rho.values) / static_cast<double>(n);
  std::vector<cplx> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = rho.values[i] - mean;
  fft(buf);
  for (std::size_t a = 0; a < n; ++a) buf[a] *= spec[a];
  buf[0] = 0.0;
  ifft(buf);
  SpatialField out{rho.grid, std::vector<double>(n)};
  const double dx = rho.grid.dx();
  for (std::size_t i = 0; i < n; ++i) out.values[i] = scale * dx * buf[i].real();
  return out;
}

}  // namespace

SpatialField force_field(const SpatialField& rho, const InteractionKernel& kernel) {
  require_same_spatial(rho.grid, kernel.grid(), "force_field");
  return convolve(rho, kernel.grad_spectrum(), -1.0, "force_field");
}

SpatialField potential(const SpatialField& rho, const InteractionKernel& kernel) {
  require_same_spatial(rho.grid, kernel.grid(), "potential");
  return convolve(rho, kernel.spectrum(), 1.0, "potential");
}

}  // namespace kslab
