#include "kslab/initial_data.hpp"

#include <cmath>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"

namespace kslab {

namespace {

KineticDensity normalized(const PhaseGrid& grid, std::vector<double> v, double mass) {
  const double m = grid_mass(grid, v);
  if (!(m > 0.0)) fail(Errc::invalid_argument, "initial data has zero mass on this grid");
  for (double& x : v) x *= mass / m;
  return KineticDensity(grid, std::move(v));
}

void require_1d(const PhaseGrid& grid) {
  if (grid.dim != 1) fail(Errc::unsupported_spec, "named initial-data families are implemented for d = 1");
}

}  // namespace

KineticDensity maxwellian(const PhaseGrid& grid, double mass, double temperature, double drift) {
  require_1d(grid);
  if (!(temperature > 0.0)) fail(Errc::invalid_argument, "temperature must be positive");
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.n_x; ++i)
    for (int k = 0; k < grid.n_v; ++k) {
      const double u = grid.v(k) - drift;
      v[static_cast<std::size_t>(i) * grid.n_v + k] = std::exp(-u * u / (2.0 * temperature));
    }
  return normalized(grid, std::move(v), mass);
}

KineticDensity gaussian_bump(const PhaseGrid& grid, double mass, double x0, double v0, double var_x, double var_v) {
  require_1d(grid);
  if (!(var_x > 0.0) || !(var_v > 0.0)) fail(Errc::invalid_argument, "bump variances must be positive");
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.n_x; ++i) {
    const double y = wrap(grid.x(i) - x0, grid.length_x);
    for (int k = 0; k < grid.n_v; ++k) {
      const double u = grid.v(k) - v0;
      v[static_cast<std::size_t>(i) * grid.n_v + k] = std::exp(-y * y / (2.0 * var_x) - u * u / (2.0 * var_v));
    }
  }
  return normalized(grid, std::move(v), mass);
}

KineticDensity two_stream(const PhaseGrid& grid, double mass, double separation, double temperature) {
  require_1d(grid);
  if (!(temperature > 0.0)) fail(Errc::invalid_argument, "temperature must be positive");
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.n_x; ++i)
    for (int k = 0; k < grid.n_v; ++k) {
      const double a = grid.v(k) - 0.5 * separation;
      const double b = grid.v(k) + 0.5 * separation;
      v[static_cast<std::size_t>(i) * grid.n_v + k] =
          std::exp(-a * a / (2.0 * temperature)) + std::exp(-b * b / (2.0 * temperature));
    }
  return normalized(grid, std::move(v), mass);
}

KineticDensity perturbed(const KineticDensity& base, int mode, double amplitude) {
  const PhaseGrid& g = base.grid();
  require_1d(g);
  if (std::abs(amplitude) >= 1.0) fail(Errc::invalid_argument, "perturbation amplitude must be below 1");
  std::vector<double> v(base.values().begin(), base.values().end());
  for (int i = 0; i < g.n_x; ++i) {
    const double factor = 1.0 + amplitude * std::cos(2.0 * pi * mode * g.x(i) / g.length_x);
    for (int k = 0; k < g.n_v; ++k) v[static_cast<std::size_t>(i) * g.n_v + k] *= factor;
  }
  KineticDensity out = normalized(g, std::move(v), base.mass());
  return out.at_time(base.time());
}

KineticDensity translated(const KineticDensity& f, double a, double b) {
  const PhaseGrid& g = f.grid();
  require_1d(g);
  const int nx = g.n_x, nv = g.n_v;
  std::vector<double> v(f.values().begin(), f.values().end());
  if (a != 0.0) {
    std::vector<cplx> col(nx);
    for (int k = 0; k < nv; ++k) {
      for (int i = 0; i < nx; ++i) col[i] = v[static_cast<std::size_t>(i) * nv + k];
      fft(col);
      for (int m = 0; m < nx; ++m) {
        if (m == nx / 2) {
          col[m] *= std::cos(wavenumber(m, nx, g.length_x) * a);
          continue;
        }
        col[m] *= std::polar(1.0, -wavenumber(m, nx, g.length_x) * a);
      }
      ifft(col);
      for (int i = 0; i < nx; ++i) v[static_cast<std::size_t>(i) * nv + k] = col[i].real();
    }
  }
  if (b != 0.0) {
    std::vector<double> shifts(nx, b / g.dv());
    spline_shift_rows(v, nv, shifts);
  }
  for (double& x : v)
    if (x < 0.0) x = 0.0;
  return normalized(g, std::move(v), f.mass()).at_time(f.time());
}

KineticDensity velocity_reflected(const KineticDensity& f) {
  const PhaseGrid& g = f.grid();
  require_1d(g);
  std::vector<double> v(f.values().size());
  // v_k = -v_max + k dv reflects to index n_v - k, with k = 0 (v = -v_max) mapped onto itself.
  for (int i = 0; i < g.n_x; ++i)
    for (int k = 0; k < g.n_v; ++k) {
      const int kr = (g.n_v - k) % g.n_v;
      v[static_cast<std::size_t>(i) * g.n_v + kr] = f.at(i, k);
    }
  return KineticDensity(g, std::move(v), f.time(), f.mass());
}

}  // namespace kslab
