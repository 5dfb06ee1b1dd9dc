#pragma once

#include "kslab/phase_space.hpp"

namespace kslab {

// Named initial-data families. Each result is rescaled so its grid mass equals `mass`.

// Spatially uniform Maxwellian with temperature T and drift u.
KineticDensity maxwellian(const PhaseGrid& grid, double mass, double temperature, double drift = 0.0);

// Product Gaussian centred at (x0, v0) with variances (var_x, var_v); minimal image in x.
KineticDensity gaussian_bump(const PhaseGrid& grid, double mass, double x0, double v0, double var_x, double var_v);

// Two counter-streaming Maxwellians at +-separation/2.
KineticDensity two_stream(const PhaseGrid& grid, double mass, double separation, double temperature);

// base * (1 + amplitude cos(2 pi mode x / L)), rescaled back to the mass of base.
KineticDensity perturbed(const KineticDensity& base, int mode, double amplitude);

// Translate by (a, b) in phase space by spectral interpolation along x and cubic splines along v.
KineticDensity translated(const KineticDensity& f, double a, double b = 0.0);

// Flip xi -> -xi.
KineticDensity velocity_reflected(const KineticDensity& f);

}  // namespace kslab
