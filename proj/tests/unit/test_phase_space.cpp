#include <doctest.h>

#include <cmath>
#include <random>

#include "kslab/error.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/phase_space.hpp"
#include "oracles.hpp"

using namespace kslab;

namespace {

PhaseGrid grid(int nx = 128, int nv = 128, double vmax = 8.0) { return PhaseGrid::make(nx, nv, 16.0, vmax); }

KineticDensity from_fn(const PhaseGrid& g, const std::function<double(double, double)>& fn) {
  std::vector<double> vals(g.size());
  for (int i = 0; i < g.n_x; ++i)
    for (int k = 0; k < g.n_v; ++k) vals[static_cast<std::size_t>(i) * g.n_v + k] = fn(g.x(i), g.v(k));
  return KineticDensity(g, std::move(vals));
}

}  // namespace

TEST_CASE("grid layout and pairing") {
  const PhaseGrid g = grid(64, 32, 4.0);
  CHECK(g.x(0) == doctest::Approx(-8.0));
  CHECK(g.dx() == doctest::Approx(0.25));
  CHECK(g.v(0) == doctest::Approx(-4.0));
  CHECK(g.dv() == doctest::Approx(0.25));
  CHECK(g.size() == 64u * 32u);
  CHECK_FALSE(g.pairs_with(0.1));
  const PhaseGrid q = PhaseGrid::make(64, 64, 16.0, pi * 0.1 * 64 / 16.0);
  CHECK(q.pairs_with(0.1));
  CHECK_THROWS_AS(g.require_momentum_pairing(0.1), Error);
}

TEST_CASE("negative values are rejected, tiny ones clamped") {
  const PhaseGrid g = grid(8, 8);
  std::vector<double> vals(g.size(), 1.0);
  vals[3] = -1e-14;
  KineticDensity f(g, vals);
  CHECK(f.values()[3] == 0.0);
  vals[3] = -1e-3;
  try {
    KineticDensity bad(g, vals);
    FAIL("expected NegativeDensity");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::negative_density);
  }
  CHECK_THROWS_AS(KineticDensity(g, std::vector<double>(g.size(), 1.0), 0.0, 2.0), Error);
}

TEST_CASE("spatial density of a product Gaussian") {
  const PhaseGrid g = grid();
  const KineticDensity f = gaussian_bump(g, 1.0, 0.0, 0.0, 1.0, 1.0);
  const SpatialField rho = spatial_density(f);
  double err = 0.0;
  for (int i = 0; i < g.n_x; ++i)
    err = std::max(err, std::abs(rho.values[i] - std::exp(-0.5 * g.x(i) * g.x(i)) / std::sqrt(2.0 * pi)));
  CHECK(err < 1e-8);
}

TEST_CASE("spatial density of zero and separable data") {
  const PhaseGrid g = grid(32, 32);
  const SpatialField z = spatial_density(KineticDensity::zeros(g));
  for (double v : z.values) CHECK(v == 0.0);
  // f = a(x) b(v): rho = a * sum b dv.
  const KineticDensity f = from_fn(g, [](double x, double v) { return (2.0 + std::cos(pi * x / 8.0)) * (1.0 + v * v); });
  double bint = 0.0;
  for (int k = 0; k < g.n_v; ++k) bint += (1.0 + g.v(k) * g.v(k)) * g.dv();
  const SpatialField rho = spatial_density(f);
  for (int i = 0; i < g.n_x; ++i) CHECK(rho.values[i] == doctest::Approx((2.0 + std::cos(pi * g.x(i) / 8.0)) * bint).epsilon(1e-12));
}

TEST_CASE("force field: constant density, parity, direct convolution") {
  const PhaseGrid g = grid(128, 16);
  for (const InteractionKernel& k : {InteractionKernel::regularized_coulomb(g, 0.25), InteractionKernel::gaussian(g, 1.0, -1),
                                     InteractionKernel::coulomb1d(g)}) {
    SpatialField flat{g, std::vector<double>(g.n_x, 0.3)};
    for (double e : force_field(flat, k).values) CHECK(std::abs(e) < 1e-13);

    // Even density about x = 0 gives an odd field; grid point i mirrors to n - i.
    SpatialField even{g, std::vector<double>(g.n_x)};
    for (int i = 0; i < g.n_x; ++i) even.values[i] = std::exp(-g.x(i) * g.x(i));
    const SpatialField e = force_field(even, k);
    const SpatialField v = potential(even, k);
    double emax = 0.0, vmax = 0.0, odd = 0.0, evn = 0.0;
    for (int i = 1; i < g.n_x; ++i) {
      emax = std::max(emax, std::abs(e.values[i]));
      vmax = std::max(vmax, std::abs(v.values[i]));
      odd = std::max(odd, std::abs(e.values[i] + e.values[g.n_x - i]));
      evn = std::max(evn, std::abs(v.values[i] - v.values[g.n_x - i]));
    }
    CHECK(odd <= 1e-12 * emax);
    CHECK(evn <= 1e-12 * vmax);
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const InteractionKernel& k : {InteractionKernel::regularized_coulomb(g, 0.25, -1), InteractionKernel::gaussian(g, 0.7)}) {
    SpatialField rho{g, std::vector<double>(g.n_x)};
    for (double& r : rho.values) r = u(rng);
    const std::vector<double> want = oracle::direct_force(rho, k);
    const SpatialField got = force_field(rho, k);
    for (int i = 0; i < g.n_x; ++i) CHECK(got.values[i] == doctest::Approx(want[i]).scale(1.0).epsilon(1e-10));
  }
}

TEST_CASE("kernel construction checks") {
  const PhaseGrid g = grid(64, 16);
  CHECK_THROWS_AS(InteractionKernel::regularized_coulomb(g, 0.1), Error);  // eps < dx
  const InteractionKernel c = InteractionKernel::coulomb1d(g);
  // Zero mean neutralizing background, up to the quadrature error.
  double s = 0.0;
  for (double v : c.samples()) s += v;
  CHECK(std::abs(s / g.n_x) < g.dx() * g.dx());
  const InteractionKernel z = InteractionKernel::zero(g);
  SpatialField rho{g, std::vector<double>(g.n_x, 0.0)};
  rho.values[5] = 1.0;
  for (double e : force_field(rho, z).values) CHECK(e == 0.0);
}

TEST_CASE("Lebesgue and mixed norms") {
  const PhaseGrid g = grid(16, 16, 2.0);
  const KineticDensity one = from_fn(g, [](double, double) { return 1.0; });
  const double area = 16.0 * 4.0;
  CHECK(norm(one, NormSpec::lebesgue(1)) == doctest::Approx(area));
  CHECK(norm(one, NormSpec::lebesgue(2)) == doctest::Approx(std::sqrt(area)));
  CHECK(norm(one, NormSpec::lebesgue(inf)) == doctest::Approx(1.0));
  CHECK(norm(one, NormSpec::mixed(2, 1)) == doctest::Approx(4.0 * std::sqrt(16.0)));
  CHECK(norm(one, NormSpec::mixed(inf, 2)) == doctest::Approx(2.0));
}

TEST_CASE("Lorentz norms") {
  // Indicator of a set of measure m: ||1_A||_{L^{3,1}} = 3 m^{1/3} (layer cake).
  for (int cells : {1, 5, 40}) {
    std::vector<double> vals(64, 0.0);
    for (int c = 0; c < cells; ++c) vals[c] = 1.0;
    const double m = cells * 0.125;
    CHECK(lorentz_norm(vals, 0.125, 3.0, 1.0) == doctest::Approx(3.0 * std::cbrt(m)));
    CHECK(lorentz_norm(vals, 0.125, 3.0, inf) == doctest::Approx(std::cbrt(m)));
  }
  // L^{p,p} = L^p.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> vals(200), meas(200);
  for (auto& v : vals) v = u(rng);
  for (auto& m : meas) m = 0.5 + 0.5 * u(rng);
  double l2 = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) l2 += vals[i] * vals[i] * meas[i];
  CHECK(lorentz_norm(vals, meas, 2.0, 2.0) == doctest::Approx(std::sqrt(l2)));
  CHECK_THROWS_AS(lorentz_norm(vals, meas, 0.5, 1.0), Error);
  const PhaseGrid g = grid(16, 16, 2.0);
  const KineticDensity f = gaussian_bump(g, 1.0, 0.0, 0.0, 1.0, 0.3);
  CHECK(norm(f, NormSpec::lorentz(2, 2)) == doctest::Approx(norm(f, NormSpec::lebesgue(2))));
  CHECK(norm(f, NormSpec::weighted_sobolev(0, 2, 0)) == doctest::Approx(norm(f, NormSpec::lebesgue(2))));
}

TEST_CASE("finite differences converge at the stencil order") {
  auto errors = [](int n, int order) {
    const PhaseGrid g = PhaseGrid::make(n, n, 16.0, 4.0);
    const KineticDensity f = from_fn(g, [](double x, double v) { return (1.1 + std::sin(pi * x / 8.0)) * std::exp(-v * v); });
    const auto dv = velocity_derivative(f.field(), 0, order);
    const auto dx = position_derivative(f.field(), 0, order);
    double ev = 0.0, ex = 0.0;
    for (int i = 0; i < g.n_x; ++i)
      for (int k = 0; k < g.n_v; ++k) {
        const double x = g.x(i), v = g.v(k);
        const std::size_t a = static_cast<std::size_t>(i) * g.n_v + k;
        ev = std::max(ev, std::abs(dv[a] - (1.1 + std::sin(pi * x / 8.0)) * (-2.0 * v) * std::exp(-v * v)));
        ex = std::max(ex, std::abs(dx[a] - pi / 8.0 * std::cos(pi * x / 8.0) * std::exp(-v * v)));
      }
    return std::pair{ev, ex};
  };
  for (int order : {2, 4}) {
    const auto [v1, x1] = errors(64, order);
    const auto [v2, x2] = errors(128, order);
    CHECK(std::log2(v1 / v2) == doctest::Approx(order).epsilon(0.1));
    CHECK(std::log2(x1 / x2) == doctest::Approx(order).epsilon(0.1));
  }
  const PhaseGrid g = grid(8, 8);
  try {
    velocity_derivative(KineticDensity::zeros(g).field(), 0, 3);
    FAIL("expected UnsupportedOrder");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unsupported_order);
  }
}

TEST_CASE("lambda_l1 and lambda_l2 properties") {
  const PhaseGrid g = grid(64, 128, 8.0);
  const InteractionKernel k = InteractionKernel::regularized_coulomb(g, 0.5);
  // Velocity independent data has no velocity gradient except at the box edges; use a Maxwellian.
  const KineticDensity f = maxwellian(g, 1.0, 1.0);
  const KineticDensity f2 = maxwellian(g, 2.0, 1.0);
  const double l1 = lambda_l1(f, k);
  CHECK(l1 > 0.0);
  // Linear in the density.
  CHECK(lambda_l1(f2, k) == doctest::Approx(2.0 * l1).epsilon(1e-10));
  // Uniform in x: the L^{3,1} norm of a constant c on [0, L) is 3 c L^{1/3}; c = int |f'| dv = 2 max f.
  const double c = 2.0 * std::exp(-0.0) / (16.0 * std::sqrt(2.0 * pi));
  CHECK(l1 == doctest::Approx(3.0 * c * std::cbrt(16.0)).epsilon(1e-3));
  // sqrt f scales as sqrt(mass): first term ~ mass, second ~ sqrt(mass).
  const LambdaL2 a = lambda_l2(f, 1.0), b = lambda_l2(f2, 1.0);
  CHECK(b.first == doctest::Approx(2.0 * a.first).epsilon(1e-10));
  CHECK(b.second == doctest::Approx(std::sqrt(2.0) * a.second).epsilon(1e-10));
  CHECK(lambda_l2(f, 4.0).second == doctest::Approx(2.0 * a.second).epsilon(1e-12));
  CHECK(a.total() == doctest::Approx(a.first + a.second));
  const KineticDensity zero = KineticDensity::zeros(g);
  CHECK(lambda_l1(zero, k) == 0.0);
}

TEST_CASE("initial data families keep their mass") {
  const PhaseGrid g = grid(64, 64, 6.0);
  CHECK(maxwellian(g, 2.5, 1.0, 0.5).mass() == doctest::Approx(2.5));
  CHECK(two_stream(g, 1.0, 3.0, 0.5).mass() == doctest::Approx(1.0));
  const KineticDensity b = gaussian_bump(g, 1.0, 1.0, 0.5, 1.0, 0.5);
  CHECK(perturbed(b, 2, 0.1).mass() == doctest::Approx(1.0));
  const KineticDensity r = velocity_reflected(b);
  CHECK(r.at(10, 20) == doctest::Approx(b.at(10, g.n_v - 20)));
  // Translating by a whole number of cells in x is a shift.
  const KineticDensity t = translated(b, 4 * g.dx());
  CHECK(t.at(14, 20) == doctest::Approx(b.at(10, 20)).epsilon(1e-10));
}
