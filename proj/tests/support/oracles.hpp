#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "kslab/initial_data.hpp"
#include "kslab/numeric.hpp"
#include "kslab/phase_space.hpp"

namespace oracle {

// Minimum-cost transport by enumerating every basic feasible solution of the m x n transport
// polytope: pick m+n-1 cells forming a spanning tree, solve the flows, keep the nonnegative ones.
inline double brute_force_transport(const std::vector<double>& a, const std::vector<double>& b, const Eigen::MatrixXd& c) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  const int cells = m * n, k = m + n - 1;
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    // Peel leaves: a row or column with exactly one chosen cell fixes that flow.
    std::vector<double> ra(a), cb(b);
    std::vector<char> used(k, 0), row_done(m, 0), col_done(n, 0);
    std::vector<double> flow(k, 0.0);
    bool ok = true;
    for (int it = 0; it < k && ok; ++it) {
      bool found = false;
      for (int r = 0; r < m && !found; ++r) {
        if (row_done[r]) continue;
        int cnt = 0, last = -1;
        for (int e = 0; e < k; ++e)
          if (!used[e] && pick[e] / n == r) ++cnt, last = e;
        if (cnt == 1) {
          const int col = pick[last] % n;
          flow[last] = ra[r];
          cb[col] -= ra[r];
          ra[r] = 0.0;
          used[last] = 1;
          row_done[r] = 1;
          found = true;
        }
      }
      for (int col = 0; col < n && !found; ++col) {
        if (col_done[col]) continue;
        int cnt = 0, last = -1;
        for (int e = 0; e < k; ++e)
          if (!used[e] && pick[e] % n == col) ++cnt, last = e;
        if (cnt == 1) {
          const int r = pick[last] / n;
          flow[last] = cb[col];
          ra[r] -= cb[col];
          cb[col] = 0.0;
          used[last] = 1;
          col_done[col] = 1;
          found = true;
        }
      }
      if (!found) ok = false;  // a cycle: not a basis
    }
    if (ok) {
      double resid = 0.0, cost = 0.0;
      bool feasible = true;
      for (double r : ra) resid += std::abs(r);
      for (double r : cb) resid += std::abs(r);
      for (int e = 0; e < k; ++e) {
        if (flow[e] < -1e-14) feasible = false;
        cost += flow[e] * c(pick[e] / n, pick[e] % n);
      }
      if (feasible && resid < 1e-12) best = std::min(best, cost);
    }
    int i = k - 1;
    while (i >= 0 && pick[i] == cells - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

// O(n^2) real-space force: E_i = -sum_j K'(wrap(x_i - x_j)) (rho_j - mean) dx.
inline std::vector<double> direct_force(const kslab::SpatialField& rho, const kslab::InteractionKernel& k) {
  const auto& g = rho.grid;
  const int n = g.n_x;
  double mean = 0.0;
  for (double r : rho.values) mean += r;
  mean /= n;
  std::vector<double> e(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += k.gradient(kslab::wrap((i - j) * g.dx(), g.length_x)) * (rho.values[j] - mean);
    e[i] = -s * g.dx();
  }
  return e;
}

// Strictly positive random density built from a few random bumps.
inline kslab::KineticDensity random_density(const kslab::PhaseGrid& g, std::mt19937_64& rng, int bumps = 3) {
  std::uniform_real_distribution<double> ux(-0.25 * g.length_x, 0.25 * g.length_x), uv(-0.4 * g.v_max, 0.4 * g.v_max),
      uw(0.3, 1.5), us(0.3, 1.0);
  std::vector<double> vals(g.size(), 0.0);
  for (int b = 0; b < bumps; ++b) {
    const double x0 = ux(rng), v0 = uv(rng), w = uw(rng), sx = us(rng), sv = us(rng);
    for (int i = 0; i < g.n_x; ++i)
      for (int k = 0; k < g.n_v; ++k) {
        const double dx = kslab::wrap(g.x(i) - x0, g.length_x), dv = g.v(k) - v0;
        vals[static_cast<std::size_t>(i) * g.n_v + k] += w * std::exp(-0.5 * (dx * dx / (sx * sx) + dv * dv / (sv * sv)));
      }
  }
  const double m = kslab::grid_mass(g, vals);
  for (double& v : vals) v /= m;
  return kslab::KineticDensity(g, std::move(vals));
}

// Smooth random density whose velocity content stays well inside the box, so that nothing
// reaches the momentum wrap of a paired grid.
inline kslab::KineticDensity interior_density(const kslab::PhaseGrid& g, std::mt19937_64& rng, int bumps = 3) {
  std::uniform_real_distribution<double> ux(-0.25 * g.length_x, 0.25 * g.length_x), uv(-0.1 * g.v_max, 0.1 * g.v_max),
      uw(0.3, 1.5), usx(0.3, 1.0), usv(0.3, std::max(0.3, 0.08 * g.v_max));
  std::vector<double> vals(g.size(), 0.0);
  for (int b = 0; b < bumps; ++b) {
    const double x0 = ux(rng), v0 = uv(rng), w = uw(rng), sx = usx(rng), sv = usv(rng);
    for (int i = 0; i < g.n_x; ++i)
      for (int k = 0; k < g.n_v; ++k) {
        const double dx = kslab::wrap(g.x(i) - x0, g.length_x), dv = g.v(k) - v0;
        vals[static_cast<std::size_t>(i) * g.n_v + k] += w * std::exp(-0.5 * (dx * dx / (sx * sx) + dv * dv / (sv * sv)));
      }
  }
  const double m = kslab::grid_mass(g, vals);
  for (double& v : vals) v /= m;
  return kslab::KineticDensity(g, std::move(vals));
}

// Random nonnegative density with rough cellwise noise (not band-limited).
inline kslab::KineticDensity random_rough_density(const kslab::PhaseGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> vals(g.size());
  for (double& v : vals) v = u(rng) < 0.3 ? 0.0 : u(rng);
  const double m = kslab::grid_mass(g, vals);
  for (double& v : vals) v /= m;
  return kslab::KineticDensity(g, std::move(vals));
}

}  // namespace oracle
