#include <algorithm>
#include <cmath>
#include <numeric>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"
#include "kslab/phase_space.hpp"

namespace kslab {

NormSpec NormSpec::lebesgue(double p) {
  NormSpec s;
  s.family = NormFamily::lebesgue;
  s.p = p;
  return s;
}

NormSpec NormSpec::mixed(double p_x, double q_xi) {
  NormSpec s;
  s.family = NormFamily::mixed;
  s.p = p_x;
  s.q = q_xi;
  return s;
}

NormSpec NormSpec::lorentz(double p, double q) {
  NormSpec s;
  s.family = NormFamily::lorentz;
  s.p = p;
  s.q = q;
  return s;
}

NormSpec NormSpec::lorentz_mixed(double p, double q, double q_xi) {
  NormSpec s;
  s.family = NormFamily::lorentz_mixed;
  s.p = p;
  s.q = q;
  s.q_xi = q_xi;
  return s;
}

NormSpec NormSpec::weighted_sobolev(int k, double p, double n) {
  NormSpec s;
  s.family = NormFamily::weighted_sobolev;
  s.k = k;
  s.p = p;
  s.n = n;
  return s;
}

namespace {

void validate(const NormSpec& s) {
  auto bad = [](double e) { return !(e >= 1.0); };
  if (bad(s.p)) fail(Errc::unsupported_spec, "norm exponent p must lie in [1, inf]");
  if ((s.family == NormFamily::mixed || s.family == NormFamily::lorentz ||
       s.family == NormFamily::lorentz_mixed) && bad(s.q))
    fail(Errc::unsupported_spec, "norm exponent q must lie in [1, inf]");
  if (s.family == NormFamily::lorentz_mixed && bad(s.q_xi))
    fail(Errc::unsupported_spec, "inner velocity exponent must lie in [1, inf]");
  if (s.family == NormFamily::weighted_sobolev) {
    if (s.k < 0 || s.k != std::floor(s.k)) fail(Errc::unsupported_spec, "Sobolev order k must be a nonnegative integer");
    if (s.n < 0) fail(Errc::unsupported_spec, "Sobolev weight exponent n must be nonnegative");
  }
  if (s.stencil_order != 2 && s.stencil_order != 4) fail(Errc::unsupported_spec, "stencil order must be 2 or 4");
}

// (sum |v|^p * vol)^{1/p}, or max |v| when p = inf.
double lp(std::span<const double> v, double vol, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = std::pow(std::abs(v[i]), p);
  return std::pow(pairwise_sum(t) * vol, 1.0 / p);
}

// Velocity-block norms for each spatial point.
std::vector<double> inner_velocity_norms(const PhaseField& f, double q) {
  const std::size_t nx = f.grid.spatial_size();
  const std::size_t nv = f.grid.velocity_size();
  const double vol = f.grid.velocity_cell_volume();
  std::vector<double> out(nx);
  for (std::size_t X = 0; X < nx; ++X) out[X] = lp(std::span<const double>(f.values).subspan(X * nv, nv), vol, q);
  return out;
}

std::vector<double> difference(std::span<const double> v, std::size_t stride, std::size_t n, double h,
                               bool periodic, int order) {
  if (order != 2 && order != 4) fail(Errc::unsupported_order, "finite differences are of order 2 or 4");
  std::vector<double> out(v.size(), 0.0);
  auto at = [&](std::size_t idx, long c, long off) -> double {
    long cc = c + off;
    if (periodic) {
      cc = ((cc % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n);
    } else if (cc < 0 || cc >= static_cast<long>(n)) {
      return 0.0;
    }
    return v[idx + (cc - c) * static_cast<long>(stride)];
  };
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    const long c = static_cast<long>((idx / stride) % n);
    if (order == 2) {
      out[idx] = (at(idx, c, 1) - at(idx, c, -1)) / (2.0 * h);
    } else {
      out[idx] = (-at(idx, c, 2) + 8.0 * at(idx, c, 1) - 8.0 * at(idx, c, -1) + at(idx, c, -2)) / (12.0 * h);
    }
  }
  return out;
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

double sobolev(const PhaseField& f, const NormSpec& s) {
  const int d = f.grid.dim;
  const int order = static_cast<int>(s.k);
  const double vol = f.grid.cell_volume();
  const std::size_t nv = f.grid.velocity_size();
  // Weight <xi>^n per cell.
  std::vector<double> weight(f.values.size());
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    std::size_t V = idx % nv;
    double xi2 = 0.0;
    for (int a = d - 1; a >= 0; --a) {
      const double v = f.grid.v(static_cast<int>(V % f.grid.n_v));
      xi2 += v * v;
      V /= f.grid.n_v;
    }
    weight[idx] = std::pow(std::sqrt(1.0 + xi2), s.n);
  }
  // Enumerate multi-indices |alpha| <= k over 2d variables by breadth-first application of
  // single derivatives, keeping each distinct alpha once (derivatives commute).
  struct Node {
    std::vector<int> alpha;
    std::vector<double> values;
  };
  std::vector<Node> layer{{std::vector<int>(2 * d, 0), f.values}};
  double total = 0.0;
  for (int level = 0; level <= order; ++level) {
    std::vector<Node> next;
    for (const Node& node : layer) {
      std::vector<double> w(node.values.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight[i] * node.values[i];
      const double nrm = lp(w, vol, s.p);
      total += nrm * nrm;
      if (level == order) continue;
      int last = 0;
      for (int v = 0; v < 2 * d; ++v)
        if (node.alpha[v] > 0) last = v;
      for (int var = last; var < 2 * d; ++var) {
        Node child{node.alpha, {}};
        child.alpha[var] += 1;
        PhaseField tmp{f.grid, node.values};
        child.values = var < d ? position_derivative(tmp, var, s.stencil_order)
                               : velocity_derivative(tmp, var - d, s.stencil_order);
        next.push_back(std::move(child));
      }
    }
    layer.swap(next);
  }
  return std::sqrt(total);
}

}  // namespace

std::vector<double> velocity_derivative(const PhaseField& f, int axis, int order) {
  if (axis < 0 || axis >= f.grid.dim) fail(Errc::invalid_argument, "velocity axis out of range");
  const std::size_t stride = ipow(f.grid.n_v, f.grid.dim - 1 - axis);
  return difference(f.values, stride, f.grid.n_v, f.grid.dv(), false, order);
}

std::vector<double> position_derivative(const PhaseField& f, int axis, int order) {
  if (axis < 0 || axis >= f.grid.dim) fail(Errc::invalid_argument, "position axis out of range");
  const std::size_t stride = f.grid.velocity_size() * ipow(f.grid.n_x, f.grid.dim - 1 - axis);
  return difference(f.values, stride, f.grid.n_x, f.grid.dx(), true, order);
}

double lorentz_norm(std::span<const double> values, std::span<const double> measures, double p, double q) {
  if (values.size() != measures.size()) fail(Errc::invalid_argument, "lorentz_norm: size mismatch");
  if (!(p >= 1.0) || !(q >= 1.0)) fail(Errc::unsupported_spec, "Lorentz exponents must lie in [1, inf]");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(values[a]) > std::abs(values[b]); });
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double S = 0.0;
  if (std::isinf(q)) {
    double best = 0.0;
    for (std::size_t i : order) {
      const double v = std::abs(values[i]);
      if (v == 0.0) break;
      S += measures[i];
      best = std::max(best, v * std::pow(S, 1.0 / p));
    }
    return best;
  }
  std::vector<double> terms;
  terms.reserve(values.size());
  for (std::size_t i : order) {
    const double v = std::abs(values[i]);
    if (v == 0.0) break;
    const double prev = std::pow(S, q / p);
    S += measures[i];
    terms.push_back(std::pow(v, q) * (p / q) * (std::pow(S, q / p) - prev));
  }
  return std::pow(pairwise_sum(terms), 1.0 / q);
}

double lorentz_norm(std::span<const double> values, double cell_measure, double p, double q) {
  std::vector<double> m(values.size(), cell_measure);
  return lorentz_norm(values, m, p, q);
}

double norm(const PhaseField& f, const NormSpec& spec) {
  validate(spec);
  if (f.values.size() != f.grid.size()) fail(Errc::invalid_argument, "norm: value count does not match grid");
  switch (spec.family) {
    case NormFamily::lebesgue:
      return lp(f.values, f.grid.cell_volume(), spec.p);
    case NormFamily::mixed: {
      const auto inner = inner_velocity_norms(f, spec.q);
      return lp(inner, f.grid.spatial_cell_volume(), spec.p);
    }
    case NormFamily::lorentz:
      return lorentz_norm(f.values, f.grid.cell_volume(), spec.p, spec.q);
    case NormFamily::lorentz_mixed: {
      const auto inner = inner_velocity_norms(f, spec.q_xi);
      return lorentz_norm(inner, f.grid.spatial_cell_volume(), spec.p, spec.q);
    }
    case NormFamily::weighted_sobolev:
      return sobolev(f, spec);
  }
  return 0.0;
}

double norm(const KineticDensity& f, const NormSpec& spec) { return norm(f.field(), spec); }

double norm(const SpatialField& f, const NormSpec& spec) {
  validate(spec);
  if (f.values.size() != f.grid.spatial_size()) fail(Errc::invalid_argument, "norm: value count does not match grid");
  const double vol = f.grid.spatial_cell_volume();
  switch (spec.family) {
    case NormFamily::lebesgue:
      return lp(f.values, vol, spec.p);
    case NormFamily::lorentz:
      return lorentz_norm(f.values, vol, spec.p, spec.q);
    case NormFamily::weighted_sobolev: {
      double total = 0.0;
      std::vector<double> cur = f.values;
      for (int level = 0; level <= static_cast<int>(spec.k); ++level) {
        if (level > 0) {
          if (f.grid.dim != 1) fail(Errc::unsupported_spec, "spatial Sobolev norms are implemented for d = 1");
          cur = difference(cur, 1, f.grid.n_x, f.grid.dx(), true, spec.stencil_order);
        }
        const double nrm = lp(cur, vol, spec.p);
        total += nrm * nrm;
      }
      return std::sqrt(total);
    }
    default:
      fail(Errc::unsupported_spec, "mixed norm families need a phase-space function");
  }
}

namespace {

PhaseField abs_velocity_gradient(const PhaseField& f) {
  PhaseField g{f.grid, std::vector<double>(f.values.size(), 0.0)};
  for (int a = 0; a < f.grid.dim; ++a) {
    const auto d = velocity_derivative(f, a, 4);
    for (std::size_t i = 0; i < d.size(); ++i) g.values[i] += d[i] * d[i];
  }
  for (double& v : g.values) v = std::sqrt(v);
  return g;
}

}  // namespace

double lambda_l1(const KineticDensity& f, const InteractionKernel& kernel, LorentzPair pair) {
  if (!f.grid().same_spatial(kernel.grid())) fail(Errc::grid_mismatch, "lambda_l1: kernel grid differs");
  const PhaseField g = abs_velocity_gradient(f.field());
  return norm(g, NormSpec::lorentz_mixed(pair.p, pair.q, 1.0));
}

LambdaL2 lambda_l2(const KineticDensity& f, double c_inf, LorentzPair pair) {
  for (double v : f.values())
    if (v < -1e-12) fail(Errc::negative_density, "lambda_l2: negative density");
  PhaseField root{f.grid(), std::vector<double>(f.values().begin(), f.values().end())};
  for (double& v : root.values) v = std::sqrt(std::max(v, 0.0));
  const PhaseField g = abs_velocity_gradient(root);
  const SpatialField rho = spatial_density(f);
  LambdaL2 out;
  out.first = std::sqrt(norm(rho, NormSpec::lebesgue(inf))) * norm(g, NormSpec::mixed(pair.p, 2.0));
  out.second = std::sqrt(c_inf) * norm(g, NormSpec::lorentz_mixed(pair.p, pair.q, 1.0));
  return out;
}

}  // namespace kslab
