#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"
#include "kslab/transport.hpp"

namespace kslab {

namespace {

Eigen::MatrixXd cost_matrix(const Measure& mu, const Measure& nu, double p, const Geometry& geo) {
  Eigen::MatrixXd c(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) c(i, j) = geo.distance(mu.points[i], nu.points[j], p);
  return c;
}

double entropic_cost(const Measure& mu, const Measure& nu, double p, const TransportOptions& opt, EntropicResult* keep) {
  const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(mu.weights.data(), mu.weights.size());
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(nu.weights.data(), nu.weights.size());
  EntropicResult r = sinkhorn(a, b, cost_matrix(mu, nu, p, opt.geometry), opt);
  const double v = r.objective;
  if (keep) *keep = std::move(r);
  return v;
}

double self_entropic_cost(const Measure& mu, double p, const TransportOptions& opt) {
  const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(mu.weights.data(), mu.weights.size());
  return sinkhorn_symmetric(a, cost_matrix(mu, mu, p, opt.geometry), opt).objective;
}

}  // namespace

TransportResult wasserstein(const Measure& mu, const Measure& nu, double p, TransportMethod method,
                            const TransportOptions& opt) {
  if (!(p >= 1.0) || std::isinf(p)) fail(Errc::invalid_argument, "wasserstein: p must be finite and >= 1");
  if (mu.size() == 0 || nu.size() == 0) fail(Errc::invalid_argument, "wasserstein: empty measure");
  const double m1 = mu.total(), m2 = nu.total();
  if (std::abs(m1 - m2) > 1e-10 * std::max(m1, m2))
    fail(Errc::mass_mismatch, "wasserstein: masses differ (" + std::to_string(m1) + " vs " + std::to_string(m2) + ")");
  TransportResult res;
  res.method = method;
  if (method == TransportMethod::exact) {
    if (mu.size() > opt.max_atoms || nu.size() > opt.max_atoms)
      fail(Errc::problem_too_large, "wasserstein: " + std::to_string(std::max(mu.size(), nu.size())) +
                                        " atoms exceed the exact-solver cap of " + std::to_string(opt.max_atoms));
    const ExactPlan plan = network_simplex(mu.weights, nu.weights, cost_matrix(mu, nu, p, opt.geometry));
    res.cost = plan.cost;
    res.iterations = static_cast<int>(plan.pivots);
    if (opt.keep_plan)
      for (std::size_t e = 0; e < plan.mass.size(); ++e)
        res.plan.push_back({mu.points[plan.from[e]], nu.points[plan.to[e]], plan.mass[e]});
  } else {
    EntropicResult main;
    const double ab = entropic_cost(mu, nu, p, opt, &main);
    double cost = ab;
    if (opt.debias) {
      const double aa = self_entropic_cost(mu, p, opt);
      const double bb = self_entropic_cost(nu, p, opt);
      cost = ab - 0.5 * (aa + bb);
    }
    res.cost = std::max(cost, 0.0);
    res.epsilon = main.epsilon;
    res.duality_gap = main.primal - main.objective;
    res.iterations = main.iterations;
    spdlog::debug("sinkhorn: eps = {}, duality gap = {}, iterations = {}", res.epsilon, res.duality_gap, res.iterations);
  }
  res.value = std::pow(res.cost, 1.0 / p);
  return res;
}

TransportResult wasserstein(const KineticDensity& f1, const KineticDensity& f2, double p, TransportMethod method,
                            TransportOptions opt) {
  if (opt.geometry.period_x == 0.0) opt.geometry.period_x = f1.grid().length_x;
  const double m1 = f1.mass(), m2 = f2.mass();
  if (std::abs(m1 - m2) > 1e-10 * std::max(m1, m2)) fail(Errc::mass_mismatch, "wasserstein: masses differ");
  return wasserstein(atomize(f1, opt.threshold), atomize(f2, opt.threshold), p, method, opt);
}

namespace {

struct Coarse {
  Measure measure;
  double radius = 0.0;
};

Coarse coarsen(const KineticDensity& f, int bx, int bv) {
  const PhaseGrid& g = f.grid();
  const double vol = g.cell_volume();
  const double L = g.length_x;
  std::map<std::pair<int, int>, std::vector<std::pair<PhasePoint, double>>> bins;
  for (int i = 0; i < g.n_x; ++i)
    for (int k = 0; k < g.n_v; ++k) {
      const double w = f.at(i, k) * vol;
      if (w > 0.0) bins[{i / bx, k / bv}].push_back({{g.x(i), g.v(k)}, w});
    }
  Coarse c;
  std::vector<double> spread;
  for (const auto& [key, cells] : bins) {
    // Barycentre relative to the bin centre so that the periodic wrap is harmless.
    const double cx = g.x(key.first * bx) + 0.5 * (bx - 1) * g.dx();
    double w = 0.0, mx = 0.0, mv = 0.0;
    for (const auto& [z, wz] : cells) {
      w += wz;
      mx += wz * wrap(z.x - cx, L);
      mv += wz * z.xi;
    }
    mx /= w;
    mv /= w;
    for (const auto& [z, wz] : cells) {
      const double ex = wrap(z.x - cx, L) - mx, ev = z.xi - mv;
      spread.push_back(wz * (ex * ex + ev * ev));
    }
    c.measure.points.push_back({wrap(cx + mx, L), mv});
    c.measure.weights.push_back(w);
  }
  c.radius = std::sqrt(pairwise_sum(spread));
  return c;
}

}  // namespace

W2Bracket w2_bracket(const KineticDensity& f, const KineticDensity& g, std::size_t max_atoms) {
  if (f.grid().length_x != g.grid().length_x) fail(Errc::grid_mismatch, "w2_bracket: different periods");
  const double m1 = f.mass(), m2 = g.mass();
  if (std::abs(m1 - m2) > 1e-10 * std::max(m1, m2)) fail(Errc::mass_mismatch, "w2_bracket: masses differ");
  int bin = 1;
  Coarse cf, cg;
  while (true) {
    cf = coarsen(f, bin, bin);
    cg = coarsen(g, bin, bin);
    if (cf.measure.size() <= max_atoms && cg.measure.size() <= max_atoms) break;
    bin *= 2;
    if (bin > std::max({f.grid().n_x, f.grid().n_v, g.grid().n_x, g.grid().n_v}))
      fail(Errc::problem_too_large, "w2_bracket: cannot coarsen below the atom cap");
  }
  // Rescale the coarse weights so both carry exactly the same mass.
  const double s = cf.measure.total() / cg.measure.total();
  for (double& w : cg.measure.weights) w *= s;
  TransportOptions opt;
  opt.geometry.period_x = f.grid().length_x;
  opt.max_atoms = max_atoms;
  const TransportResult r = wasserstein(cf.measure, cg.measure, 2.0, TransportMethod::exact, opt);
  W2Bracket out;
  out.coarse = r.value;
  out.radius_f = cf.radius;
  out.radius_g = cg.radius;
  out.lower = std::max(0.0, r.value - cf.radius - cg.radius);
  // Gluing f -> bin barycentres -> optimal coarse plan -> g with product couplings inside each
  // pair of bins costs exactly coarse^2 + r_f^2 + r_g^2.
  out.upper = std::sqrt(r.cost + cf.radius * cf.radius + cg.radius * cg.radius);
  out.bin = bin;
  return out;
}

void write_coupling_csv(const std::string& path, const DiscreteCoupling& gamma) {
  std::ofstream os(path);
  if (!os) fail(Errc::io_error, "cannot open " + path);
  os << std::setprecision(17);
  os << "x1,xi1,x2,xi2,w\n";
  for (const auto& a : gamma.atoms()) os << a.z1.x << ',' << a.z1.xi << ',' << a.z2.x << ',' << a.z2.xi << ',' << a.w << '\n';
}

DiscreteCoupling read_coupling_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::io_error, "cannot open " + path);
  std::string line;
  std::getline(is, line);
  if (line != "x1,xi1,x2,xi2,w") fail(Errc::io_error, path + ": unexpected coupling header");
  std::vector<DiscreteCoupling::Atom> atoms;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double v[5];
    for (double& x : v) {
      if (!std::getline(ss, cell, ',')) fail(Errc::io_error, path + ":" + std::to_string(lineno) + ": missing column");
      try {
        x = std::stod(cell);
      } catch (const std::exception&) {
        fail(Errc::io_error, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    atoms.push_back({{v[0], v[1]}, {v[2], v[3]}, v[4]});
  }
  return DiscreteCoupling::from_atoms(std::move(atoms));
}

}  // namespace kslab
