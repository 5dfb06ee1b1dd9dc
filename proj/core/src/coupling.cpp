#include <algorithm>
#include <cmath>
#include <map>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"
#include "kslab/transport.hpp"

namespace kslab {

double Geometry::wrap_distance(double d) const { return wrap(d, period_x); }

double Geometry::squared_distance(const PhasePoint& a, const PhasePoint& b) const {
  const double ddx = dx(a.x, b.x);
  const double dxi = a.xi - b.xi;
  return ddx * ddx + dxi * dxi;
}

double Geometry::distance(const PhasePoint& a, const PhasePoint& b, double p) const {
  const double d2 = squared_distance(a, b);
  if (p == 2.0) return d2;
  return std::pow(std::sqrt(d2), p);
}

double Measure::total() const { return pairwise_sum(weights); }

Measure atomize(const KineticDensity& f, double threshold) {
  const PhaseGrid& g = f.grid();
  if (g.dim != 1) fail(Errc::unsupported_spec, "atomize is implemented for d = 1");
  Measure m;
  const double cut = threshold * f.max_value();
  const double vol = g.cell_volume();
  for (int i = 0; i < g.n_x; ++i)
    for (int k = 0; k < g.n_v; ++k) {
      const double v = f.at(i, k);
      if (v > cut && v > 0.0) {
        m.points.push_back({g.x(i), g.v(k)});
        m.weights.push_back(v * vol);
      }
    }
  const double kept = m.total();
  if (kept > 0.0) {
    const double scale = f.mass() / kept;
    for (double& w : m.weights) w *= scale;
  }
  return m;
}

namespace {

using Key = std::pair<double, double>;

std::map<Key, double> aggregate(const std::vector<PhasePoint>& pts, const std::vector<double>& w) {
  std::map<Key, double> out;
  for (std::size_t a = 0; a < pts.size(); ++a) out[{pts[a].x, pts[a].xi}] += w[a];
  return out;
}

double total_variation(const std::map<Key, double>& p, const std::map<Key, double>& q) {
  double tv = 0.0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    tv += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q)
    if (!p.count(k)) tv += std::abs(v);
  return 0.5 * tv;
}

}  // namespace

DiscreteCoupling::DiscreteCoupling(std::vector<Atom> atoms, const Measure& marginal1, const Measure& marginal2,
                                   double tolerance)
    : atoms_(std::move(atoms)) {
  std::vector<double> w;
  for (const Atom& a : atoms_) {
    if (!(a.w >= 0.0)) fail(Errc::invalid_argument, "DiscreteCoupling: negative atom weight");
    w.push_back(a.w);
  }
  const double total = pairwise_sum(w);
  if (std::abs(total - 1.0) > 1e-12)
    fail(Errc::marginal_mismatch, "DiscreteCoupling: weights sum to " + std::to_string(total) + ", not 1");
  const Measure p1 = first_marginal(), p2 = second_marginal();
  const double tv1 = total_variation(aggregate(p1.points, p1.weights), aggregate(marginal1.points, marginal1.weights));
  const double tv2 = total_variation(aggregate(p2.points, p2.weights), aggregate(marginal2.points, marginal2.weights));
  if (tv1 > tolerance || tv2 > tolerance)
    fail(Errc::marginal_mismatch, "DiscreteCoupling: projections differ from the declared marginals (TV " +
                                      std::to_string(std::max(tv1, tv2)) + ")");
}

DiscreteCoupling DiscreteCoupling::from_atoms(std::vector<Atom> atoms) {
  Measure m1, m2;
  for (const Atom& a : atoms) {
    m1.points.push_back(a.z1);
    m1.weights.push_back(a.w);
    m2.points.push_back(a.z2);
    m2.weights.push_back(a.w);
  }
  return DiscreteCoupling(std::move(atoms), m1, m2, 1e-12);
}

Measure DiscreteCoupling::first_marginal() const {
  Measure m;
  for (const Atom& a : atoms_) {
    m.points.push_back(a.z1);
    m.weights.push_back(a.w);
  }
  return m;
}

Measure DiscreteCoupling::second_marginal() const {
  Measure m;
  for (const Atom& a : atoms_) {
    m.points.push_back(a.z2);
    m.weights.push_back(a.w);
  }
  return m;
}

double DiscreteCoupling::cost(const Geometry& geo, double p) const {
  std::vector<double> terms(atoms_.size());
  for (std::size_t a = 0; a < atoms_.size(); ++a) terms[a] = atoms_[a].w * geo.distance(atoms_[a].z1, atoms_[a].z2, p);
  return pairwise_sum(terms);
}

}  // namespace kslab
