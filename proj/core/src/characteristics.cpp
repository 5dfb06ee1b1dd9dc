#include <algorithm>
#include <cmath>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"
#include "kslab/vlasov.hpp"

namespace kslab {

const std::vector<PhasePoint>& FlowMap::at(double t) const {
  for (std::size_t m = 0; m < times.size(); ++m)
    if (std::abs(times[m] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return states[m];
  fail(Errc::invalid_argument, "FlowMap: time " + std::to_string(t) + " was not sampled");
}

FlowMap characteristics(const FieldFunction& field, const std::vector<PhasePoint>& seeds,
                        const std::vector<double>& sample_times, double dt, double v_max) {
  if (!(dt > 0.0)) fail(Errc::invalid_argument, "characteristics: dt must be positive");
  std::vector<double> times = sample_times;
  std::sort(times.begin(), times.end());
  if (!times.empty() && times.front() < 0.0) fail(Errc::invalid_argument, "characteristics: negative sample time");
  FlowMap flow;
  flow.seeds = seeds;
  flow.times = times;
  std::vector<PhasePoint> z = seeds;
  double t = 0.0;
  auto check = [&](const std::vector<PhasePoint>& pts) {
    if (v_max <= 0.0) return;
    for (const auto& p : pts)
      if (std::abs(p.xi) > v_max)
        fail(Errc::out_of_domain, "characteristics: trajectory velocity " + std::to_string(p.xi) + " exceeds v_max");
  };
  check(z);
  for (double target : times) {
    while (target - t > 1e-13 * std::max(1.0, target)) {
      const double h = std::min(dt, target - t);
      for (auto& p : z) {
        const double vh = p.xi + 0.5 * h * field(t, p.x);
        p.x += h * vh;
        p.xi = vh + 0.5 * h * field(t + h, p.x);
      }
      t += h;
      check(z);
    }
    t = target;
    flow.states.push_back(z);
  }
  return flow;
}

FlowMap characteristics(const FieldHistory& history, const std::vector<PhasePoint>& seeds,
                        const std::vector<double>& sample_times, double dt) {
  if (history.empty()) fail(Errc::history_gap, "characteristics: empty field history");
  const double t_end = sample_times.empty() ? 0.0 : *std::max_element(sample_times.begin(), sample_times.end());
  const double slack = 1e-9 * std::max(1.0, t_end);
  if (history.t_begin() > slack || history.t_end() < t_end - slack)
    fail(Errc::history_gap, "characteristics: field history does not cover [0, t_end]");
  if (history.max_gap() > dt * (1.0 + 1e-9))
    fail(Errc::history_gap, "characteristics: field history is sampled more coarsely than dt");
  const double L = history.grid().length_x;
  auto field = [&history, L](double t, double x) { return history(t, wrap(x, L)); };
  return characteristics(field, seeds, sample_times, dt, history.grid().v_max);
}

DiscreteCoupling transport_coupling(const DiscreteCoupling& gamma0, const FlowMap& flow1, const FlowMap& flow2,
                                    double t) {
  const auto& atoms = gamma0.atoms();
  if (atoms.size() != flow1.seeds.size() || atoms.size() != flow2.seeds.size())
    fail(Errc::marginal_mismatch, "transport_coupling: coupling atoms and flow seeds differ in number");
  auto same = [](const PhasePoint& a, const PhasePoint& b) {
    return std::abs(a.x - b.x) <= 1e-12 * std::max(1.0, std::abs(a.x)) &&
           std::abs(a.xi - b.xi) <= 1e-12 * std::max(1.0, std::abs(a.xi));
  };
  for (std::size_t a = 0; a < atoms.size(); ++a)
    if (!same(atoms[a].z1, flow1.seeds[a]) || !same(atoms[a].z2, flow2.seeds[a]))
      fail(Errc::marginal_mismatch, "transport_coupling: atom " + std::to_string(a) + " is not on a seed pair");
  const auto& s1 = flow1.at(t);
  const auto& s2 = flow2.at(t);
  std::vector<DiscreteCoupling::Atom> out(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a) out[a] = {s1[a], s2[a], atoms[a].w};
  return DiscreteCoupling::from_atoms(std::move(out));
}

}  // namespace kslab
