#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "kslab/quantum.hpp"
#include "kslab/transport.hpp"

namespace kslab {

// Operator-valued coupling stored as atoms: gamma(z) = sum_a |phi_a><phi_a| delta(z - z_a), with
// phi_a a grid vector (sum |phi|^2 = <phi|phi> in the dx-scaled convention of coherent_state).
// First marginal: z_a carries mass h <phi_a|phi_a>. Second marginal: sum_a |phi_a><phi_a|.
struct OperatorCoupling {
  PhaseGrid grid;
  PlanckScale scale;
  std::vector<PhasePoint> points;
  Eigen::MatrixXcd factors;  // column a is phi_a

  std::size_t size() const { return points.size(); }
  double atom_mass(std::size_t a) const;
  double total_mass() const;
  Measure first_marginal() const;
  // Mass of the first marginal collected on the nearest grid cell.
  std::vector<double> first_marginal_on_grid() const;
  Eigen::MatrixXcd second_marginal() const;
};

// Checks the two marginal identities (L^1 on the grid for f, scaled trace norm for op); throws
// MarginalMismatch beyond `tolerance` times the mass.
void check_marginals(const OperatorCoupling& g, const KineticDensity& f, const DensityOperator& op,
                     double tolerance = 1e-6);

// sum_a h <phi_a| |x - X_a|_per^2 + |p - Xi_a|^2 |phi_a>.
double semiclassical_cost(const OperatorCoupling& g);
// Same, after checking that the first marginal matches f within 1e-6 in L^1.
double semiclassical_cost(const KineticDensity& f, const OperatorCoupling& g);

// gamma(z) = sum over atoms (z, z', w) of mass * w |psi_z'><psi_z'| / h. Its second marginal is
// the Wick quantization of the second marginal of gamma (scaled to `mass`).
OperatorCoupling toplitz_coupling(const DiscreteCoupling& gamma, const PhaseGrid& grid, PlanckScale scale,
                                  double mass = 1.0);

// Diagonal coupling of f with Wick(f): one atom per grid cell above threshold.
OperatorCoupling toplitz_diagonal(const KineticDensity& f, PlanckScale scale, double threshold = 0.0);

struct WhBracket {
  double lower = 0.0;
  double upper = 0.0;
  double w2_lower = 0.0;  // certified bracket for W2(f, husimi(op))
  double w2_upper = 0.0;
  double gradient_term = 0.0;  // hbar ||grad sqrt(op)||_{L^2}
  std::optional<double> toplitz_upper;
};

// Bracket for W_hbar(f, op)^2 (d = 1):
//   lower = max(hbar, W2(f, husimi)^2 - hbar),
//   upper = (W2(f, husimi) + sqrt(hbar) + hbar ||grad sqrt(op)||_2)^2,
// with W2 replaced by its certified coarse-grained bracket. If g is given (op = Wick(g)) and both
// densities have at most `max_atoms` atoms, the upper bound is also tightened through the Toeplitz
// coupling built on an optimal plan between f and g.
WhBracket wh_bracket(const KineticDensity& f, const DensityOperator& op,
                     const std::optional<KineticDensity>& g = std::nullopt, std::size_t max_atoms = 2000);

}  // namespace kslab
