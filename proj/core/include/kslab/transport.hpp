#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "kslab/phase_space.hpp"

namespace kslab {

struct PhasePoint {
  double x = 0.0;
  double xi = 0.0;
};

// Position axis periodic with period `period_x` (0 means the real line); velocity axis flat.
struct Geometry {
  double period_x = 0.0;

  double dx(double a, double b) const { return period_x > 0.0 ? wrap_distance(a - b) : a - b; }
  double squared_distance(const PhasePoint& a, const PhasePoint& b) const;
  double distance(const PhasePoint& a, const PhasePoint& b, double p) const;

 private:
  double wrap_distance(double d) const;
};

struct Measure {
  std::vector<PhasePoint> points;
  std::vector<double> weights;

  double total() const;
  std::size_t size() const { return points.size(); }
};

// Atoms of a kinetic density: one per cell above threshold * max, renormalized to the original mass.
Measure atomize(const KineticDensity& f, double threshold = 1e-12);

class DiscreteCoupling {
 public:
  struct Atom {
    PhasePoint z1;
    PhasePoint z2;
    double w = 0.0;
  };

  // Weights must sum to 1 within 1e-12 and the projections must match the declared marginals
  // in total variation within `tolerance`; otherwise MarginalMismatch.
  DiscreteCoupling(std::vector<Atom> atoms, const Measure& marginal1, const Measure& marginal2,
                   double tolerance = 1e-6);

  // Declares the projections themselves as marginals.
  static DiscreteCoupling from_atoms(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  Measure first_marginal() const;
  Measure second_marginal() const;
  double cost(const Geometry& geo, double p = 2.0) const;

 private:
  DiscreteCoupling() = default;
  std::vector<Atom> atoms_;
};

enum class TransportMethod { exact, entropic };

struct TransportOptions {
  Geometry geometry;
  std::size_t max_atoms = 2000;
  double threshold = 1e-12;
  // Entropic solver.
  double epsilon = 5e-4;          // final regularization, relative to the largest cost
  double epsilon_decay = 0.5;
  double tolerance = 1e-6;        // L1 marginal violation at the final level
  int max_iterations = 50000;     // per epsilon level
  bool debias = true;
  bool keep_plan = false;
};

struct TransportResult {
  double value = 0.0;     // W_p
  double cost = 0.0;      // optimal (or entropic) transport cost, i.e. W_p^p
  TransportMethod method = TransportMethod::exact;
  double epsilon = 0.0;   // absolute regularization of the last level (entropic only)
  double duality_gap = 0.0;
  int iterations = 0;
  std::vector<DiscreteCoupling::Atom> plan;  // nonzero entries when keep_plan
};

// Exact optimal transport by network simplex on the bipartite graph; cost[i][j] dense.
struct ExactPlan {
  double cost = 0.0;
  std::vector<std::size_t> from, to;
  std::vector<double> mass;
  long pivots = 0;
};
ExactPlan network_simplex(const std::vector<double>& supply, const std::vector<double>& demand,
                          const Eigen::MatrixXd& cost);

struct EntropicResult {
  double objective = 0.0;   // <a,f> + <b,g>
  double primal = 0.0;      // <C,P> + eps KL(P | a x b)
  double transport = 0.0;   // <C,P>
  double epsilon = 0.0;
  double marginal_error = 0.0;
  int iterations = 0;
  Eigen::VectorXd f, g;
};
EntropicResult sinkhorn(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost,
                        const TransportOptions& opt);
// OT_eps(a, a) for a symmetric cost through the averaged update f <- (f + T f) / 2.
EntropicResult sinkhorn_symmetric(const Eigen::VectorXd& a, const Eigen::MatrixXd& cost, const TransportOptions& opt);

TransportResult wasserstein(const Measure& mu, const Measure& nu, double p, TransportMethod method,
                            const TransportOptions& opt = {});
TransportResult wasserstein(const KineticDensity& f1, const KineticDensity& f2, double p, TransportMethod method,
                            TransportOptions opt = {});

// Certified bracket for W_2 between two densities on the same grid through coarse binning, with
// r the root-mean-square distance to bin barycentres:
//   W2(f_c,g_c) - r_f - r_g <= W2(f,g) <= sqrt(W2(f_c,g_c)^2 + r_f^2 + r_g^2).
struct W2Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double coarse = 0.0;
  double radius_f = 0.0;
  double radius_g = 0.0;
  int bin = 1;
};
W2Bracket w2_bracket(const KineticDensity& f, const KineticDensity& g, std::size_t max_atoms = 2000);

void write_coupling_csv(const std::string& path, const DiscreteCoupling& gamma);
DiscreteCoupling read_coupling_csv(const std::string& path);

}  // namespace kslab
