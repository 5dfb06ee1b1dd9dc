#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kslab/hartree.hpp"
#include "kslab/phase_space.hpp"
#include "kslab/quantum.hpp"
#include "kslab/semiclassical.hpp"
#include "kslab/vlasov.hpp"

namespace kslab {

struct RateFit {
  std::vector<double> hbar;
  std::vector<double> values;
  double slope = 0.0;
  double half_width = 0.0;  // confidence half-width of the slope
  double intercept = 0.0;   // log value at hbar = 1
  double confidence = 0.95;
};

// Least-squares slope of log(value) against log(hbar). Needs >= 4 points spanning a factor >= 8
// (InsufficientSweep) and positive values (DegenerateSweep).
RateFit fit_rate(const std::vector<double>& hbar, const std::vector<double>& values, double confidence = 0.95);

struct StabilityEnvelope {
  std::string name;
  std::vector<double> t;
  std::vector<double> metric;
  std::vector<double> bound;
  std::vector<double> rate;      // pointwise lambda(t_k)
  std::vector<double> integral;  // Lambda(t_k) or lambda(t_k) of the double exponential
  std::vector<double> theta;
  std::vector<int> verdict;
  double constant = 0.0;
  double slack = 0.1;

  bool pass() const;
  double worst_ratio() const;  // max metric / bound
};

// Trapezoidal cumulative integral, starting at 0.
std::vector<double> cumulative_integral(const std::vector<double>& t, const std::vector<double>& y);

// b(t) = m(0) exp(C int_0^t rate).
StabilityEnvelope gronwall_envelope(std::string name, const std::vector<double>& t, const std::vector<double>& metric,
                                    const std::vector<double>& rate, double constant, double slack = 0.1);
// b(t) = scale exp(C int_0^t rate) with an explicit prefactor.
StabilityEnvelope scaled_gronwall_envelope(std::string name, const std::vector<double>& t,
                                           const std::vector<double>& metric, const std::vector<double>& rate,
                                           double constant, double prefactor, double slack = 0.1);
// b(t) = W(0)^{exp(theta lambda)} exp(exp(lambda)), theta = sign(ln W(t)), lambda = int_0^t c.
StabilityEnvelope double_exponential_envelope(std::string name, const std::vector<double>& t,
                                              const std::vector<double>& w, const std::vector<double>& c,
                                              double slack = 0.1);
// Re-evaluates the verdicts of an envelope from its stored series.
void apply_verdict(StabilityEnvelope& env);

struct PairedRunOptions {
  double t_end = 1.0;
  double dt = 0.01;
  int record_every = 10;
  double slack = 0.1;
  LorentzPair pair;
};

// ||grad K||_{L^{p',inf}} with 1/p + 1/p' = 1, on the sampled gradient.
double kernel_lorentz_constant(const InteractionKernel& kernel, LorentzPair pair = {});
// Sup over a probe family (translated deltas, signed pairs, bumps) of
// ||grad K * h||_{L^{p',inf}} / ||h||_{L^1}; never below kernel_lorentz_constant.
double calibrate_l1_constant(const InteractionKernel& kernel, LorentzPair pair = {});
// 2 max(||grad K||_{L^{p',inf}}, ||grad K||_{L^{p'}}).
double calibrate_l2_constant(const InteractionKernel& kernel, LorentzPair pair = {});

// f2 is the strong solution. m = ||f1 - f2||_1, bound m(0) exp(C int lambda_l1(f2)).
StabilityEnvelope check_l1_stability(const KineticDensity& f1, const KineticDensity& f2, const InteractionKernel& kernel,
                                     double constant, const PairedRunOptions& opt = {});

struct L2Stability {
  StabilityEnvelope main;       // ||sqrt f1 - sqrt f2||_2
  StabilityEnvelope corollary;  // ||f1 - f2||_2 against 2 C_inf^{1/2} ||f1^0 - f2^0||_1^{1/2} e^Lambda
  double c_inf = 0.0;
  bool pointwise_consistent = true;  // ||f1-f2||_2 <= 2 C_inf^{1/2} ||sqrt f1 - sqrt f2||_2 at every sample
  bool pass() const { return main.pass() && corollary.pass() && pointwise_consistent; }
};

L2Stability check_l2_stability(const KineticDensity& f1, const KineticDensity& f2, const InteractionKernel& kernel,
                               double constant, const PairedRunOptions& opt = {});

// ||[K(. - x), op]||_{L^1}.
double commutator_norm(const DensityOperator& op, const InteractionKernel& kernel, double x);
// ||diag |grad_xi op| ||_{L^{3-eps}} + ||diag |grad_xi op| ||_{L^{3+eps}}.
double commutator_rhs(const DensityOperator& op, double eps = 1.0);

struct CommutatorStudy {
  RateFit fit;
  std::vector<double> probes;
  std::vector<double> lhs;    // sup over probes, per hbar
  std::vector<double> rhs;
  std::vector<double> ratio;  // lhs / (hbar rhs)
  double constant = 0.0;      // max ratio
};

using OperatorFamily = std::function<DensityOperator(PlanckScale)>;
using KernelFactory = std::function<InteractionKernel(const PhaseGrid&)>;
using DensityFactory = std::function<KineticDensity(const PhaseGrid&)>;

CommutatorStudy check_commutator_inequality(const OperatorFamily& family, const KernelFactory& kernel,
                                            const std::vector<double>& probes, const std::vector<double>& hbar_sweep,
                                            double eps = 1.0);

// Grid for an hbar-sweep point: n_x = n_v = smallest power of two >= n_min with pi hbar n / L >= v_required.
PhaseGrid sweep_grid(double hbar, double length_x, double v_required, int n_min = 64);

struct RateStudyPoint {
  double hbar = 0.0;
  int n = 0;
  double initial_l1 = 0.0;
  double initial_l2 = 0.0;
  double final_l1 = 0.0;
  double final_l2 = 0.0;
  double fourier_excess = 0.0;  // max over recorded times of sup|F diff| - L1 distance
  bool fourier_ok = true;
  std::vector<double> times;
  std::vector<double> l1_series;
  std::vector<double> fourier_series;
};

struct RateStudyOptions {
  double t_end = 1.0;
  double dt = 0.01;
  int record_every = 10;
  double length_x = 16.0;
  double v_required = 5.0;
  int n_min = 64;
};

struct RateStudy {
  std::vector<RateStudyPoint> points;
  RateFit fit_l1;
  RateFit fit_l2;
  bool fourier_ok() const;
};

using PointCallback = std::function<void(const RateStudyPoint&)>;

// One sweep point: op0 = Wick(f0); Vlasov and Hartree advanced in lockstep.
RateStudyPoint semiclassical_rate_point(double hbar, const DensityFactory& f0, const KernelFactory& kernel,
                                        const RateStudyOptions& opt);
RateStudy semiclassical_rate_study(const std::vector<double>& hbar_sweep, const DensityFactory& f0,
                                   const KernelFactory& kernel, const RateStudyOptions& opt,
                                   int jobs = 1);

struct LogLipschitz {
  std::vector<double> r;
  std::vector<double> omega;
  double constant = 0.0;    // max omega(r) / max(1, -ln r)
  bool lipschitz = false;   // omega constant in r: the log fit is degenerate
};

// Probe pairs (x, x + r) for x on `probes`, r between dx and L/4; E read through a periodic spline.
LogLipschitz log_lipschitz_modulus(const SpatialField& e, const std::vector<double>& probes,
                                   const std::vector<double>& separations);

struct WhOptions {
  double t_end = 1.0;
  double dt = 0.01;
  int record_every = 10;
  double slack = 0.1;
  double atom_threshold = 1e-9;  // atoms below threshold * total mass are dropped
  std::size_t w2_atoms = 2000;
  bool zero_lambda = false;      // free-flow control: lambda = 0
};

struct WhStability {
  std::vector<double> t;
  std::vector<double> e2;            // semiclassical cost of the transported coupling
  std::vector<double> rho_sum;       // ||rho_f||_inf + ||rho||_inf
  std::vector<double> w2_upper;      // certified upper bound on W2(f, husimi)
  std::vector<double> lower;         // W_hbar^2 bracket from wh_bracket
  std::vector<double> upper;
  std::vector<double> min_atom_trace;
  double c0 = 0.0;                   // C(t) = c0 (||rho_f||_inf + ||rho||_inf)
  double toplitz_initial = 0.0;
  double dropped_mass = 0.0;
  StabilityEnvelope differential;    // dE/dt against C E max(1, -ln E)
  StabilityEnvelope envelope;        // sqrt(E) against the double exponential
  bool lower_bound_ok = true;        // E >= hbar - 1e-10 at all times
  bool chain_ok = true;              // W2(f, husimi)^2 <= E + hbar at all times
  bool bracket_ok = true;            // lower <= upper at all times
  bool pass() const;
};

WhStability check_wh_stability(const KineticDensity& f0, const DensityOperator& op0, const InteractionKernel& kernel,
                               const WhOptions& opt = {});

}  // namespace kslab
