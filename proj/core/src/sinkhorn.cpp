#include <algorithm>
#include <cmath>
#include <limits>

#include "kslab/error.hpp"
#include "kslab/transport.hpp"

namespace kslab {

namespace {

// -eps log sum_j w_j exp((g_j - C_ij)/eps) for every row i.
Eigen::VectorXd soft_min_rows(const Eigen::MatrixXd& c, const Eigen::VectorXd& logw, const Eigen::VectorXd& g,
                              double eps) {
  const long m = c.rows(), n = c.cols();
  Eigen::VectorXd out(m);
  std::vector<double> e(n);
  for (long i = 0; i < m; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (long j = 0; j < n; ++j) {
      e[j] = logw(j) + (g(j) - c(i, j)) / eps;
      top = std::max(top, e[j]);
    }
    double s = 0.0;
    for (long j = 0; j < n; ++j) s += std::exp(e[j] - top);
    out(i) = -eps * (top + std::log(s));
  }
  return out;
}

}  // namespace

EntropicResult sinkhorn(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost,
                        const TransportOptions& opt) {
  if (a.size() != cost.rows() || b.size() != cost.cols())
    fail(Errc::invalid_argument, "sinkhorn: cost matrix shape does not match the marginals");
  if ((a.array() <= 0.0).any() || (b.array() <= 0.0).any())
    fail(Errc::invalid_argument, "sinkhorn: marginals must be strictly positive");
  if (std::abs(a.sum() - b.sum()) > 1e-10 * std::max(a.sum(), b.sum()))
    fail(Errc::mass_mismatch, "sinkhorn: unbalanced marginals");
  if (!(opt.epsilon > 0.0) || !(opt.epsilon_decay > 0.0 && opt.epsilon_decay < 1.0))
    fail(Errc::invalid_argument, "sinkhorn: epsilon must be positive and the decay in (0, 1)");
  const double cmax = std::max(cost.maxCoeff(), 1e-300);
  const double eps_final = opt.epsilon * cmax;
  const Eigen::VectorXd loga = a.array().log(), logb = b.array().log();
  const Eigen::MatrixXd ct = cost.transpose();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(a.size()), g = Eigen::VectorXd::Zero(b.size());
  EntropicResult r;
  double eps = cmax;
  int total_iter = 0;
  while (true) {
    eps = std::max(eps, eps_final);
    bool converged = false;
    double err = 0.0;
    // Intermediate levels only warm-start the next one.
    const double tol = eps <= eps_final ? opt.tolerance : std::max(opt.tolerance, 1e-5);
    // The row marginal of the current plan is a_i exp((f_i - f'_i) / eps) with f' the next f update,
    // so the check costs nothing extra. Columns are exact after every g update.
    Eigen::VectorXd next = soft_min_rows(cost, logb, g, eps);
    for (int it = 0; it < opt.max_iterations; ++it) {
      f = next;
      g = soft_min_rows(ct, loga, f, eps);
      ++total_iter;
      next = soft_min_rows(cost, logb, g, eps);
      err = 0.0;
      for (long i = 0; i < a.size(); ++i) err += a(i) * std::abs(std::expm1((f(i) - next(i)) / eps));
      if (err <= tol * a.sum()) {
        converged = true;
        break;
      }
    }
    if (!converged)
      fail(Errc::non_convergence, "sinkhorn: iteration cap reached at eps = " + std::to_string(eps) +
                                      " (marginal error " + std::to_string(err) + ")");
    r.marginal_error = err;
    if (eps <= eps_final) break;
    eps *= opt.epsilon_decay;
  }
  r.epsilon = eps;
  r.iterations = total_iter;
  r.objective = a.dot(f) + b.dot(g);
  double transport = 0.0, kl = 0.0;
  for (long i = 0; i < a.size(); ++i)
    for (long j = 0; j < b.size(); ++j) {
      const double lr = (f(i) + g(j) - cost(i, j)) / eps;
      const double p = a(i) * b(j) * std::exp(lr);
      transport += p * cost(i, j);
      kl += p * lr - p + a(i) * b(j);
    }
  r.transport = transport;
  r.primal = transport + eps * kl;
  r.f = std::move(f);
  r.g = std::move(g);
  return r;
}

EntropicResult sinkhorn_symmetric(const Eigen::VectorXd& a, const Eigen::MatrixXd& cost, const TransportOptions& opt) {
  if (a.size() != cost.rows() || a.size() != cost.cols())
    fail(Errc::invalid_argument, "sinkhorn: cost matrix shape does not match the marginal");
  if ((a.array() <= 0.0).any()) fail(Errc::invalid_argument, "sinkhorn: marginals must be strictly positive");
  if (!(opt.epsilon > 0.0) || !(opt.epsilon_decay > 0.0 && opt.epsilon_decay < 1.0))
    fail(Errc::invalid_argument, "sinkhorn: epsilon must be positive and the decay in (0, 1)");
  const double cmax = std::max(cost.maxCoeff(), 1e-300);
  const double eps_final = opt.epsilon * cmax;
  const Eigen::VectorXd loga = a.array().log();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(a.size());
  EntropicResult r;
  double eps = cmax;
  int total_iter = 0;
  while (true) {
    eps = std::max(eps, eps_final);
    const double tol = eps <= eps_final ? opt.tolerance : std::max(opt.tolerance, 1e-5);
    bool converged = false;
    double err = 0.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
      const Eigen::VectorXd next = soft_min_rows(cost, loga, f, eps);
      ++total_iter;
      err = 0.0;
      for (long i = 0; i < a.size(); ++i) err += a(i) * std::abs(std::expm1((f(i) - next(i)) / eps));
      if (err <= tol * a.sum()) {
        converged = true;
        break;
      }
      f = 0.5 * (f + next);
    }
    if (!converged)
      fail(Errc::non_convergence, "sinkhorn: iteration cap reached at eps = " + std::to_string(eps) +
                                      " (marginal error " + std::to_string(err) + ")");
    r.marginal_error = err;
    if (eps <= eps_final) break;
    eps *= opt.epsilon_decay;
  }
  r.epsilon = eps;
  r.iterations = total_iter;
  r.objective = 2.0 * a.dot(f);
  double transport = 0.0, kl = 0.0;
  for (long i = 0; i < a.size(); ++i)
    for (long j = 0; j < a.size(); ++j) {
      const double lr = (f(i) + f(j) - cost(i, j)) / eps;
      const double p = a(i) * a(j) * std::exp(lr);
      transport += p * cost(i, j);
      kl += p * lr - p + a(i) * a(j);
    }
  r.transport = transport;
  r.primal = transport + eps * kl;
  r.f = f;
  r.g = std::move(f);
  return r;
}

}  // namespace kslab
