#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "kslab/error.hpp"
#include "kslab/harness.hpp"
#include "kslab/numeric.hpp"

namespace kslab {

RateFit fit_rate(const std::vector<double>& hbar, const std::vector<double>& values, double confidence) {
  if (hbar.size() != values.size()) fail(Errc::invalid_argument, "fit_rate: hbar and value counts differ");
  if (hbar.size() < 4) fail(Errc::insufficient_sweep, "fit_rate: at least 4 hbar points are required");
  const auto [lo, hi] = std::minmax_element(hbar.begin(), hbar.end());
  if (!(*lo > 0.0)) fail(Errc::degenerate_sweep, "fit_rate: hbar values must be positive");
  if (*hi / *lo < 8.0 * (1.0 - 1e-12)) fail(Errc::insufficient_sweep, "fit_rate: the sweep must span a factor of 8");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < hbar.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      fail(Errc::degenerate_sweep, "fit_rate: values must be positive and finite");
    lx.push_back(std::log(hbar[i]));
    ly.push_back(std::log(values[i]));
  }
  const LinearFit lf = least_squares(lx, ly);
  RateFit r;
  r.hbar = hbar;
  r.values = values;
  r.slope = lf.slope;
  r.intercept = lf.intercept;
  r.confidence = confidence;
  const boost::math::students_t dist(static_cast<double>(hbar.size() - 2));
  r.half_width = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence))) * lf.slope_stderr;
  return r;
}

bool StabilityEnvelope::pass() const {
  if (verdict.empty()) return false;
  return std::all_of(verdict.begin(), verdict.end(), [](int v) { return v != 0; });
}

double StabilityEnvelope::worst_ratio() const {
  double w = 0.0;
  for (std::size_t k = 0; k < metric.size(); ++k) {
    if (bound[k] > 0.0)
      w = std::max(w, metric[k] / bound[k]);
    else if (metric[k] > 0.0)
      w = std::numeric_limits<double>::infinity();
  }
  return w;
}

std::vector<double> cumulative_integral(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) fail(Errc::invalid_argument, "cumulative_integral: length mismatch");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  return out;
}

void apply_verdict(StabilityEnvelope& env) {
  if (env.t.empty()) fail(Errc::empty_series, "envelope '" + env.name + "' has no samples");
  env.verdict.assign(env.t.size(), 0);
  for (std::size_t k = 0; k < env.t.size(); ++k)
    env.verdict[k] = env.metric[k] <= env.bound[k] * (1.0 + env.slack) ? 1 : 0;
}

StabilityEnvelope scaled_gronwall_envelope(std::string name, const std::vector<double>& t,
                                           const std::vector<double>& metric, const std::vector<double>& rate,
                                           double constant, double prefactor, double slack) {
  if (t.size() != metric.size() || t.size() != rate.size())
    fail(Errc::invalid_argument, "gronwall_envelope: series lengths differ");
  StabilityEnvelope env;
  env.name = std::move(name);
  env.t = t;
  env.metric = metric;
  env.rate = rate;
  env.constant = constant;
  env.slack = slack;
  env.integral = cumulative_integral(t, rate);
  for (double& v : env.integral) v *= constant;
  for (double lam : env.integral) env.bound.push_back(prefactor * std::exp(lam));
  env.theta.assign(t.size(), 0.0);
  apply_verdict(env);
  return env;
}

StabilityEnvelope gronwall_envelope(std::string name, const std::vector<double>& t, const std::vector<double>& metric,
                                    const std::vector<double>& rate, double constant, double slack) {
  if (metric.empty()) fail(Errc::empty_series, "gronwall_envelope: empty series");
  return scaled_gronwall_envelope(std::move(name), t, metric, rate, constant, metric.front(), slack);
}

StabilityEnvelope double_exponential_envelope(std::string name, const std::vector<double>& t,
                                              const std::vector<double>& w, const std::vector<double>& c,
                                              double slack) {
  if (t.size() != w.size() || t.size() != c.size())
    fail(Errc::invalid_argument, "double_exponential_envelope: series lengths differ");
  if (w.empty()) fail(Errc::empty_series, "double_exponential_envelope: empty series");
  StabilityEnvelope env;
  env.name = std::move(name);
  env.t = t;
  env.metric = w;
  env.rate = c;
  env.slack = slack;
  env.integral = cumulative_integral(t, c);
  const double w0 = w.front();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double lw = std::log(w[k]);
    const double theta = lw > 0.0 ? 1.0 : (lw < 0.0 ? -1.0 : 0.0);
    const double lam = env.integral[k];
    env.theta.push_back(theta);
    env.bound.push_back(std::pow(w0, std::exp(theta * lam)) * std::exp(std::exp(lam)));
  }
  apply_verdict(env);
  return env;
}

}  // namespace kslab
