#include "kslab/numeric.hpp"

#include <cmath>
#include <unsupported/Eigen/FFT>

#include "kslab/error.hpp"

namespace kslab {

namespace {

Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

double bspline3(double t) {
  const double a = std::abs(t);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) {
    const double b = 2.0 - a;
    return b * b * b / 6.0;
  }
  return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
}

double bspline3_prime(double t) {
  const double a = std::abs(t);
  const double s = t < 0 ? -1.0 : 1.0;
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) {
    const double b = 2.0 - a;
    return -s * b * b / 2.0;
  }
  return s * (-2.0 * a + 1.5 * a * a);
}

// Symbol of the interpolation matrix (1, 4, 1)/6 at bin a.
std::vector<double> spline_symbol(std::size_t n) {
  std::vector<double> d(n);
  for (std::size_t a = 0; a < n; ++a)
    d[a] = (4.0 + 2.0 * std::cos(2.0 * pi * static_cast<double>(a) / static_cast<double>(n))) / 6.0;
  return d;
}

void shift_one(std::span<double> row, double s, const std::vector<double>& denom,
               std::vector<cplx>& buf) {
  const std::size_t n = row.size();
  for (std::size_t i = 0; i < n; ++i) buf[i] = row[i];
  fft(buf);
  const double fl = std::floor(s);
  for (std::size_t a = 0; a < n; ++a) {
    const double theta = 2.0 * pi * static_cast<double>(a) / static_cast<double>(n);
    cplx k = 0.0;
    for (int m = static_cast<int>(fl) - 1; m <= static_cast<int>(fl) + 2; ++m) {
      const double w = bspline3(m - s);
      if (w != 0.0) k += w * std::polar(1.0, -theta * m);
    }
    buf[a] *= k / denom[a];
  }
  ifft(buf);
  for (std::size_t i = 0; i < n; ++i) row[i] = buf[i].real();
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

double wrap(double x, double period) {
  double r = std::fmod(x + 0.5 * period, period);
  if (r < 0) r += period;
  return r - 0.5 * period;
}

int wrap_index(int d, int n) {
  int r = ((d % n) + n) % n;
  return r >= n / 2 ? r - n : r;
}

double wavenumber(int a, int n, double L) {
  const int c = a < n / 2 ? a : a - n;
  return 2.0 * pi * c / L;
}

void fft(std::vector<cplx>& data) {
  std::vector<cplx> out;
  engine().fwd(out, data);
  data.swap(out);
}

void ifft(std::vector<cplx>& data) {
  std::vector<cplx> out;
  engine().inv(out, data);
  data.swap(out);
}

void spline_shift(std::span<double> row, double s) {
  const auto denom = spline_symbol(row.size());
  std::vector<cplx> buf(row.size());
  shift_one(row, s, denom, buf);
}

void spline_shift_rows(std::span<double> block, std::size_t len, std::span<const double> shifts) {
  if (len == 0 || block.size() != len * shifts.size())
    fail(Errc::invalid_argument, "spline_shift_rows: block size does not match rows x len");
  const auto denom = spline_symbol(len);
  std::vector<cplx> buf(len);
  for (std::size_t r = 0; r < shifts.size(); ++r) {
    if (shifts[r] == 0.0) continue;
    shift_one(block.subspan(r * len, len), shifts[r], denom, buf);
  }
}

PeriodicSpline::PeriodicSpline(std::span<const double> samples, double origin, double spacing)
    : origin_(origin), spacing_(spacing) {
  const std::size_t n = samples.size();
  if (n < 4) fail(Errc::invalid_argument, "PeriodicSpline needs at least 4 samples");
  const auto denom = spline_symbol(n);
  std::vector<cplx> buf(samples.begin(), samples.end());
  fft(buf);
  for (std::size_t a = 0; a < n; ++a) buf[a] /= denom[a];
  ifft(buf);
  coef_.resize(n);
  for (std::size_t i = 0; i < n; ++i) coef_[i] = buf[i].real();
}

double PeriodicSpline::operator()(double x) const {
  const int n = static_cast<int>(coef_.size());
  const double t = (x - origin_) / spacing_;
  const int j0 = static_cast<int>(std::floor(t));
  double s = 0.0;
  for (int j = j0 - 1; j <= j0 + 2; ++j) s += coef_[((j % n) + n) % n] * bspline3(t - j);
  return s;
}

double PeriodicSpline::derivative(double x) const {
  const int n = static_cast<int>(coef_.size());
  const double t = (x - origin_) / spacing_;
  const int j0 = static_cast<int>(std::floor(t));
  double s = 0.0;
  for (int j = j0 - 1; j <= j0 + 2; ++j) s += coef_[((j % n) + n) % n] * bspline3_prime(t - j);
  return s / spacing_;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) fail(Errc::invalid_argument, "least_squares needs matching inputs of length >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) fail(Errc::degenerate_sweep, "least_squares: all abscissae coincide");
  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

}  // namespace kslab
