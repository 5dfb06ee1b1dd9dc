#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kslab {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Pairwise reduction; order of operations depends only on the length.
double pairwise_sum(std::span<const double> v);

bool is_power_of_two(long n);

// Minimal-image representative of x on a circle of circumference period, in [-period/2, period/2).
double wrap(double x, double period);

// Signed index offset in [-n/2, n/2).
int wrap_index(int d, int n);

// Angular wavenumber of FFT bin a on a period of length L (Nyquist bin maps to -n/2).
double wavenumber(int a, int n, double L);

void fft(std::vector<cplx>& data);
// Inverse transform, scaled by 1/n.
void ifft(std::vector<cplx>& data);

// Shift a periodic sample row by s cells using periodic cubic-spline interpolation:
// out[i] = S(i - s) where S interpolates row at the integers.
void spline_shift(std::span<double> row, double s);

// Batch variant; shifts[r] applies to row r of a row-major (rows x len) block.
void spline_shift_rows(std::span<double> block, std::size_t len, std::span<const double> shifts);

class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  PeriodicSpline(std::span<const double> samples, double origin, double spacing);

  double operator()(double x) const;
  double derivative(double x) const;

 private:
  std::vector<double> coef_;
  double origin_ = 0.0;
  double spacing_ = 1.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace kslab
