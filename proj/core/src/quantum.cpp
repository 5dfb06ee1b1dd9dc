#include <spdlog/spdlog.h>

#include "kslab/quantum.hpp"

#include <algorithm>
#include <cmath>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"

namespace kslab {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

double PlanckScale::h() const { return 2.0 * pi * hbar; }

namespace {

void require_pairing(const PhaseGrid& g, PlanckScale s) {
  if (g.dim != 1) fail(Errc::unsupported_spec, "the quantum toolbox is implemented for d = 1");
  if (g.n_x > 512) fail(Errc::unsupported_spec, "operator size is capped at n_x = 512");
  g.require_momentum_pairing(s.hbar);
}

// FFT (forward, unscaled) of every column in place.
void fft_columns(MatrixXcd& m, bool inverse) {
  const int n = static_cast<int>(m.rows());
  std::vector<cplx> buf(n);
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < n; ++r) buf[r] = m(r, c);
    if (inverse)
      ifft(buf);
    else
      fft(buf);
    for (int r = 0; r < n; ++r) m(r, c) = buf[r];
  }
}

}  // namespace

DensityOperator::DensityOperator(MatrixXcd m, PhaseGrid g, PlanckScale s, Kind k, double target)
    : matrix_(std::move(m)), grid_(g), scale_(s), kind_(k), trace_target_(target) {}

DensityOperator DensityOperator::state(MatrixXcd matrix, const PhaseGrid& grid, PlanckScale scale,
                                       double trace_target) {
  require_pairing(grid, scale);
  if (matrix.rows() != grid.n_x || matrix.cols() != grid.n_x)
    fail(Errc::grid_incompatible, "operator size does not match n_x");
  DensityOperator op(std::move(matrix), grid, scale, Kind::state, trace_target);
  if (op.hermiticity_defect() > 1e-12) fail(Errc::invalid_argument, "state is not Hermitian");
  const double nrm = op.matrix_.norm();
  if (op.min_eigenvalue() < -1e-10 * std::max(nrm, 1e-300)) fail(Errc::negative_input, "state is not positive");
  if (std::abs(op.scaled_trace() - trace_target) > 1e-10 * std::max(1.0, std::abs(trace_target)))
    fail(Errc::mass_mismatch, "state scaled trace " + std::to_string(op.scaled_trace()) + " differs from target");
  return op;
}

DensityOperator DensityOperator::symbol(MatrixXcd matrix, const PhaseGrid& grid, PlanckScale scale) {
  require_pairing(grid, scale);
  DensityOperator op(std::move(matrix), grid, scale, Kind::symbol, 0.0);
  op.trace_target_ = op.scaled_trace();
  return op;
}

DensityOperator DensityOperator::general(MatrixXcd matrix, const PhaseGrid& grid, PlanckScale scale) {
  require_pairing(grid, scale);
  if (matrix.rows() != grid.n_x || matrix.cols() != grid.n_x)
    fail(Errc::grid_incompatible, "operator size does not match n_x");
  return DensityOperator(std::move(matrix), grid, scale, Kind::general, 0.0);
}

DensityOperator DensityOperator::with_matrix(MatrixXcd m, Kind kind) const {
  DensityOperator op(std::move(m), grid_, scale_, kind, trace_target_);
  return op;
}

double DensityOperator::scaled_trace() const { return scale_.h() * matrix_.trace().real(); }

double DensityOperator::hermiticity_defect() const {
  const double nrm = matrix_.norm();
  if (nrm == 0.0) return 0.0;
  return (matrix_ - matrix_.adjoint()).norm() / nrm;
}

double DensityOperator::min_eigenvalue() const {
  const MatrixXcd herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::VectorXd coherent_profile(const PhaseGrid& grid, PlanckScale scale, double x0) {
  const int n = grid.n_x;
  VectorXd g(n);
  for (int i = 0; i < n; ++i) {
    const double y = wrap(grid.x(i) - x0, grid.length_x);
    g(i) = std::exp(-y * y / (2.0 * scale.hbar));
  }
  g /= std::sqrt(g.squaredNorm() * grid.dx());
  return g;
}

Eigen::VectorXcd coherent_state(const PhaseGrid& grid, PlanckScale scale, double x0, double xi0) {
  const VectorXd g = coherent_profile(grid, scale, x0);
  const int n = grid.n_x;
  VectorXcd u(n);
  const double sdx = std::sqrt(grid.dx());
  for (int i = 0; i < n; ++i) u(i) = g(i) * sdx * std::polar(1.0, grid.x(i) * xi0 / scale.hbar);
  return u;
}

namespace {

// Doubled-grid interpolation of every velocity column: out[m' * n + k], m' in [0, 2n).
std::vector<double> midpoint_interpolate(const PhaseField& f, const std::function<double(double)>& xmult) {
  const int n = f.grid.n_x;
  const int nv = f.grid.n_v;
  std::vector<double> out(static_cast<std::size_t>(2 * n) * nv);
  std::vector<cplx> col(n), wide(2 * n);
  for (int k = 0; k < nv; ++k) {
    for (int i = 0; i < n; ++i) col[i] = f.values[static_cast<std::size_t>(i) * nv + k];
    fft(col);
    std::fill(wide.begin(), wide.end(), cplx(0.0));
    for (int a = 0; a < n; ++a) {
      const double w = xmult ? xmult(wavenumber(a, n, f.grid.length_x)) : 1.0;
      if (a < n / 2)
        wide[a] = col[a] * w;
      else if (a > n / 2)
        wide[a + n] = col[a] * w;
      else {
        wide[n / 2] = 0.5 * col[a] * w;
        wide[3 * n / 2] = 0.5 * col[a] * w;
      }
    }
    ifft(wide);
    for (int m = 0; m < 2 * n; ++m) out[static_cast<std::size_t>(m) * nv + k] = 2.0 * wide[m].real();
  }
  return out;
}

MatrixXcd weyl_matrix(const PhaseField& f, PlanckScale scale, bool smooth) {
  require_pairing(f.grid, scale);
  const int n = f.grid.n_x;
  const double hbar = scale.hbar;
  const double dx = f.grid.dx();
  std::function<double(double)> xmult;
  if (smooth) xmult = [hbar](double kk) { return std::exp(-hbar * kk * kk / 4.0); };
  const std::vector<double> mid = midpoint_interpolate(f, xmult);
  // F(m', delta) for all m' and delta, stored as Fhat[m'][delta mod n].
  std::vector<cplx> Fhat(static_cast<std::size_t>(2 * n) * n);
  std::vector<cplx> row(n);
  for (int m = 0; m < 2 * n; ++m) {
    for (int k = 0; k < n; ++k) row[k] = mid[static_cast<std::size_t>(m) * n + k];
    ifft(row);
    for (int d = 0; d < n; ++d) {
      const int delta = d < n / 2 ? d : d - n;
      double w = (delta % 2 == 0) ? 1.0 : -1.0;
      if (smooth) w *= std::exp(-(delta * dx) * (delta * dx) / (4.0 * hbar));
      Fhat[static_cast<std::size_t>(m) * n + d] = w * static_cast<double>(n) * row[d];
    }
  }
  MatrixXcd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int delta = wrap_index(i - j, n);
      const int d = ((delta % n) + n) % n;
      auto at = [&](int m) { return Fhat[static_cast<std::size_t>(((m % (2 * n)) + 2 * n) % (2 * n)) * n + d]; };
      if (delta == -n / 2)
        M(i, j) = 0.5 * (at(2 * j - n / 2) + at(2 * j + n / 2)) / static_cast<double>(n);
      else
        M(i, j) = at(2 * j + delta) / static_cast<double>(n);
    }
  return M;
}

}  // namespace

DensityOperator weyl_quantize(const PhaseField& f, PlanckScale scale) {
  MatrixXcd M = weyl_matrix(f, scale, false);
  return DensityOperator::symbol(std::move(M), f.grid, scale);
}

DensityOperator weyl_quantize(const KineticDensity& f, PlanckScale scale) { return weyl_quantize(f.field(), scale); }

PhaseField wigner_transform(const DensityOperator& op) {
  const PhaseGrid& g = op.grid();
  const int n = g.n_x;
  const MatrixXcd& M = op.matrix();
  // E(m', k) = f(m', k) + (-1)^{m'} f(m', k + n/2) on the doubled grid.
  std::vector<cplx> E(static_cast<std::size_t>(2 * n) * n);
  std::vector<cplx> h(n);
  for (int m = 0; m < 2 * n; ++m) {
    std::fill(h.begin(), h.end(), cplx(0.0));
    for (int d = 0; d < n; ++d) {
      const int delta = d < n / 2 ? d : d - n;
      if (((m - delta) % 2 + 2) % 2 != 0) continue;
      const int j = (((m - delta) / 2) % n + n) % n;
      const int i = ((j + delta) % n + n) % n;
      const double sign = (delta % 2 == 0) ? 1.0 : -1.0;
      h[d] = sign * M(i, j);
    }
    fft(h);
    for (int k = 0; k < n; ++k) E[static_cast<std::size_t>(m) * n + k] = 2.0 * h[k];
  }
  PhaseField out{g, std::vector<double>(g.size())};
  std::vector<cplx> col(2 * n), low(n);
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m < 2 * n; ++m) col[m] = E[static_cast<std::size_t>(m) * n + k];
    fft(col);
    for (int b = 0; b < n; ++b) low[b] = 0.0;
    for (int a = 0; a < 2 * n; ++a) {
      if (a < n / 2)
        low[a] += col[a];
      else if (a > 3 * n / 2)
        low[a - n] += col[a];
      else if (a == n / 2 || a == 3 * n / 2)
        low[n / 2] += 0.5 * col[a];
    }
    ifft(low);
    for (int i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i) * n + k] = 0.5 * low[i].real();
  }
  return out;
}

PhaseField gaussian_smooth(const PhaseField& f, PlanckScale scale) {
  const PhaseGrid& g = f.grid;
  if (g.dim != 1) fail(Errc::unsupported_spec, "gaussian_smooth is implemented for d = 1");
  const int nx = g.n_x, nv = g.n_v;
  const double var = 0.5 * scale.hbar;
  PhaseField out{g, f.values};
  std::vector<cplx> buf(nx);
  for (int k = 0; k < nv; ++k) {
    for (int i = 0; i < nx; ++i) buf[i] = out.values[static_cast<std::size_t>(i) * nv + k];
    fft(buf);
    for (int a = 0; a < nx; ++a) {
      const double kk = wavenumber(a, nx, g.length_x);
      buf[a] *= std::exp(-0.5 * var * kk * kk);
    }
    ifft(buf);
    for (int i = 0; i < nx; ++i) out.values[static_cast<std::size_t>(i) * nv + k] = buf[i].real();
  }
  const double Lv = 2.0 * g.v_max;
  buf.resize(nv);
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nv; ++k) buf[k] = out.values[static_cast<std::size_t>(i) * nv + k];
    fft(buf);
    for (int a = 0; a < nv; ++a) {
      const double kk = wavenumber(a, nv, Lv);
      buf[a] *= std::exp(-0.5 * var * kk * kk);
    }
    ifft(buf);
    for (int k = 0; k < nv; ++k) out.values[static_cast<std::size_t>(i) * nv + k] = buf[k].real();
  }
  return out;
}

DensityOperator wick_quantize(const KineticDensity& f, PlanckScale scale, WickRoute route) {
  const PhaseGrid& g = f.grid();
  require_pairing(g, scale);
  for (double v : f.values())
    if (v < 0.0) fail(Errc::negative_input, "wick_quantize requires f >= 0");
  const int n = g.n_x;
  MatrixXcd M;
  if (route == WickRoute::smoothed_weyl) {
    M = weyl_matrix(f.field(), scale, true);
  } else {
    M = MatrixXcd::Zero(n, n);
    const double dx = g.dx();
    const double pref = dx * dx / g.length_x;
    std::vector<cplx> F(n);
    for (int a = 0; a < n; ++a) {
      bool any = false;
      for (int k = 0; k < n; ++k) {
        F[k] = f.at(a, k);
        any = any || F[k] != 0.0;
      }
      if (!any) continue;
      // F_a(delta) = sum_k f(a,k) exp(2 pi i k_c delta / n), k_c = k - n/2.
      ifft(F);
      for (int d = 0; d < n; ++d) F[d] *= static_cast<double>(n) * ((d % 2 == 0) ? 1.0 : -1.0);
      const VectorXd gp = coherent_profile(g, scale, g.x(a));
      const double cut = 1e-18 * gp.maxCoeff();
      std::vector<int> support;
      for (int i = 0; i < n; ++i)
        if (gp(i) > cut) support.push_back(i);
      for (int i : support)
        for (int j : support) M(i, j) += pref * gp(i) * gp(j) * F[((i - j) % n + n) % n];
    }
  }
  MatrixXcd herm = 0.5 * (M + M.adjoint());
  DensityOperator op = DensityOperator::general(std::move(herm), g, scale);
  try {
    return DensityOperator::state(op.matrix(), g, scale, op.scaled_trace());
  } catch (const Error& e) {
    // Mass at the edge of the momentum box wraps around in the smoothed route; the coherent sum
    // is positive by construction.
    if (route != WickRoute::smoothed_weyl || e.code() != Errc::negative_input) throw;
    spdlog::debug("wick_quantize: smoothed Weyl route lost positivity, using the coherent sum");
    return wick_quantize(f, scale, WickRoute::coherent_sum);
  }
}

PhaseField husimi_values(const DensityOperator& op) {
  const PhaseGrid& g = op.grid();
  const int n = g.n_x;
  const MatrixXcd& M = op.matrix();
  PhaseField out{g, std::vector<double>(g.size())};
  std::vector<cplx> S(n);
  const double dx = g.dx();
  for (int a = 0; a < n; ++a) {
    const VectorXd gp = coherent_profile(g, op.scale(), g.x(a));
    const double cut = 1e-18 * gp.maxCoeff();
    std::vector<int> support;
    for (int i = 0; i < n; ++i)
      if (gp(i) > cut) support.push_back(i);
    std::fill(S.begin(), S.end(), cplx(0.0));
    for (int i : support)
      for (int j : support) S[((i - j) % n + n) % n] += gp(i) * gp(j) * M(i, j);
    // sum_delta exp(-2 pi i k_c delta / n) S(delta), k_c = k - n/2.
    for (int d = 0; d < n; ++d) S[d] *= (d % 2 == 0) ? 1.0 : -1.0;
    fft(S);
    for (int k = 0; k < n; ++k) out.values[static_cast<std::size_t>(a) * n + k] = dx * S[k].real();
  }
  return out;
}

KineticDensity husimi_transform(const DensityOperator& op) {
  PhaseField h = husimi_values(op);
  const double mass = grid_mass(h.grid, h.values);
  double peak = 0.0;
  for (double v : h.values) peak = std::max(peak, std::abs(v));
  for (double& v : h.values) {
    if (v < -1e-10 * std::max(peak, 1e-300)) fail(Errc::negative_input, "husimi_transform: operator is not positive");
    if (v < 0.0) v = 0.0;
  }
  (void)mass;
  return KineticDensity(h.grid, std::move(h.values));
}

SpatialField diag_operator(const DensityOperator& op) {
  const PhaseGrid& g = op.grid();
  SpatialField out{g, std::vector<double>(g.n_x)};
  const double c = op.scale().h() / g.dx();
  for (int i = 0; i < g.n_x; ++i) out.values[i] = c * op.matrix()(i, i).real();
  return out;
}

double schatten_norm(const MatrixXcd& m, double h, double p) {
  if (!(p >= 1.0)) fail(Errc::invalid_argument, "Schatten exponent must lie in [1, inf]");
  const double nrm = m.norm();
  if (nrm == 0.0) return 0.0;
  VectorXd sv;
  if ((m - m.adjoint()).norm() <= 1e-12 * nrm) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    sv = es.eigenvalues().cwiseAbs();
  } else if ((m + m.adjoint()).norm() <= 1e-12 * nrm) {
    const MatrixXcd im = cplx(0.0, 1.0) * m;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (im + im.adjoint()), Eigen::EigenvaluesOnly);
    sv = es.eigenvalues().cwiseAbs();
  } else {
    Eigen::BDCSVD<MatrixXcd> svd(m);
    sv = svd.singularValues();
  }
  if (std::isinf(p)) return sv.maxCoeff();
  std::vector<double> terms(sv.size());
  for (int i = 0; i < sv.size(); ++i) terms[i] = std::pow(sv(i), p);
  return std::pow(h, 1.0 / p) * std::pow(pairwise_sum(terms), 1.0 / p);
}

double schatten_norm(const DensityOperator& op, double p) { return schatten_norm(op.matrix(), op.scale().h(), p); }

double momentum(int a, const PhaseGrid& grid, PlanckScale scale) {
  return scale.hbar * wavenumber(a, grid.n_x, grid.length_x);
}

MatrixXcd apply_momentum_left(const MatrixXcd& m, const PhaseGrid& grid, PlanckScale scale,
                              const std::function<double(double)>& w) {
  MatrixXcd out = m;
  fft_columns(out, false);
  for (int a = 0; a < out.rows(); ++a) out.row(a) *= w(momentum(a, grid, scale));
  fft_columns(out, true);
  return out;
}

Eigen::VectorXd momentum_diagonal(const MatrixXcd& m) {
  // (F M F^{-1})_{aa} with the unitary DFT.
  MatrixXcd t = m;
  fft_columns(t, false);
  MatrixXcd u = t.adjoint();
  fft_columns(u, false);
  const int n = static_cast<int>(m.rows());
  VectorXd d(n);
  for (int a = 0; a < n; ++a) d(a) = std::conj(u(a, a)).real() / static_cast<double>(n);
  return d;
}

DensityOperator quantum_gradient(const DensityOperator& op, Axis axis) {
  const PhaseGrid& g = op.grid();
  const int n = g.n_x;
  const MatrixXcd& M = op.matrix();
  MatrixXcd out(n, n);
  if (axis == Axis::x) {
    auto deriv_columns = [&](MatrixXcd a) {
      fft_columns(a, false);
      for (int r = 0; r < n; ++r) {
        const double kk = (r == n / 2) ? 0.0 : wavenumber(r, n, g.length_x);
        a.row(r) *= cplx(0.0, kk);
      }
      fft_columns(a, true);
      return a;
    };
    const MatrixXcd DM = deriv_columns(M);
    const MatrixXcd DMt = deriv_columns(M.transpose());
    out = DM + DMt.transpose();
  } else {
    const cplx c = 1.0 / cplx(0.0, op.scale().hbar);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = c * (g.x(i) - g.x(j)) * M(i, j);
  }
  return op.with_matrix(std::move(out), DensityOperator::Kind::general);
}

double quantum_sobolev_norm(const DensityOperator& op, int k, double p, double n) {
  if (k < 0 || k > 1) fail(Errc::unsupported_order, "quantum Sobolev norms are defined for k in {0, 1}");
  const auto weight = [n](double pp) { return 1.0 + (n == 0.0 ? 1.0 : std::pow(std::abs(pp), n)); };
  const double h = op.scale().h();
  double total = schatten_norm(apply_momentum_left(op.matrix(), op.grid(), op.scale(), weight), h, p);
  if (k == 1) {
    for (Axis ax : {Axis::x, Axis::xi}) {
      const DensityOperator gr = quantum_gradient(op, ax);
      total += schatten_norm(apply_momentum_left(gr.matrix(), op.grid(), op.scale(), weight), h, p);
    }
  }
  return total;
}

Eigen::MatrixXcd characteristic_function(const DensityOperator& op) {
  const PhaseGrid& g = op.grid();
  const int n = g.n_x;
  const MatrixXcd& M = op.matrix();
  const double h = op.scale().h();
  MatrixXcd chi(n, n);
  std::vector<cplx> col(n);
  for (int bi = 0; bi < n; ++bi) {
    const int b = bi - n / 2;
    // The phase is periodic in x for integer a, so the shifted index may wrap freely.
    for (int i = 0; i < n; ++i) col[i] = M((((i - b) % n) + n) % n, i);
    // sum_i exp(-2 pi i a x_i / L) v_i with x_i = -L/2 + i dx: exp(i pi a) exp(-2 pi i a i / n).
    fft(col);
    for (int ai = 0; ai < n; ++ai) {
      const int a = ai - n / 2;
      const double parity = (a % 2 == 0) ? 1.0 : -1.0;
      chi(ai, bi) = h * parity * std::polar(1.0, pi * a * b / static_cast<double>(n)) * col[((a % n) + n) % n];
    }
  }
  return chi;
}

std::complex<double> fourier_of_wigner(const DensityOperator& op, int a, int b) {
  const PhaseGrid& g = op.grid();
  const int n = g.n_x;
  if (a < -n / 2 || a >= n / 2 || b < -n / 2 || b >= n / 2)
    fail(Errc::invalid_argument, "fourier_of_wigner: (a, b) outside the dual grid");
  const MatrixXcd& M = op.matrix();
  const double y = a / g.length_x;
  cplx s = 0.0;
  for (int i = 0; i < n; ++i) {
    const int ib = ((i - b) % n + n) % n;
    s += std::polar(1.0, -pi * y * (2.0 * g.x(i) - b * g.dx())) * M(ib, i);
  }
  return op.scale().h() * s;
}

Eigen::MatrixXcd phase_space_fourier(const PhaseField& f) {
  const PhaseGrid& g = f.grid;
  if (g.dim != 1 || g.n_x != g.n_v) fail(Errc::grid_incompatible, "phase_space_fourier needs a square d = 1 grid");
  const int n = g.n_x;
  MatrixXcd t(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) t(i, k) = f.values[static_cast<std::size_t>(i) * n + k];
  fft_columns(t, false);  // over i
  MatrixXcd u = t.transpose();
  fft_columns(u, false);  // over k
  MatrixXcd out(n, n);
  const double vol = g.cell_volume();
  for (int ai = 0; ai < n; ++ai)
    for (int bi = 0; bi < n; ++bi) {
      const int a = ai - n / 2, b = bi - n / 2;
      // exp(-2 pi i a x_i / L) = (-1)^a exp(-2 pi i a i / n); exp(-2 pi i b v_k / (2 v_max)) = (-1)^b exp(-2 pi i b k / n).
      const double s = (((a + b) % 2) == 0) ? 1.0 : -1.0;
      out(ai, bi) = s * vol * u(((b % n) + n) % n, ((a % n) + n) % n);
    }
  return out;
}

Eigen::MatrixXcd hermitian_function(const MatrixXcd& m, const std::function<double(double)>& fn) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (m + m.adjoint()));
  VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) lam(i) = fn(lam(i));
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

DensityOperator operator_sqrt(const DensityOperator& op) {
  MatrixXcd r = hermitian_function(op.matrix(), [](double l) { return std::sqrt(std::max(l, 0.0)); });
  return op.with_matrix(std::move(r), DensityOperator::Kind::general);
}

DensityOperator operator_abs(const DensityOperator& op) {
  MatrixXcd r = hermitian_function(op.matrix(), [](double l) { return std::abs(l); });
  return op.with_matrix(std::move(r), DensityOperator::Kind::general);
}

}  // namespace kslab
