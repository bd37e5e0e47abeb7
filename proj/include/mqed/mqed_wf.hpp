#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "mqed/detail/parallel.hpp"
#include "mqed/detail/text.hpp"
#include "mqed/error.hpp"
#include "mqed/modefit.hpp"
#include "mqed/scenario.hpp"
#include "mqed/spectral.hpp"
#include "mqed/trace.hpp"
#include "mqed/units.hpp"

namespace mqed {

struct WfOptions {
  bool counter_rotating = true;
  std::size_t n_omega = 2000;    // sampler sources: points on the window
  double half_window = 1.5;      // eV around the emitter energy
  bool check_kernel = true;
  double kernel_tol = 1e-4;      // max |K_2n - K_n| / max |K_n|
  bool check_step = true;
  double step_tol = 2e-3;        // Richardson estimate of the population error
  double step_check_span = 20.0; // fs of the run re-integrated at 2 dt
  double population_tol = 1e-8;
  Eigen::Index initial_emitter = 0;
  /// Static (zero-frequency-transfer) coupling the full spectrum would give,
  /// in eV. When set, the part the finite window misses is added as a
  /// Markovian coherent term: M = static_shift - PV_window.
  std::optional<Mat> static_shift;
};

namespace detail {

struct SampledDensity {
  std::vector<double> E;  // eV
  std::vector<Mat> J;     // hbar J in eV
};

inline SampledDensity sample_window(const SpectralSampler& f, double center, double half_window, std::size_t n) {
  const double lo = std::max(center - half_window, 1e-3);
  SampledDensity s;
  s.E = uniform_grid(lo, center + half_window, n);
  s.J.resize(n);
  parallel_for(n, [&](std::size_t k) { s.J[k] = f(s.E[k]); });
  return s;
}

inline SampledDensity every_other(const SampledDensity& s) {
  SampledDensity c;
  for (std::size_t k = 0; k < s.E.size(); k += 2) {
    c.E.push_back(s.E[k]);
    c.J.push_back(s.J[k]);
  }
  if (c.E.back() != s.E.back()) {
    c.E.push_back(s.E.back());
    c.J.push_back(s.J.back());
  }
  return c;
}

// int_0^1 exp(i u t) dt and int_0^1 t exp(i u t) dt.
inline void panel_moments(double u, std::complex<double> eiu, std::complex<double>& e0, std::complex<double>& e1) {
  const std::complex<double> iu(0.0, u);
  if (std::abs(u) < 1e-2) {
    e0 = 0.0;
    e1 = 0.0;
    std::complex<double> p = 1.0;
    double fact = 1.0;
    for (int m = 0; m < 8; ++m) {
      if (m > 0) {
        p *= iu;
        fact *= m;
      }
      e0 += p / (fact * (m + 1));
      e1 += p / (fact * (m + 2));
    }
    return;
  }
  e0 = (eiu - 1.0) / iu;
  e1 = eiu / iu + (eiu - 1.0) / (u * u);
}

/// K_n = (1/hbar^2) int J(E) exp(-i (E - shift) n dt / hbar) dE for n = 0..count-1,
/// integrating the piecewise-linear interpolant of J exactly so that no
/// aliasing appears at large n.
inline std::vector<MatC> kernel_series(const SampledDensity& s, double shift, double dt, std::size_t count) {
  const std::size_t K = s.E.size();
  const Eigen::Index N = s.J.front().rows();
  std::vector<MatC> out(count, MatC::Zero(N, N));
  const double scale = 1.0 / (units::hbar * units::hbar);
  std::vector<double> x(K), h(K > 0 ? K - 1 : 0);
  for (std::size_t k = 0; k < K; ++k) x[k] = s.E[k] - shift;
  for (std::size_t k = 0; k + 1 < K; ++k) h[k] = s.E[k + 1] - s.E[k];
  // Chunks of n are independent; each restarts its phasor recurrences.
  const std::size_t chunk = 128;
  const std::size_t n_chunks = (count + chunk - 1) / chunk;
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::size_t n0 = c * chunk, n1 = std::min(count, n0 + chunk);
    std::vector<std::complex<double>> ph(K), step(K), q(K > 1 ? K - 1 : 0), qstep(K > 1 ? K - 1 : 0);
    const double theta0 = -static_cast<double>(n0) * dt / units::hbar;
    const double dtheta = -dt / units::hbar;
    for (std::size_t k = 0; k < K; ++k) {
      ph[k] = std::polar(1.0, theta0 * x[k]);
      step[k] = std::polar(1.0, dtheta * x[k]);
    }
    for (std::size_t k = 0; k + 1 < K; ++k) {
      q[k] = std::polar(1.0, theta0 * h[k]);
      qstep[k] = std::polar(1.0, dtheta * h[k]);
    }
    std::vector<std::complex<double>> wa(K, 0.0);
    for (std::size_t n = n0; n < n1; ++n) {
      const double theta = -static_cast<double>(n) * dt / units::hbar;
      std::fill(wa.begin(), wa.end(), std::complex<double>(0.0));
      for (std::size_t k = 0; k + 1 < K; ++k) {
        std::complex<double> e0, e1;
        panel_moments(theta * h[k], q[k], e0, e1);
        wa[k] += h[k] * ph[k] * (e0 - e1);
        wa[k + 1] += h[k] * ph[k] * e1;
      }
      MatC acc = MatC::Zero(N, N);
      for (std::size_t k = 0; k < K; ++k) acc += wa[k] * s.J[k].cast<std::complex<double>>();
      out[n] = scale * acc;
      for (std::size_t k = 0; k < K; ++k) ph[k] *= step[k];
      for (std::size_t k = 0; k + 1 < K; ++k) q[k] *= qstep[k];
    }
  });
  return out;
}

/// PV int J(E) / (center - E) dE over the sampled window, exact for the
/// piecewise-linear interpolant.
inline Mat window_principal_value(const SampledDensity& s, double center) {
  const Eigen::Index N = s.J.front().rows();
  Mat out = Mat::Zero(N, N);
  auto lg = [](double v) { return v == 0.0 ? 0.0 : std::log(std::abs(v)); };
  for (std::size_t k = 0; k + 1 < s.E.size(); ++k) {
    const double x0 = s.E[k] - center, x1 = s.E[k + 1] - center;
    const double h = x1 - x0;
    const Mat slope = (s.J[k + 1] - s.J[k]) / h;
    const Mat at_zero = s.J[k] - slope * x0;
    out -= at_zero * (lg(x1) - lg(x0)) + slope * h;
  }
  return out;
}

struct VolterraSetup {
  std::vector<MatC> K;   // resonant kernel at n dt
  std::vector<MatC> Q;   // counter-rotating kernel at n dt (empty if off)
  MatC markov;           // -(i/hbar) M
  Eigen::Index initial;
};

/// Trapezoidal product rule for dC/dt = -int K(t-t')C - int Q(t+t')C - (i/hbar) M C,
/// implicit in C_{n+1}. `stride` reuses kernels sampled at dt for a coarser step.
inline std::vector<Eigen::VectorXcd> volterra_solve(const VolterraSetup& v, double dt, std::size_t steps,
                                                    std::size_t stride) {
  const Eigen::Index N = v.K.front().rows();
  const double h = dt * static_cast<double>(stride);
  auto Kat = [&](std::size_t n) -> const MatC& { return v.K[n * stride]; };
  const bool cr = !v.Q.empty();
  auto Qat = [&](std::size_t n) -> const MatC& { return v.Q[n * stride]; };

  std::vector<Eigen::VectorXcd> C(steps + 1, Eigen::VectorXcd::Zero(N));
  C[0][v.initial] = 1.0;
  Eigen::VectorXcd f = v.markov * C[0];
  const MatC I = MatC::Identity(N, N);
  for (std::size_t n = 0; n < steps; ++n) {
    const std::size_t m1 = n + 1;
    Eigen::VectorXcd known = 0.5 * h * (Kat(m1) * C[0]);
    for (std::size_t m = 1; m <= n; ++m) known.noalias() += h * (Kat(m1 - m) * C[m]);
    MatC diag = Kat(0);
    if (cr) {
      known.noalias() += 0.5 * h * (Qat(m1) * C[0]);
      for (std::size_t m = 1; m <= n; ++m) known.noalias() += h * (Qat(m1 + m) * C[m]);
      diag += Qat(2 * m1);
    }
    const MatC A = I + 0.5 * h * (0.5 * h * diag - v.markov);
    const Eigen::VectorXcd rhs = C[n] + 0.5 * h * (f - known);
    C[m1] = A.partialPivLu().solve(rhs);
    f = -known - 0.5 * h * (diag * C[m1]) + v.markov * C[m1];
  }
  return C;
}

inline double kernel_change(const std::vector<MatC>& a, const std::vector<MatC>& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    diff = std::max(diff, (a[n] - b[n]).cwiseAbs().maxCoeff());
    ref = std::max(ref, a[n].cwiseAbs().maxCoeff());
  }
  return ref > 0.0 ? diff / ref : diff;
}

inline PopulationTrace propagate_wf_sampled(const SampledDensity& s, const SampledDensity* check_against,
                                            const Scenario& sc, const TimeGrid& grid, const WfOptions& opt) {
  if (!sc.degenerate())
    throw Error(ErrorCode::NonDegenerateEmitters, "the wavefunction propagator needs equal transition energies");
  const auto N = static_cast<Eigen::Index>(sc.size());
  if (s.J.empty() || s.J.front().rows() != N)
    throw Error(ErrorCode::ShapeMismatch, "spectral density does not match the emitter count");
  if (opt.initial_emitter < 0 || opt.initial_emitter >= N)
    throw Error(ErrorCode::ShapeMismatch, "initial emitter index out of range");
  const double EM = sc[0].transition_energy;
  const std::size_t steps = grid.steps();
  const double dt = grid.dt;

  VolterraSetup v;
  v.initial = opt.initial_emitter;
  v.K = kernel_series(s, EM, dt, steps + 1);
  if (check_against) {
    const auto K2 = kernel_series(*check_against, EM, dt, steps + 1);
    const double change = kernel_change(v.K, K2);
    if (change > opt.kernel_tol)
      throw Error(ErrorCode::KernelGridTooCoarse, "memory kernel changes by " + detail::fmt12(change) +
                                                      " (relative) under a 2x frequency-grid change; tolerance " +
                                                      detail::fmt12(opt.kernel_tol));
  }
  if (opt.counter_rotating && N > 1) {
    // L_ab(s) = (1/hbar^2) int J_ab exp(-i (E + E_M) s / hbar); Q_aa = sum_{b != a} L_bb, Q_ab = L_ba.
    const auto L = kernel_series(s, -EM, dt, 2 * steps + 3);
    v.Q.resize(L.size(), MatC::Zero(N, N));
    for (std::size_t n = 0; n < L.size(); ++n)
      for (Eigen::Index a = 0; a < N; ++a)
        for (Eigen::Index b = 0; b < N; ++b) {
          if (a == b) {
            for (Eigen::Index c = 0; c < N; ++c)
              if (c != a) v.Q[n](a, a) += L[n](c, c);
          } else {
            v.Q[n](a, b) = L[n](b, a);
          }
        }
  }
  Mat M = Mat::Zero(N, N);
  if (opt.static_shift) {
    if (opt.static_shift->rows() != N || opt.static_shift->cols() != N)
      throw Error(ErrorCode::ShapeMismatch, "static shift matrix does not match the emitter count");
    M = *opt.static_shift - window_principal_value(s, EM);
  }
  v.markov = std::complex<double>(0.0, -1.0 / units::hbar) * M.cast<std::complex<double>>();

  const auto C = volterra_solve(v, dt, steps, 1);
  if (opt.check_step && steps >= 4) {
    const std::size_t span = std::min<std::size_t>(steps / 2, static_cast<std::size_t>(std::llround(opt.step_check_span / (2 * dt))));
    if (span >= 2) {
      const auto C2 = volterra_solve(v, dt, span, 2);
      double err = 0.0;
      for (std::size_t n = 0; n <= span; ++n)
        for (Eigen::Index a = 0; a < N; ++a)
          err = std::max(err, std::abs(std::norm(C[2 * n][a]) - std::norm(C2[n][a])) / 3.0);
      if (err > opt.step_tol)
        throw Error(ErrorCode::StepSizeTooLarge, "Volterra population error estimate " + detail::fmt12(err) +
                                                     " exceeds " + detail::fmt12(opt.step_tol) + " with dt=" +
                                                     detail::fmt12(dt) + " fs");
    }
  }

  PopulationTrace tr;
  tr.method = "mqed_wf";
  tr.scenario_hash = sc.hash();
  tr.n_emitters = N;
  tr.n_modes = 0;
  tr.times.resize(steps + 1);
  tr.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps + 1), N + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    tr.times[n] = grid.time(n);
    double sum = 0.0;
    for (Eigen::Index a = 0; a < N; ++a) {
      const double p = std::norm(C[n][a]);
      if (p > 1.0 + opt.population_tol || !std::isfinite(p))
        throw Error(ErrorCode::NonPhysicalState,
                    "population " + detail::fmt12(p) + " at t=" + detail::fmt12(tr.times[n]) + " fs");
      tr.values(static_cast<Eigen::Index>(n), a) = p;
      sum += p;
    }
    tr.values(static_cast<Eigen::Index>(n), N) = 1.0 - sum;
  }
  return tr;
}

}  // namespace detail

/// Non-Markovian wavefunction propagation from a spectral-density function,
/// sampled on [E_M - half_window, E_M + half_window].
inline PopulationTrace propagate_mqed_wf(const SpectralSampler& source, const Scenario& sc, const TimeGrid& grid,
                                         const WfOptions& opt = {}) {
  if (!sc.degenerate())
    throw Error(ErrorCode::NonDegenerateEmitters, "the wavefunction propagator needs equal transition energies");
  const double EM = sc[0].transition_energy;
  if (!opt.check_kernel) {
    const auto s = detail::sample_window(source, EM, opt.half_window, opt.n_omega);
    return detail::propagate_wf_sampled(s, nullptr, sc, grid, opt);
  }
  const auto fine = detail::sample_window(source, EM, opt.half_window, 2 * opt.n_omega - 1);
  const auto coarse = detail::every_other(fine);
  return detail::propagate_wf_sampled(coarse, &fine, sc, grid, opt);
}

/// Same, from a sampled grid (used as given; the refinement check compares
/// against every other grid point).
inline PopulationTrace propagate_mqed_wf(const SpectralDensityGrid& source, const Scenario& sc, const TimeGrid& grid,
                                         const WfOptions& opt = {}) {
  require_valid_grid(source.omegas);
  detail::SampledDensity s{source.omegas, source.values};
  if (!opt.check_kernel || s.E.size() < 5) return detail::propagate_wf_sampled(s, nullptr, sc, grid, opt);
  const auto coarse = detail::every_other(s);
  return detail::propagate_wf_sampled(s, &coarse, sc, grid, opt);
}

/// Full-line principal value of a Lorentzian set: sum_j Omega_j Omega_j^T (E_M - w_j) / ((E_M - w_j)^2 + k_j^2/4).
inline Mat lorentzian_static_shift(const EffectiveModeSet& m, double center) {
  const Eigen::Index N = m.n_emitters();
  Mat out = Mat::Zero(N, N);
  for (std::size_t j = 0; j < m.n_modes(); ++j) {
    const double d = center - m.mode_energies[j];
    const double w = 0.5 * m.mode_widths[j];
    const auto col = m.couplings.col(static_cast<Eigen::Index>(j));
    out += d / (d * d + w * w) * col * col.transpose();
  }
  return out;
}

/// Static coupling of the effective density J0 + Lorentzians as seen by
/// dissipative CQED-DDI: V~0 off the diagonal plus the full Lorentzian shift
/// (the free-space Lamb shift is dropped).
inline Mat effective_static_shift(const RateAndShiftMatrices& rates, const EffectiveModeSet& m, double center) {
  return rates.v0 + lorentzian_static_shift(m, center);
}

/// Static coupling of the full Sommerfeld density as used by the Markovian
/// density-matrix method: V~ off the diagonal, Delta^Sc on it.
inline Mat total_static_shift(const RateAndShiftMatrices& rates) { return rates.v_total + rates.delta_sc; }

/// J0 (closed form) plus a Lorentzian set.
inline SpectralSampler effective_total_sampler(const Scenario& sc, const EffectiveModeSet& m) {
  return [sc, m](double E) -> Mat { return free_space_matrix(sc, E) + lorentzian_value(m, E); };
}

}  // namespace mqed
