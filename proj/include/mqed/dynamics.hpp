#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mqed/detail/text.hpp"
#include "mqed/error.hpp"
#include "mqed/modefit.hpp"
#include "mqed/scenario.hpp"
#include "mqed/spectral.hpp"
#include "mqed/trace.hpp"
#include "mqed/units.hpp"

namespace mqed {

using MatC = Eigen::MatrixXcd;

/// Truncated Fock basis of N two-level emitters and M bosonic modes holding at
/// most `cap` excitations. cap = 1 is the single-excitation space
/// {G, E_1..E_N, 1_1..1_M} in that order.
class FockBasis {
 public:
  FockBasis(Eigen::Index n_emitters, Eigen::Index n_modes, int cap) : n_(n_emitters), m_(n_modes), cap_(cap) {
    if (n_emitters < 0 || n_modes < 0 || cap < 1) throw Error(ErrorCode::ShapeMismatch, "invalid Fock basis request");
    std::vector<int> occ(static_cast<std::size_t>(n_ + m_), 0);
    enumerate(occ, 0, 0);
    std::stable_sort(states_.begin(), states_.end(), [](const std::vector<int>& a, const std::vector<int>& b) {
      const int ta = total(a), tb = total(b);
      if (ta != tb) return ta < tb;
      return a > b;
    });
    for (std::size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = static_cast<Eigen::Index>(i);
  }

  Eigen::Index dim() const { return static_cast<Eigen::Index>(states_.size()); }
  Eigen::Index n_emitters() const { return n_; }
  Eigen::Index n_modes() const { return m_; }
  int cap() const { return cap_; }
  const std::vector<int>& state(Eigen::Index i) const { return states_[static_cast<std::size_t>(i)]; }

  /// Index of the state with emitter a excited and nothing else.
  Eigen::Index emitter_state(Eigen::Index a) const {
    std::vector<int> occ(static_cast<std::size_t>(n_ + m_), 0);
    occ[static_cast<std::size_t>(a)] = 1;
    return index_.at(occ);
  }

  /// sigma^-_a
  Mat emitter_lowering(Eigen::Index a) const { return lowering(a, false); }
  /// a_j
  Mat mode_lowering(Eigen::Index j) const { return lowering(n_ + j, true); }
  /// Total excitation number (diagonal).
  Mat number_operator() const {
    Mat Nop = Mat::Zero(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i) Nop(i, i) = total(state(i));
    return Nop;
  }

 private:
  static int total(const std::vector<int>& occ) {
    int t = 0;
    for (int v : occ) t += v;
    return t;
  }

  void enumerate(std::vector<int>& occ, std::size_t pos, int used) {
    if (pos == occ.size()) {
      states_.push_back(occ);
      return;
    }
    const int limit = pos < static_cast<std::size_t>(n_) ? 1 : cap_;
    for (int v = 0; v <= std::min(limit, cap_ - used); ++v) {
      occ[pos] = v;
      enumerate(occ, pos + 1, used + v);
    }
    occ[pos] = 0;
  }

  Mat lowering(Eigen::Index site, bool bosonic) const {
    Mat L = Mat::Zero(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      std::vector<int> occ = state(i);
      const int n = occ[static_cast<std::size_t>(site)];
      if (n == 0) continue;
      occ[static_cast<std::size_t>(site)] = n - 1;
      L(index_.at(occ), i) = bosonic ? std::sqrt(static_cast<double>(n)) : 1.0;
    }
    return L;
  }

  Eigen::Index n_, m_;
  int cap_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, Eigen::Index> index_;
};

/// Lindblad generator: Hamiltonian (eV) plus matrix-rate dissipators
/// sum_ab R_ab (L_b rho L_a^+ - 1/2 {L_a^+ L_b, rho}) with rates in eV.
struct LindbladGenerator {
  struct Channel {
    Mat rates;
    std::vector<Mat> ops;
  };
  MatC hamiltonian;
  std::vector<Channel> channels;

  Eigen::Index dim() const { return hamiltonian.rows(); }

  /// Precomputes H - (i/2) sum R_ab L_a^+ L_b. Call after editing.
  void finalize() {
    const Eigen::Index d = dim();
    if (hamiltonian.cols() != d) throw Error(ErrorCode::ShapeMismatch, "Hamiltonian must be square");
    h_eff_ = hamiltonian;
    jumps_.clear();
    for (const auto& ch : channels) {
      const auto n = static_cast<Eigen::Index>(ch.ops.size());
      if (ch.rates.rows() != n || ch.rates.cols() != n)
        throw Error(ErrorCode::ShapeMismatch, "rate matrix does not match the number of jump operators");
      for (const auto& L : ch.ops)
        if (L.rows() != d || L.cols() != d) throw Error(ErrorCode::ShapeMismatch, "jump operator dimension mismatch");
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
          const double r = ch.rates(a, b);
          if (r == 0.0) continue;
          h_eff_ -= std::complex<double>(0.0, 0.5 * r) * (ch.ops[a].transpose() * ch.ops[b]).cast<std::complex<double>>();
          jumps_.push_back({r, ch.ops[b].cast<std::complex<double>>(), ch.ops[a].transpose().cast<std::complex<double>>()});
        }
    }
    ready_ = true;
  }

  bool ready() const { return ready_; }
  const MatC& effective_hamiltonian() const { return h_eff_; }

  struct Jump {
    double rate;
    MatC left;   // L_b
    MatC right;  // L_a^+
  };
  const std::vector<Jump>& jumps() const { return jumps_; }

 private:
  MatC h_eff_;
  std::vector<Jump> jumps_;
  bool ready_ = false;
};

/// d rho / dt in 1/fs. Hermiticity is restored exactly by symmetrisation.
inline MatC lindblad_rhs(const MatC& rho, const LindbladGenerator& gen) {
  if (!gen.ready()) throw Error(ErrorCode::ShapeMismatch, "generator not finalized");
  if (rho.rows() != gen.dim() || rho.cols() != gen.dim())
    throw Error(ErrorCode::ShapeMismatch, "density matrix is " + std::to_string(rho.rows()) + "x" +
                                              std::to_string(rho.cols()) + ", generator needs " +
                                              std::to_string(gen.dim()));
  const MatC A = std::complex<double>(0.0, -1.0 / units::hbar) * (gen.effective_hamiltonian() * rho);
  MatC sym = A + A.adjoint();
  for (const auto& j : gen.jumps()) sym.noalias() += (j.rate / units::hbar) * (j.left * rho * j.right);
  return 0.5 * (sym + sym.adjoint());
}

struct PropagationOptions {
  bool rwa = true;
  Eigen::Index initial_emitter = 0;  // donor
  int step_check_every = 100;        // steps between step-doubling checks
  double step_tol = 1e-8;            // max local error per step
  double population_tol = 1e-8;      // allowed excursion outside [0, 1]
  std::function<void(double, const MatC&)> observer;  // sees rho at every grid time
};

namespace detail {

inline MatC rk4_step(const MatC& rho, const LindbladGenerator& gen, double dt) {
  const MatC k1 = lindblad_rhs(rho, gen);
  const MatC k2 = lindblad_rhs(rho + 0.5 * dt * k1, gen);
  const MatC k3 = lindblad_rhs(rho + 0.5 * dt * k2, gen);
  const MatC k4 = lindblad_rhs(rho + dt * k3, gen);
  return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void record(PopulationTrace& tr, std::size_t row, const MatC& rho, const FockBasis& basis,
                   const PropagationOptions& opt, double t) {
  const Eigen::Index N = basis.n_emitters(), M = basis.n_modes();
  for (Eigen::Index c = 0; c < N + M + 1; ++c) tr.values(static_cast<Eigen::Index>(row), c) = 0.0;
  for (Eigen::Index s = 0; s < basis.dim(); ++s) {
    const double p = rho(s, s).real();
    if (p < -opt.population_tol || p > 1.0 + opt.population_tol)
      throw Error(ErrorCode::NonPhysicalState,
                  "basis population " + detail::fmt12(p) + " out of bounds at t=" + detail::fmt12(t) + " fs");
    const auto& occ = basis.state(s);
    for (Eigen::Index k = 0; k < N + M; ++k) tr.values(static_cast<Eigen::Index>(row), k) += occ[static_cast<std::size_t>(k)] * p;
  }
  tr.values(static_cast<Eigen::Index>(row), N + M) = rho(0, 0).real();
}

}  // namespace detail

/// Fixed-step RK4 propagation of rho from |E_initial><E_initial|. When
/// `rotating_frame` is set the generator must conserve excitation number and
/// omega_ref * N is removed from H (populations are frame independent).
inline PopulationTrace propagate_lindblad(LindbladGenerator gen, const FockBasis& basis, const TimeGrid& grid,
                                          const PropagationOptions& opt, bool rotating_frame, double omega_ref,
                                          const std::string& method, std::uint64_t hash) {
  if (opt.initial_emitter < 0 || opt.initial_emitter >= basis.n_emitters())
    throw Error(ErrorCode::ShapeMismatch, "initial emitter index out of range");
  if (rotating_frame) gen.hamiltonian -= omega_ref * basis.number_operator().cast<std::complex<double>>();
  gen.finalize();
  const std::size_t steps = grid.steps();
  PopulationTrace tr;
  tr.method = method;
  tr.scenario_hash = hash;
  tr.n_emitters = basis.n_emitters();
  tr.n_modes = basis.n_modes();
  tr.times.resize(steps + 1);
  tr.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps + 1), tr.n_emitters + tr.n_modes + 1);

  MatC rho = MatC::Zero(basis.dim(), basis.dim());
  const Eigen::Index s0 = basis.emitter_state(opt.initial_emitter);
  rho(s0, s0) = 1.0;
  const double dt = grid.dt;
  tr.times[0] = 0.0;
  detail::record(tr, 0, rho, basis, opt, 0.0);
  if (opt.observer) opt.observer(0.0, rho);
  for (std::size_t n = 0; n < steps; ++n) {
    MatC next = detail::rk4_step(rho, gen, dt);
    if (opt.step_check_every > 0 && n % static_cast<std::size_t>(opt.step_check_every) == 0) {
      const MatC half = detail::rk4_step(detail::rk4_step(rho, gen, 0.5 * dt), gen, 0.5 * dt);
      const double err = (next - half).cwiseAbs().maxCoeff() * 16.0 / 15.0;
      if (err > opt.step_tol)
        throw Error(ErrorCode::StepSizeTooLarge, "local RK4 error " + detail::fmt12(err) + " at t=" +
                                                     detail::fmt12(grid.time(n)) + " fs exceeds " +
                                                     detail::fmt12(opt.step_tol) + " with dt=" + detail::fmt12(dt) + " fs");
    }
    rho = 0.5 * (next + next.adjoint());
    tr.times[n + 1] = grid.time(n + 1);
    detail::record(tr, n + 1, rho, basis, opt, tr.times[n + 1]);
    if (opt.observer) opt.observer(tr.times[n + 1], rho);
  }
  return tr;
}

/// Emitters coupled to lossy modes, optionally with free-space DDI and
/// free-space matrix-rate decay. Shared by both cavity-QED propagators.
inline LindbladGenerator cavity_generator(const Scenario& s, const EffectiveModeSet& modes, const Mat& v0,
                                          const Mat& gamma0, const FockBasis& basis, bool rwa) {
  const auto N = static_cast<Eigen::Index>(s.size());
  const auto M = static_cast<Eigen::Index>(modes.n_modes());
  require_valid_modeset(modes);
  if (modes.n_emitters() != N)
    throw Error(ErrorCode::ShapeMismatch, "mode set couples " + std::to_string(modes.n_emitters()) +
                                              " emitters, scenario has " + std::to_string(N));
  if (v0.rows() != N || v0.cols() != N || gamma0.rows() != N || gamma0.cols() != N)
    throw Error(ErrorCode::ShapeMismatch, "rate matrices do not match the emitter count");
  std::vector<Mat> sm(N), a(M);
  for (Eigen::Index e = 0; e < N; ++e) sm[e] = basis.emitter_lowering(e);
  for (Eigen::Index j = 0; j < M; ++j) a[j] = basis.mode_lowering(j);
  Mat H = Mat::Zero(basis.dim(), basis.dim());
  for (Eigen::Index e = 0; e < N; ++e) {
    H += s[e].transition_energy * sm[e].transpose() * sm[e];
    for (Eigen::Index f = 0; f < N; ++f)
      if (e != f) H += v0(e, f) * sm[e].transpose() * sm[f];
  }
  for (Eigen::Index j = 0; j < M; ++j) {
    H += modes.mode_energies[j] * a[j].transpose() * a[j];
    for (Eigen::Index e = 0; e < N; ++e) {
      const double g = modes.couplings(e, j);
      if (g == 0.0) continue;
      const Mat x = a[j].transpose() * sm[e];  // a^+ sigma^-, lowered first so truncation cannot drop it
      H += g * (x + x.transpose());
      if (!rwa) {
        const Mat y = sm[e] * a[j];  // sigma^- a
        H += g * (y + y.transpose());
      }
    }
  }
  LindbladGenerator gen;
  gen.hamiltonian = H.cast<std::complex<double>>();
  if (gamma0.cwiseAbs().maxCoeff() > 0.0) gen.channels.push_back({gamma0, sm});
  for (Eigen::Index j = 0; j < M; ++j)
    if (modes.mode_widths[j] > 0.0) gen.channels.push_back({Mat::Constant(1, 1, modes.mode_widths[j]), {a[j]}});
  return gen;
}

/// Dissipative CQED-DDI: Lorentzian modes fitted to the scattering part plus
/// free-space V~0 and Gamma~0.
inline PopulationTrace propagate_cqed_ddi(const Scenario& s, const EffectiveModeSet& modes,
                                          const RateAndShiftMatrices& rates, const TimeGrid& grid,
                                          const PropagationOptions& opt = {}) {
  const FockBasis basis(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(modes.n_modes()), opt.rwa ? 1 : 2);
  auto gen = cavity_generator(s, modes, rates.v0, rates.gamma0, basis, opt.rwa);
  return propagate_lindblad(std::move(gen), basis, grid, opt, opt.rwa, s.mean_energy(), "cqed_ddi", s.hash());
}

/// Dissipative CQED: Lorentzian modes fitted to the total density, no
/// free-space terms.
inline PopulationTrace propagate_cqed(const Scenario& s, const EffectiveModeSet& modes, const TimeGrid& grid,
                                      const PropagationOptions& opt = {}) {
  const auto N = static_cast<Eigen::Index>(s.size());
  const FockBasis basis(N, static_cast<Eigen::Index>(modes.n_modes()), opt.rwa ? 1 : 2);
  auto gen = cavity_generator(s, modes, Mat::Zero(N, N), Mat::Zero(N, N), basis, opt.rwa);
  return propagate_lindblad(std::move(gen), basis, grid, opt, opt.rwa, s.mean_energy(), "cqed", s.hash());
}

/// Markovian density-matrix reference with total-G rates, DDI and the
/// scattering Lamb shift, on the emitter space {G, E_1..E_N}.
inline PopulationTrace propagate_mqed_dmma(const Scenario& s, const RateAndShiftMatrices& rates, const TimeGrid& grid,
                                           const PropagationOptions& opt = {}) {
  const auto N = static_cast<Eigen::Index>(s.size());
  if (rates.gamma_total.rows() != N || rates.v_total.rows() != N || rates.delta_sc.rows() != N)
    throw Error(ErrorCode::ShapeMismatch, "rate matrices do not match the emitter count");
  const FockBasis basis(N, 0, 1);
  std::vector<Mat> sm(N);
  for (Eigen::Index e = 0; e < N; ++e) sm[e] = basis.emitter_lowering(e);
  Mat H = Mat::Zero(basis.dim(), basis.dim());
  for (Eigen::Index e = 0; e < N; ++e) {
    H += (s[e].transition_energy + rates.delta_sc(e, e)) * sm[e].transpose() * sm[e];
    for (Eigen::Index f = 0; f < N; ++f)
      if (e != f) H += rates.v_total(e, f) * sm[e].transpose() * sm[f];
  }
  LindbladGenerator gen;
  gen.hamiltonian = H.cast<std::complex<double>>();
  gen.channels.push_back({rates.gamma_total, sm});
  return propagate_lindblad(std::move(gen), basis, grid, opt, true, s.mean_energy(), "mqed_dmma", s.hash());
}

}  // namespace mqed
