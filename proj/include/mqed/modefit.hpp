#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mqed/detail/text.hpp"
#include "mqed/error.hpp"
#include "mqed/spectral.hpp"
#include "mqed/units.hpp"

namespace mqed {

/// Discrete lossy modes: energies and widths (eV) plus an N_M x n_modes real
/// coupling matrix (eV). fit_rms is the RMS residual over the fit window
/// divided by the peak |J| of the target.
struct EffectiveModeSet {
  std::vector<double> mode_energies;
  std::vector<double> mode_widths;
  Mat couplings;
  double fit_rms = 0.0;
  SpectralPart target_part = SpectralPart::Scattering;

  std::size_t n_modes() const { return mode_energies.size(); }
  Eigen::Index n_emitters() const { return couplings.rows(); }
};

inline void require_valid_modeset(const EffectiveModeSet& m) {
  if (m.mode_energies.size() != m.mode_widths.size() ||
      static_cast<std::size_t>(m.couplings.cols()) != m.mode_energies.size())
    throw Error(ErrorCode::ShapeMismatch, "mode energies, widths and coupling columns disagree");
  for (std::size_t j = 0; j < m.n_modes(); ++j)
    if (!(m.mode_widths[j] > 0.0) || !std::isfinite(m.mode_energies[j]))
      throw Error(ErrorCode::ShapeMismatch, "mode " + std::to_string(j + 1) + " needs a positive width");
}

/// sum_j Omega_aj Omega_bj / pi * (k_j/2) / ((w - w_j)^2 + (k_j/2)^2), in eV.
inline Mat lorentzian_value(const EffectiveModeSet& m, double w) {
  require_valid_modeset(m);
  const Eigen::Index n = m.n_emitters();
  Mat J = Mat::Zero(n, n);
  for (std::size_t j = 0; j < m.n_modes(); ++j) {
    const double hk = 0.5 * m.mode_widths[j];
    const double dw = w - m.mode_energies[j];
    const double L = hk / (dw * dw + hk * hk) / units::pi;
    const auto col = m.couplings.col(static_cast<Eigen::Index>(j));
    J.noalias() += L * col * col.transpose();
  }
  return J;
}

inline SpectralDensityGrid lorentzian_model(const EffectiveModeSet& m, const std::vector<double>& omegas) {
  require_valid_modeset(m);
  SpectralDensityGrid g;
  g.omegas = omegas;
  g.part = m.target_part;
  g.values.reserve(omegas.size());
  for (double w : omegas) g.values.push_back(lorentzian_value(m, w));
  return g;
}

/// Im[Omega (H_eff - w)^-1 Omega^T] / pi for a general complex mode Hamiltonian.
inline Mat resolvent_value(const Mat& couplings, const Eigen::MatrixXcd& h_eff, double w) {
  const Eigen::Index m = h_eff.rows();
  if (h_eff.cols() != m || couplings.cols() != m)
    throw Error(ErrorCode::ShapeMismatch, "resolvent: H_eff must be square and match coupling columns");
  const Eigen::MatrixXcd A = h_eff - w * Eigen::MatrixXcd::Identity(m, m);
  const Eigen::MatrixXcd X = A.partialPivLu().solve(couplings.transpose().cast<std::complex<double>>());
  const Eigen::MatrixXcd R = couplings.cast<std::complex<double>>() * X;
  return R.imag() / units::pi;
}

/// Diagonal H_eff = diag(w_j - i k_j / 2).
inline Eigen::MatrixXcd effective_hamiltonian(const EffectiveModeSet& m) {
  const auto n = static_cast<Eigen::Index>(m.n_modes());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    H(j, j) = std::complex<double>(m.mode_energies[j], -0.5 * m.mode_widths[j]);
  return H;
}

/// Sorts modes by energy and makes the first nonzero entry of each coupling
/// column nonnegative.
inline EffectiveModeSet canonicalize(EffectiveModeSet m) {
  std::vector<std::size_t> order(m.n_modes());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (m.mode_energies[a] != m.mode_energies[b]) return m.mode_energies[a] < m.mode_energies[b];
    return m.mode_widths[a] < m.mode_widths[b];
  });
  EffectiveModeSet out = m;
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.mode_energies[j] = m.mode_energies[order[j]];
    out.mode_widths[j] = m.mode_widths[order[j]];
    out.couplings.col(static_cast<Eigen::Index>(j)) = m.couplings.col(static_cast<Eigen::Index>(order[j]));
  }
  for (Eigen::Index j = 0; j < out.couplings.cols(); ++j)
    for (Eigen::Index a = 0; a < out.couplings.rows(); ++a)
      if (out.couplings(a, j) != 0.0) {
        if (out.couplings(a, j) < 0.0) out.couplings.col(j) *= -1.0;
        break;
      }
  return out;
}

struct FitOptions {
  double center = std::numeric_limits<double>::quiet_NaN();  // eV; NaN -> grid midpoint
  double half_window = 1.0;                                  // eV
  int max_iterations = 5000;        // final polish of the best start
  int explore_iterations = 200;     // per candidate start
  double gradient_tol = 1e-13;
  double step_tol = 1e-13;
  bool throw_on_failure = false;
};

struct FitResult {
  EffectiveModeSet modes;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

namespace detail {

// Least-squares problem over the fit window. Residuals are scaled by the
// target peak so that costs are dimensionless.
class LorentzianProblem {
 public:
  LorentzianProblem(const SpectralDensityGrid& target, const FitOptions& opt) {
    if (target.size() == 0) throw Error(ErrorCode::InvalidGrid, "empty fit target");
    const double center =
        std::isnan(opt.center) ? 0.5 * (target.omegas.front() + target.omegas.back()) : opt.center;
    n_ = target.n_emitters();
    for (std::size_t k = 0; k < target.size(); ++k)
      if (std::abs(target.omegas[k] - center) <= opt.half_window + 1e-12) {
        omegas_.push_back(target.omegas[k]);
        values_.push_back(target.values[k]);
      }
    if (omegas_.size() < 3) throw Error(ErrorCode::InvalidGrid, "fit window holds fewer than 3 grid points");
    peak_ = 0.0;
    for (const auto& v : values_) peak_ = std::max(peak_, v.cwiseAbs().maxCoeff());
    if (!(peak_ > 0.0)) peak_ = 1.0;
    for (Eigen::Index a = 0; a < n_; ++a)
      for (Eigen::Index b = a; b < n_; ++b) pairs_.push_back({a, b, a == b ? 1.0 : std::sqrt(2.0)});
  }

  Eigen::Index n_emitters() const { return n_; }
  std::size_t n_points() const { return omegas_.size(); }
  double peak() const { return peak_; }
  const std::vector<double>& omegas() const { return omegas_; }
  const std::vector<Mat>& values() const { return values_; }
  Eigen::Index n_residuals() const { return static_cast<Eigen::Index>(omegas_.size() * pairs_.size()); }

  // p = [w_1..w_M, ln k_1..ln k_M, Omega (column-major, N x M)]
  static Eigen::VectorXd pack(const EffectiveModeSet& m) {
    const auto M = static_cast<Eigen::Index>(m.n_modes());
    const Eigen::Index N = m.n_emitters();
    Eigen::VectorXd p(M * (2 + N));
    for (Eigen::Index j = 0; j < M; ++j) {
      p[j] = m.mode_energies[j];
      p[M + j] = std::log(m.mode_widths[j]);
      for (Eigen::Index a = 0; a < N; ++a) p[2 * M + j * N + a] = m.couplings(a, j);
    }
    return p;
  }

  EffectiveModeSet unpack(const Eigen::VectorXd& p, Eigen::Index M) const {
    EffectiveModeSet m;
    m.mode_energies.resize(M);
    m.mode_widths.resize(M);
    m.couplings.resize(n_, M);
    for (Eigen::Index j = 0; j < M; ++j) {
      m.mode_energies[j] = p[j];
      m.mode_widths[j] = std::exp(p[M + j]);
      for (Eigen::Index a = 0; a < n_; ++a) m.couplings(a, j) = p[2 * M + j * n_ + a];
    }
    return m;
  }

  Eigen::VectorXd residuals(const Eigen::VectorXd& p, Eigen::Index M) const {
    const EffectiveModeSet m = unpack(p, M);
    Eigen::VectorXd r(n_residuals());
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < omegas_.size(); ++k) {
      const Mat model = lorentzian_value(m, omegas_[k]);
      for (const auto& pr : pairs_) r[row++] = pr.w * (model(pr.a, pr.b) - values_[k](pr.a, pr.b)) / peak_;
    }
    return r;
  }

  Mat jacobian(const Eigen::VectorXd& p, Eigen::Index M) const {
    const EffectiveModeSet m = unpack(p, M);
    Mat Jac = Mat::Zero(n_residuals(), p.size());
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < omegas_.size(); ++k) {
      const double w = omegas_[k];
      for (const auto& pr : pairs_) {
        const double s = pr.w / peak_;
        for (Eigen::Index j = 0; j < M; ++j) {
          const double kap = m.mode_widths[j];
          const double dw = w - m.mode_energies[j];
          const double D = dw * dw + 0.25 * kap * kap;
          const double L = 0.5 * kap / D / units::pi;
          const double dL_dw = kap * dw / (D * D) / units::pi;
          const double dL_dk = (0.5 * D - 0.25 * kap * kap) / (D * D) / units::pi;
          const double oa = m.couplings(pr.a, j), ob = m.couplings(pr.b, j);
          Jac(row, j) = s * oa * ob * dL_dw;
          Jac(row, M + j) = s * oa * ob * dL_dk * kap;
          Jac(row, 2 * M + j * n_ + pr.a) += s * ob * L;
          Jac(row, 2 * M + j * n_ + pr.b) += s * oa * L;
        }
        ++row;
      }
    }
    return Jac;
  }

 private:
  struct Pair {
    Eigen::Index a, b;
    double w;  // sqrt of the weight 2 - delta_ab
  };
  Eigen::Index n_ = 0;
  std::vector<double> omegas_;
  std::vector<Mat> values_;
  std::vector<Pair> pairs_;
  double peak_ = 1.0;
};

struct LmOutcome {
  Eigen::VectorXd p;
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Levenberg-Marquardt with Marquardt diagonal scaling.
inline LmOutcome levenberg_marquardt(const LorentzianProblem& prob, Eigen::VectorXd p, Eigen::Index M,
                                     const FitOptions& opt) {
  Eigen::VectorXd r = prob.residuals(p, M);
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  LmOutcome out;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Mat Jac = prob.jacobian(p, M);
    const Mat A = Jac.transpose() * Jac;
    const Eigen::VectorXd g = Jac.transpose() * r;
    out.gradient_norm = g.lpNorm<Eigen::Infinity>();
    if (out.gradient_norm <= opt.gradient_tol || cost <= 1e-30 * static_cast<double>(r.size())) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd diag = A.diagonal();
    const double dmax = std::max(diag.maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < diag.size(); ++i) diag[i] = std::max(diag[i], 1e-10 * dmax);
    bool accepted = false;
    while (!accepted) {
      Mat Aug = A;
      Aug.diagonal() += lambda * diag;
      const Eigen::VectorXd delta = Aug.ldlt().solve(-g);
      const Eigen::VectorXd p_new = p + delta;
      const Eigen::VectorXd r_new = prob.residuals(p_new, M);
      const double cost_new = 0.5 * r_new.squaredNorm();
      const double predicted = -(g.dot(delta) + 0.5 * delta.dot(A * delta));
      if (std::isfinite(cost_new) && cost_new < cost) {
        const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : 0.0;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        lambda = std::max(lambda, 1e-15);
        const bool tiny_step = delta.norm() <= opt.step_tol * (p.norm() + opt.step_tol);
        const bool flat = (cost - cost_new) <= 1e-15 * cost;
        p = p_new;
        r = r_new;
        cost = cost_new;
        accepted = true;
        if (tiny_step || flat) out.converged = true;
      } else {
        lambda *= 4.0;
        if (lambda > 1e16) {
          // No descent direction left at machine precision: a stationary point.
          out.converged = true;
          break;
        }
      }
    }
    if (out.converged) {
      ++it;
      break;
    }
  }
  out.p = p;
  out.cost = cost;
  out.iterations = it;
  return out;
}

inline double relative_rms(const LorentzianProblem& prob, const EffectiveModeSet& m) {
  double sum = 0.0;
  std::size_t count = 0;
  const Eigen::Index n = prob.n_emitters();
  for (std::size_t k = 0; k < prob.n_points(); ++k) {
    const Mat d = lorentzian_value(m, prob.omegas()[k]) - prob.values()[k];
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a; b < n; ++b) {
        sum += d(a, b) * d(a, b);
        ++count;
      }
  }
  return std::sqrt(sum / static_cast<double>(count)) / prob.peak();
}

// Seed for one additional mode at the largest positive eigenvalue of the
// current residual matrix, with width from its half-maximum crossing.
inline void seed_new_mode(const LorentzianProblem& prob, const EffectiveModeSet& current, double& w0, double& kappa,
                          Eigen::VectorXd& coupling) {
  const std::size_t K = prob.n_points();
  std::vector<double> lam(K);
  std::vector<Eigen::VectorXd> vec(K);
  for (std::size_t k = 0; k < K; ++k) {
    Mat R = prob.values()[k];
    if (current.n_modes() > 0) R -= lorentzian_value(current, prob.omegas()[k]);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (R + R.transpose()));
    const Eigen::Index top = es.eigenvalues().size() - 1;
    lam[k] = es.eigenvalues()[top];
    vec[k] = es.eigenvectors().col(top);
  }
  const std::size_t kmax = static_cast<std::size_t>(std::max_element(lam.begin(), lam.end()) - lam.begin());
  const double peak = std::max(lam[kmax], 1e-6 * prob.peak());
  std::size_t lo = kmax, hi = kmax;
  while (lo > 0 && lam[lo] > 0.5 * peak) --lo;
  while (hi + 1 < K && lam[hi] > 0.5 * peak) ++hi;
  const double dw = (prob.omegas().back() - prob.omegas().front()) / static_cast<double>(K - 1);
  w0 = prob.omegas()[kmax];
  kappa = std::clamp(prob.omegas()[hi] - prob.omegas()[lo], 3.0 * dw, prob.omegas().back() - prob.omegas().front());
  coupling = std::sqrt(units::pi * kappa * peak / 2.0) * vec[kmax];
}

inline EffectiveModeSet append_mode(EffectiveModeSet m, Eigen::Index n, double w0, double kappa,
                                    const Eigen::VectorXd& coupling) {
  if (m.n_modes() == 0) m.couplings.resize(n, 0);
  m.mode_energies.push_back(w0);
  m.mode_widths.push_back(kappa);
  Mat c(n, m.couplings.cols() + 1);
  c << m.couplings, coupling;
  m.couplings = c;
  return m;
}

}  // namespace detail

/// Fits n_modes Lorentzians to the target over the fit window. Without an
/// init the modes are added greedily (each new mode seeded at the strongest
/// remaining residual peak, several widths tried) and the best of those and a
/// peak-picking start is kept. Deterministic.
inline FitResult fit_modes(const SpectralDensityGrid& target, std::size_t n_modes, const FitOptions& opt = {},
                           const std::optional<EffectiveModeSet>& init = std::nullopt) {
  if (n_modes < 1) throw Error(ErrorCode::ShapeMismatch, "fit needs at least one mode");
  const detail::LorentzianProblem prob(target, opt);
  const Eigen::Index N = prob.n_emitters();
  const auto M = static_cast<Eigen::Index>(n_modes);

  FitResult best;
  double best_cost = std::numeric_limits<double>::infinity();
  FitOptions explore = opt;
  explore.max_iterations = std::min(opt.explore_iterations, opt.max_iterations);
  auto consider = [&](const EffectiveModeSet& start, Eigen::Index modes) {
    return detail::levenberg_marquardt(prob, detail::LorentzianProblem::pack(start), modes, explore);
  };
  auto keep = [&](const detail::LmOutcome& lm) {
    if (lm.cost < best_cost) {
      best_cost = lm.cost;
      best.modes = prob.unpack(lm.p, M);
      best.converged = lm.converged;
      best.iterations = lm.iterations;
      best.gradient_norm = lm.gradient_norm;
    }
  };

  if (init) {
    if (static_cast<Eigen::Index>(init->n_modes()) != M || init->n_emitters() != N)
      throw Error(ErrorCode::ShapeMismatch, "initial mode set does not match n_modes / emitters");
    require_valid_modeset(*init);
    keep(consider(*init, M));
  } else {
    EffectiveModeSet current;
    current.couplings.resize(N, 0);
    for (Eigen::Index m = 1; m <= M; ++m) {
      double w0, kappa;
      Eigen::VectorXd coupling;
      detail::seed_new_mode(prob, current, w0, kappa, coupling);
      EffectiveModeSet stage_best;
      double stage_cost = std::numeric_limits<double>::infinity();
      detail::LmOutcome stage_lm;
      for (double scale : {1.0, 0.5, 2.0}) {
        const double k = kappa * scale;
        const Eigen::VectorXd c = coupling * std::sqrt(scale);
        const auto lm = consider(detail::append_mode(current, N, w0, k, c), m);
        if (lm.cost < stage_cost) {
          stage_cost = lm.cost;
          stage_best = prob.unpack(lm.p, m);
          stage_lm = lm;
        }
      }
      current = stage_best;
      if (m == M) keep(stage_lm);
    }
    // Independent start from the largest local maxima of the diagonal trace.
    std::vector<std::pair<double, std::size_t>> peaks;
    const auto& vals = prob.values();
    for (std::size_t k = 1; k + 1 < prob.n_points(); ++k) {
      const double t = vals[k].trace();
      if (t > vals[k - 1].trace() && t >= vals[k + 1].trace()) peaks.push_back({t, k});
    }
    std::sort(peaks.rbegin(), peaks.rend());
    if (!peaks.empty()) {
      EffectiveModeSet start;
      start.couplings.resize(N, 0);
      for (Eigen::Index j = 0; j < M; ++j) {
        const auto& pk = peaks[static_cast<std::size_t>(j) % peaks.size()];
        const std::size_t k = pk.second;
        const double share = 1.0 / std::ceil(static_cast<double>(M) / static_cast<double>(peaks.size()));
        // half width at half maximum along the trace
        std::size_t lo = k, hi = k;
        while (lo > 0 && vals[lo].trace() > 0.5 * pk.first) --lo;
        while (hi + 1 < prob.n_points() && vals[hi].trace() > 0.5 * pk.first) ++hi;
        const double kap = std::max(prob.omegas()[hi] - prob.omegas()[lo], 1e-3) * (1.0 + 0.1 * j);
        Eigen::VectorXd c(N);
        for (Eigen::Index a = 0; a < N; ++a) {
          const double jaa = std::max(vals[k](a, a), 0.0) * share;
          const double sign = (a == 0 || vals[k](0, a) >= 0.0) ? 1.0 : -1.0;
          c[a] = sign * std::sqrt(units::pi * kap * jaa / 2.0);
        }
        start = detail::append_mode(start, N, prob.omegas()[k] + 0.002 * j, kap, c);
      }
      keep(consider(start, M));
    }
  }

  if (!best.converged) {
    const auto lm = detail::levenberg_marquardt(prob, detail::LorentzianProblem::pack(best.modes), M, opt);
    best.modes = prob.unpack(lm.p, M);
    best.converged = lm.converged;
    best.iterations += lm.iterations;
    best.gradient_norm = lm.gradient_norm;
  }
  best.modes.target_part = target.part;
  best.modes.fit_rms = detail::relative_rms(prob, best.modes);
  best.modes = canonicalize(best.modes);
  if (!best.converged && opt.throw_on_failure)
    throw Error(ErrorCode::FitDidNotConverge, "best-so-far relative RMS " + detail::fmt12(best.modes.fit_rms) +
                                                  ", gradient norm " + detail::fmt12(best.gradient_norm));
  return best;
}

inline void require_converged(const FitResult& r) {
  if (!r.converged)
    throw Error(ErrorCode::FitDidNotConverge,
                "best-so-far relative RMS " + detail::fmt12(r.modes.fit_rms) + " flagged as not converged");
}

struct ElementResidual {
  Eigen::Index a = 0, b = 0;  // zero-based
  double rms = 0.0;           // eV
  double max_deviation = 0.0; // eV
  double omega_at_max = 0.0;  // eV
  double peak_ratio = 0.0;    // max|model| / max|target|
};

struct FitReport {
  std::vector<ElementResidual> elements;
  double overall_rms = 0.0;   // eV, over all upper-triangle elements
  double relative_rms = 0.0;  // overall_rms / peak |target|

  std::string csv() const {
    std::string out = "alpha,beta,rms_eV,max_deviation_eV,omega_at_max_eV,peak_ratio\n";
    for (const auto& e : elements)
      out += std::to_string(e.a + 1) + "," + std::to_string(e.b + 1) + "," + detail::fmt12(e.rms) + "," +
             detail::fmt12(e.max_deviation) + "," + detail::fmt12(e.omega_at_max) + "," + detail::fmt12(e.peak_ratio) +
             "\n";
    return out;
  }
};

/// Residual summary of the Lorentzian model against a target, over the full
/// target grid.
inline FitReport fit_report(const EffectiveModeSet& m, const SpectralDensityGrid& target) {
  require_valid_modeset(m);
  if (m.n_emitters() != target.n_emitters())
    throw Error(ErrorCode::ShapeMismatch, "mode set and target have different emitter counts");
  const Eigen::Index n = target.n_emitters();
  FitReport rep;
  double total = 0.0, peak = 0.0;
  std::size_t count = 0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) {
      ElementResidual e;
      e.a = a;
      e.b = b;
      double sum = 0.0, pm = 0.0, pt = 0.0;
      for (std::size_t k = 0; k < target.size(); ++k) {
        const double model = lorentzian_value(m, target.omegas[k])(a, b);
        const double t = target.values[k](a, b);
        const double d = std::abs(model - t);
        sum += d * d;
        if (d > e.max_deviation) {
          e.max_deviation = d;
          e.omega_at_max = target.omegas[k];
        }
        pm = std::max(pm, std::abs(model));
        pt = std::max(pt, std::abs(t));
      }
      e.rms = std::sqrt(sum / static_cast<double>(target.size()));
      e.peak_ratio = pt > 0.0 ? pm / pt : (pm > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
      total += sum;
      count += target.size();
      peak = std::max(peak, pt);
      rep.elements.push_back(e);
    }
  rep.overall_rms = std::sqrt(total / static_cast<double>(count));
  rep.relative_rms = peak > 0.0 ? rep.overall_rms / peak : rep.overall_rms;
  return rep;
}

// ---- mode-set file --------------------------------------------------------
// key=value lines; '#' starts a comment. Energies in eV, widths and couplings
// in meV, coupling rows (one per emitter) separated by ';'.

inline std::string modeset_text(const EffectiveModeSet& m) {
  require_valid_modeset(m);
  std::string out = "n_modes=" + std::to_string(m.n_modes()) + "\n";
  out += "n_emitters=" + std::to_string(m.n_emitters()) + "\n";
  out += "target_part=" + to_string(m.target_part) + "\n";
  auto join = [](const std::vector<double>& v, double scale) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + detail::fmt12(v[i] * scale);
    return s;
  };
  out += "omega_ph_j_eV=" + join(m.mode_energies, 1.0) + "\n";
  out += "kappa_ph_j_meV=" + join(m.mode_widths, 1e3) + "\n";
  out += "Omega_alpha_j_meV=";
  for (Eigen::Index a = 0; a < m.n_emitters(); ++a) {
    std::vector<double> row(m.couplings.cols());
    for (Eigen::Index j = 0; j < m.couplings.cols(); ++j) row[j] = m.couplings(a, j);
    out += (a ? "; " : "") + join(row, 1e3);
  }
  out += "\nfit_rms=" + detail::fmt12(m.fit_rms) + "\n";
  return out;
}

inline EffectiveModeSet parse_modeset(const std::string& text) {
  EffectiveModeSet m;
  long n_modes = -1, n_emitters = -1;
  std::vector<double> kappa_meV;
  std::vector<std::vector<double>> omega_rows;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ConfigParseError, "mode set line " + std::to_string(line_no) + ": " + what);
  };
  for (const auto& raw : detail::lines(text)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    std::vector<double> nums;
    if (key == "n_modes" || key == "n_emitters") {
      double v;
      if (!detail::parse_double(val, v) || v < 1 || v != std::floor(v)) fail("field '" + key + "' must be a positive integer");
      (key == "n_modes" ? n_modes : n_emitters) = static_cast<long>(v);
    } else if (key == "target_part") {
      try {
        m.target_part = spectral_part_from_string(val);
      } catch (const Error&) {
        fail("field 'target_part' has unknown value '" + val + "'");
      }
    } else if (key == "omega_ph_j_eV") {
      if (!detail::parse_doubles(val, m.mode_energies)) fail("field 'omega_ph_j_eV' is not a number list");
    } else if (key == "kappa_ph_j_meV") {
      if (!detail::parse_doubles(val, kappa_meV)) fail("field 'kappa_ph_j_meV' is not a number list");
    } else if (key == "Omega_alpha_j_meV") {
      for (const auto& row : detail::split(val, ';')) {
        if (!detail::parse_doubles(row, nums)) fail("field 'Omega_alpha_j_meV' is not a number list");
        omega_rows.push_back(nums);
      }
    } else if (key == "fit_rms") {
      if (!detail::parse_double(val, m.fit_rms)) fail("field 'fit_rms' is not a number");
    } else {
      fail("unknown field '" + key + "'");
    }
  }
  if (n_modes < 0) n_modes = static_cast<long>(m.mode_energies.size());
  if (n_emitters < 0) n_emitters = static_cast<long>(omega_rows.size());
  if (static_cast<long>(m.mode_energies.size()) != n_modes || static_cast<long>(kappa_meV.size()) != n_modes)
    throw Error(ErrorCode::ShapeMismatch, "mode set: energy/width counts differ from n_modes");
  if (static_cast<long>(omega_rows.size()) != n_emitters)
    throw Error(ErrorCode::ShapeMismatch, "mode set: coupling rows differ from n_emitters");
  m.couplings.resize(n_emitters, n_modes);
  for (long a = 0; a < n_emitters; ++a) {
    if (static_cast<long>(omega_rows[a].size()) != n_modes)
      throw Error(ErrorCode::ShapeMismatch, "mode set: coupling row " + std::to_string(a + 1) + " has wrong length");
    for (long j = 0; j < n_modes; ++j) m.couplings(a, j) = omega_rows[a][j] * 1e-3;
  }
  m.mode_widths.resize(kappa_meV.size());
  for (std::size_t j = 0; j < kappa_meV.size(); ++j) m.mode_widths[j] = kappa_meV[j] * 1e-3;
  require_valid_modeset(m);
  return m;
}

inline EffectiveModeSet read_modeset(const std::string& path) { return parse_modeset(detail::read_file(path)); }
inline void write_modeset(const std::string& path, const EffectiveModeSet& m) { detail::write_file(path, modeset_text(m)); }

}  // namespace mqed
