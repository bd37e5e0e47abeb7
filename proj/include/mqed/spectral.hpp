#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mqed/detail/parallel.hpp"
#include "mqed/detail/text.hpp"
#include "mqed/error.hpp"
#include "mqed/greens.hpp"
#include "mqed/scenario.hpp"
#include "mqed/units.hpp"

namespace mqed {

using Mat = Eigen::MatrixXd;

enum class SpectralPart { FreeSpace, Scattering, Total };

inline std::string to_string(SpectralPart p) {
  switch (p) {
    case SpectralPart::FreeSpace: return "free_space";
    case SpectralPart::Scattering: return "scattering";
    case SpectralPart::Total: return "total";
  }
  return "unknown";
}

inline SpectralPart spectral_part_from_string(const std::string& s) {
  if (s == "free_space") return SpectralPart::FreeSpace;
  if (s == "scattering") return SpectralPart::Scattering;
  if (s == "total") return SpectralPart::Total;
  throw Error(ErrorCode::ConfigParseError, "unknown spectral part '" + s + "'");
}

/// Matrix-valued spectral density on a frequency grid. Samples are stored as
/// hbar*J in eV, so that 2*pi*J(w) is directly a rate in eV and the kernel
/// integral over energy carries a single 1/hbar^2.
struct SpectralDensityGrid {
  std::vector<double> omegas;  // eV, strictly ascending
  std::vector<Mat> values;     // one N x N symmetric matrix per omega
  SpectralPart part = SpectralPart::Total;

  std::size_t size() const { return omegas.size(); }
  Eigen::Index n_emitters() const { return values.empty() ? 0 : values.front().rows(); }
  double element(std::size_t k, Eigen::Index a, Eigen::Index b) const { return values[k](a, b); }
};

/// Spectral density as a function of energy (eV), returning hbar*J in eV.
using SpectralSampler = std::function<Mat(double)>;

inline void require_valid_grid(const std::vector<double>& omegas, bool positive = true) {
  if (omegas.empty()) throw Error(ErrorCode::InvalidGrid, "empty frequency grid");
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!std::isfinite(omegas[i]))
      throw Error(ErrorCode::InvalidGrid, "non-finite grid point at index " + std::to_string(i));
    if (positive && !(omegas[i] > 0.0))
      throw Error(ErrorCode::NonpositiveFrequency, "grid point " + std::to_string(i) + " is not positive");
    if (i > 0 && !(omegas[i] > omegas[i - 1]))
      throw Error(ErrorCode::InvalidGrid, "grid not strictly ascending at index " + std::to_string(i));
  }
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw Error(ErrorCode::InvalidGrid, "uniform grid needs n >= 2 and hi > lo");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

/// Default sampling window: n points on [wM - 1.5, wM + 1.5] eV, clipped to w > 0.
inline std::vector<double> default_grid(double center_eV, std::size_t n = 2000, double half_width_eV = 1.5) {
  const double lo = std::max(center_eV - half_width_eV, 1e-3);
  return uniform_grid(lo, center_eV + half_width_eV, n);
}

/// Closed-form free-space element hbar*J0_ab (eV) for dipoles in Debye.
inline double free_space_element(const Emitter& a, const Emitter& b, double energy_eV) {
  require_positive_energy(energy_eV);
  const double k = units::wavenumber(energy_eV);
  const Vec3 d = a.position - b.position;
  const double R = d.norm();
  const double mm = a.dipole.dot(b.dipole);
  double ta = 2.0 / 3.0, tb = 0.0, mn = 0.0;
  if (R > 0.0) {
    const Vec3 n = d / R;
    mn = a.dipole.dot(n) * b.dipole.dot(n);
    detail::imag_g0_coefficients(k * R, ta, tb);
  }
  return k * k * k / (4.0 * units::pi * units::pi) * units::debye2_over_eps0 * (mm * ta + mn * tb);
}

inline Mat free_space_matrix(const Scenario& s, double energy_eV) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Mat J(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) J(a, b) = J(b, a) = free_space_element(s[a], s[b], energy_eV);
  return J;
}

/// hbar*J_Sc (eV) from the Sommerfeld scattering Green's function.
inline Mat scattering_matrix(const Scenario& s, double energy_eV, const SommerfeldOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Mat J = Mat::Zero(n, n);
  if (!s.environment().has_interface()) return J;
  const double k = units::wavenumber(energy_eV);
  const double pref = k * k / units::pi * units::debye2_over_eps0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) {
      const GreenTensor g = halfspace_scattering_green(s[a].position, s[b].position, energy_eV, s.environment(), opt);
      J(a, b) = J(b, a) = pref * s[a].dipole.dot(g.imag() * s[b].dipole);
    }
  return J;
}

inline Mat spectral_matrix(const Scenario& s, double energy_eV, SpectralPart part, const SommerfeldOptions& opt = {}) {
  switch (part) {
    case SpectralPart::FreeSpace: return free_space_matrix(s, energy_eV);
    case SpectralPart::Scattering: return scattering_matrix(s, energy_eV, opt);
    case SpectralPart::Total: return free_space_matrix(s, energy_eV) + scattering_matrix(s, energy_eV, opt);
  }
  return {};
}

/// Samples J_part on the grid, parallel over frequencies.
inline SpectralDensityGrid spectral_density(const Scenario& s, const std::vector<double>& omegas, SpectralPart part,
                                            const SommerfeldOptions& opt = {}) {
  require_valid_grid(omegas);
  SpectralDensityGrid grid;
  grid.omegas = omegas;
  grid.part = part;
  grid.values.resize(omegas.size());
  detail::parallel_for(omegas.size(), [&](std::size_t k) { grid.values[k] = spectral_matrix(s, omegas[k], part, opt); });
  return grid;
}

/// S_ab = J0_ab / sqrt(J0_aa J0_bb).
inline Mat normalized_overlap_matrix(const Mat& J0) {
  if (J0.rows() != J0.cols()) throw Error(ErrorCode::ShapeMismatch, "overlap needs a square matrix");
  const Eigen::VectorXd d = J0.diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d[i] > 0.0)) throw Error(ErrorCode::ZeroDiagonal, "diagonal entry " + std::to_string(i + 1) + " is not positive");
  const Eigen::VectorXd inv = d.cwiseSqrt().cwiseInverse();
  Mat S = inv.asDiagonal() * J0 * inv.asDiagonal();
  S.diagonal().setOnes();
  return S;
}

/// Principal symmetric square root W of S, so that W W^T = S. Eigenvalues
/// below 1e-12 are clamped to zero; anything below -1e-8 is rejected.
inline Mat coupling_factor_W(const Mat& S) {
  if (S.rows() != S.cols()) throw Error(ErrorCode::ShapeMismatch, "W factor needs a square matrix");
  const Mat sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-8)
    throw Error(ErrorCode::NotPositiveSemidefinite,
                "overlap matrix has eigenvalue " + detail::fmt12(ev.minCoeff()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = ev[i] < 1e-12 ? 0.0 : std::sqrt(ev[i]);
  const Mat& V = es.eigenvectors();
  Mat W = V * ev.asDiagonal() * V.transpose();
  return 0.5 * (W + W.transpose());
}

/// g_al(w) = theta(w) sqrt(J0_aa(w)) W_al(w), in sqrt(eV). One matrix per
/// grid point; zero for w <= 0.
inline std::vector<Mat> free_space_couplings_g(const Scenario& s, const std::vector<double>& omegas) {
  const auto n = static_cast<Eigen::Index>(s.size());
  std::vector<Mat> g(omegas.size(), Mat::Zero(n, n));
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    if (!(omegas[k] > 0.0)) continue;
    const Mat J0 = free_space_matrix(s, omegas[k]);
    const Mat W = coupling_factor_W(normalized_overlap_matrix(J0));
    g[k] = J0.diagonal().cwiseSqrt().asDiagonal() * W;
  }
  return g;
}

/// Markovian rates and coherent shifts, all in eV.
struct RateAndShiftMatrices {
  Mat gamma0;       // hbar Gamma~0, free space
  Mat v0;           // V~0, free-space resonant DDI, zero diagonal
  Mat gamma_total;  // hbar Gamma~ with G0 -> G
  Mat v_total;      // V~ with G0 -> G, zero diagonal
  Mat delta_sc;     // diagonal scattering Lamb shift

  static RateAndShiftMatrices zeros(Eigen::Index n) {
    return {Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n)};
  }
};

/// Rates at the pair-mean energy wbar_ab = (w_a + w_b)/2:
///   hbar Gamma_ab = 2 k^2 (mu_a . Im G . mu_b) / eps0
///   V_ab          =  -k^2 (mu_a . Re G . mu_b) / eps0     (a != b)
///   Delta_a       =  -k^2 (mu_a . Re G_Sc(r_a, r_a) . mu_a) / eps0
inline RateAndShiftMatrices rate_and_shift_matrices(const Scenario& s, const SommerfeldOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(s.size());
  RateAndShiftMatrices r = RateAndShiftMatrices::zeros(n);
  const auto& env = s.environment();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      const double wbar = 0.5 * (s[a].transition_energy + s[b].transition_energy);
      const double k = units::wavenumber(wbar);
      const double pref = k * k * units::debye2_over_eps0;
      const Vec3& ma = s[a].dipole;
      const Vec3& mb = s[b].dipole;
      const GreenTensor g0 = free_space_green(s[a].position, s[b].position, wbar);
      const double gam0 = 2.0 * pref * ma.dot(g0.imag() * mb);
      r.gamma0(a, b) = r.gamma0(b, a) = gam0;
      double v0 = 0.0;
      if (a != b) {
        v0 = -pref * ma.dot(g0.real() * mb);
        r.v0(a, b) = r.v0(b, a) = v0;
      }
      double gsc = 0.0, vsc = 0.0;
      if (env.has_interface()) {
        const GreenTensor gs = halfspace_scattering_green(s[a].position, s[b].position, wbar, env, opt);
        gsc = 2.0 * pref * ma.dot(gs.imag() * mb);
        vsc = -pref * ma.dot(gs.value.real() * mb);
      }
      r.gamma_total(a, b) = r.gamma_total(b, a) = gam0 + gsc;
      if (a != b)
        r.v_total(a, b) = r.v_total(b, a) = v0 + vsc;
      else
        r.delta_sc(a, a) = vsc;
    }
  }
  return r;
}

/// CSV: header omega_eV,J_11,J_12,...,J_NN (upper triangle, row-major).
inline std::string spectral_csv(const SpectralDensityGrid& g) {
  const Eigen::Index n = g.n_emitters();
  std::string out = "omega_eV";
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) out += ",J_" + std::to_string(a + 1) + std::to_string(b + 1);
  out += '\n';
  for (std::size_t k = 0; k < g.size(); ++k) {
    out += detail::fmt12(g.omegas[k]);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a; b < n; ++b) out += "," + detail::fmt12(g.values[k](a, b));
    out += '\n';
  }
  return out;
}

inline SpectralDensityGrid parse_spectral_csv(const std::string& text, SpectralPart part = SpectralPart::Total) {
  const auto rows = detail::lines(text);
  if (rows.empty()) throw Error(ErrorCode::IoError, "empty spectral density CSV");
  const auto header = detail::split(rows[0], ',');
  const std::size_t m = header.size() - 1;
  Eigen::Index n = 0;
  while (static_cast<std::size_t>(n * (n + 1) / 2) < m) ++n;
  if (header[0] != "omega_eV" || m == 0 || static_cast<std::size_t>(n * (n + 1) / 2) != m)
    throw Error(ErrorCode::IoError, "spectral CSV header must be omega_eV followed by an upper triangle");
  SpectralDensityGrid g;
  g.part = part;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (detail::trim(rows[r]).empty()) continue;
    const auto cells = detail::split(rows[r], ',');
    if (cells.size() != m + 1) throw Error(ErrorCode::IoError, "row " + std::to_string(r + 1) + " has wrong column count");
    std::vector<double> v(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (!detail::parse_double(cells[c], v[c]))
        throw Error(ErrorCode::IoError, "bad number '" + cells[c] + "' on row " + std::to_string(r + 1));
    Mat J(n, n);
    std::size_t c = 1;
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a; b < n; ++b) J(a, b) = J(b, a) = v[c++];
    g.omegas.push_back(v[0]);
    g.values.push_back(J);
  }
  require_valid_grid(g.omegas);
  return g;
}

}  // namespace mqed
