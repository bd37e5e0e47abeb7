#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Core>

#include "mqed/detail/bessel.hpp"
#include "mqed/detail/quadrature.hpp"
#include "mqed/error.hpp"
#include "mqed/scenario.hpp"
#include "mqed/units.hpp"

namespace mqed {

using cplx = std::complex<double>;
using Mat3c = Eigen::Matrix3cd;

/// Dyadic Green's function G(r_field, r_source, omega) in nm^-1, normalised so
/// that [k0^2 eps - curl curl] G = -I delta.
struct GreenTensor {
  Mat3c value = Mat3c::Zero();
  Vec3 field_point = Vec3::Zero();
  Vec3 source_point = Vec3::Zero();
  double energy = 0.0;           // eV
  double error_estimate = 0.0;   // quadrature estimate, max-norm over components
  bool real_part_singular = false;

  Eigen::Matrix3d imag() const { return value.imag(); }

  Eigen::Matrix3d real() const {
    if (real_part_singular)
      throw Error(ErrorCode::CoincidentPointsRealPart,
                  "Re G0 diverges at coincident points; only Im G0 is defined there");
    return value.real();
  }
};

inline void require_positive_energy(double energy_eV) {
  if (!(energy_eV > 0.0) || !std::isfinite(energy_eV))
    throw Error(ErrorCode::NonpositiveFrequency,
                "frequency must be positive (got " + std::to_string(energy_eV) + " eV)");
}

/// Drude response of the half-space material, eps_inf - wp^2 / (w^2 + i g w).
inline cplx drude_permittivity(double energy_eV, const Environment& env) {
  require_positive_energy(energy_eV);
  if (!env.has_interface()) return 1.0;
  const double w = energy_eV;
  const double wp = env.plasma_energy;
  return env.eps_inf - wp * wp / cplx(w * w, env.damping_energy * w);
}

/// Piecewise permittivity: vacuum above the interface, Drude below.
inline cplx relative_permittivity(double energy_eV, const Environment& env, double z_nm) {
  require_positive_energy(energy_eV);
  if (!env.has_interface() || z_nm > env.interface_z) return 1.0;
  return drude_permittivity(energy_eV, env);
}

namespace detail {

/// sqrt with Im >= 0 (outgoing or decaying along +z).
inline cplx upward_sqrt(cplx w) {
  cplx s = std::sqrt(w);
  if (s.imag() < 0.0 || (s.imag() == 0.0 && s.real() < 0.0)) s = -s;
  return s;
}

// Series for the Im G0 coefficients around x = k0 R -> 0, where the closed
// forms cancel catastrophically. transverse = sin/x + cos/x^2 - sin/x^3,
// longitudinal = -sin/x - 3 cos/x^2 + 3 sin/x^3.
inline void imag_g0_coefficients(double x, double& transverse, double& longitudinal) {
  if (x > 0.5) {
    const double s = std::sin(x), c = std::cos(x);
    transverse = s / x + c / (x * x) - s / (x * x * x);
    longitudinal = -s / x - 3.0 * c / (x * x) + 3.0 * s / (x * x * x);
    return;
  }
  transverse = 0.0;
  longitudinal = 0.0;
  double x2m = 1.0;       // x^(2m)
  double f_odd = 1.0;     // 1/(2m+1)!
  double f_odd3 = 1.0 / 6.0;  // 1/(2m+3)!
  double sign = 1.0;
  for (int m = 0; m < 12; ++m) {
    const double a = f_odd;
    const double b = 2.0 * (m + 1) * f_odd3;
    transverse += sign * x2m * (a - b);
    longitudinal += sign * x2m * (-a + 3.0 * b);
    x2m *= x * x;
    f_odd /= (2.0 * m + 2.0) * (2.0 * m + 3.0);
    f_odd3 /= (2.0 * m + 4.0) * (2.0 * m + 5.0);
    sign = -sign;
  }
}

}  // namespace detail

/// Homogeneous vacuum Green's function, outgoing-wave convention
/// G0 = (I + grad grad / k0^2) exp(i k0 R) / (4 pi R).
/// At r1 == r2 only the finite imaginary part k0/(6 pi) I is returned and the
/// tensor is flagged so that real() throws.
inline GreenTensor free_space_green(const Vec3& r1, const Vec3& r2, double energy_eV) {
  require_positive_energy(energy_eV);
  GreenTensor g;
  g.field_point = r1;
  g.source_point = r2;
  g.energy = energy_eV;
  const double k = units::wavenumber(energy_eV);
  const Vec3 d = r1 - r2;
  const double R = d.norm();
  if (R == 0.0) {
    g.value = Mat3c::Identity() * cplx(0.0, k / (6.0 * units::pi));
    g.real_part_singular = true;
    return g;
  }
  const Vec3 n = d / R;
  const Eigen::Matrix3d nn = n * n.transpose();
  const double x = k * R;
  const cplx phase = std::exp(cplx(0.0, x)) / (4.0 * units::pi * R);
  const cplx a = phase * cplx(1.0 - 1.0 / (x * x), 1.0 / x);
  const cplx b = phase * cplx(-1.0 + 3.0 / (x * x), -3.0 / x);
  double ta = 0.0, tb = 0.0;
  detail::imag_g0_coefficients(x, ta, tb);
  const double scale = k / (4.0 * units::pi);
  const Eigen::Matrix3d re = a.real() * Eigen::Matrix3d::Identity() + b.real() * nn;
  const Eigen::Matrix3d im = scale * (ta * Eigen::Matrix3d::Identity() + tb * nn);
  g.value.real() = re;
  g.value.imag() = im;
  return g;
}

struct FresnelCoefficients {
  cplx r_s;
  cplx r_p;
};

/// Reflection coefficients of the vacuum/material interface seen from the
/// vacuum side, for a (possibly complex) in-plane wavenumber.
inline FresnelCoefficients fresnel_coefficients(cplx k_par, double k0, cplx eps) {
  const cplx kz1 = detail::upward_sqrt(k0 * k0 - k_par * k_par);
  const cplx kz2 = detail::upward_sqrt(eps * k0 * k0 - k_par * k_par);
  return {(kz1 - kz2) / (kz1 + kz2), (eps * kz1 - kz2) / (eps * kz1 + kz2)};
}

inline FresnelCoefficients fresnel_coefficients(double k_par, double energy_eV, const Environment& env) {
  require_positive_energy(energy_eV);
  return fresnel_coefficients(cplx(k_par), units::wavenumber(energy_eV),
                              drude_permittivity(energy_eV, env));
}

struct SommerfeldOptions {
  double rel_tol = 1e-8;
  int max_panels = 4000;
  int min_panels = 1;
};

/// Reflected (scattering) Green's function above a planar Drude half-space,
/// as a Sommerfeld integral over the in-plane wavenumber. The path runs along
/// a shallow half-ellipse below the real axis (clear of the vacuum branch
/// point and the surface-plasmon pole) and then along the real axis until
/// exp(-Im kz (z + z')) is negligible. Both points must be above the
/// interface.
inline GreenTensor halfspace_scattering_green(const Vec3& r1, const Vec3& r2, double energy_eV,
                                              const Environment& env,
                                              const SommerfeldOptions& opt = {}) {
  require_positive_energy(energy_eV);
  GreenTensor g;
  g.field_point = r1;
  g.source_point = r2;
  g.energy = energy_eV;
  if (!env.has_interface()) return g;
  const double h1 = r1.z() - env.interface_z;
  const double h2 = r2.z() - env.interface_z;
  if (!(h1 > 0.0) || !(h2 > 0.0))
    throw Error(ErrorCode::EmitterBelowInterface, "scattering Green's function needs both points above the interface");

  const double k0 = units::wavenumber(energy_eV);
  const cplx eps = drude_permittivity(energy_eV, env);
  const double Z = h1 + h2;
  const double dx = r1.x() - r2.x();
  const double dy = r1.y() - r2.y();
  const double P = std::hypot(dx, dy);
  const double phi = std::atan2(dy, dx);

  using Vec6 = Eigen::Matrix<cplx, 6, 1>;
  // Components: S0, S2, P0, P2, Q1, Z0 (see assembly below).
  auto integrand = [&](cplx kr) -> Vec6 {
    const cplx kz = detail::upward_sqrt(k0 * k0 - kr * kr);
    const auto [rs, rp] = fresnel_coefficients(kr, k0, eps);
    const cplx f = cplx(0.0, 1.0 / (8.0 * units::pi * units::pi)) * kr / kz * std::exp(cplx(0.0, 1.0) * kz * Z);
    std::array<cplx, 3> j{cplx(1.0), cplx(0.0), cplx(0.0)};
    if (P > 0.0) j = detail::bessel_j012(kr * P);
    const cplx q = kz * kz / (k0 * k0);
    Vec6 v;
    v << f * rs * j[0], f * rs * j[2], f * rp * q * j[0], f * rp * q * j[2],
        f * rp * kz * kr / (k0 * k0) * j[1], f * rp * kr * kr / (k0 * k0) * j[0];
    return v;
  };
  auto norm = [](const Vec6& v) { return v.cwiseAbs().maxCoeff(); };

  double span = 1.5 * std::max(1.0, std::sqrt(std::abs(eps)));
  if (eps.real() < -1.0) {
    const cplx pole = std::sqrt(eps / (eps + 1.0));
    span = std::max(span, 1.2 * std::abs(pole.real()));
  }
  const double a = span * k0;
  const double b = 0.02 * a;
  const double k_max = a + 40.0 / Z;

  auto tail = detail::gauss_kronrod<Vec6>(
      [&](double kr) { return integrand(cplx(kr)); }, a, k_max, opt.rel_tol, 0.0, opt.max_panels,
      std::max(opt.min_panels, 8), norm);
  auto detour = detail::gauss_kronrod<Vec6>(
      [&](double t) {
        const cplx kr(0.5 * a * (1.0 - std::cos(t)), -b * std::sin(t));
        const cplx dk(0.5 * a * std::sin(t), -b * std::cos(t));
        return Vec6(integrand(kr) * dk);
      },
      0.0, units::pi, opt.rel_tol, opt.rel_tol * norm(tail.value), opt.max_panels,
      std::max(opt.min_panels, 4), norm);

  const Vec6 s = tail.value + detour.value;
  const double err = tail.error + detour.error;
  if (err > std::max(opt.rel_tol * norm(s), 0.0) * 1.0000001 && !(tail.converged && detour.converged))
    throw Error(ErrorCode::QuadratureNotConverged,
                "Sommerfeld integral error " + std::to_string(err) + " above tolerance after " +
                    std::to_string(tail.panels + detour.panels) + " panels");

  const double pi = units::pi;
  const double c2 = std::cos(2.0 * phi), s2 = std::sin(2.0 * phi);
  const double c1 = std::cos(phi), s1 = std::sin(phi);
  const cplx I(0.0, 1.0);
  Mat3c G;
  G(0, 0) = pi * (s[0] + s[1] * c2 - s[2] + s[3] * c2);
  G(1, 1) = pi * (s[0] - s[1] * c2 - s[2] - s[3] * c2);
  G(0, 1) = G(1, 0) = pi * (s[1] + s[3]) * s2;
  G(0, 2) = -2.0 * pi * I * s[4] * c1;
  G(2, 0) = 2.0 * pi * I * s[4] * c1;
  G(1, 2) = -2.0 * pi * I * s[4] * s1;
  G(2, 1) = 2.0 * pi * I * s[4] * s1;
  G(2, 2) = 2.0 * pi * s[5];
  g.value = G;
  g.error_estimate = 2.0 * pi * err;
  return g;
}

/// Full Green's function G0 + G_Sc; flags the real part at coincident points.
inline GreenTensor total_green(const Vec3& r1, const Vec3& r2, double energy_eV, const Environment& env,
                               const SommerfeldOptions& opt = {}) {
  GreenTensor g = free_space_green(r1, r2, energy_eV);
  const GreenTensor sc = halfspace_scattering_green(r1, r2, energy_eV, env, opt);
  g.value += sc.value;
  g.error_estimate = sc.error_estimate;
  return g;
}

}  // namespace mqed
