#pragma once

// Internal unit system: energies in eV, lengths in nm, times in fs.
// Dipoles are given in Debye; the only place SI enters is the coupling
// constant mu^2/eps0 expressed in eV nm^3 per Debye^2.

namespace mqed::units {

inline constexpr double pi = 3.14159265358979323846;

/// Reduced Planck constant, eV fs.
inline constexpr double hbar = 0.6582119569;
/// Speed of light, nm/fs.
inline constexpr double c = 299.792458;
/// hbar * c, eV nm.
inline constexpr double hbar_c = hbar * c;

namespace si {
inline constexpr double debye = 3.33564e-30;         // C m
inline constexpr double eps0 = 8.8541878128e-12;     // F/m
inline constexpr double elementary_charge = 1.602176634e-19;  // J/eV
}  // namespace si

/// (1 Debye)^2 / eps0 in eV nm^3.
inline constexpr double debye2_over_eps0 =
    si::debye * si::debye / si::eps0 / si::elementary_charge * 1e27;

constexpr double to_angular_frequency(double energy_eV) { return energy_eV / hbar; }
constexpr double to_energy(double omega_rad_per_fs) { return omega_rad_per_fs * hbar; }

/// Vacuum wavenumber k0 = omega / c in nm^-1 for a photon energy in eV.
constexpr double wavenumber(double energy_eV) { return energy_eV / hbar_c; }
constexpr double energy_from_wavenumber(double k_per_nm) { return k_per_nm * hbar_c; }

constexpr double meV(double value) { return value * 1e-3; }

}  // namespace mqed::units
