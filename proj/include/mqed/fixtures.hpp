#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "mqed/error.hpp"
#include "mqed/modefit.hpp"

namespace mqed::fixtures {

/// One printed parameter row. Numbers are kept as the printed strings so that
/// emitted files reproduce them verbatim.
struct TableRow {
  std::string_view panel;  // "4a" ... "5f"
  double h_nm;
  double d_nm;             // 0 for single-emitter panels
  std::string_view omega_eV;
  std::string_view kappa_meV;
  std::string_view couplings_meV;  // rows separated by ';'
};

enum class Table { CqedDdi, Cqed };

// Scattering-part fits used by dissipative CQED-DDI.
inline constexpr std::array<TableRow, 8> kCqedDdiRows = {{
    {"4a", 7, 0, "3.486 3.527", "144.8 98.0", "3.0 5.6"},
    {"4b", 1, 0, "3.513 3.535", "106.4 99.9", "10.0 117.0"},
    {"5a", 7, 1.5, "3.439 3.499 3.527 3.530", "192.7 103.9 97.2 97.2", "1.8 3.0 3.9 3.7; 1.8 2.9 5.0 2.0"},
    {"5b", 7, 3, "3.435 3.498 3.530 3.531", "194.5 104.3 97.3 101.2", "1.8 2.8 5.1 -2.0; 1.8 2.8 5.1 2.0"},
    {"5c", 7, 10, "3.408 3.483 3.523 3.528", "215.4 111.8 99.2 102.1", "1.4 2.0 3.8 4.5; 1.4 2.0 3.8 -4.5"},
    {"5d", 1, 1.5, "3.551 3.534 3.534 3.536", "133.6 100.2 100.1 98.9",
     "-9.5 93.1 -42.3 -57.0; 9.9 65.3 79.4 -56.0"},
    {"5e", 1, 3, "3.516 3.533 3.535 3.537", "127.7 98.5 100.0 100.7", "-11.3 62.0 -80.2 58.2; -10.4 47.4 99.1 40.3"},
    {"5f", 1, 10, "3.495 3.530 3.535 3.535", "150.6 99.9 100.0 99.9", "5.0 37.0 -30.1 107.2; 4.4 6.3 113.9 27.8"},
}};

// Total-density fits used by dissipative CQED.
inline constexpr std::array<TableRow, 8> kCqedRows = {{
    {"4a", 7, 0, "3.487 3.527", "146.3 97.9", "3.0 5.6"},
    {"4b", 1, 0, "3.513 3.535", "106.5 99.9", "10.0 117.0"},
    {"5a", 7, 1.5, "3.448 3.502 3.530 3.530", "201.2 104.3 96.5 96.5", "1.9 3.1 4.3 3.0; 1.9 3.1 2.8 4.4"},
    {"5b", 7, 3, "3.446 3.500 3.530 3.531", "203.6 104.8 96.4 100.9", "1.9 3.0 4.9 2.0; 1.9 3.0 4.9 -2.0"},
    {"5c", 7, 10, "3.425 3.487 3.524 3.528", "236.0 112.9 97.7 102.0", "1.6 2.2 3.6 4.5; 1.6 2.2 3.6 -4.5"},
    {"5d", 1, 1.5, "3.506 3.531 3.535 3.535", "138.2 99.5 100.0 99.9", "-6.7 38.8 -84.9 70.9; -6.8 38.9 84.5 71.4"},
    {"5e", 1, 3, "3.513 3.533 3.535 3.536", "122.5 99.1 100.0 100.2", "9.5 68.5 -47.2 82.4; 8.2 23.9 113.9 13.6"},
    {"5f", 1, 10, "3.510 3.535 3.535 3.543", "142.0 99.8 100.0 101.8", "7.0 81.5 -83.3 12.4; 7.0 80.9 83.9 12.3"},
}};

inline const std::array<TableRow, 8>& rows(Table t) { return t == Table::CqedDdi ? kCqedDdiRows : kCqedRows; }

inline std::string table_name(Table t) { return t == Table::CqedDdi ? "cqed_ddi" : "cqed"; }

inline const TableRow& row(Table t, std::string_view panel) {
  for (const auto& r : rows(t))
    if (r.panel == panel) return r;
  throw Error(ErrorCode::ConfigParseError, "no fixture row for panel '" + std::string(panel) + "'");
}

/// Mode-set file text with the printed numbers copied verbatim.
inline std::string row_text(Table t, const TableRow& r) {
  std::size_t n_modes = 1;
  for (char ch : r.omega_eV) n_modes += ch == ' ';
  std::size_t n_emitters = 1;
  for (char ch : r.couplings_meV) n_emitters += ch == ';';
  std::string out = "# panel " + std::string(r.panel) + ", h=" + detail::fmt12(r.h_nm) + " nm";
  if (r.d_nm > 0) out += ", d=" + detail::fmt12(r.d_nm) + " nm";
  out += "\n";
  out += "n_modes=" + std::to_string(n_modes) + "\n";
  out += "n_emitters=" + std::to_string(n_emitters) + "\n";
  out += std::string("target_part=") + (t == Table::CqedDdi ? "scattering" : "total") + "\n";
  out += "omega_ph_j_eV=" + std::string(r.omega_eV) + "\n";
  out += "kappa_ph_j_meV=" + std::string(r.kappa_meV) + "\n";
  out += "Omega_alpha_j_meV=" + std::string(r.couplings_meV) + "\n";
  return out;
}

inline EffectiveModeSet modeset(Table t, std::string_view panel) { return parse_modeset(row_text(t, row(t, panel))); }

inline std::string file_name(Table t, const TableRow& r) { return table_name(t) + "_fig" + std::string(r.panel) + ".txt"; }

}  // namespace mqed::fixtures
