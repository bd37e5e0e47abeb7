#pragma once

#include <filesystem>
#include <future>
#include <map>
#include <string>
#include <vector>

#include "mqed/config.hpp"
#include "mqed/dynamics.hpp"
#include "mqed/fixtures.hpp"
#include "mqed/modefit.hpp"
#include "mqed/mqed_wf.hpp"
#include "mqed/spectral.hpp"

namespace mqed {

struct RunArtifacts {
  SpectralDensityGrid jsc;
  RateAndShiftMatrices rates;
  std::optional<EffectiveModeSet> modes;        // scattering-part set (cqed_ddi, effective WF)
  std::optional<EffectiveModeSet> modes_total;  // total-density set (cqed)
  std::vector<PopulationTrace> traces;          // in config method order
  std::vector<TraceComparison> comparisons;
  std::string log;
};

namespace detail {

inline std::string matrix_text(const Mat& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) out += "; ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c > 0 ? " " : "") + fmt12(m(r, c));
  }
  return out;
}

inline std::string vec_text(const Vec3& v) { return fmt12(v.x()) + " " + fmt12(v.y()) + " " + fmt12(v.z()); }

}  // namespace detail

/// Everything `run` computes, without touching the filesystem.
inline RunArtifacts execute(const ScenarioConfig& cfg) {
  using detail::fmt12;
  const Scenario s = cfg.scenario();
  const double EM = s.mean_energy();
  const SommerfeldOptions sopt;
  PropagationOptions popt;
  popt.rwa = cfg.rwa;
  WfOptions wopt;
  wopt.counter_rotating = cfg.counter_rotating;
  wopt.n_omega = cfg.n_omega;
  wopt.half_window = cfg.half_window_eV;
  FitOptions fopt;

  RunArtifacts out;
  const auto omegas = uniform_grid(std::max(EM - cfg.half_window_eV, 1e-3), EM + cfg.half_window_eV, cfg.n_omega);
  out.jsc = spectral_density(s, omegas, SpectralPart::Scattering, sopt);
  out.rates = rate_and_shift_matrices(s, sopt);

  const bool needs_modes = cfg.wants("cqed_ddi") || (cfg.wants("mqed_wf") && cfg.wf_density == WfDensity::Effective);
  const bool needs_total = cfg.wants("cqed");
  std::string fit_log;
  auto fit = [&](const SpectralDensityGrid& target) {
    const auto r = fit_modes(target, cfg.n_modes, fopt);
    require_converged(r);
    fit_log += "fit." + to_string(target.part) + ".iterations = " + std::to_string(r.iterations) + "\n";
    return r.modes;
  };
  if (needs_modes) {
    switch (cfg.mode_source) {
      case ModeSource::Fixtures: out.modes = fixtures::modeset(fixtures::Table::CqedDdi, cfg.panel); break;
      case ModeSource::Fit: out.modes = fit(out.jsc); break;
      case ModeSource::File: out.modes = read_modeset(cfg.resolve_path(cfg.modes_file)); break;
    }
  }
  if (needs_total) {
    switch (cfg.mode_source) {
      case ModeSource::Fixtures: out.modes_total = fixtures::modeset(fixtures::Table::Cqed, cfg.panel); break;
      case ModeSource::Fit: out.modes_total = fit(spectral_density(s, omegas, SpectralPart::Total, sopt)); break;
      case ModeSource::File: out.modes_total = read_modeset(cfg.resolve_path(cfg.modes_file_total)); break;
    }
  }

  std::optional<Mat> wf_shift;
  if (cfg.wants("mqed_wf"))
    wf_shift = cfg.wf_density == WfDensity::Effective ? effective_static_shift(out.rates, *out.modes, EM)
                                                      : total_static_shift(out.rates);

  std::vector<std::future<PopulationTrace>> jobs;
  for (const auto& m : cfg.methods) {
    jobs.push_back(std::async(std::launch::async, [&, m]() -> PopulationTrace {
      if (m == "cqed_ddi") return propagate_cqed_ddi(s, *out.modes, out.rates, cfg.time, popt);
      if (m == "cqed") return propagate_cqed(s, *out.modes_total, cfg.time, popt);
      if (m == "mqed_dmma") return propagate_mqed_dmma(s, out.rates, cfg.time, popt);
      WfOptions o = wopt;
      o.static_shift = wf_shift;
      if (cfg.wf_density == WfDensity::Effective) return propagate_mqed_wf(effective_total_sampler(s, *out.modes), s, cfg.time, o);
      return propagate_mqed_wf(SpectralSampler([&s, &sopt](double E) { return spectral_matrix(s, E, SpectralPart::Total, sopt); }),
                               s, cfg.time, o);
    }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      out.traces.push_back(jobs[i].get());
    } catch (const Error& e) {
      // Drain the remaining jobs before reporting.
      for (std::size_t j = i + 1; j < jobs.size(); ++j) try { jobs[j].get(); } catch (...) {}
      throw Error(e.code(), "method " + cfg.methods[i] + ": " + e.message());
    }
  }
  for (std::size_t i = 0; i < out.traces.size(); ++i)
    for (std::size_t j = i + 1; j < out.traces.size(); ++j) out.comparisons.push_back(compare_traces(out.traces[i], out.traces[j]));

  std::string& L = out.log;
  L += "scenario_hash = " + std::to_string(s.hash()) + "\n";
  for (std::size_t a = 0; a < s.size(); ++a) {
    const std::string p = "emitter." + std::to_string(a + 1) + ".";
    L += p + "position_nm = " + detail::vec_text(s[a].position) + "\n";
    L += p + "energy_eV = " + fmt12(s[a].transition_energy) + "\n";
    L += p + "dipole_D = " + detail::vec_text(s[a].dipole) + "\n";
  }
  const auto& env = s.environment();
  L += std::string("environment = ") + (env.has_interface() ? "drude" : "free_space") + "\n";
  if (env.has_interface()) {
    L += "drude.plasma_eV = " + fmt12(env.plasma_energy) + "\n";
    L += "drude.damping_eV = " + fmt12(env.damping_energy) + "\n";
    L += "drude.eps_inf = " + fmt12(env.eps_inf) + "\n";
    L += "interface_z_nm = " + fmt12(env.interface_z) + "\n";
  }
  L += "grid.n_omega = " + std::to_string(cfg.n_omega) + "\n";
  L += "grid.half_window_eV = " + fmt12(cfg.half_window_eV) + "\n";
  L += "grid.omega_min_eV = " + fmt12(omegas.front()) + "\n";
  L += "grid.omega_max_eV = " + fmt12(omegas.back()) + "\n";
  std::string ms;
  for (const auto& m : cfg.methods) ms += (ms.empty() ? "" : ", ") + m;
  L += "methods = " + ms + "\n";
  L += "modes.source = " + to_string(cfg.mode_source) + "\n";
  if (cfg.mode_source == ModeSource::Fixtures) L += "modes.panel = " + cfg.panel + "\n";
  if (cfg.mode_source == ModeSource::Fit) L += "modes.n_modes = " + std::to_string(cfg.n_modes) + "\n";
  if (cfg.mode_source == ModeSource::File) {
    L += "modes.file = " + cfg.modes_file + "\n";
    if (!cfg.modes_file_total.empty()) L += "modes.file_total = " + cfg.modes_file_total + "\n";
  }
  L += fit_log;
  L += "time.t_max_fs = " + fmt12(cfg.time.t_max) + "\n";
  L += "time.dt_fs = " + fmt12(cfg.time.dt) + "\n";
  L += std::string("rwa = ") + (cfg.rwa ? "true" : "false") + "\n";
  L += std::string("counter_rotating = ") + (cfg.counter_rotating ? "true" : "false") + "\n";
  L += "wf.density = " + to_string(cfg.wf_density) + "\n";
  L += "output_dir = " + cfg.output_dir + "\n";
  L += "tol.sommerfeld_rel = " + fmt12(sopt.rel_tol) + "\n";
  L += "tol.sommerfeld_max_panels = " + std::to_string(sopt.max_panels) + "\n";
  L += "tol.lindblad_step = " + fmt12(popt.step_tol) + "\n";
  L += "tol.lindblad_check_every = " + std::to_string(popt.step_check_every) + "\n";
  L += "tol.population = " + fmt12(popt.population_tol) + "\n";
  L += "tol.wf_kernel = " + fmt12(wopt.kernel_tol) + "\n";
  L += "tol.wf_step = " + fmt12(wopt.step_tol) + "\n";
  L += "tol.wf_step_check_span_fs = " + fmt12(wopt.step_check_span) + "\n";
  if (cfg.mode_source == ModeSource::Fit) {
    L += "tol.fit_gradient = " + fmt12(fopt.gradient_tol) + "\n";
    L += "tol.fit_max_iterations = " + std::to_string(fopt.max_iterations) + "\n";
  }
  L += "rates.gamma0_eV = " + detail::matrix_text(out.rates.gamma0) + "\n";
  L += "rates.v0_eV = " + detail::matrix_text(out.rates.v0) + "\n";
  L += "rates.gamma_total_eV = " + detail::matrix_text(out.rates.gamma_total) + "\n";
  L += "rates.v_total_eV = " + detail::matrix_text(out.rates.v_total) + "\n";
  L += "rates.delta_sc_eV = " + detail::matrix_text(out.rates.delta_sc) + "\n";
  if (wf_shift) L += "wf.static_shift_eV = " + detail::matrix_text(*wf_shift) + "\n";
  for (const auto& c : out.comparisons)
    L += "max_abs_dev." + c.method_a + "." + c.method_b + " = " + fmt12(c.max_abs()) + "\n";
  return out;
}

/// Runs a config and writes its artifacts into cfg.output_dir.
inline RunArtifacts run(const ScenarioConfig& cfg) {
  RunArtifacts a = execute(cfg);
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  const std::string dir = cfg.output_dir + "/";
  detail::write_file(dir + "jsc.csv", spectral_csv(a.jsc));
  if (a.modes) write_modeset(dir + "modes.txt", *a.modes);
  if (a.modes_total) write_modeset(dir + "modes_total.txt", *a.modes_total);
  for (const auto& t : a.traces) detail::write_file(dir + "trace_" + t.method + ".csv", t.csv());
  detail::write_file(dir + "compare.csv", comparison_csv(a.comparisons));
  detail::write_file(dir + "run.log", a.log);
  return a;
}

}  // namespace mqed
