#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mqed/mqed.hpp"

namespace {

// One line per failure so scripts can match on code=.
int report(const mqed::Error& e) {
  std::cerr << "error code=" << mqed::to_string(e.code()) << " message=\"" << e.message() << "\"\n";
  return 2;
}

int cmd_run(const std::string& path, const std::string& out) {
  auto cfg = mqed::read_config(path);
  if (!out.empty()) cfg.output_dir = out;
  const auto a = mqed::run(cfg);
  for (const auto& c : a.comparisons)
    std::cout << c.method_a << " vs " << c.method_b << ": max |dP| = " << mqed::detail::fmt12(c.max_abs()) << "\n";
  std::cout << "wrote " << cfg.output_dir << "\n";
  return 0;
}

int cmd_fixtures_list() {
  for (auto t : {mqed::fixtures::Table::CqedDdi, mqed::fixtures::Table::Cqed})
    for (const auto& r : mqed::fixtures::rows(t))
      std::cout << mqed::fixtures::file_name(t, r) << "  h=" << r.h_nm << " nm"
                << (r.d_nm > 0 ? "  d=" + mqed::detail::fmt12(r.d_nm) + " nm" : "") << "\n";
  return 0;
}

int cmd_fixtures_emit(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw mqed::Error(mqed::ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
  for (auto t : {mqed::fixtures::Table::CqedDdi, mqed::fixtures::Table::Cqed})
    for (const auto& r : mqed::fixtures::rows(t))
      mqed::detail::write_file(dir + "/" + mqed::fixtures::file_name(t, r), mqed::fixtures::row_text(t, r));
  std::cout << "wrote 16 mode-set files to " << dir << "\n";
  return 0;
}

int cmd_fit(const std::string& path, std::size_t n_modes, const std::string& part, const std::string& out,
            const std::string& report_path) {
  const auto grid = mqed::parse_spectral_csv(mqed::detail::read_file(path), mqed::spectral_part_from_string(part));
  const auto r = mqed::fit_modes(grid, n_modes);
  mqed::require_converged(r);
  const std::string text = mqed::modeset_text(r.modes);
  if (out.empty())
    std::cout << text;
  else
    mqed::detail::write_file(out, text);
  if (!report_path.empty()) mqed::detail::write_file(report_path, mqed::fit_report(r.modes, grid).csv());
  std::cerr << "fit: " << r.iterations << " iterations, rms/peak " << mqed::detail::fmt12(r.modes.fit_rms) << "\n";
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b) {
  const auto ta = mqed::parse_trace_csv(mqed::detail::read_file(a), std::filesystem::path(a).stem().string());
  const auto tb = mqed::parse_trace_csv(mqed::detail::read_file(b), std::filesystem::path(b).stem().string());
  std::cout << mqed::comparison_csv({mqed::compare_traces(ta, tb)});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polariton-mediated emitter dynamics near a Drude surface"};
  app.require_subcommand(1);

  std::string config, out;
  auto* run = app.add_subcommand("run", "Run a scenario config and write its artifacts");
  run->add_option("config", config, "Scenario config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Override output_dir");

  auto* fx = app.add_subcommand("fixtures", "Bundled mode-set parameter tables");
  fx->require_subcommand(1);
  auto* fx_list = fx->add_subcommand("list", "List bundled rows");
  std::string emit_dir;
  auto* fx_emit = fx->add_subcommand("emit", "Write all rows as mode-set files");
  fx_emit->add_option("dir", emit_dir, "Output directory")->required();

  std::string jsc, part = "scattering", fit_out, fit_report;
  std::size_t n_modes = 0;
  auto* fit = app.add_subcommand("fit", "Fit Lorentzian modes to a spectral-density CSV");
  fit->add_option("jsc", jsc, "Spectral-density CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--modes", n_modes, "Number of modes")->required()->check(CLI::PositiveNumber);
  fit->add_option("--part", part, "Label for the fitted part")->check(CLI::IsMember({"free_space", "scattering", "total"}));
  fit->add_option("-o,--out", fit_out, "Mode-set output file (default stdout)");
  fit->add_option("--report", fit_report, "Per-element residual CSV");

  std::string ca, cb;
  auto* cmp = app.add_subcommand("compare", "Population deviations between two trace CSVs");
  cmp->add_option("a", ca)->required()->check(CLI::ExistingFile);
  cmp->add_option("b", cb)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out);
    if (*fx_list) return cmd_fixtures_list();
    if (*fx_emit) return cmd_fixtures_emit(emit_dir);
    if (*fit) return cmd_fit(jsc, n_modes, part, fit_out, fit_report);
    if (*cmp) return cmd_compare(ca, cb);
  } catch (const mqed::Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error code=Internal message=\"" << e.what() << "\"\n";
    return 3;
  }
  return 0;
}
