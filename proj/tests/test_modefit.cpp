#include <gtest/gtest.h>

#include <cmath>

#include "mqed/fixtures.hpp"
#include "mqed/modefit.hpp"

using namespace mqed;

namespace {

EffectiveModeSet two_modes() {
  EffectiveModeSet m;
  m.mode_energies = {3.45, 3.53};
  m.mode_widths = {0.15, 0.09};
  m.couplings.resize(2, 2);
  m.couplings << 0.004, 0.012, 0.003, -0.010;
  return m;
}

}  // namespace

TEST(Lorentzian, PeakHeight) {
  EffectiveModeSet m;
  m.mode_energies = {3.5};
  m.mode_widths = {0.1};
  m.couplings = Mat::Constant(1, 1, 0.02);
  // Omega^2 / pi * 2 / kappa at resonance
  EXPECT_NEAR(lorentzian_value(m, 3.5)(0, 0), 0.02 * 0.02 / units::pi * 2 / 0.1, 1e-16);
  EXPECT_NEAR(lorentzian_value(m, 3.55)(0, 0), 0.02 * 0.02 / units::pi * 0.05 / (0.05 * 0.05 + 0.05 * 0.05), 1e-16);
}

TEST(Lorentzian, ResolventFormAgrees) {
  const auto m = two_modes();
  const auto H = effective_hamiltonian(m);
  for (double w : {3.2, 3.45, 3.5, 3.9})
    EXPECT_LT((resolvent_value(m.couplings, H, w) - lorentzian_value(m, w)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Lorentzian, InvalidModesRejected) {
  auto m = two_modes();
  m.mode_widths[1] = 0.0;
  EXPECT_THROW(lorentzian_value(m, 3.5), Error);
  m = two_modes();
  m.mode_energies.pop_back();
  EXPECT_THROW(lorentzian_model(m, {3.5}), Error);
}

TEST(Canonicalize, SortsAndFixesSigns) {
  EffectiveModeSet m;
  m.mode_energies = {3.6, 3.4};
  m.mode_widths = {0.1, 0.2};
  m.couplings.resize(1, 2);
  m.couplings << -0.01, 0.02;
  const auto c = canonicalize(m);
  EXPECT_EQ(c.mode_energies, (std::vector<double>{3.4, 3.6}));
  EXPECT_EQ(c.mode_widths, (std::vector<double>{0.2, 0.1}));
  EXPECT_DOUBLE_EQ(c.couplings(0, 0), 0.02);
  EXPECT_DOUBLE_EQ(c.couplings(0, 1), 0.01);
  EXPECT_LT((lorentzian_value(c, 3.5) - lorentzian_value(m, 3.5)).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Fit, RecoversTwoEmitterTwoModeCurve) {
  const auto truth = two_modes();
  const auto target = lorentzian_model(truth, default_grid(3.5, 600));
  const auto r = fit_modes(target, 2);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.modes.fit_rms, 1e-8);
  const auto want = canonicalize(truth);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_NEAR(r.modes.mode_energies[j], want.mode_energies[j], 1e-6);
    EXPECT_NEAR(r.modes.mode_widths[j], want.mode_widths[j], 1e-6);
  }
  EXPECT_LT((r.modes.couplings - want.couplings).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Fit, DeterministicAcrossCalls) {
  const auto target = lorentzian_model(two_modes(), default_grid(3.5, 300));
  const auto a = fit_modes(target, 2), b = fit_modes(target, 2);
  EXPECT_EQ(modeset_text(a.modes), modeset_text(b.modes));
}

TEST(Fit, ReportsNonConvergence) {
  const auto target = lorentzian_model(two_modes(), default_grid(3.5, 300));
  FitOptions opt;
  opt.max_iterations = 2;
  opt.explore_iterations = 1;
  opt.throw_on_failure = true;
  try {
    fit_modes(target, 2, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FitDidNotConverge);
  }
  opt.throw_on_failure = false;
  const auto r = fit_modes(target, 2, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_THROW(require_converged(r), Error);
}

TEST(Fit, RejectsZeroModes) {
  const auto target = lorentzian_model(two_modes(), default_grid(3.5, 50));
  EXPECT_THROW(fit_modes(target, 0), Error);
}

TEST(FitReport, PerElementResiduals) {
  const auto m = two_modes();
  auto target = lorentzian_model(m, default_grid(3.5, 200));
  const auto exact = fit_report(m, target);
  EXPECT_EQ(exact.elements.size(), 3u);
  EXPECT_LT(exact.relative_rms, 1e-15);
  EXPECT_NEAR(exact.elements[1].peak_ratio, 1.0, 1e-12);
  for (auto& v : target.values) v(0, 0) *= 1.1;
  const auto off = fit_report(m, target);
  EXPECT_GT(off.elements[0].rms, 0.0);
  EXPECT_EQ(off.elements[2].rms, 0.0);
  EXPECT_NEAR(off.elements[0].peak_ratio, 1 / 1.1, 1e-12);
  EXPECT_EQ(off.csv().substr(0, 6), "alpha,");
}

TEST(ModeSetFile, RoundTrip) {
  auto m = two_modes();
  m.fit_rms = 1.5e-9;
  m.target_part = SpectralPart::Total;
  const auto text = modeset_text(m);
  const auto back = parse_modeset(text);
  EXPECT_EQ(back.target_part, SpectralPart::Total);
  EXPECT_EQ(modeset_text(back), text);
  EXPECT_LT((back.couplings - m.couplings).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ModeSetFile, Errors) {
  try {
    parse_modeset("n_modes=1\nomega_ph_j_eV=3.5\nbogus=1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  try {
    parse_modeset("n_modes=2\nomega_ph_j_eV=3.5 3.6\nkappa_ph_j_meV=100\nOmega_alpha_j_meV=1 2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Fixtures, PrintedValuesVerbatim) {
  const auto& r5f = fixtures::row(fixtures::Table::CqedDdi, "5f");
  EXPECT_NE(fixtures::row_text(fixtures::Table::CqedDdi, r5f).find("107.2"), std::string::npos);
  const auto m = fixtures::modeset(fixtures::Table::CqedDdi, "5f");
  EXPECT_DOUBLE_EQ(m.couplings(0, 3), 0.1072);
  const auto t2 = fixtures::modeset(fixtures::Table::Cqed, "4b");
  EXPECT_EQ(t2.mode_energies, (std::vector<double>{3.513, 3.535}));
  EXPECT_EQ(t2.target_part, SpectralPart::Total);
  EXPECT_THROW(fixtures::row(fixtures::Table::Cqed, "6a"), Error);
}

TEST(Fixtures, EmittedFilesRoundTrip) {
  for (auto t : {fixtures::Table::CqedDdi, fixtures::Table::Cqed})
    for (const auto& r : fixtures::rows(t)) {
      const auto m = parse_modeset(fixtures::row_text(t, r));
      const auto again = parse_modeset(modeset_text(m));
      EXPECT_EQ(modeset_text(again), modeset_text(m)) << r.panel;
      EXPECT_EQ(m.n_modes(), r.d_nm > 0 ? 4u : 2u);
    }
}
