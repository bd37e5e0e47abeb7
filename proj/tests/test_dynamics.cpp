#include <gtest/gtest.h>

#include <cmath>

#include "mqed/dynamics.hpp"
#include "mqed/fixtures.hpp"

using namespace mqed;

namespace {

EffectiveModeSet single_mode(double w, double kappa, double g) {
  EffectiveModeSet m;
  m.mode_energies = {w};
  m.mode_widths = {kappa};
  m.couplings = Mat::Constant(1, 1, g);
  return m;
}

Scenario lone(double E = 3.525) {
  return validate_scenario({Emitter{{0, 0, 7}, E, {10, 0, 0}}}, Environment::drude(5, 0.1));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST(FockBasis, Dimensions) {
  EXPECT_EQ(FockBasis(2, 4, 1).dim(), 7);
  EXPECT_EQ(FockBasis(1, 2, 2).dim(), 9);
  EXPECT_EQ(FockBasis(2, 0, 1).dim(), 3);
  const FockBasis b(2, 1, 1);
  EXPECT_EQ(b.state(0), (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(b.emitter_state(0), 1);
  EXPECT_EQ(b.emitter_state(1), 2);
  EXPECT_THROW(FockBasis(1, 1, 0), Error);
}

TEST(FockBasis, BosonicLowering) {
  const FockBasis b(0, 1, 3);
  const Mat a = b.mode_lowering(0);
  EXPECT_NEAR(a(2, 3), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(a(0, 1), 1.0, 1e-15);
}

TEST(Lindblad, VacuumRabiOscillation) {
  const double g = 0.01;
  TimeGrid grid{60.0, 0.05};
  const auto tr = propagate_cqed(lone(), single_mode(3.525, 1e-12, g), grid);
  for (std::size_t n = 0; n < tr.times.size(); n += 37) {
    const double c = std::cos(g * tr.times[n] / units::hbar);
    EXPECT_NEAR(tr.emitter(n, 0), c * c, 1e-6);
    EXPECT_NEAR(tr.photon(n, 0), 1 - c * c, 1e-6);
  }
}

TEST(Lindblad, BadCavityDecayRate) {
  // kappa >> g: Purcell rate 4 g^2 / kappa
  const double g = 0.002, kappa = 0.2;
  TimeGrid grid{200.0, 0.05};
  const auto tr = propagate_cqed(lone(), single_mode(3.525, kappa, g), grid);
  const double rate = 4 * g * g / kappa / units::hbar;
  EXPECT_NEAR(tr.emitter(4000, 0) / std::exp(-rate * 200.0), 1.0, 0.01);
}

TEST(Dmma, SingleEmitterExponential) {
  const auto s = lone();
  const auto r = rate_and_shift_matrices(s);
  const auto tr = propagate_mqed_dmma(s, r, TimeGrid{100.0, 0.05});
  for (std::size_t n = 0; n < tr.times.size(); n += 101)
    EXPECT_NEAR(tr.emitter(n, 0), std::exp(-r.gamma_total(0, 0) * tr.times[n] / units::hbar), 1e-9);
  EXPECT_NEAR(tr.ground(2000), 1 - tr.emitter(2000, 0), 1e-12);
}

TEST(Dmma, SymmetricPairClosedForm) {
  const auto s = validate_scenario({Emitter{{0, 0, 7}, 3.525, {10, 0, 0}}, Emitter{{1.5, 0, 7}, 3.525, {10, 0, 0}}},
                                   Environment::drude(5, 0.1));
  const auto r = rate_and_shift_matrices(s);
  const auto tr = propagate_mqed_dmma(s, r, TimeGrid{100.0, 0.05});
  const double G = r.gamma_total(0, 0), G12 = r.gamma_total(0, 1), V = r.v_total(0, 1);
  for (std::size_t n = 0; n < tr.times.size(); n += 53) {
    const double t = tr.times[n] / units::hbar;
    const std::complex<double> plus = std::exp(std::complex<double>(-(G + G12) / 2, -V) * t);
    const std::complex<double> minus = std::exp(std::complex<double>(-(G - G12) / 2, V) * t);
    EXPECT_NEAR(tr.emitter(n, 0), std::norm(0.5 * (plus + minus)), 1e-8);
    EXPECT_NEAR(tr.emitter(n, 1), std::norm(0.5 * (plus - minus)), 1e-8);
  }
}

TEST(CqedDdi, FreeSpaceTermsEnterOnlyHere) {
  const auto s = validate_scenario({Emitter{{0, 0, 7}, 3.525, {10, 0, 0}}, Emitter{{1.5, 0, 7}, 3.525, {10, 0, 0}}},
                                   Environment::drude(5, 0.1));
  const auto m = fixtures::modeset(fixtures::Table::CqedDdi, "5a");
  auto r = rate_and_shift_matrices(s);
  TimeGrid grid{40.0, 0.05};
  const auto with = propagate_cqed_ddi(s, m, r, grid);
  r.v0.setZero();
  r.gamma0.setZero();
  const auto without = propagate_cqed_ddi(s, m, r, grid);
  const auto plain = propagate_cqed(s, m, grid);
  EXPECT_GT(compare_traces(with, without).max_abs(), 0.1);
  EXPECT_LT(compare_traces(without, plain).max_abs(), 1e-14);
  EXPECT_EQ(with.method, "cqed_ddi");
  EXPECT_EQ(plain.method, "cqed");
}

TEST(CqedDdi, CounterRotatingTermsAreSmallForWeakCoupling) {
  const auto s = lone();
  const auto m = fixtures::modeset(fixtures::Table::CqedDdi, "4a");
  const auto r = rate_and_shift_matrices(s);
  TimeGrid grid{2.0, 0.002};
  PropagationOptions rwa, full;
  full.rwa = false;
  const auto a = propagate_cqed_ddi(s, m, r, grid, rwa);
  const auto b = propagate_cqed_ddi(s, m, r, grid, full);
  EXPECT_EQ(b.n_modes, 2);
  EXPECT_LT(compare_traces(a, b).max_abs(), 1e-4);
}

TEST(Lindblad, Errors) {
  const auto s = lone();
  const auto r = rate_and_shift_matrices(s);
  const auto two = fixtures::modeset(fixtures::Table::CqedDdi, "5a");
  EXPECT_EQ(code_of([&] { propagate_cqed_ddi(s, two, r, TimeGrid{1.0, 0.05}); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { propagate_cqed(s, fixtures::modeset(fixtures::Table::Cqed, "4b"), TimeGrid{20.0, 2.0}); }),
            ErrorCode::StepSizeTooLarge);
  PropagationOptions bad_start;
  bad_start.initial_emitter = 3;
  EXPECT_EQ(code_of([&] { propagate_mqed_dmma(s, r, TimeGrid{1.0, 0.05}, bad_start); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { propagate_mqed_dmma(s, r, TimeGrid{1.0, 0.0}); }), ErrorCode::InvalidGrid);
}

TEST(Lindblad, NegativeRateIsNonPhysical) {
  const FockBasis basis(1, 0, 1);
  LindbladGenerator gen;
  gen.hamiltonian = MatC::Zero(2, 2);
  gen.channels.push_back({Mat::Constant(1, 1, -0.05), {basis.emitter_lowering(0)}});
  PropagationOptions opt;
  opt.step_check_every = 0;
  EXPECT_EQ(code_of([&] { propagate_lindblad(gen, basis, TimeGrid{50.0, 0.05}, opt, false, 0.0, "x", 0); }),
            ErrorCode::NonPhysicalState);
}

TEST(Lindblad, ObserverSeesEveryStep) {
  std::size_t calls = 0;
  PropagationOptions opt;
  opt.observer = [&](double, const MatC& rho) {
    ++calls;
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
  };
  const auto s = lone();
  propagate_mqed_dmma(s, rate_and_shift_matrices(s), TimeGrid{1.0, 0.05}, opt);
  EXPECT_EQ(calls, 21u);
}

TEST(Trace, CsvRoundTripAndComparison) {
  const auto s = lone();
  const auto tr = propagate_mqed_dmma(s, rate_and_shift_matrices(s), TimeGrid{2.0, 0.5});
  const auto text = tr.csv();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t_fs,P_E1,P_ground");
  const auto back = parse_trace_csv(text, "again");
  EXPECT_EQ(back.csv(), text);
  EXPECT_LT(compare_traces(tr, back).max_abs(), 1e-11);
  auto shifted = back;
  shifted.times[2] += 0.1;
  EXPECT_EQ(code_of([&] { compare_traces(tr, shifted); }), ErrorCode::GridMismatch);
  auto shorter = back;
  shorter.times.pop_back();
  EXPECT_EQ(code_of([&] { compare_traces(tr, shorter); }), ErrorCode::GridMismatch);
  EXPECT_EQ(comparison_csv({compare_traces(tr, back)}).substr(0, 9), "method_a,");
}
