#include <gtest/gtest.h>

#include <cmath>

#include "mqed/dynamics.hpp"
#include "mqed/fixtures.hpp"
#include "mqed/mqed_wf.hpp"

using namespace mqed;

namespace {

Scenario lone(double h) { return validate_scenario({Emitter{{0, 0, h}, 3.525, {10, 0, 0}}}, Environment::drude(5, 0.1)); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST(Kernel, FlatDensityIsSincShaped) {
  // K(t) = J/hbar^2 * 2 sin(W t/hbar) / (t/hbar) for J flat on [E_M - W, E_M + W]
  detail::SampledDensity s;
  s.E = uniform_grid(2.0, 4.0, 201);
  s.J.assign(s.E.size(), Mat::Constant(1, 1, 1e-3));
  const auto K = detail::kernel_series(s, 3.0, 0.05, 400);
  EXPECT_NEAR(K[0](0, 0).real(), 2e-3 / (units::hbar * units::hbar), 1e-12);
  for (std::size_t n = 1; n < K.size(); n += 17) {
    const double x = n * 0.05 / units::hbar;
    EXPECT_NEAR(K[n](0, 0).real(), 1e-3 / (units::hbar * units::hbar) * 2 * std::sin(x) / x, 1e-12);
    EXPECT_NEAR(K[n](0, 0).imag(), 0.0, 1e-12);
  }
}

TEST(Kernel, PiecewiseLinearExactness) {
  // linear J on one panel: int_0^1 (a + b x) e^{-i x t} dx
  detail::SampledDensity s;
  s.E = {3.0, 4.0};
  s.J = {Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 3.0)};
  const auto K = detail::kernel_series(s, 3.0, 0.3, 30);
  for (std::size_t n = 0; n < K.size(); ++n) {
    const double t = n * 0.3 / units::hbar;
    std::complex<double> want;
    if (n == 0) {
      want = 2.0;
    } else {
      const std::complex<double> e = std::exp(std::complex<double>(0, -t));
      const std::complex<double> it(0, -t);
      want = (e - 1.0) / it + 2.0 * (e / it - (e - 1.0) / (it * it));
    }
    EXPECT_LT(std::abs(K[n](0, 0) * units::hbar * units::hbar - want), 1e-12) << n;
  }
}

TEST(PrincipalValue, SymmetricFlatWindowVanishes) {
  detail::SampledDensity s;
  s.E = uniform_grid(2.0, 4.0, 101);
  s.J.assign(s.E.size(), Mat::Constant(1, 1, 0.01));
  EXPECT_NEAR(detail::window_principal_value(s, 3.0)(0, 0), 0.0, 1e-15);
  // off-centre: -J ln((b - E_M)/(E_M - a))
  EXPECT_NEAR(detail::window_principal_value(s, 3.1)(0, 0), -0.01 * std::log(0.9 / 1.1), 1e-14);
}

TEST(PrincipalValue, WideWindowRecoversLorentzianShift) {
  const auto m = fixtures::modeset(fixtures::Table::CqedDdi, "4b");
  detail::SampledDensity s;
  s.E = uniform_grid(3.525 - 40.0, 3.525 + 40.0, 160001);
  for (double E : s.E) s.J.push_back(lorentzian_value(m, E));
  const double want = lorentzian_static_shift(m, 3.525)(0, 0);
  EXPECT_NEAR(detail::window_principal_value(s, 3.525)(0, 0), want, 1e-4 * std::abs(want) + 1e-6);
}

TEST(Wf, MarkovLimitForFlatDensity) {
  const double J = 2e-4;
  const auto s = lone(7);
  WfOptions opt;
  opt.n_omega = 801;
  const auto tr = propagate_mqed_wf([J](double) { return Mat::Constant(1, 1, J); }, s, TimeGrid{100.0, 0.05}, opt);
  const double rate = 2 * units::pi * J / units::hbar;
  for (std::size_t n = 200; n < tr.times.size(); n += 100)
    EXPECT_NEAR(tr.emitter(n, 0) / std::exp(-rate * tr.times[n]), 1.0, 0.01);
}

TEST(Wf, AgreesWithCavityModelForSingleEmitter) {
  const auto s = lone(7);
  const auto m = fixtures::modeset(fixtures::Table::CqedDdi, "4a");
  const auto r = rate_and_shift_matrices(s);
  WfOptions opt;
  opt.counter_rotating = false;
  opt.static_shift = effective_static_shift(r, m, 3.525);
  TimeGrid grid{100.0, 0.05};
  const auto wf = propagate_mqed_wf(effective_total_sampler(s, m), s, grid, opt);
  const auto ddi = propagate_cqed_ddi(s, m, r, grid);
  EXPECT_LT(compare_traces(wf, ddi).max_abs(), 1e-3);
  EXPECT_EQ(wf.method, "mqed_wf");
  EXPECT_NEAR(wf.ground(1000), 1 - wf.emitter(1000, 0), 1e-15);
}

TEST(Wf, GridSourceMatchesSampler) {
  const auto s = lone(7);
  const auto m = fixtures::modeset(fixtures::Table::CqedDdi, "4a");
  WfOptions opt;
  opt.check_kernel = false;
  opt.n_omega = 1001;
  TimeGrid grid{50.0, 0.05};
  const auto a = propagate_mqed_wf(effective_total_sampler(s, m), s, grid, opt);
  SpectralDensityGrid g;
  g.omegas = uniform_grid(3.525 - 1.5, 3.525 + 1.5, 1001);
  for (double E : g.omegas) g.values.push_back(free_space_matrix(s, E) + lorentzian_value(m, E));
  const auto b = propagate_mqed_wf(g, s, grid, opt);
  EXPECT_LT(compare_traces(a, b).max_abs(), 1e-12);
}

TEST(Wf, Errors) {
  const auto pair = validate_scenario({Emitter{{0, 0, 7}, 3.5}, Emitter{{2, 0, 7}, 3.6}}, Environment::drude(5, 0.1));
  EXPECT_EQ(code_of([&] { propagate_mqed_wf([](double) { return Mat::Zero(2, 2).eval(); }, pair, TimeGrid{}); }),
            ErrorCode::NonDegenerateEmitters);

  const auto s = lone(7);
  WfOptions coarse;
  coarse.n_omega = 40;
  auto narrow = [](double E) { return Mat::Constant(1, 1, 1e-3 * 0.0005 / ((E - 3.5) * (E - 3.5) + 0.0005 * 0.0005)); };
  EXPECT_EQ(code_of([&] { propagate_mqed_wf(narrow, s, TimeGrid{50.0, 0.05}, coarse); }), ErrorCode::KernelGridTooCoarse);

  const auto m = fixtures::modeset(fixtures::Table::CqedDdi, "4b");
  WfOptions big;
  big.check_kernel = false;
  EXPECT_EQ(code_of([&] { propagate_mqed_wf(effective_total_sampler(lone(1), m), lone(1), TimeGrid{60.0, 1.5}, big); }),
            ErrorCode::StepSizeTooLarge);

  WfOptions wrong;
  wrong.static_shift = Mat::Zero(2, 2);
  EXPECT_EQ(code_of([&] { propagate_mqed_wf(effective_total_sampler(s, m), s, TimeGrid{1.0, 0.05}, wrong); }),
            ErrorCode::ShapeMismatch);
}
