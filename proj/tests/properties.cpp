#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "mqed/dynamics.hpp"
#include "mqed/fixtures.hpp"
#include "mqed/greens.hpp"
#include "mqed/modefit.hpp"
#include "mqed/mqed_wf.hpp"
#include "mqed/spectral.hpp"

using namespace mqed;

namespace {

Scenario pair_above(double h, double d) {
  return validate_scenario({Emitter{{0, 0, h}, 3.525, {10, 0, 0}}, Emitter{{d, 0, h}, 3.525, {10, 0, 0}}},
                           Environment::drude(5, 0.1));
}

// Random Hermitian H and PSD rate matrices on a small space.
LindbladGenerator random_generator(const FockBasis& basis, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Index d = basis.dim();
  MatC A(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) A(i, j) = {0.02 * n(rng), 0.02 * n(rng)};
  LindbladGenerator gen;
  gen.hamiltonian = 0.5 * (A + A.adjoint());
  const Eigen::Index k = basis.n_emitters();
  Mat B(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) B(i, j) = 0.01 * n(rng);
  std::vector<Mat> ops;
  for (Eigen::Index e = 0; e < k; ++e) ops.push_back(basis.emitter_lowering(e));
  gen.channels.push_back({B * B.transpose(), ops});
  for (Eigen::Index j = 0; j < basis.n_modes(); ++j)
    gen.channels.push_back({Mat::Constant(1, 1, 0.05 + 0.05 * std::abs(n(rng))), {basis.mode_lowering(j)}});
  return gen;
}

}  // namespace

class RandomLindblad : public ::testing::TestWithParam<unsigned> {};

TEST_P(RandomLindblad, TracePreservedAndPositive) {
  const FockBasis basis(2, 2, 2);
  const auto gen = random_generator(basis, GetParam());
  double worst_trace = 0.0, worst_eig = 0.0;
  PropagationOptions opt;
  opt.observer = [&](double, const MatC& rho) {
    worst_trace = std::max(worst_trace, std::abs(rho.trace().real() - 1.0));
    Eigen::SelfAdjointEigenSolver<MatC> es(rho);
    worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
  };
  propagate_lindblad(gen, basis, TimeGrid{50.0, 0.05}, opt, false, 0.0, "random", 0);
  EXPECT_LE(worst_trace, 1e-6);
  EXPECT_GE(worst_eig, -1e-6);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomLindblad, ::testing::Range(1u, 9u));

class FixturePanels : public ::testing::TestWithParam<const char*> {};

TEST_P(FixturePanels, SingleExcitationBookkeeping) {
  const auto& row = fixtures::row(fixtures::Table::CqedDdi, GetParam());
  const auto s = row.d_nm > 0 ? pair_above(row.h_nm, row.d_nm)
                              : validate_scenario({Emitter{{0, 0, row.h_nm}, 3.525, {10, 0, 0}}}, Environment::drude(5, 0.1));
  const auto r = rate_and_shift_matrices(s);
  double worst_eig = 0.0;
  PropagationOptions opt;
  opt.observer = [&](double, const MatC& rho) {
    Eigen::SelfAdjointEigenSolver<MatC> es(rho);
    worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
  };
  const auto tr = propagate_cqed_ddi(s, fixtures::modeset(fixtures::Table::CqedDdi, GetParam()), r, TimeGrid{200.0, 0.05}, opt);
  for (std::size_t t = 0; t < tr.times.size(); ++t) EXPECT_NEAR(tr.values.row(static_cast<Eigen::Index>(t)).sum(), 1.0, 1e-6);
  EXPECT_GE(worst_eig, -1e-6);
  const auto dm = propagate_mqed_dmma(s, r, TimeGrid{200.0, 0.05});
  for (std::size_t t = 0; t < dm.times.size(); t += 50) EXPECT_NEAR(dm.values.row(static_cast<Eigen::Index>(t)).sum(), 1.0, 1e-6);
}

TEST_P(FixturePanels, StepHalvingConverged) {
  const auto& row = fixtures::row(fixtures::Table::Cqed, GetParam());
  const auto s = row.d_nm > 0 ? pair_above(row.h_nm, row.d_nm)
                              : validate_scenario({Emitter{{0, 0, row.h_nm}, 3.525, {10, 0, 0}}}, Environment::drude(5, 0.1));
  const auto m = fixtures::modeset(fixtures::Table::Cqed, GetParam());
  const auto a = propagate_cqed(s, m, TimeGrid{100.0, 0.05});
  const auto b = propagate_cqed(s, m, TimeGrid{100.0, 0.025});
  double worst = 0.0;
  for (std::size_t t = 0; t < a.times.size(); ++t)
    for (Eigen::Index c = 0; c < a.values.cols(); ++c)
      worst = std::max(worst, std::abs(a.values(static_cast<Eigen::Index>(t), c) - b.values(static_cast<Eigen::Index>(2 * t), c)));
  EXPECT_LE(worst, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Panels, FixturePanels, ::testing::Values("4a", "4b", "5a", "5b", "5c", "5d", "5e", "5f"));

TEST(Couplings, ReconstructionIdentity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Emitter> em;
    for (int a = 0; a < 3; ++a) em.push_back(Emitter{{u(rng), u(rng), u(rng) + 5}, 3.525, {u(rng), u(rng), u(rng)}});
    const auto s = validate_scenario(em, Environment::free_space());
    const auto w = uniform_grid(0.2, 8.0, 40);
    const auto g = free_space_couplings_g(s, w);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const Mat J = free_space_matrix(s, w[k]);
      EXPECT_LE((g[k] * g[k].transpose() - J).cwiseAbs().maxCoeff(), 1e-9 * J.cwiseAbs().maxCoeff());
    }
  }
}

class FlatDensity : public ::testing::TestWithParam<double> {};

TEST_P(FlatDensity, VolterraMarkovLimit) {
  const double J = GetParam();
  const auto s = validate_scenario({Emitter{{0, 0, 5}, 3.525, {10, 0, 0}}}, Environment::drude(5, 0.1));
  const auto tr = propagate_mqed_wf([J](double) { return Mat::Constant(1, 1, J); }, s, TimeGrid{150.0, 0.05});
  const double rate = 2 * units::pi * J / units::hbar;
  double worst = 0.0;
  for (std::size_t n = 100; n < tr.times.size(); ++n)
    worst = std::max(worst, std::abs(tr.emitter(n, 0) / std::exp(-rate * tr.times[n]) - 1.0));
  EXPECT_LE(worst, 0.01);
  // weak flat coupling: no revivals
  for (std::size_t n = 1; n < tr.times.size(); ++n) EXPECT_LE(tr.emitter(n, 0), tr.emitter(n - 1, 0) + 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Strengths, FlatDensity, ::testing::Values(1e-5, 1e-4, 5e-4, 1e-3));

TEST(Greens, SelfSpectralDensityNonnegative) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> h(0.3, 30.0), en(0.5, 6.0), d(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Vec3 mu(d(rng), d(rng), d(rng));
    if (mu.norm() < 1e-3) mu = Vec3::UnitZ();
    const auto s = validate_scenario({Emitter{{0, 0, h(rng)}, 3.525, mu}}, Environment::drude(5, 0.1));
    const double E = en(rng);
    EXPECT_GE(spectral_matrix(s, E, SpectralPart::Total)(0, 0), 0.0) << "E = " << E;
  }
}

TEST(Greens, ScatteringDecaysWithHeightOffResonance) {
  const auto env = Environment::drude(5, 0.1);
  for (double E : {1.0, 2.0, 4.5, 6.0}) {
    const double k = units::wavenumber(E);
    double prev = std::numeric_limits<double>::infinity();
    for (double kh = 1.05; kh <= 8.0; kh += 0.25) {
      const double h = kh / k;
      const double mag = halfspace_scattering_green({0, 0, h}, {0, 0, h}, E, env).value.cwiseAbs().maxCoeff();
      EXPECT_LT(mag, prev) << "E = " << E << ", k0h = " << kh;
      prev = mag;
    }
  }
}

TEST(Greens, DoublingNodesWithinErrorEstimate) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> xy(-5.0, 5.0), z(0.5, 10.0), en(1.0, 5.0);
  const auto env = Environment::drude(5, 0.1);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 r1(xy(rng), xy(rng), z(rng)), r2(xy(rng), xy(rng), z(rng));
    const double E = en(rng);
    const auto coarse = halfspace_scattering_green(r1, r2, E, env);
    SommerfeldOptions fine;
    fine.min_panels = 64;
    const auto refined = halfspace_scattering_green(r1, r2, E, env, fine);
    EXPECT_LE((refined.value - coarse.value).cwiseAbs().maxCoeff(), coarse.error_estimate + 1e-14 * coarse.value.cwiseAbs().maxCoeff());
  }
}

namespace {

double asym(const Mat& m) { return (m - m.transpose()).cwiseAbs().maxCoeff() / std::max(m.cwiseAbs().maxCoeff(), 1e-300); }

Scenario random_triple(std::mt19937& rng) {
  std::uniform_real_distribution<double> xy(-4.0, 4.0), z(0.5, 8.0), d(-1.0, 1.0);
  std::vector<Emitter> em;
  for (int a = 0; a < 3; ++a) em.push_back(Emitter{{xy(rng), xy(rng), z(rng)}, 3.525, {d(rng) + 1.5, d(rng), d(rng)}});
  return validate_scenario(em, Environment::drude(5, 0.1));
}

}  // namespace

TEST(Spectral, ProducedMatricesSymmetric) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = random_triple(rng);
    for (double E : {2.0, 3.525, 4.5})
      for (auto part : {SpectralPart::FreeSpace, SpectralPart::Scattering, SpectralPart::Total})
        EXPECT_LE(asym(spectral_matrix(s, E, part)), 1e-10);
    const auto r = rate_and_shift_matrices(s);
    for (const Mat* m : {&r.gamma0, &r.v0, &r.gamma_total, &r.v_total, &r.delta_sc}) EXPECT_LE(asym(*m), 1e-10);
    const Mat S = normalized_overlap_matrix(free_space_matrix(s, 3.525));
    EXPECT_LE(asym(S), 1e-10);
    EXPECT_LE(asym(coupling_factor_W(S)), 1e-10);
  }
}

TEST(Spectral, CouplingsVanishAtNonpositiveFrequency) {
  std::mt19937 rng(9);
  const auto s = random_triple(rng);
  const auto g = free_space_couplings_g(s, {-2.0, -0.5, 0.0, 0.5});
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(g[k].cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(g[3].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Spectral, RateIsTwoPiDensityAtPairEnergy) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = random_triple(rng);
    const auto r = rate_and_shift_matrices(s);
    const Mat J = spectral_matrix(s, 3.525, SpectralPart::Total);
    EXPECT_LE((2 * units::pi * J - r.gamma_total).cwiseAbs().maxCoeff(), 1e-10 * r.gamma_total.cwiseAbs().maxCoeff());
  }
}

TEST(Lorentzian, ColumnSignFlipLeavesModelUnchanged) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const auto grid = default_grid(3.525, 400);
  for (const char* panel : {"5a", "5d"}) {
    auto m = fixtures::modeset(fixtures::Table::CqedDdi, panel);
    const auto base = lorentzian_model(m, grid);
    m.couplings.col(static_cast<Eigen::Index>(rng() % m.n_modes())) *= -1.0;
    const auto flipped = lorentzian_model(m, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
      EXPECT_LE((flipped.values[k] - base.values[k]).cwiseAbs().maxCoeff(), 1e-12 * base.values[k].cwiseAbs().maxCoeff() + 1e-300);
  }
}

TEST(Fit, ExtraSeededModeNeverWorsens) {
  const auto s = pair_above(7.0, 3.0);
  const auto target = spectral_density(s, uniform_grid(2.525, 4.525, 401), SpectralPart::Scattering);
  const auto n2 = fit_modes(target, 2).modes;
  const Eigen::VectorXd tail = 1e-6 * Eigen::VectorXd::Ones(2);  // starts negligible against the peak
  const auto seeded = detail::append_mode(n2, 2, 4.3, 0.3, tail);
  const auto n3 = fit_modes(target, 3, {}, seeded).modes;
  EXPECT_LE(n3.fit_rms, n2.fit_rms + 1e-12);
}

class SmallSeparation : public ::testing::TestWithParam<const char*> {};

TEST_P(SmallSeparation, DissipativeModelCloserThanPlainCavity) {
  const auto& row = fixtures::row(fixtures::Table::CqedDdi, GetParam());
  const auto s = pair_above(row.h_nm, row.d_nm);
  const auto m = fixtures::modeset(fixtures::Table::CqedDdi, GetParam());
  const auto r = rate_and_shift_matrices(s);
  const TimeGrid grid{200.0, 0.05};
  WfOptions o;
  o.static_shift = effective_static_shift(r, m, s.mean_energy());
  const auto ref = propagate_mqed_wf(effective_total_sampler(s, m), s, grid, o);
  const auto ddi = propagate_cqed_ddi(s, m, r, grid);
  const auto plain = propagate_cqed(s, fixtures::modeset(fixtures::Table::Cqed, GetParam()), grid);
  EXPECT_LT(compare_traces(ddi, ref).max_abs(), compare_traces(plain, ref).max_abs());
}

INSTANTIATE_TEST_SUITE_P(Panels, SmallSeparation, ::testing::Values("5a", "5b"));
