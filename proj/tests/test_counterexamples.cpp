#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "common.hpp"
#include "lcns/counterexamples.hpp"
#include "lcns/errors.hpp"
#include "lcns/observability.hpp"

using namespace lcns;
using lcns::fixtures::reference_barotropic;

TEST(Filter, PolynomialValues) {
  EXPECT_EQ(pn_value(1, 1), 0.0);
  EXPECT_EQ(pn_value(1, -1), 0.0);
  EXPECT_EQ(pn_value(1, 2), 3.0);
  EXPECT_EQ(pn_value(1, -2), 3.0);
  EXPECT_EQ(pn_value(2, 3), 40.0);
}

TEST(Filter, AnnihilatesLowModes) {
  std::mt19937_64 rng(4);
  for (int N : {1, 3, 6}) {
    const auto f = random_field(3, 10, rng);
    const auto g = pn_filter(f, N);
    for (int n = 1; n <= N; ++n) {
      EXPECT_EQ(g.at(n).norm(), 0.0);
      EXPECT_EQ(g.at(-n).norm(), 0.0);
    }
    for (int n = N + 1; n <= 10; ++n) EXPECT_EQ(g.at(n), (pn_value(N, n) * f.at(n)).eval());
  }
}

TEST(Filter, RequiresMeanZero) {
  auto f = SpectralField::zero(2, 2);
  f.at(0)(0) = 1.0;
  EXPECT_THROW(pn_filter(f, 1), DomainError);
}

TEST(SmallTime, SupportOutsideWindowRejected) {
  BumpSpec spec;
  spec.explicit_pieces = {BumpPiece{1.0, 1.0, 1.0}};  // inside (0, ūT)
  try {
    small_time_witness(reference_barotropic(), 3.0, {8, 12, 16, 24}, spec);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.kind(), "SupportError");
  }
}

TEST(SmallTime, RequiresSubcriticalTime) {
  EXPECT_THROW(small_time_witness(reference_barotropic(), 8.0, {8, 12, 16, 24}), DomainError);
}

TEST(SmallTime, QuotientDecaysFasterThanInverseSquare) {
  const auto r = small_time_witness(reference_barotropic(), 3.0, {8, 12, 16, 24});
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_LE(r.slope, -2.0 + 0.3);
  for (const auto& row : r.rows) {
    EXPECT_GT(row.quotient, 0.0);
    EXPECT_LE(row.energy_err, 1e-3 * row.energy);
  }
  EXPECT_LE(r.tail, 1e-12);
  EXPECT_GT(r.x_left, 0.9 * 3.0);
  EXPECT_LT(r.x_right, kTwoPi);
}

TEST(SmallTime, TransportComparisonBoundedByInverseN) {
  const auto r = small_time_witness(reference_barotropic(), 3.0, {8, 12, 16, 24});
  for (const auto& row : r.rows) EXPECT_LE(row.transport_gap, r.transport_C / row.N * (1 + 1e-12));
  EXPECT_LE(r.transport_slope, -1.0);
}

// Re-randomised bumps: the fitted slope should move by less than 0.2.
TEST(SmallTime, SlopeStableUnderBumpReRandomisation) {
  std::vector<double> slopes;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    BumpSpec spec;
    spec.seed = seed;
    slopes.push_back(small_time_witness(reference_barotropic(), 3.0, {8, 12, 16, 24}, spec).slope);
  }
  const double spread = *std::max_element(slopes.begin(), slopes.end()) - *std::min_element(slopes.begin(), slopes.end());
  EXPECT_LT(spread, 0.2) << "slopes " << slopes[0] << ", " << slopes[1] << ", " << slopes[2];
}

TEST(Degenerate, BarotropicCrossModeWitness) {
  const auto p = lcns::fixtures::degenerate_barotropic();
  const auto w = degenerate_uc_witness(p, Channel::Density, build_slice(p, 4));
  EXPECT_TRUE(w.sound());
  EXPECT_LE(w.max_abs_y, 1e-10 * w.scale);
  EXPECT_GT(w.min_state_norm, 0.0);
  EXPECT_EQ(std::abs(w.n_plus), 1);
  EXPECT_EQ(w.n_plus, -w.n_minus);
}

TEST(Degenerate, NonBarotropicWitnessAllChannels) {
  const auto p = lcns::fixtures::instance_b();
  const auto s = build_slice(p, 3);
  for (auto c : {Channel::Density, Channel::Velocity, Channel::Temperature}) {
    const auto w = degenerate_uc_witness(p, c, s);
    EXPECT_TRUE(w.sound()) << to_string(c);
    EXPECT_LE(std::abs(w.value + 1.0), 1e-10);
    EXPECT_GT(w.min_state_norm, 0.0);
    // The terminal datum really is silent: its observation signal vanishes.
    const auto y = observation_signal(expand_in_eigenbasis(w.terminal, s), s, c, w.T);
    for (double t : {0.0, 0.3, 0.9}) EXPECT_LE(std::abs(y(t)), 1e-9 * w.scale);
  }
}

TEST(Degenerate, NonDegenerateRejected) {
  const auto p = reference_barotropic();
  try {
    degenerate_uc_witness(p, Channel::Density, build_slice(p, 4));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.kind(), "NotDegenerate");
  }
}

TEST(Degenerate, SoundnessProperty) {
  // Exactly degenerate barotropic instances: b ρ̄ − ū² = (m μ0/2)².
  for (int m = 1; m <= 3; ++m)
    for (double u : {0.5, 1.0, 1.7}) {
      const double mu0 = 1.0, rho = 1.0;
      const double b = (std::pow(m * mu0 / 2.0, 2) + u * u) / rho;
      const auto p = make_barotropic(rho, u, mu0, b);
      const auto w = degenerate_uc_witness(p, Channel::Velocity, build_slice(p, m + 2));
      EXPECT_TRUE(w.sound()) << "m = " << m << " u = " << u;
    }
}

TEST(Regularity, VelocityInverseSquare) {
  const auto r = regularity_gap_witness(reference_barotropic(), Channel::Velocity, 0.0, {4, 8, 16, 32});
  EXPECT_GE(r.slope, -2.3);
  EXPECT_LE(r.slope, -1.7);
  EXPECT_TRUE(r.quotient_decreasing);
}

TEST(Regularity, HalfOrder) {
  const auto r = regularity_gap_witness(reference_barotropic(), Channel::Velocity, 0.5, {4, 8, 16, 32});
  EXPECT_NEAR(r.slope, -1.0, 0.3);
  EXPECT_EQ(r.expected_slope, -1.0);
}

TEST(Regularity, Preconditions) {
  const auto p = reference_barotropic();
  EXPECT_THROW(regularity_gap_witness(p, Channel::Velocity, 1.0, {4, 8}), DomainError);
  EXPECT_THROW(regularity_gap_witness(p, Channel::Density, 0.0, {4, 8}), DomainError);
  EXPECT_THROW(regularity_gap_witness(p, Channel::Velocity, 0.0, {8, 4}), DomainError);
}

TEST(Slope, LogLogFit) {
  EXPECT_NEAR(loglog_slope({1, 2, 4, 8}, {1, 0.25, 0.0625, 0.015625}), -2.0, 1e-14);
}
