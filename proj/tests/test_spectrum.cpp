#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "common.hpp"
#include "lcns/errors.hpp"
#include "lcns/spectrum.hpp"

using namespace lcns;
using lcns::fixtures::instance_a;
using lcns::fixtures::instance_b;
using lcns::fixtures::reference_barotropic;
using lcns::fixtures::unit_barotropic;

namespace {

const EigenPair& pair_of(const ModeSpectrum& ms, Branch b) {
  for (const auto& e : ms.pairs)
    if (e.branch == b) return e;
  throw std::runtime_error("branch missing");
}

bool near(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST(ModeMatrix, UnitBarotropicModeOne) {
  const auto m = mode_matrix(unit_barotropic(), 1);
  CMat expect(2, 2);
  expect << kI, kI, kI, cplx(-1, 1);
  EXPECT_LE((m.entries - expect).norm(), 1e-15);
}

TEST(ModeMatrix, ForwardIsConjugateOfAdjoint) {
  const auto p = reference_barotropic();
  for (int n : {-3, 1, 5}) {
    const auto a = mode_matrix(p, n).entries;
    const auto f = mode_matrix(p, n, MatrixKind::Forward).entries;
    EXPECT_LE((f - a.conjugate()).norm(), 1e-14);
  }
}

TEST(ModeMatrix, ModeZeroExcludedButSymbolVanishes) {
  EXPECT_THROW(mode_matrix(unit_barotropic(), 0), DomainError);
  EXPECT_THROW(mode_matrix(instance_a(), 0), DomainError);
  EXPECT_EQ(mode_symbol(unit_barotropic(), 0).entries.norm(), 0.0);
  EXPECT_EQ(mode_symbol(instance_a(), 0).entries.norm(), 0.0);
}

TEST(ModeMatrix, NonBarotropicLayout) {
  const auto p = nonbarotropic(instance_a());
  const int n = 2;
  const cplx in(0.0, n);
  CMat R(3, 3);
  R << p.u_bar, p.rho_bar, 0.0, p.R * p.theta_bar / p.rho_bar, p.lambda0 * in + p.u_bar, p.R, 0.0,
      p.R * p.theta_bar / p.c0, p.kappa0 * in + p.u_bar;
  EXPECT_LE((mode_matrix(instance_a(), n).entries - in * R).norm(), 1e-13);
}

TEST(ModeMatrix, InstanceATrace) {
  EXPECT_TRUE(near(mode_matrix(instance_a(), 1).entries.trace(), cplx(-3, 3), 1e-14));
}

TEST(EigenBarotropic, DoubleValueAtTwo) {
  const auto [h, p] = eigen_barotropic(barotropic(unit_barotropic()), 2);
  EXPECT_TRUE(near(h.value, cplx(-2, 2), 1e-12));
  EXPECT_TRUE(near(p.value, cplx(-2, 2), 1e-12));
  EXPECT_EQ(h.alg_mult, 2);
}

TEST(EigenBarotropic, ModeOne) {
  const auto [h, p] = eigen_barotropic(barotropic(unit_barotropic()), 1);
  EXPECT_TRUE(near(h.value, cplx(-0.5, 1 + std::sqrt(3.0) / 2), 1e-13));
  EXPECT_TRUE(near(p.value, cplx(-0.5, 1 - std::sqrt(3.0) / 2), 1e-13));
  EXPECT_NEAR(h.value.imag(), 1.8660, 1e-4);
  EXPECT_NEAR(p.value.imag(), 0.1340, 1e-4);
}

TEST(EigenBarotropic, ModeThree) {
  const auto [h, p] = eigen_barotropic(barotropic(unit_barotropic()), 3);
  EXPECT_TRUE(near(h.value, cplx((-9 + std::sqrt(45.0)) / 2, 3), 1e-13));
  EXPECT_TRUE(near(p.value, cplx((-9 - std::sqrt(45.0)) / 2, 3), 1e-13));
  EXPECT_NEAR(h.value.real(), -1.1459, 1e-4);
  EXPECT_NEAR(p.value.real(), -7.8541, 1e-4);
}

TEST(EigenNonBarotropic, InstanceATripleRoot) {
  const auto pairs = eigen_nonbarotropic(nonbarotropic(instance_a()), 1);
  ASSERT_EQ(pairs.size(), 3u);
  for (const auto& e : pairs) {
    EXPECT_TRUE(near(e.value, cplx(-1, 1), 1e-8));
    EXPECT_EQ(e.alg_mult, 3);
  }
}

TEST(EigenNonBarotropic, InstanceBSharedValue) {
  for (int n : {1, -1}) {
    const auto pairs = eigen_nonbarotropic(nonbarotropic(instance_b()), n);
    const bool hit = std::any_of(pairs.begin(), pairs.end(), [](const EigenPair& e) { return near(e.value, -1.0, 1e-10); });
    EXPECT_TRUE(hit) << "n = " << n;
  }
}

TEST(EigenNonBarotropic, AnchorsAtFifty) {
  const auto q = make_nonbarotropic(1, 1, 1, 1, 2, 1, 1);
  const auto pairs = eigen_nonbarotropic(q, 50);
  const cplx i50(0.0, 50.0);
  EXPECT_EQ(pairs[0].branch, Branch::Hyperbolic);
  EXPECT_LE(std::abs(pairs[0].value - (i50 * q.u_bar - q.omega_bar)), 5.0 / 50);
  EXPECT_LE(std::abs(pairs[1].value - (-2500.0 + i50 * q.u_bar)), 5.0);
  EXPECT_LE(std::abs(pairs[2].value - (-5000.0 + i50 * q.u_bar)), 5.0);
}

TEST(Branches, NearestAnchor) {
  const auto p = unit_barotropic();
  EXPECT_EQ(classify_branch(p, 3, cplx(-1.1459, 3)), Branch::Hyperbolic);
  EXPECT_EQ(classify_branch(p, 3, cplx(-7.8541, 3)), Branch::Parabolic);
}

TEST(Branches, TieBreakIsDeterministic) {
  const auto p = unit_barotropic();
  const auto a = eigen_barotropic(barotropic(p), 1);
  const auto b = eigen_barotropic(barotropic(p), 1);
  EXPECT_EQ(a.first.branch, b.first.branch);
  EXPECT_EQ(a.second.branch, b.second.branch);
  EXPECT_NE(a.first.branch, a.second.branch);
}

TEST(Branches, TagsRoundTrip) {
  for (auto b : {Branch::Hyperbolic, Branch::Parabolic, Branch::ParabolicLambda, Branch::ParabolicKappa})
    EXPECT_EQ(branch_from_tag(branch_tag(b)), b);
  EXPECT_EQ(branch_tag(Branch::Hyperbolic), "h");
  EXPECT_EQ(branch_tag(Branch::Parabolic), "p");
}

TEST(Chains, BarotropicDoubleRoot) {
  const auto p = unit_barotropic();
  const auto m = mode_matrix(p, 2);
  const auto [h, q] = eigen_barotropic(barotropic(p), 2);
  const auto g = generalized_chain(m, h.value, h.vector, 2);
  ASSERT_EQ(g.chain_vectors.size(), 1u);
  const CMat a = m.entries - h.value * CMat::Identity(2, 2);
  EXPECT_LE((a * h.vector).norm(), 1e-12 * h.vector.norm());
  EXPECT_LE((a * g.chain_vectors[0] - h.vector).norm(), 1e-12 * h.vector.norm());
}

TEST(Chains, InstanceALengthTwo) {
  const auto ms = mode_spectrum(instance_a(), 1);
  ASSERT_EQ(ms.chains.size(), 1u);
  EXPECT_EQ(ms.chains[0].chain_vectors.size(), 2u);
  EXPECT_EQ(ms.chains[0].algebraic_multiplicity, 3);
  EXPECT_LE(ms.chains[0].max_residual, 1e-9);
}

TEST(Chains, SimpleValueRejected) {
  const auto p = reference_barotropic();
  const auto [h, q] = eigen_barotropic(barotropic(p), 3);
  EXPECT_THROW(generalized_chain(mode_matrix(p, 3), h.value, h.vector, 1), NumericalError);
  try {
    generalized_chain(mode_matrix(p, 3), h.value, h.vector, 2);
    FAIL() << "expected ChainError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), "ChainError");
  }
}

TEST(Slice, UnitParamsCoincidences) {
  const auto s = build_slice(unit_barotropic(), 4);
  ASSERT_EQ(s.coincidences.size(), 2u);
  for (const auto& c : s.coincidences) {
    EXPECT_EQ(std::abs(c.n1), 2);
    EXPECT_EQ(c.n1, c.n2);
    EXPECT_NE(c.b1, c.b2);
  }
}

TEST(Slice, DegenerateCrossMode) {
  const auto s = build_slice(lcns::fixtures::degenerate_barotropic(), 4);
  bool found = false;
  for (const auto& c : s.coincidences)
    if (c.n1 == -c.n2 && std::abs(c.n1) == 1 && c.b1 == Branch::Parabolic && c.b2 == Branch::Parabolic) found = true;
  EXPECT_TRUE(found);
  EXPECT_TRUE(s.mode(1).chains.empty());
}

TEST(Slice, ReferenceHasNoCoincidences) {
  const auto s = build_slice(reference_barotropic(), 50);
  EXPECT_TRUE(s.coincidences.empty());
  EXPECT_EQ(s.modes.size(), 100u);
}

TEST(Slice, EqualDiffusivitiesFlagged) {
  const auto s = build_slice(make_nonbarotropic(1, 1, 1, 1.5, 1.5, 1, 1), 3);
  EXPECT_TRUE(s.equal_diffusivities);
}

TEST(Riesz, HyperbolicTermAtThree) {
  const auto ms = mode_spectrum(unit_barotropic(), 3);
  const auto& h = pair_of(ms, Branch::Hyperbolic);
  EXPECT_NEAR(std::abs(h.vector(0)), 1.0, 1e-14);
  const double term = kTwoPi * std::norm(h.vector(1));
  EXPECT_NEAR(std::abs(h.vector(1)), 0.38197, 1e-5);
  EXPECT_NEAR(term, 0.9168, 1e-4);
}

TEST(Riesz, EmptyWindow) {
  const auto p = reference_barotropic();
  const int thr = riesz_threshold(p);
  const auto pts = riesz_closeness(p, thr + 5, thr + 4);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].S, 0.0);
}

TEST(Riesz, IncrementsBoundedByInverseSquare) {
  for (const auto& p : {reference_barotropic(), instance_b()}) {
    const int thr = riesz_threshold(p);
    const auto pts = riesz_closeness(p, thr, 300);
    double C = 0.0;
    for (const auto& c : pts)
      if (c.N <= 60) C = std::max(C, static_cast<double>(c.N) * c.N * c.increment);
    for (const auto& c : pts) EXPECT_LE(c.increment, 1.5 * C / (static_cast<double>(c.N) * c.N)) << c.N;
    EXPECT_THROW(riesz_closeness(p, thr - 1, 10), DomainError);
  }
}

// Property suite over randomized parameters; the acceptance binary runs the full 25 × 200 sweep.
class SpectrumProperties : public ::testing::TestWithParam<int> {};

TEST_P(SpectrumProperties, ResidualSignTraceDeterminant) {
  std::mt19937_64 rng(1000 + GetParam());
  const bool baro = GetParam() % 2 == 0;
  const auto p = lcns::fixtures::random_params(rng, baro);
  for (int n = -60; n <= 60; ++n) {
    if (n == 0) continue;
    const auto ms = mode_spectrum(p, n);
    const CMat m = mode_matrix(p, n).entries;
    cplx sum = 0.0, prod = 1.0;
    for (const auto& e : ms.pairs) {
      EXPECT_LE(e.residual, 1e-10);
      EXPECT_LT(e.value.real(), 0.0);
      EXPECT_NE(e.value, cplx(0.0));
      sum += e.value;
      prod *= e.value;
    }
    EXPECT_LE(std::abs(sum - m.trace()), 1e-10 * std::max(1.0, std::abs(m.trace())));
    EXPECT_LE(std::abs(prod - m.determinant()), 1e-10 * std::max(1.0, std::abs(m.determinant())));
  }
}

TEST_P(SpectrumProperties, ClosedFormMatchesDense) {
  std::mt19937_64 rng(2000 + GetParam());
  const auto p = lcns::fixtures::random_params(rng, true);
  for (int n = -80; n <= 80; ++n) {
    if (n == 0) continue;
    const auto [h, q] = eigen_barotropic(barotropic(p), n);
    const auto dense = dense_mode_spectrum(mode_matrix(p, n));
    for (const auto& e : {h, q}) {
      double best = INFINITY;
      for (const auto& d : dense.pairs) best = std::min(best, std::abs(d.value - e.value));
      EXPECT_LE(best, 1e-10 * (1.0 + std::abs(e.value))) << "n = " << n;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Random, SpectrumProperties, ::testing::Range(0, 6));

TEST(SpectrumAsymptotics, BarotropicHyperbolicRate) {
  const auto p = barotropic(reference_barotropic());
  std::vector<double> ln, le;
  for (int n = 20; n <= 200; n += 10) {
    const auto [h, q] = eigen_barotropic(p, n);
    const double err = std::abs(h.value - cplx(-p.omega0, p.u_bar * n));
    ln.push_back(std::log(n));
    le.push_back(std::log(err));
    EXPECT_LE(std::abs(q.value.real() / (double(n) * n) + p.mu0), 10.0 / n);
  }
  const double mx = std::accumulate(ln.begin(), ln.end(), 0.0) / ln.size();
  const double my = std::accumulate(le.begin(), le.end(), 0.0) / le.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ln.size(); ++i) {
    sxy += (ln[i] - mx) * (le[i] - my);
    sxx += (ln[i] - mx) * (ln[i] - mx);
  }
  const double exponent = -sxy / sxx;
  EXPECT_GE(exponent, 1.7);
  EXPECT_LE(exponent, 2.3);
}

TEST(SpectrumSymmetry, ConjugatePairs) {
  const auto p = reference_barotropic();
  for (int n = 1; n <= 40; ++n) {
    const auto a = eigen_barotropic(barotropic(p), n);
    const auto b = eigen_barotropic(barotropic(p), -n);
    EXPECT_LE(std::abs(b.first.value - std::conj(a.first.value)), 1e-12 * std::abs(a.first.value));
    EXPECT_LE(std::abs(b.second.value - std::conj(a.second.value)), 1e-12 * std::abs(a.second.value));
  }
}
