#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "common.hpp"
#include "lcns/errors.hpp"
#include "lcns/evolution.hpp"

using namespace lcns;
using lcns::fixtures::reference_barotropic;
using lcns::fixtures::unit_barotropic;

namespace {

int basis_index(const SpectrumSlice& s, int n, Branch b, int level = 0) {
  const auto& basis = s.mode(n).basis;
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (basis[k].branch == b && basis[k].chain_level == level) return static_cast<int>(k);
  return -1;
}

EigenExpansion single(const SpectrumSlice& s, int n, int k, cplx a = 1.0) {
  auto e = EigenExpansion::zero(s.dim(), s.N);
  e.at(n)(k) = a;
  return e;
}

double l2(const SpectralField& f, const SystemParams& p) { return sobolev_norm(f, NormSpec::l2(p)); }

}  // namespace

TEST(Observation, DoubleRootValues) {
  const auto p = unit_barotropic();
  const auto s = build_slice(p, 2);
  const auto& v = s.mode(2).basis[static_cast<std::size_t>(basis_index(s, 2, Branch::Hyperbolic))].vector;
  EXPECT_LE(std::abs(observation_value(Channel::Density, v, 2, p) - cplx(1, 1)), 1e-12);
  EXPECT_LE(std::abs(observation_value(Channel::Velocity, v, 2, p) - cplx(-1, 1)), 1e-12);
  EXPECT_EQ(observation_value(Channel::Density, CVec::Zero(2), 2, p), cplx(0.0));
}

TEST(Observation, ChannelChecks) {
  EXPECT_THROW(check_channel(Channel::Temperature, 2), DomainError);
  EXPECT_NO_THROW(check_channel(Channel::Temperature, 3));
  EXPECT_EQ(channel_from_string(to_string(Channel::Velocity)), Channel::Velocity);
}

TEST(AdjointState, TerminalConsistency) {
  std::mt19937_64 rng(1);
  for (const auto& p : {reference_barotropic(), unit_barotropic(), lcns::fixtures::instance_a()}) {
    const auto s = build_slice(p, 8);
    const auto f = random_field(dim(p), 8, rng);
    const auto e = expand_in_eigenbasis(f, s);
    const auto st = adjoint_state(e, s, 2.0, 2.0).state;
    EXPECT_LE(l2(st + (-1.0) * f, p), 1e-12 * l2(f, p));
  }
}

TEST(AdjointState, SingleHyperbolicMode) {
  const auto p = reference_barotropic();
  const auto s = build_slice(p, 5);
  const int k = basis_index(s, 4, Branch::Hyperbolic);
  const auto e = single(s, 4, k);
  const cplx nu = s.mode(4).basis[static_cast<std::size_t>(k)].value;
  const double T = 3.0;
  const double nT = l2(adjoint_state(e, s, T, T).state, p);
  for (double t : {0.0, 0.7, 2.5}) {
    const double r = l2(adjoint_state(e, s, T, t).state, p) / nT;
    EXPECT_NEAR(r, std::exp(nu.real() * (T - t)), 1e-13);
  }
}

TEST(AdjointState, MatchesMatrixExponentialIncludingJordanBlocks) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  struct Case {
    SystemParams p;
    int n;
  };
  const Case cases[] = {{unit_barotropic(), 2}, {unit_barotropic(), 3}, {lcns::fixtures::instance_a(), 1},
                        {reference_barotropic(), -2}, {lcns::fixtures::instance_b(), -1}};
  for (const auto& c : cases) {
    const auto s = build_slice(c.p, std::abs(c.n));
    const int d = dim(c.p);
    auto f = SpectralField::zero(d, std::abs(c.n));
    for (int j = 0; j < d; ++j) f.at(c.n)(j) = cplx(g(rng), g(rng));
    const auto e = expand_in_eigenbasis(f, s);
    const CMat M = mode_matrix(c.p, c.n).entries;
    const double T = 1.5;
    for (double t : {0.0, 0.4, 1.2}) {
      const CVec want = (M * (T - t)).exp() * f.at(c.n);
      const CVec got = adjoint_state(e, s, T, t).state.at(c.n);
      EXPECT_LE((got - want).norm(), 1e-10 * std::max(1.0, want.norm())) << "n = " << c.n << " t = " << t;
    }
  }
}

TEST(AdjointState, ChainDatumGrowth) {
  const auto p = unit_barotropic();
  const auto s = build_slice(p, 2);
  const int k = basis_index(s, 2, Branch::Parabolic, 1) >= 0 ? basis_index(s, 2, Branch::Parabolic, 1)
                                                             : basis_index(s, 2, Branch::Hyperbolic, 1);
  ASSERT_GE(k, 0);
  const auto e = single(s, 2, k);
  const CMat M = mode_matrix(p, 2).entries;
  const CVec c = s.mode(2).basis[static_cast<std::size_t>(k)].vector;
  const double T = 2.0;
  for (double t : {0.0, 0.5, 1.0, 1.9}) {
    const CVec want = (M * (T - t)).exp() * c;
    const CVec got = adjoint_state(e, s, T, t).state.at(2);
    EXPECT_LE((got - want).norm(), 1e-10 * std::max(1.0, want.norm()));
  }
}

TEST(AdjointState, SemigroupProperty) {
  std::mt19937_64 rng(8);
  const auto p = lcns::fixtures::instance_b();
  const auto s = build_slice(p, 6);
  const auto e = expand_in_eigenbasis(random_field(3, 6, rng), s);
  const double T = 2.0, t2 = 1.3, t1 = 0.4;
  const auto mid = adjoint_state(e, s, T, t2).state;
  const auto again = adjoint_state(expand_in_eigenbasis(mid, s), s, t2, t1).state;
  const auto direct = adjoint_state(e, s, T, t1).state;
  EXPECT_LE(l2(again + (-1.0) * direct, p), 1e-10 * l2(direct, p));
}

TEST(AdjointState, BackwardUniqueness) {
  std::mt19937_64 rng(12);
  const auto p = reference_barotropic();
  const auto s = build_slice(p, 8);
  EXPECT_TRUE(adjoint_state(EigenExpansion::zero(2, 8), s, 1.0, 0.3).state.is_zero());
  auto e = EigenExpansion::zero(2, 8);
  e.at(2)(1) = 1e-3;
  for (double t = 0.0; t <= 10.0; t += 0.5) EXPECT_GT(l2(adjoint_state(e, s, 10.0, t).state, p), 0.0);
}

TEST(ForwardState, InitialAndZero) {
  std::mt19937_64 rng(2);
  const auto p = reference_barotropic();
  const auto f = random_field(2, 8, rng);
  EXPECT_LE(l2(forward_state(f, p, 0.0).state + (-1.0) * f, p), 1e-13 * l2(f, p));
  EXPECT_TRUE(forward_state(SpectralField::zero(2, 8), p, 1.0).state.is_zero());
}

TEST(ForwardState, Contraction) {
  std::mt19937_64 rng(21);
  for (const auto& p : {reference_barotropic(), lcns::fixtures::instance_a()}) {
    const auto f = random_field(dim(p), 16, rng);
    double prev = l2(f, p);
    for (double t = 0.25; t <= 2.0; t += 0.25) {
      const double n = forward_state(f, p, t, {NormSpec::l2(p)}).norms.at(0);
      EXPECT_LE(n, prev * (1 + 1e-13));
      prev = n;
    }
  }
}

TEST(ForwardState, ControlTraceRejected) {
  const auto p = reference_barotropic();
  ObservationSignal y;
  y.T = 1.0;
  y.terms.push_back({1.0, cplx(-1.0, 0.0), 0});
  EXPECT_THROW(forward_state(SpectralField::zero(2, 2), p, 0.5, {}, y), DomainError);
}

TEST(Signal, SingleHyperbolicTerm) {
  const auto s = build_slice(unit_barotropic(), 2);
  const double T = 1.7;
  const auto y = observation_signal(single(s, 2, basis_index(s, 2, Branch::Hyperbolic)), s, Channel::Density, T);
  ASSERT_EQ(y.terms.size(), 1u);
  EXPECT_LE(std::abs(y.terms[0].coefficient - cplx(1, 1)), 1e-12);
  EXPECT_LE(std::abs(y.terms[0].rate - cplx(-2, 2)), 1e-12);
  EXPECT_LE(std::abs(y(T) - cplx(1, 1)), 1e-12);
  EXPECT_LE(std::abs(y(0.2) - cplx(1, 1) * std::exp(cplx(-2, 2) * (T - 0.2))), 1e-12);
}

TEST(Signal, ZeroExpansion) {
  const auto s = build_slice(reference_barotropic(), 3);
  const auto y = observation_signal(EigenExpansion::zero(2, 3), s, Channel::Velocity, 2.0);
  EXPECT_TRUE(y.terms.empty());
  EXPECT_EQ(y(1.0), cplx(0.0));
}

TEST(Signal, CsvGrid) {
  const auto s = build_slice(reference_barotropic(), 3);
  const auto y = basis_signal(s, 2, 0, Channel::Density, 1.0);
  std::ostringstream os;
  write_signal_csv(os, y, 5);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,re_y,im_y");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(Signal, ChainConvention) { EXPECT_STREQ(kChainConvention, "(T-t)^j/j!"); }
