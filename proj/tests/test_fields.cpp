#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "common.hpp"
#include "lcns/errors.hpp"
#include "lcns/fields.hpp"

using namespace lcns;
using lcns::fixtures::reference_barotropic;
using lcns::fixtures::unit_barotropic;

namespace {

SpectralField single(int dim, int N, int n, int comp, cplx v = 1.0) {
  auto f = SpectralField::zero(dim, N);
  f.at(n)(comp) = v;
  return f;
}

int basis_index(const SpectrumSlice& s, int n, Branch b) {
  const auto& basis = s.mode(n).basis;
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (basis[k].branch == b && basis[k].chain_level == 0) return static_cast<int>(k);
  return -1;
}

}  // namespace

TEST(InnerProduct, ConstantField) {
  const auto p = unit_barotropic();
  const auto f = single(2, 1, 0, 0);
  EXPECT_NEAR(weighted_inner_product(f, f, NormSpec::l2(p)).real(), kTwoPi, 1e-14);
}

TEST(InnerProduct, Orthogonality) {
  const auto p = unit_barotropic();
  EXPECT_EQ(std::abs(weighted_inner_product(single(2, 2, 1, 0), single(2, 2, 2, 0), NormSpec::l2(p))), 0.0);
}

TEST(InnerProduct, HyperbolicEigenvectorNorm) {
  const auto p = unit_barotropic();
  const auto s = build_slice(p, 3);
  const auto f = basis_field(s, 3, basis_index(s, 3, Branch::Hyperbolic));
  const double v = weighted_inner_product(f, f, NormSpec::l2(p)).real();
  EXPECT_NEAR(v, kTwoPi * (1.0 + std::norm(s.mode(3).basis[0].vector(1))), 1e-12);
  EXPECT_NEAR(v, 7.2000, 1e-3);
}

TEST(SobolevNorm, Examples) {
  const auto p = unit_barotropic();
  EXPECT_NEAR(sobolev_norm(single(2, 5, 5, 0), NormSpec::l2(p)), std::sqrt(kTwoPi), 1e-14);
  const auto neg = NormSpec::with_orders(p, {-1.0, -1.0});
  EXPECT_NEAR(sobolev_norm(single(2, 3, 3, 0), neg), std::sqrt(kTwoPi / 10.0), 1e-14);
  EXPECT_THROW(sobolev_norm(single(2, 3, 0, 0), neg), DomainError);
}

TEST(SobolevNorm, ParsevalMatchesInnerProduct) {
  std::mt19937_64 rng(3);
  const auto p = reference_barotropic();
  for (int k = 0; k < 20; ++k) {
    const auto f = random_field(2, 12, rng);
    const double a = weighted_inner_product(f, f, NormSpec::l2(p)).real();
    const double b = sobolev_norm(f, NormSpec::l2(p));
    EXPECT_NEAR(a, b * b, 1e-12 * a);
  }
}

TEST(Field, MeanZeroAndReal) {
  std::mt19937_64 rng(9);
  auto f = random_field(3, 6, rng, 1.0, true);
  EXPECT_TRUE(f.mean_zero());
  EXPECT_EQ(f.at(0).norm(), 0.0);
  EXPECT_TRUE(f.is_real());
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(f.at(-n), f.at(n).conjugate());
  auto g = random_field(3, 6, rng);
  EXPECT_FALSE(g.is_real());
}

TEST(Expansion, BasisVectorHasUnitCoefficient) {
  const auto s = build_slice(unit_barotropic(), 3);
  const int k = basis_index(s, 1, Branch::Hyperbolic);
  const auto e = expand_in_eigenbasis(basis_field(s, 1, k), s);
  for (int n = -e.N; n <= e.N; ++n) {
    if (n == 0) continue;
    for (int j = 0; j < e.at(n).size(); ++j) {
      const cplx want = (n == 1 && j == k) ? cplx(1.0) : cplx(0.0);
      EXPECT_LE(std::abs(e.at(n)(j) - want), 1e-13);
    }
  }
}

TEST(Expansion, TwoByTwoSolve) {
  const auto s = build_slice(unit_barotropic(), 2);
  const auto e = expand_in_eigenbasis(single(2, 2, 1, 0), s);
  const auto& basis = s.mode(1).basis;
  CVec sum = CVec::Zero(2);
  for (std::size_t k = 0; k < basis.size(); ++k) sum += e.at(1)(static_cast<int>(k)) * basis[k].vector;
  EXPECT_LE(std::abs(sum(0) - 1.0), 1e-13);
  EXPECT_LE(std::abs(sum(1)), 1e-13);
  EXPECT_LE(e.at(2).norm(), 1e-15);
}

TEST(Expansion, ConstantFieldRejected) {
  const auto s = build_slice(unit_barotropic(), 2);
  EXPECT_THROW(expand_in_eigenbasis(single(2, 2, 0, 1), s), DomainError);
}

TEST(Expansion, RoundTrip) {
  std::mt19937_64 rng(17);
  for (const auto& p : {reference_barotropic(), unit_barotropic(), lcns::fixtures::instance_a(), lcns::fixtures::instance_b()}) {
    const auto s = build_slice(p, 16);
    const auto f = random_field(dim(p), 16, rng);
    const auto g = reconstruct(expand_in_eigenbasis(f, s), s);
    const auto spec = NormSpec::l2(p);
    EXPECT_LE(sobolev_norm(g + (-1.0) * f, spec), 1e-10 * sobolev_norm(f, spec));
  }
}

TEST(Expansion, EmptyReconstructsToZero) {
  const auto s = build_slice(reference_barotropic(), 4);
  EXPECT_TRUE(reconstruct(EigenExpansion::zero(2, 4), s).is_zero());
}

TEST(Expansion, Linearity) {
  std::mt19937_64 rng(23);
  const auto p = lcns::fixtures::instance_b();
  const auto s = build_slice(p, 10);
  const auto f = random_field(3, 10, rng), g = random_field(3, 10, rng);
  const cplx a(0.3, -1.2), b(2.0, 0.5);
  const auto ef = expand_in_eigenbasis(f, s), eg = expand_in_eigenbasis(g, s);
  const auto eh = expand_in_eigenbasis(a * f + b * g, s);
  for (int n = -10; n <= 10; ++n) {
    if (n == 0) continue;
    const CVec want = a * ef.at(n) + b * eg.at(n);
    EXPECT_LE((eh.at(n) - want).norm(), 1e-12 * std::max(1.0, want.norm()));
  }
}

TEST(Expansion, RieszFrameBounds) {
  const auto p = reference_barotropic();
  const int N = 64;
  const auto s = build_slice(p, N);
  const auto w = component_weights(p);
  // Per-mode extreme singular values of the weighted basis give the interval [c, C].
  double c = INFINITY, C = 0.0;
  for (int n = -N; n <= N; ++n) {
    if (n == 0) continue;
    const auto& basis = s.mode(n).basis;
    CMat B(2, 2);
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) B(j, k) = std::sqrt(kTwoPi * w[static_cast<std::size_t>(j)]) * basis[static_cast<std::size_t>(k)].vector(j);
    Eigen::JacobiSVD<CMat> svd(B);
    c = std::min(c, svd.singularValues()(1) * svd.singularValues()(1));
    C = std::max(C, svd.singularValues()(0) * svd.singularValues()(0));
  }
  EXPECT_GT(c, 0.0);
  EXPECT_LT(C / c, 1e3);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    auto e = EigenExpansion::zero(2, N);
    double total = 0.0;
    for (int n = -N; n <= N; ++n) {
      if (n == 0) continue;
      e.at(n) = CVec(2);
      for (int k = 0; k < 2; ++k) {
        e.at(n)(k) = cplx(g(rng), g(rng));
        total += std::norm(e.at(n)(k));
      }
    }
    const double f2 = std::pow(sobolev_norm(reconstruct(e, s), NormSpec::l2(p)), 2);
    const double ratio = f2 / total;
    EXPECT_GE(ratio, c * (1 - 1e-12));
    EXPECT_LE(ratio, C * (1 + 1e-12));
  }
}

TEST(FieldCsv, RoundTrip) {
  std::mt19937_64 rng(2);
  const auto f = random_field(3, 5, rng);
  std::stringstream ss;
  write_field_csv(ss, f);
  const auto g = read_field_csv(ss, 3, 5);
  for (int n = -5; n <= 5; ++n) EXPECT_EQ(f.at(n), g.at(n));
}

TEST(FieldCsv, MissingModesReadAsZero) {
  std::stringstream ss("n,component,re,im\n2,1,0.5,-0.25\n");
  const auto g = read_field_csv(ss, 2, 3);
  EXPECT_EQ(g.at(2)(1), cplx(0.5, -0.25));
  EXPECT_EQ(g.at(1).norm(), 0.0);
  EXPECT_EQ(g.at(-3).norm(), 0.0);
}
