#pragma once

#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "lcns/model.hpp"
#include "lcns/spectrum.hpp"
#include "lcns/types.hpp"

namespace lcns {

// Fourier coefficients c_n, n = −N..N, of a dim-component field on (0, 2π).
struct SpectralField {
  int dim = 2;
  int N = 0;
  std::vector<CVec> coeffs;  // index n + N

  static SpectralField zero(int dim, int N);

  CVec& at(int n) { return coeffs[static_cast<std::size_t>(n + N)]; }
  const CVec& at(int n) const { return coeffs[static_cast<std::size_t>(n + N)]; }
  cplx get(int n, int component) const;  // zero outside the cutoff
  bool mean_zero() const;
  bool is_real(double tol = 1e-12) const;
  bool is_zero() const;
  void enforce_real();  // c_{−n} ← conj(c_n) for n > 0, c_0 made real

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator*=(cplx a);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator*(cplx a, SpectralField f);

struct NormSpec {
  std::vector<double> weights;
  std::vector<double> orders;
  bool nonstandard = false;

  static NormSpec l2(const SystemParams& p);
  static NormSpec with_orders(const SystemParams& p, std::vector<double> orders);
};

cplx weighted_inner_product(const SpectralField& f, const SpectralField& g, const NormSpec& spec);
double sobolev_norm(const SpectralField& f, const NormSpec& spec);

// Coefficients aligned with SpectrumSlice::mode(n).basis.
struct EigenExpansion {
  int dim = 2;
  int N = 0;
  std::vector<CVec> coeffs;      // index n + N; empty vector for n = 0
  std::vector<double> condition;  // per-mode basis condition number

  static EigenExpansion zero(int dim, int N);
  const CVec& at(int n) const { return coeffs[static_cast<std::size_t>(n + N)]; }
  CVec& at(int n) { return coeffs[static_cast<std::size_t>(n + N)]; }
  // Coefficient of the eigenvector (chain level 0) carrying the branch label, or of the
  // chain vector carrying it inside a Jordan block.
  cplx coefficient(const SpectrumSlice& slice, int n, Branch b) const;
};

EigenExpansion expand_in_eigenbasis(const SpectralField& field, const SpectrumSlice& slice);
SpectralField reconstruct(const EigenExpansion& e, const SpectrumSlice& slice);

// Terminal datum equal to one basis element of one mode.
SpectralField basis_field(const SpectrumSlice& slice, int n, int basis_index);

// Gaussian random mean-zero field with per-mode amplitude decay (1+n²)^(−decay/2).
SpectralField random_field(int dim, int N, std::mt19937_64& rng, double decay = 0.0, bool real = false);

// CSV with header n,component,re,im.
void write_field_csv(std::ostream& os, const SpectralField& f);
SpectralField read_field_csv(std::istream& is, int dim, int N);

}  // namespace lcns
