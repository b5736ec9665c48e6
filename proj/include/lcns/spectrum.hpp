#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lcns/model.hpp"
#include "lcns/types.hpp"

namespace lcns {

enum class MatrixKind { Adjoint, Forward };

struct ModeMatrix {
  int n = 0;
  int dim = 2;
  CMat entries;
  MatrixKind kind = MatrixKind::Adjoint;
};

ModeMatrix mode_matrix(const SystemParams& p, int n, MatrixKind kind = MatrixKind::Adjoint);
// Same symbol without the n ≠ 0 check (mode 0 gives the zero matrix).
ModeMatrix mode_symbol(const SystemParams& p, int n, MatrixKind kind = MatrixKind::Adjoint);

enum class Branch { Hyperbolic, Parabolic, ParabolicLambda, ParabolicKappa };

// Short tags used in CSV/JSON: h, p, plambda, pkappa.
std::string branch_tag(Branch b);
Branch branch_from_tag(const std::string& tag);

struct EigenPair {
  int n = 0;
  Branch branch = Branch::Hyperbolic;
  cplx value;
  CVec vector;
  cplx nu_scaled;  // value / (i n)
  double residual = 0.0;
  int alg_mult = 1;
  bool degenerate_warning = false;
};

struct GeneralizedChain {
  int n = 0;
  cplx value;
  CVec base_vector;
  std::vector<CVec> chain_vectors;  // w_1 .. w_{m−1}
  int algebraic_multiplicity = 1;
  double max_residual = 0.0;
};

// Closed-form pair (hyperbolic, parabolic).
std::pair<EigenPair, EigenPair> eigen_barotropic(const BarotropicParams& p, int n, double clustering_tol = 1e-8);

// Three pairs ordered h, pλ, pκ.
std::vector<EigenPair> eigen_nonbarotropic(const NonBarotropicParams& p, int n, double clustering_tol = 1e-8);

Branch classify_branch(const SystemParams& p, int n, cplx value);

GeneralizedChain generalized_chain(const ModeMatrix& m, cplx value, const CVec& base_vector, int multiplicity);

// One column of the per-mode expansion basis. chain_level 0 is an eigenvector; level k > 0 is the
// k-th chain vector of the block whose eigenvector sits k entries earlier.
struct BasisElement {
  cplx value;
  CVec vector;
  Branch branch = Branch::Hyperbolic;
  int chain_level = 0;
};

struct ModeSpectrum {
  int n = 0;
  std::vector<EigenPair> pairs;
  std::vector<GeneralizedChain> chains;
  std::vector<BasisElement> basis;
};

struct Coincidence {
  int n1 = 0;
  Branch b1 = Branch::Hyperbolic;
  int n2 = 0;
  Branch b2 = Branch::Hyperbolic;
  cplx value;
  double distance = 0.0;
};

struct SpectrumSlice {
  SystemParams params;
  int N = 0;
  double clustering_tolerance = 1e-8;
  std::vector<ModeSpectrum> modes;  // n = −N..−1, 1..N ascending
  std::vector<Coincidence> coincidences;
  bool equal_diffusivities = false;

  int dim() const;
  bool has_mode(int n) const { return n != 0 && n >= -N && n <= N; }
  const ModeSpectrum& mode(int n) const;
};

ModeSpectrum mode_spectrum(const SystemParams& p, int n, double clustering_tol = 1e-8);
SpectrumSlice build_slice(const SystemParams& p, int N, double clustering_tol = 1e-8);

// Eigen-structure of an arbitrary small mode matrix from the dense solver (used for forward evolution).
ModeSpectrum dense_mode_spectrum(const ModeMatrix& m, double clustering_tol = 1e-8);

struct ClosenessPoint {
  int N = 0;
  double S = 0.0;
  double increment = 0.0;
};

// Partial sums of the squared weighted distance to the comparison basis over N_start ≤ |n| ≤ N.
std::vector<ClosenessPoint> riesz_closeness(const SystemParams& p, int N_start, int N_end);
double riesz_term(const SystemParams& p, int n);
// Smallest admissible N_start.
int riesz_threshold(const SystemParams& p);

}  // namespace lcns
