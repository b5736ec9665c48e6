#pragma once

#include <cstdint>
#include <vector>

#include "lcns/evolution.hpp"
#include "lcns/fields.hpp"
#include "lcns/spectrum.hpp"

namespace lcns {

// P^N(n) = Π_{1 ≤ |l| ≤ N} (n − l).
double pn_value(int N, int n);
// c_n ← P^N(n)·c_n; modes 1 ≤ |n| ≤ N become exactly zero.
SpectralField pn_filter(const SpectralField& field, int N);

// Each piece is the x-derivative of a normalised uniform B-spline of the given order, so the
// bump has mean zero and exactly known Fourier coefficients.
struct BumpPiece {
  double centre = 4.5;
  double width = 3.0;
  double amplitude = 1.0;
};

struct BumpSpec {
  std::uint64_t seed = 0;   // 0: one centred piece; otherwise random pieces drawn from the seed
  int pieces = 3;           // used when seed != 0
  int spline_order = 0;     // 0: 2·max(N_list) + 72
  std::vector<BumpPiece> explicit_pieces;  // overrides seed when non-empty
};

struct SmallTimeRow {
  int N = 0;
  double quotient = 0.0;
  double energy = 0.0;
  double energy_err = 0.0;
  double norm = 0.0;           // ‖state(0)‖ in the weighted L² norm
  double transport_gap = 0.0;  // max_t |σ^N(t, 2π) − σ̃^N(t, 2π)|
};

struct SmallTimeWitnessReport {
  double T = 0.0;
  Channel channel = Channel::Density;
  std::vector<SmallTimeRow> rows;
  double slope = 0.0;            // least-squares slope of log quotient against log N
  double transport_slope = 0.0;  // same for the transport gap
  double transport_C = 0.0;      // max_N N·gap_N
  double x_left = 0.0, x_right = 0.0;
  int spline_order = 0;
  int cutoff = 0;       // Fourier modes |n| ≤ cutoff are kept
  double tail = 0.0;    // relative ℓ² mass of the bump coefficients beyond the cutoff
  std::uint64_t seed = 0;
  std::vector<BumpPiece> pieces;
};

// Resolves the bump pieces of a spec inside (left, right); throws SupportError if a piece leaves it.
std::vector<BumpPiece> bump_pieces(const BumpSpec& spec, double left, double right);

// Hyperbolic-branch adjoint data built from the P^N-filtered bump, evaluated in 50-digit arithmetic.
SmallTimeWitnessReport small_time_witness(const SystemParams& p, double T, const std::vector<int>& N_list,
                                          const BumpSpec& bump = {});

struct DegenerateWitness {
  Channel channel = Channel::Density;
  double T = 0.0;
  int n_plus = 0, n_minus = 0;
  Branch b_plus = Branch::Hyperbolic, b_minus = Branch::Hyperbolic;
  cplx value;                 // shared eigenvalue
  cplx C, D;                  // terminal datum C·Φ_+ + D·Φ_−
  double max_abs_y = 0.0;     // over the time grid
  double scale = 0.0;         // (|C| + |D|)·max(|B*Φ_+|, |B*Φ_−|)
  double state_norm_t0 = 0.0;
  double min_state_norm = 0.0;
  SpectralField terminal;

  bool sound() const;
};

// Throws NotDegenerate when the slice has no cross-mode coincidence (or, for the two-field system,
// when the degeneracy verdict is not UniqueContinuationFails).
DegenerateWitness degenerate_uc_witness(const SystemParams& p, Channel c, const SpectrumSlice& slice, double T = 1.0,
                                        int grid = 2001);

struct RegularityRow {
  int n = 0;
  double energy = 0.0;
  double norm = 0.0;      // ‖state(0)‖ with Ḣ^{−s} on the density component
  double quotient = 0.0;
  double scaled = 0.0;    // n^{2−2s}·quotient
};

struct RegularityGapReport {
  Channel channel = Channel::Velocity;
  double s = 0.0;
  double T = 0.0;
  std::vector<RegularityRow> rows;
  double slope = 0.0;
  double expected_slope = 0.0;  // −(2 − 2s)
  double scaled_spread = 0.0;   // max/min of the scaled sequence
  bool quotient_decreasing = false;
};

RegularityGapReport regularity_gap_witness(const SystemParams& p, Channel c, double s, const std::vector<int>& n_list,
                                           double T = 1.0);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lcns
