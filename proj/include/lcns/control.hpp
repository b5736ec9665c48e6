#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "lcns/evolution.hpp"
#include "lcns/fields.hpp"
#include "lcns/spectrum.hpp"

namespace lcns {

// One moment condition: w·∫_0^T p(t)·conj(y_r(t)) dt = target, where y_r is the observation of the
// adjoint solution with terminal datum Φ_r (an eigenvector or chain vector).
struct MomentRow {
  int n = 0;
  int basis_index = 0;
  Branch branch = Branch::Hyperbolic;
  int chain_level = 0;
  cplx rate;                  // ν of Φ_r
  ObservationSignal kernel;   // y_r
  cplx target;                // −⟨U0, Φ_r(0)⟩_w
  double kernel_norm = 0.0;   // ‖y_r‖_{L²(0,T)}
  bool infeasible = false;    // kernel ≡ 0
};

struct MomentSystem {
  Channel channel = Channel::Density;
  double T = 0.0;
  int N = 0;
  double weight = 1.0;
  std::vector<MomentRow> rows;
  bool rank_deficiency_flag = false;
  std::vector<std::pair<int, int>> proportional_rows;  // row indices with proportional kernels
  bool below_critical_time = false;
};

MomentSystem build_moment_system(const SpectralField& U0, Channel c, double T, const SpectrumSlice& slice, int N);

// p(t) = w·Σ_k x_k·y_k(t), the minimum-norm control in the span of the row kernels.
// The moment Gram of exponential kernels is Cauchy-like, so the solve runs in 50-digit arithmetic and
// each x_k is stored as an unevaluated sum coefficients[k] + coefficients_lo[k].
struct ControlSolution {
  double T = 0.0;
  double weight = 1.0;
  std::vector<cplx> coefficients;
  std::vector<cplx> coefficients_lo;
  std::vector<ObservationSignal> basis;
  double residual = 0.0;
  double control_norm = 0.0;
  double svd_threshold = 1e-30;
  int rank = 0;
  int discarded = 0;
  std::vector<double> singular_values;
  bool below_critical_time = false;

  cplx operator()(double t) const;
  // The control as one signal in the lag variable, coefficients rounded to double and scaled by w.
  ObservationSignal as_signal() const;
};

// Threshold is relative to the largest singular value of the kernel-normalised Gram.
ControlSolution synthesize_control(const MomentSystem& sys, double svd_threshold = 1e-30);

// w·∫_0^T p(t)·conj(y(t)) dt evaluated in closed form with 50-digit accumulation.
cplx control_moment(const ControlSolution& u, const ObservationSignal& y);

// Gram matrix of the row kernels, G_rk = w²∫ y_k conj(y_r) dt.
CMat moment_gram(const MomentSystem& sys);

struct ModeResidual {
  int n = 0;
  double projected_norm = 0.0;  // ‖U(T)_n‖_w
  double free_norm = 0.0;       // ‖(e^{AT}U0)_n‖_w
};

struct VerificationRecord {
  double in_trunc_residual = 0.0;  // ‖U(T)‖ over |n| ≤ N relative to the free evolution there
  double in_trunc_absolute = 0.0;
  double spillover = 0.0;          // ‖U(T)‖ over N < |n| ≤ N_verify, same normalisation
  double spillover_absolute = 0.0;
  double control_norm = 0.0;
  int rank = 0;
  int discarded_svals = 0;
  std::vector<ModeResidual> modes;
};

VerificationRecord verify_terminal(const SpectralField& U0, const ControlSolution& u, const MomentSystem& sys,
                                   const SpectrumSlice& slice, int N_verify);

// CSV t,p on a uniform grid.
void write_control_csv(std::ostream& os, const ControlSolution& u, int points);

}  // namespace lcns
