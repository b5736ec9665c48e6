#pragma once

#include <string>
#include <vector>

#include "lcns/evolution.hpp"
#include "lcns/fields.hpp"
#include "lcns/spectrum.hpp"

namespace lcns {

struct EnergyResult {
  double energy = 0.0;
  double error_bound = 0.0;
  int panels = 0;
};

// ∫_0^T |y(t)|² dt by composite Gauss–Legendre; throws QuadratureNotConverged.
EnergyResult observation_energy(const ObservationSignal& y, double T, int panels_per_period = 8);

// ∫_0^T s^j e^{a s} ds.
cplx lag_integral(int j, cplx a, double T);
// ∫_0^T f(t)·conj(g(t)) dt in closed form.
cplx signal_cross_integral(const ObservationSignal& f, const ObservationSignal& g);
double closed_form_energy(const ObservationSignal& y);

// Norm pairing of the observability statements: Density → L² in every component,
// Velocity/Temperature → Ḣ^{−1} on the density component.
NormSpec channel_norm(const SystemParams& p, Channel c);

double critical_time(const SystemParams& p);  // 2π/ū

struct ObservabilityReport {
  Channel channel = Channel::Density;
  double T = 0.0;
  int N = 0;
  double energy = 0.0;
  double energy_err = 0.0;
  double norm = 0.0;
  double quotient = 0.0;
  bool flagged = false;             // quadrature bound above 1e−3·energy
  bool nonstandard_norm = false;
  bool below_critical_time = false;
};

ObservabilityReport observability_quotient(const SpectralField& terminal, Channel c, double T,
                                           const NormSpec& norm, const SpectrumSlice& slice,
                                           int panels_per_period = 8);

struct HypothesisCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  int witness_a = 0;  // extremal pair (mode or family index)
  int witness_b = 0;
  std::string note;
};

struct InghamHypothesisReport {
  int N = 0;
  double T = 0.0;
  int tail_start = 1;
  double beta_re = 0.0, beta_im = 0.0, tau = 0.0;
  std::vector<double> residual_partial_sums;  // Σ|e_n|² by increasing |n| over the tail
  double r = 2.0;
  double gap_half_window = 0.0;
  double eps = 0.0, A0 = 0.0, B0 = 0.0;
  std::vector<double> inverse_modulus_partial_sums;  // Σ 1/|ν| over parabolic values by increasing |n|
  bool time_above_critical = false;                  // T > 2π/τ

  HypothesisCheck H1, H2, P1, P2, P3, P4, disjoint;
  HypothesisCheck relaxed_sector, relaxed_gap, relaxed_summable;
  std::vector<HypothesisCheck> cross_branch;  // three-field system only

  bool standard_pass() const;
  bool relaxed_pass() const;
};

InghamHypothesisReport ingham_audit(const SpectrumSlice& slice, double T);

struct BiorthogonalDiagnostic {
  CMat gram;
  std::vector<double> singular_values;
  int rank = 0;
  double condition = 0.0;
  std::vector<double> coefficient_bounds;  // ‖q_n‖ of the minimum-norm biorthogonal family
};

BiorthogonalDiagnostic biorthogonal_gram(const std::vector<cplx>& rates, double T, double svd_threshold = 1e-12);

}  // namespace lcns
