#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lcns/fields.hpp"
#include "lcns/spectrum.hpp"

namespace lcns {

enum class Channel { Density, Velocity, Temperature };
std::string to_string(Channel c);
Channel channel_from_string(const std::string& s);
void check_channel(Channel c, int dim);

// Boundary functional of the channel applied to vector·e^{inx} at x = 2π.
cplx observation_value(Channel c, const CVec& v, int n, const SystemParams& p);
// Weight of the channel in the duality identity (b or ρ̄; Rθ̄, ρ̄ or ρ̄²).
double channel_weight(Channel c, const SystemParams& p);

struct SignalTerm {
  cplx coefficient;
  cplx rate;
  int degree = 0;
};

// y(t) = Σ coefficient·(T−t)^degree·e^{rate (T−t)}.
struct ObservationSignal {
  double T = 0.0;
  std::vector<SignalTerm> terms;

  cplx operator()(double t) const;
  cplx at_lag(double s) const;  // s = T − t
  double max_abs_imag_rate() const;
};

struct TrajectorySample {
  double t = 0.0;
  SpectralField state;
  std::vector<double> norms;
};

// Jordan-chain factors use (T−t)^j/j!.
inline constexpr const char* kChainConvention = "(T-t)^j/j!";

// Mode coefficients at lag s = T − t from the basis coefficients a of one mode.
CVec evolve_mode(const ModeSpectrum& ms, const CVec& a, double s);

TrajectorySample adjoint_state(const EigenExpansion& e, const SpectrumSlice& slice, double T, double t,
                               const std::vector<NormSpec>& norms = {});

// Homogeneous forward evolution from the forward mode matrices. A control trace is rejected;
// controlled trajectories are checked through the duality identity instead.
TrajectorySample forward_state(const SpectralField& initial, const SystemParams& p, double t,
                               const std::vector<NormSpec>& norms = {},
                               const std::optional<ObservationSignal>& control = std::nullopt);

ObservationSignal observation_signal(const EigenExpansion& e, const SpectrumSlice& slice, Channel c, double T);

// Signal of the adjoint solution whose terminal datum is basis element k of mode n.
ObservationSignal basis_signal(const SpectrumSlice& slice, int n, int k, Channel c, double T);

// CSV t,re_y,im_y on a uniform grid of `points` samples over [0, T].
void write_signal_csv(std::ostream& os, const ObservationSignal& y, int points);

}  // namespace lcns
