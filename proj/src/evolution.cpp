#include "lcns/evolution.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "lcns/errors.hpp"

namespace lcns {

std::string to_string(Channel c) {
  switch (c) {
    case Channel::Density: return "density";
    case Channel::Velocity: return "velocity";
    case Channel::Temperature: return "temperature";
  }
  return "?";
}

Channel channel_from_string(const std::string& s) {
  if (s == "density") return Channel::Density;
  if (s == "velocity") return Channel::Velocity;
  if (s == "temperature") return Channel::Temperature;
  throw ConfigError("unknown channel '" + s + "' (expected density, velocity or temperature)");
}

void check_channel(Channel c, int dim) {
  if (c == Channel::Temperature && dim != 3)
    throw DomainError("DimMismatch", "temperature channel needs the three-field system");
}

cplx observation_value(Channel c, const CVec& v, int n, const SystemParams& p) {
  const int d = dim(p);
  check_channel(c, d);
  if (v.size() != d) throw DomainError("DimMismatch", fmt::format("{}-vector for a {}-field system", v.size(), d));
  const cplx in = kI * static_cast<double>(n);
  if (is_barotropic(p)) {
    const auto& q = barotropic(p);
    if (c == Channel::Density) return q.u_bar * v(0) + q.rho_bar * v(1);
    return q.b * v(0) + q.u_bar * v(1) + q.mu0 * in * v(1);
  }
  const auto& q = nonbarotropic(p);
  switch (c) {
    case Channel::Density: return q.u_bar * v(0) + q.rho_bar * v(1);
    case Channel::Velocity:
      return q.R * q.theta_bar * v(0) + q.rho_bar * q.u_bar * v(1) + q.lambda0 * q.rho_bar * in * v(1) +
             q.R * q.rho_bar * v(2);
    case Channel::Temperature:
      return q.R * v(1) + (q.c0 * q.u_bar / q.theta_bar) * v(2) + (q.c0 * q.kappa0 / q.theta_bar) * in * v(2);
  }
  return 0.0;
}

double channel_weight(Channel c, const SystemParams& p) {
  check_channel(c, dim(p));
  if (is_barotropic(p)) {
    const auto& q = barotropic(p);
    return c == Channel::Density ? q.b : q.rho_bar;
  }
  const auto& q = nonbarotropic(p);
  switch (c) {
    case Channel::Density: return q.R * q.theta_bar;
    case Channel::Velocity: return q.rho_bar;
    case Channel::Temperature: return q.rho_bar * q.rho_bar;
  }
  return 1.0;
}

cplx ObservationSignal::at_lag(double s) const {
  cplx y = 0.0;
  for (const auto& t : terms) y += t.coefficient * std::pow(s, t.degree) * std::exp(t.rate * s);
  return y;
}

cplx ObservationSignal::operator()(double t) const { return at_lag(T - t); }

double ObservationSignal::max_abs_imag_rate() const {
  double m = 0.0;
  for (const auto& t : terms) m = std::max(m, std::abs(t.rate.imag()));
  return m;
}

CVec evolve_mode(const ModeSpectrum& ms, const CVec& a, double s) {
  const int d = static_cast<int>(ms.basis.size());
  CVec out = CVec::Zero(ms.basis.front().vector.size());
  for (int k = 0; k < d; ++k) {
    if (a(k) == 0.0) continue;
    const auto& e = ms.basis[k];
    const cplx ex = std::exp(e.value * s);
    double fac = 1.0;
    for (int j = 0; j <= e.chain_level; ++j) {
      if (j > 0) fac *= s / j;
      out += a(k) * ex * fac * ms.basis[k - j].vector;
    }
  }
  return out;
}

namespace {

std::vector<double> norms_of(const SpectralField& f, const std::vector<NormSpec>& specs) {
  std::vector<double> out;
  for (const auto& s : specs) out.push_back(sobolev_norm(f, s));
  return out;
}

}  // namespace

TrajectorySample adjoint_state(const EigenExpansion& e, const SpectrumSlice& slice, double T, double t,
                               const std::vector<NormSpec>& norms) {
  if (!(t >= 0.0 && t <= T)) throw DomainError("PreconditionViolated", fmt::format("t = {} outside [0, {}]", t, T));
  TrajectorySample out;
  out.t = t;
  out.state = SpectralField::zero(e.dim, e.N);
  for (int n = -e.N; n <= e.N; ++n) {
    if (n == 0) continue;
    out.state.at(n) = evolve_mode(slice.mode(n), e.at(n), T - t);
  }
  out.norms = norms_of(out.state, norms);
  return out;
}

TrajectorySample forward_state(const SpectralField& initial, const SystemParams& p, double t,
                               const std::vector<NormSpec>& norms, const std::optional<ObservationSignal>& control) {
  if (control) throw DomainError("PreconditionViolated", "forward_state evolves homogeneous data only");
  if (!initial.mean_zero()) throw DomainError("MeanZeroRequired", "forward evolution needs a mean-zero field");
  if (!(t >= 0.0)) throw DomainError("PreconditionViolated", "t must be >= 0");
  if (initial.dim != dim(p)) throw DomainError("DimMismatch", "field and system dimensions differ");
  TrajectorySample out;
  out.t = t;
  out.state = SpectralField::zero(initial.dim, initial.N);
  for (int n = -initial.N; n <= initial.N; ++n) {
    if (n == 0 || initial.at(n).norm() == 0.0) continue;
    const ModeMatrix F = mode_matrix(p, n, MatrixKind::Forward);
    const ModeSpectrum ms = dense_mode_spectrum(F);
    CMat B(F.dim, static_cast<Eigen::Index>(ms.basis.size()));
    for (std::size_t k = 0; k < ms.basis.size(); ++k) B.col(static_cast<Eigen::Index>(k)) = ms.basis[k].vector;
    const CVec a = B.fullPivLu().solve(initial.at(n));
    out.state.at(n) = evolve_mode(ms, a, t);
  }
  const NormSpec l2 = NormSpec::l2(p);
  const double n0 = sobolev_norm(initial, l2), n1 = sobolev_norm(out.state, l2);
  if (n1 > n0 * (1.0 + 1e-10) + 1e-300)
    throw NumericalError("ContractionViolated", fmt::format("weighted norm grew from {} to {}", n0, n1));
  out.norms = norms_of(out.state, norms);
  return out;
}

namespace {

void add_term(std::vector<SignalTerm>& terms, std::map<std::pair<int, int>, std::size_t>& index, int key_elem,
              cplx coef, cplx rate, int degree) {
  if (coef == 0.0) return;
  auto key = std::make_pair(key_elem, degree);
  auto it = index.find(key);
  if (it == index.end()) {
    index[key] = terms.size();
    terms.push_back({coef, rate, degree});
  } else {
    terms[it->second].coefficient += coef;
  }
}

void mode_terms(const SpectrumSlice& slice, int n, const CVec& a, Channel c, std::vector<SignalTerm>& terms) {
  const auto& ms = slice.mode(n);
  std::map<std::pair<int, int>, std::size_t> index;
  for (int k = 0; k < static_cast<int>(ms.basis.size()); ++k) {
    if (a(k) == 0.0) continue;
    const auto& e = ms.basis[k];
    const int head = k - e.chain_level;
    double fac = 1.0;
    for (int j = 0; j <= e.chain_level; ++j) {
      if (j > 0) fac /= j;
      const cplx obs = observation_value(c, ms.basis[k - j].vector, n, slice.params);
      add_term(terms, index, head, a(k) * obs * fac, e.value, j);
    }
  }
}

}  // namespace

ObservationSignal observation_signal(const EigenExpansion& e, const SpectrumSlice& slice, Channel c, double T) {
  check_channel(c, slice.dim());
  ObservationSignal y;
  y.T = T;
  for (int n = -e.N; n <= e.N; ++n) {
    if (n == 0) continue;
    mode_terms(slice, n, e.at(n), c, y.terms);
  }
  return y;
}

ObservationSignal basis_signal(const SpectrumSlice& slice, int n, int k, Channel c, double T) {
  check_channel(c, slice.dim());
  CVec a = CVec::Zero(static_cast<Eigen::Index>(slice.mode(n).basis.size()));
  a(k) = 1.0;
  ObservationSignal y;
  y.T = T;
  mode_terms(slice, n, a, c, y.terms);
  return y;
}

void write_signal_csv(std::ostream& os, const ObservationSignal& y, int points) {
  os << "t,re_y,im_y\n";
  for (int i = 0; i < points; ++i) {
    const double t = points > 1 ? y.T * i / (points - 1) : 0.0;
    const cplx v = y(t);
    os << fmt::format("{:.17g},{:.17g},{:.17g}\n", t, v.real(), v.imag());
  }
}

}  // namespace lcns
