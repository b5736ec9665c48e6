#include "lcns/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "lcns/errors.hpp"
#include "lcns/observability.hpp"

namespace lcns {

double pn_value(int N, int n) {
  double p = 1.0;
  for (int l = 1; l <= N; ++l) p *= static_cast<double>(n - l) * static_cast<double>(n + l);
  return p;
}

SpectralField pn_filter(const SpectralField& field, int N) {
  if (!field.mean_zero()) throw DomainError("MeanZeroRequired", "P^N filter expects a mean-zero field");
  if (N < 0) throw DomainError("PreconditionViolated", "filter degree must be non-negative");
  SpectralField out = field;
  for (int n = -field.N; n <= field.N; ++n) {
    if (n == 0) continue;
    if (std::abs(n) <= N)
      out.at(n).setZero();
    else
      out.at(n) *= pn_value(N, n);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("PreconditionViolated", "slope fit needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::vector<BumpPiece> bump_pieces(const BumpSpec& spec, double left, double right) {
  std::vector<BumpPiece> pieces = spec.explicit_pieces;
  if (pieces.empty()) {
    if (spec.seed == 0) {
      pieces.push_back(BumpPiece{});
    } else {
      std::mt19937_64 rng(spec.seed);
      const double L = right - left;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int k = 0; k < std::max(1, spec.pieces); ++k) {
        BumpPiece b;
        b.width = (0.5 + 0.3 * unit(rng)) * L;
        const double lo = left + 0.5 * b.width + 0.05 * L, hi = right - 0.5 * b.width - 0.05 * L;
        b.centre = lo + (hi - lo) * unit(rng);
        b.amplitude = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + unit(rng));
        pieces.push_back(b);
      }
    }
  }
  for (const auto& b : pieces) {
    if (!(b.width > 0.0)) throw DomainError("PreconditionViolated", "bump width must be positive");
    const double a = b.centre - 0.5 * b.width, c = b.centre + 0.5 * b.width;
    if (!(a > left && c < right))
      throw DomainError("SupportError", fmt::format("bump support [{}, {}] is not inside ({}, {})", a, c, left, right));
  }
  return pieces;
}

bool DegenerateWitness::sound() const {
  const double cd = std::abs(C) + std::abs(D);
  return max_abs_y <= 1e-9 * scale && state_norm_t0 > 1e-3 * cd;
}

namespace {

const EigenPair& find_pair(const ModeSpectrum& ms, Branch b) {
  for (const auto& e : ms.pairs)
    if (e.branch == b) return e;
  throw NumericalError("InvariantFailed", fmt::format("mode {} has no {} eigenpair", ms.n, branch_tag(b)));
}

double mode_norm(const CVec& v, const std::vector<double>& w) {
  double s = 0.0;
  for (int j = 0; j < v.size(); ++j) s += w[static_cast<std::size_t>(j)] * std::norm(v(j));
  return std::sqrt(kTwoPi * s);
}

}  // namespace

DegenerateWitness degenerate_uc_witness(const SystemParams& p, Channel c, const SpectrumSlice& slice, double T,
                                        int grid) {
  check_channel(c, dim(p));
  if (!(T > 0.0) || grid < 2) throw DomainError("PreconditionViolated", "witness needs T > 0 and a grid of >= 2 points");
  if (is_barotropic(p)) {
    const auto rep = check_degeneracy_barotropic(barotropic(p));
    if (rep.verdict != Verdict::UniqueContinuationFails)
      throw DomainError("NotDegenerate", fmt::format("degeneracy verdict is {}", to_string(rep.verdict)));
  }
  const Coincidence* pick = nullptr;
  for (const auto& co : slice.coincidences) {
    if (co.n1 == co.n2) continue;
    if (!pick || std::abs(co.n1) + std::abs(co.n2) < std::abs(pick->n1) + std::abs(pick->n2)) pick = &co;
  }
  if (!pick) throw DomainError("NotDegenerate", "no eigenvalue is shared by two distinct modes in the slice");

  DegenerateWitness w;
  w.channel = c;
  w.T = T;
  w.n_plus = pick->n1;
  w.b_plus = pick->b1;
  w.n_minus = pick->n2;
  w.b_minus = pick->b2;
  const EigenPair& ep = find_pair(slice.mode(w.n_plus), w.b_plus);
  const EigenPair& em = find_pair(slice.mode(w.n_minus), w.b_minus);
  w.value = ep.value;
  const cplx op = observation_value(c, ep.vector, w.n_plus, p);
  const cplx om = observation_value(c, em.vector, w.n_minus, p);
  const double omax = std::max(std::abs(op), std::abs(om));
  if (omax == 0.0) {
    w.C = 1.0;
    w.D = 0.0;
  } else {
    w.C = -om;
    w.D = op;
  }
  w.scale = (std::abs(w.C) + std::abs(w.D)) * omax;
  const auto wts = component_weights(p);
  const int Nt = std::max(std::abs(w.n_plus), std::abs(w.n_minus));
  w.terminal = SpectralField::zero(dim(p), Nt);
  w.terminal.at(w.n_plus) += w.C * ep.vector;
  w.terminal.at(w.n_minus) += w.D * em.vector;
  const double np = mode_norm(ep.vector, wts), nm = mode_norm(em.vector, wts);
  w.min_state_norm = INFINITY;
  for (int i = 0; i < grid; ++i) {
    const double t = T * i / (grid - 1);
    const double s = T - t;
    const cplx ea = std::exp(ep.value * s), eb = std::exp(em.value * s);
    const cplx y = w.C * op * ea + w.D * om * eb;
    w.max_abs_y = std::max(w.max_abs_y, std::abs(y));
    const double sn = std::hypot(std::abs(w.C * ea) * np, std::abs(w.D * eb) * nm);
    w.min_state_norm = std::min(w.min_state_norm, sn);
    if (i == 0) w.state_norm_t0 = sn;
  }
  return w;
}

RegularityGapReport regularity_gap_witness(const SystemParams& p, Channel c, double s, const std::vector<int>& n_list,
                                           double T) {
  if (c == Channel::Density)
    throw DomainError("PreconditionViolated", "regularity gap concerns the velocity and temperature channels");
  check_channel(c, dim(p));
  if (!(s >= 0.0 && s < 1.0)) throw DomainError("PreconditionViolated", fmt::format("s = {} outside [0, 1)", s));
  if (n_list.size() < 2) throw DomainError("PreconditionViolated", "need at least two modes");
  for (std::size_t i = 0; i < n_list.size(); ++i)
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1]))
      throw DomainError("PreconditionViolated", "mode list must be positive and strictly increasing");
  if (!(T > 0.0)) throw DomainError("PreconditionViolated", "T must be positive");

  RegularityGapReport rep;
  rep.channel = c;
  rep.s = s;
  rep.T = T;
  rep.expected_slope = -(2.0 - 2.0 * s);
  std::vector<double> orders(static_cast<std::size_t>(dim(p)), 0.0);
  orders[0] = -s;
  const NormSpec spec = NormSpec::with_orders(p, orders);
  std::vector<double> xs, qs;
  for (int n : n_list) {
    const ModeSpectrum ms = mode_spectrum(p, n);
    const EigenPair& h = find_pair(ms, Branch::Hyperbolic);
    SpectralField state = SpectralField::zero(dim(p), n);
    state.at(n) = std::exp(h.value * T) * h.vector;
    ObservationSignal y;
    y.T = T;
    y.terms.push_back({observation_value(c, h.vector, n, p), h.value, 0});
    RegularityRow row;
    row.n = n;
    row.energy = observation_energy(y, T).energy;
    row.norm = sobolev_norm(state, spec);
    row.quotient = row.energy / (row.norm * row.norm);
    row.scaled = std::pow(static_cast<double>(n), 2.0 - 2.0 * s) * row.quotient;
    rep.rows.push_back(row);
    xs.push_back(n);
    qs.push_back(row.quotient);
  }
  rep.slope = loglog_slope(xs, qs);
  double lo = INFINITY, hi = 0.0;
  rep.quotient_decreasing = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    lo = std::min(lo, rep.rows[i].scaled);
    hi = std::max(hi, rep.rows[i].scaled);
    if (i > 0 && !(rep.rows[i].quotient < rep.rows[i - 1].quotient)) rep.quotient_decreasing = false;
  }
  rep.scaled_spread = hi / lo;
  return rep;
}

}  // namespace lcns
