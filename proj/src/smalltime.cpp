#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lcns/counterexamples.hpp"
#include "lcns/errors.hpp"
#include "lcns/mp.hpp"
#include "lcns/quadrature.hpp"

namespace lcns {

namespace {

using mp::Complex;
using mp::Real;

const Real& mp_pi() {
  static const Real pi = boost::math::constants::pi<Real>();
  return pi;
}

// Hyperbolic eigenvalue and eigenvector of mode n to working precision.
struct MpMode {
  int n = 0;
  Complex value;
  Complex v0, v1;  // first two components (density, velocity); the density channel needs no more
  Real norm2 = 0;  // Σ_j w_j |v_j|²
};

MpMode barotropic_mode(const BarotropicParams& q, int n) {
  MpMode m;
  m.n = n;
  const Real nn = Real(n) * n;
  const Complex in(Real(0), Real(n));
  const Real disc = Real(q.mu0) * q.mu0 * nn * nn - 4 * Real(q.b) * q.rho_bar * nn;
  const Complex s = disc >= 0 ? Complex(sqrt(disc)) : Complex(Real(0), sqrt(-disc));
  m.value = Real(q.u_bar) * in - 2 * Real(q.b) * Real(q.rho_bar) * nn / (Real(q.mu0) * nn + s);
  m.v0 = Real(q.rho_bar);
  m.v1 = m.value / in - Real(q.u_bar);
  m.norm2 = Real(q.b) * norm(m.v0) + Real(q.rho_bar) * norm(m.v1);
  return m;
}

MpMode nonbarotropic_mode(const NonBarotropicParams& q, int n) {
  const auto pairs = eigen_nonbarotropic(q, n);
  const ModeMatrix mm = mode_matrix(SystemParams{q}, n);
  Complex a[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = mp::to_mp(mm.entries(i, j));
  const Complex tr = a[0][0] + a[1][1] + a[2][2];
  const Complex minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] +
                         a[1][1] * a[2][2] - a[1][2] * a[2][1];
  const Complex det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                      a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                      a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  Complex z = mp::to_mp(pairs[0].value);
  for (int it = 0; it < 12; ++it) {
    const Complex f = ((z - tr) * z + minors) * z - det;
    const Complex df = (3 * z - 2 * tr) * z + minors;
    if (abs(df) == 0) break;
    z -= f / df;
  }
  MpMode m;
  m.n = n;
  m.value = z;
  const Complex in(Real(0), Real(n));
  const Complex d = Real(q.u_bar) - z / in;
  const Complex dl = Real(q.lambda0) * in + d;
  m.v0 = Real(q.R) * q.rho_bar;
  m.v1 = -Real(q.R) * d;
  const Complex v2 = dl * d - Real(q.R) * q.theta_bar;
  m.norm2 = Real(q.R) * q.theta_bar * norm(m.v0) + Real(q.rho_bar) * q.rho_bar * norm(m.v1) +
            Real(q.rho_bar) * q.rho_bar * q.c0 / q.theta_bar * norm(v2);
  return m;
}

Real sinc(const Real& x) { return x == 0 ? Real(1) : Real(sin(x) / x); }

// Fourier coefficient (1/2π)∫g e^{−inx} of the bump.
Complex bump_coefficient(const std::vector<BumpPiece>& pieces, int order, int n) {
  Complex g = 0;
  const Complex in(Real(0), Real(n));
  for (const auto& b : pieces) {
    const Real half_step = Real(n) * Real(b.width) / (2 * order);
    const Real env = pow(sinc(half_step), order);
    const Real phase = -Real(n) * Real(b.centre);
    g += Real(b.amplitude) * in * env / (2 * mp_pi()) * Complex(cos(phase), sin(phase));
  }
  return g;
}

Real pn_mp(int N, int n) {
  Real p = 1;
  for (int l = 1; l <= N; ++l) p *= Real(n - l) * Real(n + l);
  return p;
}

}  // namespace

SmallTimeWitnessReport small_time_witness(const SystemParams& p, double T, const std::vector<int>& N_list,
                                          const BumpSpec& bump) {
  const double ub = u_bar(p);
  if (!(T > 0.0 && T < kTwoPi / ub))
    throw DomainError("PreconditionViolated", fmt::format("T = {} must lie in (0, 2π/ū = {})", T, kTwoPi / ub));
  if (N_list.size() < 4) throw DomainError("PreconditionViolated", "slope fit needs at least four values of N");
  int maxN = 0, minN = N_list.front();
  for (int N : N_list) {
    if (N < 1) throw DomainError("PreconditionViolated", "filter degrees must be positive");
    maxN = std::max(maxN, N);
    minN = std::min(minN, N);
  }
  SmallTimeWitnessReport rep;
  rep.T = T;
  rep.seed = bump.seed;
  rep.pieces = bump_pieces(bump, ub * T, kTwoPi);
  rep.spline_order = bump.spline_order > 0 ? bump.spline_order : 2 * maxN + 72;
  rep.x_left = kTwoPi;
  rep.x_right = 0.0;
  double wmin = INFINITY;
  for (const auto& b : rep.pieces) {
    rep.x_left = std::min(rep.x_left, b.centre - 0.5 * b.width);
    rep.x_right = std::max(rep.x_right, b.centre + 0.5 * b.width);
    wmin = std::min(wmin, b.width);
  }
  // The spline envelope first vanishes at |n| = 2π·order/width.
  rep.cutoff = static_cast<int>(std::ceil(1.25 * kTwoPi * rep.spline_order / wmin));
  const int K = rep.cutoff;

  std::vector<MpMode> modes;
  std::vector<Complex> ghat;
  for (int n = -K; n <= K; ++n) {
    if (std::abs(n) <= minN) continue;
    modes.push_back(is_barotropic(p) ? barotropic_mode(barotropic(p), n) : nonbarotropic_mode(nonbarotropic(p), n));
    ghat.push_back(bump_coefficient(rep.pieces, rep.spline_order, n));
  }
  {
    Real in_mass = 0, out_mass = 0;
    for (std::size_t k = 0; k < modes.size(); ++k) in_mass += norm(ghat[k] * pn_mp(maxN, modes[k].n));
    for (int n = K + 1; n <= 4 * K; ++n)
      for (int sg : {-1, 1}) out_mass += norm(bump_coefficient(rep.pieces, rep.spline_order, sg * n) * pn_mp(maxN, n));
    rep.tail = in_mass > 0 ? static_cast<double>(sqrt(out_mass / in_mass)) : 0.0;
  }

  const Real Tm = T;
  const auto& q0 = p;
  const Real ubm = ub, rb = rho_bar(q0);
  const Real decay = hyperbolic_decay(p);
  const int grid = 201;
  std::vector<double> Ns, quotients, gaps;
  for (int N : N_list) {
    SmallTimeRow row;
    row.N = N;
    std::vector<quad::Term<Complex>> terms;
    Real norm2 = 0, sigma2 = 0;
    for (std::size_t k = 0; k < modes.size(); ++k)
      if (std::abs(modes[k].n) > N) sigma2 += norm(ghat[k] * pn_mp(N, modes[k].n));
    // Comparison datum normalised to unit L²(0, 2π).
    const Real unit_scale = 1 / sqrt(2 * mp_pi() * sigma2);
    std::vector<Complex> sig, sig_rate, tr_rate;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto& m = modes[k];
      if (std::abs(m.n) <= N) continue;
      const Complex sigma = ghat[k] * pn_mp(N, m.n) * unit_scale;  // density coefficient of the comparison datum
      const Complex a = sigma / m.v0;                  // coefficient on the hyperbolic eigenvector
      const Complex obs = ubm * m.v0 + rb * m.v1;
      terms.push_back({a * obs, m.value, 0});
      norm2 += norm(a) * exp(2 * m.value.real() * Tm) * m.norm2;
      sig.push_back(sigma);
      sig_rate.push_back(m.value);
      tr_rate.push_back(Complex(-decay, ubm * m.n));
    }
    norm2 *= 2 * mp_pi();
    const auto e = quad::energy<Real, Complex>(terms, T, 2);
    if (!e.converged)
      throw NumericalError("QuadratureNotConverged",
                           fmt::format("small-time energy at N = {} did not converge", N));
    row.energy = static_cast<double>(e.value);
    row.energy_err = static_cast<double>(e.error_bound);
    row.norm = static_cast<double>(sqrt(norm2));
    row.quotient = static_cast<double>(e.value / norm2);

    // Transport comparison at x = 2π on a uniform lag grid, stepped by exact exponential ratios.
    const Real ds = Tm / (grid - 1);
    std::vector<Complex> cur_a(sig), cur_b(sig), step_a(sig.size()), step_b(sig.size());
    for (std::size_t k = 0; k < sig.size(); ++k) {
      step_a[k] = exp(sig_rate[k] * ds);
      step_b[k] = exp(tr_rate[k] * ds);
    }
    Real gap = 0;
    for (int i = 0; i < grid; ++i) {
      Complex diff = 0;
      for (std::size_t k = 0; k < sig.size(); ++k) {
        diff += cur_a[k] - cur_b[k];
        cur_a[k] *= step_a[k];
        cur_b[k] *= step_b[k];
      }
      gap = std::max(gap, Real(abs(diff)));
    }
    row.transport_gap = static_cast<double>(gap);
    rep.rows.push_back(row);
    Ns.push_back(N);
    quotients.push_back(row.quotient);
    gaps.push_back(row.transport_gap);
    rep.transport_C = std::max(rep.transport_C, N * row.transport_gap);
  }
  rep.slope = loglog_slope(Ns, quotients);
  bool gaps_positive = std::all_of(gaps.begin(), gaps.end(), [](double g) { return g > 0.0; });
  rep.transport_slope = gaps_positive ? loglog_slope(Ns, gaps) : 0.0;
  return rep;
}

}  // namespace lcns
