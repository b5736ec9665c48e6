#include "lcns/control.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

#include <fmt/format.h>

#include "lcns/errors.hpp"
#include "lcns/mp.hpp"
#include "lcns/observability.hpp"

namespace lcns {

namespace {

cplx mode_pairing(const CVec& f, const CVec& g, const std::vector<double>& w) {
  cplx s = 0.0;
  for (int j = 0; j < f.size(); ++j) s += w[static_cast<std::size_t>(j)] * f(j) * std::conj(g(j));
  return kTwoPi * s;
}

CVec unit(int size, int k) {
  CVec a = CVec::Zero(size);
  a(k) = 1.0;
  return a;
}

}  // namespace

MomentSystem build_moment_system(const SpectralField& U0, Channel c, double T, const SpectrumSlice& slice, int N) {
  check_channel(c, slice.dim());
  if (U0.dim != slice.dim()) throw DomainError("DimMismatch", "initial field and slice dimensions differ");
  if (!U0.mean_zero()) throw DomainError("MeanZeroRequired", "initial field must be mean-zero");
  if (!(T > 0.0)) throw DomainError("PreconditionViolated", "horizon T must be positive");
  if (N < 1 || N > slice.N)
    throw DomainError("PreconditionViolated", fmt::format("truncation N = {} not covered by slice |n| <= {}", N,
                                                          slice.N));
  const auto w = component_weights(slice.params);
  MomentSystem sys;
  sys.channel = c;
  sys.T = T;
  sys.N = N;
  sys.weight = channel_weight(c, slice.params);
  sys.below_critical_time = T <= critical_time(slice.params);
  double pscale = 1.0;
  for (double x : w) pscale = std::max(pscale, x);
  for (int n = -N; n <= N; ++n) {
    if (n == 0) continue;
    const auto& ms = slice.mode(n);
    const int d = static_cast<int>(ms.basis.size());
    for (int k = 0; k < d; ++k) {
      MomentRow row;
      row.n = n;
      row.basis_index = k;
      row.branch = ms.basis[k].branch;
      row.chain_level = ms.basis[k].chain_level;
      row.rate = ms.basis[k].value;
      row.kernel = basis_signal(slice, n, k, c, T);
      const CVec phi0 = evolve_mode(ms, unit(d, k), T);
      const CVec u0 = std::abs(n) <= U0.N ? U0.at(n) : CVec::Zero(U0.dim);
      row.target = -mode_pairing(u0, phi0, w);
      row.kernel_norm = std::sqrt(std::max(0.0, closed_form_energy(row.kernel)));
      double cmax = 0.0;
      for (const auto& t : row.kernel.terms) cmax = std::max(cmax, std::abs(t.coefficient));
      const double vscale = ms.basis[k].vector.norm() * (1.0 + std::abs(n)) * pscale;
      row.infeasible = cmax <= 1e-12 * vscale;
      if (row.infeasible && std::abs(row.target) > 1e-12 * std::max(1.0, u0.norm() * vscale))
        throw DomainError("InfeasibleRow",
                          fmt::format("mode {} {} is unobservable through the {} channel but has target {}", n,
                                      branch_tag(row.branch), to_string(c), std::abs(row.target)));
      sys.rows.push_back(std::move(row));
    }
  }
  // Rows sharing a rate with single-exponential kernels are proportional.
  for (std::size_t i = 0; i < sys.rows.size(); ++i)
    for (std::size_t j = i + 1; j < sys.rows.size(); ++j) {
      const auto& a = sys.rows[i];
      const auto& b = sys.rows[j];
      if (a.infeasible || b.infeasible || a.n == b.n) continue;
      if (std::abs(a.rate - b.rate) > slice.clustering_tolerance * std::max({1.0, std::abs(a.rate), std::abs(b.rate)}))
        continue;
      const cplx g = signal_cross_integral(a.kernel, b.kernel);
      if (std::abs(g) >= (1.0 - 1e-10) * a.kernel_norm * b.kernel_norm) {
        sys.rank_deficiency_flag = true;
        sys.proportional_rows.push_back({static_cast<int>(i), static_cast<int>(j)});
      }
    }
  return sys;
}

CMat moment_gram(const MomentSystem& sys) {
  const int R = static_cast<int>(sys.rows.size());
  const double w2 = sys.weight * sys.weight;
  CMat G(R, R);
  for (int r = 0; r < R; ++r)
    for (int k = r; k < R; ++k) {
      G(r, k) = w2 * signal_cross_integral(sys.rows[k].kernel, sys.rows[r].kernel);
      G(k, r) = std::conj(G(r, k));
    }
  return G;
}

namespace {

mp::Complex mp_cross(const ObservationSignal& f, const ObservationSignal& g) {
  mp::Complex s = 0;
  const mp::Real T = f.T;
  for (const auto& a : f.terms)
    for (const auto& b : g.terms)
      s += mp::to_mp(a.coefficient) * mp::to_mp(std::conj(b.coefficient)) *
           mp::lag_integral(a.degree + b.degree, mp::to_mp(a.rate) + mp::to_mp(std::conj(b.rate)), T);
  return s;
}

mp::Complex coefficient_mp(const ControlSolution& u, std::size_t k) {
  return mp::to_mp(u.coefficients[k]) + mp::to_mp(u.coefficients_lo[k]);
}

// w·∫ p·conj(y) with p = w·Σ x_k y_k, every term carried in 50 digits.
mp::Complex control_pairing(const ControlSolution& u, const ObservationSignal& y) {
  mp::Complex s = 0;
  for (std::size_t k = 0; k < u.basis.size(); ++k) s += coefficient_mp(u, k) * mp_cross(u.basis[k], y);
  return s * mp::Real(u.weight) * mp::Real(u.weight);
}

}  // namespace

cplx ControlSolution::operator()(double t) const {
  using LC = std::complex<long double>;
  LC p = 0.0L;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    LC yk = 0.0L;
    const long double s = static_cast<long double>(T) - t;
    for (const auto& term : basis[k].terms)
      yk += LC(term.coefficient) * std::pow(s, term.degree) * std::exp(LC(term.rate) * s);
    p += (LC(coefficients[k]) + LC(coefficients_lo[k])) * yk;
  }
  p *= static_cast<long double>(weight);
  return {static_cast<double>(p.real()), static_cast<double>(p.imag())};
}

ObservationSignal ControlSolution::as_signal() const {
  ObservationSignal s;
  s.T = T;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const cplx x = coefficients[k] + coefficients_lo[k];
    if (x == 0.0) continue;
    for (const auto& t : basis[k].terms) s.terms.push_back({weight * x * t.coefficient, t.rate, t.degree});
  }
  return s;
}

ControlSolution synthesize_control(const MomentSystem& sys, double svd_threshold) {
  ControlSolution u;
  u.T = sys.T;
  u.weight = sys.weight;
  u.svd_threshold = svd_threshold;
  u.below_critical_time = sys.below_critical_time;
  std::vector<int> active;
  for (int r = 0; r < static_cast<int>(sys.rows.size()); ++r) {
    const auto& row = sys.rows[static_cast<std::size_t>(r)];
    if (row.infeasible) {
      if (row.target != 0.0)
        throw DomainError("InfeasibleRow", fmt::format("row {} is unobservable with a nonzero target", r));
      continue;
    }
    active.push_back(r);
  }
  const int R = static_cast<int>(active.size());
  for (int r : active) u.basis.push_back(sys.rows[static_cast<std::size_t>(r)].kernel);
  u.coefficients.assign(static_cast<std::size_t>(R), 0.0);
  u.coefficients_lo.assign(static_cast<std::size_t>(R), 0.0);
  if (R == 0) return u;

  const mp::Real w2 = mp::Real(sys.weight) * mp::Real(sys.weight);
  const auto idx = [R](int i, int j) { return static_cast<std::size_t>(i * R + j); };
  std::vector<mp::Complex> G(static_cast<std::size_t>(R * R)), m(static_cast<std::size_t>(R));
  std::vector<mp::Real> D(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) {
    const auto& row = sys.rows[static_cast<std::size_t>(active[i])];
    m[static_cast<std::size_t>(i)] = mp::to_mp(row.target);
    for (int j = i; j < R; ++j) {
      G[idx(i, j)] = w2 * mp_cross(sys.rows[static_cast<std::size_t>(active[j])].kernel, row.kernel);
      G[idx(j, i)] = conj(G[idx(i, j)]);
    }
  }
  for (int i = 0; i < R; ++i) D[static_cast<std::size_t>(i)] = mp::Real(1) / sqrt(G[idx(i, i)].real());
  mp::Real mnorm2 = 0;
  for (const auto& z : m) mnorm2 += norm(z);
  const mp::Real mnorm = sqrt(mnorm2);

  // Symmetric diagonal scaling normalises each kernel before truncation. The scaled Gram is
  // Hermitian positive semidefinite, so its eigen-decomposition is its SVD.
  std::vector<mp::Complex> Gs(G.size());
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j) Gs[idx(i, j)] = D[static_cast<std::size_t>(i)] * G[idx(i, j)] * D[static_cast<std::size_t>(j)];
  const mp::HermitianEigen eig = mp::hermitian_eigen(std::move(Gs), R);
  mp::Real top = 0;
  for (const auto& e : eig.values) top = std::max(top, mp::Real(abs(e)));
  for (int i = R - 1; i >= 0; --i) u.singular_values.push_back(static_cast<double>(abs(eig.values[static_cast<std::size_t>(i)])));
  std::sort(u.singular_values.rbegin(), u.singular_values.rend());
  const mp::Real cut = mp::Real(svd_threshold) * top;
  std::vector<mp::Complex> x(static_cast<std::size_t>(R), mp::Complex(0));
  for (int k = 0; k < R; ++k) {
    const mp::Real lam = eig.values[static_cast<std::size_t>(k)];
    if (abs(lam) > cut) {
      ++u.rank;
    } else {
      ++u.discarded;
      continue;
    }
    if (mnorm == 0) continue;
    mp::Complex y = 0;
    for (int i = 0; i < R; ++i) y += conj(eig.vec(i, k)) * D[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(i)];
    y /= lam;
    for (int i = 0; i < R; ++i) x[static_cast<std::size_t>(i)] += D[static_cast<std::size_t>(i)] * eig.vec(i, k) * y;
  }
  for (int i = 0; i < R; ++i) {
    const mp::Complex& xi = x[static_cast<std::size_t>(i)];
    const cplx hi = mp::to_double(xi);
    u.coefficients[static_cast<std::size_t>(i)] = hi;
    u.coefficients_lo[static_cast<std::size_t>(i)] = mp::to_double(xi - mp::to_mp(hi));
  }
  if (mnorm > 0) {
    mp::Real r2 = 0;
    for (int i = 0; i < R; ++i) {
      mp::Complex ri = -m[static_cast<std::size_t>(i)];
      for (int j = 0; j < R; ++j) ri += G[idx(i, j)] * x[static_cast<std::size_t>(j)];
      r2 += norm(ri);
    }
    u.residual = static_cast<double>(sqrt(r2) / mnorm);
  }
  mp::Complex e = 0;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j) e += conj(x[static_cast<std::size_t>(i)]) * G[idx(i, j)] * x[static_cast<std::size_t>(j)];
  u.control_norm = static_cast<double>(sqrt(abs(e.real())));
  if (u.rank < R && u.residual > 1e-6) {
    std::string cluster;
    for (const auto& [a, b] : sys.proportional_rows)
      cluster += fmt::format(" ({},{})~({},{})", sys.rows[static_cast<std::size_t>(a)].n,
                             branch_tag(sys.rows[static_cast<std::size_t>(a)].branch),
                             sys.rows[static_cast<std::size_t>(b)].n,
                             branch_tag(sys.rows[static_cast<std::size_t>(b)].branch));
    if (cluster.empty()) cluster = " (no exactly proportional pair; smallest singular directions discarded)";
    throw NumericalError("RankDeficient", fmt::format("numerical rank {} < {} rows, residual {:.3g}; rows:{}", u.rank,
                                                      R, u.residual, cluster));
  }
  return u;
}

cplx control_moment(const ControlSolution& u, const ObservationSignal& y) { return mp::to_double(control_pairing(u, y)); }

VerificationRecord verify_terminal(const SpectralField& U0, const ControlSolution& u, const MomentSystem& sys,
                                   const SpectrumSlice& slice, int N_verify) {
  if (N_verify < sys.N)
    throw DomainError("PreconditionViolated", "N_verify must be at least the synthesis truncation");
  if (N_verify > slice.N) throw DomainError("PreconditionViolated", "slice does not cover N_verify");
  if (U0.dim != slice.dim()) throw DomainError("DimMismatch", "initial field and slice dimensions differ");
  const auto w = component_weights(slice.params);
  VerificationRecord rec;
  rec.control_norm = u.control_norm;
  rec.rank = u.rank;
  rec.discarded_svals = u.discarded;
  double in_u = 0.0, in_f = 0.0, out_u = 0.0;
  for (int n = -N_verify; n <= N_verify; ++n) {
    if (n == 0) continue;
    const auto& ms = slice.mode(n);
    const int d = static_cast<int>(ms.basis.size());
    const CVec u0 = std::abs(n) <= U0.N ? U0.at(n) : CVec::Zero(U0.dim);
    CVec proj(d), free(d);
    CMat H(d, d);
    for (int r = 0; r < d; ++r) {
      const CVec phi0 = evolve_mode(ms, unit(d, r), sys.T);
      free(r) = mode_pairing(u0, phi0, w);
      const ObservationSignal yr = basis_signal(slice, n, r, sys.channel, sys.T);
      proj(r) = mp::to_double(mp::to_mp(free(r)) + control_pairing(u, yr));
      for (int k = 0; k < d; ++k) H(r, k) = mode_pairing(ms.basis[k].vector, ms.basis[r].vector, w);
    }
    CMat B(d, d);
    for (int k = 0; k < d; ++k) B.col(k) = ms.basis[k].vector;
    const auto lu = H.fullPivLu();
    const CVec UT = B * lu.solve(proj);
    const CVec UF = B * lu.solve(free);
    ModeResidual mr;
    mr.n = n;
    mr.projected_norm = std::sqrt(std::max(0.0, mode_pairing(UT, UT, w).real()));
    mr.free_norm = std::sqrt(std::max(0.0, mode_pairing(UF, UF, w).real()));
    rec.modes.push_back(mr);
    if (std::abs(n) <= sys.N) {
      in_u += mr.projected_norm * mr.projected_norm;
      in_f += mr.free_norm * mr.free_norm;
    } else {
      out_u += mr.projected_norm * mr.projected_norm;
    }
  }
  rec.in_trunc_absolute = std::sqrt(in_u);
  rec.spillover_absolute = std::sqrt(out_u);
  const double denom = std::sqrt(in_f);
  rec.in_trunc_residual = denom > 0.0 ? rec.in_trunc_absolute / denom : rec.in_trunc_absolute;
  rec.spillover = denom > 0.0 ? rec.spillover_absolute / denom : rec.spillover_absolute;
  return rec;
}

void write_control_csv(std::ostream& os, const ControlSolution& u, int points) {
  os << "t,p\n";
  for (int i = 0; i < points; ++i) {
    const double t = points > 1 ? u.T * i / (points - 1) : 0.0;
    os << fmt::format("{:.17g},{:.17g}\n", t, u(t).real());
  }
}

}  // namespace lcns
