#include "lcns/observability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "lcns/errors.hpp"
#include "lcns/quadrature.hpp"

namespace lcns {

EnergyResult observation_energy(const ObservationSignal& y, double T, int panels_per_period) {
  if (panels_per_period < 4) throw DomainError("PreconditionViolated", "panels_per_period must be >= 4");
  if (!(T > 0.0)) throw DomainError("PreconditionViolated", "horizon T must be positive");
  std::vector<quad::Term<cplx>> terms;
  for (const auto& t : y.terms) {
    if (!std::isfinite(t.coefficient.real()) || !std::isfinite(t.coefficient.imag()) ||
        !std::isfinite(t.rate.real()) || !std::isfinite(t.rate.imag()))
      throw DomainError("PreconditionViolated", "signal has non-finite terms");
    if (t.coefficient != 0.0) terms.push_back({t.coefficient, t.rate, t.degree});
  }
  const auto e = quad::energy<double, cplx>(terms, T, panels_per_period);
  if (!e.converged)
    throw NumericalError("QuadratureNotConverged",
                         fmt::format("Richardson estimate {} exceeds 1e-3 of energy {}", e.error_bound, e.value));
  return {e.value, e.error_bound, e.panels};
}

cplx lag_integral(int j, cplx a, double T) {
  if (std::abs(a) * T <= 1.0) {
    cplx sum = 0.0, ak = 1.0;
    double kfact = 1.0;
    for (int k = 0; k < 80; ++k) {
      if (k > 0) {
        ak *= a;
        kfact *= k;
      }
      const cplx term = ak * std::pow(T, k + j + 1) / (kfact * (k + j + 1));
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  const cplx eaT = std::exp(a * T);
  cplx I = (eaT - 1.0) / a;
  double Tj = 1.0;
  for (int i = 1; i <= j; ++i) {
    Tj *= T;
    I = (Tj * eaT - static_cast<double>(i) * I) / a;
  }
  return I;
}

cplx signal_cross_integral(const ObservationSignal& f, const ObservationSignal& g) {
  cplx s = 0.0;
  const double T = f.T;
  for (const auto& a : f.terms)
    for (const auto& b : g.terms)
      s += a.coefficient * std::conj(b.coefficient) * lag_integral(a.degree + b.degree, a.rate + std::conj(b.rate), T);
  return s;
}

double closed_form_energy(const ObservationSignal& y) { return signal_cross_integral(y, y).real(); }

NormSpec channel_norm(const SystemParams& p, Channel c) {
  check_channel(c, dim(p));
  std::vector<double> orders(static_cast<std::size_t>(dim(p)), 0.0);
  if (c != Channel::Density) orders[0] = -1.0;
  return NormSpec::with_orders(p, orders);
}

double critical_time(const SystemParams& p) { return kTwoPi / u_bar(p); }

ObservabilityReport observability_quotient(const SpectralField& terminal, Channel c, double T, const NormSpec& norm,
                                           const SpectrumSlice& slice, int panels_per_period) {
  check_channel(c, slice.dim());
  if (!terminal.mean_zero()) throw DomainError("MeanZeroRequired", "terminal field must be mean-zero");
  if (terminal.is_zero()) throw DomainError("ZeroState", "terminal field is zero");
  const EigenExpansion e = expand_in_eigenbasis(terminal, slice);
  const ObservationSignal y = observation_signal(e, slice, c, T);
  const TrajectorySample s0 = adjoint_state(e, slice, T, 0.0, {norm});
  ObservabilityReport r;
  r.channel = c;
  r.T = T;
  r.N = terminal.N;
  r.norm = s0.norms[0];
  if (!(r.norm > 1e-300)) throw DomainError("ZeroState", "initial-state norm underflows");
  const auto en = quad::energy<double, cplx>(
      [&] {
        std::vector<quad::Term<cplx>> t;
        for (const auto& x : y.terms) t.push_back({x.coefficient, x.rate, x.degree});
        return t;
      }(),
      T, panels_per_period);
  r.energy = en.value;
  r.energy_err = en.error_bound;
  r.flagged = !(en.error_bound < 1e-3 * en.value);
  r.quotient = r.energy / (r.norm * r.norm);
  const NormSpec standard = channel_norm(slice.params, c);
  r.nonstandard_norm = norm.nonstandard || norm.orders != standard.orders || norm.weights != standard.weights;
  r.below_critical_time = T <= critical_time(slice.params);
  return r;
}

namespace {

struct Val {
  int index;  // family index used in gap ratios
  int mode;
  cplx v;
};

double scale_of(cplx a, cplx b) { return std::max({1.0, std::abs(a), std::abs(b)}); }

// Minimum pairwise distance within a set; returns (distance, pair).
HypothesisCheck injectivity(const std::string& name, const std::vector<Val>& xs, double tol) {
  HypothesisCheck h;
  h.name = name;
  h.value = INFINITY;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double d = std::abs(xs[i].v - xs[j].v);
      if (d < h.value) {
        h.value = d;
        h.witness_a = xs[i].index;
        h.witness_b = xs[j].index;
      }
      if (d <= tol * scale_of(xs[i].v, xs[j].v)) h.note = "coincidence within clustering tolerance";
    }
  h.pass = h.note.empty();
  if (h.pass) h.witness_a = h.witness_b = 0;
  return h;
}

struct GapResult {
  double value = INFINITY;
  int a = 0, b = 0;
};

// min |x_a − x_b| / den(a, b) over pairs with den > 0, restricted to members passing `keep`.
GapResult min_gap(const std::vector<Val>& xs, const std::function<double(const Val&, const Val&)>& den,
                  const std::function<bool(const Val&)>& keep) {
  GapResult g;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!keep(xs[i])) continue;
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (!keep(xs[j])) continue;
      const double d = den(xs[i], xs[j]);
      if (!(d > 0.0)) continue;
      const double r = std::abs(xs[i].v - xs[j].v) / d;
      if (r < g.value) {
        g.value = r;
        g.a = xs[i].index;
        g.b = xs[j].index;
      }
    }
  }
  return g;
}

// Gap constant is accepted when positive and not collapsing between the half window and the full window.
HypothesisCheck stable_gap(const std::string& name, const GapResult& full, const GapResult& half) {
  HypothesisCheck h;
  h.name = name;
  h.value = full.value;
  h.witness_a = full.a;
  h.witness_b = full.b;
  h.pass = full.value > 0.0 && std::isfinite(full.value) && full.value >= 0.5 * half.value;
  if (!h.pass) h.note = fmt::format("half-window value {:.6g}", half.value);
  return h;
}

// Dyadic increments of partial sums: the last increment must shrink by at least 1.5×.
bool dyadic_summable(const std::vector<std::pair<int, double>>& sums, int N) {
  if (sums.empty()) return true;
  auto S = [&](int K) {
    double s = 0.0;
    for (const auto& [k, v] : sums)
      if (k <= K) s = v;
    return s;
  };
  const double i1 = S(N / 2) - S(N / 4);
  const double i2 = S(N) - S(N / 2);
  if (i2 <= 1e-14 * std::max(S(N), 1e-300)) return true;
  return i1 >= 1.5 * i2;
}

}  // namespace

bool InghamHypothesisReport::standard_pass() const {
  return H1.pass && H2.pass && P1.pass && P2.pass && P3.pass && P4.pass && disjoint.pass;
}

bool InghamHypothesisReport::relaxed_pass() const {
  bool ok = relaxed_sector.pass && relaxed_gap.pass && relaxed_summable.pass;
  for (const auto& c : cross_branch) ok = ok && c.pass;
  return ok;
}

InghamHypothesisReport ingham_audit(const SpectrumSlice& slice, double T) {
  InghamHypothesisReport r;
  r.N = slice.N;
  r.T = T;
  r.tail_start = std::min(riesz_threshold(slice.params), slice.N);
  const double tol = slice.clustering_tolerance;
  const bool baro = is_barotropic(slice.params);
  const int N = slice.N;
  const int tail = r.tail_start;

  std::vector<Val> hyp, par, lam, kap;
  for (const auto& m : slice.modes) {
    for (const auto& e : m.pairs) {
      const int n = e.n;
      const int sg = n > 0 ? 1 : -1;
      switch (e.branch) {
        case Branch::Hyperbolic: hyp.push_back({n, n, e.value}); break;
        case Branch::Parabolic: par.push_back({n, n, e.value}); break;
        case Branch::ParabolicLambda:
          par.push_back({sg * (2 * std::abs(n) - 1), n, e.value});
          lam.push_back({n, n, e.value});
          break;
        case Branch::ParabolicKappa:
          par.push_back({sg * 2 * std::abs(n), n, e.value});
          kap.push_back({n, n, e.value});
          break;
      }
    }
  }
  auto in_tail = [&](const Val& x) { return std::abs(x.mode) >= tail; };
  auto in_half_tail = [&](const Val& x) { return std::abs(x.mode) >= tail && std::abs(x.mode) <= std::max(tail, N / 2); };

  r.H1 = injectivity("H1", hyp, tol);
  r.P1 = injectivity("P1", par, tol);

  // Disjointness of the two families.
  r.disjoint.name = "disjoint";
  r.disjoint.value = INFINITY;
  for (const auto& a : hyp)
    for (const auto& b : par) {
      const double d = std::abs(a.v - b.v);
      if (d < r.disjoint.value) {
        r.disjoint.value = d;
        r.disjoint.witness_a = a.index;
        r.disjoint.witness_b = b.index;
      }
      if (d <= tol * scale_of(a.v, b.v) && r.disjoint.note.empty())
        r.disjoint.note = fmt::format("hyperbolic mode {} meets parabolic index {}", a.index, b.index);
    }
  r.disjoint.pass = r.disjoint.note.empty();

  // H2: least-squares fit ν ≈ β + iτn on the upper half of the hyperbolic tail, where e_n has settled;
  // fitting over the whole tail biases β by the O(1/n²) transient and the residuals then never become ℓ².
  {
    double sn = 0, sn2 = 0, sim = 0, snim = 0, sre = 0;
    int cnt = 0;
    const int fit_from = std::max(tail, N / 2);
    for (const auto& x : hyp) {
      if (std::abs(x.mode) < fit_from) continue;
      const double n = x.mode;
      sn += n;
      sn2 += n * n;
      sim += x.v.imag();
      snim += n * x.v.imag();
      sre += x.v.real();
      ++cnt;
    }
    if (cnt >= 2) {
      const double det = cnt * sn2 - sn * sn;
      r.tau = (cnt * snim - sn * sim) / det;
      r.beta_im = (sim - r.tau * sn) / cnt;
      r.beta_re = sre / cnt;
    }
    std::vector<std::pair<int, double>> sums;
    double acc = 0.0;
    for (int k = tail; k <= N; ++k) {
      for (const auto& x : hyp)
        if (std::abs(x.mode) == k) acc += std::norm(x.v - cplx(r.beta_re, r.beta_im) - kI * (r.tau * x.mode));
      sums.push_back({k, acc});
      r.residual_partial_sums.push_back(acc);
    }
    r.H2.name = "H2";
    r.H2.value = acc;
    r.H2.pass = r.tau > 0.0 && dyadic_summable(sums, N);
    r.H2.note = fmt::format("beta={:.6g}{:+.6g}i tau={:.6g}", r.beta_re, r.beta_im, r.tau);
    r.time_above_critical = r.tau > 0.0 && T > kTwoPi / r.tau;
  }

  // P2: sector constant on the parabolic tail.
  r.P2.name = "P2";
  r.P2.value = INFINITY;
  for (const auto& x : par) {
    if (!in_tail(x) || x.v.imag() == 0.0) continue;
    const double c = -x.v.real() / std::abs(x.v.imag());
    if (c < r.P2.value) {
      r.P2.value = c;
      r.P2.witness_a = x.index;
    }
  }
  r.P2.pass = r.P2.value > 0.0;

  // P3: gap in |m^r − l^r| on the parabolic tail.
  r.r = 2.0;
  auto den_r = [](const Val& a, const Val& b) {
    return std::abs(static_cast<double>(a.index) * a.index - static_cast<double>(b.index) * b.index);
  };
  const GapResult p3 = min_gap(par, den_r, in_tail);
  const GapResult p3h = min_gap(par, den_r, in_half_tail);
  r.gap_half_window = p3h.value;
  r.P3 = stable_gap("P3", p3, p3h);

  // P4: modulus envelope ε B0 m^r ≤ |ν| ≤ B0 m^r with A0 = 0.
  {
    double bmax = 0.0;
    for (const auto& x : par)
      if (in_tail(x)) bmax = std::max(bmax, std::abs(x.v) / (static_cast<double>(x.index) * x.index));
    r.B0 = bmax;
    r.A0 = 0.0;
    r.eps = INFINITY;
    for (const auto& x : par) {
      if (!in_tail(x)) continue;
      const double e = std::abs(x.v) / (bmax * static_cast<double>(x.index) * x.index);
      if (e < r.eps) {
        r.eps = e;
        r.P4.witness_a = x.index;
      }
    }
    r.P4.name = "P4";
    r.P4.value = r.eps;
    // B0 ≥ δ only constrains the choice of δ; any δ ≤ min(gap, B0) serves.
    r.P4.pass = r.eps > 0.0 && std::isfinite(r.eps) && r.B0 > 0.0;
    r.P4.note = fmt::format("B0={:.6g} delta={:.6g}", r.B0, std::min(r.B0, r.P3.value));
  }

  // Relaxed conditions: sector in |ν|, gap in rank difference under modulus ordering, Σ 1/|ν|.
  {
    r.relaxed_sector.name = "relaxed_sector";
    r.relaxed_sector.value = INFINITY;
    for (const auto& x : par) {
      const double c = -x.v.real() / std::abs(x.v);
      if (c < r.relaxed_sector.value) {
        r.relaxed_sector.value = c;
        r.relaxed_sector.witness_a = x.index;
      }
    }
    r.relaxed_sector.pass = r.relaxed_sector.value > 0.0;

    auto ranked = [&](int limit) {
      std::vector<Val> xs;
      for (const auto& x : par)
        if (std::abs(x.mode) <= limit) xs.push_back(x);
      std::stable_sort(xs.begin(), xs.end(), [](const Val& a, const Val& b) {
        if (std::abs(a.v) != std::abs(b.v)) return std::abs(a.v) < std::abs(b.v);
        return a.v.imag() < b.v.imag();
      });
      std::vector<Val> out;
      for (std::size_t k = 0; k < xs.size(); ++k) out.push_back({static_cast<int>(k) + 1, xs[k].mode, xs[k].v});
      return out;
    };
    auto den1 = [](const Val& a, const Val& b) { return std::abs(static_cast<double>(a.index - b.index)); };
    auto all = [](const Val&) { return true; };
    const GapResult g = min_gap(ranked(N), den1, all);
    const GapResult gh = min_gap(ranked(std::max(1, N / 2)), den1, all);
    r.relaxed_gap = stable_gap("relaxed_gap", g, gh);

    std::vector<std::pair<int, double>> sums;
    double acc = 0.0;
    for (int k = 1; k <= N; ++k) {
      for (const auto& x : par)
        if (std::abs(x.mode) == k) acc += 1.0 / std::abs(x.v);
      sums.push_back({k, acc});
      r.inverse_modulus_partial_sums.push_back(acc);
    }
    r.relaxed_summable.name = "relaxed_summable";
    r.relaxed_summable.value = acc;
    r.relaxed_summable.pass = dyadic_summable(sums, N);
    r.relaxed_summable.note = fmt::format("partial sum over |n| <= {}", N);
  }

  if (!baro) {
    const auto& q = nonbarotropic(slice.params);
    auto cross = [&](const std::vector<Val>& A, double ca, const std::vector<Val>& B,
                     double cb, int limit) {
      GapResult g;
      for (const auto& a : A) {
        if (std::abs(a.mode) < tail || std::abs(a.mode) > limit) continue;
        for (const auto& b : B) {
          if (std::abs(b.mode) < tail || std::abs(b.mode) > limit) continue;
          if (&A == &B && std::abs(a.mode) == std::abs(b.mode)) continue;
          const double d = std::abs(ca * a.mode * a.mode - cb * b.mode * b.mode);
          if (!(d > 1e-12 * std::max(ca, cb) * (a.mode * a.mode + b.mode * b.mode))) continue;
          const double v = std::abs(a.v - b.v) / d;
          if (v < g.value) {
            g.value = v;
            g.a = a.mode;
            g.b = b.mode;
          }
        }
      }
      return g;
    };
    r.cross_branch.push_back(stable_gap("gap_lambda_lambda", cross(lam, q.lambda0, lam, q.lambda0, N),
                                        cross(lam, q.lambda0, lam, q.lambda0, N / 2)));
    r.cross_branch.push_back(stable_gap("gap_kappa_kappa", cross(kap, q.kappa0, kap, q.kappa0, N),
                                        cross(kap, q.kappa0, kap, q.kappa0, N / 2)));
    r.cross_branch.push_back(stable_gap("gap_lambda_kappa", cross(lam, q.lambda0, kap, q.kappa0, N),
                                        cross(lam, q.lambda0, kap, q.kappa0, N / 2)));
  }
  return r;
}

BiorthogonalDiagnostic biorthogonal_gram(const std::vector<cplx>& rates, double T, double svd_threshold) {
  const int K = static_cast<int>(rates.size());
  for (int i = 0; i < K; ++i) {
    if (!(rates[i].real() < 0.0)) throw DomainError("PreconditionViolated", "rates must have negative real part");
    for (int j = i + 1; j < K; ++j)
      if (std::abs(rates[i] - rates[j]) <= 1e-12 * std::max({1.0, std::abs(rates[i]), std::abs(rates[j])}))
        throw DomainError("DuplicateRate", fmt::format("rates {} and {} coincide", i, j));
  }
  BiorthogonalDiagnostic d;
  d.gram.resize(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) d.gram(i, j) = lag_integral(0, std::conj(rates[i]) + rates[j], T);
  if (K == 0) return d;
  Eigen::JacobiSVD<CMat> svd(d.gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  for (int i = 0; i < K; ++i) d.singular_values.push_back(sv(i));
  const double cut = svd_threshold * sv(0);
  d.rank = 0;
  for (int i = 0; i < K; ++i)
    if (sv(i) > cut) ++d.rank;
  d.condition = sv(K - 1) > 0.0 ? sv(0) / sv(K - 1) : INFINITY;
  // ‖q_n‖² = (G⁺)_{nn} for the family biorthogonal to the exponentials within their span.
  for (int n = 0; n < K; ++n) {
    double s = 0.0;
    for (int i = 0; i < K; ++i)
      if (sv(i) > cut) s += std::norm(svd.matrixV()(n, i)) / sv(i);
    d.coefficient_bounds.push_back(std::sqrt(s));
  }
  return d;
}

}  // namespace lcns
