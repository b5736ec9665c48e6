#include "lcns/model.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "lcns/errors.hpp"

namespace lcns {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError("PreconditionViolated", fmt::format("{} must be positive and finite, got {}", name, v));
}

}  // namespace

void validate(const BarotropicParams& p) {
  require_positive(p.rho_bar, "rho_bar");
  require_positive(p.u_bar, "u_bar");
  require_positive(p.mu0, "mu0");
  require_positive(p.b, "b");
}

void validate(const NonBarotropicParams& p) {
  require_positive(p.rho_bar, "rho_bar");
  require_positive(p.u_bar, "u_bar");
  require_positive(p.theta_bar, "theta_bar");
  require_positive(p.lambda0, "lambda0");
  require_positive(p.kappa0, "kappa0");
  require_positive(p.R, "R");
  require_positive(p.c0, "c0");
}

void validate(const SystemParams& p) {
  std::visit([](const auto& q) { validate(q); }, p);
}

BarotropicParams make_barotropic(double rho_bar, double u_bar, double mu0, double b) {
  BarotropicParams p{rho_bar, u_bar, mu0, b, 0.0};
  validate(p);
  p.omega0 = b * rho_bar / mu0;
  return p;
}

NonBarotropicParams make_nonbarotropic(double rho_bar, double u_bar, double theta_bar, double lambda0,
                                       double kappa0, double R, double c0) {
  NonBarotropicParams p{rho_bar, u_bar, theta_bar, lambda0, kappa0, R, c0, 0.0};
  validate(p);
  p.omega_bar = R * theta_bar / lambda0;
  return p;
}

BarotropicParams derive_barotropic(double rho_bar, double u_bar, double a, double gamma, double lambda_visc,
                                   double mu_visc) {
  require_positive(rho_bar, "rho_bar");
  require_positive(u_bar, "u_bar");
  require_positive(a, "a");
  require_positive(mu_visc, "mu_visc");
  if (!(gamma >= 1.0)) throw DomainError("PreconditionViolated", fmt::format("gamma must be >= 1, got {}", gamma));
  if (!(lambda_visc + mu_visc >= 0.0))
    throw DomainError("PreconditionViolated",
                      fmt::format("lambda_visc + mu_visc must be >= 0 (λ+μ<0), got {}", lambda_visc + mu_visc));
  const double mu0 = (lambda_visc + 2.0 * mu_visc) / rho_bar;
  const double b = a * gamma * std::pow(rho_bar, gamma - 2.0);
  return make_barotropic(rho_bar, u_bar, mu0, b);
}

int dim(const SystemParams& p) { return is_barotropic(p) ? 2 : 3; }
bool is_barotropic(const SystemParams& p) { return std::holds_alternative<BarotropicParams>(p); }
const BarotropicParams& barotropic(const SystemParams& p) { return std::get<BarotropicParams>(p); }
const NonBarotropicParams& nonbarotropic(const SystemParams& p) { return std::get<NonBarotropicParams>(p); }

double u_bar(const SystemParams& p) {
  return std::visit([](const auto& q) { return q.u_bar; }, p);
}

double rho_bar(const SystemParams& p) {
  return std::visit([](const auto& q) { return q.rho_bar; }, p);
}

double hyperbolic_decay(const SystemParams& p) {
  if (is_barotropic(p)) return barotropic(p).omega0;
  return nonbarotropic(p).omega_bar;
}

std::vector<double> component_weights(const SystemParams& p) {
  if (is_barotropic(p)) {
    const auto& q = barotropic(p);
    return {q.b, q.rho_bar};
  }
  const auto& q = nonbarotropic(p);
  return {q.R * q.theta_bar, q.rho_bar * q.rho_bar, q.rho_bar * q.rho_bar * q.c0 / q.theta_bar};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::AllSimple: return "AllSimple";
    case Verdict::MultipleWithChain: return "MultipleWithChain";
    case Verdict::UniqueContinuationFails: return "UniqueContinuationFails";
  }
  return "?";
}

bool is_natural(double x, double tol) {
  const double r = std::round(x);
  return r >= 1.0 && std::abs(x - r) < tol;
}

DegeneracyReport check_degeneracy_barotropic(const BarotropicParams& p, double integer_tolerance) {
  validate(p);
  if (!(integer_tolerance > 0.0 && integer_tolerance < 0.5))
    throw DomainError("PreconditionViolated", "integer_tolerance must lie in (0, 0.5)");
  DegeneracyReport r;
  r.integer_tolerance = integer_tolerance;
  const double br = p.b * p.rho_bar;
  r.n0 = 2.0 * std::sqrt(br) / p.mu0;
  r.n0_natural = is_natural(r.n0, integer_tolerance);
  const double gap = br - p.u_bar * p.u_bar;
  if (gap > 0.0) {
    r.n1 = 2.0 * std::sqrt(gap) / p.mu0;
    r.n1_natural = is_natural(*r.n1, integer_tolerance);
  }
  if (r.n1_natural)
    r.verdict = Verdict::UniqueContinuationFails;
  else if (r.n0_natural)
    r.verdict = Verdict::MultipleWithChain;
  else
    r.verdict = Verdict::AllSimple;
  return r;
}

namespace {

void fill_exponents(SMembershipReport& r) {
  std::vector<double> ms;
  for (const auto& c : r.continued_fraction) {
    if (c.b >= 2 && c.error > 0.0) ms.push_back(-std::log(c.error) / std::log(static_cast<double>(c.b)));
  }
  r.fitted_M = 0.0;
  r.strict_M = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    r.strict_M = std::max(r.strict_M, ms[i]);
    if (i >= ms.size() / 2) r.fitted_M = std::max(r.fitted_M, ms[i]);
  }
}

// Convergents of x with denominators up to max_den; stops early once the error drops below stop_tol.
std::vector<Convergent> convergents(long double x, long long max_den, long double stop_tol) {
  std::vector<Convergent> out;
  long double rem = x;
  long long h2 = 0, h1 = 1, k2 = 1, k1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const long double a = std::floor(rem);
    if (a > 9e15L) break;
    const long long ai = static_cast<long long>(a);
    const long long h = ai * h1 + h2;
    const long long k = ai * k1 + k2;
    if (k > max_den) break;
    const long double err = std::fabs(x - static_cast<long double>(h) / static_cast<long double>(k));
    out.push_back({h, k, static_cast<double>(err)});
    if (err <= stop_tol) break;
    const long double frac = rem - a;
    if (frac <= 0.0L) break;
    rem = 1.0L / frac;
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
  }
  return out;
}

}  // namespace

SMembershipReport check_s_membership(double lambda0, double kappa0, double rational_tolerance,
                                     long long max_denominator) {
  require_positive(lambda0, "lambda0");
  require_positive(kappa0, "kappa0");
  if (max_denominator < 2) throw DomainError("PreconditionViolated", "max_denominator must be >= 2");
  SMembershipReport r;
  const long double q = static_cast<long double>(lambda0) / static_cast<long double>(kappa0);
  const long double x = std::sqrt(q);
  r.ratio = static_cast<double>(x);
  r.continued_fraction = convergents(x, max_denominator, static_cast<long double>(rational_tolerance) * 1e-3L);
  for (const auto& c : r.continued_fraction) {
    if (c.error < rational_tolerance) {
      const long double sq = static_cast<long double>(c.a) * c.a / (static_cast<long double>(c.b) * c.b);
      if (std::fabs(q - sq) < rational_tolerance * std::max<long double>(1.0L, q)) {
        r.rational_hit = std::make_pair(c.a, c.b);
        break;
      }
    }
  }
  fill_exponents(r);
  return r;
}

namespace {

bool perfect_square(long long v, long long& root) {
  if (v < 0) return false;
  long long s = static_cast<long long>(std::llround(std::sqrt(static_cast<long double>(v))));
  for (long long c = std::max(0LL, s - 2); c <= s + 2; ++c) {
    if (c * c == v) {
      root = c;
      return true;
    }
  }
  return false;
}

}  // namespace

SMembershipReport check_s_membership_exact(long long ln, long long ld, long long kn, long long kd,
                                           long long max_denominator) {
  if (ln <= 0 || ld <= 0 || kn <= 0 || kd <= 0)
    throw DomainError("PreconditionViolated", "rational inputs must have positive numerators and denominators");
  __int128 num = static_cast<__int128>(ln) * kd;
  __int128 den = static_cast<__int128>(ld) * kn;
  auto g128 = [](__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  };
  const __int128 g = g128(num, den);
  num /= g;
  den /= g;
  if (num > static_cast<__int128>(INT64_MAX) || den > static_cast<__int128>(INT64_MAX))
    throw DomainError("PreconditionViolated", "reduced ratio exceeds 64-bit range");
  SMembershipReport r = check_s_membership(static_cast<double>(ln) / static_cast<double>(ld),
                                           static_cast<double>(kn) / static_cast<double>(kd), 0.0, max_denominator);
  r.exact_input = true;
  r.rational_hit.reset();
  long long rn = 0, rd = 0;
  if (perfect_square(static_cast<long long>(num), rn) && perfect_square(static_cast<long long>(den), rd))
    r.rational_hit = std::make_pair(rn, rd);
  return r;
}

}  // namespace lcns
