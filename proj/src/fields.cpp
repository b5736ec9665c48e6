#include "lcns/fields.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "lcns/errors.hpp"

namespace lcns {

SpectralField SpectralField::zero(int dim, int N) {
  if (dim < 2 || dim > 3) throw DomainError("DimMismatch", fmt::format("field dimension {} not in {{2,3}}", dim));
  if (N < 0) throw DomainError("PreconditionViolated", "field cutoff must be >= 0");
  SpectralField f;
  f.dim = dim;
  f.N = N;
  f.coeffs.assign(static_cast<std::size_t>(2 * N + 1), CVec::Zero(dim));
  return f;
}

cplx SpectralField::get(int n, int component) const {
  if (n < -N || n > N) return 0.0;
  return at(n)(component);
}

bool SpectralField::mean_zero() const { return at(0).norm() == 0.0; }

bool SpectralField::is_zero() const {
  for (const auto& c : coeffs)
    if (c.norm() != 0.0) return false;
  return true;
}

bool SpectralField::is_real(double tol) const {
  double scale = 0.0;
  for (const auto& c : coeffs) scale = std::max(scale, c.norm());
  for (int n = 0; n <= N; ++n)
    if ((at(-n) - at(n).conjugate()).norm() > tol * std::max(scale, 1e-300)) return false;
  return true;
}

void SpectralField::enforce_real() {
  for (int n = 1; n <= N; ++n) at(-n) = at(n).conjugate();
  at(0) = at(0).real().cast<cplx>();
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.dim != dim) throw DomainError("DimMismatch", "adding fields of different dimension");
  if (o.N > N) {
    SpectralField g = zero(dim, o.N);
    for (int n = -N; n <= N; ++n) g.at(n) = at(n);
    *this = std::move(g);
  }
  for (int n = -o.N; n <= o.N; ++n) at(n) += o.at(n);
  return *this;
}

SpectralField& SpectralField::operator*=(cplx a) {
  for (auto& c : coeffs) c *= a;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator*(cplx a, SpectralField f) { return f *= a; }

NormSpec NormSpec::l2(const SystemParams& p) {
  NormSpec s;
  s.weights = component_weights(p);
  s.orders.assign(s.weights.size(), 0.0);
  return s;
}

NormSpec NormSpec::with_orders(const SystemParams& p, std::vector<double> orders) {
  NormSpec s;
  s.weights = component_weights(p);
  if (orders.size() != s.weights.size()) throw DomainError("DimMismatch", "Sobolev orders do not match dimension");
  s.orders = std::move(orders);
  return s;
}

namespace {

void check_spec(const NormSpec& spec, int dim) {
  if (static_cast<int>(spec.weights.size()) != dim || static_cast<int>(spec.orders.size()) != dim)
    throw DomainError("DimMismatch", fmt::format("norm spec has {} weights for a {}-component field",
                                                 spec.weights.size(), dim));
  for (double w : spec.weights)
    if (!(w > 0.0)) throw DomainError("PreconditionViolated", "norm weights must be positive");
}

}  // namespace

cplx weighted_inner_product(const SpectralField& f, const SpectralField& g, const NormSpec& spec) {
  if (f.dim != g.dim) throw DomainError("DimMismatch", fmt::format("inner product of {}- and {}-component fields",
                                                                   f.dim, g.dim));
  check_spec(spec, f.dim);
  const int M = std::min(f.N, g.N);
  cplx s = 0.0;
  for (int n = -M; n <= M; ++n) {
    const double k = 1.0 + static_cast<double>(n) * n;
    for (int j = 0; j < f.dim; ++j) {
      const double w = spec.weights[j] * (spec.orders[j] == 0.0 ? 1.0 : std::pow(k, spec.orders[j]));
      s += w * f.at(n)(j) * std::conj(g.at(n)(j));
    }
  }
  return kTwoPi * s;
}

double sobolev_norm(const SpectralField& f, const NormSpec& spec) {
  check_spec(spec, f.dim);
  for (double s : spec.orders)
    if (s < 0.0 && !f.mean_zero())
      throw DomainError("MeanZeroRequired", "negative-order norm needs a mean-zero field");
  return std::sqrt(std::max(0.0, weighted_inner_product(f, f, spec).real()));
}

EigenExpansion EigenExpansion::zero(int dim, int N) {
  EigenExpansion e;
  e.dim = dim;
  e.N = N;
  e.coeffs.assign(static_cast<std::size_t>(2 * N + 1), CVec());
  e.condition.assign(static_cast<std::size_t>(2 * N + 1), 1.0);
  for (int n = -N; n <= N; ++n)
    if (n != 0) e.at(n) = CVec::Zero(dim);
  return e;
}

cplx EigenExpansion::coefficient(const SpectrumSlice& slice, int n, Branch b) const {
  const auto& basis = slice.mode(n).basis;
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (basis[k].branch == b) return at(n)(static_cast<Eigen::Index>(k));
  throw DomainError("PreconditionViolated", fmt::format("branch {} absent at mode {}", branch_tag(b), n));
}

namespace {

CMat basis_matrix(const ModeSpectrum& ms) {
  const int d = static_cast<int>(ms.basis.size());
  CMat B(ms.basis.front().vector.size(), d);
  for (int k = 0; k < d; ++k) B.col(k) = ms.basis[k].vector;
  return B;
}

}  // namespace

EigenExpansion expand_in_eigenbasis(const SpectralField& field, const SpectrumSlice& slice) {
  if (field.dim != slice.dim())
    throw DomainError("DimMismatch", fmt::format("{}-component field against a {}-component slice", field.dim,
                                                 slice.dim()));
  if (!field.mean_zero()) throw DomainError("MeanZeroRequired", "eigen-expansion needs a mean-zero field");
  if (field.N > slice.N)
    throw DomainError("PreconditionViolated",
                      fmt::format("field cutoff {} exceeds slice cutoff {}", field.N, slice.N));
  EigenExpansion e = EigenExpansion::zero(field.dim, field.N);
  for (int n = -field.N; n <= field.N; ++n) {
    if (n == 0) continue;
    const CMat B = basis_matrix(slice.mode(n));
    Eigen::JacobiSVD<CMat> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    e.condition[static_cast<std::size_t>(n + field.N)] = cond;
    if (cond > 1e12)
      throw NumericalError("IllConditioned", fmt::format("mode {} basis condition number {:.3g}", n, cond));
    e.at(n) = svd.solve(field.at(n));
  }
  return e;
}

SpectralField reconstruct(const EigenExpansion& e, const SpectrumSlice& slice) {
  if (e.N > slice.N) throw DomainError("PreconditionViolated", "expansion exceeds slice cutoff");
  SpectralField f = SpectralField::zero(e.dim, e.N);
  for (int n = -e.N; n <= e.N; ++n) {
    if (n == 0) continue;
    const auto& basis = slice.mode(n).basis;
    for (std::size_t k = 0; k < basis.size(); ++k) f.at(n) += e.at(n)(static_cast<Eigen::Index>(k)) * basis[k].vector;
  }
  return f;
}

SpectralField basis_field(const SpectrumSlice& slice, int n, int basis_index) {
  SpectralField f = SpectralField::zero(slice.dim(), std::abs(n));
  f.at(n) = slice.mode(n).basis.at(static_cast<std::size_t>(basis_index)).vector;
  return f;
}

SpectralField random_field(int dim, int N, std::mt19937_64& rng, double decay, bool real) {
  std::normal_distribution<double> g(0.0, 1.0);
  SpectralField f = SpectralField::zero(dim, N);
  for (int n = 1; n <= N; ++n) {
    const double amp = std::pow(1.0 + static_cast<double>(n) * n, -0.5 * decay) / std::sqrt(2.0);
    for (int j = 0; j < dim; ++j) {
      f.at(n)(j) = amp * cplx(g(rng), g(rng));
      if (!real) f.at(-n)(j) = amp * cplx(g(rng), g(rng));
    }
  }
  if (real) f.enforce_real();
  return f;
}

void write_field_csv(std::ostream& os, const SpectralField& f) {
  os << "n,component,re,im\n";
  for (int n = -f.N; n <= f.N; ++n)
    for (int j = 0; j < f.dim; ++j)
      os << fmt::format("{},{},{:.17g},{:.17g}\n", n, j, f.at(n)(j).real(), f.at(n)(j).imag());
}

SpectralField read_field_csv(std::istream& is, int dim, int N) {
  SpectralField f = SpectralField::zero(dim, N);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.rfind("n,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string tok[4];
    for (auto& t : tok)
      if (!std::getline(ss, t, ',')) throw ConfigError(fmt::format("field CSV line {}: expected 4 columns", lineno));
    try {
      const int n = std::stoi(tok[0]);
      const int j = std::stoi(tok[1]);
      if (j < 0 || j >= dim) throw ConfigError(fmt::format("field CSV line {}: component {} out of range", lineno, j));
      if (n < -N || n > N) continue;
      f.at(n)(j) = cplx(std::stod(tok[2]), std::stod(tok[3]));
    } catch (const std::logic_error&) {
      throw ConfigError(fmt::format("field CSV line {}: malformed number", lineno));
    }
  }
  return f;
}

}  // namespace lcns
