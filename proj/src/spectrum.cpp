#include "lcns/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "lcns/errors.hpp"

namespace lcns {

namespace {

using lcplx = std::complex<long double>;

double spectral_norm(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

double pair_residual(const CMat& m, cplx value, const CVec& v) {
  const CMat a = m - value * CMat::Identity(m.rows(), m.cols());
  const double denom = spectral_norm(m) * v.norm();
  if (denom == 0.0) return 0.0;
  return (a * v).norm() / denom;
}

// Null vector of M − zI from the smallest right singular vector.
CVec svd_null_vector(const CMat& m, cplx z) {
  const CMat a = m - z * CMat::Identity(m.rows(), m.cols());
  Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().col(m.cols() - 1);
}

// det(zI − M) in extended precision.
lcplx char_poly(const CMat& m, cplx zd) {
  const lcplx z(zd.real(), zd.imag());
  auto e = [&](int i, int j) {
    lcplx v(m(i, j).real(), m(i, j).imag());
    return (i == j ? z : lcplx(0)) - v;
  };
  if (m.rows() == 2) return e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
  return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
         e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
}

// Taylor coefficients t_0..t_d of det(zI − M) around z.
std::vector<lcplx> taylor(const CMat& m, cplx zd) {
  const int d = static_cast<int>(m.rows());
  const lcplx z(zd.real(), zd.imag());
  auto mm = [&](int i, int j) { return lcplx(m(i, j).real(), m(i, j).imag()); };
  lcplx tr = 0;
  for (int i = 0; i < d; ++i) tr += mm(i, i);
  std::vector<lcplx> t(d + 1);
  t[0] = char_poly(m, zd);
  if (d == 2) {
    t[1] = lcplx(2) * z - tr;
    t[2] = 1;
  } else {
    lcplx minors = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) minors += mm(i, i) * mm(j, j) - mm(i, j) * mm(j, i);
    t[1] = lcplx(3) * z * z - lcplx(2) * tr * z + minors;
    t[2] = lcplx(3) * z - tr;
    t[3] = 1;
  }
  return t;
}

cplx newton_polish(const CMat& m, cplx z) {
  const auto t = taylor(m, z);
  if (std::abs(t[1]) == 0.0L) return z;
  const lcplx zl(z.real(), z.imag());
  const lcplx zn = zl - t[0] / t[1];
  const cplx znd(static_cast<double>(zn.real()), static_cast<double>(zn.imag()));
  if (std::abs(char_poly(m, znd)) < std::abs(t[0])) return znd;
  return z;
}

struct Cluster {
  cplx value;
  int mult = 1;
  std::vector<int> members;  // indices into the root list
};

// Root spread of an m-fold cluster centred at z: max_k |t_k/t_m|^(1/(m−k)).
double cluster_spread(const CMat& m, cplx z, int mult) {
  const auto t = taylor(m, z);
  long double s = 0;
  for (int k = 0; k < mult; ++k) {
    if (std::abs(t[mult]) == 0.0L) return INFINITY;
    s = std::max(s, std::pow(std::abs(t[k] / t[mult]), 1.0L / static_cast<long double>(mult - k)));
  }
  return static_cast<double>(s);
}

std::vector<Cluster> cluster_roots(const CMat& m, const std::vector<cplx>& roots, double tol) {
  const int d = static_cast<int>(roots.size());
  cplx tr = m.trace();
  auto loose = [&](int i, int j) {
    return std::abs(roots[i] - roots[j]) <= 1e-3 * std::max({1.0, std::abs(roots[i]), std::abs(roots[j])});
  };
  if (d == 3 && loose(0, 1) && loose(0, 2) && loose(1, 2)) {
    const cplx zc = tr / 3.0;
    if (cluster_spread(m, zc, 3) <= tol * std::max(1.0, std::abs(zc))) return {{zc, 3, {0, 1, 2}}};
  }
  double best = INFINITY;
  int bi = -1, bj = -1;
  cplx bz;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (!loose(i, j)) continue;
      cplx zc = (d == 2) ? tr / 2.0 : (tr - roots[3 - i - j]) / 2.0;
      const double s = cluster_spread(m, zc, 2);
      if (s <= tol * std::max(1.0, std::abs(zc)) && s < best) {
        best = s;
        bi = i;
        bj = j;
        bz = zc;
      }
    }
  }
  std::vector<Cluster> out;
  if (bi >= 0) {
    out.push_back({bz, 2, {bi, bj}});
    for (int k = 0; k < d; ++k)
      if (k != bi && k != bj) out.push_back({roots[k], 1, {k}});
  } else {
    for (int k = 0; k < d; ++k) out.push_back({roots[k], 1, {k}});
  }
  return out;
}

std::vector<cplx> dense_roots(const CMat& m, bool check_backward) {
  Eigen::ComplexEigenSolver<CMat> es(m, true);
  if (es.info() != Eigen::Success) throw NumericalError("ConditioningError", "dense eigensolve failed");
  const double mn = spectral_norm(m);
  std::vector<cplx> roots;
  for (int k = 0; k < m.rows(); ++k) {
    const cplx z = es.eigenvalues()(k);
    if (check_backward) {
      const CVec v = es.eigenvectors().col(k);
      const double be = (m * v - z * v).norm() / v.norm();
      if (be > 1e-8 * mn)
        throw NumericalError("ConditioningError", fmt::format("dense backward error {} exceeds 1e-8·‖M‖", be));
    }
    roots.push_back(newton_polish(m, z));
  }
  return roots;
}

cplx anchor(const SystemParams& p, int n, Branch b) {
  const double n2 = static_cast<double>(n) * n;
  const cplx adv = kI * (u_bar(p) * n);
  switch (b) {
    case Branch::Hyperbolic: return adv - hyperbolic_decay(p);
    case Branch::Parabolic: return adv - barotropic(p).mu0 * n2;
    case Branch::ParabolicLambda: return adv - nonbarotropic(p).lambda0 * n2;
    case Branch::ParabolicKappa: return adv - nonbarotropic(p).kappa0 * n2;
  }
  return 0.0;
}

void check_mode(int n) {
  if (n == 0) throw DomainError("PreconditionViolated", "mode n = 0 is excluded");
}

}  // namespace

std::string branch_tag(Branch b) {
  switch (b) {
    case Branch::Hyperbolic: return "h";
    case Branch::Parabolic: return "p";
    case Branch::ParabolicLambda: return "plambda";
    case Branch::ParabolicKappa: return "pkappa";
  }
  return "?";
}

Branch branch_from_tag(const std::string& tag) {
  if (tag == "h") return Branch::Hyperbolic;
  if (tag == "p") return Branch::Parabolic;
  if (tag == "plambda") return Branch::ParabolicLambda;
  if (tag == "pkappa") return Branch::ParabolicKappa;
  throw DomainError("PreconditionViolated", "unknown branch tag " + tag);
}

ModeMatrix mode_symbol(const SystemParams& p, int n, MatrixKind kind) {
  const cplx in = kI * static_cast<double>(n);
  const double n2 = static_cast<double>(n) * n;
  ModeMatrix m;
  m.n = n;
  m.kind = kind;
  m.dim = dim(p);
  if (is_barotropic(p)) {
    const auto& q = barotropic(p);
    m.entries.resize(2, 2);
    m.entries << q.u_bar * in, q.rho_bar * in, q.b * in, -q.mu0 * n2 + q.u_bar * in;
  } else {
    const auto& q = nonbarotropic(p);
    m.entries.resize(3, 3);
    m.entries << q.u_bar * in, q.rho_bar * in, 0.0, (q.R * q.theta_bar / q.rho_bar) * in,
        -q.lambda0 * n2 + q.u_bar * in, q.R * in, 0.0, (q.R * q.theta_bar / q.c0) * in, -q.kappa0 * n2 + q.u_bar * in;
  }
  // The forward symbol flips the first-order terms; diffusion is real, so this is the entrywise conjugate.
  if (kind == MatrixKind::Forward) m.entries = m.entries.conjugate().eval();
  return m;
}

ModeMatrix mode_matrix(const SystemParams& p, int n, MatrixKind kind) {
  validate(p);
  check_mode(n);
  return mode_symbol(p, n, kind);
}

Branch classify_branch(const SystemParams& p, int n, cplx value) {
  std::vector<Branch> order = is_barotropic(p)
                                  ? std::vector<Branch>{Branch::Hyperbolic, Branch::Parabolic}
                                  : std::vector<Branch>{Branch::Hyperbolic, Branch::ParabolicLambda,
                                                        Branch::ParabolicKappa};
  Branch best = order.front();
  double bd = INFINITY;
  for (Branch b : order) {
    const double d = std::abs(value - anchor(p, n, b));
    if (d < bd) {
      bd = d;
      best = b;
    }
  }
  return best;
}

std::pair<EigenPair, EigenPair> eigen_barotropic(const BarotropicParams& q, int n, double clustering_tol) {
  validate(q);
  check_mode(n);
  const SystemParams sp = q;
  const ModeMatrix mm = mode_symbol(sp, n, MatrixKind::Adjoint);
  const double dn = static_cast<double>(n);
  const double n2 = dn * dn;
  const cplx in = kI * dn;
  const cplx disc = cplx(q.mu0 * q.mu0 * n2 * n2 - 4.0 * q.b * q.rho_bar * n2, 0.0);
  // Below the threshold the root is imaginary; taking its conjugate for n < 0 keeps ν_{−n} = conj(ν_n) per branch,
  // so a cross-mode coincidence shows up inside the parabolic family and hyperbolic values stay distinct.
  const cplx s = n < 0 ? std::conj(std::sqrt(disc)) : std::sqrt(disc);
  const cplx adv = q.u_bar * in;
  // Product form avoids cancellation in the hyperbolic root: (μ0n² − s)(μ0n² + s) = 4bρ̄n².
  cplx nu_p = adv - 0.5 * (q.mu0 * n2 + s);
  cplx nu_h = adv - 2.0 * q.b * q.rho_bar * n2 / (q.mu0 * n2 + s);
  bool merged = std::abs(s) <= clustering_tol * std::max(1.0, std::abs(nu_p));
  if (merged) {
    nu_p = adv - 0.5 * q.mu0 * n2;
    nu_h = nu_p;
  }
  EigenPair h, p;
  h.n = p.n = n;
  h.branch = Branch::Hyperbolic;
  p.branch = Branch::Parabolic;
  h.value = nu_h;
  p.value = nu_p;
  h.nu_scaled = nu_h / in;
  p.nu_scaled = nu_p / in;
  h.vector.resize(2);
  p.vector.resize(2);
  h.vector << q.rho_bar, h.nu_scaled - q.u_bar;
  p.vector << q.rho_bar / (p.nu_scaled - q.u_bar), 1.0;
  h.residual = pair_residual(mm.entries, h.value, h.vector);
  p.residual = pair_residual(mm.entries, p.value, p.vector);
  if (merged) {
    h.alg_mult = p.alg_mult = 2;
    h.degenerate_warning = p.degenerate_warning = true;
  }
  // Cross-check against the dense solver.
  const auto roots = dense_roots(mm.entries, false);
  for (const EigenPair* e : {&h, &p}) {
    double dmin = INFINITY;
    for (const auto& r : roots) dmin = std::min(dmin, std::abs(r - e->value));
    const double scale = 1.0 + std::abs(e->value);
    if (dmin > 1e-6 * scale && dmin > 1e-4 * std::sqrt(scale * spectral_norm(mm.entries)))
      throw NumericalError("ConditioningError",
                           fmt::format("closed-form eigenvalue at n={} disagrees with dense solve by {}", n, dmin));
  }
  return {h, p};
}

std::vector<EigenPair> eigen_nonbarotropic(const NonBarotropicParams& q, int n, double clustering_tol) {
  validate(q);
  check_mode(n);
  const SystemParams sp = q;
  const ModeMatrix mm = mode_symbol(sp, n, MatrixKind::Adjoint);
  const CMat& M = mm.entries;
  const double dn = static_cast<double>(n);
  const cplx in = kI * dn;
  const auto roots = dense_roots(M, true);
  const auto clusters = cluster_roots(M, roots, clustering_tol);

  // One slot per root (cluster values repeated by multiplicity).
  std::array<cplx, 3> slot;
  std::array<int, 3> slot_cluster{};
  int k = 0;
  for (int c = 0; c < static_cast<int>(clusters.size()); ++c)
    for (int j = 0; j < clusters[c].mult; ++j) {
      slot[k] = clusters[c].value;
      slot_cluster[k] = c;
      ++k;
    }

  const std::array<Branch, 3> labels{Branch::Hyperbolic, Branch::ParabolicLambda, Branch::ParabolicKappa};
  const bool equal_diffusion = std::abs(q.lambda0 - q.kappa0) <= 1e-12 * std::max(q.lambda0, q.kappa0);
  // perm[l] = slot assigned to label l.
  std::array<int, 3> perm{0, 1, 2}, best_perm{0, 1, 2};
  double best_cost = INFINITY;
  do {
    double cost = 0.0;
    for (int l = 0; l < 3; ++l) cost += std::abs(slot[perm[l]] - anchor(sp, n, labels[l]));
    if (cost < best_cost) {
      best_cost = cost;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (equal_diffusion) {
    // Both parabolic anchors coincide; the velocity-dominant vector is the λ branch.
    const int sa = best_perm[1], sb = best_perm[2];
    if (clusters[slot_cluster[sa]].mult == 1 && clusters[slot_cluster[sb]].mult == 1) {
      auto dominance = [&](int s) {
        const CVec v = svd_null_vector(M, slot[s]);
        return std::abs(v(1)) - std::abs(v(2));
      };
      if (dominance(sb) > dominance(sa)) std::swap(best_perm[1], best_perm[2]);
    }
  }

  const double ub = q.u_bar;
  std::vector<EigenPair> out;
  for (int l = 0; l < 3; ++l) {
    EigenPair e;
    e.n = n;
    e.branch = labels[l];
    e.value = slot[best_perm[l]];
    e.alg_mult = clusters[slot_cluster[best_perm[l]]].mult;
    e.degenerate_warning = e.alg_mult > 1;
    e.nu_scaled = e.value / in;
    const cplx d = ub - e.nu_scaled;      // ū − ν
    const cplx dl = q.lambda0 * in + d;   // λ0in + ū − ν
    const cplx dk = q.kappa0 * in + d;    // κ0in + ū − ν
    CVec v(3);
    bool closed = true;
    switch (labels[l]) {
      case Branch::Hyperbolic:
        v << q.R * q.rho_bar, -q.R * d, dl * d - q.R * q.theta_bar;
        break;
      case Branch::ParabolicLambda:
        if (std::abs(d) < 1e-6 * std::max(1.0, ub)) {
          closed = false;
        } else {
          v << -q.R * q.rho_bar / d, q.R, (q.R * q.theta_bar - dl * d) / d;
        }
        break;
      default:
        v << dl * dk - q.R * q.R * q.theta_bar / q.c0, -(q.R * q.theta_bar / q.rho_bar) * dk,
            q.R * q.R * q.theta_bar * q.theta_bar / (q.rho_bar * q.c0);
        break;
    }
    double res = closed ? pair_residual(M, e.value, v) : INFINITY;
    if (res > 1e-12) {
      // Dense null vector rescaled to the leading-entry convention of the branch.
      CVec w = svd_null_vector(M, e.value);
      int idx = labels[l] == Branch::Hyperbolic ? 0 : (labels[l] == Branch::ParabolicLambda ? 1 : 2);
      cplx target = labels[l] == Branch::Hyperbolic ? cplx(q.R * q.rho_bar)
                    : labels[l] == Branch::ParabolicLambda
                        ? cplx(q.R)
                        : cplx(q.R * q.R * q.theta_bar * q.theta_bar / (q.rho_bar * q.c0));
      if (std::abs(w(idx)) > 1e-14 * w.norm()) w *= target / w(idx);
      const double rw = pair_residual(M, e.value, w);
      if (rw < res) {
        v = w;
        res = rw;
      }
    }
    e.vector = v;
    e.residual = res;
    out.push_back(e);
  }
  return out;
}

GeneralizedChain generalized_chain(const ModeMatrix& m, cplx value, const CVec& base_vector, int multiplicity) {
  if (multiplicity < 2)
    throw NumericalError("ChainError", "a generalized chain needs algebraic multiplicity >= 2");
  const int d = static_cast<int>(m.entries.rows());
  const CMat a = m.entries - value * CMat::Identity(d, d);
  Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-10 * std::max(sv(0), 1e-300);
  auto solve = [&](const CVec& rhs) {
    CVec y = svd.matrixU().adjoint() * rhs;
    for (int i = 0; i < d; ++i) y(i) = sv(i) > cut ? y(i) / sv(i) : cplx(0.0);
    return CVec(svd.matrixV() * y);
  };
  GeneralizedChain g;
  g.n = m.n;
  g.value = value;
  g.base_vector = base_vector;
  g.algebraic_multiplicity = multiplicity;
  CVec prev = base_vector;
  for (int j = 1; j < multiplicity; ++j) {
    CVec w = solve(prev);
    const double res = (a * w - prev).norm() / prev.norm();
    if (!(res <= 1e-9))
      throw NumericalError("ChainError",
                           fmt::format("chain relation {} at n={} has residual {} (multiplicity misdetected)", j,
                                       m.n, res));
    g.max_residual = std::max(g.max_residual, res);
    g.chain_vectors.push_back(w);
    prev = w;
  }
  return g;
}

namespace {

ModeSpectrum assemble(const ModeMatrix& mm, std::vector<EigenPair> pairs) {
  ModeSpectrum ms;
  ms.n = mm.n;
  std::vector<bool> used(pairs.size(), false);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const auto& e = pairs[i];
    ms.basis.push_back({e.value, e.vector, e.branch, 0});
    if (e.alg_mult > 1) {
      std::vector<std::size_t> members;
      for (std::size_t j = i + 1; j < pairs.size(); ++j)
        if (!used[j] && pairs[j].alg_mult == e.alg_mult && pairs[j].value == e.value) members.push_back(j);
      GeneralizedChain g = generalized_chain(mm, e.value, e.vector, e.alg_mult);
      for (std::size_t c = 0; c < g.chain_vectors.size(); ++c) {
        Branch br = c < members.size() ? pairs[members[c]].branch : e.branch;
        ms.basis.push_back({e.value, g.chain_vectors[c], br, static_cast<int>(c) + 1});
        if (c < members.size()) used[members[c]] = true;
      }
      ms.chains.push_back(std::move(g));
    }
  }
  ms.pairs = std::move(pairs);
  return ms;
}

}  // namespace

ModeSpectrum mode_spectrum(const SystemParams& p, int n, double clustering_tol) {
  const ModeMatrix mm = mode_matrix(p, n);
  std::vector<EigenPair> pairs;
  if (is_barotropic(p)) {
    auto hp = eigen_barotropic(barotropic(p), n, clustering_tol);
    pairs = {hp.first, hp.second};
  } else {
    pairs = eigen_nonbarotropic(nonbarotropic(p), n, clustering_tol);
  }
  return assemble(mm, std::move(pairs));
}

ModeSpectrum dense_mode_spectrum(const ModeMatrix& mm, double clustering_tol) {
  const auto roots = dense_roots(mm.entries, true);
  const auto clusters = cluster_roots(mm.entries, roots, clustering_tol);
  std::vector<EigenPair> pairs;
  for (const auto& c : clusters) {
    for (int j = 0; j < c.mult; ++j) {
      EigenPair e;
      e.n = mm.n;
      e.branch = Branch::Hyperbolic;
      e.value = c.value;
      e.alg_mult = c.mult;
      e.degenerate_warning = c.mult > 1;
      e.nu_scaled = mm.n != 0 ? c.value / (kI * static_cast<double>(mm.n)) : cplx(0.0);
      e.vector = svd_null_vector(mm.entries, c.value);
      e.residual = pair_residual(mm.entries, e.value, e.vector);
      pairs.push_back(e);
    }
  }
  return assemble(mm, std::move(pairs));
}

int SpectrumSlice::dim() const { return lcns::dim(params); }

const ModeSpectrum& SpectrumSlice::mode(int n) const {
  if (!has_mode(n)) throw DomainError("PreconditionViolated", fmt::format("mode {} outside slice |n| <= {}", n, N));
  return modes[static_cast<std::size_t>(n < 0 ? n + N : n + N - 1)];
}

SpectrumSlice build_slice(const SystemParams& p, int N, double clustering_tol) {
  validate(p);
  if (N < 1) throw DomainError("PreconditionViolated", "slice cutoff N must be >= 1");
  SpectrumSlice s{p, N, clustering_tol, {}, {}, false};
  s.modes.reserve(2 * N);
  for (int n = -N; n <= N; ++n) {
    if (n == 0) continue;
    s.modes.push_back(mode_spectrum(p, n, clustering_tol));
  }
  if (!is_barotropic(p)) {
    const auto& q = nonbarotropic(p);
    s.equal_diffusivities = std::abs(q.lambda0 - q.kappa0) <= 1e-12 * std::max(q.lambda0, q.kappa0);
  }
  struct Entry {
    int n;
    Branch b;
    cplx v;
  };
  std::vector<Entry> all;
  for (const auto& m : s.modes)
    for (const auto& e : m.pairs) all.push_back({e.n, e.branch, e.value});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.v.imag() < b.v.imag(); });
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double scale = std::max({1.0, std::abs(all[i].v), std::abs(all[j].v)});
      if (all[j].v.imag() - all[i].v.imag() > clustering_tol * scale) break;
      const double d = std::abs(all[i].v - all[j].v);
      if (d <= clustering_tol * scale) {
        Entry a = all[i], b = all[j];
        if (std::make_pair(b.n, static_cast<int>(b.b)) < std::make_pair(a.n, static_cast<int>(a.b))) std::swap(a, b);
        s.coincidences.push_back({a.n, a.b, b.n, b.b, 0.5 * (a.v + b.v), d});
      }
    }
  }
  std::sort(s.coincidences.begin(), s.coincidences.end(), [](const Coincidence& a, const Coincidence& b) {
    return std::make_tuple(a.n1, static_cast<int>(a.b1), a.n2, static_cast<int>(a.b2)) <
           std::make_tuple(b.n1, static_cast<int>(b.b1), b.n2, static_cast<int>(b.b2));
  });
  return s;
}

int riesz_threshold(const SystemParams& p) {
  if (is_barotropic(p)) {
    const auto& q = barotropic(p);
    return std::max(1, static_cast<int>(std::ceil(2.0 * std::sqrt(q.b * q.rho_bar) / q.mu0 - 1e-9)));
  }
  const auto& q = nonbarotropic(p);
  const double c = 2.0 * std::sqrt(q.R * q.theta_bar * (1.0 + q.R / q.c0)) / std::min(q.lambda0, q.kappa0);
  return std::max(1, static_cast<int>(std::ceil(c - 1e-9)));
}

double riesz_term(const SystemParams& p, int n) {
  const auto w = component_weights(p);
  const auto ms = mode_spectrum(p, n);
  double total = 0.0;
  for (const auto& e : ms.pairs) {
    CVec psi = CVec::Zero(e.vector.size());
    if (is_barotropic(p)) {
      const auto& q = barotropic(p);
      if (e.branch == Branch::Hyperbolic)
        psi(0) = q.rho_bar;
      else
        psi(1) = 1.0;
    } else {
      const auto& q = nonbarotropic(p);
      if (e.branch == Branch::Hyperbolic)
        psi(0) = q.R * q.rho_bar;
      else if (e.branch == Branch::ParabolicLambda)
        psi(1) = q.R;
      else
        psi(2) = q.R * q.R * q.theta_bar * q.theta_bar / (q.rho_bar * q.c0);
    }
    const CVec diff = e.vector - psi;
    for (int c = 0; c < diff.size(); ++c) total += kTwoPi * w[c] * std::norm(diff(c));
  }
  return total;
}

std::vector<ClosenessPoint> riesz_closeness(const SystemParams& p, int N_start, int N_end) {
  validate(p);
  const int thr = riesz_threshold(p);
  if (N_start < thr)
    throw DomainError("PreconditionViolated",
                      fmt::format("N_start = {} is below the asymptotic threshold {}", N_start, thr));
  std::vector<ClosenessPoint> out;
  if (N_end < N_start) {
    out.push_back({N_end, 0.0, 0.0});
    return out;
  }
  double S = 0.0;
  for (int N = N_start; N <= N_end; ++N) {
    const double inc = riesz_term(p, N) + riesz_term(p, -N);
    S += inc;
    out.push_back({N, S, inc});
  }
  return out;
}

}  // namespace lcns
