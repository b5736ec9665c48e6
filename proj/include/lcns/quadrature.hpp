#pragma once

// Composite Gauss–Legendre energy of exponential-polynomial signals, templated so the same kernel
// runs in double and in multiprecision.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace lcns::quad {

template <class Complex>
struct Term {
  Complex coefficient;
  Complex rate;
  int degree = 0;
};

template <class Real>
struct Energy {
  Real value = 0;
  Real error_bound = 0;
  int panels = 0;
  bool converged = true;
};

inline constexpr int kGaussPoints = 16;

// Breakpoints in s ∈ [0, T]: dyadic grading toward s = 0 for fast-decaying terms, then uniform panels.
struct Partition {
  std::vector<double> graded;  // increasing breakpoints of [0, h]
  double h = 0.0;              // uniform width on [h, T]
  int uniform = 0;             // number of uniform panels covering [h, T]
};

inline Partition make_partition(double T, double max_imag, double max_decay, int ppp, int refine) {
  Partition p;
  double target = T;
  if (max_imag > 0.0) target = std::min(target, 2.0 * M_PI / (ppp * max_imag));
  int panels = std::max(1, static_cast<int>(std::ceil(T / target - 1e-12)));
  panels <<= refine;
  p.h = T / panels;
  p.uniform = panels - 1;
  int levels = 0;
  if (max_decay * p.h > 1.0) levels = static_cast<int>(std::ceil(std::log2(max_decay * p.h)));
  p.graded.push_back(0.0);
  for (int k = levels; k >= 0; --k) p.graded.push_back(p.h / std::ldexp(1.0, k));
  return p;
}

// ∫_0^T |Σ c s^j e^{ν s}|² ds over one partition.
template <class Real, class Complex>
Real energy_on_partition(const std::vector<Term<Complex>>& terms, const Partition& part) {
  using std::exp;
  using std::norm;
  using G = boost::math::quadrature::gauss<Real, kGaussPoints>;
  const auto& xs = G::abscissa();
  const auto& ws = G::weights();
  std::vector<Real> nodes, weights;  // reference nodes on [0, 1]
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Real half = Real(1) / 2;
    if (xs[i] == 0) {
      nodes.push_back(half);
      weights.push_back(ws[i] * half);
      continue;
    }
    nodes.push_back(half * (1 - xs[i]));
    weights.push_back(ws[i] * half);
    nodes.push_back(half * (1 + xs[i]));
    weights.push_back(ws[i] * half);
  }
  int max_degree = 0;
  for (const auto& t : terms) max_degree = std::max(max_degree, t.degree);

  auto eval = [&](const Real& s) {
    Complex y(0);
    Real sp = 1;
    std::vector<Real> pw(static_cast<std::size_t>(max_degree) + 1);
    for (int j = 0; j <= max_degree; ++j) {
      pw[static_cast<std::size_t>(j)] = sp;
      sp *= s;
    }
    for (const auto& t : terms) y += t.coefficient * pw[static_cast<std::size_t>(t.degree)] * exp(t.rate * s);
    return y;
  };

  Real total = 0;
  // Graded panels: direct evaluation.
  for (std::size_t k = 0; k + 1 < part.graded.size(); ++k) {
    const Real a = Real(part.graded[k]);
    const Real w = Real(part.graded[k + 1]) - a;
    for (std::size_t i = 0; i < nodes.size(); ++i) total += weights[i] * w * norm(eval(a + w * nodes[i]));
  }
  if (part.uniform == 0) return total;

  // Uniform panels: per-term exponential recurrence across panels.
  const Real h = Real(part.h);
  const std::size_t nt = terms.size();
  const std::size_t nn = nodes.size();
  std::vector<Complex> panel(nt), step(nt), node_factor(nt * nn);
  for (std::size_t k = 0; k < nt; ++k) {
    panel[k] = terms[k].coefficient * exp(terms[k].rate * h);
    step[k] = exp(terms[k].rate * h);
    for (std::size_t i = 0; i < nn; ++i) node_factor[k * nn + i] = exp(terms[k].rate * (h * nodes[i]));
  }
  std::vector<Complex> acc(nn);
  for (int p = 0; p < part.uniform; ++p) {
    const Real a = h * (p + 1);
    std::fill(acc.begin(), acc.end(), Complex(0));
    if (max_degree == 0) {
      for (std::size_t k = 0; k < nt; ++k) {
        const Complex c = panel[k];
        const Complex* f = &node_factor[k * nn];
        for (std::size_t i = 0; i < nn; ++i) acc[i] += c * f[i];
      }
    } else {
      for (std::size_t i = 0; i < nn; ++i) {
        const Real s = a + h * nodes[i];
        for (std::size_t k = 0; k < nt; ++k) {
          Complex v = panel[k] * node_factor[k * nn + i];
          for (int j = 0; j < terms[k].degree; ++j) v *= s;
          acc[i] += v;
        }
      }
    }
    for (std::size_t i = 0; i < nn; ++i) total += weights[i] * h * norm(acc[i]);
    for (std::size_t k = 0; k < nt; ++k) panel[k] *= step[k];
  }
  return total;
}

// Richardson comparison against successively doubled resolution (at most two doublings).
template <class Real, class Complex>
Energy<Real> energy(const std::vector<Term<Complex>>& terms, double T, int ppp) {
  using std::abs;
  Energy<Real> out;
  if (terms.empty()) return out;
  double max_imag = 0.0, max_decay = 0.0;
  for (const auto& t : terms) {
    max_imag = std::max(max_imag, std::abs(static_cast<double>(t.rate.imag())));
    max_decay = std::max(max_decay, std::max(0.0, -static_cast<double>(t.rate.real())));
  }
  Partition p1 = make_partition(T, max_imag, max_decay, ppp, 0);
  Real q1 = energy_on_partition<Real, Complex>(terms, p1);
  Partition p2 = make_partition(T, max_imag, max_decay, ppp, 1);
  Real q2 = energy_on_partition<Real, Complex>(terms, p2);
  out.value = q2;
  out.error_bound = abs(q2 - q1);
  out.panels = p2.uniform + static_cast<int>(p2.graded.size()) - 1;
  if (out.error_bound > Real(1e-3) * abs(q2)) {
    Partition p3 = make_partition(T, max_imag, max_decay, ppp, 2);
    Real q3 = energy_on_partition<Real, Complex>(terms, p3);
    out.value = q3;
    out.error_bound = abs(q3 - q2);
    out.panels = p3.uniform + static_cast<int>(p3.graded.size()) - 1;
    out.converged = !(out.error_bound > Real(1e-3) * abs(q3));
  }
  return out;
}

}  // namespace lcns::quad
