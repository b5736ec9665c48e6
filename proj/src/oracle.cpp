#include "lcns/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "lcns/errors.hpp"
#include "lcns/evolution.hpp"
#include "lcns/spectrum.hpp"

namespace lcns {

GridState GridState::zero(int dim, int M, double t) {
  GridState g;
  g.M = M;
  g.dim = dim;
  g.t = t;
  g.values.assign(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(M), 0.0));
  return g;
}

double GridState::x(int j) const { return kTwoPi * j / M; }

GridState sample_on_grid(const SpectralField& f, int M, double t) {
  if (M < 1) throw DomainError("PreconditionViolated", "grid needs at least one node");
  GridState g = GridState::zero(f.dim, M, t);
  for (int j = 0; j < M; ++j) {
    const double x = g.x(j);
    for (int c = 0; c < f.dim; ++c) {
      cplx s = 0.0;
      for (int n = -f.N; n <= f.N; ++n) s += f.at(n)(c) * std::exp(kI * (static_cast<double>(n) * x));
      g.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = s.real();
    }
  }
  return g;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using RVec = Eigen::VectorXd;

// Forward generator U_t = A1 U_x + A2 U_xx read off the Fourier symbol at n = ±1.
void generator_coefficients(const SystemParams& p, Eigen::MatrixXd& A1, Eigen::MatrixXd& A2) {
  const CMat F1 = mode_symbol(p, 1, MatrixKind::Forward).entries;
  const CMat Fm = mode_symbol(p, -1, MatrixKind::Forward).entries;
  const CMat a1 = (F1 - Fm) / (2.0 * kI);
  const CMat a2 = -(F1 + Fm) / 2.0;
  const CMat F2 = mode_symbol(p, 2, MatrixKind::Forward).entries;
  const double mismatch = (F2 - (2.0 * kI * a1 - 4.0 * a2)).norm();
  if (mismatch > 1e-12 * (1.0 + F2.norm()) || a1.imag().norm() > 1e-14 * (1.0 + a1.norm()) ||
      a2.imag().norm() > 1e-14 * (1.0 + a2.norm()))
    throw NumericalError("InvariantFailed", "forward symbol is not a real second-order differential operator");
  A1 = a1.real();
  A2 = a2.real();
}

double weighted_energy(const RVec& U, int dim, int M, const std::vector<double>& w, double dx) {
  double e = 0.0;
  for (int c = 0; c < dim; ++c) e += w[static_cast<std::size_t>(c)] * U.segment(c * M, M).squaredNorm();
  return e * dx;
}

GridState to_grid(const RVec& U, int dim, int M, double t) {
  GridState g = GridState::zero(dim, M, t);
  for (int c = 0; c < dim; ++c)
    for (int j = 0; j < M; ++j) g.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = U(c * M + j);
  return g;
}

}  // namespace

FdmResult fdm_evolve(const SystemParams& p, const GridState& initial, double T, double dt,
                     const std::vector<double>& checkpoints, const std::optional<SeamTrace>& trace, int record_every) {
  validate(p);
  const int d = dim(p);
  const int M = initial.M;
  if (initial.dim != d) throw DomainError("DimMismatch", "grid state and system dimensions differ");
  if (M < 64) throw DomainError("PreconditionViolated", fmt::format("grid size M = {} below 64", M));
  for (const auto& comp : initial.values)
    for (double v : comp)
      if (!std::isfinite(v)) throw DomainError("PreconditionViolated", "initial grid state is not finite");
  if (!(T >= 0.0) || !(dt > 0.0)) throw DomainError("PreconditionViolated", "need T >= 0 and dt > 0");
  const double dx = kTwoPi / M;
  const double cfl = 0.5 * dx / u_bar(p);
  if (dt > cfl * (1.0 + 1e-12))
    throw DomainError("CFLViolation", fmt::format("dt = {} exceeds 0.5·dx/ū = {}", dt, cfl));
  const int steps = static_cast<int>(std::llround(T / dt));
  if (std::abs(steps * dt - T) > 1e-9 * std::max(1.0, T))
    throw DomainError("PreconditionViolated", fmt::format("T = {} is not a whole number of steps dt = {}", T, dt));
  if (trace) {
    if (trace->component < 0 || trace->component >= d)
      throw DomainError("PreconditionViolated", "seam trace component out of range");
    if (static_cast<int>(trace->values.size()) < steps + 1)
      throw DomainError("PreconditionViolated", "seam trace must be sampled at every step time");
  }

  Eigen::MatrixXd A1, A2;
  generator_coefficients(p, A1, A2);
  const int n = d * M;
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < d; ++c)
    for (int k = 0; k < d; ++k) {
      const double a = A1(c, k) / (2.0 * dx), b = A2(c, k) / (dx * dx);
      if (a == 0.0 && b == 0.0) continue;
      for (int j = 0; j < M; ++j) {
        const int jp = (j + 1) % M, jm = (j + M - 1) % M;
        trip.emplace_back(c * M + j, k * M + jp, a + b);
        trip.emplace_back(c * M + j, k * M + jm, -a + b);
        trip.emplace_back(c * M + j, k * M + j, -2.0 * b);
      }
    }
  SpMat L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  SpMat I(n, n);
  I.setIdentity();
  const SpMat lhs = I - 0.5 * dt * L;
  const SpMat rhs = I + 0.5 * dt * L;
  Eigen::SparseLU<SpMat> lu;
  lu.compute(lhs);
  if (lu.info() != Eigen::Success) throw NumericalError("SolverSingular", "Crank–Nicolson matrix factorisation failed");

  // Source of a unit seam jump on the traced component.
  RVec g_unit = RVec::Zero(n);
  if (trace) {
    const int k = trace->component;
    for (int c = 0; c < d; ++c) {
      const double a = A1(c, k) / (2.0 * dx), b = A2(c, k) / (dx * dx);
      g_unit(c * M + M - 1) += a + b;
      g_unit(c * M) += a - b;
    }
  }

  RVec U(n);
  for (int c = 0; c < d; ++c)
    for (int j = 0; j < M; ++j) U(c * M + j) = initial.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];

  std::vector<int> check_steps;
  for (double tc : checkpoints) {
    const int s = static_cast<int>(std::llround(tc / dt));
    if (s < 0 || s > steps) throw DomainError("PreconditionViolated", fmt::format("checkpoint {} outside [0, T]", tc));
    check_steps.push_back(s);
  }
  std::sort(check_steps.begin(), check_steps.end());

  FdmResult res;
  res.steps = steps;
  res.dt = dt;
  res.heuristic = trace.has_value();
  const auto w = component_weights(p);
  std::vector<double> means(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) means[static_cast<std::size_t>(c)] = U.segment(c * M, M).mean();
  double energy = weighted_energy(U, d, M, w, dx);
  std::size_t next_check = 0;
  auto record = [&](int s) {
    while (next_check < check_steps.size() && check_steps[next_check] == s) {
      res.snapshots.push_back(to_grid(U, d, M, s * dt));
      ++next_check;
    }
    if (record_every > 0 && s % record_every == 0) res.trajectory.push_back(to_grid(U, d, M, s * dt));
  };
  record(0);
  for (int s = 0; s < steps; ++s) {
    RVec b = rhs * U;
    if (trace) b += 0.5 * dt * (trace->values[static_cast<std::size_t>(s)] + trace->values[static_cast<std::size_t>(s + 1)]) * g_unit;
    U = lu.solve(b);
    if (lu.info() != Eigen::Success) throw NumericalError("SolverSingular", "Crank–Nicolson solve failed");
    for (int c = 0; c < d; ++c) {
      const double m = U.segment(c * M, M).mean();
      res.max_mass_drift = std::max(res.max_mass_drift, std::abs(m - means[static_cast<std::size_t>(c)]));
      means[static_cast<std::size_t>(c)] = m;
    }
    const double e = weighted_energy(U, d, M, w, dx);
    if (energy > 0.0) res.max_energy_increase = std::max(res.max_energy_increase, (e - energy) / energy);
    if (e > energy * (1.0 + 1e-10) && e > 1e-300) res.energy_non_increasing = false;
    energy = e;
    record(s + 1);
  }
  if (check_steps.empty() || check_steps.back() != steps) res.snapshots.push_back(to_grid(U, d, M, steps * dt));
  return res;
}

OracleComparison compare_spectral_fdm(const SystemParams& p, const SpectralField& initial, double T, int M, double dt) {
  if (!initial.is_real()) throw DomainError("PreconditionViolated", "oracle comparison needs a real-valued field");
  if (initial.dim != dim(p)) throw DomainError("DimMismatch", "field and system dimensions differ");
  OracleComparison out;
  out.M = M;
  out.dt = dt;
  out.times = {T / 4.0, T / 2.0, T};
  const GridState g0 = sample_on_grid(initial, M);
  const FdmResult fdm = fdm_evolve(p, g0, T, dt, out.times);
  out.max_mass_drift = fdm.max_mass_drift;
  out.max_energy_increase = fdm.max_energy_increase;
  out.energy_non_increasing = fdm.energy_non_increasing;
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    const GridState& a = fdm.snapshots[k];
    const GridState b = sample_on_grid(forward_state(initial, p, a.t).state, M, a.t);
    double num = 0.0, den = 0.0;
    for (int c = 0; c < a.dim; ++c)
      for (int j = 0; j < M; ++j) {
        const double x = a.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
        const double y = b.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
        num += (x - y) * (x - y);
        den += y * y;
      }
    out.rel_errors.push_back(den > 0.0 ? std::sqrt(num / den) : std::sqrt(num));
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const std::vector<GridState>& states) {
  os << "t,x,component,value\n";
  for (const auto& g : states)
    for (int c = 0; c < g.dim; ++c)
      for (int j = 0; j < g.M; ++j)
        os << fmt::format("{:.17g},{:.17g},{},{:.17g}\n", g.t, g.x(j), c,
                          g.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]);
}

}  // namespace lcns
