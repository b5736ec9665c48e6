#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "lcns/fields.hpp"
#include "lcns/model.hpp"

namespace lcns {

// Real nodal values on x_j = 2πj/M, j = 0..M−1.
struct GridState {
  int M = 0;
  int dim = 2;
  double t = 0.0;
  std::vector<std::vector<double>> values;  // [component][node]

  static GridState zero(int dim, int M, double t = 0.0);
  double x(int j) const;
};

GridState sample_on_grid(const SpectralField& f, int M, double t = 0.0);

// Jump U(t, 2π) − U(t, 0) imposed on one component, sampled at the step times 0, dt, 2dt, …
struct SeamTrace {
  int component = 0;
  std::vector<double> values;
};

struct FdmResult {
  std::vector<GridState> snapshots;   // requested checkpoints, in order, plus the final state
  std::vector<GridState> trajectory;  // every record_every steps when requested
  int steps = 0;
  double dt = 0.0;
  double max_mass_drift = 0.0;        // largest per-step change of any component mean
  double max_energy_increase = 0.0;   // largest relative per-step growth of the weighted energy
  bool energy_non_increasing = true;  // within 1e−10 relative slack per step
  bool heuristic = false;             // seam traces were supplied
};

// Central differences in space, Crank–Nicolson in time, one sparse LU factorisation.
FdmResult fdm_evolve(const SystemParams& p, const GridState& initial, double T, double dt,
                     const std::vector<double>& checkpoints = {}, const std::optional<SeamTrace>& trace = std::nullopt,
                     int record_every = 0);

struct OracleComparison {
  std::vector<double> times;
  std::vector<double> rel_errors;  // nodal relative L² error per checkpoint
  double max_mass_drift = 0.0;
  double max_energy_increase = 0.0;
  bool energy_non_increasing = true;
  int M = 0;
  double dt = 0.0;
};

// Checkpoints T/4, T/2, T.
OracleComparison compare_spectral_fdm(const SystemParams& p, const SpectralField& initial, double T, int M, double dt);

// CSV t,x,component,value.
void write_trajectory_csv(std::ostream& os, const std::vector<GridState>& states);

}  // namespace lcns
