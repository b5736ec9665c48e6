#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lcns {

// Two-field system: density and velocity.
struct BarotropicParams {
  double rho_bar = 1.0;
  double u_bar = 1.0;
  double mu0 = 1.0;  // (λ+2μ)/ρ̄
  double b = 1.0;    // aγρ̄^(γ−2)
  double omega0 = 1.0;  // bρ̄/μ0
};

// Three-field system: density, velocity, temperature.
struct NonBarotropicParams {
  double rho_bar = 1.0;
  double u_bar = 1.0;
  double theta_bar = 1.0;
  double lambda0 = 1.0;
  double kappa0 = 1.0;
  double R = 1.0;
  double c0 = 1.0;
  double omega_bar = 1.0;  // Rθ̄/λ0
};

using SystemParams = std::variant<BarotropicParams, NonBarotropicParams>;

// Validating constructors; they compute the derived constant.
BarotropicParams make_barotropic(double rho_bar, double u_bar, double mu0, double b);
NonBarotropicParams make_nonbarotropic(double rho_bar, double u_bar, double theta_bar, double lambda0,
                                       double kappa0, double R, double c0);

BarotropicParams derive_barotropic(double rho_bar, double u_bar, double a, double gamma,
                                   double lambda_visc, double mu_visc);

void validate(const BarotropicParams& p);
void validate(const NonBarotropicParams& p);
void validate(const SystemParams& p);

int dim(const SystemParams& p);
double u_bar(const SystemParams& p);
double rho_bar(const SystemParams& p);
// Limit of −Re ν on the hyperbolic branch (ω0 or ω̄).
double hyperbolic_decay(const SystemParams& p);
bool is_barotropic(const SystemParams& p);
const BarotropicParams& barotropic(const SystemParams& p);
const NonBarotropicParams& nonbarotropic(const SystemParams& p);

// Energy weights of the components: (b, ρ̄) or (Rθ̄, ρ̄², ρ̄²c0/θ̄).
std::vector<double> component_weights(const SystemParams& p);

enum class Verdict { AllSimple, MultipleWithChain, UniqueContinuationFails };
std::string to_string(Verdict v);

struct DegeneracyReport {
  double n0 = 0.0;
  bool n0_natural = false;
  std::optional<double> n1;
  bool n1_natural = false;
  Verdict verdict = Verdict::AllSimple;
  double integer_tolerance = 1e-9;
};

DegeneracyReport check_degeneracy_barotropic(const BarotropicParams& p, double integer_tolerance = 1e-9);

// Distance of x to the nearest positive integer is below tol.
bool is_natural(double x, double tol);

struct Convergent {
  long long a = 0;
  long long b = 1;
  double error = 0.0;
};

struct SMembershipReport {
  double ratio = 0.0;
  std::optional<std::pair<long long, long long>> rational_hit;
  std::vector<Convergent> continued_fraction;
  // Sup of −log(error)/log(b) over the tail half of the convergents with b ≥ 2.
  double fitted_M = 0.0;
  // Same sup over every convergent with b ≥ 2.
  double strict_M = 0.0;
  bool exact_input = false;
  bool in_s() const { return !rational_hit.has_value(); }
};

SMembershipReport check_s_membership(double lambda0, double kappa0, double rational_tolerance = 1e-12,
                                     long long max_denominator = 1000000);

// Rational inputs λ0 = ln/ld, κ0 = kn/kd: membership decided exactly by perfect-square detection.
SMembershipReport check_s_membership_exact(long long ln, long long ld, long long kn, long long kd,
                                           long long max_denominator = 1000000);

}  // namespace lcns
