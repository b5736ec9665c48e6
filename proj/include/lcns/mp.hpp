#pragma once

// 50-digit scalar types and exact-form integrals shared by the multiprecision code paths.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "lcns/types.hpp"

namespace lcns::mp {

using Real = boost::multiprecision::cpp_bin_float_50;
using Complex = boost::multiprecision::cpp_complex_50;

inline Complex to_mp(cplx z) { return Complex(Real(z.real()), Real(z.imag())); }
inline cplx to_double(const Complex& z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

// ∫_0^T s^j e^{a s} ds.
inline Complex lag_integral(int j, const Complex& a, const Real& T) {
  using boost::multiprecision::abs;
  using boost::multiprecision::exp;
  using boost::multiprecision::pow;
  if (abs(a) * T <= 1) {
    Complex sum = 0, ak = 1;
    Real kfact = 1;
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (int k = 0; k < 400; ++k) {
      if (k > 0) {
        ak *= a;
        kfact *= k;
      }
      const Complex term = ak * pow(T, k + j + 1) / (kfact * (k + j + 1));
      sum += term;
      if (abs(term) <= eps * abs(sum)) break;
    }
    return sum;
  }
  const Complex eaT = exp(a * T);
  Complex I = (eaT - Real(1)) / a;
  Real Tj = 1;
  for (int i = 1; i <= j; ++i) {
    Tj *= T;
    I = (Tj * eaT - Real(i) * I) / a;
  }
  return I;
}

}  // namespace lcns::mp

#include <vector>

namespace lcns::mp {

// Dense row-major Hermitian matrix, n×n.
struct HermitianEigen {
  std::vector<Real> values;       // ascending
  std::vector<Complex> vectors;   // column-major, column k belongs to values[k]
  int n = 0;
  const Complex& vec(int i, int k) const { return vectors[static_cast<std::size_t>(k * n + i)]; }
};

// Cyclic complex Jacobi rotations until the off-diagonal mass is below eps·‖A‖_F.
HermitianEigen hermitian_eigen(std::vector<Complex> A, int n);

}  // namespace lcns::mp
