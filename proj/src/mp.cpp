#include "lcns/mp.hpp"

#include <algorithm>
#include <numeric>

namespace lcns::mp {

HermitianEigen hermitian_eigen(std::vector<Complex> A, int n) {
  auto a = [&](int i, int j) -> Complex& { return A[static_cast<std::size_t>(i * n + j)]; };
  std::vector<Complex> V(static_cast<std::size_t>(n * n), Complex(0));
  auto v = [&](int i, int j) -> Complex& { return V[static_cast<std::size_t>(j * n + i)]; };
  for (int i = 0; i < n; ++i) v(i, i) = 1;
  Real fro = 0;
  for (const auto& z : A) fro += norm(z);
  const Real tol = std::numeric_limits<Real>::epsilon() * std::numeric_limits<Real>::epsilon() * fro;
  for (int sweep = 0; sweep < 100; ++sweep) {
    Real off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += norm(a(p, q));
    if (off <= tol) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const Real g = abs(a(p, q));
        if (g == 0) continue;
        const Complex e = a(p, q) / g;
        const Real app = a(p, p).real(), aqq = a(q, q).real();
        const Real tau = (aqq - app) / (2 * g);
        const Real t = (tau >= 0 ? Real(1) : Real(-1)) / (abs(tau) + sqrt(1 + tau * tau));
        const Real c = 1 / sqrt(1 + t * t), s = t * c;
        // U = diag(1, conj(e))·[[c, s], [−s, c]] on the (p, q) plane.
        const Complex upp = c, upq = s, uqp = -s * conj(e), uqq = c * conj(e);
        for (int i = 0; i < n; ++i) {
          const Complex aip = a(i, p), aiq = a(i, q);
          a(i, p) = aip * upp + aiq * uqp;
          a(i, q) = aip * upq + aiq * uqq;
        }
        for (int j = 0; j < n; ++j) {
          const Complex apj = a(p, j), aqj = a(q, j);
          a(p, j) = conj(upp) * apj + conj(uqp) * aqj;
          a(q, j) = conj(upq) * apj + conj(uqq) * aqj;
        }
        a(p, q) = 0;
        a(q, p) = 0;
        for (int i = 0; i < n; ++i) {
          const Complex vip = v(i, p), viq = v(i, q);
          v(i, p) = vip * upp + viq * uqp;
          v(i, q) = vip * upq + viq * uqq;
        }
      }
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x).real() < a(y, y).real(); });
  HermitianEigen out;
  out.n = n;
  out.vectors.resize(V.size());
  for (int k = 0; k < n; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    out.values.push_back(a(src, src).real());
    for (int i = 0; i < n; ++i) out.vectors[static_cast<std::size_t>(k * n + i)] = v(i, src);
  }
  return out;
}

}  // namespace lcns::mp
