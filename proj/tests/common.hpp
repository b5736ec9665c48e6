#pragma once

#include <random>

#include "lcns/model.hpp"

namespace lcns::fixtures {

inline SystemParams unit_barotropic() { return make_barotropic(1.0, 1.0, 1.0, 1.0); }
// Non-degenerate reference instance used across the suite.
inline SystemParams reference_barotropic() { return make_barotropic(1.0, 0.9, 1.0, 1.3); }
inline SystemParams degenerate_barotropic() { return make_barotropic(1.0, 1.0, 1.0, 1.25); }
// Triple root at n = 1.
inline SystemParams instance_a() { return make_nonbarotropic(1.0, 1.0, 0.5, 1.0, 2.0, 1.0, 1.0); }
// Eigenvalue −1 at n = ±1.
inline SystemParams instance_b() { return make_nonbarotropic(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0); }

inline SystemParams random_params(std::mt19937_64& rng, bool barotropic) {
  std::uniform_real_distribution<double> u(0.3, 3.0);
  if (barotropic) return make_barotropic(u(rng), u(rng), u(rng), u(rng));
  return make_nonbarotropic(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
}

}  // namespace lcns::fixtures
