#pragma once

#include <random>

#include "bdgskin/lattice.hpp"

namespace testing {

inline bdgskin::cplx random_complex(std::mt19937_64& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng)};
}

inline bdgskin::ModelParams random_params(std::mt19937_64& rng) {
  bdgskin::ModelParams p;
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  p.omega0 = u(rng);
  p.j_x = random_complex(rng);
  p.j_y = random_complex(rng);
  p.j_xy = random_complex(rng);
  p.delta0 = random_complex(rng);
  p.delta_x = random_complex(rng);
  return p;
}

}  // namespace testing
