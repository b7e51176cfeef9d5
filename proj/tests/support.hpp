#pragma once

#include <random>

#include "admlab/measures_bv.hpp"

namespace admlab::testing {

/// BV function with up to five jumps of size >= 0.1, a 32-cell density and an
/// optional scaled Cantor part.
inline BVFunction random_bv(std::mt19937_64& rng, bool with_cantor) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::uniform_int_distribution<int> J(0, 5);
  BVFunction c;
  const int jumps = J(rng);
  for (int j = 0; j < jumps; ++j) {
    const double h = (U(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + U(rng));
    c.jumps.emplace_back(0.05 + 0.9 * U(rng), h);
  }
  std::vector<double> dens(32);
  for (auto& d : dens) d = 2.0 * U(rng) - 1.0;
  c.ac_density = GridFunction(0.0, 1.0, dens);
  if (with_cantor) c.singular = {8, 2.0 * U(rng) - 1.0};
  return c;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = N(rng);
  return v;
}

}  // namespace admlab::testing
