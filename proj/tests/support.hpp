#pragma once

#include <random>

#include "ews/scenario.hpp"

namespace ews::testing {

inline const Design& reactor_design() {
  static const Design d = run_design(parse_config(builtin_preset("reactor")));
  return d;
}

inline ScenarioConfig reactor_config() { return parse_config(builtin_preset("reactor")); }

inline Matrix random_spd(int n, std::mt19937_64& rng, double floor = 0.1) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  return m * m.transpose() + floor * Matrix::Identity(n, n);
}

inline Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Vector random_unit(int n, std::mt19937_64& rng) {
  Vector v;
  do {
    v = random_vector(n, rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

}  // namespace ews::testing
