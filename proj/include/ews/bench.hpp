#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ews/scenario.hpp"

namespace ews {

struct BenchCell {
  int constraints = 0;
  int K = 0;
  int repetitions = 0;
  double mean_seconds = 0.0;
  double max_seconds = 0.0;
};

// Random half-spaces whose boundaries sit outside the reachable set around x_ref.
UnsafeSet random_halfspaces(int count, const Vector& x_ref, const Matrix& Pi, std::uint64_t seed);

// Times the full-horizon suspicion evaluation for every (count, K) cell.
std::vector<BenchCell> run_bench(const Design& design, const std::vector<int>& counts,
                                 const std::vector<int>& horizons, int repetitions,
                                 std::uint64_t seed = 7);

std::string bench_csv(const std::vector<BenchCell>& cells);

}  // namespace ews
