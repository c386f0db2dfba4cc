#include "ews/bench.hpp"

#include <chrono>
#include <random>

#include "ews/monitor.hpp"
#include "ews/trace_io.hpp"

namespace ews {

UnsafeSet random_halfspaces(int count, const Vector& x_ref, const Matrix& Pi, std::uint64_t seed) {
  if (count < 1) throw InvariantError("constraint count must be at least 1");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> offset(1.5, 4.0);
  UnsafeSet su;
  su.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector c(x_ref.size());
    do {
      for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = normal(engine);
    } while (c.norm() == 0.0);
    c.normalize();
    const double width = std::sqrt(c.dot(Pi * c));
    su.push_back({c, c.dot(x_ref) + offset(engine) * width, "random-" + std::to_string(i + 1)});
  }
  return su;
}

std::vector<BenchCell> run_bench(const Design& design, const std::vector<int>& counts,
                                 const std::vector<int>& horizons, int repetitions,
                                 std::uint64_t seed) {
  if (repetitions < 1) throw InvariantError("repetitions must be at least 1");
  const auto [x_eq, st_eq] = equilibrium(design.model, design.ctrl, 0);
  const int max_count = *std::max_element(counts.begin(), counts.end());
  const UnsafeSet pool = random_halfspaces(max_count, x_eq, design.reach.Pi, seed);
  SuspicionOptions opts;
  opts.full_horizon = true;

  std::vector<BenchCell> cells;
  for (int count : counts) {
    if (count < 1) throw InvariantError("constraint counts must be at least 1");
    for (int K : horizons) {
      if (K < 2) throw InvariantError("bench horizons must be at least 2");
      EwsConfig cfg = design.ews;
      cfg.K = K;
      cfg.l1 = std::min(cfg.l1, K);
      cfg.l2 = std::min(cfg.l2, cfg.l1 - 1);
      cfg.su.assign(pool.begin(), pool.begin() + count);
      cfg = precompute(std::move(cfg));

      BenchCell cell{count, K, repetitions, 0.0, 0.0};
      // One untimed call warms caches and allocators.
      suspicion_step(cfg, design.model, design.ctrl, x_eq, st_eq, 0, opts);
      double total = 0.0;
      for (int r = 0; r < repetitions; ++r) {
        const SuspicionReport rep = suspicion_step(cfg, design.model, design.ctrl, x_eq, st_eq, 0, opts);
        const double s = std::chrono::duration<double>(rep.wall_time).count();
        total += s;
        cell.max_seconds = std::max(cell.max_seconds, s);
      }
      cell.mean_seconds = total / repetitions;
      cells.push_back(cell);
    }
  }
  return cells;
}

std::string bench_csv(const std::vector<BenchCell>& cells) {
  std::string out = "constraints,K,repetitions,mean_seconds,max_seconds\n";
  for (const auto& c : cells) {
    out += std::to_string(c.constraints) + ',' + std::to_string(c.K) + ',' +
           std::to_string(c.repetitions) + ',' + format_double(c.mean_seconds) + ',' +
           format_double(c.max_seconds) + '\n';
  }
  return out;
}

}  // namespace ews
