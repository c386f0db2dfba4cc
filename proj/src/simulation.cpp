#include "ews/simulation.hpp"

namespace ews {

std::uint64_t attack_seed(std::uint64_t seed) {
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SimTrace simulate_closed_loop(const LtiModel& model, const Controller& ctrl,
                              const KalmanDesign& design, const DetectorConfig& detector,
                              AttackRuntime* attack, const EwsConfig* ews, Step steps,
                              std::uint64_t seed, const SimOptions& opts) {
  if (steps < 0) throw InvariantError("steps must be non-negative");
  require_shape(design.L, model.n(), model.m(), "L");
  require_shape(design.sigma_r, model.m(), model.m(), "sigma_r");
  if (detector.dof != model.m()) throw DimensionError("detector dof must equal m");
  if (ews) ews->validate(model.n());

  SimTrace trace;
  trace.seed = seed;
  trace.rng_algorithm = NoiseSource::algorithm();
  trace.dt = model.dt();
  if (opts.keep_records) trace.records.reserve(static_cast<size_t>(steps));

  NoiseSource noise(seed);
  Vector x;
  Vector x_hat;
  ControllerState st;
  if (opts.init) {
    x = opts.init->x;
    x_hat = opts.init->x_hat;
    st = opts.init->ctrl_state;
  } else {
    auto [x0, st0] = equilibrium(model, ctrl, 0);
    x = x0;
    x_hat = x0;
    st = st0;
  }
  require_size(x, model.n(), "initial x");
  require_size(x_hat, model.n(), "initial x_hat");

  const auto sigma_llt = design.sigma_r.llt();
  for (Step k = 0; k < steps; ++k) {
    try {
      SimRecord rec;
      rec.k = k;
      rec.x = x;
      rec.x_hat = x_hat;
      rec.integrator = st.integrator;
      rec.y = measure(model, x, noise);
      const Vector y_hat = model.C() * x_hat;
      rec.ybar = rec.y;
      if (attack) {
        rec.ybar += attack->bias(k, rec.y, y_hat, detector.tau);
        rec.relaxed = attack->relaxed_last();
      }
      const Vector r = rec.ybar - y_hat;
      rec.z = r.dot(sigma_llt.solve(r));
      rec.alarm = alarm(rec.z, detector.tau);
      if (ews) {
        const SuspicionReport rep = suspicion_step(*ews, model, ctrl, x_hat, st, k);
        rec.l_hat = rep.l_hat;
        rec.feas = rep.feas;
        rec.prox = rep.prox;
        rec.susp = rep.susp;
        rec.warning = rep.warning;
      }
      ControlStep cs = control_output(ctrl, st, rec.ybar, k);
      rec.u = cs.u;
      x = advance(model, x, cs.u, noise);
      x_hat = predictor_update(design, model, x_hat, cs.u, r);
      st = std::move(cs.next);
      if (!x.allFinite() || !x_hat.allFinite() || !std::isfinite(rec.z)) {
        throw NumericError("state became non-finite");
      }
      if (opts.on_record) opts.on_record(rec);
      if (opts.keep_records) trace.records.push_back(std::move(rec));
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(k, e.what());
    }
  }
  return trace;
}

}  // namespace ews
