#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ews/bench.hpp"
#include "ews/scenario.hpp"
#include "ews/simulation.hpp"
#include "ews/stream.hpp"
#include "ews/trace_io.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kSynthesis = 3, kRuntime = 4, kSource = 5 };

int cmd_design(const std::string& config_path, const std::string& out_path) {
  const ews::ScenarioConfig cfg = ews::load_config(config_path);
  ews::Design d;
  try {
    d = ews::run_design(cfg);
  } catch (const ews::ConfigError&) {
    throw;
  } catch (const ews::Error& e) {
    std::cerr << "design failed: " << e.what() << '\n';
    return kSynthesis;
  }
  ews::write_artifact(d, out_path);
  std::printf("artifact     %s\n", out_path.c_str());
  std::printf("digest       %s\n", d.digest.c_str());
  std::printf("n m p        %d %d %d\n", d.model.n(), d.model.m(), d.model.p());
  std::printf("tau          %.10g  (beta %.4g, dof %d)\n", d.detector.tau, d.detector.beta, d.detector.dof);
  std::printf("w_bar        %.10g  (p %.4g)\n", d.noise.w_bar, d.noise.p);
  std::printf("log det Pi   %.10g\n", d.reach.log_det);
  std::printf("weights      a=%.6g b1=%.6g b2=%.6g\n", d.reach.a, d.reach.b1, d.reach.b2);
  std::printf("residual     %.3g\n", d.reach.residual);
  return kOk;
}

struct SimulateArgs {
  std::string config;
  std::string artifact;
  std::optional<long> steps;
  std::optional<std::uint64_t> seed;
  bool no_attack = false;
  std::string trace;
  std::string records;
  std::string plots;
};

std::string svg_path_for(const std::string& trace) {
  const auto dot = trace.find_last_of('.');
  const auto slash = trace.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return trace + ".svg";
  return trace.substr(0, dot) + ".svg";
}

int cmd_simulate(const SimulateArgs& args) {
  ews::ScenarioConfig cfg = ews::load_config(args.config);
  const ews::Design d = ews::read_artifact(args.artifact);
  if (d.digest != cfg.digest) {
    throw ews::ConfigError("digest", "artifact digest " + d.digest + " does not match config digest " +
                                         cfg.digest + "; rerun design");
  }
  if (args.steps) cfg.steps = *args.steps;
  if (args.seed) cfg.seed = *args.seed;
  if (cfg.steps < 0) throw ews::ConfigError("run.steps", "must be non-negative");
  if (args.no_attack) cfg.attack.reset();
  const std::string trace_path = args.trace.empty() ? cfg.trace_path : args.trace;
  const std::string records_path = args.records.empty() ? cfg.records_path : args.records;
  std::string plot_path = args.plots;
  if (plot_path.empty() && cfg.plots) plot_path = svg_path_for(trace_path.empty() ? "trace.csv" : trace_path);

  std::optional<ews::AttackRuntime> attack;
  if (cfg.attack) {
    try {
      attack.emplace(*cfg.attack, d.model, d.ctrl, d.kalman.sigma_r, d.detector.beta,
                     ews::attack_seed(cfg.seed));
    } catch (const ews::Error& e) {
      throw ews::ConfigError("attack", e.what());
    }
  }

  std::ofstream trace_out;
  std::ofstream records_out;
  if (!trace_path.empty()) {
    trace_out.open(trace_path);
    if (!trace_out) throw ews::ConfigError("output.trace", "cannot write '" + trace_path + "'");
    trace_out << ews::csv_header(d.model.n(), d.model.m(), d.model.p()) << '\n';
  }
  if (!records_path.empty()) {
    records_out.open(records_path);
    if (!records_out) throw ews::ConfigError("output.records", "cannot write '" + records_path + "'");
  }

  ews::PlotSeries plot;
  plot.tau = d.detector.tau;
  // Guides only for constraints on the first measured output.
  const ews::Vector c0 = d.model.C().row(0).transpose();
  for (const auto& h : d.ews.su) {
    if (h.normal.isApprox(c0)) plot.bounds.push_back(h.bound);
    if (h.normal.isApprox(-c0)) plot.bounds.push_back(-h.bound);
  }

  long alarms = 0;
  long relaxed = 0;
  long lows = 0;
  long highs = 0;
  std::optional<long> first_low, first_high, first_unsafe;
  ews::SimOptions opts;
  opts.keep_records = false;
  if (cfg.x0) {
    auto [x_eq, st_eq] = ews::equilibrium(d.model, d.ctrl, 0);
    opts.init = ews::SimInit{*cfg.x0, *cfg.x0, st_eq};
  }
  opts.on_record = [&](const ews::SimRecord& rec) {
    if (trace_out.is_open()) trace_out << ews::csv_row(rec, d.model.dt()) << '\n';
    if (records_out.is_open()) records_out << ews::stream_record_line(rec) << '\n';
    if (!plot_path.empty()) ews::add_plot_point(plot, rec, d.model.dt());
    alarms += rec.alarm;
    relaxed += rec.relaxed;
    if (rec.warning == ews::WarningLevel::Low) ++lows;
    if (rec.warning == ews::WarningLevel::High) ++highs;
    if (rec.warning >= ews::WarningLevel::Low && !first_low) first_low = rec.k;
    if (rec.warning == ews::WarningLevel::High && !first_high) first_high = rec.k;
    if (!first_unsafe && ews::check_unsafe(rec.x, d.ews.su).unsafe) first_unsafe = rec.k;
  };

  try {
    ews::simulate_closed_loop(d.model, d.ctrl, d.kalman, d.detector, attack ? &*attack : nullptr,
                              &d.ews, cfg.steps, cfg.seed, opts);
  } catch (const ews::SimulationError& e) {
    std::cerr << "simulation failed at " << e.what() << '\n';
    return kRuntime;
  }
  if (!plot_path.empty()) {
    std::ofstream svg(plot_path);
    if (!svg) throw ews::ConfigError("output.plots", "cannot write '" + plot_path + "'");
    svg << ews::render_svg(plot);
  }

  auto opt = [](const std::optional<long>& v) { return v ? std::to_string(*v) : std::string("-"); };
  std::printf("steps          %ld\n", cfg.steps);
  std::printf("seed           %llu (%s)\n", static_cast<unsigned long long>(cfg.seed),
              ews::NoiseSource::algorithm());
  std::printf("attack         %s\n", cfg.attack ? "on" : "off");
  std::printf("alarms         %ld (rate %.5f)\n", alarms,
              cfg.steps > 0 ? static_cast<double>(alarms) / cfg.steps : 0.0);
  if (attack) std::printf("budget steps   %ld\n", relaxed);
  std::printf("warning steps  low %ld, high %ld\n", lows, highs);
  std::printf("first low      %s\n", opt(first_low).c_str());
  std::printf("first high     %s\n", opt(first_high).c_str());
  std::printf("first unsafe   %s\n", opt(first_unsafe).c_str());
  if (!trace_path.empty()) std::printf("trace          %s\n", trace_path.c_str());
  if (!records_path.empty()) std::printf("records        %s\n", records_path.c_str());
  if (!plot_path.empty()) std::printf("plots          %s\n", plot_path.c_str());
  return kOk;
}

int cmd_monitor(const std::string& artifact, const std::string& listen, bool coalesce, std::size_t queue) {
  const ews::Design d = ews::read_artifact(artifact);
  ews::MonitorOptions opts;
  opts.coalesce = coalesce;
  opts.queue_capacity = queue;
  std::ios::sync_with_stdio(false);
  if (listen.empty()) return ews::run_monitor_stdin(d, std::cin, std::cout, std::cerr, opts);
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw ews::ConfigError("--listen", "expected host:port");
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw ews::ConfigError("--listen", "port must lie in [0, 65535]");
  return ews::run_monitor_tcp(d, listen.substr(0, colon), static_cast<unsigned short>(port), std::cout,
                              std::cerr, opts);
}

int cmd_bench(const std::string& artifact, const std::vector<int>& counts, const std::vector<int>& horizons,
              int reps, const std::string& out_path) {
  const ews::Design d = ews::read_artifact(artifact);
  const auto cells = ews::run_bench(d, counts, horizons, reps);
  const std::string csv = ews::bench_csv(cells);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path);
    if (!out) throw ews::ConfigError("--output", "cannot write '" + out_path + "'");
    out << csv;
  }
  return kOk;
}

int cmd_preset(const std::string& name, const std::string& out_path) {
  const std::string text = ews::builtin_preset(name).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw ews::ConfigError("--output", "cannot write '" + out_path + "'");
    out << text;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-warning monitor for stealthy sensor attacks on LTI control loops"};
  app.require_subcommand(1);

  std::string design_config, design_out = "design.json";
  auto* design = app.add_subcommand("design", "Synthesise the offline design artifact");
  design->add_option("config", design_config, "Scenario config (JSON)")->required();
  design->add_option("-o,--output", design_out, "Artifact path");

  SimulateArgs sim;
  long sim_steps = 0;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run the closed loop with the monitor attached");
  simulate->add_option("config", sim.config, "Scenario config (JSON)")->required();
  simulate->add_option("-a,--artifact", sim.artifact, "Design artifact")->required();
  auto* steps_opt = simulate->add_option("--steps", sim_steps, "Override run.steps");
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "Override run.seed");
  simulate->add_flag("--no-attack", sim.no_attack, "Ignore the attack section");
  simulate->add_option("--trace", sim.trace, "CSV trace path (overrides output.trace)");
  simulate->add_option("--records", sim.records, "Write estimator/controller stream records (JSONL)");
  simulate->add_option("--plots", sim.plots, "Write the four-panel SVG to this path");

  std::string mon_artifact, mon_listen;
  bool mon_coalesce = false;
  std::size_t mon_queue = 1024;
  auto* monitor = app.add_subcommand("monitor", "Evaluate stream records from stdin or TCP");
  monitor->add_option("artifact", mon_artifact, "Design artifact")->required();
  monitor->add_option("--listen", mon_listen, "Accept one TCP connection on host:port");
  monitor->add_flag("--coalesce", mon_coalesce, "Evaluate only the newest queued record");
  monitor->add_option("--queue", mon_queue, "Queue capacity")->check(CLI::PositiveNumber);

  std::string bench_artifact, bench_out;
  std::vector<int> bench_counts{5, 10, 20, 40};
  std::vector<int> bench_horizons{250, 500, 1000};
  int bench_reps = 50;
  auto* bench = app.add_subcommand("bench", "Time the full-horizon evaluation");
  bench->add_option("artifact", bench_artifact, "Design artifact")->required();
  bench->add_option("--constraints", bench_counts, "Constraint counts")->delimiter(',');
  bench->add_option("--horizons", bench_horizons, "Horizons K")->delimiter(',');
  bench->add_option("--reps", bench_reps, "Repetitions per cell")->check(CLI::PositiveNumber);
  bench->add_option("-o,--output", bench_out, "CSV path (default stdout)");

  std::string preset_name, preset_out;
  auto* preset = app.add_subcommand("preset", "Print a builtin scenario config");
  preset->add_option("name", preset_name, "reactor or random-<n>")->required();
  preset->add_option("-o,--output", preset_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*design) return cmd_design(design_config, design_out);
    if (*simulate) {
      if (*steps_opt) sim.steps = sim_steps;
      if (*seed_opt) sim.seed = sim_seed;
      return cmd_simulate(sim);
    }
    if (*monitor) return cmd_monitor(mon_artifact, mon_listen, mon_coalesce, mon_queue);
    if (*bench) return cmd_bench(bench_artifact, bench_counts, bench_horizons, bench_reps, bench_out);
    if (*preset) return cmd_preset(preset_name, preset_out);
  } catch (const ews::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const ews::SynthesisError& e) {
    std::cerr << "synthesis failed: " << e.what() << '\n';
    return kSynthesis;
  } catch (const ews::SimulationError& e) {
    std::cerr << "simulation failed at " << e.what() << '\n';
    return kRuntime;
  } catch (const ews::SourceError& e) {
    std::cerr << "source failed: " << e.what() << '\n';
    return kSource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
