#include "qduff/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>

#include "qduff/classical.hpp"
#include "qduff/config.hpp"
#include "qduff/ensemble.hpp"
#include "qduff/io.hpp"
#include "qduff/simulate.hpp"
#include "qduff/sweep.hpp"

namespace qduff {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kUsage =
    "usage: qduff <subcommand> [options]\n"
    "\n"
    "subcommands:\n"
    "  simulate        one monitored trajectory: series, homodyne record, snapshots\n"
    "  lyapunov-sweep  twin-trajectory Lyapunov exponents over beta x strategy x seed\n"
    "  classical       classical Duffing integration, Poincare section, lambda_cl\n"
    "  wigner          render a stored state or density matrix on a (q, p) grid\n"
    "\n"
    "run 'qduff <subcommand> --help' for the options of a subcommand\n";

/// Flags shared by simulate and lyapunov-sweep; unset ones leave the config alone.
struct Overrides {
  std::string config;
  std::string out;
  std::optional<int> seeds;
  std::optional<std::uint64_t> master_seed;
  std::optional<double> t_end;
  std::vector<double> betas;
  std::vector<std::string> strategies;
  std::string scheme;
  std::optional<double> dt;
  std::optional<int> update_interval;
  std::optional<int> workers;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "YAML config file");
    app.add_option("--out", out, "output directory");
    app.add_option("--seeds", seeds, "number of noise realizations");
    app.add_option("--master-seed", master_seed, "master seed for derived job seeds");
    app.add_option("--t-end", t_end, "total time in units of 1/Omega");
    app.add_option("--beta", betas, "beta values")->delimiter(',');
    app.add_option("--strategy", strategies,
                   "fixed:ANGLE | adaptive-parallel | adaptive-perpendicular")
        ->delimiter(',');
    app.add_option("--scheme", scheme, "ito | stratonovich");
    app.add_option("--dt", dt, "integration step");
    app.add_option("--update-interval", update_interval, "steps between controller updates");
    app.add_option("--workers", workers, "worker threads (default: $QDUFF_WORKERS or all cores)");
  }

  ExperimentConfig apply() const {
    ExperimentConfig c = config.empty() ? parse_config("") : load_config(config);
    if (!out.empty()) c.output_dir = out;
    if (seeds) c.seeds = *seeds;
    if (master_seed) c.master_seed = *master_seed;
    if (t_end) c.t_end = *t_end;
    if (!betas.empty()) {
      c.betas = betas;
      c.params.beta = betas.front();
    }
    if (!strategies.empty()) c.strategies = strategies;
    if (!scheme.empty()) c.params.scheme = parse_scheme(scheme);
    if (dt) c.params.dt = *dt;
    if (update_interval) c.update_interval = *update_interval;
    if (workers) {
      if (*workers < 0) throw ConfigError("--workers: must be >= 0");
      c.workers = static_cast<unsigned>(*workers);
    }
    c.validate();
    return c;
  }
};

int run_simulate(const Overrides& o, long series_stride, bool peaks, std::ostream& out) {
  ExperimentConfig c = o.apply();
  if (!o.t_end && o.config.empty()) c.t_end = 10.0;
  if (c.strategies.size() != 1 && o.strategies.empty()) c.strategies = {"fixed:0"};
  if (c.strategies.size() != 1) throw ConfigError("--strategy: simulate takes a single strategy");
  c.validate();

  const auto start = std::chrono::steady_clock::now();
  SimParams params = c.params;
  params.beta = c.betas.front();
  const ControlStrategy strategy = configured_strategy(c, c.strategies.front());
  const std::uint64_t seed = derive_seed(c.master_seed, 0);
  SimulateOptions opts;
  opts.t_end = c.t_end;
  opts.series_stride = series_stride;
  opts.snapshot_times = c.snapshot_times();
  opts.record_peaks = peaks;
  const SimulateResult res = simulate_trajectory(params, strategy, seed, opts);

  const fs::path dir(c.output_dir);
  std::vector<std::string> files;
  {
    CsvWriter w(dir / "series.csv", {"t", "Q", "P", "phi", "tail"});
    for (const auto& r : res.series) {
      w << r.t << r.q << r.p << r.phi << r.tail;
      w.end_row();
    }
    w.close();
    files.push_back("series.csv");
  }
  {
    CsvWriter w(dir / "homodyne.csv", {"t", "phi", "I_dt"});
    for (std::size_t k = 0; k < res.homodyne.increments.size(); ++k) {
      w << static_cast<double>(k) * params.dt << res.phases[k] << res.homodyne.increments[k];
      w.end_row();
    }
    w.close();
    files.push_back("homodyne.csv");
  }
  if (peaks) {
    std::vector<std::string> header{"step", "theta_max"};
    for (int k = 0; k < strategy.grid_angles; ++k) header.push_back("count_" + std::to_string(k));
    CsvWriter w(dir / "peaks.csv", header);
    for (const auto& r : res.peaks) {
      w << r.step << r.theta_max;
      for (int n : r.counts) w << n;
      w.end_row();
    }
    w.close();
    files.push_back("peaks.csv");
  }
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    char name[48];
    std::snprintf(name, sizeof(name), "snapshots/state_%04zu.json", k);
    write_state_json(dir / name, res.snapshots[k].state, res.snapshots[k].t);
    files.push_back(name);
  }
  files.push_back("manifest.json");

  json m;
  m["version"] = kVersion;
  m["command"] = "simulate";
  m["config"] = json::parse(config_json(c));
  m["strategy"] = strategy_label(strategy);
  m["seed"] = seed;
  m["ok"] = res.ok;
  if (!res.ok) m["error"] = res.error;
  m["max_tail"] = res.max_tail;
  m["tail_warnings"] = res.tail_warnings;
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m["files"] = files;
  write_text(dir / "manifest.json", m.dump(2) + "\n");

  const PhasePoint f = centroid(res.final_state);
  out << "t_end=" << c.t_end << " Q=" << f.q << " P=" << f.p << " max_tail=" << res.max_tail
      << (res.ok ? "" : " ABORTED: " + res.error) << "\n";
  return res.ok ? 0 : 1;
}

int run_sweep_command(const Overrides& o, std::ostream& out) {
  const ExperimentConfig c = o.apply();
  const RunManifest m = run_sweep(c, &out);
  for (const auto& row : m.summary) {
    out << "beta=" << row.beta << " " << row.strategy << " lambda=" << row.estimate.mean
        << " two_se=" << row.estimate.two_se << " n=" << row.estimate.per_seed_lambda.size()
        << (row.estimate.partial ? " (partial)" : "") << "\n";
  }
  return m.partial ? 1 : 0;
}

struct ClassicalArgs {
  std::string out = "classical_out";
  double beta = 0.3;
  double Gamma = 0.10;
  double g = 0.3;
  double Omega = 1.0;
  long periods = 5000;
  long transient = 200;
  double x0 = 0.0;
  double v0 = 0.0;
};

int run_classical(const ClassicalArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ClassicalParams p{a.Gamma, a.g, a.Omega, a.beta};
  p.validate();
  ClassicalState s0{a.x0 == 0.0 && a.v0 == 0.0 ? 1.0 / a.beta : a.x0, a.v0, 0.0};
  const auto points = poincare_section(s0, p, a.periods, a.transient);
  ClassicalLyapunovOptions lo;
  lo.transient_periods = a.transient;
  lo.start = s0;
  const double lambda = classical_lyapunov(p, a.periods * p.drive_period(), lo);

  const fs::path dir(a.out);
  CsvWriter w(dir / "poincare.csv", {"X", "P"});
  for (const auto& pt : points) {
    w << pt.X << pt.P;
    w.end_row();
  }
  w.close();
  json m;
  m["version"] = kVersion;
  m["command"] = "classical";
  m["params"] = {{"beta", a.beta}, {"Gamma", a.Gamma}, {"g", a.g}, {"Omega", a.Omega},
                 {"periods", a.periods}, {"transient", a.transient}};
  m["lambda_cl"] = lambda;
  m["poincare_points"] = points.size();
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m["files"] = {"poincare.csv", "manifest.json"};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  out << "lambda_cl=" << format_double(lambda) << " poincare_points=" << points.size() << "\n";
  return 0;
}

struct WignerArgs {
  std::string input;
  std::string out = "wigner.csv";
  std::vector<double> q_range{-8.0, 8.0};
  std::vector<double> p_range{-8.0, 8.0};
  int points = 201;
};

int run_wigner(const WignerArgs& a, std::ostream& out) {
  if (a.q_range.size() != 2 || a.p_range.size() != 2) {
    throw ConfigError("--q-range/--p-range: expected MIN,MAX");
  }
  if (a.points < 3) throw ConfigError("--points: must be >= 3");
  const Eigen::MatrixXcd rho = read_density_json(a.input);
  const GridAxis q{a.q_range[0], a.q_range[1], a.points};
  const GridAxis p{a.p_range[0], a.p_range[1], a.points};
  const Eigen::MatrixXd w = wigner(rho, Eigen::VectorXd(q.points()), Eigen::VectorXd(p.points()));
  write_grid_csv(a.out, w, q, p);
  const double cell = (q.max - q.min) / (q.count - 1) * (p.max - p.min) / (p.count - 1);
  out << "wrote " << a.out << " (integral " << w.sum() * cell << ")\n";
  return 0;
}

bool known_subcommand(std::string_view s) {
  return s == "simulate" || s == "lyapunov-sweep" || s == "classical" || s == "wigner";
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc < 2) {
    err << kUsage;
    return 2;
  }
  const std::string_view first = argv[1];
  if (first == "-h" || first == "--help") {
    out << kUsage;
    return 0;
  }
  if (!known_subcommand(first)) {
    err << "unknown subcommand '" << first << "'\n\n" << kUsage;
    return 2;
  }

  CLI::App app{"quantum Duffing trajectories with adaptive homodyne control", "qduff"};
  app.require_subcommand(1);

  Overrides sim_o;
  long series_stride = 10;
  bool peaks = false;
  auto* sim = app.add_subcommand("simulate", "one monitored trajectory");
  sim_o.attach(*sim);
  sim->add_option("--series-stride", series_stride, "steps between series rows");
  sim->add_flag("--peaks", peaks, "write the peak-count vector of every controller update");

  Overrides sweep_o;
  auto* sweep = app.add_subcommand("lyapunov-sweep", "Lyapunov exponents over a parameter sweep");
  sweep_o.attach(*sweep);

  ClassicalArgs ca;
  auto* cl = app.add_subcommand("classical", "classical Duffing baseline");
  cl->add_option("--out", ca.out, "output directory");
  cl->add_option("--beta", ca.beta, "scale parameter (only rescales the output)");
  cl->add_option("--gamma", ca.Gamma, "damping");
  cl->add_option("--g", ca.g, "drive amplitude");
  cl->add_option("--omega", ca.Omega, "drive frequency");
  cl->add_option("--periods", ca.periods, "drive periods to integrate");
  cl->add_option("--transient", ca.transient, "discarded drive periods");
  cl->add_option("--x0", ca.x0, "initial position (default: well minimum 1/beta)");
  cl->add_option("--v0", ca.v0, "initial velocity");

  WignerArgs wa;
  auto* wg = app.add_subcommand("wigner", "Wigner function of a stored state");
  wg->add_option("--input", wa.input, "state or density-matrix JSON")->required();
  wg->add_option("--out", wa.out, "output CSV");
  wg->add_option("--q-range", wa.q_range, "MIN,MAX")->delimiter(',');
  wg->add_option("--p-range", wa.p_range, "MIN,MAX")->delimiter(',');
  wg->add_option("--points", wa.points, "grid points per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*sim) return run_simulate(sim_o, series_stride, peaks, out);
    if (*sweep) return run_sweep_command(sweep_o, out);
    if (*cl) return run_classical(ca, out);
    if (*wg) return run_wigner(wa, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << kUsage;
  return 2;
}

}  // namespace qduff
