#include "qduff/sweep.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <mutex>
#include <ostream>

#include "qduff/io.hpp"
#include "qduff/parallel.hpp"

namespace qduff {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string strategy_slug(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    if (c == ':' || c == '/' || c == ' ') c = '_';
  }
  return out;
}

namespace {

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"beta", c.params.beta}, {"Gamma", c.params.Gamma}, {"g", c.params.g},
                {"Omega", c.params.Omega}};
  json integ = {{"N", c.params.N}, {"dt", c.params.dt}, {"scheme", to_string(c.params.scheme)}};
  integ["signal_gain"] = c.params.homodyne_gain();
  j["integration"] = std::move(integ);
  j["control"] = {{"update_interval", c.update_interval},
                  {"grid_angles_parallel", c.grid_angles_parallel},
                  {"grid_angles_perpendicular", c.grid_angles_perpendicular},
                  {"peak_floor", c.peak_floor}};
  j["lyapunov"] = {{"d0", c.params.d0}, {"reset_period", c.reset_period},
                   {"transient", c.transient}};
  j["sweep"] = {{"beta", c.betas},   {"strategy", c.strategies}, {"seeds", c.seeds},
                {"master_seed", c.master_seed}, {"t_end", c.t_end}};
  j["output"] = {{"dir", c.output_dir}, {"series_stride", c.series_stride}};
  return j;
}

std::string job_stem(const JobRecord& job) {
  char idx[16];
  std::snprintf(idx, sizeof(idx), "%02d", job.seed_index);
  return "beta" + format_double(job.beta) + "_" + strategy_slug(job.strategy) + "_s" + idx;
}

}  // namespace

std::string config_json(const ExperimentConfig& config) { return config_to_json(config).dump(2); }

std::string summary_json(const ExperimentConfig& config, const std::vector<SummaryRow>& rows) {
  json j;
  j["t_end"] = config.t_end;
  j["master_seed"] = config.master_seed;
  json table = json::array();
  for (const auto& r : rows) {
    json row;
    row["beta"] = r.beta;
    row["strategy"] = r.strategy;
    row["lambda"] = r.estimate.mean;
    row["two_se"] = r.estimate.two_se;
    row["n_seeds"] = r.estimate.per_seed_lambda.size();
    row["t_end"] = config.t_end;
    row["partial"] = r.estimate.partial;
    table.push_back(std::move(row));
  }
  j["rows"] = std::move(table);
  return j.dump(2) + "\n";
}

RunManifest run_sweep(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir / "jobs");

  RunManifest manifest;
  for (double beta : config.betas) {
    for (const auto& label : config.strategies) {
      for (int k = 0; k < config.seeds; ++k) {
        JobRecord job;
        job.index = manifest.jobs.size();
        job.beta = beta;
        job.strategy = label;
        job.seed_index = k;
        job.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(k));
        manifest.jobs.push_back(std::move(job));
      }
    }
  }

  TwinOptions options;
  options.t_end = config.t_end;
  options.reset_period = config.reset_period;
  options.transient = config.transient;
  options.series_stride = config.series_stride;
  options.peak_floor = config.peak_floor;

  std::mutex log_mutex;
  parallel_for_index(manifest.jobs.size(), resolve_workers(config.workers), [&](std::size_t i) {
    JobRecord& job = manifest.jobs[i];
    SimParams params = config.params;
    params.beta = job.beta;
    const auto t0 = std::chrono::steady_clock::now();
    job.run = run_twin(params, configured_strategy(config, job.strategy), job.seed, options);
    job.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) {
      std::lock_guard lock(log_mutex);
      *log << "job " << i + 1 << "/" << manifest.jobs.size() << " beta=" << job.beta << " "
           << job.strategy << " seed#" << job.seed_index << ": "
           << (job.run.ok ? "lambda=" + format_double(job.run.lambda) : job.run.error) << " ("
           << job.wall_seconds << " s)\n";
    }
  });

  // single committer: every file is written here, in job order
  auto add_file = [&](const fs::path& rel) { manifest.files.push_back(rel.generic_string()); };
  for (const auto& job : manifest.jobs) {
    const std::string stem = job_stem(job);
    const fs::path rel = fs::path("jobs") / (stem + ".csv");
    CsvWriter w(out_dir / rel, {"window", "t_end", "log_ratio"});
    const long first = job.run.transient_windows;
    for (std::size_t n = 0; n < job.run.window_logs.size(); ++n) {
      w << static_cast<long>(n) << (first + static_cast<long>(n) + 1) * job.run.window_duration
        << job.run.window_logs[n];
      w.end_row();
    }
    w.close();
    add_file(rel);
    if (!job.run.series.empty()) {
      const fs::path srel = fs::path("jobs") / (stem + "_series.csv");
      CsvWriter s(out_dir / srel, {"t", "Q", "P", "d", "phi"});
      for (const auto& row : job.run.series) {
        s << row.t << row.q << row.p << row.d << row.phi;
        s.end_row();
      }
      s.close();
      add_file(srel);
    }
    if (!job.run.ok) {
      manifest.partial = true;
      manifest.warnings.push_back(stem + ": " + job.run.error);
    }
    if (job.run.tail_warnings > 0) {
      manifest.warnings.push_back(stem + ": tail weight above 1e-4 on " +
                                  std::to_string(job.run.tail_warnings) + " steps (max " +
                                  format_double(job.run.max_tail) + ")");
    }
  }

  {
    CsvWriter w(out_dir / "lambda_per_seed.csv",
                {"beta", "strategy", "seed_index", "seed", "ok", "lambda", "t_elapsed", "max_tail"});
    for (const auto& job : manifest.jobs) {
      w << job.beta << job.strategy << job.seed_index << static_cast<unsigned long>(job.seed)
        << (job.run.ok ? 1L : 0L) << job.run.lambda << job.run.t_elapsed << job.run.max_tail;
      w.end_row();
    }
    w.close();
    add_file("lambda_per_seed.csv");
  }

  // summary rows in (beta, strategy) order over surviving seeds
  std::size_t j = 0;
  for (double beta : config.betas) {
    for (const auto& label : config.strategies) {
      std::vector<double> good;
      std::vector<std::string> failures;
      for (int k = 0; k < config.seeds; ++k, ++j) {
        const auto& job = manifest.jobs[j];
        if (job.run.ok) {
          good.push_back(job.run.lambda);
        } else {
          failures.push_back("seed " + std::to_string(job.seed) + ": " + job.run.error);
        }
      }
      SummaryRow row{beta, label, summarize_lambdas(good)};
      row.estimate.partial = !failures.empty();
      row.estimate.failures = std::move(failures);
      manifest.summary.push_back(std::move(row));
    }
  }
  write_text(out_dir / "summary.json", summary_json(config, manifest.summary));
  add_file("summary.json");
  add_file("manifest.json");

  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json m;
  m["version"] = kVersion;
  m["config"] = config_to_json(config);
  m["workers"] = resolve_workers(config.workers);
  m["wall_seconds"] = manifest.wall_seconds;
  m["partial"] = manifest.partial;
  json jobs = json::array();
  for (const auto& job : manifest.jobs) {
    json r;
    r["index"] = job.index;
    r["beta"] = job.beta;
    r["strategy"] = job.strategy;
    r["seed_index"] = job.seed_index;
    r["seed"] = job.seed;
    r["ok"] = job.run.ok;
    if (!job.run.ok) r["error"] = job.run.error;
    r["lambda"] = job.run.lambda;
    r["max_tail"] = job.run.max_tail;
    r["tail_warnings"] = job.run.tail_warnings;
    r["wall_seconds"] = job.wall_seconds;
    r["file"] = "jobs/" + job_stem(job) + ".csv";
    jobs.push_back(std::move(r));
  }
  m["jobs"] = std::move(jobs);
  m["warnings"] = manifest.warnings;
  m["files"] = manifest.files;
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
  return manifest;
}

}  // namespace qduff
