// Command-line front end: sequential calibration designs against an
// in-process worker pool, the Monte Carlo performance model, and report
// generation over the trace files both produce.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "seqcal/config.hpp"
#include "seqcal/csv.hpp"
#include "seqcal/engine.hpp"
#include "seqcal/metrics.hpp"
#include "seqcal/perf.hpp"

namespace {

using namespace seqcal;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string default_out_root() {
  if (const char* env = std::getenv("SEQCAL_OUT")) return env;
  return "out";
}

// Runs tasks on up to `jobs` threads; returns messages of the ones that threw.
std::vector<std::string> run_tasks(const std::vector<std::function<void()>>& tasks, int jobs) {
  std::vector<std::string> errors;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), tasks.size());
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t i = 0; i < threads; ++i) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t index = next.fetch_add(1);
        if (index >= tasks.size()) return;
        try {
          tasks[index]();
        } catch (const std::exception& e) {
          std::lock_guard lock(mu);
          errors.emplace_back(e.what());
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  return errors;
}

std::string join_messages(const std::vector<std::string>& messages) {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += "; ";
    out += m;
  }
  return out;
}

int cmd_design(const DesignConfig& cfg, int jobs_limit) {
  const fs::path out_dir = cfg.out;
  const CalibrationProblem problem = make_problem(cfg);
  make_engine_config(cfg, 1).validate();  // fail fast, before any artifact is written

  RunManifest manifest;
  manifest.command = "design";
  manifest.config = design_to_json(cfg);
  manifest.started = iso_timestamp_now();
  write_manifest(manifest, out_dir / "manifest.json");

  std::vector<DesignTrace> traces(static_cast<std::size_t>(cfg.replicates));
  std::vector<std::function<void()>> tasks;
  std::mutex print_mu;
  for (int r = 1; r <= cfg.replicates; ++r) {
    tasks.push_back([&cfg, &problem, &traces, &print_mu, out_dir, r] {
      const EngineConfig engine = make_engine_config(cfg, r);
      DesignTrace trace = run_design(problem, engine);
      write_design_trace(trace, out_dir / ("replicate-" + std::to_string(r)));
      std::lock_guard lock(print_mu);
      if (trace.complete) {
        std::cout << "replicate " << r << ": " << trace.stages.size() << " stages, final delta "
                  << (trace.stages.empty() ? "n/a" : format_double(trace.stages.back().delta_t))
                  << "\n";
      } else {
        std::cout << "replicate " << r << ": FAILED (" << trace.error << ")\n";
      }
      traces[static_cast<std::size_t>(r - 1)] = std::move(trace);
    });
  }
  const std::vector<std::string> errors = run_tasks(tasks, jobs_limit);

  std::vector<std::string> failures = errors;
  for (const auto& trace : traces) {
    if (!trace.complete && !trace.error.empty()) failures.push_back(trace.error);
    else if (!trace.complete && errors.empty()) failures.emplace_back("replicate incomplete");
  }

  for (int r = 1; r <= cfg.replicates; ++r) {
    manifest.artifacts.push_back("replicate-" + std::to_string(r) + "/jobs.csv");
    manifest.artifacts.push_back("replicate-" + std::to_string(r) + "/stages.csv");
  }
  manifest.finished = iso_timestamp_now();
  manifest.status = failures.empty() ? "ok" : "error";
  manifest.error = join_messages(failures);
  write_manifest(manifest, out_dir / "manifest.json");
  if (!failures.empty()) {
    std::cerr << "design failed: " << manifest.error << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_perf(const PerfConfig& cfg, int jobs_limit) {
  const fs::path out_dir = cfg.out;
  if (cfg.acq_label.find_first_of(", \t") != std::string::npos)
    throw ConfigError("acq_label must not contain spaces or commas");

  struct Cell {
    int b = 0, w = 0;
    PerfScenario scenario;
  };
  std::vector<Cell> cells;
  for (const int b : cfg.batch_sizes) {
    for (const int w : cfg.worker_counts) {
      if (b > w) {
        std::cerr << "skipping b=" << b << " w=" << w << " (batch exceeds workers)\n";
        continue;
      }
      cells.push_back({b, w, make_scenario(cfg, b, w)});
    }
  }
  if (cells.empty()) throw ConfigError("no feasible (b, w) cell in the grid");

  RunManifest manifest;
  manifest.command = "perf";
  manifest.config = perf_to_json(cfg);
  manifest.started = iso_timestamp_now();
  write_manifest(manifest, out_dir / "manifest.json");

  std::vector<std::function<void()>> tasks;
  std::mutex print_mu;
  for (const Cell& cell : cells) {
    tasks.push_back([&cell, out_dir, &print_mu] {
      const std::vector<PerfTrace> traces = run_scenario(cell.scenario);
      write_perf_traces(traces, cell.scenario,
                        out_dir / ("b" + std::to_string(cell.b) + "-w" + std::to_string(cell.w)));
      std::vector<double> spans;
      spans.reserve(traces.size());
      for (const auto& t : traces) spans.push_back(makespan(t));
      std::lock_guard lock(print_mu);
      std::cout << "b=" << cell.b << " w=" << cell.w << ": n_k=" << cell.scenario.stop_count
                << ", median makespan " << format_double(median(spans)) << "\n";
    });
  }
  const std::vector<std::string> errors = run_tasks(tasks, jobs_limit);

  for (const Cell& cell : cells) {
    const std::string prefix = "b" + std::to_string(cell.b) + "-w" + std::to_string(cell.w) + "/";
    manifest.artifacts.push_back(prefix + "perf_jobs.csv");
    manifest.artifacts.push_back(prefix + "perf_stages.csv");
  }
  manifest.finished = iso_timestamp_now();
  manifest.status = errors.empty() ? "ok" : "error";
  manifest.error = join_messages(errors);
  write_manifest(manifest, out_dir / "manifest.json");
  if (!errors.empty()) {
    std::cerr << "perf failed: " << manifest.error << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

bool is_design_replicate_dir(const fs::path& p) { return fs::exists(p / "jobs.csv"); }
bool is_perf_cell_dir(const fs::path& p) { return fs::exists(p / "perf_jobs.csv"); }

std::vector<fs::path> child_dirs(const fs::path& root, bool (*pred)(const fs::path&)) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && pred(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void add_design_series(const std::vector<DesignTrace>& traces, std::vector<MetricSeries>& series) {
  if (traces.empty()) return;
  const DesignTrace& first = traces.front();
  const std::string tag = first.problem + "-" + to_string(first.spec.kind) + "-b" +
                          std::to_string(first.b) + "-w" + std::to_string(first.w);
  MetricSeries delta =
      traces.size() == 1 ? delta_series(first) : aggregate_delta(traces, "delta-" + tag);
  delta.label = "delta-" + tag;
  series.push_back(std::move(delta));
  MetricSeries mad = traces.size() == 1 ? mad_series(first) : aggregate_mad(traces, "mad-" + tag);
  mad.label = "mad-" + tag;
  if (!mad.points.empty()) series.push_back(std::move(mad));
}

struct ReportState {
  std::vector<MetricSeries> series;
  std::vector<SummaryRow> summary;
  std::map<std::pair<std::size_t, std::size_t>, double> makespans;  // (w, b) -> median
};

// One perf cell: wall-clock error curve plus the summary aggregates. A stored
// empirical curve table is only recoverable through the run's manifest.
void add_perf_cell(const fs::path& dir, const std::optional<PerfConfig>& run_config,
                   ReportState& state) {
  const PerfRead data = read_perf_traces(dir);
  if (data.traces.empty()) throw std::runtime_error(dir.string() + ": no replicates");
  ProgressCurve curve = data.scenario.curve;
  if (data.curve_table_size > 0) {
    if (!run_config)
      throw ConfigError(dir.string() +
                        ": empirical curve table not stored in the CSV header; pass the run "
                        "directory containing manifest.json instead of the bare cell");
    curve = make_scenario(*run_config, static_cast<int>(data.scenario.b),
                          static_cast<int>(data.scenario.w))
                .curve;
  }
  const std::string tag = data.scenario.acq_label + "-b" + std::to_string(data.scenario.b) + "-w" +
                          std::to_string(data.scenario.w);
  state.series.push_back(wallclock_error_curve(data.traces, curve, "wallclock-" + tag));

  std::vector<double> spans, idles, hours;
  for (const auto& trace : data.traces) {
    spans.push_back(makespan(trace));
    idles.push_back(idle_time(trace, data.scenario.w));
    hours.push_back(computing_hours(trace, data.scenario.w));
  }
  SummaryRow row;
  row.b = data.scenario.b;
  row.w = data.scenario.w;
  row.acq = data.scenario.acq_label;
  row.makespan_median = median(spans);
  row.idle_avg = median(idles);
  row.compute_hours = median(hours);
  state.summary.push_back(row);
  state.makespans[{data.scenario.w, data.scenario.b}] = row.makespan_median;
}

// Reads series.csv and summary.csv beside itself and renders PNG panels.
constexpr const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Render the CSV artifacts written next to this script."""
import collections
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read_rows(name):
    path = os.path.join(HERE, name)
    if not os.path.exists(path):
        return []
    with open(path, newline="") as f:
        return [row for row in csv.DictReader(f) if row]


def plot_series():
    rows = read_rows("series.csv")
    groups = collections.defaultdict(list)
    for row in rows:
        groups[(row["x_unit"], row["y_unit"])].append(row)
    for (x_unit, y_unit), members in sorted(groups.items()):
        fig, ax = plt.subplots(figsize=(7, 5))
        by_label = collections.defaultdict(list)
        for row in members:
            by_label[row["series_label"]].append(row)
        for label, pts in sorted(by_label.items()):
            xs = [float(p["x"]) for p in pts]
            ys = [float(p["y_median"]) for p in pts]
            lo = [float(p["y_q1"]) for p in pts]
            hi = [float(p["y_q3"]) for p in pts]
            ax.plot(xs, ys, label=label)
            if any(a != b for a, b in zip(lo, hi)):
                ax.fill_between(xs, lo, hi, alpha=0.2)
        ax.set_xlabel(x_unit)
        ax.set_ylabel(y_unit)
        if y_unit == "error":
            ax.set_yscale("log")
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        name = "series_%s_%s.png" % (x_unit.replace(" ", "-"), y_unit)
        fig.tight_layout()
        fig.savefig(os.path.join(HERE, name), dpi=150)
        plt.close(fig)
        print("wrote", name)


def plot_summary():
    rows = read_rows("summary.csv")
    if not rows:
        return
    by_b = collections.defaultdict(list)
    for row in rows:
        by_b[int(row["b"])].append((int(row["w"]), float(row["speedup"])))
    fig, ax = plt.subplots(figsize=(7, 5))
    for b, pts in sorted(by_b.items()):
        pts.sort()
        ax.plot([w for w, _ in pts], [s for _, s in pts], marker="o", label="b=%d" % b)
    ax.set_xlabel("workers")
    ax.set_ylabel("speedup")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "summary_speedup.png"), dpi=150)
    plt.close(fig)
    print("wrote summary_speedup.png")


if __name__ == "__main__":
    plot_series()
    plot_summary()
)PY";

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  const fs::path out_dir = out;

  RunManifest manifest;
  manifest.command = "report";
  manifest.config = json{{"in", inputs}, {"out", out}};
  manifest.started = iso_timestamp_now();
  write_manifest(manifest, out_dir / "manifest.json");

  ReportState state;
  for (const std::string& input : inputs) {
    const fs::path path = input;
    if (!fs::exists(path)) throw ConfigError(input + " does not exist");

    if (is_design_replicate_dir(path)) {
      add_design_series({read_design_trace(path)}, state.series);
      continue;
    }
    if (is_perf_cell_dir(path)) {
      add_perf_cell(path, std::nullopt, state);
      continue;
    }

    const std::vector<fs::path> replicate_dirs = child_dirs(path, is_design_replicate_dir);
    if (!replicate_dirs.empty()) {
      std::vector<DesignTrace> traces;
      traces.reserve(replicate_dirs.size());
      for (const auto& dir : replicate_dirs) traces.push_back(read_design_trace(dir));
      std::sort(traces.begin(), traces.end(),
                [](const DesignTrace& x, const DesignTrace& y) {
                  return x.replicate_id < y.replicate_id;
                });
      add_design_series(traces, state.series);
      continue;
    }

    const std::vector<fs::path> cell_dirs = child_dirs(path, is_perf_cell_dir);
    if (!cell_dirs.empty()) {
      std::optional<PerfConfig> run_config;
      if (fs::exists(path / "manifest.json")) {
        PerfConfig cfg;
        apply_perf_json(cfg, unwrap_manifest(load_json_file(path / "manifest.json"), "perf"));
        run_config = std::move(cfg);
      }
      for (const auto& dir : cell_dirs) add_perf_cell(dir, run_config, state);
      continue;
    }
    throw ConfigError(input + " holds neither design nor perf traces");
  }

  if (!state.summary.empty()) {
    const auto ratios = speedup(state.makespans);
    for (auto& row : state.summary) row.speedup = ratios.at({row.w, row.b});
  }

  write_series(state.series, out_dir / "series.csv");
  write_summary(state.summary, out_dir / "summary.csv");
  {
    std::ofstream script(out_dir / "plot_series.py");
    if (!script) throw std::runtime_error("cannot write " + (out_dir / "plot_series.py").string());
    script << kPlotScript;
  }
  std::cout << "wrote " << (out_dir / "series.csv").string() << " (" << state.series.size()
            << " series), summary.csv (" << state.summary.size() << " rows), plot_series.py\n";

  manifest.artifacts = {"series.csv", "summary.csv", "plot_series.py"};
  manifest.finished = iso_timestamp_now();
  manifest.status = "ok";
  write_manifest(manifest, out_dir / "manifest.json");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Sequential Bayesian calibration with batch acquisitions over an in-process worker pool, "
      "plus a Monte Carlo performance model of the batched manager/worker loop"};
  app.require_subcommand(1);

  // design
  auto* design = app.add_subcommand("design", "Run sequential calibration designs");
  std::string d_config, d_problem, d_acq, d_liar, d_clock, d_out;
  int d_n = 0, d_n0 = 0, d_b = 0, d_w = 0, d_candidates = 0, d_ref = 0, d_reps = 0, d_grid = 0;
  std::uint64_t d_seed = 0;
  bool d_mad = true, d_even = true;
  int d_jobs = 1;
  auto* d_config_o = design->add_option("--config", d_config, "JSON config file or run manifest");
  auto* d_problem_o = design->add_option("--problem", d_problem, "Test problem name");
  auto* d_acq_o = design->add_option("--acq", d_acq, "Acquisition: pi|ei|eivar|hybrid|rnd");
  auto* d_n_o = design->add_option("--n", d_n, "Evaluation budget beyond the initial design");
  auto* d_n0_o = design->add_option("--n0", d_n0, "Initial design size");
  auto* d_b_o = design->add_option("--b", d_b, "Batch size");
  auto* d_w_o = design->add_option("--w", d_w, "Worker count");
  auto* d_cand_o = design->add_option("--candidates", d_candidates, "Candidate list size per pick");
  auto* d_ref_o = design->add_option("--ref-size", d_ref, "EIVAR reference set size");
  auto* d_liar_o =
      design->add_option("--liar", d_liar, "Constant liar: mean-output|min-output|max-output");
  auto* d_even_o = design->add_flag("--eivar-on-even,!--eivar-on-odd", d_even,
                                    "HYBRID stage parity that runs EIVAR");
  auto* d_reps_o = design->add_option("--replicates", d_reps, "Independent replicates");
  auto* d_seed_o = design->add_option("--seed", d_seed, "Master seed");
  auto* d_mad_o = design->add_flag("--mad,!--no-mad", d_mad, "Track posterior MAD per stage");
  auto* d_grid_o = design->add_option("--mad-grid", d_grid, "MAD grid resolution per axis");
  auto* d_clock_o = design->add_option("--clock", d_clock, "measured|virtual");
  auto* d_out_o = design->add_option("--out", d_out, "Output directory");
  design->add_option("--jobs", d_jobs, "Concurrent replicates")->check(CLI::PositiveNumber);

  // perf
  auto* perf = app.add_subcommand("perf", "Run the Monte Carlo performance model");
  std::string p_config, p_label, p_out, p_from_trace;
  std::string p_curve_kind, p_acq_kind, p_run_kind;
  std::vector<int> p_b, p_w;
  double p_alpha = 0, p_an = 0, p_acq_a = 0, p_acq_b = 0, p_acq_c = 0, p_acq_tail = 0;
  double p_run_mean = 0, p_run_std = 0, p_run_floor = 0;
  int p_curve_n = 0, p_reps = 0;
  std::uint64_t p_seed = 0, p_run_seed = 0;
  int p_jobs = 1;
  auto* p_config_o = perf->add_option("--config", p_config, "JSON scenario file or run manifest");
  auto* p_b_o = perf->add_option("--b", p_b, "Batch sizes (grid)");
  auto* p_w_o = perf->add_option("--w", p_w, "Worker counts (grid)");
  auto* p_alpha_o = perf->add_option("--alpha", p_alpha, "Accuracy target");
  auto* p_reps_o = perf->add_option("--replicates", p_reps, "Monte Carlo replicates");
  auto* p_label_o = perf->add_option("--acq-label", p_label, "Label recorded in the traces");
  auto* p_seed_o = perf->add_option("--seed", p_seed, "Master seed");
  auto* p_out_o = perf->add_option("--out", p_out, "Output directory");
  auto* p_from_o = perf->add_option("--from-trace", p_from_trace,
                                    "stages.csv (or replicate dir) with measured acq times");
  auto* p_ck_o = perf->add_option("--curve-kind", p_curve_kind, "exponential|empirical");
  auto* p_an_o = perf->add_option("--a-n", p_an, "Progress curve exponent");
  auto* p_cn_o = perf->add_option("--curve-n", p_curve_n, "Progress curve total evaluations");
  auto* p_ak_o = perf->add_option("--acq-kind", p_acq_kind, "constant|linear|quadratic");
  auto* p_aa_o = perf->add_option("--acq-a", p_acq_a, "Acquisition time constant term");
  auto* p_ab_o = perf->add_option("--acq-b", p_acq_b, "Acquisition time linear term");
  auto* p_ac_o = perf->add_option("--acq-c", p_acq_c, "Acquisition time quadratic term");
  auto* p_at_o = perf->add_option("--acq-tail", p_acq_tail, "Per-pick tail constant");
  auto* p_rk_o = perf->add_option("--run-kind", p_run_kind, "constant|truncated-normal");
  auto* p_rm_o = perf->add_option("--run-mean", p_run_mean, "Run time mean");
  auto* p_rs_o = perf->add_option("--run-std", p_run_std, "Run time standard deviation");
  auto* p_rf_o = perf->add_option("--run-floor", p_run_floor, "Run time lower truncation");
  auto* p_rseed_o = perf->add_option("--run-seed", p_run_seed, "Run time stream seed");
  perf->add_option("--jobs", p_jobs, "Concurrent grid cells")->check(CLI::PositiveNumber);

  // report
  auto* report = app.add_subcommand("report", "Aggregate trace directories into metric CSVs");
  std::vector<std::string> r_in;
  std::string r_out;
  report->add_option("--in", r_in, "Trace directory (repeatable)")->required();
  auto* r_out_o = report->add_option("--out", r_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (design->parsed()) {
      DesignConfig cfg;
      cfg.out = default_out_root() + "/design";
      if (d_config_o->count())
        apply_design_json(cfg, unwrap_manifest(load_json_file(d_config), "design"));
      json overlay = json::object();
      if (d_problem_o->count()) overlay["problem"] = d_problem;
      if (d_acq_o->count()) overlay["acq"] = d_acq;
      if (d_n_o->count()) overlay["n"] = d_n;
      if (d_n0_o->count()) overlay["n0"] = d_n0;
      if (d_b_o->count()) overlay["b"] = d_b;
      if (d_w_o->count()) overlay["w"] = d_w;
      if (d_cand_o->count()) overlay["candidates"] = d_candidates;
      if (d_ref_o->count()) overlay["ref_size"] = d_ref;
      if (d_liar_o->count()) overlay["liar"] = d_liar;
      if (d_even_o->count()) overlay["eivar_on_even"] = d_even;
      if (d_reps_o->count()) overlay["replicates"] = d_reps;
      if (d_seed_o->count()) overlay["seed"] = d_seed;
      if (d_mad_o->count()) overlay["mad"] = d_mad;
      if (d_grid_o->count()) overlay["mad_grid"] = d_grid;
      if (d_clock_o->count()) overlay["clock"] = d_clock;
      if (d_out_o->count()) overlay["out"] = d_out;
      apply_design_json(cfg, overlay);
      return cmd_design(cfg, d_jobs);
    }

    if (perf->parsed()) {
      PerfConfig cfg;
      cfg.out = default_out_root() + "/perf";
      if (p_config_o->count())
        apply_perf_json(cfg, unwrap_manifest(load_json_file(p_config), "perf"));
      json overlay = json::object();
      json curve = json::object(), acq = json::object(), run = json::object();
      if (p_ck_o->count()) curve["kind"] = p_curve_kind;
      if (p_an_o->count()) curve["a_n"] = p_an;
      if (p_cn_o->count()) curve["n"] = p_curve_n;
      if (p_ak_o->count()) acq["kind"] = p_acq_kind;
      if (p_aa_o->count()) acq["a"] = p_acq_a;
      if (p_ab_o->count()) acq["b"] = p_acq_b;
      if (p_ac_o->count()) acq["c"] = p_acq_c;
      if (p_at_o->count()) acq["tail"] = p_acq_tail;
      if (p_rk_o->count()) run["kind"] = p_run_kind;
      if (p_rm_o->count()) run["mean"] = p_run_mean;
      if (p_rs_o->count()) run["std"] = p_run_std;
      if (p_rf_o->count()) run["floor"] = p_run_floor;
      if (p_rseed_o->count()) run["seed"] = p_run_seed;
      if (!curve.empty()) overlay["curve"] = std::move(curve);
      if (!acq.empty()) overlay["acq_time"] = std::move(acq);
      if (!run.empty()) overlay["run_time"] = std::move(run);
      if (p_b_o->count()) overlay["b"] = p_b;
      if (p_w_o->count()) overlay["w"] = p_w;
      if (p_alpha_o->count()) overlay["alpha"] = p_alpha;
      if (p_reps_o->count()) overlay["replicates"] = p_reps;
      if (p_label_o->count()) overlay["acq_label"] = p_label;
      if (p_seed_o->count()) overlay["seed"] = p_seed;
      if (p_out_o->count()) overlay["out"] = p_out;
      apply_perf_json(cfg, overlay);
      if (p_from_o->count()) {
        fs::path stages = p_from_trace;
        if (fs::is_directory(stages)) stages /= "stages.csv";
        cfg.acq.measured.clear();
        for (const auto& [stage, value] : read_measured_acq(stages))
          cfg.acq.measured.push_back(value);
      }
      return cmd_perf(cfg, p_jobs);
    }

    std::string out = r_out;
    if (!r_out_o->count()) out = default_out_root() + "/report";
    return cmd_report(r_in, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
