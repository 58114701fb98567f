#include "seqcal/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace seqcal {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

void design_header(std::ostream& out, const DesignTrace& t, const char* schema) {
  out << "# seqcal design trace\n";
  out << "# problem=" << t.problem << " y=" << format_double(t.y)
      << " sigma2=" << format_double(t.noise_var) << "\n";
  out << "# acq=" << to_string(t.spec.kind) << " candidates=" << t.spec.candidate_count
      << " ref_size=" << t.spec.reference_count << " liar=" << to_string(t.spec.liar)
      << " eivar_on_even=" << (t.spec.eivar_on_even ? 1 : 0) << "\n";
  out << "# n=" << t.n << " n0=" << t.n0 << " b=" << t.b << " w=" << t.w << "\n";
  out << "# seed_init=" << t.seeds.init << " seed_candidates=" << t.seeds.candidates
      << " seed_rng=" << t.seeds.rng << "\n";
  out << "# replicate=" << t.replicate_id << " clock=" << to_string(t.clock)
      << " complete=" << (t.complete ? 1 : 0) << "\n";
  out << "# schema=" << schema << "\n";
  out << "# values use up to 17 significant digits\n";
}

void perf_header(std::ostream& out, const PerfScenario& s, const char* schema) {
  out << "# seqcal perf trace\n";
  out << "# acq=" << s.acq_label << " b=" << s.b << " w=" << s.w << "\n";
  out << "# stop_count=" << s.stop_count << " replicates=" << s.replicates << "\n";
  out << "# curve_kind=" << static_cast<int>(s.curve.kind)
      << " curve_exponent=" << format_double(s.curve.exponent) << " curve_total=" << s.curve.total
      << " curve_batch=" << s.curve.batch << " curve_table=" << s.curve.table.size() << "\n";
  out << "# acq_kind=" << static_cast<int>(s.acq_model.kind)
      << " acq_a=" << format_double(s.acq_model.a) << " acq_b=" << format_double(s.acq_model.b)
      << " acq_c=" << format_double(s.acq_model.c)
      << " acq_tail=" << format_double(s.acq_model.tail_constant)
      << " acq_measured=" << s.acq_model.measured.size() << "\n";
  out << "# run_kind=" << static_cast<int>(s.run_model.kind)
      << " run_mean=" << format_double(s.run_model.mean)
      << " run_std=" << format_double(s.run_model.stddev)
      << " run_floor=" << format_double(s.run_model.floor) << " run_seed=" << s.run_model.seed
      << "\n";
  out << "# schema=" << schema << "\n";
  out << "# values use up to 17 significant digits\n";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// key=value tokens from the '#' header block; later lines win on collision.
std::map<std::string, std::string> header_kv(const std::vector<std::string>& comments) {
  std::map<std::string, std::string> kv;
  for (const auto& line : comments) {
    std::stringstream ss(line);
    std::string token;
    while (ss >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) continue;
      kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
  }
  return kv;
}

const std::string& kv_at(const std::map<std::string, std::string>& kv, const std::string& key,
                         const std::filesystem::path& file) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error(file.string() + ": header lacks " + key);
  return it->second;
}

double cell_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

std::size_t cell_size(const std::string& s) {
  return static_cast<std::size_t>(std::strtoull(s.c_str(), nullptr, 10));
}

// Stage t consumes the b unconsumed jobs created before it with the smallest
// (end_time, id); replaying that rule recovers the consumption assignment the
// compact CSV schema does not store.
void assign_consumption(PerfTrace& trace, std::size_t b) {
  std::vector<std::size_t> order(trace.jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    const PerfJob& x = trace.jobs[lhs];
    const PerfJob& y = trace.jobs[rhs];
    if (x.end_time != y.end_time) return x.end_time < y.end_time;
    return x.id < y.id;
  });
  for (std::size_t t = 1; t <= trace.stage_end.size(); ++t) {
    std::size_t taken = 0;
    for (const std::size_t i : order) {
      if (taken == b) break;
      PerfJob& job = trace.jobs[i];
      if (job.consumed_by >= 0 || job.stage >= t) continue;
      job.consumed_by = static_cast<std::ptrdiff_t>(t);
      ++taken;
    }
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  // Prefer the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, value);
    double back = 0.0;
    std::sscanf(probe, "%lf", &back);
    if (back == value) return probe;
  }
  return buf;
}

void write_design_trace(const DesignTrace& trace, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t p = trace.jobs.empty() ? 0 : trace.jobs.front().theta.size();

  {
    std::ofstream out = open_out(dir / "jobs.csv");
    design_header(out, trace, "jobs-v1");
    out << "replicate_id,job_id,stage";
    for (std::size_t l = 1; l <= p; ++l) out << ",theta_" << l;
    out << ",output,submit_time,complete_time\n";
    for (const auto& job : trace.jobs) {
      out << trace.replicate_id << "," << job.job_id << "," << job.stage;
      for (const double v : job.theta) out << "," << format_double(v);
      out << "," << format_double(job.output) << "," << format_double(job.submit_time) << ","
          << format_double(job.complete_time) << "\n";
    }
  }

  {
    std::ofstream out = open_out(dir / "stages.csv");
    design_header(out, trace, "stages-v1");
    out << "replicate_id,stage,n_t,acq_time,delta_t,mad_t,acquired,gp_scale,gp_nugget";
    for (std::size_t l = 1; l <= p; ++l) out << ",gp_zeta_" << l;
    out << "\n";
    for (const auto& stage : trace.stages) {
      out << trace.replicate_id << "," << stage.stage << "," << stage.n_t << ","
          << format_double(stage.acq_time) << "," << format_double(stage.delta_t) << ","
          << format_double(stage.mad_t) << "," << stage.acquired << ","
          << format_double(stage.gp.scale) << "," << format_double(stage.gp.nugget);
      for (std::size_t l = 0; l < p; ++l) {
        out << ","
            << format_double(l < stage.gp.log_lengthscales.size() ? stage.gp.log_lengthscales[l]
                                                                  : 0.0);
      }
      out << "\n";
    }
  }
}

void write_perf_traces(const std::vector<PerfTrace>& traces, const PerfScenario& scenario,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream out = open_out(dir / "perf_jobs.csv");
    perf_header(out, scenario, "perf-jobs-v1");
    out << "replicate,job_id,stage,end_time\n";
    for (const auto& trace : traces) {
      for (const auto& job : trace.jobs) {
        out << trace.replicate << "," << job.id << "," << job.stage << ","
            << format_double(job.end_time) << "\n";
      }
    }
  }

  {
    std::ofstream out = open_out(dir / "perf_stages.csv");
    perf_header(out, scenario, "perf-stages-v1");
    out << "replicate,stage,end_time,n_t\n";
    for (const auto& trace : traces) {
      for (std::size_t t = 1; t <= trace.stage_end.size(); ++t) {
        const std::size_t n_t = scenario.w + t * scenario.b;
        out << trace.replicate << "," << t << "," << format_double(trace.stage_end[t - 1]) << ","
            << n_t << "\n";
      }
    }
  }
}

void write_series(const std::vector<MetricSeries>& series, const std::filesystem::path& file) {
  std::ofstream out = open_out(file);
  out << "series_label,x_unit,y_unit,x,y_median,y_q1,y_q3\n";
  for (const auto& s : series) {
    for (const auto& pt : s.points) {
      out << s.label << "," << s.x_unit << "," << s.y_unit << "," << format_double(pt.x) << ","
          << format_double(pt.y) << "," << format_double(pt.y_lo) << "," << format_double(pt.y_hi)
          << "\n";
    }
  }
}

void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& file) {
  std::ofstream out = open_out(file);
  out << "b,w,acq,makespan_median,speedup,idle_avg,compute_hours\n";
  for (const auto& r : rows) {
    out << r.b << "," << r.w << "," << r.acq << "," << format_double(r.makespan_median) << ","
        << format_double(r.speedup) << "," << format_double(r.idle_avg) << ","
        << format_double(r.compute_hours) << "\n";
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("no such column: " + name);
}

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line);
      continue;
    }
    if (!have_header) {
      table.header = split_line(line);
      have_header = true;
    } else {
      table.rows.push_back(split_line(line));
    }
  }
  return table;
}

DesignTrace read_design_trace(const std::filesystem::path& dir) {
  const auto jobs_file = dir / "jobs.csv";
  const auto stages_file = dir / "stages.csv";
  const CsvTable jobs = read_csv(jobs_file);
  const CsvTable stages = read_csv(stages_file);
  const auto kv = header_kv(jobs.comments);

  DesignTrace trace;
  trace.replicate_id = static_cast<int>(cell_size(kv_at(kv, "replicate", jobs_file)));
  trace.problem = kv_at(kv, "problem", jobs_file);
  trace.y = cell_double(kv_at(kv, "y", jobs_file));
  trace.noise_var = cell_double(kv_at(kv, "sigma2", jobs_file));
  trace.n0 = cell_size(kv_at(kv, "n0", jobs_file));
  trace.n = cell_size(kv_at(kv, "n", jobs_file));
  trace.b = cell_size(kv_at(kv, "b", jobs_file));
  trace.w = cell_size(kv_at(kv, "w", jobs_file));
  trace.seeds.init = cell_size(kv_at(kv, "seed_init", jobs_file));
  trace.seeds.candidates = cell_size(kv_at(kv, "seed_candidates", jobs_file));
  trace.seeds.rng = cell_size(kv_at(kv, "seed_rng", jobs_file));
  trace.clock = clock_mode_from_string(kv_at(kv, "clock", jobs_file));
  trace.spec.kind = acq_kind_from_string(kv_at(kv, "acq", jobs_file));
  trace.spec.candidate_count = cell_size(kv_at(kv, "candidates", jobs_file));
  trace.spec.reference_count = cell_size(kv_at(kv, "ref_size", jobs_file));
  trace.spec.liar = liar_rule_from_string(kv_at(kv, "liar", jobs_file));
  trace.spec.eivar_on_even = kv_at(kv, "eivar_on_even", jobs_file) == "1";
  trace.complete = kv_at(kv, "complete", jobs_file) == "1";

  std::vector<std::size_t> theta_cols;
  for (std::size_t i = 0; i < jobs.header.size(); ++i) {
    if (jobs.header[i].rfind("theta_", 0) == 0) theta_cols.push_back(i);
  }
  const std::size_t id_col = jobs.column("job_id");
  const std::size_t stage_col = jobs.column("stage");
  const std::size_t out_col = jobs.column("output");
  const std::size_t sub_col = jobs.column("submit_time");
  const std::size_t comp_col = jobs.column("complete_time");
  for (const auto& row : jobs.rows) {
    JobRecord job;
    job.job_id = cell_size(row.at(id_col));
    job.stage = cell_size(row.at(stage_col));
    for (const std::size_t c : theta_cols) job.theta.push_back(cell_double(row.at(c)));
    job.output = cell_double(row.at(out_col));
    job.submit_time = cell_double(row.at(sub_col));
    job.complete_time = cell_double(row.at(comp_col));
    trace.jobs.push_back(std::move(job));
  }

  std::vector<std::size_t> zeta_cols;
  for (std::size_t i = 0; i < stages.header.size(); ++i) {
    if (stages.header[i].rfind("gp_zeta_", 0) == 0) zeta_cols.push_back(i);
  }
  const std::size_t st_col = stages.column("stage");
  const std::size_t nt_col = stages.column("n_t");
  const std::size_t at_col = stages.column("acq_time");
  const std::size_t dt_col = stages.column("delta_t");
  const std::size_t mt_col = stages.column("mad_t");
  const std::size_t acq_col = stages.column("acquired");
  const std::size_t sc_col = stages.column("gp_scale");
  const std::size_t nu_col = stages.column("gp_nugget");
  for (const auto& row : stages.rows) {
    StageRecord stage;
    stage.stage = cell_size(row.at(st_col));
    stage.n_t = cell_size(row.at(nt_col));
    stage.acq_time = cell_double(row.at(at_col));
    stage.delta_t = cell_double(row.at(dt_col));
    stage.mad_t = cell_double(row.at(mt_col));
    stage.acquired = cell_size(row.at(acq_col));
    stage.gp.scale = cell_double(row.at(sc_col));
    stage.gp.nugget = cell_double(row.at(nu_col));
    for (const std::size_t c : zeta_cols) stage.gp.log_lengthscales.push_back(cell_double(row.at(c)));
    trace.stages.push_back(std::move(stage));
  }
  return trace;
}

PerfRead read_perf_traces(const std::filesystem::path& dir) {
  const auto jobs_file = dir / "perf_jobs.csv";
  const auto stages_file = dir / "perf_stages.csv";
  const CsvTable jobs = read_csv(jobs_file);
  const CsvTable stages = read_csv(stages_file);
  const auto kv = header_kv(jobs.comments);

  PerfRead result;
  PerfScenario& s = result.scenario;
  s.acq_label = kv_at(kv, "acq", jobs_file);
  s.b = cell_size(kv_at(kv, "b", jobs_file));
  s.w = cell_size(kv_at(kv, "w", jobs_file));
  s.stop_count = cell_size(kv_at(kv, "stop_count", jobs_file));
  s.replicates = cell_size(kv_at(kv, "replicates", jobs_file));
  s.curve.kind = static_cast<CurveKind>(cell_size(kv_at(kv, "curve_kind", jobs_file)));
  s.curve.exponent = cell_double(kv_at(kv, "curve_exponent", jobs_file));
  s.curve.total = cell_size(kv_at(kv, "curve_total", jobs_file));
  s.curve.batch = cell_size(kv_at(kv, "curve_batch", jobs_file));
  result.curve_table_size = cell_size(kv_at(kv, "curve_table", jobs_file));
  s.acq_model.kind = static_cast<AcqTimeKind>(cell_size(kv_at(kv, "acq_kind", jobs_file)));
  s.acq_model.a = cell_double(kv_at(kv, "acq_a", jobs_file));
  s.acq_model.b = cell_double(kv_at(kv, "acq_b", jobs_file));
  s.acq_model.c = cell_double(kv_at(kv, "acq_c", jobs_file));
  s.acq_model.tail_constant = cell_double(kv_at(kv, "acq_tail", jobs_file));
  s.run_model.kind = static_cast<RunTimeKind>(cell_size(kv_at(kv, "run_kind", jobs_file)));
  s.run_model.mean = cell_double(kv_at(kv, "run_mean", jobs_file));
  s.run_model.stddev = cell_double(kv_at(kv, "run_std", jobs_file));
  s.run_model.floor = cell_double(kv_at(kv, "run_floor", jobs_file));
  s.run_model.seed = cell_size(kv_at(kv, "run_seed", jobs_file));

  std::map<std::size_t, PerfTrace> by_replicate;
  {
    const std::size_t rep_col = jobs.column("replicate");
    const std::size_t id_col = jobs.column("job_id");
    const std::size_t stage_col = jobs.column("stage");
    const std::size_t end_col = jobs.column("end_time");
    for (const auto& row : jobs.rows) {
      PerfTrace& trace = by_replicate[cell_size(row.at(rep_col))];
      PerfJob job;
      job.id = cell_size(row.at(id_col));
      job.stage = cell_size(row.at(stage_col));
      job.end_time = cell_double(row.at(end_col));
      trace.jobs.push_back(job);
    }
  }
  {
    const std::size_t rep_col = stages.column("replicate");
    const std::size_t stage_col = stages.column("stage");
    const std::size_t end_col = stages.column("end_time");
    for (const auto& row : stages.rows) {
      PerfTrace& trace = by_replicate[cell_size(row.at(rep_col))];
      const std::size_t t = cell_size(row.at(stage_col));
      if (trace.stage_end.size() < t) trace.stage_end.resize(t, 0.0);
      trace.stage_end[t - 1] = cell_double(row.at(end_col));
    }
  }
  for (auto& [rep, trace] : by_replicate) {
    trace.replicate = rep;
    trace.n_target = s.stop_count;
    trace.final_count = s.w + trace.stage_end.size() * s.b;
    trace.pending_sizes.assign(trace.stage_end.size(), s.w);
    std::sort(trace.jobs.begin(), trace.jobs.end(),
              [](const PerfJob& x, const PerfJob& y) { return x.id < y.id; });
    assign_consumption(trace, s.b);
    result.traces.push_back(std::move(trace));
  }
  return result;
}

}  // namespace seqcal
