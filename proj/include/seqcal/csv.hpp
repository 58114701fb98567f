#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "seqcal/engine.hpp"
#include "seqcal/metrics.hpp"
#include "seqcal/perf.hpp"

namespace seqcal {

// Shortest decimal form that round-trips a double (up to 17 significant digits).
std::string format_double(double value);

// jobs.csv + stages.csv in dir, each with an 8-line '#' header block
// recording config and seeds.
void write_design_trace(const DesignTrace& trace, const std::filesystem::path& dir);

// perf_jobs.csv + perf_stages.csv in dir, all replicates in one file pair.
void write_perf_traces(const std::vector<PerfTrace>& traces, const PerfScenario& scenario,
                       const std::filesystem::path& dir);

void write_series(const std::vector<MetricSeries>& series, const std::filesystem::path& file);

struct SummaryRow {
  std::size_t b = 0;
  std::size_t w = 0;
  std::string acq;
  double makespan_median = 0.0;
  double speedup = 1.0;
  double idle_avg = 0.0;
  double compute_hours = 0.0;
};

void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& file);

struct CsvTable {
  std::vector<std::string> comments;  // '#' lines, in order
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by header name; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& file);

// Inverse of write_design_trace: reloads one replicate's jobs.csv and
// stages.csv. Throws std::runtime_error on missing files or columns.
DesignTrace read_design_trace(const std::filesystem::path& dir);

struct PerfRead {
  PerfScenario scenario;  // reconstructed from the header; empirical tables
                          // are recorded by size only (see curve_table)
  std::size_t curve_table_size = 0;
  std::vector<PerfTrace> traces;
};

// Inverse of write_perf_traces for one cell directory.
PerfRead read_perf_traces(const std::filesystem::path& dir);

}  // namespace seqcal
