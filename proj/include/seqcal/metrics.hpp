#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seqcal/engine.hpp"
#include "seqcal/perf.hpp"

namespace seqcal {

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;     // median across replicates (or the single value)
  double y_lo = 0.0;  // first quartile
  double y_hi = 0.0;  // third quartile
};

// x strictly increasing within a series.
struct MetricSeries {
  std::string label;
  std::string x_unit;  // "evaluations" | "seconds"
  std::string y_unit;  // "error" | "time" | "ratio" | "hours"
  std::vector<SeriesPoint> points;
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

double median(std::vector<double> values);
Quartiles quartiles(std::vector<double> values);

// Running minimum of |y - output| in job-completion order, one point per
// evaluated job (initial design included).
MetricSeries delta_series(const DesignTrace& trace);

// Recorded per-stage MAD against n_t; stages without a finite MAD are skipped.
MetricSeries mad_series(const DesignTrace& trace);

// Median and quartiles across replicates of the per-stage delta_t (or mad_t),
// aligned on stage index.
MetricSeries aggregate_delta(const std::vector<DesignTrace>& traces, const std::string& label);
MetricSeries aggregate_mad(const std::vector<DesignTrace>& traces, const std::string& label);

// Wall-clock extent of a replicate: last stage end or last job completion.
double makespan(const PerfTrace& trace);

// (j-th completion time, error after j evaluations), medians across
// replicates; duplicate x keeps the latest (smallest) error.
MetricSeries wallclock_error_curve(const std::vector<PerfTrace>& traces,
                                   const ProgressCurve& curve, const std::string& label);

// Ratio of the baseline makespan (smallest w present for the same b) to each
// configuration's makespan. Keys are (w, b).
std::map<std::pair<std::size_t, std::size_t>, double> speedup(
    const std::map<std::pair<std::size_t, std::size_t>, double>& makespans);

// Average per-worker idle time: consumed jobs wait from their completion to
// their consuming stage's end; unconsumed jobs wait until makespan.
double idle_time(const PerfTrace& trace, std::size_t w);

double computing_hours(const PerfTrace& trace, std::size_t w);

}  // namespace seqcal
