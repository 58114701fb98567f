#include "seqcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqcal {

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

MetricSeries aggregate_stage_column(const std::vector<DesignTrace>& traces,
                                    const std::string& label, bool use_mad) {
  MetricSeries series;
  series.label = label;
  series.x_unit = "evaluations";
  series.y_unit = "error";
  if (traces.empty()) return series;
  std::size_t stages = traces.front().stages.size();
  for (const auto& t : traces) stages = std::min(stages, t.stages.size());
  for (std::size_t s = 0; s < stages; ++s) {
    std::vector<double> values;
    values.reserve(traces.size());
    for (const auto& t : traces) {
      const double v = use_mad ? t.stages[s].mad_t : t.stages[s].delta_t;
      if (std::isfinite(v)) values.push_back(v);
    }
    if (values.empty()) continue;
    const Quartiles q = quartiles(values);
    series.points.push_back(SeriesPoint{static_cast<double>(traces.front().stages[s].n_t),
                                        q.median, q.q1, q.q3});
  }
  return series;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  return interpolated_quantile(values, 0.5);
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quartiles of empty set");
  std::sort(values.begin(), values.end());
  return Quartiles{interpolated_quantile(values, 0.25), interpolated_quantile(values, 0.5),
                   interpolated_quantile(values, 0.75)};
}

MetricSeries delta_series(const DesignTrace& trace) {
  MetricSeries series;
  series.label = "delta";
  series.x_unit = "evaluations";
  series.y_unit = "error";

  std::vector<const JobRecord*> done;
  done.reserve(trace.jobs.size());
  for (const auto& job : trace.jobs) {
    if (std::isfinite(job.output)) done.push_back(&job);
  }
  std::sort(done.begin(), done.end(), [](const JobRecord* a, const JobRecord* b) {
    if (a->complete_time != b->complete_time) return a->complete_time < b->complete_time;
    return a->job_id < b->job_id;
  });

  double best = std::numeric_limits<double>::infinity();
  double x = 0.0;
  for (const auto* job : done) {
    best = std::min(best, std::fabs(trace.y - job->output));
    x += 1.0;
    series.points.push_back(SeriesPoint{x, best, best, best});
  }
  return series;
}

MetricSeries mad_series(const DesignTrace& trace) {
  MetricSeries series;
  series.label = "mad";
  series.x_unit = "evaluations";
  series.y_unit = "error";
  for (const auto& stage : trace.stages) {
    if (!std::isfinite(stage.mad_t)) continue;
    series.points.push_back(
        SeriesPoint{static_cast<double>(stage.n_t), stage.mad_t, stage.mad_t, stage.mad_t});
  }
  return series;
}

MetricSeries aggregate_delta(const std::vector<DesignTrace>& traces, const std::string& label) {
  return aggregate_stage_column(traces, label, false);
}

MetricSeries aggregate_mad(const std::vector<DesignTrace>& traces, const std::string& label) {
  return aggregate_stage_column(traces, label, true);
}

double makespan(const PerfTrace& trace) {
  double m = trace.stage_end.empty() ? 0.0 : trace.stage_end.back();
  for (const auto& job : trace.jobs) m = std::max(m, job.end_time);
  return m;
}

MetricSeries wallclock_error_curve(const std::vector<PerfTrace>& traces,
                                   const ProgressCurve& curve, const std::string& label) {
  MetricSeries series;
  series.label = label;
  series.x_unit = "seconds";
  series.y_unit = "error";
  if (traces.empty()) return series;

  std::size_t count = traces.front().jobs.size();
  for (const auto& t : traces) count = std::min(count, t.jobs.size());

  std::vector<std::vector<double>> sorted_ends;
  sorted_ends.reserve(traces.size());
  for (const auto& t : traces) {
    std::vector<double> ends;
    ends.reserve(t.jobs.size());
    for (const auto& job : t.jobs) ends.push_back(job.end_time);
    std::sort(ends.begin(), ends.end());
    sorted_ends.push_back(std::move(ends));
  }

  for (std::size_t j = 1; j <= count; ++j) {
    std::vector<double> xs;
    xs.reserve(traces.size());
    for (const auto& ends : sorted_ends) xs.push_back(ends[j - 1]);
    const double x = median(xs);
    const double y = error_at(curve, j);
    if (!series.points.empty() && series.points.back().x == x) {
      series.points.back() = SeriesPoint{x, y, y, y};  // later rank, lower error
    } else {
      series.points.push_back(SeriesPoint{x, y, y, y});
    }
  }
  return series;
}

std::map<std::pair<std::size_t, std::size_t>, double> speedup(
    const std::map<std::pair<std::size_t, std::size_t>, double>& makespans) {
  if (makespans.empty()) throw std::invalid_argument("speedup needs at least one makespan");
  std::map<std::size_t, double> baseline;  // b -> makespan at the smallest w
  std::map<std::size_t, std::size_t> baseline_w;
  for (const auto& [key, value] : makespans) {
    const auto [w, b] = key;
    auto it = baseline_w.find(b);
    if (it == baseline_w.end() || w < it->second) {
      baseline_w[b] = w;
      baseline[b] = value;
    }
  }
  std::map<std::pair<std::size_t, std::size_t>, double> out;
  for (const auto& [key, value] : makespans) out[key] = baseline[key.second] / value;
  return out;
}

double idle_time(const PerfTrace& trace, std::size_t w) {
  const double span = makespan(trace);
  double total = 0.0;
  for (const auto& job : trace.jobs) {
    if (job.consumed_by >= 1) {
      total += trace.stage_end[static_cast<std::size_t>(job.consumed_by) - 1] - job.end_time;
    } else {
      total += span - job.end_time;
    }
  }
  return total / static_cast<double>(w);
}

double computing_hours(const PerfTrace& trace, std::size_t w) {
  return static_cast<double>(w) * makespan(trace);
}

}  // namespace seqcal
