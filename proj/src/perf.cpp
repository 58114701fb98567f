#include "seqcal/perf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqcal/rng.hpp"

namespace seqcal {

namespace {

double base_error(const ProgressCurve& curve, std::size_t j) {
  if (j == 0) return 1.0;
  if (!curve.table.empty()) {
    // Step table: the error of the last entry at or below j.
    double err = 1.0;
    for (const auto& [jj, e] : curve.table) {
      if (jj > j) break;
      err = e;
    }
    return err;
  }
  const double frac = static_cast<double>(j) / static_cast<double>(curve.total);
  const double err = 1.0 - std::pow(frac, curve.exponent);
  return std::clamp(err, 0.0, 1.0);
}

}  // namespace

double error_at(const ProgressCurve& curve, std::size_t j) {
  switch (curve.kind) {
    case CurveKind::Exponential:
    case CurveKind::Empirical:
      return base_error(curve, j);
    case CurveKind::PiecewiseBatch: {
      if (j == 0) return 1.0;
      const std::size_t b = curve.batch == 0 ? 1 : curve.batch;
      const std::size_t stage_last = b * ((j + b - 1) / b);
      return base_error(curve, stage_last);
    }
  }
  return 1.0;
}

std::size_t evals_to_accuracy(const ProgressCurve& curve, double alpha) {
  if (curve.kind == CurveKind::PiecewiseBatch) {
    const std::size_t b = curve.batch == 0 ? 1 : curve.batch;
    const std::size_t stages = (curve.total + b - 1) / b;
    for (std::size_t t = 1; t <= stages; ++t) {
      if (error_at(curve, t * b) <= alpha) return t * b;
    }
    throw InfeasibleTarget("progress curve never reaches alpha within the budget");
  }
  if (!curve.table.empty()) {
    for (const auto& [j, e] : curve.table) {
      if (e <= alpha) return j;
    }
    throw InfeasibleTarget("empirical progress curve never reaches alpha");
  }
  // error_at is nonincreasing: start from the closed-form index and fix up
  // around floating-point edges.
  const double target = static_cast<double>(curve.total) *
                        std::pow(1.0 - alpha, 1.0 / curve.exponent);
  std::size_t j = static_cast<std::size_t>(std::ceil(target));
  if (j == 0) j = 1;
  while (j > 1 && error_at(curve, j - 1) <= alpha) --j;
  while (j <= curve.total && error_at(curve, j) > alpha) ++j;
  if (j > curve.total) throw InfeasibleTarget("progress curve never reaches alpha");
  return j;
}

double acq_time(const AcqTimeModel& model, std::size_t b, std::size_t t, std::size_t n) {
  if (!model.measured.empty()) {
    if (t <= model.measured.size()) return model.measured[t - 1];
    const double sum = std::accumulate(model.measured.begin(), model.measured.end(), 0.0);
    return sum / static_cast<double>(model.measured.size());
  }
  const std::size_t j = 1 + b * (t - 1);
  const double x = static_cast<double>(j) / static_cast<double>(n);
  double first = model.a;
  if (model.kind == AcqTimeKind::Linear || model.kind == AcqTimeKind::Quadratic) {
    first += model.b * x;
  }
  if (model.kind == AcqTimeKind::Quadratic) first += model.c * x * x;
  return first + static_cast<double>(b - 1) * model.tail_constant;
}

double sample_runtime(const RunTimeModel& model, std::uint64_t omega, std::uint64_t j) {
  if (model.kind == RunTimeKind::Constant) return model.mean;
  const double draw = model.mean + model.stddev * counter_normal(model.seed, omega, j);
  return std::max(model.floor, draw);
}

void PerfScenario::validate() const {
  if (b < 1 || b > w) throw std::invalid_argument("perf scenario requires 1 <= b <= w");
  if (w > stop_count) throw std::invalid_argument("perf scenario requires w <= n_k(b, alpha)");
  if (replicates < 1) throw std::invalid_argument("perf scenario requires replicates >= 1");
}

PerfTrace simulate(const PerfScenario& scenario, std::size_t omega) {
  scenario.validate();
  PerfTrace trace;
  trace.replicate = omega;
  trace.n_target = scenario.stop_count;

  const auto om = static_cast<std::uint64_t>(omega);

  std::vector<std::size_t> pending;  // job ids
  pending.reserve(scenario.w);
  for (std::size_t j = 1; j <= scenario.w; ++j) {
    PerfJob job;
    job.id = j;
    job.stage = 0;
    job.end_time = sample_runtime(scenario.run_model, om, j);
    trace.jobs.push_back(job);
    pending.push_back(j);
  }

  std::size_t n_t = scenario.w;
  double stage_clock = 0.0;
  std::size_t t = 0;

  while (n_t < scenario.stop_count) {
    ++t;
    // b-th smallest pending completion, ties by job id.
    std::vector<std::size_t> order = pending;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b2) {
      const double ea = trace.jobs[a - 1].end_time;
      const double eb = trace.jobs[b2 - 1].end_time;
      if (ea != eb) return ea < eb;
      return a < b2;
    });
    const double kth = trace.jobs[order[scenario.b - 1] - 1].end_time;
    stage_clock = std::max(stage_clock, kth) +
                  acq_time(scenario.acq_model, scenario.b, t, scenario.curve.total);
    trace.stage_end.push_back(stage_clock);

    for (std::size_t i = 0; i < scenario.b; ++i) {
      const std::size_t id = order[i];
      trace.jobs[id - 1].consumed_by = static_cast<std::ptrdiff_t>(t);
      pending.erase(std::find(pending.begin(), pending.end(), id));
    }

    for (std::size_t i = 1; i <= scenario.b; ++i) {
      PerfJob job;
      job.id = n_t + i;
      job.stage = t;
      job.end_time = stage_clock + sample_runtime(scenario.run_model, om, job.id);
      trace.jobs.push_back(job);
      pending.push_back(job.id);
    }
    n_t += scenario.b;
    trace.pending_sizes.push_back(pending.size());
  }

  trace.final_count = n_t;
  return trace;
}

std::vector<PerfTrace> run_scenario(const PerfScenario& scenario) {
  std::vector<PerfTrace> out;
  out.reserve(scenario.replicates);
  for (std::size_t omega = 1; omega <= scenario.replicates; ++omega) {
    out.push_back(simulate(scenario, omega));
  }
  return out;
}

}  // namespace seqcal
