#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <queue>
#include <vector>

#include "doctest.h"
#include "seqcal/perf.hpp"
#include "seqcal/rng.hpp"
#include "seqcal/stats.hpp"

using namespace seqcal;

namespace {

// Independent event-driven reimplementation of the scheduling rule using a
// min-heap keyed by (end time, id). Shares only the cost models (acq_time,
// sample_runtime), which are inputs to the scheduler, not scheduling logic.
PerfTrace heap_oracle(const PerfScenario& sc, std::size_t omega) {
  using Entry = std::pair<double, std::size_t>;  // (end_time, id)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;

  PerfTrace trace;
  trace.replicate = omega;
  trace.n_target = sc.stop_count;
  const auto om = static_cast<std::uint64_t>(omega);

  for (std::size_t j = 1; j <= sc.w; ++j) {
    PerfJob job;
    job.id = j;
    job.stage = 0;
    job.end_time = sample_runtime(sc.run_model, om, j);
    trace.jobs.push_back(job);
    heap.push({job.end_time, j});
  }

  std::size_t created = sc.w;
  double clock = 0.0;
  std::size_t t = 0;
  while (created < sc.stop_count) {
    ++t;
    std::vector<std::size_t> popped;
    double kth = 0.0;
    for (std::size_t i = 0; i < sc.b; ++i) {
      kth = heap.top().first;
      popped.push_back(heap.top().second);
      heap.pop();
    }
    clock = std::max(clock, kth) + acq_time(sc.acq_model, sc.b, t, sc.curve.total);
    trace.stage_end.push_back(clock);
    for (std::size_t id : popped) trace.jobs[id - 1].consumed_by = static_cast<std::ptrdiff_t>(t);
    for (std::size_t i = 1; i <= sc.b; ++i) {
      PerfJob job;
      job.id = created + i;
      job.stage = t;
      job.end_time = clock + sample_runtime(sc.run_model, om, job.id);
      trace.jobs.push_back(job);
      heap.push({job.end_time, job.id});
    }
    created += sc.b;
    trace.pending_sizes.push_back(heap.size());
  }
  trace.final_count = created;
  return trace;
}

bool traces_identical(const PerfTrace& a, const PerfTrace& b) {
  if (a.jobs.size() != b.jobs.size()) return false;
  for (std::size_t i = 0; i < a.jobs.size(); ++i) {
    if (a.jobs[i].id != b.jobs[i].id) return false;
    if (a.jobs[i].stage != b.jobs[i].stage) return false;
    if (a.jobs[i].end_time != b.jobs[i].end_time) return false;  // bitwise
    if (a.jobs[i].consumed_by != b.jobs[i].consumed_by) return false;
  }
  return a.stage_end == b.stage_end && a.pending_sizes == b.pending_sizes &&
         a.final_count == b.final_count && a.n_target == b.n_target;
}

}  // namespace

TEST_CASE("exponential progress curve basics") {
  ProgressCurve curve;
  curve.exponent = 0.5;
  curve.total = 100;
  CHECK(error_at(curve, 0) == 1.0);
  CHECK(error_at(curve, 100) == doctest::Approx(0.0));
  CHECK(error_at(curve, 25) == doctest::Approx(1.0 - 0.5));
  for (std::size_t j = 1; j < 100; ++j) {
    CHECK(error_at(curve, j) <= error_at(curve, j - 1) + 1e-15);
  }
}

TEST_CASE("empirical step table") {
  ProgressCurve curve;
  curve.kind = CurveKind::Empirical;
  curve.table = {{10, 0.8}, {20, 0.5}, {40, 0.2}};
  CHECK(error_at(curve, 5) == 1.0);
  CHECK(error_at(curve, 10) == 0.8);
  CHECK(error_at(curve, 19) == 0.8);
  CHECK(error_at(curve, 20) == 0.5);
  CHECK(error_at(curve, 39) == 0.5);
  CHECK(error_at(curve, 1000) == 0.2);
  CHECK(evals_to_accuracy(curve, 0.5) == 20);
  CHECK(evals_to_accuracy(curve, 0.2) == 40);
  CHECK_THROWS_AS(evals_to_accuracy(curve, 0.1), InfeasibleTarget);
}

TEST_CASE("piecewise-batch curve freezes between stage boundaries") {
  ProgressCurve curve;
  curve.kind = CurveKind::PiecewiseBatch;
  curve.exponent = 0.5;
  curve.total = 100;
  curve.batch = 10;
  // All of stage t's indices report the boundary value.
  for (std::size_t j = 1; j <= 10; ++j) CHECK(error_at(curve, j) == error_at(curve, 10));
  for (std::size_t j = 11; j <= 20; ++j) CHECK(error_at(curve, j) == error_at(curve, 20));
  ProgressCurve base = curve;
  base.kind = CurveKind::Exponential;
  CHECK(error_at(curve, 15) == error_at(base, 20));
}

TEST_CASE("evals_to_accuracy matches a linear scan oracle") {
  ProgressCurve curve;
  curve.exponent = 0.3;
  curve.total = 500;
  for (const double alpha : {0.5, 0.3, 0.1, 0.05, 0.01}) {
    std::size_t scan = 0;
    for (std::size_t j = 1; j <= curve.total; ++j) {
      if (error_at(curve, j) <= alpha) {
        scan = j;
        break;
      }
    }
    REQUIRE(scan > 0);
    CHECK(evals_to_accuracy(curve, alpha) == scan);
  }
}

TEST_CASE("pinned stop counts for the reference curve") {
  ProgressCurve serial;
  serial.exponent = 0.1;
  serial.total = 1280;
  CHECK(evals_to_accuracy(serial, 0.1) == 447);

  ProgressCurve b64;
  b64.kind = CurveKind::PiecewiseBatch;
  b64.exponent = 0.2;
  b64.total = 1280;
  b64.batch = 64;
  CHECK(evals_to_accuracy(b64, 0.1) == 768);

  ProgressCurve b128 = b64;
  b128.exponent = 0.25;
  b128.batch = 128;
  CHECK(evals_to_accuracy(b128, 0.1) == 896);
}

TEST_CASE("acquisition time closed forms") {
  AcqTimeModel m;
  m.a = 2.0;
  m.b = 3.0;
  m.c = 4.0;
  m.tail_constant = 0.5;

  const std::size_t b = 4, t = 3, n = 100;  // first pick j = 1 + 4*2 = 9
  const double x = 9.0 / 100.0;

  m.kind = AcqTimeKind::Constant;
  CHECK(acq_time(m, b, t, n) == doctest::Approx(2.0 + 3 * 0.5));
  m.kind = AcqTimeKind::Linear;
  CHECK(acq_time(m, b, t, n) == doctest::Approx(2.0 + 3.0 * x + 3 * 0.5));
  m.kind = AcqTimeKind::Quadratic;
  CHECK(acq_time(m, b, t, n) == doctest::Approx(2.0 + 3.0 * x + 4.0 * x * x + 3 * 0.5));

  // b = 1 pays no tail.
  m.kind = AcqTimeKind::Constant;
  CHECK(acq_time(m, 1, 5, n) == doctest::Approx(2.0));

  // A measured series replays per stage and falls back to its mean.
  m.measured = {5.0, 6.0};
  CHECK(acq_time(m, b, 1, n) == 5.0);
  CHECK(acq_time(m, b, 2, n) == 6.0);
  CHECK(acq_time(m, b, 9, n) == doctest::Approx(5.5));
}

TEST_CASE("run time sampling is pure and respects the floor") {
  RunTimeModel m;
  m.kind = RunTimeKind::Constant;
  m.mean = 3.5;
  CHECK(sample_runtime(m, 1, 1) == 3.5);
  CHECK(sample_runtime(m, 9, 100) == 3.5);

  m.kind = RunTimeKind::TruncatedNormal;
  m.mean = 1.0;
  m.stddev = 1.0;
  m.floor = 0.1;
  m.seed = 77;
  const double v = sample_runtime(m, 3, 8);
  CHECK(sample_runtime(m, 3, 8) == v);  // pure in (seed, omega, j)
  CHECK(sample_runtime(m, 3, 9) != v);
  CHECK(sample_runtime(m, 4, 8) != v);
  for (std::uint64_t j = 1; j <= 500; ++j) CHECK(sample_runtime(m, 1, j) >= m.floor);

  // Mean of the clamped draw matches the analytic truncated-normal formula.
  const double z = (m.floor - m.mean) / m.stddev;
  const double analytic =
      m.floor * normal_cdf(z) + m.mean * (1.0 - normal_cdf(z)) + m.stddev * normal_pdf(z);
  double acc = 0.0;
  const std::size_t draws = 200000;
  for (std::uint64_t j = 1; j <= draws; ++j) acc += sample_runtime(m, 12, j);
  CHECK(acc / static_cast<double>(draws) == doctest::Approx(analytic).epsilon(0.01));
}

TEST_CASE("scenario validation") {
  PerfScenario sc;
  sc.b = 3;
  sc.w = 2;
  sc.stop_count = 10;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc.b = 2;
  sc.w = 20;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc.w = 4;
  sc.replicates = 0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc.replicates = 1;
  CHECK_NOTHROW(sc.validate());
}

TEST_CASE("synchronous schedule follows the closed form t(s + a)") {
  PerfScenario sc;
  sc.b = 4;
  sc.w = 4;
  sc.stop_count = 24;
  sc.curve.total = 100;
  sc.acq_model.kind = AcqTimeKind::Constant;
  sc.acq_model.a = 0.25;
  sc.acq_model.tail_constant = 0.0;
  sc.run_model.kind = RunTimeKind::Constant;
  sc.run_model.mean = 1.0;

  const PerfTrace trace = simulate(sc, 1);
  REQUIRE(trace.stage_end.size() == 5);  // n_t: 4, 8, ..., 24
  for (std::size_t t = 1; t <= trace.stage_end.size(); ++t) {
    CHECK(trace.stage_end[t - 1] == 1.25 * static_cast<double>(t));  // exact binary
  }
  CHECK(trace.final_count == 24);
}

TEST_CASE("asynchronous w=2 b=1 hand-worked schedule") {
  PerfScenario sc;
  sc.b = 1;
  sc.w = 2;
  sc.stop_count = 6;
  sc.curve.total = 100;
  sc.acq_model.kind = AcqTimeKind::Constant;
  sc.acq_model.a = 0.25;
  sc.run_model.kind = RunTimeKind::Constant;
  sc.run_model.mean = 1.0;

  const PerfTrace trace = simulate(sc, 1);
  REQUIRE(trace.stage_end.size() == 4);
  CHECK(trace.stage_end[0] == 1.25);  // tie on end time broken by id: job 1 first
  CHECK(trace.stage_end[1] == 1.5);
  CHECK(trace.stage_end[2] == 2.5);   // job 3 (end 2.25) gates the stage
  CHECK(trace.stage_end[3] == 2.75);
  CHECK(trace.jobs[0].consumed_by == 1);
  CHECK(trace.jobs[1].consumed_by == 2);
  CHECK(trace.jobs[2].consumed_by == 3);
  CHECK(trace.jobs[3].consumed_by == 4);
  CHECK(trace.jobs[4].consumed_by == -1);
  CHECK(trace.jobs[5].consumed_by == -1);
  CHECK(trace.jobs[2].end_time == 2.25);
  CHECK(trace.jobs[3].end_time == 2.5);
  CHECK(trace.jobs[4].end_time == 3.5);
  CHECK(trace.jobs[5].end_time == 3.75);
  CHECK(trace.final_count == 6);
}

TEST_CASE("simulate is bit-identical to an independent heap-based scheduler") {
  PerfScenario sc;
  sc.curve.total = 40;
  sc.acq_model.kind = AcqTimeKind::Linear;
  sc.acq_model.a = 0.3;
  sc.acq_model.b = 0.7;
  sc.acq_model.tail_constant = 0.05;
  sc.run_model.kind = RunTimeKind::TruncatedNormal;
  sc.run_model.mean = 1.0;
  sc.run_model.stddev = 0.5;
  sc.run_model.floor = 0.05;
  sc.run_model.seed = 2024;
  sc.stop_count = 37;

  for (std::size_t b = 1; b <= 4; ++b) {
    for (std::size_t w = b; w <= 8; ++w) {
      sc.b = b;
      sc.w = w;
      for (std::size_t omega = 1; omega <= 3; ++omega) {
        const PerfTrace got = simulate(sc, omega);
        const PerfTrace want = heap_oracle(sc, omega);
        CHECK(traces_identical(got, want));
      }
    }
  }
}

TEST_CASE("pending-set conservation and overshoot bound") {
  PerfScenario sc;
  sc.curve.total = 100;
  sc.run_model.kind = RunTimeKind::TruncatedNormal;
  sc.run_model.mean = 1.0;
  sc.run_model.stddev = 0.3;
  sc.run_model.floor = 0.1;
  sc.run_model.seed = 5;

  for (const auto& [b, w, stop] :
       std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{
           {1, 1, 9}, {2, 5, 17}, {4, 4, 10}, {3, 7, 29}}) {
    sc.b = b;
    sc.w = w;
    sc.stop_count = stop;
    const PerfTrace trace = simulate(sc, 2);

    for (std::size_t size : trace.pending_sizes) CHECK(size == w);
    CHECK(trace.final_count >= stop);
    CHECK(trace.final_count - stop <= b - 1);
    CHECK(trace.final_count == w + trace.stage_end.size() * b);

    // Each stage consumes exactly b jobs, each created before it consumes.
    std::vector<std::size_t> consumed(trace.stage_end.size() + 1, 0);
    std::size_t never = 0;
    for (const auto& job : trace.jobs) {
      if (job.consumed_by < 0) {
        ++never;
      } else {
        ++consumed[static_cast<std::size_t>(job.consumed_by)];
        CHECK(job.stage < static_cast<std::size_t>(job.consumed_by));
      }
    }
    CHECK(never == w);
    for (std::size_t t = 1; t < consumed.size(); ++t) CHECK(consumed[t] == b);

    // Stage clock never runs backwards.
    for (std::size_t t = 1; t < trace.stage_end.size(); ++t) {
      CHECK(trace.stage_end[t] > trace.stage_end[t - 1]);
    }
  }
}

TEST_CASE("run_scenario enumerates replicates deterministically") {
  PerfScenario sc;
  sc.b = 2;
  sc.w = 4;
  sc.stop_count = 12;
  sc.curve.total = 50;
  sc.run_model.kind = RunTimeKind::TruncatedNormal;
  sc.run_model.mean = 1.0;
  sc.run_model.stddev = 0.4;
  sc.run_model.floor = 0.0;
  sc.run_model.seed = 9;
  sc.replicates = 5;

  const auto traces = run_scenario(sc);
  REQUIRE(traces.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(traces[i].replicate == i + 1);
    CHECK(traces_identical(traces[i], simulate(sc, i + 1)));
  }
  // Replicates differ when the run-time model is stochastic.
  CHECK(traces[0].stage_end != traces[1].stage_end);
}
