#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "seqcal/metrics.hpp"

using namespace seqcal;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

JobRecord job(std::size_t id, double output, double complete) {
  JobRecord j;
  j.job_id = id;
  j.output = output;
  j.complete_time = complete;
  return j;
}

StageRecord stage(std::size_t t, std::size_t n_t, double delta, double mad) {
  StageRecord s;
  s.stage = t;
  s.n_t = n_t;
  s.delta_t = delta;
  s.mad_t = mad;
  return s;
}

}  // namespace

TEST_CASE("median and quartiles interpolate linearly between order statistics") {
  CHECK(median({5.0}) == 5.0);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));

  const Quartiles q4 = quartiles({4.0, 1.0, 3.0, 2.0});
  CHECK(q4.q1 == doctest::Approx(1.75));
  CHECK(q4.median == doctest::Approx(2.5));
  CHECK(q4.q3 == doctest::Approx(3.25));

  const Quartiles q3 = quartiles({1.0, 2.0, 3.0});
  CHECK(q3.q1 == doctest::Approx(1.5));
  CHECK(q3.q3 == doctest::Approx(2.5));

  const Quartiles q1 = quartiles({7.0});
  CHECK(q1.q1 == 7.0);
  CHECK(q1.q3 == 7.0);

  CHECK_THROWS_AS(median({}), std::invalid_argument);
  CHECK_THROWS_AS(quartiles({}), std::invalid_argument);
}

TEST_CASE("delta series scans completions in time order and skips failures") {
  DesignTrace trace;
  trace.y = 10.0;
  trace.jobs = {job(1, 7.0, 3.0), job(2, 15.0, 1.0), job(3, 11.0, 2.0), job(4, kNaN, 0.0)};

  const MetricSeries series = delta_series(trace);
  CHECK(series.x_unit == "evaluations");
  CHECK(series.y_unit == "error");
  REQUIRE(series.points.size() == 3);  // the NaN job never completed
  // Completion order: job 2 (|10-15|=5), job 3 (1), job 1 (3); running min.
  CHECK(series.points[0].x == 1.0);
  CHECK(series.points[0].y == 5.0);
  CHECK(series.points[1].y == 1.0);
  CHECK(series.points[2].y == 1.0);
}

TEST_CASE("delta series breaks completion-time ties by job id") {
  DesignTrace trace;
  trace.y = 0.0;
  trace.jobs = {job(2, 1.0, 5.0), job(1, 3.0, 5.0)};
  const MetricSeries series = delta_series(trace);
  REQUIRE(series.points.size() == 2);
  CHECK(series.points[0].y == 3.0);  // id 1 first despite equal times
  CHECK(series.points[1].y == 1.0);
}

TEST_CASE("mad series keeps only finite stage values") {
  DesignTrace trace;
  trace.stages = {stage(1, 1, 0.9, 0.5), stage(2, 2, 0.8, kNaN), stage(3, 3, 0.7, 0.2)};
  const MetricSeries series = mad_series(trace);
  REQUIRE(series.points.size() == 2);
  CHECK(series.points[0].x == 1.0);
  CHECK(series.points[0].y == 0.5);
  CHECK(series.points[1].x == 3.0);
  CHECK(series.points[1].y == 0.2);
}

TEST_CASE("aggregates take per-stage quartiles across replicates") {
  DesignTrace a, b, c;
  a.stages = {stage(1, 1, 4.0, 0.4), stage(2, 2, 2.0, 0.2)};
  b.stages = {stage(1, 1, 6.0, kNaN), stage(2, 2, 3.0, 0.3)};
  c.stages = {stage(1, 1, 5.0, 0.6), stage(2, 2, 1.0, 0.1), stage(3, 3, 0.5, 0.05)};

  const MetricSeries delta = aggregate_delta({a, b, c}, "d");
  REQUIRE(delta.points.size() == 2);  // truncated to the shortest replicate
  CHECK(delta.points[0].x == 1.0);
  CHECK(delta.points[0].y == 5.0);  // median of {4, 6, 5}
  CHECK(delta.points[1].y == 2.0);  // median of {2, 3, 1}
  CHECK(delta.points[1].y_lo == doctest::Approx(1.5));
  CHECK(delta.points[1].y_hi == doctest::Approx(2.5));

  const MetricSeries mad = aggregate_mad({a, b, c}, "m");
  REQUIRE(mad.points.size() == 2);
  CHECK(mad.points[0].y == doctest::Approx(0.5));  // median of the finite {0.4, 0.6}
  CHECK(mad.points[1].y == doctest::Approx(0.2));
}

TEST_CASE("makespan is the last event in the trace") {
  PerfTrace trace;
  trace.stage_end = {1.0, 2.0};
  PerfJob j1;
  j1.id = 1;
  j1.end_time = 3.5;
  PerfJob j2;
  j2.id = 2;
  j2.end_time = 1.5;
  trace.jobs = {j1, j2};
  CHECK(makespan(trace) == 3.5);
  trace.jobs.clear();
  CHECK(makespan(trace) == 2.0);
}

TEST_CASE("wallclock error curve medians ranks and collapses duplicate x") {
  ProgressCurve curve;
  curve.exponent = 1.0;
  curve.total = 4;  // error after j: 0.75, 0.5, 0.25, 0

  PerfTrace t;
  for (const double end : {2.0, 1.0, 2.0, 3.0}) {
    PerfJob j;
    j.id = t.jobs.size() + 1;
    j.end_time = end;
    t.jobs.push_back(j);
  }
  const MetricSeries single = wallclock_error_curve({t}, curve, "s");
  REQUIRE(single.points.size() == 3);
  CHECK(single.points[0].x == 1.0);
  CHECK(single.points[0].y == doctest::Approx(0.75));
  CHECK(single.points[1].x == 2.0);
  CHECK(single.points[1].y == doctest::Approx(0.25));  // rank 3 overwrote rank 2
  CHECK(single.points[2].x == 3.0);
  CHECK(single.points[2].y == doctest::Approx(0.0));

  // Across replicates the x of rank j is the median of the j-th order stats.
  PerfTrace u;
  for (const double end : {4.0, 5.0, 6.0, 7.0}) {
    PerfJob j;
    j.id = u.jobs.size() + 1;
    j.end_time = end;
    u.jobs.push_back(j);
  }
  const MetricSeries pair = wallclock_error_curve({t, u}, curve, "p");
  REQUIRE(pair.points.size() == 4);
  CHECK(pair.points[0].x == doctest::Approx(2.5));  // median of {1, 4}
  CHECK(pair.points[1].x == doctest::Approx(3.5));  // median of {2, 5}
  for (std::size_t j = 1; j < pair.points.size(); ++j) {
    CHECK(pair.points[j].x > pair.points[j - 1].x);
  }
}

TEST_CASE("speedup is measured against the smallest worker count per batch size") {
  std::map<std::pair<std::size_t, std::size_t>, double> makespans{
      {{1, 1}, 10.0}, {{2, 1}, 6.0}, {{4, 1}, 2.5}, {{2, 2}, 8.0}, {{8, 2}, 2.0}};
  const auto s = speedup(makespans);
  CHECK(s.at({1, 1}) == doctest::Approx(1.0));
  CHECK(s.at({2, 1}) == doctest::Approx(10.0 / 6.0));
  CHECK(s.at({4, 1}) == doctest::Approx(4.0));
  CHECK(s.at({2, 2}) == doctest::Approx(1.0));
  CHECK(s.at({8, 2}) == doctest::Approx(4.0));
  CHECK_THROWS_AS(speedup({}), std::invalid_argument);
}

TEST_CASE("idle time and computing hours on a hand-worked schedule") {
  // The w=2, b=1, unit-runtime, a=0.25 schedule worked out job by job.
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

  // Waits: 0.25 + 0.5 + 0.25 + 0.25 (consumed) + 0.25 + 0 (drained), over w=2.
  CHECK(idle_time(trace, sc.w) == doctest::Approx(0.75));
  CHECK(computing_hours(trace, sc.w) == doctest::Approx(2.0 * 3.75));
}
