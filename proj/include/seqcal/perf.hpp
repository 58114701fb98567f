#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seqcal {

// Requested accuracy is never reached within the curve's budget.
class InfeasibleTarget : public std::runtime_error {
 public:
  explicit InfeasibleTarget(const std::string& what) : std::runtime_error(what) {}
};

enum class CurveKind { Exponential, Empirical, PiecewiseBatch };

// Calibration error after j of total evaluations. The exponential form is
// 1 - (j/total)^exponent. PiecewiseBatch freezes its base curve between stage
// boundaries of width batch; the base is the exponential form unless a table
// is present, in which case the table is the base.
struct ProgressCurve {
  CurveKind kind = CurveKind::Exponential;
  double exponent = 0.1;
  std::size_t total = 1280;
  std::vector<std::pair<std::size_t, double>> table;  // (evaluations, error), ascending
  std::size_t batch = 1;                              // PiecewiseBatch stage width
};

double error_at(const ProgressCurve& curve, std::size_t j);

// Smallest j with error_at(j) <= alpha; for PiecewiseBatch the smallest stage
// boundary whose frozen error qualifies. Throws InfeasibleTarget otherwise.
std::size_t evals_to_accuracy(const ProgressCurve& curve, double alpha);

enum class AcqTimeKind { Constant, Linear, Quadratic };

// Acquisition time per stage: the first pick of stage t (job j = 1 + b(t-1))
// pays the kind's formula in x = j/n; the remaining b-1 picks pay
// tail_constant each. A nonempty measured series replays recorded per-stage
// times instead, falling back to their mean past the series' end.
struct AcqTimeModel {
  AcqTimeKind kind = AcqTimeKind::Constant;
  double a = 0.25;
  double b = 0.0;
  double c = 0.0;
  double tail_constant = 0.25;
  std::vector<double> measured;  // a(b,t) for t = 1.., replayed when nonempty
};

double acq_time(const AcqTimeModel& model, std::size_t b, std::size_t t, std::size_t n);

enum class RunTimeKind { Constant, TruncatedNormal };

struct RunTimeModel {
  RunTimeKind kind = RunTimeKind::Constant;
  double mean = 1.0;
  double stddev = 0.0;
  double floor = 0.0;
  std::uint64_t seed = 0;
};

// s_{omega,j}: pure function of (model.seed, omega, j).
double sample_runtime(const RunTimeModel& model, std::uint64_t omega, std::uint64_t j);

struct PerfScenario {
  std::size_t b = 1;
  std::size_t w = 1;
  std::string acq_label = "hybrid";
  std::size_t stop_count = 0;  // n_k(b, alpha)
  ProgressCurve curve;
  AcqTimeModel acq_model;
  RunTimeModel run_model;
  std::size_t replicates = 30;

  // Throws std::invalid_argument unless b <= w <= stop_count.
  void validate() const;
};

struct PerfJob {
  std::size_t id = 0;     // creation order, 1-based
  std::size_t stage = 0;  // creating stage; 0 for the initial wave
  double end_time = 0.0;  // c^J
  std::ptrdiff_t consumed_by = -1;  // consuming stage, -1 if never consumed
};

struct PerfTrace {
  std::size_t replicate = 0;
  std::vector<PerfJob> jobs;          // all created jobs, id order
  std::vector<double> stage_end;      // c^S_t for t = 1..
  std::vector<std::size_t> pending_sizes;  // |P| after each stage's resubmission
  std::size_t n_target = 0;           // n_k(b, alpha)
  std::size_t final_count = 0;        // n_t at stop; overshoots by at most b-1
};

// One replicate of the Monte Carlo performance model: submit w jobs, then
// per stage consume the b pending jobs with smallest end time (ties by id),
// advance the stage clock by the acquisition time, and resubmit b jobs,
// until stop_count jobs have been created.
PerfTrace simulate(const PerfScenario& scenario, std::size_t omega);

std::vector<PerfTrace> run_scenario(const PerfScenario& scenario);

}  // namespace seqcal
