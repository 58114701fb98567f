#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "seqcal/acquisition.hpp"
#include "seqcal/gp.hpp"
#include "seqcal/problem.hpp"

namespace seqcal {

struct SeedTriple {
  std::uint64_t init = 1;        // initial design and first wave
  std::uint64_t candidates = 2;  // candidate lists (and the RND stream derived from them)
  std::uint64_t rng = 3;         // EIVAR reference set, fit multistart jitter
};

// measured: wall-clock seconds; virtual: deterministic event ordinals, for
// byte-identical replay of trace files.
enum class ClockMode { Measured, Virtual };

ClockMode clock_mode_from_string(const std::string& name);
std::string to_string(ClockMode mode);

struct EngineConfig {
  std::size_t n0 = 10;  // initial design size, not counted against n
  std::size_t n = 100;  // evaluation budget
  std::size_t b = 1;
  std::size_t w = 1;
  AcquisitionSpec spec;
  SeedTriple seeds;
  int replicate_id = 1;
  ClockMode clock = ClockMode::Measured;
  bool compute_mad = true;
  std::size_t mad_grid = 50;       // per-axis resolution of the MAD reference grid
  int fit_multistarts = 4;
  int fit_max_iter = 100;
  std::size_t fresh_fit_every = 10;  // full multistart cadence; warm-start otherwise

  // Throws std::invalid_argument unless 1 <= b <= w <= n and n0 >= 2.
  void validate() const;
};

struct JobRecord {
  std::size_t job_id = 0;  // 1-based; ids 1..n0 are the initial design
  std::size_t stage = 0;   // submitting stage, 0 for initial design and first wave
  std::vector<double> theta;
  double output = 0.0;
  double submit_time = 0.0;
  double complete_time = 0.0;
};

struct StageRecord {
  std::size_t stage = 0;     // t = 1..
  std::size_t n_t = 0;       // consumed evaluations beyond n0 after this stage
  std::size_t acquired = 0;  // new jobs submitted this stage (0 while draining)
  double acq_time = 0.0;     // emulator fit plus batch selection, seconds
  double delta_t = 0.0;
  double mad_t = 0.0;  // NaN when MAD is disabled
  KernelParams gp;
};

struct DesignTrace {
  int replicate_id = 1;
  std::string problem;
  double y = 0.0;
  double noise_var = 1.0;
  std::size_t n0 = 0, n = 0, b = 0, w = 0;
  SeedTriple seeds;
  ClockMode clock = ClockMode::Measured;
  AcquisitionSpec spec;
  std::vector<JobRecord> jobs;      // initial design rows first, then submissions
  std::vector<StageRecord> stages;
  bool complete = false;
  std::string error;  // simulator failure message when incomplete
};

// In-process pool of w evaluation slots. Each slot runs one simulator call at
// a time; completions are timestamped against the pool's epoch.
class WorkerPool {
 public:
  using Simulator = std::function<double(const std::vector<double>&)>;

  struct Result {
    std::size_t job_id = 0;
    std::size_t submit_seq = 0;
    double output = 0.0;
    double complete_time = 0.0;
    bool failed = false;
    std::string error;
  };

  WorkerPool(Simulator simulator, std::size_t workers,
             std::chrono::steady_clock::time_point epoch = std::chrono::steady_clock::now());
  ~WorkerPool();

  void submit(std::size_t job_id, std::vector<double> theta);

  // Blocks until k jobs have completed; returns the k earliest completions
  // ordered by (complete_time, submit_seq).
  std::vector<Result> take_earliest(std::size_t k);

  // Blocks until the k oldest-submitted outstanding jobs have completed and
  // returns them in submission order. Deterministic consumption order.
  std::vector<Result> take_oldest(std::size_t k);

  std::size_t outstanding() const;

 private:
  struct Task {
    std::size_t job_id;
    std::size_t submit_seq;
    std::vector<double> theta;
  };

  void worker_loop();

  Simulator simulator_;
  std::chrono::steady_clock::time_point epoch_;
  mutable std::mutex mu_;
  std::condition_variable task_cv_;
  std::condition_variable done_cv_;
  std::deque<Task> queue_;
  std::vector<Result> completed_;
  std::vector<std::size_t> outstanding_seqs_;  // sorted; seqs issued in order
  std::size_t next_seq_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

// n0 uniform-prior draws evaluated through the simulator.
std::vector<Sample> initial_design(const CalibrationProblem& problem, std::size_t n0,
                                   std::uint64_t seed);

// Runs the sequential design loop against a pool of w workers: an initial
// wave of w prior draws, then stages that each consume the b earliest
// completions, refit the emulator, and acquire/submit min(b, n - submitted)
// new parameter sets until n evaluations are consumed. A simulator failure
// stops the run and returns the partial trace with complete=false.
DesignTrace run_design(const CalibrationProblem& problem, const EngineConfig& config);

// MAD between the true unnormalized posterior values and the emulator-based
// estimate f_N(y; m, sigma^2 + s^2) * prior over the given points.
double mad_value(const GpPosterior& gp, const CalibrationProblem& problem,
                 const std::vector<std::vector<double>>& grid,
                 const std::vector<double>& true_values);

// Evenly spaced per-axis grid over the box, including endpoints.
std::vector<std::vector<double>> mad_reference_grid(const ParameterSpace& space,
                                                    std::size_t per_axis);

}  // namespace seqcal
