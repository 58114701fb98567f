#include "seqcal/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqcal/rng.hpp"
#include "seqcal/stats.hpp"

namespace seqcal {

namespace {

double seconds_since(std::chrono::steady_clock::time_point epoch) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch).count();
}

}  // namespace

ClockMode clock_mode_from_string(const std::string& name) {
  if (name == "measured") return ClockMode::Measured;
  if (name == "virtual") return ClockMode::Virtual;
  throw std::invalid_argument("unknown clock mode: " + name);
}

std::string to_string(ClockMode mode) {
  return mode == ClockMode::Measured ? "measured" : "virtual";
}

void EngineConfig::validate() const {
  if (b < 1 || b > w) throw std::invalid_argument("engine config requires 1 <= b <= w");
  if (w > n) throw std::invalid_argument("engine config requires w <= n");
  if (n0 < 2) throw std::invalid_argument("engine config requires n0 >= 2");
  if (spec.candidate_count < 1) throw std::invalid_argument("candidate_count must be >= 1");
  if (spec.reference_count < 1) throw std::invalid_argument("reference_count must be >= 1");
}

WorkerPool::WorkerPool(Simulator simulator, std::size_t workers,
                       std::chrono::steady_clock::time_point epoch)
    : simulator_(std::move(simulator)), epoch_(epoch) {
  threads_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stopping_ = true;
    queue_.clear();
  }
  task_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::submit(std::size_t job_id, std::vector<double> theta) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    outstanding_seqs_.push_back(next_seq_);
    queue_.push_back(Task{job_id, next_seq_++, std::move(theta)});
  }
  task_cv_.notify_one();
}

void WorkerPool::worker_loop() {
  for (;;) {
    Task task;
    {
      std::unique_lock<std::mutex> lock(mu_);
      task_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_ && queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    Result r;
    r.job_id = task.job_id;
    r.submit_seq = task.submit_seq;
    try {
      r.output = simulator_(task.theta);
      if (!std::isfinite(r.output)) {
        r.failed = true;
        r.error = "simulator returned a non-finite value";
      }
    } catch (const std::exception& e) {
      r.failed = true;
      r.error = e.what();
    }
    r.complete_time = seconds_since(epoch_);
    {
      std::lock_guard<std::mutex> lock(mu_);
      completed_.push_back(std::move(r));
    }
    done_cv_.notify_all();
  }
}

std::vector<WorkerPool::Result> WorkerPool::take_earliest(std::size_t k) {
  std::unique_lock<std::mutex> lock(mu_);
  done_cv_.wait(lock, [&] { return completed_.size() >= k; });
  std::sort(completed_.begin(), completed_.end(), [](const Result& a, const Result& b) {
    if (a.complete_time != b.complete_time) return a.complete_time < b.complete_time;
    return a.submit_seq < b.submit_seq;
  });
  std::vector<Result> out(completed_.begin(), completed_.begin() + static_cast<std::ptrdiff_t>(k));
  completed_.erase(completed_.begin(), completed_.begin() + static_cast<std::ptrdiff_t>(k));
  for (const auto& r : out) {
    outstanding_seqs_.erase(
        std::find(outstanding_seqs_.begin(), outstanding_seqs_.end(), r.submit_seq));
  }
  return out;
}

std::vector<WorkerPool::Result> WorkerPool::take_oldest(std::size_t k) {
  std::unique_lock<std::mutex> lock(mu_);
  // The k oldest outstanding jobs are those with the k smallest submit_seq;
  // seqs are issued in order, so they sit at the front of outstanding_seqs_.
  const std::vector<std::size_t> wanted(outstanding_seqs_.begin(),
                                        outstanding_seqs_.begin() + static_cast<std::ptrdiff_t>(k));
  auto all_done = [&] {
    for (std::size_t seq : wanted) {
      const bool found = std::any_of(completed_.begin(), completed_.end(),
                                     [&](const Result& r) { return r.submit_seq == seq; });
      if (!found) return false;
    }
    return true;
  };
  done_cv_.wait(lock, all_done);
  std::vector<Result> out;
  out.reserve(k);
  for (std::size_t seq : wanted) {
    auto it = std::find_if(completed_.begin(), completed_.end(),
                           [&](const Result& r) { return r.submit_seq == seq; });
    out.push_back(std::move(*it));
    completed_.erase(it);
  }
  outstanding_seqs_.erase(outstanding_seqs_.begin(),
                          outstanding_seqs_.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

std::size_t WorkerPool::outstanding() const {
  std::lock_guard<std::mutex> lock(mu_);
  return outstanding_seqs_.size();
}

std::vector<Sample> initial_design(const CalibrationProblem& problem, std::size_t n0,
                                   std::uint64_t seed) {
  if (n0 < 2) throw std::invalid_argument("initial_design requires n0 >= 2");
  RandomStream rng(seed);
  std::vector<Sample> out;
  out.reserve(n0);
  for (std::size_t i = 0; i < n0; ++i) {
    Sample s;
    s.theta = sample_uniform(problem.space, rng);
    s.output = problem.evaluate(s.theta);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::vector<double>> mad_reference_grid(const ParameterSpace& space,
                                                    std::size_t per_axis) {
  const std::size_t p = space.dim();
  std::vector<std::vector<double>> axes(p);
  for (std::size_t l = 0; l < p; ++l) {
    axes[l].reserve(per_axis);
    for (std::size_t i = 0; i < per_axis; ++i) {
      const double frac =
          per_axis == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(per_axis - 1);
      axes[l].push_back(space.lower[l] + frac * (space.upper[l] - space.lower[l]));
    }
  }
  std::vector<std::vector<double>> grid;
  std::vector<std::size_t> idx(p, 0);
  const std::size_t total = [&] {
    std::size_t t = 1;
    for (std::size_t l = 0; l < p; ++l) t *= per_axis;
    return t;
  }();
  grid.reserve(total);
  for (std::size_t count = 0; count < total; ++count) {
    std::vector<double> point(p);
    for (std::size_t l = 0; l < p; ++l) point[l] = axes[l][idx[l]];
    grid.push_back(std::move(point));
    for (std::size_t l = p; l-- > 0;) {
      if (++idx[l] < per_axis) break;
      idx[l] = 0;
    }
  }
  return grid;
}

double mad_value(const GpPosterior& gp, const CalibrationProblem& problem,
                 const std::vector<std::vector<double>>& grid,
                 const std::vector<double>& true_values) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd X(m, static_cast<Eigen::Index>(grid.front().size()));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index l = 0; l < X.cols(); ++l) {
      X(i, l) = grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
    }
  }
  Eigen::VectorXd mean, var;
  gp.predict_many(X, mean, var);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& theta = grid[static_cast<std::size_t>(i)];
    const double est = gaussian_density(problem.y, mean(i), problem.noise_var + var(i)) *
                       problem.prior_density(theta);
    acc += std::fabs(true_values[static_cast<std::size_t>(i)] - est);
  }
  return acc / static_cast<double>(m);
}

DesignTrace run_design(const CalibrationProblem& problem, const EngineConfig& config) {
  config.validate();

  DesignTrace trace;
  trace.replicate_id = config.replicate_id;
  trace.problem = problem.name;
  trace.y = problem.y;
  trace.noise_var = problem.noise_var;
  trace.n0 = config.n0;
  trace.n = config.n;
  trace.b = config.b;
  trace.w = config.w;
  trace.seeds = config.seeds;
  trace.clock = config.clock;
  trace.spec = config.spec;

  const bool is_virtual = config.clock == ClockMode::Virtual;
  const auto epoch = std::chrono::steady_clock::now();
  double vclock = 0.0;  // event ordinal counter in virtual mode

  const std::uint64_t rep = static_cast<std::uint64_t>(config.replicate_id);
  RandomStream init_rng(derive_seed(config.seeds.init, rep));

  std::vector<Sample> data;
  data.reserve(config.n0 + config.n);

  // Initial design: evaluated serially, recorded before any pool job.
  try {
    for (std::size_t i = 0; i < config.n0; ++i) {
      JobRecord rec;
      rec.job_id = i + 1;
      rec.stage = 0;
      rec.theta = sample_uniform(problem.space, init_rng);
      rec.submit_time = is_virtual ? 0.0 : seconds_since(epoch);
      rec.output = problem.evaluate(rec.theta);
      rec.complete_time = is_virtual ? (vclock += 1.0) : seconds_since(epoch);
      data.push_back(Sample{rec.theta, rec.output});
      trace.jobs.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    trace.error = e.what();
    return trace;
  }

  // MAD references (true posterior needs simulator calls; bookkeeping only).
  std::vector<std::vector<double>> mad_grid;
  std::vector<double> mad_truth;
  if (config.compute_mad) {
    try {
      mad_grid = mad_reference_grid(problem.space, config.mad_grid);
      mad_truth.reserve(mad_grid.size());
      for (const auto& theta : mad_grid) {
        mad_truth.push_back(problem.unnormalized_posterior(theta, problem.evaluate(theta)));
      }
    } catch (const std::exception& e) {
      trace.error = e.what();
      return trace;
    }
  }

  // EIVAR reference set: one draw per run.
  std::vector<std::vector<double>> theta_ref;
  if (config.spec.kind == AcqKind::EIVAR || config.spec.kind == AcqKind::HYBRID) {
    RandomStream ref_rng(derive_seed(config.seeds.rng, rep, 0xefull));
    theta_ref = sample_uniform(problem.space, config.spec.reference_count, ref_rng);
  }

  const std::uint64_t batch_seed = derive_seed(config.seeds.candidates, rep);

  WorkerPool pool([&problem](const std::vector<double>& theta) { return problem.simulator(theta); },
                  config.w, epoch);

  std::size_t submitted = 0;
  std::size_t consumed = 0;
  std::size_t next_job_id = config.n0 + 1;

  auto submit_theta = [&](std::vector<double> theta, std::size_t stage) {
    JobRecord rec;
    rec.job_id = next_job_id++;
    rec.stage = stage;
    rec.theta = theta;
    rec.output = std::numeric_limits<double>::quiet_NaN();
    rec.submit_time = is_virtual ? vclock : seconds_since(epoch);
    trace.jobs.push_back(rec);
    pool.submit(rec.job_id, std::move(theta));
    ++submitted;
  };

  // Initial wave: w prior draws, continuing the init stream.
  for (std::size_t i = 0; i < config.w; ++i) submit_theta(sample_uniform(problem.space, init_rng), 0);

  std::optional<KernelParams> warm;
  std::size_t t = 0;

  const bool deterministic_order = is_virtual || config.b == config.w;

  while (consumed < config.n) {
    const std::size_t k = std::min(config.b, submitted - consumed);
    auto results = deterministic_order ? pool.take_oldest(k) : pool.take_earliest(k);
    ++t;

    for (auto& r : results) {
      JobRecord& rec = trace.jobs[r.job_id - 1];
      if (r.failed) {
        trace.error = r.error;
        return trace;
      }
      rec.output = r.output;
      rec.complete_time = is_virtual ? (vclock += 1.0) : r.complete_time;
      data.push_back(Sample{rec.theta, rec.output});
    }
    consumed += k;

    const double t_fit0 = seconds_since(epoch);
    FitConfig fit;
    fit.seed = derive_seed(config.seeds.rng, rep, 0xf17ull, static_cast<std::uint64_t>(t));
    fit.max_iter = config.fit_max_iter;
    const bool fresh = (t == 1) || (config.fresh_fit_every > 0 && t % config.fresh_fit_every == 0);
    fit.multistarts = fresh ? config.fit_multistarts : 0;
    fit.warm_start = warm;
    GpPosterior gp = GpPosterior::fit(data, fit);
    warm = gp.params();
    const double fit_elapsed = seconds_since(epoch) - t_fit0;

    const double delta = best_loss(problem, data);
    const double mad = config.compute_mad ? mad_value(gp, problem, mad_grid, mad_truth)
                                          : std::numeric_limits<double>::quiet_NaN();

    const std::size_t acquire = std::min(config.b, config.n - submitted);
    double batch_elapsed = 0.0;
    if (acquire > 0) {
      const double t_batch0 = seconds_since(epoch);
      auto picks =
          build_batch(config.spec, gp, problem, t, acquire, delta, theta_ref, batch_seed);
      batch_elapsed = seconds_since(epoch) - t_batch0;
      for (auto& theta : picks) submit_theta(std::move(theta), t);
    }

    StageRecord stage;
    stage.stage = t;
    stage.n_t = consumed;
    stage.acquired = acquire;
    stage.acq_time = is_virtual ? 0.0 : fit_elapsed + batch_elapsed;
    stage.delta_t = delta;
    stage.mad_t = mad;
    stage.gp = gp.params();
    trace.stages.push_back(std::move(stage));
  }

  trace.complete = true;
  return trace;
}

}  // namespace seqcal
