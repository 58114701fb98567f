#include "seqcal/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqcal/rng.hpp"
#include "seqcal/stats.hpp"

namespace seqcal {

namespace {

constexpr double kDegenerateFloor = 1e-12;  // |sigma^2 + s^2 - tau^2| below this collapses

Eigen::MatrixXd points_to_matrix(const std::vector<std::vector<double>>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  const auto p = static_cast<Eigen::Index>(pts.front().size());
  Eigen::MatrixXd M(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < p; ++l) M(i, l) = pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
  }
  return M;
}

double eivar_second_term(double prior_sq, double y, double m, double a, double tau2) {
  const double diff = std::fabs(a - tau2);
  if (diff < kDegenerateFloor) return 0.0;
  return prior_sq * gaussian_density(y, m, 0.5 * (a + tau2)) /
         (2.0 * std::sqrt(M_PI) * std::sqrt(diff));
}

double liar_value(LiarRule rule, const Eigen::VectorXd& outputs) {
  switch (rule) {
    case LiarRule::MeanOutput:
      return outputs.mean();
    case LiarRule::MinOutput:
      return outputs.minCoeff();
    case LiarRule::MaxOutput:
      return outputs.maxCoeff();
  }
  return outputs.mean();
}

std::vector<Sample> samples_from_gp(const GpPosterior& gp) {
  std::vector<Sample> out;
  const auto& X = gp.train_inputs();
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Sample s;
    s.theta.resize(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index l = 0; l < X.cols(); ++l) s.theta[static_cast<std::size_t>(l)] = X(i, l);
    s.output = gp.train_outputs()(i);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

AcqKind acq_kind_from_string(const std::string& name) {
  if (name == "pi") return AcqKind::PI;
  if (name == "ei") return AcqKind::EI;
  if (name == "eivar") return AcqKind::EIVAR;
  if (name == "hybrid") return AcqKind::HYBRID;
  if (name == "rnd") return AcqKind::RND;
  throw std::invalid_argument("unknown acquisition: " + name);
}

std::string to_string(AcqKind kind) {
  switch (kind) {
    case AcqKind::PI:
      return "pi";
    case AcqKind::EI:
      return "ei";
    case AcqKind::EIVAR:
      return "eivar";
    case AcqKind::HYBRID:
      return "hybrid";
    case AcqKind::RND:
      return "rnd";
  }
  return "ei";
}

LiarRule liar_rule_from_string(const std::string& name) {
  if (name == "mean-output") return LiarRule::MeanOutput;
  if (name == "min-output") return LiarRule::MinOutput;
  if (name == "max-output") return LiarRule::MaxOutput;
  throw std::invalid_argument("unknown liar rule: " + name);
}

std::string to_string(LiarRule rule) {
  switch (rule) {
    case LiarRule::MeanOutput:
      return "mean-output";
    case LiarRule::MinOutput:
      return "min-output";
    case LiarRule::MaxOutput:
      return "max-output";
  }
  return "mean-output";
}

double best_loss(const CalibrationProblem& problem, const std::vector<Sample>& samples) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) best = std::min(best, std::fabs(problem.y - s.output));
  return best;
}

double prob_improvement(const GpPosterior& gp, const CalibrationProblem& problem,
                        const std::vector<double>& theta_star, double delta) {
  const Prediction pred = gp.predict(theta_star);
  const double u = std::sqrt(problem.noise_var + pred.var);
  const double bias = problem.y - pred.mean;
  return normal_cdf((delta - bias) / u) - normal_cdf((-delta - bias) / u);
}

double expected_unimprovement(const GpPosterior& gp, const CalibrationProblem& problem,
                              const std::vector<double>& theta_star, double delta) {
  const Prediction pred = gp.predict(theta_star);
  const double u = std::sqrt(problem.noise_var + pred.var);
  const double bias = problem.y - pred.mean;
  const double z_hi = (delta - bias) / u;
  const double z_lo = (-delta - bias) / u;
  return (bias - delta) * (1.0 - normal_cdf(z_hi)) + u * normal_pdf(z_hi) +
         (-delta - bias) * normal_cdf(z_lo) + u * normal_pdf(z_lo);
}

double eivar(const GpPosterior& gp, const CalibrationProblem& problem,
             const std::vector<double>& theta_star,
             const std::vector<std::vector<double>>& theta_ref) {
  const double sigma2 = problem.noise_var;
  const double y = problem.y;
  const double star_denom = gp.predict(theta_star).var + gp.params().nugget;
  double acc = 0.0;
  for (const auto& ref : theta_ref) {
    const Prediction pred = gp.predict(ref);
    const double prior = problem.prior_density(ref);
    const double prior_sq = prior * prior;
    const double cov = gp.posterior_cov(ref, theta_star);
    const double tau2 = cov * cov / star_denom;
    const double a = sigma2 + pred.var;
    const double first = prior_sq * gaussian_density(y, pred.mean, 0.5 * sigma2 + pred.var) /
                         (2.0 * std::sqrt(M_PI) * std::sqrt(sigma2));
    acc += first - eivar_second_term(prior_sq, y, pred.mean, a, tau2);
  }
  return acc / static_cast<double>(theta_ref.size());
}

std::vector<double> eivar_scores(const GpPosterior& gp, const CalibrationProblem& problem,
                                 const std::vector<std::vector<double>>& candidates,
                                 const std::vector<std::vector<double>>& theta_ref) {
  const double sigma2 = problem.noise_var;
  const double y = problem.y;
  const auto R = static_cast<Eigen::Index>(theta_ref.size());
  const auto C = static_cast<Eigen::Index>(candidates.size());

  const Eigen::MatrixXd refs = points_to_matrix(theta_ref);
  const Eigen::MatrixXd cands = points_to_matrix(candidates);

  Eigen::VectorXd ref_mean, ref_var, cand_mean, cand_var;
  gp.predict_many(refs, ref_mean, ref_var);
  gp.predict_many(cands, cand_mean, cand_var);

  // cov(ref, cand) = k(ref, cand) - k(ref)^T K^{-1} k(cand), all candidates at once.
  const Eigen::MatrixXd Kr = gp.cross_kernel(refs);
  const Eigen::MatrixXd Kc = gp.cross_kernel(cands);
  const Eigen::MatrixXd cov = gp.pair_kernel(refs, cands) - Kr.transpose() * gp.solve_kernel(Kc);

  Eigen::VectorXd prior_sq(R);
  for (Eigen::Index i = 0; i < R; ++i) {
    const double prior = problem.prior_density(theta_ref[static_cast<std::size_t>(i)]);
    prior_sq(i) = prior * prior;
  }

  double first_mean = 0.0;
  for (Eigen::Index i = 0; i < R; ++i) {
    first_mean += prior_sq(i) * gaussian_density(y, ref_mean(i), 0.5 * sigma2 + ref_var(i)) /
                  (2.0 * std::sqrt(M_PI) * std::sqrt(sigma2));
  }
  first_mean /= static_cast<double>(R);

  std::vector<double> scores(static_cast<std::size_t>(C));
  for (Eigen::Index j = 0; j < C; ++j) {
    const double star_denom = cand_var(j) + gp.params().nugget;
    double second_mean = 0.0;
    for (Eigen::Index i = 0; i < R; ++i) {
      const double tau2 = cov(i, j) * cov(i, j) / star_denom;
      second_mean +=
          eivar_second_term(prior_sq(i), y, ref_mean(i), sigma2 + ref_var(i), tau2);
    }
    scores[static_cast<std::size_t>(j)] = first_mean - second_mean / static_cast<double>(R);
  }
  return scores;
}

AcqKind hybrid_dispatch(const AcquisitionSpec& spec, std::size_t t) {
  const bool even = (t % 2) == 0;
  if (even == spec.eivar_on_even) return AcqKind::EIVAR;
  return AcqKind::EI;
}

std::size_t score_candidates(const AcquisitionSpec& spec, const GpPosterior& gp,
                             const CalibrationProblem& problem, std::size_t t,
                             const std::vector<std::vector<double>>& candidates, double delta,
                             const std::vector<std::vector<double>>& theta_ref,
                             std::uint64_t rnd_seed) {
  AcqKind kind = spec.kind;
  if (kind == AcqKind::HYBRID) kind = hybrid_dispatch(spec, t);

  if (kind == AcqKind::RND) {
    RandomStream rng(rnd_seed);
    return rng.index(candidates.size());
  }

  std::vector<double> scores;
  scores.reserve(candidates.size());
  if (kind == AcqKind::EIVAR) {
    scores = eivar_scores(gp, problem, candidates, theta_ref);
  } else {
    const Eigen::MatrixXd cands = points_to_matrix(candidates);
    Eigen::VectorXd mean, var;
    gp.predict_many(cands, mean, var);
    for (Eigen::Index j = 0; j < cands.rows(); ++j) {
      const double u = std::sqrt(problem.noise_var + var(j));
      const double bias = problem.y - mean(j);
      const double z_hi = (delta - bias) / u;
      const double z_lo = (-delta - bias) / u;
      if (kind == AcqKind::PI) {
        scores.push_back(-(normal_cdf(z_hi) - normal_cdf(z_lo)));
      } else {
        scores.push_back((bias - delta) * (1.0 - normal_cdf(z_hi)) + u * normal_pdf(z_hi) +
                         (-delta - bias) * normal_cdf(z_lo) + u * normal_pdf(z_lo));
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] < scores[best]) best = j;
  }
  return best;
}

std::vector<std::vector<double>> build_batch(const AcquisitionSpec& spec, const GpPosterior& gp,
                                             const CalibrationProblem& problem, std::size_t t,
                                             std::size_t b, double delta,
                                             const std::vector<std::vector<double>>& theta_ref,
                                             std::uint64_t seed) {
  AcqKind kind = spec.kind;
  if (kind == AcqKind::HYBRID) kind = hybrid_dispatch(spec, t);

  const double liar = liar_value(spec.liar, gp.train_outputs());
  std::vector<Sample> working = samples_from_gp(gp);
  const GpPosterior* model = &gp;
  GpPosterior refit = gp;  // holds the hallucinated refits after the first pick

  std::vector<std::vector<double>> picks;
  picks.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    RandomStream cand_rng(derive_seed(seed, kCandidateStream, t, i));
    const auto candidates = sample_uniform(problem.space, spec.candidate_count, cand_rng);
    const std::uint64_t rnd_seed = derive_seed(seed, kRndStream, t, i);

    AcquisitionSpec stage_spec = spec;
    stage_spec.kind = kind;
    const std::size_t idx =
        score_candidates(stage_spec, *model, problem, t, candidates, delta, theta_ref, rnd_seed);
    picks.push_back(candidates[idx]);

    // RND ignores the emulator, so skip the hallucinated refit.
    if (i + 1 < b && kind != AcqKind::RND) {
      working.push_back(Sample{picks.back(), liar});
      refit = GpPosterior::with_params(working, gp.params(), gp.output_center());
      model = &refit;
    }
  }
  return picks;
}

}  // namespace seqcal
