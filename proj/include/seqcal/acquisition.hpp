#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqcal/gp.hpp"
#include "seqcal/problem.hpp"

namespace seqcal {

enum class AcqKind { PI, EI, EIVAR, HYBRID, RND };
enum class LiarRule { MeanOutput, MinOutput, MaxOutput };

AcqKind acq_kind_from_string(const std::string& name);
std::string to_string(AcqKind kind);
LiarRule liar_rule_from_string(const std::string& name);
std::string to_string(LiarRule rule);

struct AcquisitionSpec {
  AcqKind kind = AcqKind::EI;
  std::size_t candidate_count = 1000;
  std::size_t reference_count = 1000;  // EIVAR reference set size
  bool eivar_on_even = true;           // HYBRID: EIVAR on even stages, EI on odd
  LiarRule liar = LiarRule::MeanOutput;
};

// Sub-stream tags of build_batch: pick i at stage t draws its candidate list
// from RandomStream(derive_seed(seed, kCandidateStream, t, i)) and its RND
// index from RandomStream(derive_seed(seed, kRndStream, t, i)).
inline constexpr std::uint64_t kCandidateStream = 0xca2dull;
inline constexpr std::uint64_t kRndStream = 0x12ddull;

// delta_t: smallest |y - output| over the evaluated samples.
double best_loss(const CalibrationProblem& problem, const std::vector<Sample>& samples);

// Probability that the unseen loss |y - eta(theta_star) - noise| beats delta.
double prob_improvement(const GpPosterior& gp, const CalibrationProblem& problem,
                        const std::vector<double>& theta_star, double delta);

// Expected amount by which that loss exceeds delta.
double expected_unimprovement(const GpPosterior& gp, const CalibrationProblem& problem,
                              const std::vector<double>& theta_star, double delta);

// Expected aggregated posterior-density variance after hypothetically
// evaluating theta_star, averaged over the reference points.
double eivar(const GpPosterior& gp, const CalibrationProblem& problem,
             const std::vector<double>& theta_star,
             const std::vector<std::vector<double>>& theta_ref);

// eivar for every candidate at once; matches the scalar version pointwise.
std::vector<double> eivar_scores(const GpPosterior& gp, const CalibrationProblem& problem,
                                 const std::vector<std::vector<double>>& candidates,
                                 const std::vector<std::vector<double>>& theta_ref);

// The criterion HYBRID runs at stage t.
AcqKind hybrid_dispatch(const AcquisitionSpec& spec, std::size_t t);

// Index of the minimizer of the stage-t criterion over the candidate list;
// PI is negated so smaller is better for every kind. Ties go to the lowest
// index. rnd_seed feeds only the RND draw.
std::size_t score_candidates(const AcquisitionSpec& spec, const GpPosterior& gp,
                             const CalibrationProblem& problem, std::size_t t,
                             const std::vector<std::vector<double>>& candidates, double delta,
                             const std::vector<std::vector<double>>& theta_ref,
                             std::uint64_t rnd_seed);

// Constant-liar batch: b picks, each from a fresh candidate list, with the
// working emulator refit between picks on the data augmented by earlier picks
// at the liar output (hyperparameters and center frozen at the stage fit).
std::vector<std::vector<double>> build_batch(const AcquisitionSpec& spec, const GpPosterior& gp,
                                             const CalibrationProblem& problem, std::size_t t,
                                             std::size_t b, double delta,
                                             const std::vector<std::vector<double>>& theta_ref,
                                             std::uint64_t seed);

}  // namespace seqcal
