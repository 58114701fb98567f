#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "seqcal/problem.hpp"

namespace seqcal {

// Hyperparameters of the separable Matern-1.5 kernel
//   k(a, b) = scale * prod_l (1 + d_l) * exp(-sum_l d_l),
//   d_l = |a_l - b_l| * exp(log_lengthscales[l]),
// plus an additive nugget on the kernel-matrix diagonal.
struct KernelParams {
  std::vector<double> log_lengthscales;
  double scale = 1.0;   // tau^2 > 0
  double nugget = 1e-8; // upsilon > 0
};

struct FitConfig {
  int multistarts = 4;
  std::uint64_t seed = 0;
  int max_iter = 100;
  // Extra optimizer start, typically the previous stage's fit.
  std::optional<KernelParams> warm_start;
};

double matern_correlation(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<double>& log_lengthscales);

struct Prediction {
  double mean = 0.0;
  double var = 0.0;
};

// Log marginal likelihood of centered outputs under the kernel with
// phi = [zeta_1..zeta_p, log scale, log nugget], and its gradient in phi.
// ok=false flags a kernel matrix that lost positive definiteness.
struct LmlResult {
  double value = 0.0;
  Eigen::VectorXd grad;
  bool ok = false;
};

LmlResult log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_centered,
                                  const Eigen::VectorXd& phi);

// Zero-mean GP conditioned on evaluated samples. Outputs are centered by
// their sample mean before conditioning; predictions add the center back.
// Immutable after construction and safe for concurrent reads.
class GpPosterior {
 public:
  // Maximizes the log marginal likelihood with seeded multi-start BFGS.
  static GpPosterior fit(const std::vector<Sample>& data, const FitConfig& config);

  // Conditions on the data with fixed hyperparameters and a fixed output
  // center; used for hallucinated refits during batch construction.
  static GpPosterior with_params(const std::vector<Sample>& data, const KernelParams& params,
                                 double center);

  Prediction predict(const std::vector<double>& theta) const;

  // Means and variances at the rows of X (one point per row).
  void predict_many(const Eigen::MatrixXd& X, Eigen::VectorXd& mean, Eigen::VectorXd& var) const;

  // cov(theta, theta_star) under the posterior.
  double posterior_cov(const std::vector<double>& theta,
                       const std::vector<double>& theta_star) const;

  // cov(theta, theta_star)^2 / (s^2(theta_star) + nugget): the variance at
  // theta explained by observing theta_star.
  double tau_sq(const std::vector<double>& theta, const std::vector<double>& theta_star) const;

  // Prior kernel value scale * c(a, b), no nugget.
  double kernel(const std::vector<double>& a, const std::vector<double>& b) const;

  // n x m matrix of kernel values between training inputs and the rows of A.
  Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& A) const;

  // Kernel values between the rows of A and the rows of B.
  Eigen::MatrixXd pair_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const;

  // K^{-1} B through the cached factorization.
  Eigen::MatrixXd solve_kernel(const Eigen::MatrixXd& B) const;

  const KernelParams& params() const { return params_; }
  double output_center() const { return center_; }
  const Eigen::MatrixXd& train_inputs() const { return X_; }
  const Eigen::VectorXd& train_outputs() const { return y_; }
  Eigen::Index size() const { return X_.rows(); }

 private:
  GpPosterior(Eigen::MatrixXd X, Eigen::VectorXd y, KernelParams params, double center);

  Eigen::VectorXd kvec(const std::vector<double>& theta) const;

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;  // raw outputs
  KernelParams params_;
  double center_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;  // K^{-1} (y - center)
};

}  // namespace seqcal
