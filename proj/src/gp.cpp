#include "seqcal/gp.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqcal/rng.hpp"

namespace seqcal {

namespace {

constexpr double kNuggetFloorFraction = 1e-8;  // nugget >= this fraction of scale

Eigen::MatrixXd to_matrix(const std::vector<Sample>& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto p = static_cast<Eigen::Index>(data.front().theta.size());
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < p; ++l) X(i, l) = data[i].theta[l];
  }
  return X;
}

Eigen::VectorXd to_outputs(const std::vector<Sample>& data) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = data[i].output;
  return y;
}

// Correlation matrix between the rows of A and B, with the per-dimension
// scaled distances kept for gradient assembly when dists != nullptr.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const Eigen::VectorXd& zeta,
                                   std::vector<Eigen::MatrixXd>* dists = nullptr) {
  const Eigen::Index p = A.cols();
  Eigen::ArrayXXd prod = Eigen::ArrayXXd::Ones(A.rows(), B.rows());
  Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(A.rows(), B.rows());
  if (dists) dists->clear();
  for (Eigen::Index l = 0; l < p; ++l) {
    const double inv_len = std::exp(zeta(l));
    Eigen::ArrayXXd d =
        ((A.col(l).replicate(1, B.rows()) - B.col(l).transpose().replicate(A.rows(), 1)).array())
            .abs() *
        inv_len;
    prod *= 1.0 + d;
    sum += d;
    if (dists) dists->push_back(d.matrix());
  }
  return (prod * (-sum).exp()).matrix();
}

struct LmlProblem {
  const Eigen::MatrixXd* X;
  const Eigen::VectorXd* y;
  // One-point memo: BFGS line searches ask for f and df at the same phi
  // through separate callbacks.
  mutable Eigen::VectorXd memo_phi;
  mutable LmlResult memo;
};

const LmlResult& eval_cached(const LmlProblem& prob, const Eigen::VectorXd& phi) {
  if (prob.memo_phi.size() == phi.size() && prob.memo_phi == phi) return prob.memo;
  prob.memo = log_marginal_likelihood(*prob.X, *prob.y, phi);
  prob.memo_phi = phi;
  return prob.memo;
}

double gsl_f(const gsl_vector* v, void* ctx) {
  const auto* prob = static_cast<LmlProblem*>(ctx);
  Eigen::VectorXd phi(static_cast<Eigen::Index>(v->size));
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = gsl_vector_get(v, i);
  const LmlResult& r = eval_cached(*prob, phi);
  return r.ok ? -r.value : std::numeric_limits<double>::max();
}

void gsl_df(const gsl_vector* v, void* ctx, gsl_vector* g) {
  const auto* prob = static_cast<LmlProblem*>(ctx);
  Eigen::VectorXd phi(static_cast<Eigen::Index>(v->size));
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = gsl_vector_get(v, i);
  const LmlResult& r = eval_cached(*prob, phi);
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    gsl_vector_set(g, i, r.ok ? -r.grad(i) : 0.0);
  }
}

void gsl_fdf(const gsl_vector* v, void* ctx, double* f, gsl_vector* g) {
  const auto* prob = static_cast<LmlProblem*>(ctx);
  Eigen::VectorXd phi(static_cast<Eigen::Index>(v->size));
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = gsl_vector_get(v, i);
  const LmlResult& r = eval_cached(*prob, phi);
  *f = r.ok ? -r.value : std::numeric_limits<double>::max();
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    gsl_vector_set(g, i, r.ok ? -r.grad(i) : 0.0);
  }
}

// Runs BFGS from one start; returns the best negative LML reached and leaves
// the corresponding phi in `best_phi` when it improves on `best_value`.
void optimize_from(const LmlProblem& prob, const Eigen::VectorXd& start, int max_iter,
                   double* best_value, Eigen::VectorXd* best_phi) {
  static const int kInstallOnce = [] {
    gsl_set_error_handler_off();
    return 0;
  }();
  (void)kInstallOnce;

  const auto dim = static_cast<std::size_t>(start.size());
  gsl_multimin_function_fdf target;
  target.n = dim;
  target.f = &gsl_f;
  target.df = &gsl_df;
  target.fdf = &gsl_fdf;
  target.params = const_cast<LmlProblem*>(&prob);

  gsl_vector* x = gsl_vector_alloc(dim);
  for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x, i, start(static_cast<Eigen::Index>(i)));

  gsl_multimin_fdfminimizer* mini =
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, dim);
  if (gsl_multimin_fdfminimizer_set(mini, &target, x, 0.5, 0.1) == GSL_SUCCESS) {
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
      if (gsl_multimin_fdfminimizer_iterate(mini) != GSL_SUCCESS) break;
      if (gsl_multimin_test_gradient(mini->gradient, 1e-3) == GSL_SUCCESS) break;
      // Flat step: the likelihood surface is done improving at this scale.
      if (std::fabs(prev - mini->f) < 1e-9 * (1.0 + std::fabs(mini->f))) break;
      prev = mini->f;
    }
    if (std::isfinite(mini->f) && mini->f < *best_value) {
      *best_value = mini->f;
      for (std::size_t i = 0; i < dim; ++i) {
        (*best_phi)(static_cast<Eigen::Index>(i)) = gsl_vector_get(mini->x, i);
      }
    }
  }
  gsl_multimin_fdfminimizer_free(mini);
  gsl_vector_free(x);
}

}  // namespace

double matern_correlation(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<double>& log_lengthscales) {
  if (a.size() != b.size() || a.size() != log_lengthscales.size()) {
    throw std::invalid_argument("matern_correlation: dimension mismatch");
  }
  double prod = 1.0;
  double sum = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double d = std::fabs(a[l] - b[l]) * std::exp(log_lengthscales[l]);
    prod *= 1.0 + d;
    sum += d;
  }
  return prod * std::exp(-sum);
}

LmlResult log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_centered,
                                  const Eigen::VectorXd& phi) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  LmlResult out;
  out.grad = Eigen::VectorXd::Zero(p + 2);

  const Eigen::VectorXd zeta = phi.head(p);
  const double scale = std::exp(phi(p));
  const double nugget = std::exp(phi(p + 1));
  if (!std::isfinite(scale) || !std::isfinite(nugget)) return out;

  std::vector<Eigen::MatrixXd> dists;
  const Eigen::MatrixXd C = correlation_matrix(X, X, zeta, &dists);
  Eigen::MatrixXd K = scale * C;
  K.diagonal().array() += nugget;

  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) return out;

  const Eigen::VectorXd alpha = llt.solve(y_centered);
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(llt.matrixLLT()(i, i));

  out.value = -0.5 * y_centered.dot(alpha) - log_det_half -
              0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);

  // d/dphi = 0.5 tr((alpha alpha^T - K^{-1}) dK/dphi)
  Eigen::MatrixXd A = alpha * alpha.transpose();
  A -= llt.solve(Eigen::MatrixXd::Identity(n, n));

  for (Eigen::Index l = 0; l < p; ++l) {
    const Eigen::ArrayXXd d = dists[static_cast<std::size_t>(l)].array();
    const Eigen::ArrayXXd dC = -C.array() * d.square() / (1.0 + d);
    out.grad(l) = 0.5 * scale * (A.array() * dC).sum();
  }
  out.grad(p) = 0.5 * scale * (A.array() * C.array()).sum();
  out.grad(p + 1) = 0.5 * nugget * A.trace();
  out.ok = std::isfinite(out.value);
  return out;
}

GpPosterior::GpPosterior(Eigen::MatrixXd X, Eigen::VectorXd y, KernelParams params, double center)
    : X_(std::move(X)), y_(std::move(y)), params_(std::move(params)), center_(center) {
  const Eigen::VectorXd zeta =
      Eigen::Map<const Eigen::VectorXd>(params_.log_lengthscales.data(),
                                        static_cast<Eigen::Index>(params_.log_lengthscales.size()));
  Eigen::MatrixXd K = params_.scale * correlation_matrix(X_, X_, zeta);
  K.diagonal().array() += params_.nugget;
  llt_.compute(K);
  if (llt_.info() != Eigen::Success) {
    throw std::runtime_error("GpPosterior: kernel matrix is not positive definite");
  }
  weights_ = llt_.solve((y_.array() - center_).matrix());
}

GpPosterior GpPosterior::fit(const std::vector<Sample>& data, const FitConfig& config) {
  if (data.size() < 2) throw std::invalid_argument("GpPosterior::fit: need at least 2 samples");
  const Eigen::MatrixXd X = to_matrix(data);
  const Eigen::VectorXd y = to_outputs(data);
  const double center = y.mean();
  const Eigen::VectorXd yc = y.array() - center;
  const Eigen::Index p = X.cols();

  double var_y = yc.squaredNorm() / static_cast<double>(yc.size());
  if (var_y < 1e-12) var_y = 1e-12;

  // Base start: lengthscale half the data span per dimension, scale at the
  // output variance, nugget well below it.
  Eigen::VectorXd base(p + 2);
  for (Eigen::Index l = 0; l < p; ++l) {
    const double span = X.col(l).maxCoeff() - X.col(l).minCoeff();
    base(l) = std::log(2.0 / (span > 1e-12 ? span : 1.0));
  }
  base(p) = std::log(var_y);
  base(p + 1) = std::log(var_y * 1e-4);

  LmlProblem prob{&X, &yc};
  double best = std::numeric_limits<double>::max();
  Eigen::VectorXd best_phi = base;

  RandomStream jitter(derive_seed(config.seed, 0x6f17ull));
  for (int s = 0; s < config.multistarts; ++s) {
    Eigen::VectorXd start = base;
    if (s > 0) {
      for (Eigen::Index l = 0; l < p; ++l) start(l) += jitter.uniform(-1.5, 1.5);
      start(p) += jitter.uniform(-1.0, 1.0);
      start(p + 1) += jitter.uniform(-4.0, 2.0);
    }
    optimize_from(prob, start, config.max_iter, &best, &best_phi);
  }
  if (config.warm_start) {
    const KernelParams& w = *config.warm_start;
    Eigen::VectorXd start(p + 2);
    for (Eigen::Index l = 0; l < p; ++l) start(l) = w.log_lengthscales[static_cast<std::size_t>(l)];
    start(p) = std::log(w.scale);
    start(p + 1) = std::log(w.nugget);
    optimize_from(prob, start, config.max_iter, &best, &best_phi);
  }

  KernelParams params;
  params.log_lengthscales.resize(static_cast<std::size_t>(p));
  for (Eigen::Index l = 0; l < p; ++l) params.log_lengthscales[static_cast<std::size_t>(l)] = best_phi(l);
  params.scale = std::exp(best_phi(p));
  params.nugget = std::max(std::exp(best_phi(p + 1)), kNuggetFloorFraction * params.scale);
  return GpPosterior(X, y, std::move(params), center);
}

GpPosterior GpPosterior::with_params(const std::vector<Sample>& data, const KernelParams& params,
                                     double center) {
  return GpPosterior(to_matrix(data), to_outputs(data), params, center);
}

Eigen::VectorXd GpPosterior::kvec(const std::vector<double>& theta) const {
  const Eigen::Index p = X_.cols();
  Eigen::VectorXd k(X_.rows());
  for (Eigen::Index i = 0; i < X_.rows(); ++i) {
    double prod = 1.0;
    double sum = 0.0;
    for (Eigen::Index l = 0; l < p; ++l) {
      const double d = std::fabs(theta[static_cast<std::size_t>(l)] - X_(i, l)) *
                       std::exp(params_.log_lengthscales[static_cast<std::size_t>(l)]);
      prod *= 1.0 + d;
      sum += d;
    }
    k(i) = params_.scale * prod * std::exp(-sum);
  }
  return k;
}

Prediction GpPosterior::predict(const std::vector<double>& theta) const {
  const Eigen::VectorXd k = kvec(theta);
  Prediction out;
  out.mean = center_ + k.dot(weights_);
  out.var = std::max(0.0, params_.scale - k.dot(llt_.solve(k)));
  return out;
}

void GpPosterior::predict_many(const Eigen::MatrixXd& Xq, Eigen::VectorXd& mean,
                               Eigen::VectorXd& var) const {
  const Eigen::MatrixXd Kq = cross_kernel(Xq);
  mean = (Kq.transpose() * weights_).array() + center_;
  const Eigen::MatrixXd V = llt_.solve(Kq);
  var = (params_.scale - (Kq.array() * V.array()).colwise().sum().transpose()).cwiseMax(0.0);
}

double GpPosterior::posterior_cov(const std::vector<double>& theta,
                                  const std::vector<double>& theta_star) const {
  const Eigen::VectorXd ka = kvec(theta);
  const Eigen::VectorXd kb = kvec(theta_star);
  return kernel(theta, theta_star) - ka.dot(llt_.solve(kb));
}

double GpPosterior::tau_sq(const std::vector<double>& theta,
                           const std::vector<double>& theta_star) const {
  const double cov = posterior_cov(theta, theta_star);
  const double denom = predict(theta_star).var + params_.nugget;
  return cov * cov / denom;
}

double GpPosterior::kernel(const std::vector<double>& a, const std::vector<double>& b) const {
  return params_.scale * matern_correlation(a, b, params_.log_lengthscales);
}

Eigen::MatrixXd GpPosterior::cross_kernel(const Eigen::MatrixXd& A) const {
  return pair_kernel(X_, A);
}

Eigen::MatrixXd GpPosterior::pair_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
  const Eigen::VectorXd zeta =
      Eigen::Map<const Eigen::VectorXd>(params_.log_lengthscales.data(),
                                        static_cast<Eigen::Index>(params_.log_lengthscales.size()));
  return params_.scale * correlation_matrix(A, B, zeta);
}

Eigen::MatrixXd GpPosterior::solve_kernel(const Eigen::MatrixXd& B) const { return llt_.solve(B); }

}  // namespace seqcal
