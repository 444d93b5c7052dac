#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "horserule/random.hpp"
#include "horserule/rules.hpp"

namespace horserule {

/// Per-column half-Cauchy scales for the local shrinkage parameters.
struct PriorSpec {
  double mu = 1.0;
  double eta = 2.0;
  Eigen::VectorXd A;
  double linear_A = 1.0;
  bool unshrunk_linear = false;
  std::vector<bool> linear;  // column is a linear term

  /// Column takes part in the (lambda, nu) hierarchy.
  bool shrunk(std::size_t j) const { return !(unshrunk_linear && linear[j]); }
};

/// (2 min(1 - s, s))^mu / l^eta. Requires 0 < s < 1 and l >= 1.
double rule_prior_scale(double support, std::size_t length, double mu, double eta);

PriorSpec assemble_prior(const DesignMatrix& design, double mu, double eta, double linear_A = 1.0,
                         bool unshrunk_linear = false);

struct SamplerSettings {
  std::size_t niter = 1000;
  std::size_t burnin = 100;
  std::size_t thin = 1;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t retained() const { return (niter - burnin) / thin; }
};

struct PosteriorDraws {
  Eigen::MatrixXd beta;     // draws x columns, standardized scale
  Eigen::VectorXd sigma2;
  Eigen::VectorXd tau2;
  Eigen::MatrixXd lambda2;  // draws x columns; empty when loaded from a model file
  std::size_t niter = 0;
  std::size_t burnin = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 0;

  std::size_t count() const { return static_cast<std::size_t>(beta.rows()); }
};

/// Draw from N(A^-1 Z'y, sigma2 A^-1) with A = Z'Z + diag(1 / lambda_star),
/// factorizing the p x p system. Throws NumericError when A is not positive
/// definite.
Eigen::VectorXd sample_beta_cholesky(const Eigen::MatrixXd& ZtZ, const Eigen::VectorXd& Zty, double sigma2,
                                     const Eigen::VectorXd& lambda_star, Rng& rng);

/// Same distribution through an n x n system (exact for p > n):
///   u ~ N(0, D), v = Phi u + delta, w = (Phi D Phi' + I)^-1 (alpha - v),
///   beta = u + D Phi' w, with Phi = Z / sigma, alpha = y / sigma,
///   D = sigma2 * diag(lambda_star).
/// Returns nullopt when the n x n factorization fails.
std::optional<Eigen::VectorXd> sample_beta_fast(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double sigma2,
                                                const Eigen::VectorXd& lambda_star, Rng& rng);

/// Picks the cheaper exact route for the shape of Z.
Eigen::VectorXd sample_beta_conditional(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double sigma2,
                                        const Eigen::VectorXd& lambda_star, Rng& rng);

/// Inverse gamma with density proportional to x^(-shape-1) exp(-scale / x).
double draw_inverse_gamma(double shape, double scale, Rng& rng);

/// Horseshoe Gibbs sampler over (beta, sigma2, lambda2, tau2, nu, rho) using
/// the inverse-gamma mixture form of the half-Cauchy. Each block update is
/// public so that single conditionals can be exercised with the rest frozen.
class GibbsSampler {
 public:
  enum class BetaRoute { automatic, cholesky, fast };

  struct State {
    Eigen::VectorXd beta;
    Eigen::VectorXd lambda2;
    Eigen::VectorXd nu;
    double sigma2 = 1.0;
    double tau2 = 1.0;
    double rho = 1.0;
  };

  GibbsSampler(Eigen::MatrixXd Z, Eigen::VectorXd y, PriorSpec prior, std::uint64_t seed,
               BetaRoute route = BetaRoute::automatic);

  State& state() { return state_; }
  const State& state() const { return state_; }
  BetaRoute route() const { return route_; }

  /// Prior variance factors of beta / sigma2: tau2 * lambda2 for shrunk
  /// columns, linear_A^2 for unshrunk linear terms.
  Eigen::VectorXd lambda_star() const;

  void draw_beta();
  void draw_sigma2();
  void draw_lambda2();
  void draw_tau2();
  void draw_nu();
  void draw_rho();

  /// One full scan in the order beta, sigma2, lambda2, tau2, nu, rho.
  void sweep();

  std::size_t iteration() const { return iteration_; }

 private:
  void ensure_gram();

  Eigen::MatrixXd Z_;
  Eigen::VectorXd y_;
  PriorSpec prior_;
  Rng rng_;
  BetaRoute route_;
  Eigen::MatrixXd ZtZ_;
  Eigen::VectorXd Zty_;
  bool have_gram_ = false;
  State state_;
  std::size_t shrunk_count_ = 0;
  std::size_t iteration_ = 0;
};

PosteriorDraws gibbs_run(const DesignMatrix& design, const Eigen::VectorXd& ys, const PriorSpec& prior,
                         const SamplerSettings& settings);

PosteriorDraws gibbs_run(const Eigen::MatrixXd& Z, const Eigen::VectorXd& ys, const PriorSpec& prior,
                         const SamplerSettings& settings);

}  // namespace horserule
