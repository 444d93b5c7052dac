#include "horserule/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "horserule/error.hpp"

namespace horserule {

namespace {

// Scale parameters are kept inside this range so that Lambda* and its inverse
// stay representable in the normal-draw factorizations.
constexpr double kScaleFloor = 1e-12;
constexpr double kScaleCeil = 1e12;

double clamp_scale(double v) { return std::clamp(v, kScaleFloor, kScaleCeil); }

Eigen::VectorXd standard_normals(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

}  // namespace

double rule_prior_scale(double support, std::size_t length, double mu, double eta) {
  if (!(support > 0.0 && support < 1.0)) {
    throw std::domain_error("rule support must lie strictly inside (0, 1); got " + std::to_string(support));
  }
  if (length < 1) throw std::domain_error("rule length must be >= 1");
  const double specificity = 2.0 * std::min(1.0 - support, support);
  return std::pow(specificity, mu) / std::pow(static_cast<double>(length), eta);
}

PriorSpec assemble_prior(const DesignMatrix& design, double mu, double eta, double linear_A, bool unshrunk_linear) {
  if (!(mu >= 0.0) || !(eta >= 0.0)) throw UsageError("prior hyperparameters mu and eta must be >= 0");
  if (!(linear_A > 0.0)) throw UsageError("linear-term prior scale must be > 0");
  PriorSpec prior;
  prior.mu = mu;
  prior.eta = eta;
  prior.linear_A = linear_A;
  prior.unshrunk_linear = unshrunk_linear;
  const auto p = design.columns.size();
  prior.A.resize(static_cast<Eigen::Index>(p));
  prior.linear.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const ColumnMeta& c = design.columns[j];
    prior.linear[j] = c.kind == TermKind::linear;
    prior.A(static_cast<Eigen::Index>(j)) =
        prior.linear[j] ? linear_A : rule_prior_scale(c.support, c.length, mu, eta);
  }
  return prior;
}

void SamplerSettings::validate() const {
  if (thin < 1) throw UsageError("--thin must be >= 1");
  if (burnin >= niter) {
    throw UsageError("burnin >= niter (burnin=" + std::to_string(burnin) + ", niter=" + std::to_string(niter) + ")");
  }
  if (retained() == 0) throw UsageError("no draws retained: (niter - burnin) / thin is 0");
}

double draw_inverse_gamma(double shape, double scale, Rng& rng) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  return scale / gamma(rng);
}

Eigen::VectorXd sample_beta_cholesky(const Eigen::MatrixXd& ZtZ, const Eigen::VectorXd& Zty, double sigma2,
                                     const Eigen::VectorXd& lambda_star, Rng& rng) {
  Eigen::MatrixXd A = ZtZ;
  A.diagonal().array() += lambda_star.array().inverse();
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw NumericError("beta draw: Z'Z + Lambda*^-1 is not positive definite");
  Eigen::VectorXd beta = llt.solve(Zty);
  // A = L L', so L'^-1 z has covariance A^-1
  beta += std::sqrt(sigma2) * llt.matrixU().solve(standard_normals(A.rows(), rng));
  return beta;
}

std::optional<Eigen::VectorXd> sample_beta_fast(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double sigma2,
                                                const Eigen::VectorXd& lambda_star, Rng& rng) {
  const Eigen::Index n = Z.rows();
  const double sigma = std::sqrt(sigma2);
  const Eigen::VectorXd sd_u = (sigma2 * lambda_star.array()).sqrt();
  const Eigen::VectorXd u = sd_u.cwiseProduct(standard_normals(Z.cols(), rng));
  const Eigen::VectorXd v = Z * u / sigma + standard_normals(n, rng);

  // Phi D Phi' = Z Lambda* Z'
  const Eigen::MatrixXd scaled = Z * lambda_star.array().sqrt().matrix().asDiagonal();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  M.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(M);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd w = llt.solve(y / sigma - v);
  Eigen::VectorXd beta = u + sigma * lambda_star.cwiseProduct(Z.transpose() * w);
  if (!beta.allFinite()) return std::nullopt;
  return beta;
}

Eigen::VectorXd sample_beta_conditional(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double sigma2,
                                        const Eigen::VectorXd& lambda_star, Rng& rng) {
  if (Z.cols() > Z.rows()) {
    Rng attempt = rng;
    if (auto beta = sample_beta_fast(Z, y, sigma2, lambda_star, attempt)) {
      rng = attempt;
      return *beta;
    }
  }
  const Eigen::MatrixXd ZtZ = Z.transpose() * Z;
  return sample_beta_cholesky(ZtZ, Z.transpose() * y, sigma2, lambda_star, rng);
}

GibbsSampler::GibbsSampler(Eigen::MatrixXd Z, Eigen::VectorXd y, PriorSpec prior, std::uint64_t seed,
                           BetaRoute route)
    : Z_(std::move(Z)), y_(std::move(y)), prior_(std::move(prior)), rng_(mix_seed(seed, 0x67696262ULL)), route_(route) {
  const Eigen::Index p = Z_.cols();
  if (Z_.rows() != y_.size()) throw DataError("design rows and response length differ");
  if (prior_.A.size() != p || prior_.linear.size() != static_cast<std::size_t>(p)) {
    throw DataError("prior dimension does not match the design");
  }
  if ((prior_.A.array() <= 0.0).any()) throw DataError("prior scales A_j must be positive");
  if (route_ == BetaRoute::automatic) route_ = p > Z_.rows() ? BetaRoute::fast : BetaRoute::cholesky;
  if (route_ == BetaRoute::cholesky) ensure_gram();

  state_.beta = Eigen::VectorXd::Zero(p);
  state_.lambda2 = Eigen::VectorXd::Ones(p);
  state_.nu = Eigen::VectorXd::Ones(p);
  // start shrunk: a unit global scale over many columns begins near interpolation
  state_.tau2 = 1.0 / static_cast<double>(std::max<Eigen::Index>(p, 1));
  for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j)
    if (prior_.shrunk(j)) ++shrunk_count_;
}

void GibbsSampler::ensure_gram() {
  if (have_gram_) return;
  ZtZ_ = Z_.transpose() * Z_;
  Zty_ = Z_.transpose() * y_;
  have_gram_ = true;
}

Eigen::VectorXd GibbsSampler::lambda_star() const {
  Eigen::VectorXd ls(Z_.cols());
  for (Eigen::Index j = 0; j < Z_.cols(); ++j) {
    ls(j) = prior_.shrunk(static_cast<std::size_t>(j)) ? state_.tau2 * state_.lambda2(j)
                                                       : prior_.linear_A * prior_.linear_A;
  }
  return ls;
}

void GibbsSampler::draw_beta() {
  const Eigen::VectorXd ls = lambda_star();
  if (route_ == BetaRoute::fast) {
    Rng attempt = rng_;
    if (auto beta = sample_beta_fast(Z_, y_, state_.sigma2, ls, attempt)) {
      rng_ = attempt;
      state_.beta = std::move(*beta);
      return;
    }
    // ill-conditioned n x n system this iteration; the p x p route is exact too
  }
  ensure_gram();
  try {
    state_.beta = sample_beta_cholesky(ZtZ_, Zty_, state_.sigma2, ls, rng_);
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + " at iteration " + std::to_string(iteration_ + 1));
  }
}

void GibbsSampler::draw_sigma2() {
  const double n = static_cast<double>(Z_.rows());
  const double p = static_cast<double>(Z_.cols());
  const Eigen::VectorXd resid = y_ - Z_ * state_.beta;
  const double penalty = (state_.beta.array().square() / lambda_star().array()).sum();
  state_.sigma2 = draw_inverse_gamma(0.5 * (n + p), 0.5 * resid.squaredNorm() + 0.5 * penalty, rng_);
}

void GibbsSampler::draw_lambda2() {
  for (Eigen::Index j = 0; j < Z_.cols(); ++j) {
    if (!prior_.shrunk(static_cast<std::size_t>(j))) continue;
    const double b = state_.beta(j);
    const double scale = 1.0 / state_.nu(j) + b * b / (2.0 * state_.tau2 * state_.sigma2);
    state_.lambda2(j) = clamp_scale(draw_inverse_gamma(1.0, scale, rng_));
  }
}

void GibbsSampler::draw_tau2() {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < Z_.cols(); ++j) {
    if (prior_.shrunk(static_cast<std::size_t>(j))) sum += state_.beta(j) * state_.beta(j) / state_.lambda2(j);
  }
  const double shape = 0.5 * (static_cast<double>(shrunk_count_) + 1.0);
  const double scale = 1.0 / state_.rho + sum / (2.0 * state_.sigma2);
  state_.tau2 = clamp_scale(draw_inverse_gamma(shape, scale, rng_));
}

void GibbsSampler::draw_nu() {
  for (Eigen::Index j = 0; j < Z_.cols(); ++j) {
    if (!prior_.shrunk(static_cast<std::size_t>(j))) continue;
    const double a = prior_.A(j);
    state_.nu(j) = draw_inverse_gamma(1.0, 1.0 / (a * a) + 1.0 / state_.lambda2(j), rng_);
  }
}

void GibbsSampler::draw_rho() { state_.rho = draw_inverse_gamma(1.0, 1.0 + 1.0 / state_.tau2, rng_); }

void GibbsSampler::sweep() {
  draw_beta();
  draw_sigma2();
  draw_lambda2();
  draw_tau2();
  draw_nu();
  draw_rho();
  ++iteration_;
  if (!state_.beta.allFinite() || !std::isfinite(state_.sigma2) || !(state_.sigma2 > 0.0)) {
    throw NumericError("non-finite sampler state at iteration " + std::to_string(iteration_));
  }
}

PosteriorDraws gibbs_run(const Eigen::MatrixXd& Z, const Eigen::VectorXd& ys, const PriorSpec& prior,
                         const SamplerSettings& settings) {
  settings.validate();
  if (Z.rows() != ys.size()) throw DataError("design rows and response length differ");
  GibbsSampler sampler(Z, ys, prior, settings.seed);

  const std::size_t kept = settings.retained();
  PosteriorDraws draws;
  draws.niter = settings.niter;
  draws.burnin = settings.burnin;
  draws.thin = settings.thin;
  draws.seed = settings.seed;
  draws.beta.resize(static_cast<Eigen::Index>(kept), Z.cols());
  draws.lambda2.resize(static_cast<Eigen::Index>(kept), Z.cols());
  draws.sigma2.resize(static_cast<Eigen::Index>(kept));
  draws.tau2.resize(static_cast<Eigen::Index>(kept));

  Eigen::Index row = 0;
  for (std::size_t t = 1; t <= settings.niter; ++t) {
    sampler.sweep();
    if (t <= settings.burnin || (t - settings.burnin) % settings.thin != 0) continue;
    if (row >= static_cast<Eigen::Index>(kept)) break;
    const auto& s = sampler.state();
    draws.beta.row(row) = s.beta.transpose();
    draws.lambda2.row(row) = s.lambda2.transpose();
    draws.sigma2(row) = s.sigma2;
    draws.tau2(row) = s.tau2;
    ++row;
  }
  return draws;
}

PosteriorDraws gibbs_run(const DesignMatrix& design, const Eigen::VectorXd& ys, const PriorSpec& prior,
                         const SamplerSettings& settings) {
  return gibbs_run(design.Z, ys, prior, settings);
}

}  // namespace horserule
