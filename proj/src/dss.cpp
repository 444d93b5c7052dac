#include "horserule/dss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "horserule/error.hpp"
#include "horserule/inference.hpp"

namespace horserule {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

DssSummary dss_summarize(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta_mean, double lambda_dss,
                         const DssOptions& options, const std::optional<Eigen::VectorXd>& start) {
  if (!(lambda_dss >= 0.0)) throw UsageError("DSS penalty must be >= 0");
  if (Z.cols() != beta_mean.size()) throw DataError("DSS: coefficient length does not match the design");
  const Eigen::Index p = Z.cols();
  const double n = static_cast<double>(Z.rows());
  const Eigen::VectorXd target = Z * beta_mean;
  const Eigen::VectorXd curvature = Z.colwise().squaredNorm().transpose() / n;

  DssSummary out;
  out.lambda_dss = lambda_dss;
  out.coefficients = start ? *start : beta_mean;
  Eigen::VectorXd& g = out.coefficients;
  Eigen::VectorXd resid = target - Z * g;

  auto update = [&](Eigen::Index j) {
    if (curvature(j) <= 0.0) {
      const double old = g(j);
      g(j) = 0.0;
      return std::abs(old);
    }
    const double rho = Z.col(j).dot(resid) / n + curvature(j) * g(j);
    const double next = soft_threshold(rho, lambda_dss) / curvature(j);
    const double delta = next - g(j);
    if (delta != 0.0) {
      resid -= delta * Z.col(j);
      g(j) = next;
    }
    return std::abs(delta);
  };

  std::vector<Eigen::Index> active;
  for (;;) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) max_change = std::max(max_change, update(j));
    ++out.sweeps;
    if (max_change < options.tolerance) break;
    if (out.sweeps >= options.max_sweeps) {
      throw NumericError("DSS coordinate descent did not converge after " + std::to_string(options.max_sweeps) +
                         " sweeps");
    }
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j)
      if (g(j) != 0.0) active.push_back(j);
    for (;;) {
      double inner = 0.0;
      for (auto j : active) inner = std::max(inner, update(j));
      ++out.sweeps;
      if (inner < options.tolerance) break;
      if (out.sweeps >= options.max_sweeps) {
        throw NumericError("DSS coordinate descent did not converge after " + std::to_string(options.max_sweeps) +
                           " sweeps");
      }
    }
  }

  out.nonzero_count = static_cast<std::size_t>((g.array() != 0.0).count());
  const double denom = target.squaredNorm();
  const double gap = (Z * g - target).squaredNorm();
  out.fit_gap = denom > 0.0 ? gap / denom : gap;
  return out;
}

DssSummary dss_summarize(const FittedModel& model, const DesignMatrix& design, double lambda_dss,
                         const DssOptions& options) {
  return dss_summarize(design.Z, model.posterior_mean_beta(), lambda_dss, options);
}

double dss_lambda_max(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta_mean) {
  const Eigen::VectorXd target = Z * beta_mean;
  return (Z.transpose() * target).cwiseAbs().maxCoeff() / static_cast<double>(Z.rows());
}

std::vector<DssSummary> dss_path(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta_mean, std::size_t count,
                                 double min_ratio, const DssOptions& options) {
  if (count < 1) throw UsageError("DSS path needs at least one penalty value");
  if (!(min_ratio > 0.0 && min_ratio <= 1.0)) throw UsageError("DSS path ratio must lie in (0, 1]");
  const double top = dss_lambda_max(Z, beta_mean);
  std::vector<DssSummary> path;
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(beta_mean.size());
  for (std::size_t k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    const double lambda = top * std::pow(min_ratio, frac);
    path.push_back(dss_summarize(Z, beta_mean, lambda, options, warm));
    warm = path.back().coefficients;
  }
  return path;
}

double dss_kkt_violation(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta_mean, const Eigen::VectorXd& g,
                         double lambda_dss) {
  const Eigen::VectorXd grad = Z.transpose() * (Z * beta_mean - Z * g) / static_cast<double>(Z.rows());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double v = g(j) != 0.0 ? std::abs(grad(j) - lambda_dss * (g(j) > 0.0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(grad(j)) - lambda_dss);
    worst = std::max(worst, v);
  }
  return worst;
}

void write_dss_csv(std::ostream& out, const FittedModel& model, const DssSummary& summary) {
  const Eigen::VectorXd& g = summary.coefficients;
  const double top = g.cwiseAbs().maxCoeff();
  std::vector<std::size_t> order;
  for (Eigen::Index j = 0; j < g.size(); ++j)
    if (g(j) != 0.0) order.push_back(static_cast<std::size_t>(j));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(g(static_cast<Eigen::Index>(a))) > std::abs(g(static_cast<Eigen::Index>(b)));
  });
  out << "rule_text,I_mean,beta_mean\n";
  for (auto j : order) {
    const double gj = g(static_cast<Eigen::Index>(j));
    const double beta = gj * model.scaling.y_sd / model.columns.at(j).sd;
    out << csv_quote(model.column_label(j)) << ',' << fmt(top > 0.0 ? std::abs(gj) / top : 0.0) << ',' << fmt(beta)
        << '\n';
  }
}

void write_dss_path_csv(std::ostream& out, const std::vector<DssSummary>& path) {
  out << "lambda,nonzero,fit_gap\n";
  for (const auto& s : path) out << fmt(s.lambda_dss) << ',' << s.nonzero_count << ',' << fmt(s.fit_gap) << '\n';
}

}  // namespace horserule
