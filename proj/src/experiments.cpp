#include "horserule/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "horserule/error.hpp"
#include "horserule/inference.hpp"
#include "horserule/parallel.hpp"
#include "horserule/pipeline.hpp"
#include "horserule/random.hpp"

namespace horserule {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() == 0) throw std::invalid_argument("rmse: size mismatch or empty input");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

Eigen::VectorXd ols_predict(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                            const Eigen::MatrixXd& X_test) {
  std::vector<std::size_t> keep;
  for (Eigen::Index j = 0; j < X_train.cols(); ++j) {
    const auto col = X_train.col(j);
    if ((col.array() != col(0)).any()) keep.push_back(static_cast<std::size_t>(j));
  }
  auto with_intercept = [&](const Eigen::MatrixXd& X) {
    Eigen::MatrixXd D(X.rows(), static_cast<Eigen::Index>(keep.size()) + 1);
    D.col(0).setOnes();
    for (std::size_t k = 0; k < keep.size(); ++k) D.col(static_cast<Eigen::Index>(k) + 1) = X.col(keep[k]);
    return D;
  };
  const Eigen::MatrixXd D = with_intercept(X_train);
  const Eigen::VectorXd coef = D.colPivHouseholderQr().solve(y_train);
  return with_intercept(X_test) * coef;
}

CvReport cross_validate(const Dataset& data, const std::vector<NamedConfig>& configs, const CvOptions& options) {
  if (configs.empty()) throw UsageError("cross-validation needs at least one config");
  if (options.repeats < 1) throw UsageError("--repeats must be >= 1");
  if (data.y.size() != data.X.rows()) throw DataError("cross-validation needs a response column");
  for (const auto& c : configs) c.config.validate();

  const std::size_t n = data.rows();
  std::vector<std::vector<Fold>> splits;
  for (std::size_t r = 0; r < options.repeats; ++r) splits.push_back(kfold(n, options.folds, mix_seed(options.seed, r)));

  const std::size_t n_cells = options.repeats * options.folds;
  const std::size_t n_tasks = n_cells * configs.size();
  std::vector<double> scores(n_tasks, 0.0);
  parallel_for(n_tasks, [&](std::size_t t) {
    const std::size_t cell = t % n_cells;
    const std::size_t c = t / n_cells;
    const Fold& fold = splits[cell / options.folds][cell % options.folds];
    Dataset train;
    train.schema = data.schema;
    train.X = select_rows(data.X, fold.train);
    train.y = select_rows(data.y, fold.train);
    HorseRuleConfig cfg = configs[c].config;
    cfg.seed = mix_seed(options.seed, 0x6376 + cell);
    const FitResult fit = fit_horserule(train, cfg);
    const Prediction pred = predict(fit.model, select_rows(data.X, fold.test));
    scores[t] = rmse(pred.mean, select_rows(data.y, fold.test));
  });

  CvReport report;
  report.folds = options.folds;
  report.repeats = options.repeats;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    CvConfigResult res;
    res.label = configs[c].label;
    res.fold_rmse.assign(scores.begin() + static_cast<std::ptrdiff_t>(c * n_cells),
                         scores.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_cells));
    report.configs.push_back(std::move(res));
  }
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& res : report.configs) best = std::min(best, res.fold_rmse[cell]);
    for (auto& res : report.configs) res.fold_rrmse.push_back(best > 0.0 ? res.fold_rmse[cell] / best : 1.0);
  }
  for (auto& res : report.configs) {
    res.mean_rmse = mean_of(res.fold_rmse);
    res.mean_rrmse = mean_of(res.fold_rrmse);
  }

  if (options.ols_baseline) {
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      const Fold& fold = splits[cell / options.folds][cell % options.folds];
      Eigen::VectorXd y_train = select_rows(data.y, fold.train);
      const Eigen::VectorXd fitted = ols_predict(select_rows(data.X, fold.train), y_train, select_rows(data.X, fold.test));
      report.ols_fold_rmse.push_back(rmse(fitted, select_rows(data.y, fold.test)));
    }
    report.ols_mean_rmse = mean_of(report.ols_fold_rmse);
  }
  return report;
}

void write_cv_folds_csv(std::ostream& out, const CvReport& report) {
  out << "label,repeat,fold,rmse,rrmse\n";
  const std::size_t n_cells = report.folds * report.repeats;
  for (const auto& res : report.configs) {
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      out << csv_quote(res.label) << ',' << (cell / report.folds + 1) << ',' << (cell % report.folds + 1) << ','
          << fmt(res.fold_rmse[cell]) << ',' << fmt(res.fold_rrmse[cell]) << '\n';
    }
  }
  for (std::size_t cell = 0; cell < report.ols_fold_rmse.size(); ++cell) {
    out << "ols," << (cell / report.folds + 1) << ',' << (cell % report.folds + 1) << ','
        << fmt(report.ols_fold_rmse[cell]) << ",\n";
  }
}

void write_cv_summary_csv(std::ostream& out, const CvReport& report) {
  out << "label,mean_rmse,mean_rrmse\n";
  for (const auto& res : report.configs) {
    out << csv_quote(res.label) << ',' << fmt(res.mean_rmse) << ',' << fmt(res.mean_rrmse) << '\n';
  }
  if (!report.ols_fold_rmse.empty()) out << "ols," << fmt(report.ols_mean_rmse) << ",\n";
}

SimulationReport simulate(const SimulationOptions& options) {
  if (options.scenario != "linear") throw UsageError("unknown scenario: " + options.scenario + " (expected linear)");
  if (options.p < 5) throw UsageError("--p must be >= 5 for the linear scenario");
  if (options.n < 2 || options.n_test < 1) throw UsageError("--n must be >= 2");
  if (options.reps < 1) throw UsageError("--reps must be >= 1");
  if (!(options.noise_sd >= 0.0)) throw UsageError("--noise must be >= 0");
  options.config.validate();

  const double truth[5] = {5.0, 3.0, 1.0, 1.0, 1.0};
  const auto p = static_cast<Eigen::Index>(options.p);
  auto signal = [&](const Eigen::MatrixXd& X) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(X.rows());
    for (int j = 0; j < 5; ++j) f += truth[j] * X.col(j);
    return f;
  };

  SimulationReport report;
  report.reps.resize(options.reps);
  parallel_for(options.reps, [&](std::size_t r) {
    Rng rng = make_rng(options.seed, r);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(options.n), p);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < p; ++j) X(i, j) = normal(rng);
    Eigen::VectorXd y = signal(X);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += options.noise_sd * normal(rng);
    Eigen::MatrixXd X_test(static_cast<Eigen::Index>(options.n_test), p);
    for (Eigen::Index i = 0; i < X_test.rows(); ++i)
      for (Eigen::Index j = 0; j < p; ++j) X_test(i, j) = normal(rng);

    HorseRuleConfig cfg = options.config;
    cfg.seed = mix_seed(options.seed, 0x73696d + r);
    const FitResult fit = fit_horserule(X, y, cfg);
    const FittedModel& model = fit.model;

    SimulationRep rep;
    rep.rmse = rmse(predict(model, X_test).mean, signal(X_test));
    rep.columns = model.column_count();
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
    const Eigen::VectorXd orig = model.original_scale_beta();
    for (std::size_t j = 0; j < model.columns.size(); ++j) {
      if (model.columns[j].kind == TermKind::linear) coef(static_cast<Eigen::Index>(model.columns[j].ref)) = orig(static_cast<Eigen::Index>(j));
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j < 5) {
        rep.delta_true += std::abs(coef(j) - truth[j]);
      } else {
        rep.delta_noise += std::abs(coef(j));
      }
    }
    report.reps[r] = rep;
  });

  for (const auto& rep : report.reps) {
    report.mean_rmse += rep.rmse;
    report.mean_delta_true += rep.delta_true;
    report.mean_delta_noise += rep.delta_noise;
  }
  const auto k = static_cast<double>(report.reps.size());
  report.mean_rmse /= k;
  report.mean_delta_true /= k;
  report.mean_delta_noise /= k;
  return report;
}

void write_simulation_csv(std::ostream& out, const SimulationReport& report) {
  out << "rep,rmse,delta_true,delta_noise,columns\n";
  for (std::size_t r = 0; r < report.reps.size(); ++r) {
    const auto& rep = report.reps[r];
    out << (r + 1) << ',' << fmt(rep.rmse) << ',' << fmt(rep.delta_true) << ',' << fmt(rep.delta_noise) << ','
        << rep.columns << '\n';
  }
  out << "mean," << fmt(report.mean_rmse) << ',' << fmt(report.mean_delta_true) << ','
      << fmt(report.mean_delta_noise) << ",\n";
}

}  // namespace horserule
