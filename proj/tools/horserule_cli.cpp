#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "horserule/data.hpp"
#include "horserule/dss.hpp"
#include "horserule/error.hpp"
#include "horserule/experiments.hpp"
#include "horserule/inference.hpp"
#include "horserule/model_io.hpp"
#include "horserule/pipeline.hpp"

using namespace horserule;

namespace {

struct FitFlags {
  std::size_t ntree = 1000;
  double L = 5.0;
  std::size_t nmin = 0;
  double mix = 0.3;
  double mu = 1.0;
  double eta = 2.0;
  double linear_scale = 1.0;
  std::string linear = "all";
  bool unshrunk_linear = false;
  std::string ytransform = "none";
  std::size_t niter = 1000;
  std::size_t burnin = 100;
  std::size_t thin = 1;
  std::uint64_t seed = 0;

  HorseRuleConfig config() const {
    HorseRuleConfig c;
    c.trees.ntree = ntree;
    c.trees.L = L;
    c.trees.n_min = nmin;
    c.trees.mix = mix;
    c.mu = mu;
    c.eta = eta;
    c.linear_A = linear_scale;
    c.linear = LinearTerms::parse(linear);
    c.unshrunk_linear = unshrunk_linear;
    c.y_transform = parse_ytransform(ytransform);
    c.sampler.niter = niter;
    c.sampler.burnin = burnin;
    c.sampler.thin = thin;
    c.seed = seed;
    c.validate();
    return c;
  }
};

void add_fit_flags(CLI::App* app, FitFlags& f) {
  app->add_option("--ntree", f.ntree, "number of trees")->capture_default_str();
  app->add_option("--L", f.L, "mean number of terminal nodes per tree")->capture_default_str();
  app->add_option("--nmin", f.nmin, "minimum observations per leaf (default: ceil(N^(1/3)))");
  app->add_option("--mix", f.mix, "fraction of random forest trees")->capture_default_str();
  app->add_option("--mu", f.mu, "support exponent of the rule prior")->capture_default_str();
  app->add_option("--eta", f.eta, "length exponent of the rule prior")->capture_default_str();
  app->add_option("--linear-scale", f.linear_scale, "prior scale of linear terms")->capture_default_str();
  app->add_option("--linear", f.linear, "all, none, or comma-separated covariates")->capture_default_str();
  app->add_flag("--unshrunk-linear", f.unshrunk_linear, "give linear terms a fixed normal prior");
  app->add_option("--ytransform", f.ytransform, "none or log")->capture_default_str();
  app->add_option("--niter", f.niter, "Gibbs iterations")->capture_default_str();
  app->add_option("--burnin", f.burnin, "discarded iterations")->capture_default_str();
  app->add_option("--thin", f.thin, "keep every k-th draw")->capture_default_str();
  app->add_option("--seed", f.seed, "master seed")->capture_default_str();
}

/// Opens `path` for writing, or returns stdout for "" and "-".
struct Output {
  std::unique_ptr<std::ofstream> file;
  std::ostream* stream = &std::cout;
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file) throw DataError("cannot write output file: " + path);
    stream = file.get();
  }
  std::ostream& operator*() { return *stream; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Dataset load_scoring_data(const std::string& path, const FittedModel& model, bool require_target) {
  Dataset d = encode_with_schema(read_csv_file(path), model.schema, require_target);
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << '\n';
  return d;
}

/// "mu=0,eta=0" applied on top of a base config.
HorseRuleConfig apply_grid(const std::string& spec, FitFlags flags) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--grid entries look like key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    try {
      if (key == "mu") flags.mu = std::stod(val);
      else if (key == "eta") flags.eta = std::stod(val);
      else if (key == "ntree") flags.ntree = std::stoul(val);
      else if (key == "L") flags.L = std::stod(val);
      else if (key == "nmin") flags.nmin = std::stoul(val);
      else if (key == "mix") flags.mix = std::stod(val);
      else if (key == "linear") flags.linear = val;
      else if (key == "linear_scale") flags.linear_scale = std::stod(val);
      else if (key == "unshrunk_linear") flags.unshrunk_linear = val == "1" || val == "true";
      else if (key == "ytransform") flags.ytransform = val;
      else if (key == "niter") flags.niter = std::stoul(val);
      else if (key == "burnin") flags.burnin = std::stoul(val);
      else if (key == "thin") flags.thin = std::stoul(val);
      else throw UsageError("--grid: unknown key '" + key + "'");
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const UsageError*>(&e)) throw;
      throw UsageError("--grid: bad value for '" + key + "': " + val);
    }
  }
  return flags.config();
}

int run(int argc, char** argv) {
  CLI::App app{"HorseRule: Bayesian rule ensembles with a horseshoe prior"};
  app.require_subcommand(1);

  // fit
  FitFlags fit_flags;
  std::string fit_data, fit_target, fit_out;
  auto* fit = app.add_subcommand("fit", "fit a model and write a model file");
  fit->add_option("--data", fit_data, "training CSV")->required();
  fit->add_option("--target", fit_target, "response column")->required();
  fit->add_option("--out", fit_out, "model file to write")->required();
  add_fit_flags(fit, fit_flags);

  // predict
  std::string pred_model, pred_data, pred_out;
  double pred_interval = 0.0;
  bool pred_noise = false;
  std::uint64_t pred_seed = 0;
  auto* pred = app.add_subcommand("predict", "posterior mean predictions");
  pred->add_option("--model", pred_model, "model file")->required();
  pred->add_option("--data", pred_data, "CSV with the training covariates")->required();
  pred->add_option("--out", pred_out, "output CSV (default stdout)");
  pred->add_option("--interval", pred_interval, "equal-tailed interval coverage, e.g. 0.9");
  pred->add_flag("--noise", pred_noise, "intervals for a new observation instead of the mean");
  pred->add_option("--seed", pred_seed, "seed for --noise")->capture_default_str();

  // importance
  std::string imp_model, imp_out;
  std::size_t imp_top = 0;
  bool imp_variables = false;
  auto* imp = app.add_subcommand("importance", "rule or covariate importance");
  imp->add_option("--model", imp_model, "model file")->required();
  imp->add_option("--top", imp_top, "number of rules to list (0 = all)");
  imp->add_flag("--variables", imp_variables, "covariate importance instead of rule importance");
  imp->add_option("--out", imp_out, "output CSV (default stdout)");

  // ruleheat
  std::string heat_model, heat_data, heat_out, heat_legend;
  std::size_t heat_top = 20;
  auto* heat = app.add_subcommand("ruleheat", "rule activation matrix of the most important rules");
  heat->add_option("--model", heat_model, "model file")->required();
  heat->add_option("--data", heat_data, "CSV with covariates and response")->required();
  heat->add_option("--top", heat_top, "number of rules")->capture_default_str();
  heat->add_option("--out", heat_out, "output CSV (default stdout)");
  heat->add_option("--legend", heat_legend, "CSV mapping rule ids to rule text");

  // dss
  std::string dss_model, dss_data, dss_out;
  double dss_lambda = 0.0;
  bool dss_path_mode = false;
  std::size_t dss_count = 50;
  auto* dss = app.add_subcommand("dss", "sparse summary of the posterior mean fit");
  dss->add_option("--model", dss_model, "model file")->required();
  dss->add_option("--data", dss_data, "the training CSV the model was fitted on")->required();
  auto* lambda_opt = dss->add_option("--lambda", dss_lambda, "L1 penalty");
  auto* path_opt = dss->add_flag("--path", dss_path_mode, "solve a log-spaced penalty path");
  dss->add_option("--path-length", dss_count, "penalties on the path")->capture_default_str();
  lambda_opt->excludes(path_opt);
  dss->add_option("--out", dss_out, "output CSV (default stdout)");

  // cv
  FitFlags cv_flags;
  std::string cv_data, cv_target, cv_out;
  std::size_t cv_folds = 10, cv_repeats = 1;
  std::vector<std::string> cv_grid;
  bool cv_ols = false;
  auto* cv = app.add_subcommand("cv", "k-fold cross-validated RMSE");
  cv->add_option("--data", cv_data, "CSV")->required();
  cv->add_option("--target", cv_target, "response column")->required();
  cv->add_option("--folds", cv_folds, "k")->capture_default_str();
  cv->add_option("--repeats", cv_repeats, "repetitions with fresh folds")->capture_default_str();
  cv->add_option("--grid", cv_grid, "config override such as mu=0,eta=0; repeatable");
  cv->add_flag("--ols-baseline", cv_ols, "also score least squares on the covariates");
  cv->add_option("--out", cv_out, "fold-level CSV");
  add_fit_flags(cv, cv_flags);

  // simulate
  FitFlags sim_flags;
  sim_flags.ntree = 150;  // about 500 rules at the default n
  SimulationOptions sim;
  std::string sim_out;
  auto* simc = app.add_subcommand("simulate", "simulation study with a known linear signal");
  simc->add_option("--scenario", sim.scenario, "linear")->capture_default_str();
  simc->add_option("--n", sim.n, "training rows")->capture_default_str();
  simc->add_option("--p", sim.p, "covariates")->capture_default_str();
  simc->add_option("--n-test", sim.n_test, "fresh test rows")->capture_default_str();
  simc->add_option("--reps", sim.reps, "replicates")->capture_default_str();
  simc->add_option("--noise", sim.noise_sd, "noise standard deviation")->capture_default_str();
  simc->add_option("--out", sim_out, "per-replicate CSV");
  add_fit_flags(simc, sim_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (fit->parsed()) {
    const HorseRuleConfig cfg = fit_flags.config();
    const Dataset data = load_csv(fit_data, fit_target);
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
    const FitResult res = fit_horserule(data, cfg);
    save_model(fit_out, res.model);
    const Prediction p = predict(res.model, data.X);
    std::size_t rules = res.model.rule_columns().size();
    std::cout << "rows: " << data.rows() << '\n'
              << "candidate rules: " << res.model.n_candidate_rules << '\n'
              << "columns kept: " << res.model.column_count() << " (" << (res.model.column_count() - rules)
              << " linear, " << rules << " rules)\n"
              << "draws: " << res.model.draws.count() << '\n'
              << "train RMSE: " << fmt(rmse(p.mean, data.y)) << '\n'
              << "model written to " << fit_out << '\n';
  } else if (pred->parsed()) {
    const FittedModel model = load_model(pred_model);
    const Dataset data = load_scoring_data(pred_data, model, false);
    PredictOptions opts;
    if (pred->count("--interval")) opts.coverage = pred_interval;
    opts.with_noise = pred_noise;
    opts.noise_seed = pred_seed;
    const Prediction p = predict(model, data.X, opts);
    Output out(pred_out);
    *out << (opts.coverage ? "prediction,lower,upper\n" : "prediction\n");
    for (Eigen::Index i = 0; i < p.mean.size(); ++i) {
      *out << fmt(p.mean(i));
      if (opts.coverage) *out << ',' << fmt(p.lower(i)) << ',' << fmt(p.upper(i));
      *out << '\n';
    }
  } else if (imp->parsed()) {
    const FittedModel model = load_model(imp_model);
    Output out(imp_out);
    if (imp_variables) {
      write_variable_importance_csv(*out, variable_importance(model));
    } else {
      write_importance_csv(*out, rule_importance(model), imp_top);
    }
  } else if (heat->parsed()) {
    const FittedModel model = load_model(heat_model);
    const Dataset data = load_scoring_data(heat_data, model, true);
    const RuleHeat rh = ruleheat_export(model, data.X, data.y, heat_top);
    Output out(heat_out);
    write_ruleheat_csv(*out, rh);
    if (!heat_legend.empty()) {
      Output legend(heat_legend);
      write_ruleheat_legend(*legend, rh);
    }
  } else if (dss->parsed()) {
    if (!dss_path_mode && !dss->count("--lambda")) throw UsageError("dss needs --lambda or --path");
    const FittedModel model = load_model(dss_model);
    const Dataset data = load_scoring_data(dss_data, model, false);
    const Eigen::MatrixXd Z = model.design_rows(data.X);
    const Eigen::VectorXd b = model.posterior_mean_beta();
    Output out(dss_out);
    if (dss_path_mode) {
      write_dss_path_csv(*out, dss_path(Z, b, dss_count));
    } else {
      write_dss_csv(*out, model, dss_summarize(Z, b, dss_lambda));
    }
  } else if (cv->parsed()) {
    std::vector<NamedConfig> configs;
    if (cv_grid.empty()) {
      configs.push_back({"default", cv_flags.config()});
    } else {
      for (const auto& g : cv_grid) configs.push_back({g, apply_grid(g, cv_flags)});
    }
    const Dataset data = load_csv(cv_data, cv_target);
    CvOptions opts;
    opts.folds = cv_folds;
    opts.repeats = cv_repeats;
    opts.seed = cv_flags.seed;
    opts.ols_baseline = cv_ols;
    const CvReport report = cross_validate(data, configs, opts);
    if (!cv_out.empty()) {
      Output out(cv_out);
      write_cv_folds_csv(*out, report);
    }
    write_cv_summary_csv(std::cout, report);
  } else if (simc->parsed()) {
    sim.config = sim_flags.config();
    sim.seed = sim_flags.seed;
    const SimulationReport report = simulate(sim);
    if (!sim_out.empty()) {
      Output out(sim_out);
      write_simulation_csv(*out, report);
    }
    std::cout << "scenario,n,p,reps,rmse,delta_true,delta_noise\n"
              << sim.scenario << ',' << sim.n << ',' << sim.p << ',' << sim.reps << ',' << fmt(report.mean_rmse) << ','
              << fmt(report.mean_delta_true) << ',' << fmt(report.mean_delta_noise) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::logic_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
