#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "lcsvr/csv.hpp"
#include "lcsvr/experiments.hpp"
#include "lcsvr/presets.hpp"

namespace {

using namespace lcsvr;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIterationCap = 3;

struct ConstraintFiles {
  std::string A, b, Gamma, d;
  bool any() const { return !A.empty() || !b.empty() || !Gamma.empty() || !d.empty(); }
};

void add_constraint_options(CLI::App* cmd, ConstraintFiles& files) {
  cmd->add_option("--A", files.A, "inequality matrix A as headerless CSV");
  cmd->add_option("--b", files.b, "inequality bound b as headerless CSV (one column)");
  cmd->add_option("--Gamma", files.Gamma, "equality matrix Gamma as headerless CSV");
  cmd->add_option("--d", files.d, "equality target d as headerless CSV (one column)");
}

LinearConstraints load_constraints(const ConstraintFiles& files, Eigen::Index p) {
  LinearConstraints lc = LinearConstraints::none(p);
  if (!files.A.empty()) lc.A = read_matrix_csv(files.A);
  if (!files.b.empty()) lc.b = read_matrix_csv(files.b).col(0);
  if (!files.Gamma.empty()) lc.Gamma = read_matrix_csv(files.Gamma);
  if (!files.d.empty()) lc.d = read_matrix_csv(files.d).col(0);
  if (lc.A.rows() == 0) lc.A.resize(0, p);
  if (lc.Gamma.rows() == 0) lc.Gamma.resize(0, p);
  return lc;
}

PresetKind parse_preset(const std::string& name) {
  if (name == "svr") return PresetKind::Svr;
  if (name == "nnsvr") return PresetKind::Nnsvr;
  if (name == "ssvr") return PresetKind::Ssvr;
  if (name == "isvr") return PresetKind::Isvr;
  throw CLI::ValidationError("--preset", "unknown preset '" + name + "'");
}

NoiseKind parse_noise(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "laplacian") return NoiseKind::Laplacian;
  throw CLI::ValidationError("--noise", "unknown noise kind '" + name + "'");
}

std::uint64_t effective_seed(std::uint64_t cli_seed) {
  if (const char* env = std::getenv("LCSVR_SEED")) {
    return static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
  }
  return cli_seed;
}

void write_artifacts(const ExperimentResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, content] : result.artifacts) {
    atomic_write_file((std::filesystem::path(out_dir) / name).string(), content);
  }
}

struct FitArgs {
  std::string train, out, preset = "svr";
  double C = 1.0, nu = 0.5, tau = 1e-3;
  long max_iter = kAutoMaxIter;
  bool isotonic_decreasing = false;
  ConstraintFiles constraints;
};

int run_fit(const FitArgs& args) {
  const TrainingSet ts = read_training_csv(args.train);
  const Hyperparameters hp{args.C, args.nu, args.tau, args.max_iter};

  FittedModel model;
  if (args.constraints.any()) {
    const LinearConstraints lc = load_constraints(args.constraints, ts.p());
    model = fit_with_constraints(ts, lc, hp);
  } else {
    const PresetKind kind = parse_preset(args.preset);
    if (kind == PresetKind::Isvr && args.isotonic_decreasing) {
      model = fit_with_constraints(
          ts, make_constraints(kind, ts.p(), IsotonicOrder::Decreasing), hp);
    } else {
      model = fit(ts, kind, hp);
    }
  }

  save_model(model, args.out);
  std::cout << "iterations=" << model.report.iterations << '\n'
            << "final_delta=" << format_double(model.report.final_delta) << '\n'
            << "epsilon=" << format_double(model.primal.epsilon) << '\n'
            << "objective=" << format_double(model.report.final_objective) << '\n';
  return model.report.termination == Termination::Converged ? kExitOk : kExitIterationCap;
}

struct PredictArgs {
  std::string model, data, out;
};

int run_predict(const PredictArgs& args) {
  const FittedModel model = load_model(args.model);
  const Eigen::MatrixXd X = read_features_csv(args.data);
  const Eigen::VectorXd yhat = predict(model, X);
  std::ostringstream os;
  os << "yhat\n";
  for (Eigen::Index i = 0; i < yhat.size(); ++i) os << format_double(yhat[i]) << '\n';
  atomic_write_file(args.out, os.str());
  return kExitOk;
}

struct ExperimentArgs {
  ScenarioConfig cfg;
  std::string noise = "gaussian";
  std::string out_dir;
};

int run_experiment(ExperimentArgs args) {
  args.cfg.noise = parse_noise(args.noise);
  args.cfg.seed = effective_seed(args.cfg.seed);
  const ExperimentResult result = run_scenario(args.cfg);
  write_artifacts(result, args.out_dir);
  for (const EstimatorSummary& s : result.summaries) {
    std::cout << "mean_rmse[" << s.estimator << ",snr=" << format_double(s.snr_db)
              << "]=" << format_double(s.mean_rmse) << '\n';
  }
  return kExitOk;
}

struct ValidateArgs {
  std::string train, preset = "svr";
  double C = 1.0, nu = 0.5, tau = 1e-3;
  long max_iter = kAutoMaxIter;
  ConstraintFiles constraints;
};

int run_validate(const ValidateArgs& args) {
  const TrainingSet ts = read_training_csv(args.train);
  const Hyperparameters hp{args.C, args.nu, args.tau, args.max_iter};
  const LinearConstraints lc = args.constraints.any()
                                   ? load_constraints(args.constraints, ts.p())
                                   : make_constraints(parse_preset(args.preset), ts.p());
  const ValidationResult vr = validate_problem(ts, lc, hp);
  if (vr.ok()) {
    std::cout << "ok=1\n";
    return kExitOk;
  }
  std::cout << "ok=0\n";
  for (const std::string& v : vr.violations) std::cout << "violation=" << v << '\n';
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearly constrained nu-SVR: generalized SMO solver and experiment harness"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model on a training CSV (y,x1..xp)");
  fit_cmd->add_option("--train", fit_args.train, "training CSV")->required();
  fit_cmd->add_option("--out", fit_args.out, "model output path")->required();
  fit_cmd->add_option("--preset", fit_args.preset, "svr|nnsvr|ssvr|isvr");
  fit_cmd->add_option("--C", fit_args.C, "error weight C > 0");
  fit_cmd->add_option("--nu", fit_args.nu, "nu in (0,1]");
  fit_cmd->add_option("--tau", fit_args.tau, "KKT tolerance");
  fit_cmd->add_option("--max-iter", fit_args.max_iter, "iteration cap (0 = 100 * problem size)");
  fit_cmd->add_flag("--isotonic-decreasing", fit_args.isotonic_decreasing,
                    "flip the isvr order to beta_1 >= ... >= beta_p");
  add_constraint_options(fit_cmd, fit_args.constraints);

  PredictArgs predict_args;
  CLI::App* predict_cmd = app.add_subcommand("predict", "predict with a saved model");
  predict_cmd->add_option("--model", predict_args.model, "model file from fit")->required();
  predict_cmd->add_option("--data", predict_args.data, "feature CSV (x1..xp)")->required();
  predict_cmd->add_option("--out", predict_args.out, "output CSV (column yhat)")->required();

  ExperimentArgs exp_args;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "run a desk-scale study scenario");
  exp_cmd->add_option("--scenario", exp_args.cfg.name, "nonneg|simplex|isotonic|trajectory")
      ->required();
  exp_cmd->add_option("--n", exp_args.cfg.n, "samples");
  exp_cmd->add_option("--p", exp_args.cfg.p, "features");
  exp_cmd->add_option("--snr", exp_args.cfg.snr_list, "SNR values in dB");
  exp_cmd->add_option("--reps", exp_args.cfg.reps, "repetitions");
  exp_cmd->add_option("--seed", exp_args.cfg.seed, "base seed (rep r uses seed + r)");
  exp_cmd->add_option("--noise", exp_args.noise, "none|gaussian|laplacian");
  exp_cmd->add_option("--C", exp_args.cfg.C, "override the scenario's default C");
  exp_cmd->add_option("--nu", exp_args.cfg.nu, "override the scenario's default nu");
  exp_cmd->add_option("--tau", exp_args.cfg.tau, "KKT tolerance");
  exp_cmd->add_option("--max-iter", exp_args.cfg.max_iter, "iteration cap (0 = auto)");
  exp_cmd->add_option("--jobs", exp_args.cfg.jobs, "parallel repetitions");
  exp_cmd->add_option("--out", exp_args.out_dir, "artifact directory")->required();

  ExperimentArgs traj_args;
  traj_args.cfg.name = "trajectory";
  traj_args.cfg.p = 25;
  traj_args.cfg.reps = 1;
  traj_args.cfg.snr_list = {30.0};
  traj_args.noise = "none";
  traj_args.out_dir = ".";
  CLI::App* traj_cmd =
      app.add_subcommand("trajectory", "dump SVR vs SSVR solver trajectories on simplex data");
  traj_cmd->add_option("--n", traj_args.cfg.n, "samples");
  traj_cmd->add_option("--p", traj_args.cfg.p, "features");
  traj_cmd->add_option("--snr", traj_args.cfg.snr_list, "SNR in dB (with --noise)");
  traj_cmd->add_option("--reps", traj_args.cfg.reps, "repetitions");
  traj_cmd->add_option("--seed", traj_args.cfg.seed, "base seed");
  traj_cmd->add_option("--noise", traj_args.noise, "none|gaussian|laplacian");
  traj_cmd->add_option("--C", traj_args.cfg.C, "override default C");
  traj_cmd->add_option("--nu", traj_args.cfg.nu, "override default nu");
  traj_cmd->add_option("--tau", traj_args.cfg.tau, "KKT tolerance");
  traj_cmd->add_option("--max-iter", traj_args.cfg.max_iter, "iteration cap (0 = auto)");
  traj_cmd->add_option("--jobs", traj_args.cfg.jobs, "parallel repetitions");
  traj_cmd->add_option("--out", traj_args.out_dir, "artifact directory");

  ValidateArgs val_args;
  CLI::App* val_cmd = app.add_subcommand("validate", "check a problem without solving it");
  val_cmd->add_option("--train", val_args.train, "training CSV")->required();
  val_cmd->add_option("--preset", val_args.preset, "svr|nnsvr|ssvr|isvr");
  val_cmd->add_option("--C", val_args.C, "error weight C");
  val_cmd->add_option("--nu", val_args.nu, "nu in (0,1]");
  val_cmd->add_option("--tau", val_args.tau, "KKT tolerance");
  val_cmd->add_option("--max-iter", val_args.max_iter, "iteration cap (0 = auto)");
  add_constraint_options(val_cmd, val_args.constraints);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    if (*fit_cmd) return run_fit(fit_args);
    if (*predict_cmd) return run_predict(predict_args);
    if (*exp_cmd) return run_experiment(exp_args);
    if (*traj_cmd) return run_experiment(traj_args);
    if (*val_cmd) return run_validate(val_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitIo;
}
