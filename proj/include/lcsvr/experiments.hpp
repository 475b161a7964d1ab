#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lcsvr/presets.hpp"
#include "lcsvr/problem.hpp"
#include "lcsvr/rng.hpp"

namespace lcsvr {

enum class NoiseKind { None, Gaussian, Laplacian };

std::string noise_name(NoiseKind k);

struct NoiseSpec {
  NoiseKind distribution = NoiseKind::Gaussian;
  double snr_db = 10.0;
  std::uint64_t seed = 0;
};

/// Coefficient-space error metrics; both normalize by the dimension p.
double rmse(const Eigen::Ref<const Eigen::VectorXd>& beta_true,
            const Eigen::Ref<const Eigen::VectorXd>& beta_hat);
double mae(const Eigen::Ref<const Eigen::VectorXd>& beta_true,
           const Eigen::Ref<const Eigen::VectorXd>& beta_hat);

/// sigma = sqrt(Var(y) / 10^(snr/10)); throws std::invalid_argument on a
/// constant signal. Var is the population variance.
double noise_sigma_for_snr(const Eigen::Ref<const Eigen::VectorXd>& y_clean, double snr_db);

/// One noise draw with standard deviation sigma; the laplacian uses scale
/// b = sigma / sqrt(2) so the variance matches.
Eigen::VectorXd sample_noise(Rng& rng, NoiseKind kind, double sigma, Eigen::Index n);

/// Returns y with noise at the requested SNR added (None returns y as is).
Eigen::VectorXd with_noise(const Eigen::Ref<const Eigen::VectorXd>& y_clean, NoiseKind kind,
                           double snr_db, std::uint64_t seed);

struct GeneratedProblem {
  TrainingSet ts;  // noiseless: y = X beta_star
  Eigen::VectorXd beta_star;
};

/// X ~ N(0,1), beta* = exp(N(0, 2)) entrywise, y = X beta*.
GeneratedProblem gen_nonneg(Eigen::Index n, Eigen::Index p, std::uint64_t seed);
/// X ~ N(0,1), beta* a normal draw projected onto the simplex, y = X beta*.
GeneratedProblem gen_simplex(Eigen::Index n, Eigen::Index p, std::uint64_t seed);
/// X = I_p, beta* = sorted N(0,1) draws, y = beta*.
GeneratedProblem gen_isotonic(Eigen::Index p, std::uint64_t seed);

std::vector<double> default_C_grid();   // 10 values, log-spaced in [1e-3, 1e3]
std::vector<double> default_nu_grid();  // 10 values, linear in [0.05, 1.0]

/// k-fold cross validation over every (C, nu) pair, scored by held-out
/// prediction RMSE on y; ties prefer smaller C, then smaller nu.
Hyperparameters grid_search_cv(const TrainingSet& ts, PresetKind kind,
                               const std::vector<double>& C_grid,
                               const std::vector<double>& nu_grid, int folds, std::uint64_t seed,
                               double tau = 1e-3, long max_iter = kAutoMaxIter);

struct ScenarioConfig {
  std::string name;  // nonneg | simplex | isotonic | trajectory
  Eigen::Index n = 200;
  Eigen::Index p = 20;
  std::vector<double> snr_list = {10.0};
  NoiseKind noise = NoiseKind::Gaussian;
  int reps = 20;
  std::uint64_t seed = 0;
  // NaN hyperparameters resolve to the per-scenario defaults.
  double C = std::numeric_limits<double>::quiet_NaN();
  double nu = std::numeric_limits<double>::quiet_NaN();
  double tau = 1e-3;
  long max_iter = kAutoMaxIter;
  int jobs = 1;
};

/// Fills NaN C/nu with the scenario's pinned defaults.
ScenarioConfig resolve_defaults(ScenarioConfig cfg);

struct RepetitionRow {
  double snr_db = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string estimator;
  double rmse = 0.0;
  double mae = 0.0;
  // trajectory scenario extras
  long iterations = -1;
  int converged = -1;
  double final_objective = 0.0;
  double final_delta = 0.0;
};

struct EstimatorSummary {
  double snr_db = 0.0;
  std::string estimator;
  double mean_rmse = 0.0, sd_rmse = 0.0;
  double mean_mae = 0.0, sd_mae = 0.0;
};

struct ExperimentResult {
  ScenarioConfig config;
  std::vector<RepetitionRow> rows;
  std::vector<EstimatorSummary> summaries;
  // Plot-ready CSV artifacts, relative filename -> content. Always includes
  // results.csv; the trajectory scenario adds one (iteration, objective,
  // delta) file per estimator and repetition.
  std::map<std::string, std::string> artifacts;
};

std::vector<EstimatorSummary> summarize(const std::vector<RepetitionRow>& rows);

/// Runs one of the paper-style studies at desk scale. Repetition r draws its
/// data from seed config.seed + r; identical configs produce byte-identical
/// artifacts regardless of the job count.
ExperimentResult run_scenario(const ScenarioConfig& cfg);

}  // namespace lcsvr
