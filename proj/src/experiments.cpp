#include "lcsvr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lcsvr/csv.hpp"
#include "lcsvr/reference.hpp"

namespace lcsvr {

std::string noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Laplacian: return "laplacian";
  }
  return "none";
}

double rmse(const Eigen::Ref<const Eigen::VectorXd>& beta_true,
            const Eigen::Ref<const Eigen::VectorXd>& beta_hat) {
  if (beta_true.size() != beta_hat.size()) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  return std::sqrt((beta_true - beta_hat).squaredNorm() /
                   static_cast<double>(beta_true.size()));
}

double mae(const Eigen::Ref<const Eigen::VectorXd>& beta_true,
           const Eigen::Ref<const Eigen::VectorXd>& beta_hat) {
  if (beta_true.size() != beta_hat.size()) {
    throw std::invalid_argument("mae: length mismatch");
  }
  return (beta_true - beta_hat).lpNorm<1>() / static_cast<double>(beta_true.size());
}

double noise_sigma_for_snr(const Eigen::Ref<const Eigen::VectorXd>& y_clean, double snr_db) {
  const double mean = y_clean.mean();
  const double var = (y_clean.array() - mean).square().sum() /
                     static_cast<double>(y_clean.size());
  if (var <= 0.0) throw std::invalid_argument("noise_sigma_for_snr: constant signal");
  return std::sqrt(var / std::pow(10.0, snr_db / 10.0));
}

Eigen::VectorXd sample_noise(Rng& rng, NoiseKind kind, double sigma, Eigen::Index n) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  if (kind == NoiseKind::None) return e;
  if (kind == NoiseKind::Gaussian) {
    for (Eigen::Index i = 0; i < n; ++i) e[i] = sigma * rng.gaussian();
  } else {
    const double b = sigma / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < n; ++i) e[i] = rng.laplacian(b);
  }
  return e;
}

Eigen::VectorXd with_noise(const Eigen::Ref<const Eigen::VectorXd>& y_clean, NoiseKind kind,
                           double snr_db, std::uint64_t seed) {
  if (kind == NoiseKind::None) return y_clean;
  Rng rng(seed);
  const double sigma = noise_sigma_for_snr(y_clean, snr_db);
  return y_clean + sample_noise(rng, kind, sigma, y_clean.size());
}

GeneratedProblem gen_nonneg(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedProblem gp;
  gp.ts.X.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) gp.ts.X(i, j) = rng.gaussian();
  }
  gp.beta_star.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    gp.beta_star[j] = std::exp(rng.gaussian(0.0, std::sqrt(2.0)));
  }
  gp.ts.y = gp.ts.X * gp.beta_star;
  return gp;
}

GeneratedProblem gen_simplex(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedProblem gp;
  gp.ts.X.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) gp.ts.X(i, j) = rng.gaussian();
  }
  Eigen::VectorXd raw(p);
  for (Eigen::Index j = 0; j < p; ++j) raw[j] = rng.gaussian();
  gp.beta_star = project_simplex(raw);
  gp.ts.y = gp.ts.X * gp.beta_star;
  return gp;
}

GeneratedProblem gen_isotonic(Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedProblem gp;
  gp.beta_star.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) gp.beta_star[j] = rng.gaussian();
  std::sort(gp.beta_star.data(), gp.beta_star.data() + p);
  gp.ts.X = Eigen::MatrixXd::Identity(p, p);
  gp.ts.y = gp.beta_star;
  return gp;
}

std::vector<double> default_C_grid() {
  std::vector<double> g(10);
  for (int i = 0; i < 10; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + 6.0 * i / 9.0);
  return g;
}

std::vector<double> default_nu_grid() {
  std::vector<double> g(10);
  for (int i = 0; i < 10; ++i) g[static_cast<std::size_t>(i)] = 0.05 + (1.0 - 0.05) * i / 9.0;
  return g;
}

Hyperparameters grid_search_cv(const TrainingSet& ts, PresetKind kind,
                               const std::vector<double>& C_grid,
                               const std::vector<double>& nu_grid, int folds, std::uint64_t seed,
                               double tau, long max_iter) {
  if (folds < 2) throw std::invalid_argument("grid_search_cv: need folds >= 2");
  if (C_grid.empty() || nu_grid.empty()) {
    throw std::invalid_argument("grid_search_cv: empty grid");
  }
  const Eigen::Index n = ts.n();

  // Seeded shuffle, then round-robin fold assignment.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const Eigen::Index j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = static_cast<int>(i % folds);

  std::vector<double> C_sorted = C_grid, nu_sorted = nu_grid;
  std::sort(C_sorted.begin(), C_sorted.end());
  std::sort(nu_sorted.begin(), nu_sorted.end());

  Hyperparameters best;
  best.tau = tau;
  best.max_iter = max_iter;
  double best_score = std::numeric_limits<double>::infinity();

  for (double C : C_sorted) {
    for (double nu : nu_sorted) {
      Hyperparameters hp{C, nu, tau, max_iter};
      double score = 0.0;
      for (int f = 0; f < folds; ++f) {
        TrainingSet train, test;
        Eigen::Index n_test = 0;
        for (Eigen::Index i = 0; i < n; ++i) n_test += fold_of[static_cast<std::size_t>(i)] == f;
        train.X.resize(n - n_test, ts.p());
        train.y.resize(n - n_test);
        test.X.resize(n_test, ts.p());
        test.y.resize(n_test);
        Eigen::Index a = 0, t = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (fold_of[static_cast<std::size_t>(i)] == f) {
            test.X.row(t) = ts.X.row(i);
            test.y[t++] = ts.y[i];
          } else {
            train.X.row(a) = ts.X.row(i);
            train.y[a++] = ts.y[i];
          }
        }
        const FittedModel m = fit(train, kind, hp);
        const Eigen::VectorXd pred = predict(m, test.X);
        score += std::sqrt((pred - test.y).squaredNorm() / static_cast<double>(n_test));
      }
      score /= folds;
      if (score < best_score) {
        best_score = score;
        best.C = C;
        best.nu = nu;
      }
    }
  }
  return best;
}

ScenarioConfig resolve_defaults(ScenarioConfig cfg) {
  if (std::isnan(cfg.C)) {
    if (cfg.name == "nonneg") cfg.C = 100.0;
    else if (cfg.name == "isotonic") cfg.C = 10.0;
    else cfg.C = 1.0;
  }
  if (std::isnan(cfg.nu)) cfg.nu = 0.5;
  return cfg;
}

namespace {

std::uint64_t noise_stream(std::uint64_t rep_seed) {
  // Decoupled from the data stream so regenerating data never shifts noise.
  return rep_seed + 0x9E3779B97F4A7C15ull;
}

struct RepOutput {
  std::vector<RepetitionRow> rows;
  std::map<std::string, std::string> artifacts;
};

RepetitionRow make_row(const ScenarioConfig& cfg, double snr, int rep, std::uint64_t seed,
                       const std::string& estimator, const Eigen::VectorXd& beta_star,
                       const Eigen::VectorXd& beta_hat) {
  RepetitionRow row;
  row.snr_db = snr;
  row.rep = rep;
  row.seed = seed;
  row.estimator = estimator;
  row.rmse = rmse(beta_star, beta_hat);
  row.mae = mae(beta_star, beta_hat);
  (void)cfg;
  return row;
}

RepOutput run_rep(const ScenarioConfig& cfg, double snr, int rep) {
  const std::uint64_t rep_seed = cfg.seed + static_cast<std::uint64_t>(rep);
  Hyperparameters hp{cfg.C, cfg.nu, cfg.tau, cfg.max_iter};
  RepOutput out;

  if (cfg.name == "nonneg") {
    GeneratedProblem gp = gen_nonneg(cfg.n, cfg.p, rep_seed);
    TrainingSet noisy = gp.ts;
    noisy.y = with_noise(gp.ts.y, cfg.noise, snr, noise_stream(rep_seed));
    const FittedModel svr = fit(noisy, PresetKind::Svr, hp);
    const FittedModel psvr = fit_projected(noisy, hp, ProjectionTarget::PositiveOrthant);
    const FittedModel nn = fit(noisy, PresetKind::Nnsvr, hp);
    const Eigen::VectorXd nnls_beta = nnls(noisy.X, noisy.y);
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "svr", gp.beta_star, svr.primal.beta));
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "psvr", gp.beta_star, psvr.primal.beta));
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "nnsvr", gp.beta_star, nn.primal.beta));
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "nnls", gp.beta_star, nnls_beta));
  } else if (cfg.name == "simplex") {
    GeneratedProblem gp = gen_simplex(cfg.n, cfg.p, rep_seed);
    TrainingSet noisy = gp.ts;
    noisy.y = with_noise(gp.ts.y, cfg.noise, snr, noise_stream(rep_seed));
    const FittedModel cib = fit_projected(noisy, hp, ProjectionTarget::Simplex);
    const Eigen::VectorXd sols_beta = sols(noisy.X, noisy.y);
    const FittedModel ssvr = fit(noisy, PresetKind::Ssvr, hp);
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "cibersort", gp.beta_star, cib.primal.beta));
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "sols", gp.beta_star, sols_beta));
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "ssvr", gp.beta_star, ssvr.primal.beta));
  } else if (cfg.name == "isotonic") {
    GeneratedProblem gp = gen_isotonic(cfg.p, rep_seed);
    TrainingSet noisy = gp.ts;
    noisy.y = with_noise(gp.ts.y, cfg.noise, snr, noise_stream(rep_seed));
    const FittedModel isvr = fit(noisy, PresetKind::Isvr, hp);
    const Eigen::VectorXd ir_beta = pava_isotonic(noisy.y);
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "isvr", gp.beta_star, isvr.primal.beta));
    out.rows.push_back(make_row(cfg, snr, rep, rep_seed, "ir", gp.beta_star, ir_beta));
  } else if (cfg.name == "trajectory") {
    GeneratedProblem gp = gen_simplex(cfg.n, cfg.p, rep_seed);
    TrainingSet noisy = gp.ts;
    noisy.y = with_noise(gp.ts.y, cfg.noise, snr, noise_stream(rep_seed));
    const char* names[2] = {"svr", "ssvr"};
    const PresetKind kinds[2] = {PresetKind::Svr, PresetKind::Ssvr};
    for (int e = 0; e < 2; ++e) {
      const LinearConstraints lc = make_constraints(kinds[e], cfg.p);
      ValidationResult vr = validate_problem(noisy, lc, hp);
      if (!vr.ok()) throw ValidationError(std::move(vr));
      const DualProblem dp(noisy, lc, hp);
      auto [state, report] = solve(dp, true);
      RepetitionRow row = make_row(cfg, snr, rep, rep_seed, names[e], gp.beta_star,
                                   recover_beta(dp, state.theta));
      row.iterations = report.iterations;
      row.converged = report.termination == Termination::Converged ? 1 : 0;
      row.final_objective = state.objective;
      row.final_delta = report.final_delta;
      out.rows.push_back(row);
      out.artifacts["trajectory_" + std::string(names[e]) + "_rep" + std::to_string(rep) +
                    ".csv"] = trajectory_to_csv(report);
    }
  } else {
    throw std::invalid_argument("unknown scenario '" + cfg.name + "'");
  }
  return out;
}

std::string render_results_csv(const ScenarioConfig& cfg, const std::vector<RepetitionRow>& rows) {
  const bool trajectory = cfg.name == "trajectory";
  std::ostringstream os;
  os << "scenario,estimator,rep,seed,n,p,snr_db,noise,rmse,mae";
  if (trajectory) os << ",iterations,converged,final_objective,final_delta";
  os << '\n';
  for (const RepetitionRow& r : rows) {
    os << cfg.name << ',' << r.estimator << ',' << r.rep << ',' << r.seed << ',' << cfg.n << ','
       << cfg.p << ',' << format_double(r.snr_db) << ',' << noise_name(cfg.noise) << ','
       << format_double(r.rmse) << ',' << format_double(r.mae);
    if (trajectory) {
      os << ',' << r.iterations << ',' << r.converged << ',' << format_double(r.final_objective)
         << ',' << format_double(r.final_delta);
    }
    os << '\n';
  }
  return os.str();
}

std::string render_summary_csv(const ScenarioConfig& cfg,
                               const std::vector<EstimatorSummary>& summaries) {
  std::ostringstream os;
  os << "scenario,estimator,snr_db,noise,mean_rmse,sd_rmse,mean_mae,sd_mae\n";
  for (const EstimatorSummary& s : summaries) {
    os << cfg.name << ',' << s.estimator << ',' << format_double(s.snr_db) << ','
       << noise_name(cfg.noise) << ',' << format_double(s.mean_rmse) << ','
       << format_double(s.sd_rmse) << ',' << format_double(s.mean_mae) << ','
       << format_double(s.sd_mae) << '\n';
  }
  return os.str();
}

}  // namespace

std::vector<EstimatorSummary> summarize(const std::vector<RepetitionRow>& rows) {
  // Preserve first-appearance order of (snr, estimator) groups.
  std::vector<EstimatorSummary> out;
  for (const RepetitionRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const EstimatorSummary& s) {
      return s.estimator == r.estimator && s.snr_db == r.snr_db;
    });
    if (it == out.end()) {
      out.push_back({r.snr_db, r.estimator, 0.0, 0.0, 0.0, 0.0});
    }
  }
  for (EstimatorSummary& s : out) {
    std::vector<double> rs, ms;
    for (const RepetitionRow& r : rows) {
      if (r.estimator == s.estimator && r.snr_db == s.snr_db) {
        rs.push_back(r.rmse);
        ms.push_back(r.mae);
      }
    }
    const auto mean = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    const auto sd = [&](const std::vector<double>& v, double m) {
      if (v.size() < 2) return 0.0;
      double acc = 0.0;
      for (double x : v) acc += (x - m) * (x - m);
      return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };
    s.mean_rmse = mean(rs);
    s.sd_rmse = sd(rs, s.mean_rmse);
    s.mean_mae = mean(ms);
    s.sd_mae = sd(ms, s.mean_mae);
  }
  return out;
}

ExperimentResult run_scenario(const ScenarioConfig& cfg_in) {
  const ScenarioConfig cfg = resolve_defaults(cfg_in);
  if (cfg.reps < 1) throw std::invalid_argument("run_scenario: need reps >= 1");

  ExperimentResult result;
  result.config = cfg;

  for (double snr : cfg.snr_list) {
    std::vector<RepOutput> slots(static_cast<std::size_t>(cfg.reps));
    const int jobs = std::max(1, std::min(cfg.jobs, cfg.reps));
    if (jobs == 1) {
      for (int r = 0; r < cfg.reps; ++r) slots[static_cast<std::size_t>(r)] = run_rep(cfg, snr, r);
    } else {
      std::vector<std::thread> pool;
      std::exception_ptr error;
      std::mutex error_mutex;
      for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&, t]() {
          try {
            for (int r = t; r < cfg.reps; r += jobs) {
              slots[static_cast<std::size_t>(r)] = run_rep(cfg, snr, r);
            }
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        });
      }
      for (std::thread& th : pool) th.join();
      if (error) std::rethrow_exception(error);
    }
    // Deterministic reduce ordered by repetition index.
    for (int r = 0; r < cfg.reps; ++r) {
      RepOutput& slot = slots[static_cast<std::size_t>(r)];
      result.rows.insert(result.rows.end(), slot.rows.begin(), slot.rows.end());
      result.artifacts.merge(slot.artifacts);
    }
  }

  result.summaries = summarize(result.rows);
  result.artifacts["results.csv"] = render_results_csv(cfg, result.rows);
  result.artifacts["summary.csv"] = render_summary_csv(cfg, result.summaries);
  return result;
}

}  // namespace lcsvr
