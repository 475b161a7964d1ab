#include "lcsvr/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include "lcsvr/csv.hpp"

namespace lcsvr {

double ViolationScores::max_delta() const {
  return std::max(std::max(delta1, delta2), std::max(delta3, delta4));
}

int ViolationScores::argmax_block() const {
  const double deltas[4] = {delta1, delta2, delta3, delta4};
  int best = 0;
  for (int b = 1; b < 4; ++b) {
    if (deltas[b] > deltas[best]) best = b;
  }
  return best;
}

DualState initialize(const DualProblem& dp) {
  const ThetaLayout& L = dp.layout;
  DualState ds;
  ds.theta = Eigen::VectorXd::Zero(L.total());
  const double a0 = dp.hp.C * dp.hp.nu / (2.0 * static_cast<double>(L.n));
  ds.theta.head(2 * L.n).setConstant(a0);
  ds.grad = gradient_full(dp, ds.theta);
  ds.objective = objective(dp, ds.theta);
  return ds;
}

ViolationScores compute_scores(const DualProblem& dp, const DualState& ds) {
  const ThetaLayout& L = dp.layout;
  const double box = dp.box();
  ViolationScores s;

  // Eligibility against the exact bound values: clipped updates land exactly
  // on 0 or C/n, so no epsilon band is needed.
  for (int block = 0; block < 2; ++block) {
    const Eigen::Index base = block == 0 ? 0 : L.n;
    Eigen::Index up = -1, low = -1;
    double g_up = 0.0, g_low = 0.0;
    for (Eigen::Index i = 0; i < L.n; ++i) {
      const double a = ds.theta[base + i];
      const double g = ds.grad[base + i];
      if (a < box && (up < 0 || g < g_up)) {
        up = i;
        g_up = g;
      }
      if (a > 0.0 && (low < 0 || g > g_low)) {
        low = i;
        g_low = g;
      }
    }
    const double delta = (up >= 0 && low >= 0) ? g_low - g_up : ViolationScores::kEmpty;
    if (block == 0) {
      s.delta1 = delta;
      s.i = up;
      s.j = low;
    } else {
      s.delta2 = delta;
      s.i_star = up;
      s.j_star = low;
    }
  }

  if (L.k1 > 0) {
    // A coordinate at gamma_j = 0 violates only when its gradient is
    // negative; a positive coordinate must have zero gradient, so its score
    // is two-sided. The one-sided score alone can strand a stale positive
    // gamma on a constraint that later became inactive, terminating short of
    // the optimum.
    Eigen::Index u = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < L.k1; ++j) {
      const double g = ds.grad[L.gamma_begin() + j];
      const double score = ds.theta[L.gamma_begin() + j] > 0.0 ? std::abs(g) : -g;
      if (score > best) {
        best = score;
        u = j;
      }
    }
    s.u_gamma = u;
    s.delta3 = best;
  }
  if (L.k2 > 0) {
    Eigen::Index u = 0;
    for (Eigen::Index j = 1; j < L.k2; ++j) {
      if (std::abs(ds.grad[L.mu_begin() + j]) > std::abs(ds.grad[L.mu_begin() + u])) u = j;
    }
    s.u_mu = u;
    s.delta4 = std::abs(ds.grad[L.mu_begin() + u]);
  }
  return s;
}

double alpha_pair_update(const DualProblem& dp, DualState& ds, Eigen::Index i, Eigen::Index j,
                         bool starred) {
  const ThetaLayout& L = dp.layout;
  const Eigen::Index base = starred ? L.n : 0;
  const Eigen::Index gi = base + i;
  const Eigen::Index gj = base + j;
  const double box = dp.box();

  const double curvature = dp.diag[gi] + dp.diag[gj] - 2.0 * qbar_entry(dp, gi, gj);
  if (curvature <= 0.0) {
    throw ZeroCurvatureError("zero curvature for pair (" + std::to_string(i) + "," +
                             std::to_string(j) + "): identical rows of X");
  }

  const double g_diff = ds.grad[gi] - ds.grad[gj];
  const double a_i = ds.theta[gi];
  const double a_j = ds.theta[gj];
  const double lo = std::max(-a_i, a_j - box);
  const double hi = std::min(a_j, box - a_i);
  const double t = std::min(std::max(lo, -g_diff / curvature), hi);
  if (t == 0.0) return 0.0;

  ds.objective += 0.5 * t * t * curvature + t * g_diff;

  ds.theta[gi] = a_i + t;
  ds.theta[gj] = a_j - t;
  // Snap clipped coordinates exactly onto their bound.
  if (t == a_j) ds.theta[gj] = 0.0;
  if (t == box - a_i) ds.theta[gi] = box;
  if (t == -a_i) ds.theta[gi] = 0.0;
  if (t == a_j - box) ds.theta[gj] = box;

  Eigen::VectorXd col_i(L.total()), col_j(L.total());
  qbar_column(dp, gi, col_i);
  qbar_column(dp, gj, col_j);
  ds.grad += t * (col_i - col_j);
  return t;
}

namespace {

// Shared tail of the gamma/mu updates: apply the coordinate move `delta` at
// global index s, maintaining grad and objective.
void apply_coordinate_step(const DualProblem& dp, DualState& ds, Eigen::Index s, double delta) {
  if (delta == 0.0) return;
  ds.objective += 0.5 * delta * delta * dp.diag[s] + delta * ds.grad[s];
  Eigen::VectorXd col(dp.layout.total());
  qbar_column(dp, s, col);
  ds.grad += delta * col;
}

}  // namespace

double gamma_update(const DualProblem& dp, DualState& ds, Eigen::Index u) {
  const Eigen::Index s = dp.layout.gamma_begin() + u;
  const double next = std::max(ds.theta[s] - ds.grad[s] / dp.diag[s], 0.0);
  apply_coordinate_step(dp, ds, s, next - ds.theta[s]);
  ds.theta[s] = next;
  return next;
}

double mu_update(const DualProblem& dp, DualState& ds, Eigen::Index u) {
  const Eigen::Index s = dp.layout.mu_begin() + u;
  const double next = ds.theta[s] - ds.grad[s] / dp.diag[s];
  apply_coordinate_step(dp, ds, s, next - ds.theta[s]);
  ds.theta[s] = next;
  return next;
}

namespace {

// Replaces the maintained gradient and objective with fresh computations and
// returns the relative drift of the gradient that had accumulated.
double refresh_state(const DualProblem& dp, DualState& ds) {
  const Eigen::VectorXd fresh = gradient_full(dp, ds.theta);
  const double scale = std::max(1.0, fresh.lpNorm<Eigen::Infinity>());
  const double drift = (ds.grad - fresh).lpNorm<Eigen::Infinity>() / scale;
  ds.grad = fresh;
  ds.objective = objective(dp, ds.theta);
  return drift;
}

}  // namespace

std::pair<DualState, SolveReport> solve(const DualProblem& dp, const SolveOptions& opts) {
  const double tau = dp.hp.tau;
  const Eigen::Index total = dp.layout.total();
  DualState ds = initialize(dp);
  SolveReport report;

  bool grad_fresh = true;
  long iter = 0;
  while (true) {
    const ViolationScores scores = compute_scores(dp, ds);
    const double delta = scores.max_delta();

    if (delta <= tau) {
      if (!grad_fresh) {
        // Never declare convergence off a drifted gradient.
        report.max_gradient_drift = std::max(report.max_gradient_drift, refresh_state(dp, ds));
        ++report.gradient_recomputes;
        grad_fresh = true;
        continue;
      }
      report.termination = Termination::Converged;
      report.final_delta = delta;
      report.final_objective = ds.objective;
      if (opts.record_trajectory) report.trajectory.push_back({iter, ds.objective, delta});
      break;
    }
    if (iter >= dp.max_iter) {
      report.termination = Termination::IterationCap;
      report.final_delta = delta;
      report.final_objective = ds.objective;
      if (opts.record_trajectory) report.trajectory.push_back({iter, ds.objective, delta});
      break;
    }
    if (opts.record_trajectory) report.trajectory.push_back({iter, ds.objective, delta});

    const int block = scores.argmax_block();
    Eigen::Index ui = -1, uj = -1;
    switch (block) {
      case 0:
        alpha_pair_update(dp, ds, scores.i, scores.j, false);
        ui = scores.i;
        uj = scores.j;
        break;
      case 1:
        alpha_pair_update(dp, ds, scores.i_star, scores.j_star, true);
        ui = scores.i_star;
        uj = scores.j_star;
        break;
      case 2:
        gamma_update(dp, ds, scores.u_gamma);
        ui = scores.u_gamma;
        break;
      default:
        mu_update(dp, ds, scores.u_mu);
        ui = scores.u_mu;
        break;
    }
    ++report.block_update_counts[static_cast<std::size_t>(block)];
    ++iter;
    grad_fresh = false;

    if (iter % total == 0) {
      report.max_gradient_drift = std::max(report.max_gradient_drift, refresh_state(dp, ds));
      ++report.gradient_recomputes;
      grad_fresh = true;
    }
    if (opts.on_update) opts.on_update(ds, block, ui, uj);
  }

  report.iterations = iter;
  return {std::move(ds), std::move(report)};
}

std::pair<DualState, SolveReport> solve(const DualProblem& dp, bool record_trajectory) {
  SolveOptions opts;
  opts.record_trajectory = record_trajectory;
  return solve(dp, opts);
}

std::string trajectory_to_csv(const SolveReport& report) {
  std::ostringstream os;
  os << "iteration,objective,delta\n";
  for (const TrajectoryPoint& pt : report.trajectory) {
    os << pt.iteration << ',' << format_double(pt.objective) << ',' << format_double(pt.delta)
       << '\n';
  }
  return os.str();
}

}  // namespace lcsvr
