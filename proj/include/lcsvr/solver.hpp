#pragma once

#include <array>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lcsvr/dual.hpp"

namespace lcsvr {

/// Thrown when a pair-update denominator Q_ii - 2 Q_ij + Q_jj vanishes,
/// i.e. two identical rows of X slipped past validation.
struct ZeroCurvatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-block KKT violation scores; -inf marks an empty or ineligible block.
/// delta1/delta2 come from the extreme pair over I_up / I_low of the alpha
/// (resp. alpha*) block; delta3 scores each gamma_j by -grad when the
/// coordinate sits at zero and by |grad| when it is positive (a positive
/// multiplier must have zero gradient); delta4 = max_j |grad_mu_j|. Ties
/// break toward the lowest index.
struct ViolationScores {
  static constexpr double kEmpty = -std::numeric_limits<double>::infinity();

  double delta1 = kEmpty;
  double delta2 = kEmpty;
  double delta3 = kEmpty;
  double delta4 = kEmpty;
  Eigen::Index i = -1, j = -1;            // alpha block: argmin over I_up, argmax over I_low
  Eigen::Index i_star = -1, j_star = -1;  // alpha* block
  Eigen::Index u_gamma = -1;              // argmin of grad over the gamma block
  Eigen::Index u_mu = -1;                 // argmax of |grad| over the mu block

  double max_delta() const;
  /// Block of the maximal score, 0..3; ties pick the lowest block.
  int argmax_block() const;
};

enum class Termination { Converged, IterationCap };

struct TrajectoryPoint {
  long iteration;
  double objective;
  double delta;
};

struct SolveReport {
  long iterations = 0;
  Termination termination = Termination::IterationCap;
  double final_delta = 0.0;
  double final_objective = 0.0;
  std::vector<TrajectoryPoint> trajectory;  // filled only when recording
  std::array<long, 4> block_update_counts{};
  // Observability for the gradient-maintenance invariant: largest relative
  // deviation between the maintained gradient and a fresh recompute, measured
  // at every scheduled recheck.
  double max_gradient_drift = 0.0;
  long gradient_recomputes = 0;
};

/// Feasible start: alpha_i = alpha*_i = C nu / (2n), gamma = 0, mu = 0.
/// Satisfies both equality constraints exactly and the box since nu <= 1.
DualState initialize(const DualProblem& dp);

ViolationScores compute_scores(const DualProblem& dp, const DualState& ds);

/// Closed-form clipped update of the pair (i, j) inside the alpha block
/// (starred = false) or the alpha* block. Returns the applied step t*;
/// maintains grad and objective incrementally.
double alpha_pair_update(const DualProblem& dp, DualState& ds, Eigen::Index i, Eigen::Index j,
                         bool starred);

/// gamma_u <- max(gamma_u - grad_u / (A A^T)_uu, 0); returns the new value.
double gamma_update(const DualProblem& dp, DualState& ds, Eigen::Index u);

/// mu_u <- mu_u - grad_u / (Gamma Gamma^T)_uu (unconstrained Newton step on
/// one coordinate); returns the new value.
double mu_update(const DualProblem& dp, DualState& ds, Eigen::Index u);

struct SolveOptions {
  bool record_trajectory = false;
  /// Invoked after every accepted update with the block index (0 = alpha,
  /// 1 = alpha*, 2 = gamma, 3 = mu) and the updated coordinate(s); j == -1
  /// for single-coordinate blocks.
  std::function<void(const DualState&, int block, Eigen::Index i, Eigen::Index j)> on_update;
};

/// Runs the generalized SMO loop until every violation score is <= tau or
/// the iteration cap is reached. Termination is always confirmed against a
/// freshly recomputed gradient, and the gradient is rebuilt from scratch
/// every `total` iterations to bound incremental drift.
std::pair<DualState, SolveReport> solve(const DualProblem& dp, const SolveOptions& opts);
std::pair<DualState, SolveReport> solve(const DualProblem& dp, bool record_trajectory = false);

/// CSV rows "iteration,objective,delta" consumed by the CLI and experiments.
std::string trajectory_to_csv(const SolveReport& report);

}  // namespace lcsvr
