#pragma once

#include <Eigen/Dense>

#include "lcsvr/problem.hpp"

namespace lcsvr {

/// Index ranges of the stacked dual vector theta = [alpha; alpha*; gamma; mu].
struct ThetaLayout {
  Eigen::Index n = 0;
  Eigen::Index k1 = 0;
  Eigen::Index k2 = 0;

  Eigen::Index total() const { return 2 * n + k1 + k2; }
  Eigen::Index alpha_begin() const { return 0; }
  Eigen::Index alpha_star_begin() const { return n; }
  Eigen::Index gamma_begin() const { return 2 * n; }
  Eigen::Index mu_begin() const { return 2 * n + k1; }
};

/// The dual of the linearly constrained SVR problem:
///
///   min  1/2 theta^T Qbar theta + l^T theta
///   s.t. 0 <= alpha_i, alpha*_i <= C/n,   gamma_j >= 0,
///        e^T (alpha - alpha*) = 0,        e^T (alpha + alpha*) = C nu,
///
/// with l = [y; -y; b; -d] and Qbar the Gram matrix of the stacked rows
/// [X; -X; A; -Gamma]. Qbar is never materialized: the solver touches it
/// through the cached diagonal and on-demand columns.
///
/// Holds references to the problem data; those must outlive the DualProblem.
struct DualProblem {
  const TrainingSet& ts;
  const LinearConstraints& lc;
  const Hyperparameters& hp;
  ThetaLayout layout;
  Eigen::VectorXd l;     // [y; -y; b; -d]
  Eigen::VectorXd diag;  // diagonal of Qbar
  long max_iter = 0;     // hp.max_iter, or 100 * total when set to auto

  DualProblem(const TrainingSet& ts_, const LinearConstraints& lc_, const Hyperparameters& hp_);

  /// Per-coordinate box bound C/n shared by the alpha and alpha* blocks.
  double box() const { return hp.C / static_cast<double>(layout.n); }
};

/// Mutable solver state. grad is maintained incrementally equal to
/// Qbar theta + l; objective equal to 1/2 theta^T Qbar theta + l^T theta.
struct DualState {
  Eigen::VectorXd theta;
  Eigen::VectorXd grad;
  double objective = 0.0;
};

/// Entry (i, j) of Qbar, computed on demand from one row inner product.
double qbar_entry(const DualProblem& dp, Eigen::Index i, Eigen::Index j);

/// Column j of Qbar into out (length total); cost O(total * p).
void qbar_column(const DualProblem& dp, Eigen::Index j, Eigen::Ref<Eigen::VectorXd> out);

/// beta = -X^T (alpha - alpha*) - A^T gamma + Gamma^T mu.
Eigen::VectorXd recover_beta(const DualProblem& dp, const Eigen::Ref<const Eigen::VectorXd>& theta);

/// 1/2 theta^T Qbar theta + l^T theta, evaluated as 1/2 ||beta(theta)||^2 + l^T theta.
double objective(const DualProblem& dp, const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Qbar theta + l, assembled from beta(theta) in O((n + k1 + k2) * p).
Eigen::VectorXd gradient_full(const DualProblem& dp,
                              const Eigen::Ref<const Eigen::VectorXd>& theta);

struct InterceptEpsilon {
  double beta0 = 0.0;
  double epsilon = 0.0;
  bool degenerate = false;  // no strictly-free alpha on one or both sides
};

/// Recovers (beta0, epsilon) from the free support vectors: indices with
/// 0 < alpha_i < C/n sit on the upper tube edge, 0 < alpha*_i < C/n on the
/// lower one. Averages over all free indices on each side; when a side is
/// empty, falls back to epsilon = 0 with beta0 the remaining side's mean
/// (or the median residual when both sides are empty) and flags the result.
InterceptEpsilon recover_intercept_epsilon(const DualProblem& dp,
                                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                                           const Eigen::Ref<const Eigen::VectorXd>& beta);

}  // namespace lcsvr
