#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lcsvr/dual.hpp"

namespace lcsvr {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InstanceTooLarge : OracleError {
  using OracleError::OracleError;
};
struct NoFeasiblePoint : OracleError {
  using OracleError::OracleError;
};

/// Optimality certificate for one enumerated active set. A candidate is
/// trusted only when the stationarity residual is tiny and every active
/// inequality multiplier is (numerically) non-negative; for a convex problem
/// that certifies the global optimum.
struct ActiveSetCertificate {
  std::vector<std::int8_t> alpha_state;  // 2n entries: 0 = at 0, 1 = at C/n, 2 = free
  std::vector<std::int8_t> gamma_state;  // k1 entries: 0 = at 0, 1 = free
  double eq_mult_alpha = 0.0;            // multiplier of e^T alpha      = C nu / 2
  double eq_mult_alpha_star = 0.0;       // multiplier of e^T alpha*     = C nu / 2
  double stationarity_residual = 0.0;
  double min_multiplier = 0.0;
  double objective = 0.0;
};

struct OracleResult {
  Eigen::VectorXd theta;
  double objective = 0.0;
  ActiveSetCertificate certificate;
};

/// Brute-force reference solver for the dual problem with both equality
/// constraints held active: enumerates every pattern of tight box and
/// positivity constraints, solves the reduced equality-constrained quadratic
/// system (with 1e-12 Tikhonov jitter when singular), and returns the first
/// KKT-certified candidate. Only for small instances (total <= 24).
OracleResult oracle_solve_dual(const DualProblem& dp);

/// Non-negative least squares by Lawson-Hanson active sets; the returned
/// minimizer is KKT-certified (gradient >= 0 on the zero set, = 0 on the
/// free set).
Eigen::VectorXd nnls(const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y);

/// Least squares onto the probability simplex, active set on the zero
/// pattern with the sum constraint always active; KKT-certified.
Eigen::VectorXd sols(const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y);

/// Pool-adjacent-violators: the unique non-decreasing least-squares fit.
Eigen::VectorXd pava_isotonic(const Eigen::Ref<const Eigen::VectorXd>& y);

}  // namespace lcsvr
