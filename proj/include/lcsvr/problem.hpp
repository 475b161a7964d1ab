#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lcsvr {

/// Regression data: rows of X are samples, y holds the responses.
struct TrainingSet {
  Eigen::MatrixXd X;  // n x p
  Eigen::VectorXd y;  // n

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

/// Linear prior on the coefficient vector: { beta : A beta <= b, Gamma beta = d }.
/// Either block may be empty (k1 == 0 or k2 == 0).
struct LinearConstraints {
  Eigen::MatrixXd A;      // k1 x p
  Eigen::VectorXd b;      // k1
  Eigen::MatrixXd Gamma;  // k2 x p
  Eigen::VectorXd d;      // k2

  Eigen::Index k1() const { return A.rows(); }
  Eigen::Index k2() const { return Gamma.rows(); }

  static LinearConstraints none(Eigen::Index p) {
    LinearConstraints lc;
    lc.A.resize(0, p);
    lc.b.resize(0);
    lc.Gamma.resize(0, p);
    lc.d.resize(0);
    return lc;
  }
};

/// max_iter == kAutoMaxIter resolves to 100 * (2n + k1 + k2) when the dual
/// problem is assembled.
inline constexpr long kAutoMaxIter = 0;

struct Hyperparameters {
  double C = 1.0;     // error tolerance weight, > 0
  double nu = 0.5;    // support-vector fraction control, in (0, 1]
  double tau = 1e-3;  // KKT violation tolerance, > 0
  long max_iter = kAutoMaxIter;
};

/// Fitted model recovered from the dual solution.
struct PrimalSolution {
  Eigen::VectorXd beta;
  double beta0 = 0.0;
  double epsilon = 0.0;             // tube half-width, >= 0
  std::vector<bool> support_flags;  // per sample: |alpha_i - alpha*_i| > 0
  bool degenerate_intercept = false;
};

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Checks every structural invariant: dimensions, finiteness, n >= 2, p >= 1,
/// exactly duplicated rows of X, all-zero rows of A or Gamma, and the
/// hyperparameter ranges. Feasibility of {A beta <= b, Gamma beta = d} is the
/// caller's obligation for arbitrary constraints; the preset constructors are
/// feasible by construction.
ValidationResult validate_problem(const TrainingSet& ts, const LinearConstraints& lc,
                                  const Hyperparameters& hp);

}  // namespace lcsvr
