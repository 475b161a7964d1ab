#include "lcsvr/problem.hpp"

#include <cmath>
#include <sstream>

namespace lcsvr {

namespace {

void check_finite(const Eigen::MatrixXd& m, const char* name, std::vector<std::string>& out) {
  if (!m.allFinite()) {
    out.push_back(std::string("non-finite entry in ") + name);
  }
}

}  // namespace

std::string ValidationResult::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i > 0) os << "; ";
    os << violations[i];
  }
  return os.str();
}

ValidationResult validate_problem(const TrainingSet& ts, const LinearConstraints& lc,
                                  const Hyperparameters& hp) {
  ValidationResult r;
  const Eigen::Index n = ts.n();
  const Eigen::Index p = ts.p();

  if (n < 2) r.violations.push_back("need at least 2 samples, got " + std::to_string(n));
  if (p < 1) r.violations.push_back("need at least 1 feature, got " + std::to_string(p));
  if (ts.y.size() != n) {
    r.violations.push_back("y has length " + std::to_string(ts.y.size()) + ", expected " +
                           std::to_string(n));
  }
  check_finite(ts.X, "X", r.violations);
  check_finite(ts.y, "y", r.violations);
  check_finite(lc.A, "A", r.violations);
  check_finite(lc.b, "b", r.violations);
  check_finite(lc.Gamma, "Gamma", r.violations);
  check_finite(lc.d, "d", r.violations);

  // Exact duplicates only: they zero the pair-update denominator
  // ||X_i - X_j||^2. Near-duplicates are legal.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (ts.X.row(i) == ts.X.row(j)) {
        r.violations.push_back("duplicate rows (" + std::to_string(i) + "," + std::to_string(j) +
                               ") in X");
      }
    }
  }

  if (lc.A.rows() > 0 && lc.A.cols() != p) {
    r.violations.push_back("A has " + std::to_string(lc.A.cols()) + " columns, expected " +
                           std::to_string(p));
  }
  if (lc.Gamma.rows() > 0 && lc.Gamma.cols() != p) {
    r.violations.push_back("Gamma has " + std::to_string(lc.Gamma.cols()) + " columns, expected " +
                           std::to_string(p));
  }
  if (lc.b.size() != lc.A.rows()) {
    r.violations.push_back("b has length " + std::to_string(lc.b.size()) + ", expected " +
                           std::to_string(lc.A.rows()));
  }
  if (lc.d.size() != lc.Gamma.rows()) {
    r.violations.push_back("d has length " + std::to_string(lc.d.size()) + ", expected " +
                           std::to_string(lc.Gamma.rows()));
  }

  // An all-zero constraint row makes the corresponding (AA^T)_ii or
  // (Gamma Gamma^T)_ii update denominator vanish.
  for (Eigen::Index j = 0; j < lc.A.rows(); ++j) {
    if (lc.A.row(j).isZero(0.0)) {
      r.violations.push_back("zero row in A at index " + std::to_string(j));
    }
  }
  for (Eigen::Index j = 0; j < lc.Gamma.rows(); ++j) {
    if (lc.Gamma.row(j).isZero(0.0)) {
      r.violations.push_back("zero row in Gamma at index " + std::to_string(j));
    }
  }

  if (!(hp.C > 0.0) || !std::isfinite(hp.C)) {
    r.violations.push_back("C must be positive, got " + std::to_string(hp.C));
  }
  if (!(hp.nu > 0.0 && hp.nu <= 1.0)) {
    r.violations.push_back("nu must be in (0,1], got " + std::to_string(hp.nu));
  }
  if (!(hp.tau > 0.0) || !std::isfinite(hp.tau)) {
    r.violations.push_back("tau must be positive, got " + std::to_string(hp.tau));
  }
  if (hp.max_iter < 0) {
    r.violations.push_back("max_iter must be positive (or 0 for auto), got " +
                           std::to_string(hp.max_iter));
  }

  return r;
}

}  // namespace lcsvr
