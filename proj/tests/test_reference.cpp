#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

#include "lcsvr/reference.hpp"
#include "lcsvr/solver.hpp"
#include "test_support.hpp"

using namespace lcsvr;
using namespace lcsvr::testsupport;

namespace {

double lsq_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta) {
  return 0.5 * (y - X * beta).squaredNorm();
}

double largest_gram_eigenvalue(const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd G = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("oracle agrees with GSMO on a 2-point classical nu-SVR") {
  Instance inst;
  inst.ts.X.resize(2, 1);
  inst.ts.X << 0.0, 1.0;
  inst.ts.y.resize(2);
  inst.ts.y << 0.0, 1.0;
  inst.lc = LinearConstraints::none(1);
  inst.hp = Hyperparameters{2.0, 1.0, 1e-10, kAutoMaxIter};
  const DualProblem dp(inst.ts, inst.lc, inst.hp);

  const OracleResult oracle = oracle_solve_dual(dp);
  const auto [state, report] = solve(dp);
  REQUIRE(report.termination == Termination::Converged);
  CHECK(std::abs(state.objective - oracle.objective) <= 1e-8);
  CHECK(oracle.certificate.stationarity_residual <= 1e-8);
  CHECK(oracle.certificate.min_multiplier >= -1e-9);
}

TEST_CASE("oracle certificates validate on random constrained instances") {
  Rng seeds(501);
  const ConstraintKind kinds[4] = {ConstraintKind::None, ConstraintKind::NonNeg,
                                   ConstraintKind::Simplex, ConstraintKind::RandomMix};
  for (int rep = 0; rep < 12; ++rep) {
    Instance inst = make_instance(seeds.next_u64(), 4, 2, kinds[rep % 4], 2.0, 0.6);
    const DualProblem dp(inst.ts, inst.lc, inst.hp);
    const OracleResult oracle = oracle_solve_dual(dp);
    CHECK(oracle.certificate.stationarity_residual <= 1e-8);
    CHECK(oracle.certificate.min_multiplier >= -1e-9);

    // theta is feasible
    const Eigen::Index n = dp.layout.n;
    const double box = dp.box();
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
      CHECK(oracle.theta[i] >= -1e-9);
      CHECK(oracle.theta[i] <= box + 1e-9);
    }
    for (Eigen::Index j = 0; j < dp.layout.k1; ++j) {
      CHECK(oracle.theta[dp.layout.gamma_begin() + j] >= -1e-9);
    }
    CHECK(std::abs(oracle.theta.head(n).sum() - 0.5 * dp.hp.C * dp.hp.nu) <= 1e-9);
    CHECK(std::abs(oracle.theta.segment(n, n).sum() - 0.5 * dp.hp.C * dp.hp.nu) <= 1e-9);

    // the oracle is exact, GSMO tau-approximate
    const auto [state, report] = solve(dp);
    CHECK(oracle.objective <= state.objective + 1e-7);
  }
}

TEST_CASE("structure of exact optima: complementary alpha pairs and tight nu sum") {
  Rng seeds(733);
  int usable = 0;
  for (int rep = 0; rep < 12; ++rep) {
    // nu = 0.5 at these sizes makes the alpha sum an exact multiple of the box
    // bound, so optima sit on vertices with no free coordinates; nu = 0.3
    // yields interior tubes with epsilon > 0.
    Instance inst = make_instance(seeds.next_u64(), 4, 2, ConstraintKind::NonNeg, 2.0, 0.3);
    const DualProblem dp(inst.ts, inst.lc, inst.hp);
    const OracleResult oracle = oracle_solve_dual(dp);
    const Eigen::Index n = dp.layout.n;

    CHECK(std::abs(oracle.theta.head(2 * n).sum() - dp.hp.C * dp.hp.nu) <= 1e-10);

    const Eigen::VectorXd beta = recover_beta(dp, oracle.theta);
    const InterceptEpsilon ie = recover_intercept_epsilon(dp, oracle.theta, beta);
    if (ie.epsilon > 1e-6) {
      ++usable;
      for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(oracle.theta[i] * oracle.theta[n + i] <= 1e-10);
      }
    }
  }
  CHECK(usable > 0);
}

TEST_CASE("inactive constraints get zero multipliers") {
  // Build an instance, find the unconstrained optimum, then add an inequality
  // with slack at that optimum: the constrained solution must keep gamma = 0.
  Instance inst = make_instance(902, 4, 2, ConstraintKind::None, 2.0, 0.5);
  const DualProblem unconstrained(inst.ts, inst.lc, inst.hp);
  const OracleResult base = oracle_solve_dual(unconstrained);
  const Eigen::VectorXd beta_hat = recover_beta(unconstrained, base.theta);

  Rng rng(17);
  Instance wide = inst;
  wide.lc.A = random_matrix(rng, 1, 2);
  wide.lc.b = wide.lc.A * beta_hat + Eigen::VectorXd::Constant(1, 1.0);
  const DualProblem dp(wide.ts, wide.lc, wide.hp);
  const OracleResult constrained = oracle_solve_dual(dp);
  CHECK(std::abs(constrained.objective - base.objective) <= 1e-9);
  CHECK(constrained.theta[dp.layout.gamma_begin()] <= 1e-9);
  // complementary slackness: gamma_j (A beta - b)_j = 0
  const Eigen::VectorXd beta_c = recover_beta(dp, constrained.theta);
  const double slack = (wide.lc.A * beta_c - wide.lc.b)[0];
  CHECK(constrained.theta[dp.layout.gamma_begin()] * slack == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("zero response gives a non-positive optimum value") {
  Instance inst = make_instance(311, 4, 2, ConstraintKind::Simplex, 1.0, 0.5);
  inst.ts.y.setZero();
  const DualProblem dp(inst.ts, inst.lc, inst.hp);
  const OracleResult oracle = oracle_solve_dual(dp);
  CHECK(oracle.objective <= 1e-12);
}

TEST_CASE("oracle rejects oversized instances") {
  Instance inst = make_instance(1, 20, 2, ConstraintKind::None);  // total = 40
  const DualProblem dp(inst.ts, inst.lc, inst.hp);
  CHECK_THROWS_AS(oracle_solve_dual(dp), InstanceTooLarge);
}

TEST_CASE("infeasible primal constraints leave the oracle without a certificate") {
  Instance inst = make_instance(5150, 3, 1, ConstraintKind::None, 1.0, 0.5);
  inst.lc.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  inst.lc.b = Eigen::VectorXd::Constant(1, -1.0);  // beta <= -1
  inst.lc.Gamma = Eigen::MatrixXd::Constant(1, 1, 1.0);
  inst.lc.d = Eigen::VectorXd::Constant(1, 1.0);  // beta = 1
  const DualProblem dp(inst.ts, inst.lc, inst.hp);
  CHECK_THROWS_AS(oracle_solve_dual(dp), OracleError);
}

TEST_CASE("nnls basics and construct-and-recover") {
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  const Eigen::VectorXd beta = nnls(I2, y);
  CHECK(beta[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(beta[1] == 0.0);

  Rng rng(640);
  const Eigen::MatrixXd X = random_matrix(rng, 8, 3);
  Eigen::VectorXd beta_star(3);
  beta_star << 0.3, 0.0, 1.7;
  const Eigen::VectorXd rec = nnls(X, X * beta_star);
  CHECK((rec - beta_star).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("nnls matches a brute-force grid and its own KKT conditions") {
  Rng rng(888);
  const Eigen::MatrixXd X = random_matrix(rng, 5, 3);
  Eigen::VectorXd beta_star(3);
  beta_star << 0.4, 0.0, 0.9;
  Eigen::VectorXd y = X * beta_star;
  for (Eigen::Index i = 0; i < 5; ++i) y[i] += 0.05 * rng.gaussian();

  const Eigen::VectorXd beta = nnls(X, y);
  REQUIRE(beta.maxCoeff() < 1.2);

  // KKT: gradient >= 0 on the zero set, = 0 on the free set.
  const Eigen::VectorXd g = X.transpose() * (X * beta - y);
  for (Eigen::Index i = 0; i < 3; ++i) {
    if (beta[i] > 0.0) CHECK(std::abs(g[i]) <= 1e-8);
    else CHECK(g[i] >= -1e-8);
  }

  const double f_hat = lsq_objective(X, y, beta);
  const double step = 0.01;
  double grid_min = std::numeric_limits<double>::infinity();
  Eigen::VectorXd b(3);
  for (int a = 0; a <= 120; ++a) {
    for (int c = 0; c <= 120; ++c) {
      for (int d = 0; d <= 120; ++d) {
        b << a * step, c * step, d * step;
        grid_min = std::min(grid_min, lsq_objective(X, y, b));
      }
    }
  }
  CHECK(f_hat <= grid_min + 1e-9);
  const double resolution = 0.5 * largest_gram_eigenvalue(X) * 3.0 * (step / 2) * (step / 2);
  CHECK(grid_min <= f_hat + resolution + 1e-6);
}

TEST_CASE("sols basics") {
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  Eigen::VectorXd beta = sols(I2, y);
  CHECK(beta[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(beta[1] == doctest::Approx(0.0).epsilon(1e-10));

  y << 0.6, 0.6;
  beta = sols(I2, y);
  CHECK(beta[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(beta[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("sols matches a simplex grid search") {
  Rng rng(4096);
  const Eigen::MatrixXd X = random_matrix(rng, 6, 3);
  Eigen::VectorXd beta_star(3);
  beta_star << 0.2, 0.5, 0.3;
  Eigen::VectorXd y = X * beta_star;
  for (Eigen::Index i = 0; i < 6; ++i) y[i] += 0.1 * rng.gaussian();

  const Eigen::VectorXd beta = sols(X, y);
  CHECK(beta.minCoeff() >= -1e-12);
  CHECK(beta.sum() == doctest::Approx(1.0).epsilon(1e-10));

  const double f_hat = lsq_objective(X, y, beta);
  const double step = 0.02;
  const int m = 50;
  double grid_min = std::numeric_limits<double>::infinity();
  Eigen::VectorXd b(3);
  for (int a = 0; a <= m; ++a) {
    for (int c = 0; c + a <= m; ++c) {
      b << a * step, c * step, (m - a - c) * step;
      grid_min = std::min(grid_min, lsq_objective(X, y, b));
    }
  }
  CHECK(f_hat <= grid_min + 1e-9);
  const double resolution = 0.5 * largest_gram_eigenvalue(X) * 3.0 * step * step;
  CHECK(grid_min <= f_hat + resolution + 1e-6);
}

TEST_CASE("pava pools adjacent violators") {
  Eigen::VectorXd y(3);
  y << 1.0, 3.0, 2.0;
  const Eigen::VectorXd fit = pava_isotonic(y);
  CHECK(fit[0] == doctest::Approx(1.0));
  CHECK(fit[1] == doctest::Approx(2.5));
  CHECK(fit[2] == doctest::Approx(2.5));

  Eigen::VectorXd sorted(4);
  sorted << -1.0, 0.0, 0.5, 2.0;
  CHECK((pava_isotonic(sorted) - sorted).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("pava satisfies the variational characterization") {
  Rng rng(31337);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd y = random_vector(rng, 6);
    const Eigen::VectorXd fit = pava_isotonic(y);
    for (Eigen::Index i = 0; i + 1 < 6; ++i) CHECK(fit[i] <= fit[i + 1] + 1e-14);
    // <y - fit, z - fit> <= 0 for monotone z (fit is the projection onto the
    // monotone cone).
    for (int k = 0; k < 1000; ++k) {
      Eigen::VectorXd z = 3.0 * random_vector(rng, 6);
      std::sort(z.data(), z.data() + z.size());
      CHECK((y - fit).dot(z - fit) <= 1e-10);
    }
  }
}
