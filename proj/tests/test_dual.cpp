#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lcsvr/dual.hpp"
#include "test_support.hpp"

using namespace lcsvr;
using namespace lcsvr::testsupport;

namespace {

// Independent route to Qbar entries: build the stacked row [X; -X; A; -Gamma]
// explicitly and take inner products.
Eigen::VectorXd stacked_row_direct(const Instance& inst, Eigen::Index i) {
  const Eigen::Index n = inst.ts.n();
  const Eigen::Index k1 = inst.lc.k1();
  if (i < n) return inst.ts.X.row(i).transpose();
  if (i < 2 * n) return -inst.ts.X.row(i - n).transpose();
  if (i < 2 * n + k1) return inst.lc.A.row(i - 2 * n).transpose();
  return -inst.lc.Gamma.row(i - 2 * n - k1).transpose();
}

double qbar_entry_direct(const Instance& inst, Eigen::Index i, Eigen::Index j) {
  return stacked_row_direct(inst, i).dot(stacked_row_direct(inst, j));
}

double objective_brute(const Instance& inst, const DualProblem& dp, const Eigen::VectorXd& theta) {
  const Eigen::Index total = dp.layout.total();
  double quad = 0.0;
  for (Eigen::Index i = 0; i < total; ++i) {
    for (Eigen::Index j = 0; j < total; ++j) {
      quad += theta[i] * qbar_entry_direct(inst, i, j) * theta[j];
    }
  }
  return 0.5 * quad + dp.l.dot(theta);
}

Eigen::VectorXd random_theta(Rng& rng, const DualProblem& dp) {
  Eigen::VectorXd theta = random_vector(rng, dp.layout.total());
  // Keep gamma/mu moderate; feasibility is irrelevant for these identities.
  return 0.5 * theta;
}

}  // namespace

TEST_CASE("qbar on the 1x1 worked instance") {
  const Instance inst = tiny_instance();
  const DualProblem dp(inst.ts, inst.lc, inst.hp);
  REQUIRE(dp.layout.total() == 4);

  const double expected[4][4] = {
      {4, -4, 2, -2}, {-4, 4, -2, 2}, {2, -2, 1, -1}, {-2, 2, -1, 1}};
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      CHECK(qbar_entry(dp, i, j) == doctest::Approx(expected[i][j]).epsilon(1e-14));
    }
  }
  const double l_expected[4] = {3, -3, 5, -1};
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(dp.l[i] == doctest::Approx(l_expected[i]).epsilon(1e-14));
    CHECK(dp.diag[i] == doctest::Approx(expected[i][i]).epsilon(1e-14));
  }
}

TEST_CASE("qbar symmetry, diagonal sign, block structure") {
  Rng seeds(7);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = make_instance(seeds.next_u64(), 4, 3, ConstraintKind::RandomMix);
    const DualProblem dp(inst.ts, inst.lc, inst.hp);
    const Eigen::Index total = dp.layout.total();
    const Eigen::Index n = dp.layout.n;
    Rng rng(1234 + static_cast<std::uint64_t>(rep));
    for (int k = 0; k < 30; ++k) {
      const Eigen::Index i = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(total));
      const Eigen::Index j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(total));
      CHECK(qbar_entry(dp, i, j) == doctest::Approx(qbar_entry(dp, j, i)).epsilon(1e-12));
      CHECK(qbar_entry(dp, i, j) == doctest::Approx(qbar_entry_direct(inst, i, j)).epsilon(1e-12));
    }
    for (Eigen::Index i = 0; i < total; ++i) CHECK(qbar_entry(dp, i, i) >= 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        CHECK(qbar_entry(dp, i, n + j) == doctest::Approx(-qbar_entry(dp, i, j)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("qbar_column matches the entrywise definition") {
  const Instance tiny = tiny_instance();
  const DualProblem dp_tiny(tiny.ts, tiny.lc, tiny.hp);
  Eigen::VectorXd col(4);
  qbar_column(dp_tiny, 2, col);
  const double expected[4] = {2, -2, 1, -1};
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(col[i] == doctest::Approx(expected[i]).epsilon(1e-14));

  Rng seeds(11);
  for (int rep = 0; rep < 8; ++rep) {
    const Instance inst = make_instance(seeds.next_u64(), 5, 2, ConstraintKind::Simplex);
    const DualProblem dp(inst.ts, inst.lc, inst.hp);
    Eigen::VectorXd out(dp.layout.total());
    for (Eigen::Index j = 0; j < dp.layout.total(); ++j) {
      qbar_column(dp, j, out);
      for (Eigen::Index i = 0; i < dp.layout.total(); ++i) {
        CHECK(out[i] == doctest::Approx(qbar_entry_direct(inst, i, j)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("objective agrees with the entrywise quadratic form") {
  const Instance tiny = tiny_instance();
  const DualProblem dp_tiny(tiny.ts, tiny.lc, tiny.hp);
  CHECK(objective(dp_tiny, Eigen::VectorXd::Zero(4)) == 0.0);
  Eigen::VectorXd theta(4);
  theta << 0.1, 0.1, 0.0, 0.0;
  CHECK(objective(dp_tiny, theta) == doctest::Approx(0.0).epsilon(1e-14));

  Rng seeds(21);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = make_instance(seeds.next_u64(), 4, 2, ConstraintKind::RandomMix);
    const DualProblem dp(inst.ts, inst.lc, inst.hp);
    Rng rng(99 + static_cast<std::uint64_t>(rep));
    const Eigen::VectorXd t = random_theta(rng, dp);
    CHECK(objective(dp, t) == doctest::Approx(objective_brute(inst, dp, t)).epsilon(1e-10));
  }
}

TEST_CASE("gradient at the origin is l; worked column case") {
  const Instance tiny = tiny_instance();
  const DualProblem dp(tiny.ts, tiny.lc, tiny.hp);
  const Eigen::VectorXd g0 = gradient_full(dp, Eigen::VectorXd::Zero(4));
  CHECK((g0 - dp.l).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0).epsilon(1e-14));

  Eigen::VectorXd theta(4);
  theta << 0.0, 0.0, 1.0, 0.0;
  const Eigen::VectorXd g = gradient_full(dp, theta);
  const double expected[4] = {5, -5, 6, -2};
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(expected[i]).epsilon(1e-13));
}

TEST_CASE("gradient matches central finite differences") {
  const double h = 1e-5;
  Rng seeds(31);
  int checked = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = make_instance(seeds.next_u64(), 4, 3, ConstraintKind::RandomMix);
    const DualProblem dp(inst.ts, inst.lc, inst.hp);
    Rng rng(500 + static_cast<std::uint64_t>(rep));
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd theta = random_theta(rng, dp);
      const Eigen::VectorXd g = gradient_full(dp, theta);
      for (Eigen::Index c = 0; c < dp.layout.total(); ++c) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp[c] += h;
        tm[c] -= h;
        const double fd = (objective(dp, tp) - objective(dp, tm)) / (2.0 * h);
        CHECK(g[c] == doctest::Approx(fd).epsilon(1e-4));
      }
      ++checked;
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("recover_beta and the objective identity") {
  const Instance tiny = tiny_instance();
  const DualProblem dp(tiny.ts, tiny.lc, tiny.hp);
  CHECK(recover_beta(dp, Eigen::VectorXd::Zero(4)).isZero(0.0));
  Eigen::VectorXd theta(4);
  theta << 0.0, 0.0, 0.0, 1.0;
  CHECK(recover_beta(dp, theta)[0] == doctest::Approx(1.0).epsilon(1e-14));

  Rng seeds(41);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = make_instance(seeds.next_u64(), 5, 3, ConstraintKind::RandomMix);
    const DualProblem dpr(inst.ts, inst.lc, inst.hp);
    Rng rng(600 + static_cast<std::uint64_t>(rep));
    const Eigen::VectorXd t = random_theta(rng, dpr);
    const Eigen::VectorXd beta = recover_beta(dpr, t);
    const double lhs = 0.5 * beta.squaredNorm() + dpr.l.dot(t);
    const double rhs = objective(dpr, t);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    // Gramian positive semidefiniteness through the same identity.
    CHECK(0.5 * beta.squaredNorm() >= 0.0);
    CHECK(objective_brute(inst, dpr, t) - dpr.l.dot(t) >= -1e-10);
  }
}

TEST_CASE("intercept and epsilon from one free index per side") {
  // Data built from beta = [1], beta0 = 0.5, eps = 0.2 with sample 0 on the
  // upper tube edge and sample 1 on the lower one.
  Instance inst;
  inst.ts.X.resize(2, 1);
  inst.ts.X << 1.0, 2.0;
  inst.ts.y.resize(2);
  inst.ts.y << 1.0 + 0.5 - 0.2, 2.0 + 0.5 + 0.2;
  inst.lc = LinearConstraints::none(1);
  inst.hp = Hyperparameters{1.0, 0.5, 1e-3, kAutoMaxIter};
  const DualProblem dp(inst.ts, inst.lc, inst.hp);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
  theta[0] = 0.1;  // alpha_0 free
  theta[3] = 0.1;  // alpha*_1 free
  Eigen::VectorXd beta(1);
  beta << 1.0;

  const InterceptEpsilon ie = recover_intercept_epsilon(dp, theta, beta);
  CHECK(ie.beta0 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ie.epsilon == doctest::Approx(0.2).epsilon(1e-9));
  CHECK_FALSE(ie.degenerate);

  SUBCASE("negating y and swapping alpha blocks negates beta0, keeps epsilon") {
    Instance neg = inst;
    neg.ts.y = -inst.ts.y;
    const DualProblem dpn(neg.ts, neg.lc, neg.hp);
    Eigen::VectorXd swapped = Eigen::VectorXd::Zero(4);
    swapped[2] = theta[0];  // alpha* takes alpha's values
    swapped[1] = theta[3];  // alpha takes alpha*'s
    const InterceptEpsilon ien = recover_intercept_epsilon(dpn, swapped, -beta);
    CHECK(ien.beta0 == doctest::Approx(-ie.beta0).epsilon(1e-9));
    CHECK(ien.epsilon == doctest::Approx(ie.epsilon).epsilon(1e-9));
  }

  SUBCASE("no free indices falls back to the median residual") {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
    const InterceptEpsilon fb = recover_intercept_epsilon(dp, zero, beta);
    CHECK(fb.degenerate);
    CHECK(fb.epsilon == 0.0);
    // residuals are 0.3 and 0.7, median of two = their midpoint
    CHECK(fb.beta0 == doctest::Approx(0.5).epsilon(1e-12));
  }
}
