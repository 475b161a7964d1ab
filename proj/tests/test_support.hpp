#pragma once

#include <cstdint>
#include <string>

#include "lcsvr/presets.hpp"
#include "lcsvr/problem.hpp"
#include "lcsvr/rng.hpp"

namespace lcsvr::testsupport {

enum class ConstraintKind { None, NonNeg, Simplex, RandomMix };

struct Instance {
  TrainingSet ts;
  LinearConstraints lc;
  Hyperparameters hp;
};

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  }
  return m;
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index size) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = rng.gaussian();
  return v;
}

/// Random desk-scale instance. RandomMix draws one inequality and one
/// equality row; the polyhedron is non-empty almost surely since the
/// inequality restricted to the equality's hyperplane stays non-trivial.
inline Instance make_instance(std::uint64_t seed, Eigen::Index n, Eigen::Index p,
                              ConstraintKind kind, double C = 1.0, double nu = 0.5,
                              double tau = 1e-3) {
  Rng rng(seed);
  Instance inst;
  inst.ts.X = random_matrix(rng, n, p);
  inst.ts.y = random_vector(rng, n);
  inst.hp = Hyperparameters{C, nu, tau, kAutoMaxIter};

  switch (kind) {
    case ConstraintKind::None:
      inst.lc = LinearConstraints::none(p);
      break;
    case ConstraintKind::NonNeg:
      inst.lc = make_constraints(PresetKind::Nnsvr, p);
      break;
    case ConstraintKind::Simplex:
      inst.lc = make_constraints(PresetKind::Ssvr, p);
      break;
    case ConstraintKind::RandomMix: {
      inst.lc = LinearConstraints::none(p);
      inst.lc.A = random_matrix(rng, 1, p);
      while (inst.lc.A.row(0).norm() < 0.1) inst.lc.A = random_matrix(rng, 1, p);
      inst.lc.b = random_vector(rng, 1);
      inst.lc.Gamma = random_matrix(rng, 1, p);
      while (inst.lc.Gamma.row(0).norm() < 0.1) inst.lc.Gamma = random_matrix(rng, 1, p);
      inst.lc.d = random_vector(rng, 1);
      break;
    }
  }
  return inst;
}

/// The 1x1 worked instance: X=[[2]], y=[3], A=[[1]], b=[5], Gamma=[[1]], d=[1].
inline Instance tiny_instance(double C = 1.0, double nu = 0.5, double tau = 1e-3) {
  Instance inst;
  inst.ts.X = Eigen::MatrixXd::Constant(1, 1, 2.0);
  inst.ts.y = Eigen::VectorXd::Constant(1, 3.0);
  inst.lc.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  inst.lc.b = Eigen::VectorXd::Constant(1, 5.0);
  inst.lc.Gamma = Eigen::MatrixXd::Constant(1, 1, 1.0);
  inst.lc.d = Eigen::VectorXd::Constant(1, 1.0);
  inst.hp = Hyperparameters{C, nu, tau, kAutoMaxIter};
  return inst;
}

}  // namespace lcsvr::testsupport
