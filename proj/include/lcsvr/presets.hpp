#pragma once

#include <string>

#include "lcsvr/problem.hpp"
#include "lcsvr/solver.hpp"

namespace lcsvr {

enum class PresetKind { Svr, Nnsvr, Ssvr, Isvr, Custom };
enum class ProjectionTarget { PositiveOrthant, Simplex };
enum class IsotonicOrder { Increasing, Decreasing };

struct ValidationError : std::runtime_error {
  explicit ValidationError(ValidationResult r)
      : std::runtime_error("invalid problem: " + r.to_string()), result(std::move(r)) {}
  ValidationResult result;
};

/// Constraint builders, feasible by construction:
///   Svr   -> no constraints
///   Nnsvr -> -I beta <= 0
///   Ssvr  -> -I beta <= 0 and e^T beta = 1
///   Isvr  -> rows (e_i - e_{i+1})^T, i.e. beta_i - beta_{i+1} <= 0 for the
///            increasing order (p >= 2); the flag flips to decreasing.
LinearConstraints make_constraints(PresetKind kind, Eigen::Index p,
                                   IsotonicOrder order = IsotonicOrder::Increasing);

struct FittedModel {
  PrimalSolution primal;
  PresetKind kind = PresetKind::Svr;
  bool projected = false;  // projection baseline (P-SVR / Cibersort)
  ProjectionTarget target = ProjectionTarget::PositiveOrthant;
  Hyperparameters hp;
  SolveReport report;
};

/// Builds the preset constraints, solves the dual by generalized SMO and
/// recovers (beta, beta0, epsilon). Throws ValidationError on invalid input.
FittedModel fit(const TrainingSet& ts, PresetKind kind, const Hyperparameters& hp);

/// Same pipeline with caller-supplied constraints; the caller is responsible
/// for the polyhedron being non-empty (an infeasible one shows up as an
/// unbounded dual, i.e. termination by iteration cap with a diverging
/// objective).
FittedModel fit_with_constraints(const TrainingSet& ts, const LinearConstraints& lc,
                                 const Hyperparameters& hp);

Eigen::VectorXd predict(const FittedModel& m, const Eigen::Ref<const Eigen::MatrixXd>& Xnew);

/// Euclidean projection onto {x : x >= 0, sum x = 1} (sort and threshold).
Eigen::VectorXd project_simplex(const Eigen::Ref<const Eigen::VectorXd>& v);

/// The projection baselines: fit an unconstrained SVR, project beta onto the
/// target set, then recompute the intercept with the projected coefficients.
FittedModel fit_projected(const TrainingSet& ts, const Hyperparameters& hp,
                          ProjectionTarget target);

std::string kind_name(const FittedModel& m);

/// Flat text model format: sections [meta] (kind/C/nu/tau), [beta] with one
/// coefficient per line, [intercept], [epsilon]. Floats use the shortest
/// round-trip representation, so save/load is bit-exact.
std::string model_to_string(const FittedModel& m);
FittedModel model_from_string(const std::string& text);
void save_model(const FittedModel& m, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace lcsvr
