#include "lcsvr/dual.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <vector>

namespace lcsvr {

namespace {

// Stacked row m_i of [X; -X; A; -Gamma], expressed as (sign, matrix, row).
struct StackedRow {
  double sign;
  const Eigen::MatrixXd* mat;
  Eigen::Index row;
};

StackedRow stacked_row(const DualProblem& dp, Eigen::Index i) {
  const ThetaLayout& L = dp.layout;
  if (i < L.n) return {1.0, &dp.ts.X, i};
  if (i < 2 * L.n) return {-1.0, &dp.ts.X, i - L.n};
  if (i < L.mu_begin()) return {1.0, &dp.lc.A, i - L.gamma_begin()};
  return {-1.0, &dp.lc.Gamma, i - L.mu_begin()};
}

}  // namespace

DualProblem::DualProblem(const TrainingSet& ts_, const LinearConstraints& lc_,
                         const Hyperparameters& hp_)
    : ts(ts_), lc(lc_), hp(hp_) {
  layout.n = ts.n();
  layout.k1 = lc.k1();
  layout.k2 = lc.k2();
  const Eigen::Index total = layout.total();

  l.resize(total);
  l.head(layout.n) = ts.y;
  l.segment(layout.n, layout.n) = -ts.y;
  l.segment(layout.gamma_begin(), layout.k1) = lc.b;
  l.tail(layout.k2) = -lc.d;

  diag.resize(total);
  for (Eigen::Index i = 0; i < layout.n; ++i) {
    const double q = ts.X.row(i).squaredNorm();
    diag[i] = q;
    diag[layout.n + i] = q;
  }
  for (Eigen::Index j = 0; j < layout.k1; ++j) {
    diag[layout.gamma_begin() + j] = lc.A.row(j).squaredNorm();
  }
  for (Eigen::Index j = 0; j < layout.k2; ++j) {
    diag[layout.mu_begin() + j] = lc.Gamma.row(j).squaredNorm();
  }

  max_iter = hp.max_iter == kAutoMaxIter ? 100 * total : hp.max_iter;
}

double qbar_entry(const DualProblem& dp, Eigen::Index i, Eigen::Index j) {
  assert(i < dp.layout.total() && j < dp.layout.total());
  const StackedRow a = stacked_row(dp, i);
  const StackedRow b = stacked_row(dp, j);
  return a.sign * b.sign * a.mat->row(a.row).dot(b.mat->row(b.row));
}

void qbar_column(const DualProblem& dp, Eigen::Index j, Eigen::Ref<Eigen::VectorXd> out) {
  assert(j < dp.layout.total() && out.size() == dp.layout.total());
  const ThetaLayout& L = dp.layout;
  const StackedRow s = stacked_row(dp, j);
  const Eigen::VectorXd v = s.sign * s.mat->row(s.row).transpose();
  out.head(L.n).noalias() = dp.ts.X * v;
  out.segment(L.n, L.n) = -out.head(L.n);
  out.segment(L.gamma_begin(), L.k1).noalias() = dp.lc.A * v;
  out.tail(L.k2).noalias() = -(dp.lc.Gamma * v);
}

Eigen::VectorXd recover_beta(const DualProblem& dp,
                             const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const ThetaLayout& L = dp.layout;
  assert(theta.size() == L.total());
  Eigen::VectorXd beta =
      -(dp.ts.X.transpose() * (theta.head(L.n) - theta.segment(L.n, L.n)));
  if (L.k1 > 0) beta.noalias() -= dp.lc.A.transpose() * theta.segment(L.gamma_begin(), L.k1);
  if (L.k2 > 0) beta.noalias() += dp.lc.Gamma.transpose() * theta.tail(L.k2);
  return beta;
}

double objective(const DualProblem& dp, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  // theta^T Qbar theta == ||beta(theta)||^2 since Qbar is the Gram matrix of
  // the stacked rows and beta = -[X; -X; A; -Gamma]^T theta.
  const Eigen::VectorXd beta = recover_beta(dp, theta);
  return 0.5 * beta.squaredNorm() + dp.l.dot(theta);
}

Eigen::VectorXd gradient_full(const DualProblem& dp,
                              const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const ThetaLayout& L = dp.layout;
  const Eigen::VectorXd beta = recover_beta(dp, theta);
  Eigen::VectorXd g(L.total());
  g.head(L.n).noalias() = -(dp.ts.X * beta);
  g.head(L.n) += dp.ts.y;
  g.segment(L.n, L.n) = -g.head(L.n);
  if (L.k1 > 0) {
    g.segment(L.gamma_begin(), L.k1).noalias() = -(dp.lc.A * beta);
    g.segment(L.gamma_begin(), L.k1) += dp.lc.b;
  }
  if (L.k2 > 0) {
    g.tail(L.k2).noalias() = dp.lc.Gamma * beta;
    g.tail(L.k2) -= dp.lc.d;
  }
  return g;
}

InterceptEpsilon recover_intercept_epsilon(const DualProblem& dp,
                                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                                           const Eigen::Ref<const Eigen::VectorXd>& beta) {
  const ThetaLayout& L = dp.layout;
  const double box = dp.box();
  const Eigen::VectorXd r = dp.ts.y - dp.ts.X * beta;  // residuals y_i - beta^T X_i

  double sum_f = 0.0, sum_fs = 0.0;
  Eigen::Index count_f = 0, count_fs = 0;
  for (Eigen::Index i = 0; i < L.n; ++i) {
    const double a = theta[i];
    const double as = theta[L.n + i];
    if (a > 0.0 && a < box) {
      sum_f += r[i];
      ++count_f;
    }
    if (as > 0.0 && as < box) {
      sum_fs += r[i];
      ++count_fs;
    }
  }

  InterceptEpsilon out;
  if (count_f > 0 && count_fs > 0) {
    // Free alpha_i: beta^T X_i + beta0 - y_i = eps, so r_i = beta0 - eps.
    // Free alpha*_i: y_i - beta^T X_i - beta0 = eps, so r_i = beta0 + eps.
    const double m_f = sum_f / static_cast<double>(count_f);
    const double m_fs = sum_fs / static_cast<double>(count_fs);
    out.beta0 = 0.5 * (m_f + m_fs);
    out.epsilon = std::max(0.5 * (m_fs - m_f), 0.0);
  } else if (count_f > 0 || count_fs > 0) {
    out.beta0 = count_f > 0 ? sum_f / static_cast<double>(count_f)
                            : sum_fs / static_cast<double>(count_fs);
    out.epsilon = 0.0;
    out.degenerate = true;
  } else {
    std::vector<double> rs(r.data(), r.data() + r.size());
    const std::size_t mid = rs.size() / 2;
    std::nth_element(rs.begin(), rs.begin() + mid, rs.end());
    double med = rs[mid];
    if (rs.size() % 2 == 0) {
      const double lo = *std::max_element(rs.begin(), rs.begin() + mid);
      med = 0.5 * (med + lo);
    }
    out.beta0 = med;
    out.epsilon = 0.0;
    out.degenerate = true;
  }
  return out;
}

}  // namespace lcsvr
