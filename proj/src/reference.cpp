#include "lcsvr/reference.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lcsvr {

namespace {

constexpr Eigen::Index kOracleSizeCap = 24;
constexpr double kFeasTol = 1e-9;
constexpr double kMultTol = 1e-9;
constexpr double kStatTol = 1e-8;
constexpr double kJitter = 1e-12;

// One admissible bound pattern of a single alpha (or alpha*) block together
// with everything the candidate solve needs from it.
struct BlockPattern {
  std::vector<std::int8_t> state;     // 0 = at 0, 1 = at C/n, 2 = free
  std::vector<Eigen::Index> free_ix;  // local indices of free coordinates
  std::vector<Eigen::Index> top_ix;   // local indices at C/n
  double free_sum_target = 0.0;       // required sum of the free coordinates
  Eigen::VectorXd qfix;               // Qbar * (box on the top coordinates)
};

// Enumerates the 3^n bound patterns of one block and keeps those for which
// the block sum constraint e^T alpha = C nu / 2 can still be met: the fixed
// part must not overshoot, and the free coordinates (each in [0, C/n]) must
// be able to cover the remainder.
std::vector<BlockPattern> admissible_block_patterns(const Eigen::MatrixXd& qbar,
                                                    Eigen::Index block_offset, Eigen::Index n,
                                                    double box, double half_sum) {
  std::vector<BlockPattern> out;
  std::vector<std::int8_t> state(static_cast<std::size_t>(n), 0);
  const double tol = 1e-12 * std::max(1.0, half_sum);
  while (true) {
    Eigen::Index n_top = 0, n_free = 0;
    for (std::int8_t s : state) {
      n_top += s == 1;
      n_free += s == 2;
    }
    const double fixed = static_cast<double>(n_top) * box;
    const bool ok = n_free == 0
                        ? std::abs(fixed - half_sum) <= tol
                        : fixed - tol <= half_sum &&
                              half_sum <= fixed + static_cast<double>(n_free) * box + tol;
    if (ok) {
      BlockPattern bp;
      bp.state = state;
      bp.free_sum_target = half_sum - fixed;
      bp.qfix = Eigen::VectorXd::Zero(qbar.rows());
      for (Eigen::Index i = 0; i < n; ++i) {
        if (state[static_cast<std::size_t>(i)] == 2) bp.free_ix.push_back(i);
        if (state[static_cast<std::size_t>(i)] == 1) {
          bp.top_ix.push_back(i);
          bp.qfix += box * qbar.col(block_offset + i);
        }
      }
      out.push_back(std::move(bp));
    }
    // next pattern in mixed radix 3
    Eigen::Index pos = 0;
    while (pos < n && state[static_cast<std::size_t>(pos)] == 2) {
      state[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
    ++state[static_cast<std::size_t>(pos)];
  }
  return out;
}

// Qbar assembled directly from its block definition; the solver-side
// qbar_entry/qbar_column path is checked against this in tests.
Eigen::MatrixXd materialize_qbar(const DualProblem& dp) {
  const ThetaLayout& L = dp.layout;
  const Eigen::MatrixXd& X = dp.ts.X;
  const Eigen::MatrixXd& A = dp.lc.A;
  const Eigen::MatrixXd& G = dp.lc.Gamma;
  Eigen::MatrixXd Q = X * X.transpose();
  Eigen::MatrixXd out(L.total(), L.total());
  const Eigen::Index n = L.n, k1 = L.k1, k2 = L.k2;
  out.topLeftCorner(n, n) = Q;
  out.block(0, n, n, n) = -Q;
  out.block(n, 0, n, n) = -Q;
  out.block(n, n, n, n) = Q;
  if (k1 > 0) {
    const Eigen::MatrixXd XAt = X * A.transpose();
    out.block(0, 2 * n, n, k1) = XAt;
    out.block(n, 2 * n, n, k1) = -XAt;
    out.block(2 * n, 0, k1, n) = XAt.transpose();
    out.block(2 * n, n, k1, n) = -XAt.transpose();
    out.block(2 * n, 2 * n, k1, k1) = A * A.transpose();
  }
  if (k2 > 0) {
    const Eigen::MatrixXd XGt = X * G.transpose();
    out.block(0, 2 * n + k1, n, k2) = -XGt;
    out.block(n, 2 * n + k1, n, k2) = XGt;
    out.block(2 * n + k1, 0, k2, n) = -XGt.transpose();
    out.block(2 * n + k1, n, k2, n) = XGt.transpose();
    out.block(2 * n + k1, 2 * n + k1, k2, k2) = G * G.transpose();
    if (k1 > 0) {
      const Eigen::MatrixXd AGt = A * G.transpose();
      out.block(2 * n, 2 * n + k1, k1, k2) = -AGt;
      out.block(2 * n + k1, 2 * n, k2, k1) = -AGt.transpose();
    }
  }
  return out;
}

struct CandidateWorkspace {
  Eigen::MatrixXd kkt;
  Eigen::VectorXd rhs;
  Eigen::VectorXd sol;
  Eigen::VectorXd theta;
  Eigen::VectorXd grad;
  std::vector<Eigen::Index> free_global;  // global indices of free coordinates
};

}  // namespace

OracleResult oracle_solve_dual(const DualProblem& dp) {
  const ThetaLayout& L = dp.layout;
  const Eigen::Index total = L.total();
  if (total > kOracleSizeCap) {
    throw InstanceTooLarge("oracle handles up to " + std::to_string(kOracleSizeCap) +
                           " dual variables, got " + std::to_string(total));
  }
  const Eigen::Index n = L.n, k1 = L.k1, k2 = L.k2;
  const double box = dp.hp.C / static_cast<double>(n);
  const double half_sum = 0.5 * dp.hp.C * dp.hp.nu;

  const Eigen::MatrixXd qbar = materialize_qbar(dp);
  Eigen::VectorXd l(total);
  l.head(n) = dp.ts.y;
  l.segment(n, n) = -dp.ts.y;
  l.segment(2 * n, k1) = dp.lc.b;
  l.tail(k2) = -dp.lc.d;

  const std::vector<BlockPattern> pat_a = admissible_block_patterns(qbar, 0, n, box, half_sum);
  const std::vector<BlockPattern> pat_as = admissible_block_patterns(qbar, n, n, box, half_sum);
  if (pat_a.empty() || pat_as.empty()) {
    throw NoFeasiblePoint("no bound pattern satisfies the block sum constraints");
  }

  CandidateWorkspace ws;
  const Eigen::Index max_dim = total + 2;
  ws.kkt.resize(max_dim, max_dim);
  ws.rhs.resize(max_dim);
  ws.theta.resize(total);
  ws.grad.resize(total);
  ws.free_global.reserve(static_cast<std::size_t>(total));

  bool any_feasible = false;
  const std::uint64_t gamma_patterns = k1 > 0 ? (1ull << k1) : 1;

  for (const BlockPattern& pa : pat_a) {
    for (const BlockPattern& pas : pat_as) {
      for (std::uint64_t gmask = 0; gmask < gamma_patterns; ++gmask) {
        // Assemble the free coordinate list: free alphas, free alpha*s, the
        // gamma coordinates chosen free by gmask, and every mu.
        ws.free_global.clear();
        for (Eigen::Index i : pa.free_ix) ws.free_global.push_back(i);
        const Eigen::Index nfa = static_cast<Eigen::Index>(ws.free_global.size());
        for (Eigen::Index i : pas.free_ix) ws.free_global.push_back(n + i);
        const Eigen::Index nfas = static_cast<Eigen::Index>(ws.free_global.size()) - nfa;
        for (Eigen::Index j = 0; j < k1; ++j) {
          if (gmask & (1ull << j)) ws.free_global.push_back(2 * n + j);
        }
        for (Eigen::Index j = 0; j < k2; ++j) ws.free_global.push_back(2 * n + k1 + j);

        const Eigen::Index nf = static_cast<Eigen::Index>(ws.free_global.size());
        const Eigen::Index dim = nf + (nfa > 0 ? 1 : 0) + (nfas > 0 ? 1 : 0);
        const Eigen::Index col_a = nf;
        const Eigen::Index col_b = nf + (nfa > 0 ? 1 : 0);

        // Stationarity rows for free coordinates; the equality multipliers
        // enter as a = sigma + delta on alpha rows and b = sigma - delta on
        // alpha* rows. Fixed-at-bound coordinates contribute through qfix.
        auto K = ws.kkt.topLeftCorner(dim, dim);
        auto rhs = ws.rhs.head(dim);
        K.setZero();
        for (Eigen::Index r = 0; r < nf; ++r) {
          const Eigen::Index c = ws.free_global[static_cast<std::size_t>(r)];
          for (Eigen::Index s = 0; s < nf; ++s) {
            K(r, s) = qbar(c, ws.free_global[static_cast<std::size_t>(s)]);
          }
          if (r < nfa) K(r, col_a) = -1.0;
          else if (r < nfa + nfas) K(r, col_b) = -1.0;
          rhs[r] = -l[c] - pa.qfix[c] - pas.qfix[c];
        }
        if (nfa > 0) {
          K.row(col_a).head(nfa).setOnes();
          rhs[col_a] = pa.free_sum_target;
        }
        if (nfas > 0) {
          K.row(col_b).segment(nfa, nfas).setOnes();
          rhs[col_b] = pas.free_sum_target;
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
        Eigen::VectorXd z = lu.solve(rhs);
        double resid = (K * z - rhs).lpNorm<Eigen::Infinity>();
        const double rhs_scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
        if (!z.allFinite() || resid > 1e-9 * rhs_scale) {
          Eigen::MatrixXd jittered = K;
          jittered.diagonal().array() += kJitter;
          z = Eigen::PartialPivLU<Eigen::MatrixXd>(jittered).solve(rhs);
          if (!z.allFinite()) continue;
        }

        // Rebuild the full theta and check box feasibility of the free part.
        ws.theta.setZero();
        for (Eigen::Index i : pa.top_ix) ws.theta[i] = box;
        for (Eigen::Index i : pas.top_ix) ws.theta[n + i] = box;
        bool feasible = true;
        for (Eigen::Index r = 0; r < nf && feasible; ++r) {
          const Eigen::Index c = ws.free_global[static_cast<std::size_t>(r)];
          const double v = z[r];
          ws.theta[c] = v;
          if (c < 2 * n) {
            feasible = v >= -kFeasTol && v <= box + kFeasTol;
          } else if (c < 2 * n + k1) {
            feasible = v >= -kFeasTol;
          }
        }
        if (!feasible) continue;
        any_feasible = true;

        ws.grad.noalias() = qbar * ws.theta;
        ws.grad += l;
        const double scale = std::max(1.0, ws.grad.lpNorm<Eigen::Infinity>());

        // Equality multipliers: solved values when the block has free
        // coordinates, otherwise any value inside the interval forced by the
        // bound coordinates' sign conditions.
        double mult_a = nfa > 0 ? z[col_a] : 0.0;
        double mult_b = nfas > 0 ? z[col_b] : 0.0;
        bool mult_ok = true;
        for (int blk = 0; blk < 2 && mult_ok; ++blk) {
          const bool has_free = blk == 0 ? nfa > 0 : nfas > 0;
          if (has_free) continue;
          const BlockPattern& bp = blk == 0 ? pa : pas;
          const Eigen::Index off = blk == 0 ? 0 : n;
          double lo = -std::numeric_limits<double>::infinity();
          double hi = std::numeric_limits<double>::infinity();
          for (Eigen::Index i = 0; i < n; ++i) {
            const double g = ws.grad[off + i];
            if (bp.state[static_cast<std::size_t>(i)] == 1) lo = std::max(lo, g);
            else hi = std::min(hi, g);
          }
          if (lo > hi + 2.0 * kMultTol * scale) {
            mult_ok = false;
          } else {
            const double m = std::isfinite(lo) ? (std::isfinite(hi) ? 0.5 * (lo + hi) : lo)
                                               : (std::isfinite(hi) ? hi : 0.0);
            (blk == 0 ? mult_a : mult_b) = m;
          }
        }
        if (!mult_ok) continue;

        // Certificate: stationarity on the free set, sign conditions on the
        // multipliers of the active bounds.
        double stat_resid = 0.0;
        for (Eigen::Index r = 0; r < nf; ++r) {
          const Eigen::Index c = ws.free_global[static_cast<std::size_t>(r)];
          const double target = c < n ? mult_a : (c < 2 * n ? mult_b : 0.0);
          stat_resid = std::max(stat_resid, std::abs(ws.grad[c] - target));
        }
        if (stat_resid > kStatTol * scale) continue;

        double min_mult = std::numeric_limits<double>::infinity();
        auto consider = [&](double m) { min_mult = std::min(min_mult, m); };
        for (Eigen::Index i = 0; i < n; ++i) {
          const std::int8_t sa = pa.state[static_cast<std::size_t>(i)];
          if (sa == 0) consider(ws.grad[i] - mult_a);
          if (sa == 1) consider(mult_a - ws.grad[i]);
          const std::int8_t ss = pas.state[static_cast<std::size_t>(i)];
          if (ss == 0) consider(ws.grad[n + i] - mult_b);
          if (ss == 1) consider(mult_b - ws.grad[n + i]);
        }
        for (Eigen::Index j = 0; j < k1; ++j) {
          if (!(gmask & (1ull << j))) consider(ws.grad[2 * n + j]);
        }
        if (min_mult < -kMultTol * scale) continue;

        OracleResult result;
        result.theta = ws.theta;
        result.objective = 0.5 * ws.theta.dot(qbar * ws.theta) + l.dot(ws.theta);
        result.certificate.alpha_state.assign(pa.state.begin(), pa.state.end());
        result.certificate.alpha_state.insert(result.certificate.alpha_state.end(),
                                              pas.state.begin(), pas.state.end());
        result.certificate.gamma_state.resize(static_cast<std::size_t>(k1));
        for (Eigen::Index j = 0; j < k1; ++j) {
          result.certificate.gamma_state[static_cast<std::size_t>(j)] =
              (gmask & (1ull << j)) ? 1 : 0;
        }
        result.certificate.eq_mult_alpha = mult_a;
        result.certificate.eq_mult_alpha_star = mult_b;
        result.certificate.stationarity_residual = stat_resid;
        result.certificate.min_multiplier = std::isfinite(min_mult) ? min_mult : 0.0;
        result.certificate.objective = result.objective;
        return result;
      }
    }
  }

  if (!any_feasible) throw NoFeasiblePoint("no active-set candidate was primal feasible");
  throw OracleError("feasible candidates exist but none certified as optimal");
}

Eigen::VectorXd nnls(const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index p = X.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  std::vector<bool> passive(static_cast<std::size_t>(p), false);
  Eigen::VectorXd w = X.transpose() * y;
  const double scale = std::max(1.0, w.lpNorm<Eigen::Infinity>());
  const double tol = 1e-10 * scale;
  const long cap = 10 * static_cast<long>(p) + 10;

  for (long outer = 0; outer < cap; ++outer) {
    Eigen::Index enter = -1;
    double best = tol;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && w[i] > best) {
        best = w[i];
        enter = i;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;

    for (long inner = 0; inner < cap; ++inner) {
      std::vector<Eigen::Index> pset;
      for (Eigen::Index i = 0; i < p; ++i) {
        if (passive[static_cast<std::size_t>(i)]) pset.push_back(i);
      }
      Eigen::MatrixXd Xp(X.rows(), static_cast<Eigen::Index>(pset.size()));
      for (std::size_t c = 0; c < pset.size(); ++c) Xp.col(static_cast<Eigen::Index>(c)) = X.col(pset[c]);
      const Eigen::VectorXd z = Xp.colPivHouseholderQr().solve(y);

      if (z.minCoeff() > 0.0) {
        beta.setZero();
        for (std::size_t c = 0; c < pset.size(); ++c) beta[pset[c]] = z[static_cast<Eigen::Index>(c)];
        break;
      }
      double step = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < pset.size(); ++c) {
        if (z[static_cast<Eigen::Index>(c)] <= 0.0) {
          const double bi = beta[pset[c]];
          step = std::min(step, bi / (bi - z[static_cast<Eigen::Index>(c)]));
        }
      }
      for (std::size_t c = 0; c < pset.size(); ++c) {
        const Eigen::Index i = pset[c];
        beta[i] += step * (z[static_cast<Eigen::Index>(c)] - beta[i]);
        if (beta[i] <= 1e-14 * scale) {
          beta[i] = 0.0;
          passive[static_cast<std::size_t>(i)] = false;
        }
      }
    }
    w = X.transpose() * (y - X * beta);
  }
  return beta;
}

Eigen::VectorXd sols(const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index p = X.cols();
  const Eigen::MatrixXd G = X.transpose() * X;
  const Eigen::VectorXd c = X.transpose() * y;
  const double scale = std::max(1.0, c.lpNorm<Eigen::Infinity>());
  const double tol = 1e-10 * scale;

  Eigen::VectorXd beta = Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
  std::vector<bool> zeroed(static_cast<std::size_t>(p), false);
  const long cap = 10 * static_cast<long>(p) + 10;

  for (long outer = 0; outer < cap; ++outer) {
    std::vector<Eigen::Index> fset;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (!zeroed[static_cast<std::size_t>(i)]) fset.push_back(i);
    }
    const Eigen::Index f = static_cast<Eigen::Index>(fset.size());

    // Equality-constrained solve on the free set.
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(f + 1, f + 1);
    Eigen::VectorXd rhs(f + 1);
    for (Eigen::Index r = 0; r < f; ++r) {
      for (Eigen::Index s = 0; s < f; ++s) K(r, s) = G(fset[static_cast<std::size_t>(r)], fset[static_cast<std::size_t>(s)]);
      K(r, f) = 1.0;
      K(f, r) = 1.0;
      rhs[r] = c[fset[static_cast<std::size_t>(r)]];
    }
    rhs[f] = 1.0;
    Eigen::VectorXd z = Eigen::PartialPivLU<Eigen::MatrixXd>(K).solve(rhs);
    if (!z.allFinite()) {
      K.diagonal().head(f).array() += 1e-12;
      z = Eigen::PartialPivLU<Eigen::MatrixXd>(K).solve(rhs);
    }

    if (z.head(f).minCoeff() >= 0.0) {
      beta.setZero();
      for (Eigen::Index r = 0; r < f; ++r) beta[fset[static_cast<std::size_t>(r)]] = z[r];
      const double rho = z[f];
      // Dual feasibility of the zeroed coordinates: eta_i = g_i + rho >= 0.
      const Eigen::VectorXd g = G * beta - c;
      Eigen::Index worst = -1;
      double worst_eta = -tol;
      for (Eigen::Index i = 0; i < p; ++i) {
        if (zeroed[static_cast<std::size_t>(i)] && g[i] + rho < worst_eta) {
          worst_eta = g[i] + rho;
          worst = i;
        }
      }
      if (worst < 0) return beta;
      zeroed[static_cast<std::size_t>(worst)] = false;
      continue;
    }

    // Step from the feasible beta toward z until a coordinate hits zero.
    double step = 1.0;
    for (Eigen::Index r = 0; r < f; ++r) {
      if (z[r] < 0.0) {
        const double bi = beta[fset[static_cast<std::size_t>(r)]];
        step = std::min(step, bi / (bi - z[r]));
      }
    }
    for (Eigen::Index r = 0; r < f; ++r) {
      const Eigen::Index i = fset[static_cast<std::size_t>(r)];
      beta[i] += step * (z[r] - beta[i]);
      if (beta[i] <= 1e-14) {
        beta[i] = 0.0;
        zeroed[static_cast<std::size_t>(i)] = true;
      }
    }
  }
  return beta;
}

Eigen::VectorXd pava_isotonic(const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index n = y.size();
  std::vector<double> value;
  std::vector<Eigen::Index> weight;
  value.reserve(static_cast<std::size_t>(n));
  weight.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    value.push_back(y[i]);
    weight.push_back(1);
    while (value.size() > 1 && value[value.size() - 2] > value.back()) {
      const double merged = (static_cast<double>(weight[weight.size() - 2]) * value[value.size() - 2] +
                             static_cast<double>(weight.back()) * value.back()) /
                            static_cast<double>(weight[weight.size() - 2] + weight.back());
      weight[weight.size() - 2] += weight.back();
      value[value.size() - 2] = merged;
      value.pop_back();
      weight.pop_back();
    }
  }
  Eigen::VectorXd out(n);
  Eigen::Index pos = 0;
  for (std::size_t b = 0; b < value.size(); ++b) {
    for (Eigen::Index k = 0; k < weight[b]; ++k) out[pos++] = value[b];
  }
  return out;
}

}  // namespace lcsvr
