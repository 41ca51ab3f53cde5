#include "armada/nlp_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

namespace armada {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SolveResult solve_nlp(const Transcription& tr, const Eigen::VectorXd& x0,
                      const SolverOptions& opt, const SolveControls* ctl) {
  const auto t0 = std::chrono::steady_clock::now();
  const int nx = tr.num_vars();
  const int neq = tr.num_eq();
  const int nineq = tr.num_ineq();
  const int ncost = tr.num_cost_terms();

  SolveResult res;
  res.x = x0;
  res.lambda = Eigen::VectorXd::Zero(neq);
  res.nu = Eigen::VectorXd::Zero(nineq);
  SolveStats& st = res.stats;

  std::vector<char> pin(nx, 0);
  if (ctl) {
    if (ctl->lambda0 && ctl->lambda0->size() == neq) res.lambda = *ctl->lambda0;
    if (ctl->nu0 && ctl->nu0->size() == nineq) res.nu = ctl->nu0->cwiseMax(0.0);
    for (int i : ctl->pinned) pin[i] = 1;
  }

  double rho = (ctl && ctl->rho0 > 0.0) ? ctl->rho0 : opt.penalty0;
  JacobianPattern pat = tr.pattern(res.x);
  SparseRows jac;
  Eigen::VectorXd eq(neq), ineq(nineq), terms(ncost);
  double f = 0.0;
  Eigen::VectorXd g(nx);
  // Per-row Gauss-Newton weight of the augmented Lagrangian (rho for scaled
  // constraint rows, 1 for cost terms, 0 for inactive inequalities).
  Eigen::VectorXd gnw = Eigen::VectorXd::Zero(neq + nineq + ncost);
  // Constraint rows are rescaled to unit Jacobian row norm so one penalty
  // suits all of them; tolerances keep applying to the raw residuals.
  Eigen::VectorXd rscale;

  auto al_value = [&](const Eigen::VectorXd& e, const Eigen::VectorXd& q, double fv) {
    double L = fv;
    for (int r = 0; r < neq; ++r) {
      const double es = rscale[r] * e[r];
      L += res.lambda[r] * es + 0.5 * rho * es * es;
    }
    for (int r = 0; r < nineq; ++r) {
      const double qs = rscale[neq + r] * q[r];
      const double t = std::max(0.0, res.nu[r] - rho * qs);
      L += (t * t - res.nu[r] * res.nu[r]) / (2.0 * rho);
    }
    return L;
  };

  // Evaluates residuals, cost, the AL gradient and the GN weights at res.x.
  auto refresh = [&]() {
    while (!tr.jacobian(res.x, pat, jac, eq, ineq, terms)) {
      pat = tr.pattern(res.x);
      ++st.pattern_rebuilds;
    }
    ++st.jacobian_evals;
    if (rscale.size() == 0) {
      rscale = Eigen::VectorXd::Ones(neq + nineq);
      for (int r = 0; r < neq + nineq; ++r) {
        double n2 = 0.0;
        for (const auto& [col, val] : jac.rows[r]) n2 += val * val;
        rscale[r] = 1.0 / std::max(1.0, std::sqrt(n2));
      }
    }
    f = terms.squaredNorm();
    g.setZero();
    for (int r = 0; r < neq + nineq + ncost; ++r) {
      double w;
      if (r < neq) {
        const double s = rscale[r];
        w = (res.lambda[r] + rho * s * eq[r]) * s;
        gnw[r] = rho * s * s;
      } else if (r < neq + nineq) {
        const double s = rscale[r];
        const double t = res.nu[r - neq] - rho * s * ineq[r - neq];
        w = t > 0.0 ? -t * s : 0.0;
        gnw[r] = t > 0.0 ? rho * s * s : 0.0;
      } else {
        // Least-squares cost rows: d(sum t^2) = 2 t J, GN curvature 2 J^T J.
        w = 2.0 * terms[r - neq - nineq];
        gnw[r] = 2.0;
      }
      if (w == 0.0) continue;
      for (const auto& [col, val] : jac.rows[r]) g[col] += w * val;
    }
    for (int i = 0; i < nx; ++i)
      if (pin[i]) g[i] = 0.0;
  };

  // Gauss-Newton normal matrix J^T W J (lower triangle), assembled sparse.
  std::vector<Eigen::Triplet<double>> trips;
  auto assemble_h = [&]() {
    trips.clear();
    for (int r = 0; r < neq + nineq + ncost; ++r) {
      const double w = gnw[r];
      if (w == 0.0) continue;
      const auto& row = jac.rows[r];
      for (std::size_t i = 0; i < row.size(); ++i) {
        const auto [ci, vi] = row[i];
        if (pin[ci]) continue;
        for (std::size_t j = 0; j <= i; ++j) {
          const auto [cj, vj] = row[j];
          if (pin[cj]) continue;
          if (ci >= cj)
            trips.emplace_back(ci, cj, w * vi * vj);
          else
            trips.emplace_back(cj, ci, w * vi * vj);
        }
      }
    }
    for (int i = 0; i < nx; ++i)
      if (pin[i]) trips.emplace_back(i, i, 1.0);
    Eigen::SparseMatrix<double> H(nx, nx);
    H.setFromTriplets(trips.begin(), trips.end());
    return H;
  };

  refresh();

  double omega = std::max(opt.stat_tol, 1e-2);
  // Violation at the previous outer iteration; the penalty grows only when
  // the violation fails to halve between outer iterations.
  double v_ref = std::numeric_limits<double>::infinity();
  double mu = 1e-4;     // Levenberg-Marquardt damping, relative to diag(H)
  double mu_grow = 2.0; // doubles after every consecutive rejection
  bool out_of_time = false;

  for (int outer = 0; outer < opt.max_outer && !out_of_time; ++outer) {
    st.outer_iterations = outer + 1;

    double gnorm = g.lpNorm<Eigen::Infinity>();
    int rejected_in_a_row = 0;
    for (int it = 0; it < opt.max_inner; ++it) {
      if (gnorm <= omega) break;
      if (opt.wall_limit > 0.0 && seconds_since(t0) > opt.wall_limit) {
        out_of_time = true;
        break;
      }

      Eigen::SparseMatrix<double> H = assemble_h();
      Eigen::VectorXd hdiag = H.diagonal();
      // A meaningful damping floor: structurally free coordinates (for
      // example a swing path between its pinned boundaries) carry next to no
      // Gauss-Newton curvature, and amplifying their gradient dust by
      // 1/(mu*diag) would fling them into one-sided constraint walls.
      const double dfloor = 1e-6 * hdiag.maxCoeff() + 1e-300;
      for (int i = 0; i < nx; ++i) hdiag[i] = std::max(hdiag[i], dfloor);

      // Marquardt damping relative to the diagonal keeps the step scale-free.
      Eigen::SparseMatrix<double> Hd = H;
      Hd += (mu * hdiag).asDiagonal();
      Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt(Hd);
      if (llt.info() != Eigen::Success) {
        mu = std::min(mu * mu_grow, 1e12);
        mu_grow *= 2.0;
        continue;
      }
      const Eigen::VectorXd d = llt.solve(-g);
      const double dg = d.dot(g);
      if (!d.allFinite() || dg >= 0.0) {
        mu = std::min(mu * mu_grow, 1e12);
        mu_grow *= 2.0;
        continue;
      }
      // Model decrease of the damped quadratic: positive since H is PSD.
      const double pred = -0.5 * dg + 0.5 * mu * d.dot(hdiag.cwiseProduct(d));

      const double L0 = al_value(eq, ineq, f);
      Eigen::VectorXd eq_t(neq), ineq_t(nineq);
      double f_t = 0.0;
      tr.eval(res.x + d, eq_t, ineq_t, f_t);
      ++st.function_evals;
      const double Lt = al_value(eq_t, ineq_t, f_t);
      const double ratio = std::isfinite(Lt) ? (L0 - Lt) / std::max(pred, 1e-300) : -1.0;
      static const bool inner_trace = std::getenv("ARMADA_INNER") != nullptr;
      if (inner_trace) {
        std::fprintf(stderr, "[lm] it %3d  L %.9e  |g| %.2e  |d| %.2e  mu %.1e  pred %.2e  ratio %+.3f%s\n",
                     it, L0, gnorm, d.norm(), mu, pred, ratio, ratio > 1e-4 ? "" : "  rej");
        if (ratio < -10.0) {
          int top[3] = {0, 0, 0};
          for (int i = 0; i < nx; ++i)
            if (std::abs(d[i]) > std::abs(d[top[0]])) top[0] = i;
          for (int i = 0; i < nx; ++i)
            if (i != top[0] && std::abs(d[i]) > std::abs(d[top[1]])) top[1] = i;
          for (int i = 0; i < nx; ++i)
            if (i != top[0] && i != top[1] && std::abs(d[i]) > std::abs(d[top[2]])) top[2] = i;
          for (int k = 0; k < 3; ++k) {
            const char* bl = "?";
            for (const LayoutBlock& b : tr.problem().layout)
              if (top[k] >= b.begin && top[k] < b.end) { bl = b.name.c_str(); break; }
            std::fprintf(stderr, "    [dir] x[%d] (%s)  d %.2e  g %.2e  hdiag %.2e\n", top[k],
                         bl, d[top[k]], g[top[k]], hdiag[top[k]]);
          }
        }
      }
      if (ratio > 1e-4) {
        res.x += d;
        refresh();
        ++st.inner_iterations;
        gnorm = g.lpNorm<Eigen::Infinity>();
        // Nielsen's update: strong agreement relaxes damping smoothly, weak
        // agreement barely moves it, so mu settles where the model is trusted.
        const double c = 2.0 * ratio - 1.0;
        mu = std::max(mu * std::max(1.0 / 3.0, 1.0 - c * c * c), 1e-10);
        mu_grow = 2.0;
        rejected_in_a_row = 0;
      } else {
        mu = std::min(mu * mu_grow, 1e12);
        mu_grow *= 2.0;
        if (++rejected_in_a_row > 60) break;  // step collapsed to zero
      }
    }

    const double viol_eq = neq > 0 ? eq.cwiseAbs().maxCoeff() : 0.0;
    const double viol_ineq = nineq > 0 ? std::max(0.0, -ineq.minCoeff()) : 0.0;
    st.max_eq_violation = viol_eq;
    st.max_ineq_violation = viol_ineq;
    st.stationarity = gnorm;
    st.cost = f;
    st.penalty = rho;
    if (opt.verbose) {
      const char* worst_slice = "";
      double worst = -1.0;
      for (const SliceInfo& s : tr.slices()) {
        if (s.kind == SliceKind::Cost) continue;
        for (int r = s.begin; r < s.end; ++r) {
          const double v = s.kind == SliceKind::Equality ? std::abs(eq[r])
                                                         : std::max(0.0, -ineq[r]);
          if (v > worst) {
            worst = v;
            worst_slice = s.name.c_str();
          }
        }
      }
      std::fprintf(stderr,
                   "[al] outer %2d  rho %.1e  |eq| %.3e  |ineq| %.3e  |g| %.3e  cost %.6e  mu "
                   "%.1e  worst %s\n",
                   outer + 1, rho, viol_eq, viol_ineq, gnorm, f, mu, worst_slice);
    }
    if (out_of_time) break;

    if (viol_eq <= opt.eq_tol && viol_ineq <= opt.ineq_tol && gnorm <= opt.stat_tol) {
      st.converged = true;
      break;
    }

    // First-order multiplier update every outer iteration (safeguarded), with
    // penalty growth only when the violation fails to halve: growing rho while
    // feasibility is already contracting just ill-conditions the subproblem.
    for (int r = 0; r < neq; ++r)
      res.lambda[r] = std::clamp(res.lambda[r] + rho * rscale[r] * eq[r], -1e12, 1e12);
    for (int r = 0; r < nineq; ++r)
      res.nu[r] = std::clamp(std::max(0.0, res.nu[r] - rho * rscale[neq + r] * ineq[r]), 0.0,
                             1e12);
    const double v = std::max(viol_eq / opt.eq_tol, viol_ineq / opt.ineq_tol);
    if (v > 1.0 && v > 0.5 * v_ref) rho = std::min(rho * opt.penalty_growth, opt.penalty_max);
    v_ref = v;
    omega = std::max(0.3 * opt.stat_tol, 0.25 * omega);
    refresh();  // multipliers or penalty changed
  }

  res.eq = eq;
  res.ineq = ineq;
  st.wall_seconds = seconds_since(t0);
  if (st.converged) {
    st.message = "converged";
  } else if (out_of_time) {
    st.message = "wall clock limit reached";
  } else {
    st.message = "iteration limit reached";
  }
  return res;
}

}  // namespace armada
