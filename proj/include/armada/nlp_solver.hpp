#pragma once

#include <Eigen/Core>
#include <string>

#include "armada/transcription.hpp"

namespace armada {

struct SolverOptions {
  double eq_tol = 2e-5;      // max |equality residual|
  double ineq_tol = 1e-6;    // max inequality violation
  double stat_tol = 1e-3;    // inf-norm of the AL gradient, scaled coordinates
  double penalty0 = 10.0;
  double penalty_growth = 8.0;
  double penalty_max = 1e8;
  int max_outer = 40;
  int max_inner = 400;
  int lbfgs_memory = 15;
  double wall_limit = 0.0;   // [s], 0 disables the guard
  bool verbose = false;
};

struct SolveStats {
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  int function_evals = 0;
  int jacobian_evals = 0;
  int pattern_rebuilds = 0;
  double cost = 0.0;
  double max_eq_violation = 0.0;
  double max_ineq_violation = 0.0;
  double stationarity = 0.0;
  double penalty = 0.0;
  double wall_seconds = 0.0;
  std::string message;
};

struct SolveResult {
  Eigen::VectorXd x;
  Eigen::VectorXd eq, ineq;  // residuals at x
  Eigen::VectorXd lambda;    // equality multipliers
  Eigen::VectorXd nu;        // inequality multipliers (>= 0)
  SolveStats stats;
};

/// Warm start and structural pinning for staged solves.
struct SolveControls {
  const Eigen::VectorXd* lambda0 = nullptr;  // equality multipliers to start from
  const Eigen::VectorXd* nu0 = nullptr;      // inequality multipliers to start from
  double rho0 = 0.0;                         // starting penalty; 0 uses opt.penalty0
  std::vector<int> pinned;                   // variables held at their x0 value
};

/// Augmented-Lagrangian method with a Levenberg-Marquardt inner loop on the
/// Gauss-Newton model of the AL (sparse normal equations).
///
/// Equalities use the classic multiplier term, inequalities (c >= 0) the
/// Rockafellar form (max(0, nu - rho c)^2 - nu^2) / (2 rho). Gradients and
/// the GN matrix come from the transcription's colored dual-number Jacobian.
SolveResult solve_nlp(const Transcription& tr, const Eigen::VectorXd& x0,
                      const SolverOptions& opt, const SolveControls* ctl = nullptr);

}  // namespace armada
