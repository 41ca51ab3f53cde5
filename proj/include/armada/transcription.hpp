#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "armada/ocp_problem.hpp"

namespace armada {

enum class SliceKind { Equality, Inequality, Cost };

/// Named contiguous row range within its kind's stream.
struct SliceInfo {
  std::string name;
  SliceKind kind = SliceKind::Equality;
  int begin = 0, end = 0;
};

/// Jacobian sparsity with a greedy distance-2 coloring, valid while the
/// value-based piece selections recorded in `signature` hold.
struct JacobianPattern {
  std::vector<std::vector<int>> rows;  // global rows: [eq | ineq | cost terms]
  std::vector<int> color;              // per decision variable, -1 when absent
  int num_colors = 0;
  std::vector<std::int32_t> signature;
};

struct SparseRows {
  std::vector<std::vector<std::pair<int, double>>> rows;
};

/// Collocation transcription of an OcpProblem.
///
/// One templated emission pass defines the whole problem: equality rows,
/// inequality rows (feasible means >= 0) and additive cost terms, in a fixed
/// order partitioned into named slices. The same pass runs on double
/// (values), on dependency-tracking scalars (sparsity pattern) and on
/// chunked dual numbers (sparse Jacobian; derivatives are exact, never
/// finite-differenced).
class Transcription {
 public:
  explicit Transcription(OcpProblem problem);

  const OcpProblem& problem() const { return p_; }
  int num_vars() const { return p_.nx; }
  int num_eq() const { return n_eq_; }
  int num_ineq() const { return n_ineq_; }
  /// Cost rows are least-squares residuals: cost == cost_terms.squaredNorm().
  int num_cost_terms() const { return n_cost_; }
  int num_rows() const { return n_eq_ + n_ineq_ + n_cost_; }
  const std::vector<SliceInfo>& slices() const { return slices_; }
  const SliceInfo* find_slice(const std::string& name) const;

  void eval(const Eigen::VectorXd& x, Eigen::VectorXd& eq, Eigen::VectorXd& ineq,
            double& cost) const;

  JacobianPattern pattern(const Eigen::VectorXd& x) const;

  /// Evaluates values and the sparse Jacobian at x under `pat`. Returns false
  /// when a piece selection moved off the pattern's signature; the caller
  /// should rebuild the pattern and retry.
  bool jacobian(const Eigen::VectorXd& x, const JacobianPattern& pat, SparseRows& jac,
                Eigen::VectorXd& eq, Eigen::VectorXd& ineq, Eigen::VectorXd& cost_terms) const;

 private:
  OcpProblem p_;
  Eigen::Matrix3d inertia_inv_ = Eigen::Matrix3d::Identity();
  std::vector<SliceInfo> slices_;
  int n_eq_ = 0, n_ineq_ = 0, n_cost_ = 0;

  template <class T, class Emit>
  void walk(const T* x, Emit& em) const;
};

}  // namespace armada
