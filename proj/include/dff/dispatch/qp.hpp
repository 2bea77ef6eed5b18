#pragma once

#include <Eigen/Dense>

namespace dff::dispatch {

/// Convex quadratic program with diagonal Hessian, dense equality rows and
/// per-variable bounds:
///   min 0.5 x' diag(q) x + c' x   s.t.   A x = b,   lo <= x <= hi.
/// Bounds may be +-infinity; lo == hi pins a variable.
struct BoxQp {
  Eigen::VectorXd q;  // diagonal of Q, entries >= 0
  Eigen::VectorXd c;
  Eigen::MatrixXd a;  // m x n
  Eigen::VectorXd b;
  Eigen::VectorXd lo, hi;
};

struct BoxQpOptions {
  int max_iters = 100;
  double tol_stat = 1e-9;
  double tol_eq = 1e-10;
  double tol_comp = 1e-11;
  bool polish = true;
};

struct BoxQpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // equality duals
  double objective = 0.0;
  bool converged = false;
  bool polished = false;
  int iterations = 0;
  double stat_residual = 0.0;
  double eq_residual = 0.0;
  double comp_residual = 0.0;
};

/// Primal-dual interior point (Mehrotra predictor-corrector) with an
/// active-set polish pass that lands active bounds exactly on their values.
BoxQpResult solve_box_qp(const BoxQp& qp, const BoxQpOptions& opts = {});

}  // namespace dff::dispatch
