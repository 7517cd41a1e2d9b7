#pragma once

#include <Eigen/Dense>

#include "ewh/standard_form.hpp"

namespace ewh {

struct IpmOptions {
  int max_iter = 100;
  double eps_feas = 1e-8;
  double eps_abs = 1e-9;
  double eps_rel = 1e-8;
  double reg = 1e-8;
};

enum class IpmStatus {
  Optimal,
  PrimalInfeasible,
  DualInfeasible,  // primal objective unbounded below
  IterationLimit,
  NumericalError,
};

struct IpmResult {
  IpmStatus status = IpmStatus::NumericalError;
  Eigen::VectorXd x;  // already divided by tau (best iterate on non-optimal exits)
  Eigen::VectorXd s;
  double pobj = 0.0;  // c'x in solver space, objective constant not included
  int iterations = 0;
};

/// Homogeneous self-dual primal-dual interior-point method with Nesterov-Todd
/// scaling and a Mehrotra predictor-corrector step, for LP+SOC programs in
/// StandardForm. Produces infeasibility/unboundedness certificates via the
/// embedding's (tau, kappa) split.
IpmResult solve_ipm(const StandardForm& sf, const IpmOptions& opt = {});

}  // namespace ewh
