#pragma once

#include "nswx/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nswx {

struct SolverParams {
  int max_iters = 50000;
  double gap_tol = 1e-6;     // Frank-Wolfe gap target on the log scale
  double mass_floor = 1e-12; // clamp on mu_j inside the gradient's log
  std::uint64_t rng_seed = 0;
  bool record_trace = false; // keep f_cvx after every iteration

  /// Throws InvalidInput unless max_iters > 0, gap_tol > 0 and mass_floor in (0, 1e-3].
  void validate() const;
};

struct DualPrices {
  Vector lambda;  // per agent
  Vector eta;     // per item, >= 0
  double residual = 0.0;
};

struct SolveResult {
  FractionalSolution solution;
  double achieved_gap = kPosInf;
  bool certified = false;
  int iterations = 0;
  double objective = kNegInf;  // f_cvx(solution)
  std::vector<double> trace;   // filled only with record_trace
};

/// Maximizes f_cvx over the feasibility polytope, optionally with v_ij := 0
/// off mask. Pairwise Frank-Wolfe over agent-saturating matchings with exact
/// line search. Throws AssumptionViolated if the (masked) valuation support
/// has no agent-saturating matching. An exhausted budget is not an error:
/// the last iterate is returned with certified = false.
SolveResult solve_cvx(const Instance& inst, const std::optional<SupportGraph>& mask, const SolverParams& p);

/// Integral vertex maximizing <gradient, b>. Entries equal to kNegInf, and
/// entries outside mask, are unavailable. Throws AssumptionViolated when no
/// agent-saturating matching exists among available entries.
FractionalSolution lmo(const Instance& inst, const Matrix& gradient, const std::optional<SupportGraph>& mask);

/// Frank-Wolfe gap max_d <grad, d - b> at s, with grad = f_cvx_gradient(inst, s.b(), mass_floor).
double frank_wolfe_gap(const Instance& inst, const FractionalSolution& s, double mass_floor);

/// Stationarity multipliers: lambda_i + eta_j ~ c_ij on support edges
/// (b_ij > tau), eta_j = 0 where q_j < 1 - tau. Starts from the assignment-LP
/// duals of the gradient and applies a few Chebyshev midpoint sweeps.
DualPrices kkt_prices(const Instance& inst, const FractionalSolution& s, double tau = kDefaultSupportThreshold,
                      double mass_floor = 1e-12);

struct WeightedDualPoint {
  Vector delta;  // per item, >= 0
  Vector r;      // per item
  Vector gamma;  // per agent
};

/// r_j = log max(tau, mu_j), gamma_i = lambda_i / w_i + 1, delta_j = eta_j,
/// then each gamma_i is raised to the smallest value that makes its
/// constraints hold.
WeightedDualPoint construct_dual_point(const Instance& inst, const FractionalSolution& s, const DualPrices& prices,
                                       double tau = kDefaultSupportThreshold);

/// Largest violation of r_j + gamma_i + delta_j / w_i >= log v_ij over v_ij > 0,
/// and of delta_j >= 0.
double weighted_dual_violation(const Instance& inst, const Vector& delta, const Vector& r, const Vector& gamma);

/// sum_j e^{r_j} + sum_i w_i gamma_i + sum_j delta_j + sum_i (w_i log w_i - w_i).
/// Upper-bounds the optimum of f_cvx. Throws InvalidInput if the point is
/// infeasible beyond 1e-9.
double weighted_dual_value(const Instance& inst, const Vector& delta, const Vector& r, const Vector& gamma);

}  // namespace nswx
