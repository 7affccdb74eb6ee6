#pragma once

// Bound-constrained augmented Lagrangian solver for the network utility
// maximization problem
//
//   min  -sum_r U_r(R_r, w)
//   s.t. sum_{r: l in r} R_r = d_l (1 - w_l)   for every link l
//        eps <= w_l <= 1 - eps,  R_r >= eps
//        log((4 F*_r - 1)/3) <= sum_{l in r} log w_l   (optional, per route)
//
// Rate balance is an equality so no generated entanglement is wasted. The
// equalities enter through quadratic penalties plus multipliers; the optional
// fidelity floors enter through the positive part of their log form with the
// same penalty weight. Inner subproblems are solved by projected gradient
// descent with a backtracking (Armijo) line search.

#include <functional>
#include <optional>

#include "qnum/utility.hpp"

namespace qnum {

struct SolverConfig {
  double initial_penalty = 10.0;   // mu at the first outer iteration
  double penalty_growth = 10.0;    // factor applied when residuals stall
  int max_outer_iters = 30;
  int max_inner_iters = 5000;      // per outer iteration
  double residual_tol = 1e-8;      // on max |residual_l| / d_l
  double grad_tol = 1e-8;          // on the projected gradient sup-norm
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  double interior_eps = 1e-9;      // distance kept from the box edges
};

void validate_config(const SolverConfig& config);  // throws std::invalid_argument

struct SolveReport {
  SolutionVector solution;
  double objective = 0.0;  // -sum of route utilities at `solution`
  std::map<std::string, double> per_route_utility;
  std::map<std::string, double> e2e_fidelity;
  double max_residual = 0.0;  // max_l |sum_r R_r - d_l(1-w_l)| / d_l
  int outer_iters = 0;
  bool converged = false;
};

class InfeasibleStartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raw rate-balance residual per link id: sum_{r: l in r} R_r - d_l (1 - w_l).
std::map<std::string, double> constraint_residuals(const NetworkSpec& spec,
                                                   const SolutionVector& x);

// Clamp w into [eps, 1-eps] and rates into [eps, inf).
SolutionVector project_box(SolutionVector x, const NetworkSpec& spec, double eps);

// Deterministic strictly-interior starting point. Werner parameters are
// uniform at t^(1/h_max) where t is the Werner value of end-to-end fidelity
// 0.9 (DE, SKF) or 0.75 (NGTV), raised if fidelity thresholds demand more;
// h_max is the longest route. Rates split each link's generation equally
// among its routes and take the route minimum. Throws InfeasibleStartError
// if no strictly feasible start exists for the given thresholds.
SolutionVector initialize(const NetworkSpec& spec, UtilityKind kind,
                          const SolverConfig& config = {});

// Run the augmented Lagrangian loop. An exhausted iteration budget returns a
// report with converged = false; an infeasible start throws. When `start` is
// given it must be strictly inside the box and the utility domain.
SolveReport solve(const NetworkSpec& spec, UtilityKind kind,
                  const SolverConfig& config = {},
                  const std::optional<SolutionVector>& start = std::nullopt);

// Warnings about a concrete operating point (currently: links whose
// per-attempt success probability 2*c*eta*alpha(w) exceeds 1).
std::vector<std::string> solution_warnings(const NetworkSpec& spec,
                                           const SolutionVector& x);

// Independent optimum estimate for symmetric topologies. Sweeps one Werner
// value per symmetry class over a `resolution`-point grid per dimension
// (left-closed, so doubling the resolution refines the grid in place); at
// each point rates take the minimum equal-split share over the route's
// classes and non-binding classes have their Werner value raised to close
// the rate balance exactly. Requires identical links within a class and
// routes that are interchangeable under the classes; throws ValidationError
// otherwise, InfeasibleStartError when no grid point is in the domain.
SolveReport grid_search_oracle(const NetworkSpec& spec, UtilityKind kind,
                               const std::vector<SymmetryClass>& classes,
                               int resolution, double eps = 1e-9);

// Central-difference gradient of f, shaped like x. Test oracle for
// objective_gradient and friends.
SolutionVector finite_diff_gradient(
    const std::function<double(const SolutionVector&)>& f,
    const SolutionVector& x, double h);

namespace detail {

// Box-constrained minimization by projected gradient descent: Barzilai-Borwein
// trial steps safeguarded by a monotone Armijo backtracking line search.
// `eval` returns the merit value and fills the gradient; +inf marks points
// outside the merit's domain. The merit is carried in extended precision so
// the line search can resolve decreases far smaller than one double ulp,
// which is what the endgame near a minimizer consists of. Bounds are
// per-coordinate. Returns the sup-norm of the projected gradient at the
// final iterate; `on_value` (when set) sees every accepted merit value, in
// order.
struct BoxMinimizeResult {
  double pg_norm = 0.0;
  int iters = 0;
};

BoxMinimizeResult minimize_box(
    const std::function<long double(const std::vector<double>&,
                                    std::vector<double>*)>& eval,
    std::vector<double>& x, const std::vector<double>& lower,
    const std::vector<double>& upper, const SolverConfig& config,
    const std::function<void(double)>& on_value = nullptr);

}  // namespace detail

}  // namespace qnum
