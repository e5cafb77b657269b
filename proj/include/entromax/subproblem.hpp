#pragma once

#include <memory>
#include <vector>

#include "entromax/nlp.hpp"

namespace entromax {

/// Solution of one convexified subproblem. Value vectors are full-length
/// (pinned states carry 0); gamma rows are renormalized to the simplex.
struct SubproblemResult {
  std::vector<double> nu;     // nats per product state
  std::vector<double> eta;    // reward units per product state
  std::vector<double> gamma;  // flat parameters
  double val = 0.0;           // penalized objective, nats
  double slack_sum = 0.0;
  double kkt_residual = 0.0;
  int newton_steps = 0;
  bool converged = false;
};

/// Interior-point solver for the concave subproblems produced by the
/// penalty loop. The constraint structure (sparsity, slack classes, simplex
/// rows) is fixed by the NlpProblem, so one solver instance precomputes the
/// KKT pattern once and is reused across iterations; only the expansion
/// point, the penalty weight and the warm start change between calls.
///
/// Each call follows a log-barrier path on
///   minimize -objective(x) - mu * sum_i log g_i(x)   s.t.  A x = 1
/// where every g_i >= 0 is concave (row constraints with their quadratic
/// under-estimators, boxes, slack positivity, the reward threshold) and A
/// holds the gamma simplex rows. Newton systems are solved through a
/// regularized symmetric quasidefinite factorization with a cached
/// elimination pattern.
class SubproblemSolver {
 public:
  explicit SubproblemSolver(const NlpProblem& problem);
  ~SubproblemSolver();
  SubproblemSolver(const SubproblemSolver&) = delete;
  SubproblemSolver& operator=(const SubproblemSolver&) = delete;

  /// Solves at the given expansion point. `tolerance` bounds the final
  /// barrier duality gap (the path is followed until mu * #inequalities
  /// drops below it). `warm` seeds the primal point from a previous call.
  SubproblemResult solve(const DcExpansion& hat, double tau, double tolerance,
                         const SubproblemResult* warm = nullptr);

  const NlpProblem& problem() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace entromax
