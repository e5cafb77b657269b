#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "entromax/pmc.hpp"

namespace entromax {

/// DC decomposition of a bilinear term c*x*y around (xhat, yhat): the convex
/// square (c/2)(x+y)^2 is linearized at the expansion point, the concave part
/// -(c/2)(x^2+y^2) is kept exactly. Tight at the expansion point and, for
/// c >= 0, a global under-estimator of c*x*y.
double dc_replacement(double c, double x, double y, double xhat, double yhat);

struct NlpRowTerm {
  int target = 0;
  int g = 0;
  double c = 0.0;
  bool value_flows = true;  // false when the target's value is pinned to 0
};

/// The synthesis program over one induced pMC.
///
/// Variables are per-state values nu (discounted entropy, nats) and eta
/// (discounted reward), the controller parameters gamma, and nonnegative
/// slacks attached to the convexified rows. Each bilinear occurrence
/// c * value(target) * gamma[g] is catalogued per row; its slack is shared
/// across every row containing the same (target, g) tuple, and tuples with
/// identical row membership are collapsed into one slack class (only their
/// sum ever enters a row or the penalty, so this loses nothing).
///
/// At beta = 1 product states that can never generate entropy or reward
/// (absorbing under all actions with zero reward) have their values pinned
/// to 0 and their rows dropped; this is what makes the undiscounted program
/// bounded on horizon-reduced models. Models where some other cycle survives
/// are rejected.
struct NlpProblem {
  double beta = 1.0;
  double gamma_threshold = -std::numeric_limits<double>::infinity();
  bool include_entropy = true;
  RewardConvention convention = RewardConvention::current;
  int num_states = 0;
  int initial = 0;
  int num_params = 0;
  int num_actions = 0;       // simplex row width
  int num_simplex_rows = 0;  // k * Z
  int num_slack_classes = 0;
  std::vector<char> pinned;  // per product state
  std::vector<std::vector<NlpRowTerm>> row_terms;
  std::vector<std::vector<int>> row_slacks;  // distinct slack classes per row
  std::vector<std::vector<std::pair<int, double>>> reward_weights;  // (g, w)
  // Variable boxes (nu in nats). Generous solver scaffolding: wide enough to
  // never cut off a fixed point, tight enough to keep the barrier bounded.
  double nu_lo = 0.0;
  double nu_hi = 0.0;
  double eta_lo = 0.0;
  double eta_hi = 0.0;
};

/// gamma_threshold may be -infinity to drop the reward constraint;
/// include_entropy=false builds the feasibility variant (no entropy rows,
/// constant objective).
NlpProblem build_nlp(const InducedPmc& pmc, double beta,
                     double gamma_threshold, RewardConvention convention,
                     bool include_entropy);

/// Expansion point for the DC linearization (nu in nats; pinned entries 0).
struct DcExpansion {
  std::vector<double> nu;
  std::vector<double> eta;
  std::vector<double> gamma;
};

/// Local entropy (nats) of the row's transition probabilities at gamma.
double local_entropy_nats(const NlpProblem& p, int state,
                          const std::vector<double>& gamma);

/// Exact right-hand sides of the value rows (nats for entropy).
double entropy_row_rhs(const NlpProblem& p, int state,
                       const std::vector<double>& nu,
                       const std::vector<double>& gamma);
double reward_row_rhs(const NlpProblem& p, int state,
                      const std::vector<double>& eta,
                      const std::vector<double>& gamma);

/// Convexified right-hand sides: DC replacement per bilinear occurrence plus
/// the row's slack classes, all inside the discounted sum.
double convex_entropy_row_rhs(const NlpProblem& p, int state,
                              const std::vector<double>& nu,
                              const std::vector<double>& gamma,
                              const std::vector<double>& phi,
                              const DcExpansion& hat);
double convex_reward_row_rhs(const NlpProblem& p, int state,
                             const std::vector<double>& eta,
                             const std::vector<double>& gamma,
                             const std::vector<double>& phi,
                             const DcExpansion& hat);

}  // namespace entromax
