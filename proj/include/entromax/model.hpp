#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace entromax {

/// Raised when a model violates structural requirements (non-stochastic rows
/// beyond tolerance, bad indices, malformed shapes, invalid arguments).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationIssue {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string where;    // e.g. "T[s2][a1]"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const;                 // no error-severity issues
  std::string summary() const;     // one line per issue
};

/// Discrete POMDP with all actions available in every state.
///
/// transition[s][a] is a dense probability row over successor states,
/// observe[s] a probability row over observations, reward[s][a] a scalar.
/// Instances are treated as immutable values; all operations below are pure.
struct Pomdp {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
  int initial = 0;
  std::vector<std::vector<std::vector<double>>> transition;  // [s][a][s']
  std::vector<std::vector<double>> observe;                  // [s][z]
  std::vector<std::vector<double>> reward;                   // [s][a]

  int num_states() const { return static_cast<int>(states.size()); }
  int num_actions() const { return static_cast<int>(actions.size()); }
  int num_observations() const { return static_cast<int>(observations.size()); }

  bool operator==(const Pomdp&) const = default;
};

/// Collects diagnostics without throwing; ok() gates downstream use.
ValidationReport validate_pomdp(const Pomdp& m);

/// Load-time normalization: clips tiny negatives and renormalizes rows whose
/// sum deviates from 1 by more than 1e-12 but at most 1e-9. Applied exactly
/// once on the load path (parser and generators); throws ValidationError when
/// the result still fails validation.
Pomdp normalized(Pomdp m);

/// Fully observable counterpart: observations become the states themselves
/// and the observation function the identity. Idempotent.
Pomdp to_fully_observable(const Pomdp& m);

/// Finite-horizon reduction to an absorbing infinite-horizon model.
///
/// States are (s,t) for t=1..horizon plus a Sink with a fresh dedicated
/// observation. Time advances via the original transitions for t < horizon;
/// all stage-horizon mass moves to Sink, which self-loops. Rewards carry over
/// per stage; Sink rewards are 0. The beta=1 discounted entropy/reward of an
/// instantiated reduction equal the horizon-step finite-horizon entropy/reward
/// of the same controller on the original model.
Pomdp reduce_finite_horizon(const Pomdp& m, int horizon);

}  // namespace entromax
