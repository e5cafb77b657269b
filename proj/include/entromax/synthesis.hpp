#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "entromax/fsc.hpp"
#include "entromax/model.hpp"
#include "entromax/nlp.hpp"
#include "entromax/pmc.hpp"

namespace entromax {

struct SynthesisConfig {
  double beta = 0.95;
  /// Reward lower bound; -infinity drops the constraint (and the whole
  /// reward system from the subproblems).
  double gamma_threshold = -std::numeric_limits<double>::infinity();
  double tau0 = 1.0;
  double tau_growth = 2.0;
  double tau_max = 1e4;
  double epsilon = 1e-4;  // termination window on consecutive values
  int max_iterations = 200;
  int restarts = 10;
  double slack_tolerance = 1e-6;
  double subproblem_tolerance = 1e-7;
  std::uint64_t seed = 1;
  RewardConvention reward_convention = RewardConvention::current;
};

enum class SynthesisStatus {
  ok,                 // value converged with slacks below tolerance
  slack_positive,     // iteration budget spent with slacks still positive
  iteration_limit,    // iteration budget spent while the value still moved
  numerical_failure,  // subproblem solver broke down repeatedly
};

const char* to_string(SynthesisStatus status);

struct IterationTrace {
  int iteration = 0;
  double val = 0.0;  // penalized subproblem value, bits
  double entropy_bits = 0.0;
  double reward = 0.0;
  double slack_sum = 0.0;
  double tau = 0.0;
};

struct SynthesisResult {
  Instantiation instantiation;
  FscStructure structure;
  SynthesisStatus status = SynthesisStatus::numerical_failure;
  /// True when the returned controller's exact reward clears the threshold.
  bool feasible = false;
  double entropy_bits = 0.0;  // exact evaluation of the returned controller
  double reward = 0.0;        // exact discounted reward
  double slack_sum = 0.0;     // at the last subproblem
  int iterations = 0;
  int restart_index = 0;
  std::uint64_t seed = 0;
  std::vector<IterationTrace> trace;
};

class AllRestartsFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The synthesis program for this configuration (entropy objective, reward
/// row system only when the threshold is finite).
NlpProblem build_nlp(const InducedPmc& pmc, const SynthesisConfig& config);

/// Penalized iterative convexification from one starting controller: each
/// iteration expands the bilinear terms around the exactly re-evaluated
/// previous controller, solves the concave subproblem, grows the penalty,
/// and tracks the best exactly-feasible iterate (the start included).
/// Returns that best iterate; `feasible` is false when no iterate passed the
/// exact reward re-check. Throws SolverFailure after repeated subproblem
/// breakdowns.
SynthesisResult penalty_ccp(const InducedPmc& pmc,
                            const SynthesisConfig& config,
                            const Instantiation& initial);

/// Best feasible result across `config.restarts` runs started from uniform
/// random controllers (per-run seeds derived from config.seed; ties go to
/// the lowest restart index). `extra_initials` are run first with the same
/// engine and count toward the choice. Throws AllRestartsFailed when no run
/// produces a feasible controller.
SynthesisResult synth_with_restarts(
    const InducedPmc& pmc, const SynthesisConfig& config,
    const std::vector<Instantiation>& extra_initials = {});

/// Feasibility variant: entropy rows dropped, constant objective, only the
/// reward threshold drives the iteration. Returns the first restart that
/// reaches exact feasibility; its entropy is evaluated post hoc.
SynthesisResult synth_feasibility(const InducedPmc& pmc,
                                  const SynthesisConfig& config);

/// Entropy synthesis on the fully observable counterpart with a memoryless
/// (k=1) controller; the resulting value dominates any FSC on the original
/// partially observable model at the same threshold.
SynthesisResult max_entropy_mdp_constrained(const Pomdp& model, double beta,
                                            double gamma_threshold,
                                            const SynthesisConfig& config = {});

/// Synthesizes along ascending memory sizes with the chain structure. Each
/// size k > first is warm-started by re-using the previous best decision
/// rows and duplicating the last one (which reproduces the previous value
/// exactly), alongside the usual random restarts, so the reported entropies
/// never decrease. Stops early once the percentage improvement over the
/// previous size falls below stop_percent.
std::vector<SynthesisResult> memory_sweep(const Pomdp& model,
                                          const std::vector<int>& k_range,
                                          const SynthesisConfig& config,
                                          double stop_percent);

}  // namespace entromax
