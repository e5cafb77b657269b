#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "entromax/pmc.hpp"

namespace entromax {

/// Raised when an undiscounted value is infinite: some recurrent class
/// reachable from the initial state keeps generating entropy (resp. reward).
class DivergentEntropy : public std::runtime_error {
 public:
  explicit DivergentEntropy(const std::string& what)
      : std::runtime_error(what) {}
};

class DivergentReward : public std::runtime_error {
 public:
  explicit DivergentReward(const std::string& what)
      : std::runtime_error(what) {}
};

struct EvaluationResult {
  std::vector<double> nu;   // per-state discounted entropy, bits
  std::vector<double> eta;  // per-state discounted reward
  double total_entropy = 0.0;  // nu at the initial state
  double total_reward = 0.0;   // eta at the initial state
  double beta = 1.0;
};

/// Recomputes -sum_j P(j|s) log2 P(j|s) per state from the transition rows.
std::vector<double> local_entropy(const MarkovChain& chain);

/// Solves (I - beta P) nu = L directly (LU with iterative refinement when the
/// residual exceeds 1e-10). At beta = 1 the solve is restricted to states
/// reachable from the initial state: closed recurrent classes must carry no
/// local entropy (within 1e-12) and get nu = 0, the transient block is solved
/// exactly, and unreachable states report 0.
EvaluationResult discounted_entropy(const MarkovChain& chain, double beta);

/// Same scheme for (I - beta P) eta = r; closed recurrent classes with
/// nonzero reward raise DivergentReward at beta = 1.
EvaluationResult discounted_reward(const MarkovChain& chain, double beta);

/// Both value systems in one pass; fills every field of EvaluationResult.
EvaluationResult evaluate(const MarkovChain& chain, double beta);

/// Joint entropy H(S_1..S_N) in bits of the first `horizon` states, by the
/// chain-rule telescoping sum over forward distributions: sum_{t=1}^{N-1}
/// <d_t, L>. A horizon of 1 is a single known state: entropy 0.
double finite_horizon_entropy(const MarkovChain& chain, int horizon);

/// Expected reward collected over the first `horizon` stages:
/// sum_{t=1}^{N} <d_t, r>.
double finite_horizon_reward(const MarkovChain& chain, int horizon);

struct OccupancyTable {
  std::vector<double> visits;  // expected visit count per chain state
  std::vector<std::string> labels;
  double total = 0.0;
};

/// Expected discounted visit counts: x solves x' = e_init' + beta x'P.
/// At beta = 1 only transient states get finite counts; reachable recurrent
/// states report +infinity, unreachable states 0.
OccupancyTable occupancy_discounted(const MarkovChain& chain, double beta);

/// Expected visit counts over stages 1..N (total mass N).
OccupancyTable occupancy_horizon(const MarkovChain& chain, int horizon);

/// Sums product-state visit mass over memory states, giving one entry per
/// model state.
std::vector<double> marginalize_memory(const InducedPmc& pmc,
                                       const std::vector<double>& visits);

struct SimulationResult {
  std::vector<double> mean_visits;  // per state, mean visits per path
  std::vector<double> visit_se;
  double entropy_bits = 0.0;
  double entropy_se = 0.0;
  double mean_reward = 0.0;
  double reward_se = 0.0;
  std::map<std::vector<int>, long long> path_counts;
};

/// Samples n_paths trajectories S_1..S_horizon. entropy_bits is the plug-in
/// entropy of the empirical path distribution (estimates
/// finite_horizon_entropy at the same horizon); mean_reward averages
/// sum_{t=1}^{horizon} r(S_t). Reproducible for a fixed seed.
SimulationResult simulate(const MarkovChain& chain, int horizon, int n_paths,
                          std::uint64_t seed);

/// Monte Carlo estimate of the discounted values: per path accumulates
/// sum_t beta^{t-1} L(S_t) and sum_t beta^{t-1} r(S_t), truncating once the
/// discount falls below tail_tolerance (paths stop early in absorbing states
/// that generate nothing). Requires beta < 1. path_counts is left empty.
SimulationResult simulate_discounted(const MarkovChain& chain, double beta,
                                     int n_paths, std::uint64_t seed,
                                     double tail_tolerance = 1e-12);

}  // namespace entromax
