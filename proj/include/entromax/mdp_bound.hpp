#pragma once

#include <vector>

#include "entromax/model.hpp"

namespace entromax {

/// One-state Bellman step of the entropy value iteration: the optimum of
///   H(sum_a p_a P(.|s,a)) + beta * sum_a p_a <P(.|s,a), values>
/// over action mixtures p, solved by exponentiated-gradient ascent (the
/// classic alternating-maximization update, which is mirror ascent with unit
/// step) with a duality-gap certificate. Values and gap are in bits.
struct EntropyBellmanStep {
  double value = 0.0;
  std::vector<double> policy;  // maximizing action mixture
  double gap = 0.0;            // certified suboptimality bound
  int iterations = 0;
};

EntropyBellmanStep entropy_bellman_step(const Pomdp& model, int s,
                                        const std::vector<double>& values,
                                        double beta,
                                        double gap_tolerance = 1e-8,
                                        std::vector<double> initial_policy = {});

struct MdpBoundResult {
  std::vector<double> values;  // per model state, bits
  double bound = 0.0;          // value at the initial state, bits
  int iterations = 0;          // outer value-iteration sweeps
  double inner_gap = 0.0;      // worst certified gap in the final sweep
};

/// Maximum discounted entropy of the state process when the controller sees
/// the state directly (observations are ignored): an upper bound for every
/// observation-based controller on the same model. Computed by value
/// iteration with the concave per-state subproblem above; outer stop at
/// sup-norm change 1e-7*(1-beta) for beta < 1.
///
/// At beta = 1 the model must make every cycle an absorbing state under all
/// actions (the shape produced by the finite-horizon reduction), so the
/// iteration terminates exactly; anything else raises DivergentEntropy.
MdpBoundResult max_entropy_mdp(const Pomdp& model, double beta);

}  // namespace entromax
