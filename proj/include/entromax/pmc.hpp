#pragma once

#include <string>
#include <vector>

#include "entromax/fsc.hpp"
#include "entromax/model.hpp"

namespace entromax {

/// Which state's reward a step collects: the occupied state (standard
/// expected immediate reward) or the successor reached by the transition.
enum class RewardConvention { current, successor };

/// One transition contribution: coefficient c toward product state `target`,
/// scaled by the controller parameter with flat index `g`.
struct PmcTerm {
  int target = 0;
  int g = 0;
  double c = 0.0;
};

/// Reward contribution of one controller parameter at a product state,
/// precomputed under both reward conventions.
struct PmcRewardTerm {
  int g = 0;
  double current = 0.0;
  double successor = 0.0;
};

/// Product of a POMDP with a deterministic memory structure.
///
/// Product states are (model state, memory state) with index q*|S|+s, so the
/// initial product state is the model's initial state at memory 0. Transition
/// probabilities are linear in the controller parameters gamma[q][z][a]; the
/// term catalogue stores every nonzero coefficient c = O(s,z)*P(s,a,s') with
/// the deterministic memory successor folded into `target`, so instantiation
/// and optimization both treat gamma as the only unknowns.
struct InducedPmc {
  int num_model_states = 0;
  int num_actions = 0;
  int num_observations = 0;
  FscStructure structure;
  int initial = 0;
  std::vector<std::string> labels;                 // "<state>@<memory>"
  std::vector<std::vector<double>> lifted_reward;  // [product][a] = R(s,a)
  std::vector<std::vector<PmcTerm>> terms;         // [product]
  std::vector<std::vector<PmcRewardTerm>> reward_terms;  // [product]

  int k() const { return structure.k; }
  int num_product_states() const { return num_model_states * structure.k; }
  int num_parameters() const {
    return structure.k * num_observations * num_actions;
  }
  int product_index(int s, int q) const { return q * num_model_states + s; }
  int model_state(int product) const { return product % num_model_states; }
  int memory_state(int product) const { return product / num_model_states; }
  int parameter_index(int q, int z, int a) const {
    return (q * num_observations + z) * num_actions + a;
  }
};

/// Builds the product and its coefficient catalogue. The model is validated
/// first; the structure must map every memory state to a valid successor.
InducedPmc build_pmc(const Pomdp& model, const FscStructure& structure);

/// Concrete finite Markov chain with per-state local entropy (bits) and
/// expected immediate reward.
struct MarkovChain {
  std::vector<std::string> labels;
  int initial = 0;
  std::vector<std::vector<double>> transition;  // dense stochastic rows
  std::vector<double> local_entropy;            // bits, 0*log0 = 0
  std::vector<double> reward;
  std::vector<bool> absorbing;  // point mass on itself

  int num_states() const { return static_cast<int>(transition.size()); }
};

/// Instantiates the controller parameters into a Markov chain. Throws
/// ValidationError when u is ill-defined for the pmc's dimensions (any gamma
/// row off the action simplex by more than kSimplexTol).
MarkovChain instantiate(
    const InducedPmc& pmc, const Instantiation& u,
    RewardConvention convention = RewardConvention::current);

}  // namespace entromax
