#include "entromax/pmc.hpp"

#include <cmath>
#include <string>

#include "entromax/common.hpp"

namespace entromax {

InducedPmc build_pmc(const Pomdp& model, const FscStructure& structure) {
  auto report = validate_pomdp(model);
  if (!report.ok()) {
    throw ValidationError("invalid model:\n" + report.summary());
  }
  if (structure.k < 1 ||
      static_cast<int>(structure.successor.size()) != structure.k) {
    throw ValidationError("memory structure must map every memory state");
  }
  for (int next : structure.successor) {
    if (next < 0 || next >= structure.k) {
      throw ValidationError("memory successor out of range");
    }
  }

  const int S = model.num_states();
  const int A = model.num_actions();
  const int Z = model.num_observations();

  InducedPmc pmc;
  pmc.num_model_states = S;
  pmc.num_actions = A;
  pmc.num_observations = Z;
  pmc.structure = structure;
  pmc.initial = model.initial;  // memory 0 block comes first

  const int n = S * structure.k;
  pmc.labels.resize(n);
  pmc.lifted_reward.resize(n);
  pmc.terms.resize(n);
  pmc.reward_terms.resize(n);

  for (int q = 0; q < structure.k; ++q) {
    const int next_q = structure.successor[q];
    for (int s = 0; s < S; ++s) {
      const int idx = pmc.product_index(s, q);
      pmc.labels[idx] = model.states[s] + "@" + std::to_string(q + 1);
      pmc.lifted_reward[idx] = model.reward[s];

      auto& terms = pmc.terms[idx];
      auto& reward_terms = pmc.reward_terms[idx];
      for (int z = 0; z < Z; ++z) {
        const double o = model.observe[s][z];
        if (o == 0.0) continue;
        for (int a = 0; a < A; ++a) {
          const int g = pmc.parameter_index(q, z, a);
          double successor_reward = 0.0;
          for (int sp = 0; sp < S; ++sp) {
            const double p = model.transition[s][a][sp];
            if (p == 0.0) continue;
            terms.push_back({pmc.product_index(sp, next_q), g, o * p});
            successor_reward += o * p * model.reward[sp][a];
          }
          const double current_reward = o * model.reward[s][a];
          if (current_reward != 0.0 || successor_reward != 0.0) {
            reward_terms.push_back({g, current_reward, successor_reward});
          }
        }
      }
    }
  }
  return pmc;
}

MarkovChain instantiate(const InducedPmc& pmc, const Instantiation& u,
                        RewardConvention convention) {
  auto report = check_well_defined(u, pmc.structure, pmc.num_observations,
                                   pmc.num_actions);
  if (!report.ok) {
    throw ValidationError(
        "instantiation is not well defined: worst simplex residual " +
        format_double(report.max_residual));
  }

  // Flatten gamma for direct indexing by the catalogue's parameter indices.
  std::vector<double> gamma(pmc.num_parameters());
  for (int q = 0; q < pmc.k(); ++q) {
    for (int z = 0; z < pmc.num_observations; ++z) {
      for (int a = 0; a < pmc.num_actions; ++a) {
        gamma[pmc.parameter_index(q, z, a)] = u.gamma[q][z][a];
      }
    }
  }

  const int n = pmc.num_product_states();
  MarkovChain chain;
  chain.labels = pmc.labels;
  chain.initial = pmc.initial;
  chain.transition.assign(n, std::vector<double>(n, 0.0));
  chain.local_entropy.assign(n, 0.0);
  chain.reward.assign(n, 0.0);
  chain.absorbing.assign(n, false);

  for (int idx = 0; idx < n; ++idx) {
    auto& row = chain.transition[idx];
    for (const auto& term : pmc.terms[idx]) {
      row[term.target] += term.c * gamma[term.g];
    }
    double entropy = 0.0;
    for (double& p : row) {
      if (p < 0.0) p = 0.0;  // clip fp dust from near-vertex parameters
      entropy += entropy_term_bits(p);
    }
    chain.local_entropy[idx] = entropy;
    chain.absorbing[idx] = row[idx] >= 1.0 - 1e-12;

    double reward = 0.0;
    for (const auto& term : pmc.reward_terms[idx]) {
      const double w = convention == RewardConvention::current
                           ? term.current
                           : term.successor;
      reward += w * gamma[term.g];
    }
    chain.reward[idx] = reward;
  }
  return chain;
}

}  // namespace entromax
