#include "entromax/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "entromax/common.hpp"
#include "scc.hpp"

namespace entromax {

double dc_replacement(double c, double x, double y, double xhat, double yhat) {
  // Factored as xy - (half square) rather than expanded: subtracting the
  // nonnegative correction keeps the under-estimation inequality exact in
  // floating point, not just in the reals.
  const double d = x + y - (xhat + yhat);
  return c * (x * y - 0.5 * d * d);
}

namespace {

/// A product state can never generate entropy or reward when every outgoing
/// coefficient stays on its own model state and no reward term survives.
std::vector<char> pinned_states(const InducedPmc& pmc) {
  std::vector<char> pinned(pmc.num_product_states(), 0);
  for (int idx = 0; idx < pmc.num_product_states(); ++idx) {
    if (!pmc.reward_terms[idx].empty()) continue;
    bool self_only = true;
    for (const auto& term : pmc.terms[idx]) {
      if (pmc.model_state(term.target) != pmc.model_state(idx)) {
        self_only = false;
        break;
      }
    }
    pinned[idx] = self_only;
  }
  return pinned;
}

void check_no_live_cycles(const NlpProblem& p) {
  std::vector<std::vector<int>> adj(p.num_states);
  for (int s = 0; s < p.num_states; ++s) {
    if (p.pinned[s]) continue;
    std::set<int> targets;
    for (const auto& term : p.row_terms[s]) {
      if (term.value_flows) targets.insert(term.target);
    }
    adj[s].assign(targets.begin(), targets.end());
  }
  const auto scc = internal::strongly_connected_components(adj);
  std::vector<int> comp_size(scc.count, 0);
  for (int s = 0; s < p.num_states; ++s) ++comp_size[scc.comp[s]];
  for (int s = 0; s < p.num_states; ++s) {
    if (p.pinned[s]) continue;
    const bool self_edge =
        std::find(adj[s].begin(), adj[s].end(), s) != adj[s].end();
    if (comp_size[scc.comp[s]] > 1 || self_edge) {
      throw ValidationError(
          "undiscounted synthesis requires every cycle to be absorbing with "
          "zero reward (the shape produced by the finite-horizon reduction)");
    }
  }
}

}  // namespace

NlpProblem build_nlp(const InducedPmc& pmc, double beta,
                     double gamma_threshold, RewardConvention convention,
                     bool include_entropy) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ValidationError("discount must lie in (0, 1], got " +
                          format_double(beta));
  }
  NlpProblem p;
  p.beta = beta;
  p.gamma_threshold = gamma_threshold;
  p.include_entropy = include_entropy;
  p.convention = convention;
  p.num_states = pmc.num_product_states();
  p.initial = pmc.initial;
  p.num_params = pmc.num_parameters();
  p.num_actions = pmc.num_actions;
  p.num_simplex_rows = pmc.k() * pmc.num_observations;
  p.pinned = beta == 1.0 ? pinned_states(pmc)
                         : std::vector<char>(p.num_states, 0);

  p.row_terms.resize(p.num_states);
  p.row_slacks.resize(p.num_states);
  p.reward_weights.resize(p.num_states);

  // Slack tuples (target, g) -> rows that contain them, in row order.
  std::map<std::pair<int, int>, std::vector<int>> tuple_rows;
  for (int s = 0; s < p.num_states; ++s) {
    if (p.pinned[s]) continue;
    for (const auto& term : pmc.terms[s]) {
      NlpRowTerm row_term{term.target, term.g, term.c,
                          p.pinned[term.target] == 0};
      p.row_terms[s].push_back(row_term);
      if (row_term.value_flows) {
        tuple_rows[{term.target, term.g}].push_back(s);
      }
    }
    for (const auto& rt : pmc.reward_terms[s]) {
      const double w = convention == RewardConvention::current ? rt.current
                                                               : rt.successor;
      if (w != 0.0) p.reward_weights[s].push_back({rt.g, w});
    }
  }

  // Tuples sharing an identical membership list collapse into one class.
  std::map<std::vector<int>, int> class_of_membership;
  std::map<std::pair<int, int>, int> class_of_tuple;
  for (const auto& [tuple, rows] : tuple_rows) {
    auto [it, inserted] =
        class_of_membership.insert({rows, p.num_slack_classes});
    if (inserted) ++p.num_slack_classes;
    class_of_tuple[tuple] = it->second;
  }
  for (int s = 0; s < p.num_states; ++s) {
    std::set<int> classes;
    for (const auto& term : p.row_terms[s]) {
      if (term.value_flows) {
        classes.insert(class_of_tuple.at({term.target, term.g}));
      }
    }
    p.row_slacks[s].assign(classes.begin(), classes.end());
  }

  if (beta == 1.0) check_no_live_cycles(p);

  // Boxes. Entropy per step is at most ln(n); reward per step at most the
  // largest lifted reward magnitude. At beta = 1 the live states form a DAG,
  // so path length bounds the horizon.
  double reward_hi = 0.0, reward_lo = 0.0;
  for (const auto& per_state : pmc.lifted_reward) {
    for (double r : per_state) {
      reward_hi = std::max(reward_hi, r);
      reward_lo = std::min(reward_lo, r);
    }
  }
  const double step_entropy = std::log(std::max(p.num_states, 2));
  int live = 0;
  for (int s = 0; s < p.num_states; ++s) live += p.pinned[s] ? 0 : 1;
  const double horizon_factor =
      beta < 1.0 ? 1.0 / (1.0 - beta) : static_cast<double>(live + 1);
  p.nu_lo = -1.0;
  p.nu_hi = step_entropy * horizon_factor;
  p.nu_hi += 1.0 + 0.1 * p.nu_hi;
  double eta_hi = reward_hi * horizon_factor;
  double eta_lo = reward_lo * horizon_factor;
  if (std::isfinite(gamma_threshold)) {
    eta_hi = std::max(eta_hi, gamma_threshold + 1.0);
  }
  const double eta_margin = 1.0 + 0.1 * (eta_hi - eta_lo);
  p.eta_hi = eta_hi + eta_margin;
  p.eta_lo = eta_lo - eta_margin;
  return p;
}

double local_entropy_nats(const NlpProblem& p, int state,
                          const std::vector<double>& gamma) {
  // Accumulate the row probabilities over the (sparse) support.
  std::map<int, double> prob;
  for (const auto& term : p.row_terms[state]) {
    prob[term.target] += term.c * gamma[term.g];
  }
  double h = 0.0;
  for (const auto& [target, mass] : prob) {
    if (mass > 0.0) h -= mass * std::log(mass);
  }
  return h;
}

double entropy_row_rhs(const NlpProblem& p, int state,
                       const std::vector<double>& nu,
                       const std::vector<double>& gamma) {
  double rhs = local_entropy_nats(p, state, gamma);
  for (const auto& term : p.row_terms[state]) {
    if (term.value_flows) {
      rhs += p.beta * term.c * gamma[term.g] * nu[term.target];
    }
  }
  return rhs;
}

double reward_row_rhs(const NlpProblem& p, int state,
                      const std::vector<double>& eta,
                      const std::vector<double>& gamma) {
  double rhs = 0.0;
  for (const auto& [g, w] : p.reward_weights[state]) rhs += w * gamma[g];
  for (const auto& term : p.row_terms[state]) {
    if (term.value_flows) {
      rhs += p.beta * term.c * gamma[term.g] * eta[term.target];
    }
  }
  return rhs;
}

double convex_entropy_row_rhs(const NlpProblem& p, int state,
                              const std::vector<double>& nu,
                              const std::vector<double>& gamma,
                              const std::vector<double>& phi,
                              const DcExpansion& hat) {
  double rhs = local_entropy_nats(p, state, gamma);
  for (const auto& term : p.row_terms[state]) {
    if (term.value_flows) {
      rhs += p.beta * dc_replacement(term.c, nu[term.target], gamma[term.g],
                                     hat.nu[term.target], hat.gamma[term.g]);
    }
  }
  for (int cls : p.row_slacks[state]) rhs += p.beta * phi[cls];
  return rhs;
}

double convex_reward_row_rhs(const NlpProblem& p, int state,
                             const std::vector<double>& eta,
                             const std::vector<double>& gamma,
                             const std::vector<double>& phi,
                             const DcExpansion& hat) {
  double rhs = 0.0;
  for (const auto& [g, w] : p.reward_weights[state]) rhs += w * gamma[g];
  for (const auto& term : p.row_terms[state]) {
    if (term.value_flows) {
      rhs += p.beta * dc_replacement(term.c, eta[term.target], gamma[term.g],
                                     hat.eta[term.target], hat.gamma[term.g]);
    }
  }
  for (int cls : p.row_slacks[state]) rhs += p.beta * phi[cls];
  return rhs;
}

}  // namespace entromax
