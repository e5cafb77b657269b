#include "entromax/mdp_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "entromax/common.hpp"
#include "entromax/evaluation.hpp"
#include "scc.hpp"

namespace entromax {
namespace {

/// Keeps every action's weight strictly positive so multiplicative updates
/// can always resurrect an action; the induced objective error is O(floor).
constexpr double kPolicyFloor = 1e-100;

constexpr int kMaxInnerIterations = 500000;

double entropy_nats_of_row(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

void floor_and_normalize(std::vector<double>& p) {
  double sum = 0.0;
  for (double& v : p) {
    v = std::max(v, kPolicyFloor);
    sum += v;
  }
  for (double& v : p) v /= sum;
}

struct InnerResult {
  double value_nats = 0.0;
  std::vector<double> p;
  double gap_nats = 0.0;
  int iterations = 0;
};

/// Maximizes sum_a p_a (D(P_a || m_p) + c_a) over the simplex, which equals
/// H_nats(m_p) + sum_a p_a (c_a - H_nats(P_a)). The multiplicative update
/// p_a <- p_a exp(g_a) / Z is monotone; the certificate
/// max_a g_a - <p, g> bounds the remaining suboptimality.
InnerResult ascend(const std::vector<const std::vector<double>*>& rows,
                   const std::vector<double>& c, std::vector<double> p,
                   double tol_nats) {
  const int A = static_cast<int>(rows.size());
  const int S = static_cast<int>(rows[0]->size());
  floor_and_normalize(p);

  std::vector<double> m(S), g(A), l(A);
  InnerResult out;
  for (int it = 1; it <= kMaxInnerIterations; ++it) {
    std::fill(m.begin(), m.end(), 0.0);
    for (int a = 0; a < A; ++a) {
      const auto& row = *rows[a];
      for (int j = 0; j < S; ++j) m[j] += p[a] * row[j];
    }
    double value = 0.0;
    double gmax = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < A; ++a) {
      const auto& row = *rows[a];
      double d = 0.0;
      for (int j = 0; j < S; ++j) {
        if (row[j] > 0.0) d += row[j] * std::log(row[j] / m[j]);
      }
      g[a] = d + c[a];
      value += p[a] * g[a];
      gmax = std::max(gmax, g[a]);
    }
    out.value_nats = value;
    out.gap_nats = gmax - value;
    out.iterations = it;
    if (out.gap_nats <= tol_nats) break;
    for (int a = 0; a < A; ++a) l[a] = std::log(p[a]) + g[a] - gmax;
    double sum = 0.0;
    for (int a = 0; a < A; ++a) {
      p[a] = std::exp(l[a]);
      sum += p[a];
    }
    for (double& v : p) v /= sum;
    floor_and_normalize(p);
  }
  out.p = std::move(p);
  return out;
}

InnerResult bellman_step_nats(const Pomdp& model, int s,
                              const std::vector<double>& values_nats,
                              double beta, double tol_nats,
                              std::vector<double> init) {
  const int A = model.num_actions();
  std::vector<const std::vector<double>*> rows(A);
  std::vector<double> c(A);
  for (int a = 0; a < A; ++a) {
    const auto& row = model.transition[s][a];
    rows[a] = &row;
    double w = 0.0;
    for (int j = 0; j < model.num_states(); ++j) w += row[j] * values_nats[j];
    c[a] = entropy_nats_of_row(row) + beta * w;
  }
  if (static_cast<int>(init.size()) != A) {
    init.assign(A, 1.0 / A);
  }
  return ascend(rows, c, std::move(init), tol_nats);
}

void check_absorbing_cycles(const Pomdp& model) {
  const int S = model.num_states();
  std::vector<std::vector<int>> adj(S);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < S; ++j) {
      for (int a = 0; a < model.num_actions(); ++a) {
        if (model.transition[s][a][j] > 0.0) {
          adj[s].push_back(j);
          break;
        }
      }
    }
  }
  const auto scc = internal::strongly_connected_components(adj);
  std::vector<int> comp_size(scc.count, 0);
  for (int s = 0; s < S; ++s) ++comp_size[scc.comp[s]];
  for (int s = 0; s < S; ++s) {
    const bool self_edge =
        std::find(adj[s].begin(), adj[s].end(), s) != adj[s].end();
    if (comp_size[scc.comp[s]] == 1 && !self_edge) continue;
    for (int a = 0; a < model.num_actions(); ++a) {
      if (model.transition[s][a][s] < 1.0 - 1e-12) {
        throw DivergentEntropy(
            "undiscounted entropy bound requires every cycle to be an "
            "absorbing state under all actions; state '" + model.states[s] +
            "' is on a cycle but action '" + model.actions[a] +
            "' can leave it");
      }
    }
  }
}

}  // namespace

EntropyBellmanStep entropy_bellman_step(const Pomdp& model, int s,
                                        const std::vector<double>& values,
                                        double beta, double gap_tolerance,
                                        std::vector<double> initial_policy) {
  if (s < 0 || s >= model.num_states()) {
    throw ValidationError("state index out of range");
  }
  if (static_cast<int>(values.size()) != model.num_states()) {
    throw ValidationError("value vector length does not match the model");
  }
  std::vector<double> values_nats(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values_nats[i] = nats_from_bits(values[i]);
  }
  const auto inner =
      bellman_step_nats(model, s, values_nats, beta,
                        nats_from_bits(gap_tolerance),
                        std::move(initial_policy));
  EntropyBellmanStep step;
  step.value = bits_from_nats(inner.value_nats);
  step.policy = inner.p;
  step.gap = bits_from_nats(inner.gap_nats);
  step.iterations = inner.iterations;
  return step;
}

MdpBoundResult max_entropy_mdp(const Pomdp& model, double beta) {
  auto report = validate_pomdp(model);
  if (!report.ok()) {
    throw ValidationError("invalid model:\n" + report.summary());
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("discount must lie in [0, 1], got " +
                          format_double(beta));
  }
  const int S = model.num_states();
  const bool undiscounted = beta == 1.0;
  if (undiscounted) check_absorbing_cycles(model);

  const double tol_bits = undiscounted ? 1e-12 : 1e-7 * (1.0 - beta);
  const double tol_nats = nats_from_bits(tol_bits);
  const double inner_tol_nats = nats_from_bits(1e-8);
  const int max_sweeps = undiscounted ? S + 64 : 200000;

  std::vector<double> values(S, 0.0), next(S);
  std::vector<std::vector<double>> warm(S);
  MdpBoundResult result;
  double worst_gap_nats = 0.0;
  bool converged = false;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    worst_gap_nats = 0.0;
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      auto inner = bellman_step_nats(model, s, values, beta, inner_tol_nats,
                                     std::move(warm[s]));
      next[s] = inner.value_nats;
      warm[s] = std::move(inner.p);
      worst_gap_nats = std::max(worst_gap_nats, inner.gap_nats);
      delta = std::max(delta, std::abs(next[s] - values[s]));
    }
    values.swap(next);
    result.iterations = sweep;
    if (delta <= tol_nats) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw SolverFailure("entropy value iteration did not converge in " +
                        std::to_string(max_sweeps) + " sweeps");
  }
  result.values.resize(S);
  for (int s = 0; s < S; ++s) result.values[s] = bits_from_nats(values[s]);
  result.bound = result.values[model.initial];
  result.inner_gap = bits_from_nats(worst_gap_nats);
  return result;
}

}  // namespace entromax
