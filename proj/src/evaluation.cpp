#include "entromax/evaluation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "entromax/common.hpp"
#include "scc.hpp"

namespace entromax {
namespace {

/// Local entropy / recurring reward below this is treated as zero when
/// classifying undiscounted divergence; it absorbs fp dust from near-vertex
/// controller parameters without masking genuine recurrence.
constexpr double kRecurrenceTol = 1e-12;

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("discount must lie in [0, 1], got " +
                          format_double(beta));
  }
}

void check_chain(const MarkovChain& chain) {
  const int n = chain.num_states();
  if (n == 0) throw ValidationError("chain has no states");
  if (chain.initial < 0 || chain.initial >= n) {
    throw ValidationError("chain initial state out of range");
  }
  if (static_cast<int>(chain.reward.size()) != n) {
    throw ValidationError("chain reward vector has wrong length");
  }
  for (int s = 0; s < n; ++s) {
    if (static_cast<int>(chain.transition[s].size()) != n) {
      throw ValidationError("chain transition matrix is not square");
    }
    if (!is_distribution(chain.transition[s])) {
      throw ValidationError("chain row " + std::to_string(s + 1) +
                            " is not stochastic");
    }
  }
}

std::string state_label(const MarkovChain& chain, int s) {
  if (static_cast<int>(chain.labels.size()) == chain.num_states()) {
    return chain.labels[s];
  }
  return "#" + std::to_string(s + 1);
}

std::vector<char> reachable_states(const MarkovChain& chain) {
  const int n = chain.num_states();
  std::vector<char> reach(n, 0);
  std::vector<int> work{chain.initial};
  reach[chain.initial] = 1;
  while (!work.empty()) {
    const int s = work.back();
    work.pop_back();
    for (int j = 0; j < n; ++j) {
      if (chain.transition[s][j] > 0.0 && !reach[j]) {
        reach[j] = 1;
        work.push_back(j);
      }
    }
  }
  return reach;
}

internal::SccResult chain_components(const MarkovChain& chain) {
  const int n = chain.num_states();
  std::vector<std::vector<int>> adj(n);
  for (int s = 0; s < n; ++s) {
    for (int j = 0; j < n; ++j) {
      if (chain.transition[s][j] > 0.0) adj[s].push_back(j);
    }
  }
  return internal::strongly_connected_components(adj);
}

Eigen::VectorXd refined_solve(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                              const Eigen::MatrixXd& M,
                              const Eigen::VectorXd& b) {
  Eigen::VectorXd x = lu.solve(b);
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::VectorXd residual = b - M * x;
    if (residual.lpNorm<Eigen::Infinity>() <= 1e-10) break;
    x += lu.solve(residual);
  }
  return x;
}

enum class ValueKind { entropy, reward };

[[noreturn]] void throw_divergent(ValueKind kind, const std::string& label) {
  if (kind == ValueKind::entropy) {
    throw DivergentEntropy(
        "undiscounted entropy diverges: recurrent state '" + label +
        "' keeps generating local entropy");
  }
  throw DivergentReward("undiscounted reward diverges: recurrent state '" +
                        label + "' keeps collecting reward");
}

struct SolvedValues {
  std::vector<double> nu;
  std::vector<double> eta;
};

SolvedValues solve_value_systems(const MarkovChain& chain, double beta,
                                 bool want_entropy, bool want_reward) {
  check_beta(beta);
  check_chain(chain);
  const int n = chain.num_states();
  const std::vector<double> L = local_entropy(chain);
  SolvedValues out;

  if (beta < 1.0) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) -= beta * chain.transition[i][j];
    }
    const auto lu = M.partialPivLu();
    auto solve_one = [&](const std::vector<double>& w) {
      Eigen::VectorXd b(n);
      for (int i = 0; i < n; ++i) b(i) = w[i];
      const Eigen::VectorXd x = refined_solve(lu, M, b);
      return std::vector<double>(x.data(), x.data() + n);
    };
    if (want_entropy) out.nu = solve_one(L);
    if (want_reward) out.eta = solve_one(chain.reward);
  } else {
    const auto reach = reachable_states(chain);
    const auto scc = chain_components(chain);
    auto recurrent = [&](int s) { return scc.closed[scc.comp[s]] == 1; };
    for (int s = 0; s < n; ++s) {
      if (!reach[s] || !recurrent(s)) continue;
      if (want_entropy && L[s] > kRecurrenceTol) {
        throw_divergent(ValueKind::entropy, state_label(chain, s));
      }
      if (want_reward && std::abs(chain.reward[s]) > kRecurrenceTol) {
        throw_divergent(ValueKind::reward, state_label(chain, s));
      }
    }
    // Transient = reachable and not in a closed class; everything else is
    // pinned to 0 (recurrent classes generate nothing, unreachable states
    // are reported as 0 by convention).
    std::vector<int> tstates;
    std::vector<int> tindex(n, -1);
    for (int s = 0; s < n; ++s) {
      if (reach[s] && !recurrent(s)) {
        tindex[s] = static_cast<int>(tstates.size());
        tstates.push_back(s);
      }
    }
    const int m = static_cast<int>(tstates.size());
    if (want_entropy) out.nu.assign(n, 0.0);
    if (want_reward) out.eta.assign(n, 0.0);
    if (m > 0) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          M(i, j) -= chain.transition[tstates[i]][tstates[j]];
        }
      }
      const auto lu = M.partialPivLu();
      auto solve_one = [&](const std::vector<double>& w,
                           std::vector<double>& dst) {
        Eigen::VectorXd b(m);
        for (int i = 0; i < m; ++i) b(i) = w[tstates[i]];
        const Eigen::VectorXd x = refined_solve(lu, M, b);
        for (int i = 0; i < m; ++i) dst[tstates[i]] = x(i);
      };
      if (want_entropy) solve_one(L, out.nu);
      if (want_reward) solve_one(chain.reward, out.eta);
    }
  }
  // Entropy values are nonnegative in exact arithmetic; clip solver dust.
  for (double& v : out.nu) {
    if (v < 0.0 && v > -1e-9) v = 0.0;
  }
  return out;
}

EvaluationResult package(const MarkovChain& chain, double beta,
                         SolvedValues values) {
  EvaluationResult result;
  result.beta = beta;
  result.nu = std::move(values.nu);
  result.eta = std::move(values.eta);
  if (!result.nu.empty()) result.total_entropy = result.nu[chain.initial];
  if (!result.eta.empty()) result.total_reward = result.eta[chain.initial];
  return result;
}

/// Cumulative rows over nonzero entries for O(log n) sampling.
std::vector<std::vector<std::pair<double, int>>> sampling_rows(
    const MarkovChain& chain) {
  const int n = chain.num_states();
  std::vector<std::vector<std::pair<double, int>>> rows(n);
  for (int s = 0; s < n; ++s) {
    double cum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p = chain.transition[s][j];
      if (p <= 0.0) continue;
      cum += p;
      rows[s].push_back({cum, j});
    }
  }
  return rows;
}

int sample_next(const std::vector<std::pair<double, int>>& row, double u) {
  const double target = u * row.back().first;
  auto it = std::lower_bound(
      row.begin(), row.end(), target,
      [](const std::pair<double, int>& e, double t) { return e.first < t; });
  if (it == row.end()) --it;
  return it->second;
}

}  // namespace

std::vector<double> local_entropy(const MarkovChain& chain) {
  std::vector<double> L(chain.num_states(), 0.0);
  for (int s = 0; s < chain.num_states(); ++s) {
    double h = 0.0;
    for (double p : chain.transition[s]) h += entropy_term_bits(p);
    L[s] = h;
  }
  return L;
}

EvaluationResult discounted_entropy(const MarkovChain& chain, double beta) {
  return package(chain, beta, solve_value_systems(chain, beta, true, false));
}

EvaluationResult discounted_reward(const MarkovChain& chain, double beta) {
  return package(chain, beta, solve_value_systems(chain, beta, false, true));
}

EvaluationResult evaluate(const MarkovChain& chain, double beta) {
  return package(chain, beta, solve_value_systems(chain, beta, true, true));
}

double finite_horizon_entropy(const MarkovChain& chain, int horizon) {
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  check_chain(chain);
  const int n = chain.num_states();
  const std::vector<double> L = local_entropy(chain);
  std::vector<double> d(n, 0.0), next(n);
  d[chain.initial] = 1.0;
  double total = 0.0;
  for (int t = 1; t < horizon; ++t) {
    for (int s = 0; s < n; ++s) total += d[s] * L[s];
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      if (d[s] == 0.0) continue;
      for (int j = 0; j < n; ++j) next[j] += d[s] * chain.transition[s][j];
    }
    d.swap(next);
  }
  return total;
}

double finite_horizon_reward(const MarkovChain& chain, int horizon) {
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  check_chain(chain);
  const int n = chain.num_states();
  std::vector<double> d(n, 0.0), next(n);
  d[chain.initial] = 1.0;
  double total = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    for (int s = 0; s < n; ++s) total += d[s] * chain.reward[s];
    if (t == horizon) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      if (d[s] == 0.0) continue;
      for (int j = 0; j < n; ++j) next[j] += d[s] * chain.transition[s][j];
    }
    d.swap(next);
  }
  return total;
}

OccupancyTable occupancy_discounted(const MarkovChain& chain, double beta) {
  check_beta(beta);
  check_chain(chain);
  const int n = chain.num_states();
  OccupancyTable table;
  table.labels.resize(n);
  for (int s = 0; s < n; ++s) table.labels[s] = state_label(chain, s);
  table.visits.assign(n, 0.0);

  if (beta < 1.0) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) -= beta * chain.transition[j][i];
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(chain.initial) = 1.0;
    const auto lu = M.partialPivLu();
    const Eigen::VectorXd x = refined_solve(lu, M, b);
    for (int i = 0; i < n; ++i) table.visits[i] = std::max(x(i), 0.0);
  } else {
    const auto reach = reachable_states(chain);
    const auto scc = chain_components(chain);
    auto recurrent = [&](int s) { return scc.closed[scc.comp[s]] == 1; };
    std::vector<int> tstates;
    std::vector<int> tindex(n, -1);
    for (int s = 0; s < n; ++s) {
      if (!reach[s]) continue;
      if (recurrent(s)) {
        table.visits[s] = std::numeric_limits<double>::infinity();
      } else {
        tindex[s] = static_cast<int>(tstates.size());
        tstates.push_back(s);
      }
    }
    const int m = static_cast<int>(tstates.size());
    if (m > 0) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          M(i, j) -= chain.transition[tstates[j]][tstates[i]];
        }
      }
      Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
      if (tindex[chain.initial] >= 0) b(tindex[chain.initial]) = 1.0;
      const auto lu = M.partialPivLu();
      const Eigen::VectorXd x = refined_solve(lu, M, b);
      for (int i = 0; i < m; ++i) {
        table.visits[tstates[i]] = std::max(x(i), 0.0);
      }
    }
  }
  table.total = 0.0;
  for (double v : table.visits) table.total += v;
  return table;
}

OccupancyTable occupancy_horizon(const MarkovChain& chain, int horizon) {
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  check_chain(chain);
  const int n = chain.num_states();
  OccupancyTable table;
  table.labels.resize(n);
  for (int s = 0; s < n; ++s) table.labels[s] = state_label(chain, s);
  table.visits.assign(n, 0.0);
  std::vector<double> d(n, 0.0), next(n);
  d[chain.initial] = 1.0;
  for (int t = 1; t <= horizon; ++t) {
    for (int s = 0; s < n; ++s) table.visits[s] += d[s];
    if (t == horizon) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      if (d[s] == 0.0) continue;
      for (int j = 0; j < n; ++j) next[j] += d[s] * chain.transition[s][j];
    }
    d.swap(next);
  }
  table.total = 0.0;
  for (double v : table.visits) table.total += v;
  return table;
}

std::vector<double> marginalize_memory(const InducedPmc& pmc,
                                       const std::vector<double>& visits) {
  if (static_cast<int>(visits.size()) != pmc.num_product_states()) {
    throw ValidationError("visit vector length does not match product size");
  }
  std::vector<double> out(pmc.num_model_states, 0.0);
  for (int idx = 0; idx < pmc.num_product_states(); ++idx) {
    out[pmc.model_state(idx)] += visits[idx];
  }
  return out;
}

SimulationResult simulate(const MarkovChain& chain, int horizon, int n_paths,
                          std::uint64_t seed) {
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  if (n_paths < 1) throw ValidationError("need at least one path");
  check_chain(chain);
  const int n = chain.num_states();
  const auto rows = sampling_rows(chain);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulationResult result;
  std::vector<double> visit_sum(n, 0.0), visit_sq(n, 0.0);
  double reward_sum = 0.0, reward_sq = 0.0;
  std::vector<int> path(horizon);
  std::vector<int> visits(n);

  for (int p = 0; p < n_paths; ++p) {
    std::fill(visits.begin(), visits.end(), 0);
    int s = chain.initial;
    double reward = 0.0;
    for (int t = 0; t < horizon; ++t) {
      path[t] = s;
      ++visits[s];
      reward += chain.reward[s];
      if (t + 1 < horizon) s = sample_next(rows[s], unif(rng));
    }
    ++result.path_counts[path];
    for (int i = 0; i < n; ++i) {
      visit_sum[i] += visits[i];
      visit_sq[i] += static_cast<double>(visits[i]) * visits[i];
    }
    reward_sum += reward;
    reward_sq += reward * reward;
  }

  const double np = n_paths;
  result.mean_visits.resize(n);
  result.visit_se.resize(n);
  for (int i = 0; i < n; ++i) {
    const double mean = visit_sum[i] / np;
    result.mean_visits[i] = mean;
    const double var = std::max(0.0, visit_sq[i] / np - mean * mean);
    result.visit_se[i] = std::sqrt(var / np);
  }
  result.mean_reward = reward_sum / np;
  const double reward_var =
      std::max(0.0, reward_sq / np - result.mean_reward * result.mean_reward);
  result.reward_se = std::sqrt(reward_var / np);

  // Plug-in entropy of the empirical path distribution with its asymptotic
  // standard error sqrt((E[log^2 p] - H^2)/n).
  double h = 0.0, h2 = 0.0;
  for (const auto& [path_key, count] : result.path_counts) {
    const double freq = count / np;
    const double lg = std::log2(freq);
    h -= freq * lg;
    h2 += freq * lg * lg;
  }
  result.entropy_bits = h;
  result.entropy_se = std::sqrt(std::max(0.0, h2 - h * h) / np);
  return result;
}

SimulationResult simulate_discounted(const MarkovChain& chain, double beta,
                                     int n_paths, std::uint64_t seed,
                                     double tail_tolerance) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw ValidationError("discounted simulation requires beta in [0, 1)");
  }
  if (n_paths < 1) throw ValidationError("need at least one path");
  if (!(tail_tolerance > 0.0)) {
    throw ValidationError("tail tolerance must be positive");
  }
  check_chain(chain);
  const int n = chain.num_states();
  const std::vector<double> L = local_entropy(chain);
  const auto rows = sampling_rows(chain);
  const long long max_steps =
      beta == 0.0 ? 1
                  : std::min<long long>(
                        1000000, 1 + static_cast<long long>(std::ceil(
                                         std::log(tail_tolerance) /
                                         std::log(beta))));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> visit_sum(n, 0.0), visit_sq(n, 0.0);
  std::vector<int> visits(n);
  double e_sum = 0.0, e_sq = 0.0, r_sum = 0.0, r_sq = 0.0;
  for (int p = 0; p < n_paths; ++p) {
    std::fill(visits.begin(), visits.end(), 0);
    int s = chain.initial;
    double disc = 1.0;
    double entropy = 0.0, reward = 0.0;
    for (long long t = 0; t < max_steps; ++t) {
      ++visits[s];
      entropy += disc * L[s];
      reward += disc * chain.reward[s];
      // Absorbing states that generate nothing cannot change the sums.
      if (chain.transition[s][s] >= 1.0 - 1e-12 && L[s] == 0.0 &&
          chain.reward[s] == 0.0) {
        break;
      }
      disc *= beta;
      s = sample_next(rows[s], unif(rng));
    }
    e_sum += entropy;
    e_sq += entropy * entropy;
    r_sum += reward;
    r_sq += reward * reward;
    for (int i = 0; i < n; ++i) {
      visit_sum[i] += visits[i];
      visit_sq[i] += static_cast<double>(visits[i]) * visits[i];
    }
  }

  SimulationResult result;
  const double np = n_paths;
  result.mean_visits.resize(n);
  result.visit_se.resize(n);
  for (int i = 0; i < n; ++i) {
    const double mean = visit_sum[i] / np;
    result.mean_visits[i] = mean;
    const double var = std::max(0.0, visit_sq[i] / np - mean * mean);
    result.visit_se[i] = std::sqrt(var / np);
  }
  result.entropy_bits = e_sum / np;
  result.entropy_se = std::sqrt(
      std::max(0.0, e_sq / np - result.entropy_bits * result.entropy_bits) /
      np);
  result.mean_reward = r_sum / np;
  result.reward_se = std::sqrt(
      std::max(0.0, r_sq / np - result.mean_reward * result.mean_reward) / np);
  return result;
}

}  // namespace entromax
