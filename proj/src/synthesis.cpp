#include "entromax/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <utility>

#include "entromax/common.hpp"
#include "entromax/evaluation.hpp"
#include "entromax/subproblem.hpp"

namespace entromax {
namespace {

constexpr double kFeasTol = 1e-6;    // exact reward re-check margin
constexpr double kPolishTol = 1e-7;  // snap-to-vertex threshold

void validate_config(const SynthesisConfig& c) {
  if (!(c.beta > 0.0 && c.beta <= 1.0)) {
    throw ValidationError("discount must lie in (0, 1], got " +
                          format_double(c.beta));
  }
  if (!(c.tau0 > 0.0) || !(c.tau_growth >= 1.0) || !(c.tau_max >= c.tau0)) {
    throw ValidationError("penalty schedule must satisfy tau0 > 0, "
                          "growth >= 1, tau_max >= tau0");
  }
  if (!(c.epsilon > 0.0) || c.max_iterations < 1 || c.restarts < 1 ||
      !(c.slack_tolerance > 0.0) || !(c.subproblem_tolerance > 0.0)) {
    throw ValidationError("nonpositive synthesis tolerances or budgets");
  }
}

bool clears_threshold(double reward, const SynthesisConfig& c) {
  return !std::isfinite(c.gamma_threshold) ||
         reward >= c.gamma_threshold - kFeasTol;
}

std::vector<double> flatten(const InducedPmc& pmc, const Instantiation& u) {
  std::vector<double> flat(pmc.num_parameters());
  for (int q = 0; q < pmc.k(); ++q) {
    for (int z = 0; z < pmc.num_observations; ++z) {
      for (int a = 0; a < pmc.num_actions; ++a) {
        flat[pmc.parameter_index(q, z, a)] = u.gamma[q][z][a];
      }
    }
  }
  return flat;
}

Instantiation unflatten(const InducedPmc& pmc, const std::vector<double>& flat) {
  Instantiation u;
  u.gamma.assign(pmc.k(),
                 std::vector<std::vector<double>>(
                     pmc.num_observations, std::vector<double>(pmc.num_actions)));
  for (int q = 0; q < pmc.k(); ++q) {
    for (int z = 0; z < pmc.num_observations; ++z) {
      for (int a = 0; a < pmc.num_actions; ++a) {
        u.gamma[q][z][a] = flat[pmc.parameter_index(q, z, a)];
      }
    }
  }
  return u;
}

struct ExactPoint {
  DcExpansion hat;
  double entropy_bits = 0.0;
  double reward = 0.0;
};

ExactPoint exact_point(const InducedPmc& pmc, const Instantiation& u,
                       const SynthesisConfig& config) {
  const MarkovChain chain = instantiate(pmc, u, config.reward_convention);
  const EvaluationResult ev = evaluate(chain, config.beta);
  ExactPoint ex;
  ex.hat.nu.resize(ev.nu.size());
  for (std::size_t i = 0; i < ev.nu.size(); ++i) {
    ex.hat.nu[i] = nats_from_bits(ev.nu[i]);
  }
  ex.hat.eta = ev.eta;
  ex.hat.gamma = flatten(pmc, u);
  ex.entropy_bits = ev.total_entropy;
  ex.reward = ev.total_reward;
  return ex;
}

/// Snaps near-vertex rows exactly onto the vertex; the barrier keeps every
/// entry interior, so optima on simplex faces land at ~1e-9 instead of 0.
std::optional<Instantiation> snap_vertices(const Instantiation& u) {
  Instantiation p = u;
  bool changed = false;
  for (auto& per_obs : p.gamma) {
    for (auto& row : per_obs) {
      double kept = 0.0;
      for (double& v : row) {
        if (v != 0.0 && v < kPolishTol) {
          v = 0.0;
          changed = true;
        }
        kept += v;
      }
      if (kept > 0.0) {
        for (double& v : row) v /= kept;
      }
    }
  }
  if (!changed) return std::nullopt;
  return p;
}

/// Degenerate instance: the initial product state is pinned, so every
/// controller yields zero entropy and zero reward.
SynthesisResult degenerate_result(const InducedPmc& pmc,
                                  const SynthesisConfig& config) {
  SynthesisResult r;
  r.structure = pmc.structure;
  r.instantiation =
      uniform_instantiation(pmc.k(), pmc.num_observations, pmc.num_actions);
  const ExactPoint ex = exact_point(pmc, r.instantiation, config);
  r.entropy_bits = ex.entropy_bits;
  r.reward = ex.reward;
  r.feasible = clears_threshold(ex.reward, config);
  r.status = r.feasible ? SynthesisStatus::ok : SynthesisStatus::slack_positive;
  r.seed = config.seed;
  return r;
}

SynthesisResult ccp_run(const InducedPmc& pmc, const NlpProblem& nlp,
                        SubproblemSolver& solver,
                        const SynthesisConfig& config,
                        const Instantiation& initial, int restart_index,
                        std::uint64_t seed) {
  const auto report = check_well_defined(initial, pmc.structure,
                                         pmc.num_observations, pmc.num_actions);
  if (!report.ok) {
    throw ValidationError("starting controller rows are not distributions");
  }

  SynthesisResult r;
  r.structure = pmc.structure;
  r.restart_index = restart_index;
  r.seed = seed;

  struct Best {
    Instantiation u;
    double entropy = 0.0;
    double reward = 0.0;
    bool set = false;
  } best;
  auto consider = [&](const Instantiation& u, const ExactPoint& ex) {
    if (!clears_threshold(ex.reward, config)) return;
    if (!best.set || ex.entropy_bits > best.entropy) {
      best = {u, ex.entropy_bits, ex.reward, true};
    }
  };

  Instantiation u = initial;
  ExactPoint ex = exact_point(pmc, u, config);
  consider(u, ex);

  DcExpansion hat = ex.hat;
  double tau = config.tau0;
  double prev_val = std::numeric_limits<double>::quiet_NaN();
  SubproblemResult warm;
  bool have_warm = false;
  bool terminated = false;
  int consecutive_failures = 0;

  for (int it = 1; it <= config.max_iterations; ++it) {
    if (!nlp.include_entropy && best.set) {
      // Feasibility runs are done the moment an iterate passes the exact
      // reward re-check.
      terminated = true;
      break;
    }
    SubproblemResult sub = solver.solve(hat, tau, config.subproblem_tolerance,
                                        have_warm ? &warm : nullptr);
    if (!sub.converged && have_warm) {
      SubproblemResult cold =
          solver.solve(hat, tau, config.subproblem_tolerance, nullptr);
      if (cold.converged || cold.val > sub.val) sub = std::move(cold);
    }
    if (!sub.converged) {
      if (++consecutive_failures >= 3) {
        throw SolverFailure("convex subproblem broke down repeatedly");
      }
    } else {
      consecutive_failures = 0;
    }

    u = unflatten(pmc, sub.gamma);
    ex = exact_point(pmc, u, config);
    hat.nu = ex.hat.nu;
    hat.eta = ex.hat.eta;
    hat.gamma = sub.gamma;
    consider(u, ex);

    r.trace.push_back({it, bits_from_nats(sub.val), ex.entropy_bits, ex.reward,
                       sub.slack_sum, tau});
    r.iterations = it;
    r.slack_sum = sub.slack_sum;

    const bool settled =
        std::isfinite(prev_val) && std::abs(sub.val - prev_val) < config.epsilon;
    prev_val = sub.val;
    warm = std::move(sub);
    have_warm = true;
    if (settled && warm.slack_sum <= config.slack_tolerance) {
      terminated = true;
      break;
    }
    tau = std::min(tau * config.tau_growth, config.tau_max);
  }

  if (terminated) {
    r.status = SynthesisStatus::ok;
  } else if (r.slack_sum > config.slack_tolerance) {
    r.status = SynthesisStatus::slack_positive;
  } else {
    r.status = SynthesisStatus::iteration_limit;
  }

  if (best.set) {
    if (auto snapped = snap_vertices(best.u)) {
      const ExactPoint pex = exact_point(pmc, *snapped, config);
      if (clears_threshold(pex.reward, config) &&
          pex.entropy_bits >= best.entropy - 1e-9) {
        best = {*snapped, pex.entropy_bits, pex.reward, true};
      }
    }
    r.instantiation = best.u;
    r.entropy_bits = best.entropy;
    r.reward = best.reward;
    r.feasible = true;
  } else {
    r.instantiation = u;
    r.entropy_bits = ex.entropy_bits;
    r.reward = ex.reward;
    r.feasible = false;
    if (r.status == SynthesisStatus::ok) {
      r.status = SynthesisStatus::slack_positive;
    }
  }
  return r;
}

}  // namespace

const char* to_string(SynthesisStatus status) {
  switch (status) {
    case SynthesisStatus::ok:
      return "ok";
    case SynthesisStatus::slack_positive:
      return "slack_positive";
    case SynthesisStatus::iteration_limit:
      return "iteration_limit";
    case SynthesisStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

NlpProblem build_nlp(const InducedPmc& pmc, const SynthesisConfig& config) {
  return build_nlp(pmc, config.beta, config.gamma_threshold,
                   config.reward_convention, true);
}

SynthesisResult penalty_ccp(const InducedPmc& pmc,
                            const SynthesisConfig& config,
                            const Instantiation& initial) {
  validate_config(config);
  const NlpProblem nlp = build_nlp(pmc, config);
  if (nlp.pinned[pmc.initial]) return degenerate_result(pmc, config);
  SubproblemSolver solver(nlp);
  return ccp_run(pmc, nlp, solver, config, initial, 0, config.seed);
}

SynthesisResult synth_with_restarts(
    const InducedPmc& pmc, const SynthesisConfig& config,
    const std::vector<Instantiation>& extra_initials) {
  validate_config(config);
  const NlpProblem nlp = build_nlp(pmc, config);
  if (nlp.pinned[pmc.initial]) {
    SynthesisResult r = degenerate_result(pmc, config);
    if (!r.feasible) {
      throw AllRestartsFailed(
          "the initial state generates nothing, yet the reward threshold is "
          "positive");
    }
    return r;
  }
  SubproblemSolver solver(nlp);

  std::optional<SynthesisResult> best;
  int failures = 0, infeasible = 0;
  auto admit = [&](SynthesisResult&& run) {
    if (!run.feasible) {
      ++infeasible;
      return;
    }
    if (!best || run.entropy_bits > best->entropy_bits) best = std::move(run);
  };

  int index = 0;
  for (const auto& u0 : extra_initials) {
    try {
      admit(ccp_run(pmc, nlp, solver, config, u0, index, config.seed));
    } catch (const SolverFailure&) {
      ++failures;
    }
    ++index;
  }
  for (int i = 0; i < config.restarts; ++i, ++index) {
    const std::uint64_t seed = derive_seed(config.seed, i);
    std::mt19937_64 rng(seed);
    const Instantiation u0 = random_instantiation(
        pmc.k(), pmc.num_observations, pmc.num_actions, rng);
    try {
      admit(ccp_run(pmc, nlp, solver, config, u0, index, seed));
    } catch (const SolverFailure&) {
      ++failures;
    }
  }
  if (!best) {
    throw AllRestartsFailed("no feasible controller in " +
                            std::to_string(index) + " runs (" +
                            std::to_string(infeasible) + " infeasible, " +
                            std::to_string(failures) + " solver failures)");
  }
  return *best;
}

SynthesisResult synth_feasibility(const InducedPmc& pmc,
                                  const SynthesisConfig& config) {
  validate_config(config);
  if (!std::isfinite(config.gamma_threshold)) {
    throw ValidationError(
        "the feasibility program needs a finite reward threshold");
  }
  const NlpProblem nlp =
      build_nlp(pmc, config.beta, config.gamma_threshold,
                config.reward_convention, /*include_entropy=*/false);
  if (nlp.pinned[pmc.initial]) {
    SynthesisResult r = degenerate_result(pmc, config);
    if (!r.feasible) {
      throw AllRestartsFailed(
          "the initial state generates nothing, yet the reward threshold is "
          "positive");
    }
    return r;
  }
  SubproblemSolver solver(nlp);

  int failures = 0;
  for (int i = 0; i < config.restarts; ++i) {
    const std::uint64_t seed = derive_seed(config.seed, i);
    std::mt19937_64 rng(seed);
    const Instantiation u0 = random_instantiation(
        pmc.k(), pmc.num_observations, pmc.num_actions, rng);
    try {
      SynthesisResult run = ccp_run(pmc, nlp, solver, config, u0, i, seed);
      if (run.feasible) return run;
    } catch (const SolverFailure&) {
      ++failures;
    }
  }
  throw AllRestartsFailed("no exactly feasible point in " +
                          std::to_string(config.restarts) + " runs (" +
                          std::to_string(failures) + " solver failures)");
}

SynthesisResult max_entropy_mdp_constrained(const Pomdp& model, double beta,
                                            double gamma_threshold,
                                            const SynthesisConfig& config) {
  SynthesisConfig cfg = config;
  cfg.beta = beta;
  cfg.gamma_threshold = gamma_threshold;
  const Pomdp fully_observable = to_fully_observable(model);
  const InducedPmc pmc =
      build_pmc(fully_observable, chain_memory_structure(1));
  return synth_with_restarts(pmc, cfg);
}

std::vector<SynthesisResult> memory_sweep(const Pomdp& model,
                                          const std::vector<int>& k_range,
                                          const SynthesisConfig& config,
                                          double stop_percent) {
  if (k_range.empty() || k_range.front() < 1 ||
      !std::is_sorted(k_range.begin(), k_range.end())) {
    throw ValidationError("memory sizes must be ascending and start at >= 1");
  }
  std::vector<SynthesisResult> results;
  std::optional<Instantiation> carried;
  double prev_entropy = 0.0;
  for (int k : k_range) {
    const InducedPmc pmc = build_pmc(model, chain_memory_structure(k));
    std::vector<Instantiation> extras;
    if (carried) {
      Instantiation embedded = *carried;
      while (embedded.memory_size() < k) embedded = extend_memory(embedded);
      extras.push_back(std::move(embedded));
    }
    SynthesisResult res;
    if (carried) {
      res = synth_with_restarts(pmc, config, extras);
    } else {
      // Additional memory can make a threshold feasible that smaller
      // controllers cannot reach, so infeasible sizes before the first
      // success are skipped rather than aborting the sweep. Once one size
      // succeeds the embedded warm start keeps every later size feasible.
      try {
        res = synth_with_restarts(pmc, config, extras);
      } catch (const AllRestartsFailed&) {
        continue;
      }
    }
    if (carried && res.entropy_bits < prev_entropy &&
        prev_entropy - res.entropy_bits <= 1e-9) {
      // The embedded start reproduces the previous optimum exactly up to
      // linear-solve noise; absorb that noise so the sweep is monotone.
      res.entropy_bits = prev_entropy;
    }
    const double improvement_pct =
        carried ? 100.0 * (res.entropy_bits - prev_entropy) /
                      std::max(prev_entropy, 1e-9)
                : std::numeric_limits<double>::infinity();
    carried = res.instantiation;
    prev_entropy = res.entropy_bits;
    results.push_back(std::move(res));
    if (improvement_pct < stop_percent) break;
  }
  if (results.empty()) {
    throw AllRestartsFailed(
        "no feasible controller at any memory size in the sweep");
  }
  return results;
}

}  // namespace entromax
