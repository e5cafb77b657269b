// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any
// fails. INFO lines report values that are informational rather than binding.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "entromax/common.hpp"
#include "entromax/evaluation.hpp"
#include "entromax/format.hpp"
#include "entromax/fsc.hpp"
#include "entromax/generators.hpp"
#include "entromax/mdp_bound.hpp"
#include "entromax/model.hpp"
#include "entromax/nlp.hpp"
#include "entromax/pmc.hpp"
#include "entromax/synthesis.hpp"
#include "oracles.hpp"

namespace {

using namespace entromax;

int g_failures = 0;

void check(const std::string& name, const std::function<void()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("PASS %s (%.1fs)\n", name.c_str(), s);
  } catch (const std::exception& e) {
    ++g_failures;
    std::printf("FAIL %s: %s\n", name.c_str(), e.what());
  }
  std::fflush(stdout);
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

void info(const std::string& line) {
  std::printf("  INFO %s\n", line.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4f", v);
  return buffer;
}

// Shared between the first two criteria so the endpoint comparison reuses
// the sweep's synthesized values.
std::map<double, double> g_fig5_entropy;

SynthesisResult fig5_synth(double gamma_threshold) {
  static const InducedPmc pmc =
      build_pmc(reduce_finite_horizon(builtin_model("fig5"), 3),
                chain_memory_structure(2));
  SynthesisConfig cfg;
  cfg.beta = 1.0;
  cfg.gamma_threshold = gamma_threshold;
  cfg.restarts = 10;
  cfg.seed = 424242;
  return synth_with_restarts(pmc, cfg);
}

double fig5_entropy_at(double gamma_threshold) {
  const auto it = g_fig5_entropy.find(gamma_threshold);
  if (it != g_fig5_entropy.end()) return it->second;
  return fig5_synth(gamma_threshold).entropy_bits;
}

void check_fig5_sweep() {
  const std::vector<double> thresholds{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const std::vector<double> expected{2.00, 1.97, 1.88, 1.72, 1.47, 1.00};
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const SynthesisResult res = fig5_synth(thresholds[i]);
    require(res.feasible, "no feasible controller at threshold " +
                              fmt(thresholds[i]));
    require(res.reward >= thresholds[i] - 1e-6,
            "reward " + fmt(res.reward) + " misses threshold " +
                fmt(thresholds[i]));
    require(std::abs(res.entropy_bits - expected[i]) <= 0.05,
            "entropy " + fmt(res.entropy_bits) + " at threshold " +
                fmt(thresholds[i]) + " is off the expected " +
                fmt(expected[i]));
    g_fig5_entropy[thresholds[i]] = res.entropy_bits;
    info("threshold " + fmt(thresholds[i]) + ": entropy " +
         fmt(res.entropy_bits) + " bits, reward " + fmt(res.reward));
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  info("sweep time " + fmt(elapsed) + "s (budget 300s)");
  require(elapsed < 300.0, "sweep exceeded its five-minute budget");
}

void check_fig5_endpoints() {
  for (const double threshold : {0.5, 1.0}) {
    const double oracle = oracles::fig5_grid_oracle(threshold);
    const double synthesized = fig5_entropy_at(threshold);
    info("threshold " + fmt(threshold) + ": grid search " + fmt(oracle) +
         ", synthesized " + fmt(synthesized));
    require(std::abs(synthesized - oracle) <= 0.02,
            "synthesized " + fmt(synthesized) +
                " disagrees with the grid search " + fmt(oracle));
  }
}

void check_bound_dominates() {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> states(2, 5), actions(1, 3), obs(1, 3);
  const double beta = 0.9;
  for (int i = 0; i < 50; ++i) {
    const Pomdp m =
        oracles::random_pomdp(rng, states(rng), actions(rng), obs(rng));
    const int Z = m.num_observations();
    const int A = m.num_actions();

    // Threshold: 90% of what the uniform controller earns, so both sides
    // always have a feasible point.
    const InducedPmc pmc1 = build_pmc(m, chain_memory_structure(1));
    const Instantiation uniform1 = uniform_instantiation(1, Z, A);
    const double uniform_reward =
        evaluate(instantiate(pmc1, uniform1), beta).total_reward;
    const double threshold = 0.9 * uniform_reward;

    SynthesisConfig cfg;
    cfg.beta = beta;
    cfg.gamma_threshold = threshold;
    cfg.restarts = 3;
    cfg.max_iterations = 60;
    cfg.seed = derive_seed(999, static_cast<std::uint64_t>(i));
    const InducedPmc pmc2 = build_pmc(m, chain_memory_structure(2));
    const SynthesisResult fsc =
        synth_with_restarts(pmc2, cfg, {uniform_instantiation(2, Z, A)});

    // The fully observable side gets strong starts: the uniform policy and
    // the unconstrained optimum from value iteration.
    const Pomdp fo = to_fully_observable(m);
    const InducedPmc fo_pmc = build_pmc(fo, chain_memory_structure(1));
    std::vector<Instantiation> extras;
    extras.push_back(
        uniform_instantiation(1, fo.num_observations(), fo.num_actions()));
    const MdpBoundResult vi = max_entropy_mdp(m, beta);
    Instantiation greedy = extras.front();
    for (int s = 0; s < m.num_states(); ++s) {
      greedy.gamma[0][s] = entropy_bellman_step(m, s, vi.values, beta).policy;
    }
    extras.push_back(std::move(greedy));
    SynthesisConfig bound_cfg = cfg;
    bound_cfg.restarts = 4;
    bound_cfg.seed = derive_seed(555, static_cast<std::uint64_t>(i));
    const SynthesisResult bound =
        synth_with_restarts(fo_pmc, bound_cfg, extras);

    require(fsc.entropy_bits <= bound.entropy_bits + 1e-3,
            "instance " + std::to_string(i) + ": controller entropy " +
                fmt(fsc.entropy_bits) + " exceeds the bound " +
                fmt(bound.entropy_bits));
  }
}

void check_brute_force_entropy() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> states(2, 4), actions(1, 3), obs(1, 3),
      memory(1, 3), horizon(2, 5);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Pomdp m =
        oracles::random_pomdp(rng, states(rng), actions(rng), obs(rng));
    const int k = memory(rng);
    const FscStructure structure = oracles::random_structure(rng, k);
    const Instantiation u =
        random_instantiation(k, m.num_observations(), m.num_actions(), rng);
    const int N = horizon(rng);
    const double brute = oracles::brute_force_state_entropy(m, structure, u, N);
    const double telescoped =
        finite_horizon_entropy(instantiate(build_pmc(m, structure), u), N);
    worst = std::max(worst, std::abs(brute - telescoped));
    require(std::abs(brute - telescoped) <= 1e-9,
            "instance " + std::to_string(i) + ": enumeration gives " +
                fmt(brute) + ", telescoping gives " + fmt(telescoped));
  }
  info("worst disagreement " + std::to_string(worst));
}

void check_memory_sweeps() {
  SynthesisConfig cfg;
  cfg.beta = 1.0;
  cfg.gamma_threshold = 1.0;
  cfg.restarts = 5;
  cfg.seed = 99;
  const auto runs = memory_sweep(builtin_model("fig7"), {1, 2, 3, 4, 5, 6},
                                 cfg, -1.0);
  require(runs.size() == 6, "the sweep stopped early");
  std::ostringstream values;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    require(runs[i].reward >= 1.0 - 1e-6,
            "size " + std::to_string(i + 1) + " missed the threshold");
    if (i > 0) {
      require(runs[i].entropy_bits >= runs[i - 1].entropy_bits,
              "entropy fell between sizes " + std::to_string(i) + " and " +
                  std::to_string(i + 1));
    }
    values << (i ? ", " : "") << "k=" << runs[i].structure.k << ": "
           << fmt(runs[i].entropy_bits);
  }
  info("fig7 sweep (bits): " + values.str());
  require(std::abs(runs[0].entropy_bits) <= 1e-6,
          "a memoryless controller at the full-reward threshold must be "
          "deterministic, got entropy " + fmt(runs[0].entropy_bits));
  require(runs[1].entropy_bits >= 1.55,
          "two memory states should buy one three-way branch, got " +
              fmt(runs[1].entropy_bits));

  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> states(2, 4), actions(2, 3), obs(2, 3);
  for (int i = 0; i < 10; ++i) {
    const Pomdp m =
        oracles::random_pomdp(rng, states(rng), actions(rng), obs(rng));
    SynthesisConfig rc;
    rc.beta = 0.9;
    rc.restarts = 3;
    rc.max_iterations = 60;
    rc.seed = derive_seed(7, static_cast<std::uint64_t>(i));
    const auto sweep = memory_sweep(m, {1, 2, 3}, rc, -1.0);
    require(sweep.size() == 3,
            "instance " + std::to_string(i) + ": sweep stopped early");
    for (std::size_t j = 1; j < sweep.size(); ++j) {
      require(sweep[j].entropy_bits >= sweep[j - 1].entropy_bits,
              "instance " + std::to_string(i) + ": entropy fell from k=" +
                  std::to_string(j) + " to k=" + std::to_string(j + 1));
    }
  }
}

void check_horizon_reduction() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> states(2, 4), actions(1, 3), obs(1, 3),
      memory(1, 2), horizon(2, 5);
  for (int i = 0; i < 5; ++i) {
    const Pomdp m =
        oracles::random_pomdp(rng, states(rng), actions(rng), obs(rng));
    const int k = memory(rng);
    const FscStructure structure = chain_memory_structure(k);
    const Instantiation u =
        random_instantiation(k, m.num_observations(), m.num_actions(), rng);
    const int N = horizon(rng);

    const MarkovChain direct = instantiate(build_pmc(m, structure), u);
    const double want_entropy = finite_horizon_entropy(direct, N);
    const double want_reward = finite_horizon_reward(direct, N);

    const Pomdp reduced = reduce_finite_horizon(m, N);
    Instantiation lifted = u;
    const std::vector<double> extra(
        m.num_actions(), 1.0 / m.num_actions());
    for (auto& per_obs : lifted.gamma) per_obs.push_back(extra);
    const EvaluationResult ev =
        evaluate(instantiate(build_pmc(reduced, structure), lifted), 1.0);

    require(std::abs(ev.total_entropy - want_entropy) <= 1e-9,
            "instance " + std::to_string(i) + ": reduced entropy " +
                fmt(ev.total_entropy) + " vs direct " + fmt(want_entropy));
    require(std::abs(ev.total_reward - want_reward) <= 1e-9,
            "instance " + std::to_string(i) + ": reduced reward " +
                fmt(ev.total_reward) + " vs direct " + fmt(want_reward));
  }
}

void check_evaluator_agreement() {
  std::mt19937_64 rng(9090);
  std::uniform_int_distribution<int> states(3, 5), actions(2, 3), obs(2, 3);
  const double beta = 0.9;
  for (int i = 0; i < 3; ++i) {
    const Pomdp m =
        oracles::random_pomdp(rng, states(rng), actions(rng), obs(rng));
    const int k = 1 + (i % 2);
    const InducedPmc pmc = build_pmc(m, chain_memory_structure(k));
    const MarkovChain chain = instantiate(
        pmc,
        random_instantiation(k, m.num_observations(), m.num_actions(), rng));
    const EvaluationResult exact = evaluate(chain, beta);

    const auto series = oracles::series_values(chain, beta, 10000);
    require(std::abs(series.entropy_bits - exact.total_entropy) <= 1e-8,
            "chain " + std::to_string(i) + ": series entropy " +
                fmt(series.entropy_bits) + " vs solve " +
                fmt(exact.total_entropy));
    require(std::abs(series.reward - exact.total_reward) <= 1e-8,
            "chain " + std::to_string(i) + ": series reward " +
                fmt(series.reward) + " vs solve " + fmt(exact.total_reward));

    const SimulationResult sim = simulate_discounted(
        chain, beta, 100000, derive_seed(51, static_cast<std::uint64_t>(i)));
    require(std::abs(sim.entropy_bits - exact.total_entropy) <=
                3.0 * sim.entropy_se + 1e-12,
            "chain " + std::to_string(i) + ": sampled entropy " +
                fmt(sim.entropy_bits) + " strays beyond three errors from " +
                fmt(exact.total_entropy));
    require(std::abs(sim.mean_reward - exact.total_reward) <=
                3.0 * sim.reward_se + 1e-12,
            "chain " + std::to_string(i) + ": sampled reward " +
                fmt(sim.mean_reward) + " strays beyond three errors from " +
                fmt(exact.total_reward));
  }
}

// A memoryless controller over the reduced grid4's 10 observations: step
// into the target whenever it is adjacent, otherwise drift right/down.
// Reaches the target with probability > 0.996 within 16 stages, so it is a
// feasible start at every sweep point below.
Instantiation grid4_greedy_extra() {
  Instantiation greedy;
  greedy.gamma.assign(
      1, std::vector<std::vector<double>>(10, std::vector<double>(4, 0.0)));
  auto& g = greedy.gamma[0];
  g[0][0] = 1.0;  // target to the left  -> left
  g[1][1] = 1.0;  // target to the right -> right
  g[2][2] = 1.0;  // target above        -> up
  g[3][3] = 1.0;  // target below        -> down
  for (int z = 4; z < 9; ++z) {
    g[z][1] = 0.5;  // right
    g[z][3] = 0.5;  // down
  }
  for (int a = 0; a < 4; ++a) g[9][a] = 0.25;  // reduction sink, irrelevant
  return greedy;
}

void check_grid_trends() {
  const Pomdp grid = builtin_model("grid4");
  const Instantiation greedy = grid4_greedy_extra();
  // Random starts frequently settle in infeasible local optima on this
  // model, so every point gets the greedy controller (and the neighboring
  // point's winner) as warm starts; the budget below is enough for the CCP
  // to refine a feasible start to a stable value.
  SynthesisConfig base;
  base.beta = 1.0;
  base.restarts = 3;
  base.epsilon = 1e-3;
  base.max_iterations = 80;

  // Longer horizons strictly help at a fixed threshold.
  std::vector<double> by_horizon;
  {
    SynthesisConfig cfg = base;
    cfg.gamma_threshold = 0.9;
    cfg.seed = 2024;
    std::optional<Instantiation> carried;
    std::ostringstream values;
    for (int T = 16; T <= 30; T += 2) {
      const InducedPmc pmc = build_pmc(reduce_finite_horizon(grid, T),
                                       chain_memory_structure(1));
      std::vector<Instantiation> extras{greedy};
      if (carried) extras.push_back(*carried);
      const SynthesisResult res = synth_with_restarts(pmc, cfg, extras);
      require(res.reward >= 0.9 - 1e-6,
              "T=" + std::to_string(T) + " missed the reward threshold");
      if (!by_horizon.empty()) {
        require(res.entropy_bits > by_horizon.back(),
                "entropy did not strictly increase at T=" + std::to_string(T) +
                    " (" + fmt(res.entropy_bits) + " after " +
                    fmt(by_horizon.back()) + ")");
      }
      by_horizon.push_back(res.entropy_bits);
      carried = res.instantiation;
      values << (T > 16 ? ", " : "") << "T=" << T << ": "
             << fmt(res.entropy_bits);
    }
    info("horizon sweep (bits): " + values.str());
    const double reference = 9.7008;  // not binding, reported for context
    info("T=16 entropy " + fmt(by_horizon.front()) + " bits; reference " +
         fmt(reference) + ", deviation " +
         fmt(100.0 * std::abs(by_horizon.front() - reference) / reference) +
         "%");
  }

  // Tighter thresholds only cost entropy at a fixed horizon, flattening out
  // where the constraint stops binding.
  {
    const InducedPmc pmc = build_pmc(reduce_finite_horizon(grid, 20),
                                     chain_memory_structure(1));
    std::vector<double> thresholds{0.5,  0.55, 0.6,  0.65, 0.7, 0.75,
                                   0.8,  0.85, 0.9,  0.95, 0.975};
    std::vector<double> entropy(thresholds.size(), 0.0);
    SynthesisConfig cfg = base;
    cfg.seed = 2025;
    std::optional<Instantiation> carried;
    for (std::size_t idx = thresholds.size(); idx-- > 0;) {
      cfg.gamma_threshold = thresholds[idx];
      std::vector<Instantiation> extras{greedy};
      if (carried) extras.push_back(*carried);
      const SynthesisResult res = synth_with_restarts(pmc, cfg, extras);
      require(res.reward >= thresholds[idx] - 1e-6,
              "threshold " + fmt(thresholds[idx]) + " was not met");
      entropy[idx] = res.entropy_bits;
      carried = res.instantiation;
    }
    std::ostringstream values;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      values << (i ? ", " : "") << fmt(thresholds[i]) << ": "
             << fmt(entropy[i]);
      if (i > 0) {
        require(entropy[i] <= entropy[i - 1] + 1e-9,
                "entropy rose with the threshold at " + fmt(thresholds[i]));
      }
    }
    info("threshold sweep at T=20 (bits): " + values.str());
    require(entropy[0] - entropy[1] <= 0.01 * entropy[0],
            "no plateau at loose thresholds: " + fmt(entropy[0]) + " then " +
                fmt(entropy[1]));
  }
}

// A memoryless controller over the four-room observations whose every path
// is a shortest (12-step) route to the target, splitting 50/50 between the
// two doors out of the start room. The observation partition of each room
// is a 3x3 sign grid around that room's two door axes, which is exactly
// enough to express it. The assignment is symmetric under the model's
// anti-diagonal reflection, so it starts the optimizer in the balanced
// basin; its reward is beta^11 ~ 0.314, comfortably above beta^12.
Instantiation fourroom_split_extra() {
  Instantiation u;
  u.gamma.assign(
      1, std::vector<std::vector<double>>(36, std::vector<double>(4, 0.0)));
  auto& g = u.gamma[0];
  constexpr int kLeft = 0, kRight = 1, kUp = 2, kDown = 3;
  // Observation index: room*9 + row_rel*3 + col_rel, where col_rel/row_rel
  // compare the cell against the room's door column/row (0 below, 1 on,
  // 2 above) and rooms are numbered 0 SW, 1 NW (start), 2 NE, 3 SE (target).
  const auto set = [&](int room, int row_rel, int col_rel,
                       std::initializer_list<int> actions) {
    const int z = room * 9 + row_rel * 3 + col_rel;
    for (int a : actions) g[z][a] = 1.0 / static_cast<double>(actions.size());
  };
  // Start room: funnel to the junction cell on both door axes, split there,
  // then follow the axis corridors; off-axis cells drift right/down.
  for (int row_rel : {0, 2})
    for (int col_rel : {0, 2}) set(1, row_rel, col_rel, {kRight, kDown});
  set(1, 1, 1, {kRight, kDown});  // junction: choose a route
  set(1, 0, 1, {kDown});          // on the door column, below the east axis
  set(1, 2, 1, {kDown});
  set(1, 1, 0, {kRight});         // on the east-door row
  set(1, 1, 2, {kRight});
  // NE room: slide to the door column, then down through the door.
  for (int row_rel : {0, 1, 2}) {
    set(2, row_rel, 0, {kRight});
    set(2, row_rel, 1, {kDown});
    set(2, row_rel, 2, {kLeft});
  }
  // SW room: mirror image, slide to the door row, then right.
  for (int col_rel : {0, 1, 2}) {
    set(0, 2, col_rel, {kDown});
    set(0, 1, col_rel, {kRight});
    set(0, 0, col_rel, {kUp});
  }
  // Target room: its door axes intersect at the target itself.
  set(3, 0, 0, {kRight, kUp});
  set(3, 0, 1, {kUp});
  set(3, 0, 2, {kLeft, kUp});
  set(3, 1, 0, {kRight});
  set(3, 2, 0, {kRight, kDown});
  set(3, 2, 1, {kDown});
  set(3, 2, 2, {kLeft, kDown});
  set(3, 1, 2, {kLeft});
  set(3, 1, 1, {kLeft, kRight, kUp, kDown});  // absorbing target
  return u;
}

void check_fourroom_doors() {
  const Pomdp room = builtin_model("fourroom10");
  const double beta = 0.9;
  const double threshold = std::pow(beta, 12);
  const InducedPmc pmc = build_pmc(room, chain_memory_structure(1));

  SynthesisConfig cfg;
  cfg.beta = beta;
  cfg.gamma_threshold = threshold;
  cfg.restarts = 5;
  cfg.seed = 1234;
  cfg.epsilon = 1e-3;
  cfg.max_iterations = 120;
  const SynthesisResult best =
      synth_with_restarts(pmc, cfg, {fourroom_split_extra()});
  require(best.reward >= threshold - 1e-6, "the reward threshold was missed");

  const OccupancyTable occ =
      occupancy_discounted(instantiate(pmc, best.instantiation), beta);
  const std::vector<double> visits = marginalize_memory(pmc, occ.visits);
  const auto occupancy_of = [&](const std::string& name) {
    const auto it = std::find(room.states.begin(), room.states.end(), name);
    require(it != room.states.end(), "state " + name + " is missing");
    return visits[static_cast<std::size_t>(it - room.states.begin())];
  };
  const double east_door = occupancy_of("c5r8") + occupancy_of("c6r8");
  const double south_door = occupancy_of("c3r6") + occupancy_of("c3r5");
  info("door occupancy: east " + fmt(east_door) + ", south " +
       fmt(south_door) + " (entropy " + fmt(best.entropy_bits) + " bits)");
  require(std::abs(east_door - south_door) <= 0.1,
          "the optimal controller favors one door: east " + fmt(east_door) +
              " vs south " + fmt(south_door));

  SynthesisConfig feas_cfg = cfg;
  feas_cfg.restarts = 3;
  const SynthesisResult baseline = synth_feasibility(pmc, feas_cfg);
  require(baseline.feasible, "the feasibility baseline found no controller");
  info("feasibility baseline entropy " + fmt(baseline.entropy_bits) +
       " bits, reward " + fmt(baseline.reward));
  require(baseline.entropy_bits < best.entropy_bits,
          "the baseline is not below the optimized controller (" +
              fmt(baseline.entropy_bits) + " vs " + fmt(best.entropy_bits) +
              ")");
}

void check_surrogate_bounds() {
  std::mt19937_64 rng(271828);
  std::uniform_real_distribution<double> coeff(0.0, 1.0), point(-2.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const double c = coeff(rng);
    const double x = point(rng), y = point(rng);
    const double xhat = point(rng), yhat = point(rng);
    require(std::abs(dc_replacement(c, x, y, x, y) - c * (x * y)) <= 1e-12,
            "the surrogate is not tight at its expansion point");
    require(dc_replacement(c, x, y, xhat, yhat) <= c * (x * y),
            "the surrogate overshoots the bilinear term");
  }
}

void expect_parse_error(const std::string& text, int line, int column,
                        const std::string& what_contains) {
  try {
    (void)parse_pomdp(text);
  } catch (const ParseError& e) {
    require(e.line() == line && e.column() == column,
            "expected the error at " + std::to_string(line) + ":" +
                std::to_string(column) + ", got " + std::to_string(e.line()) +
                ":" + std::to_string(e.column()));
    require(std::string(e.what()).find(what_contains) != std::string::npos,
            std::string("error message lacks '") + what_contains + "': " +
                e.what());
    return;
  }
  throw std::runtime_error("a malformed file was accepted");
}

void check_format_roundtrip() {
  for (const auto& name : builtin_names()) {
    const Pomdp m = builtin_model(name);
    require(parse_pomdp(serialize_pomdp(m)) == m,
            name + " does not round-trip");
  }
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<int> states(1, 6), actions(1, 4), obs(1, 4);
  for (int i = 0; i < 100; ++i) {
    const Pomdp m =
        oracles::random_pomdp(rng, states(rng), actions(rng), obs(rng));
    require(parse_pomdp(serialize_pomdp(m)) == m,
            "random model " + std::to_string(i) + " does not round-trip");
  }

  const std::string header =
      "states: s0 s1\n"
      "actions: a\n"
      "observations: z\n"
      "start: s0\n";
  expect_parse_error("bogus: 1\n", 1, 1, "bogus");
  expect_parse_error(header + "T: a : s0 : s9 1\n", 5, 13, "s9");
  expect_parse_error(header +
                         "T: a : s0 : s1 0.5\n"
                         "T: a : s0 : s1 0.5\n",
                     6, 13, "duplicate");
  expect_parse_error(header + "T: a : s0 : s1 x\n", 5, 16, "x");
  expect_parse_error("states: a\nactions: b\nobservations: z\n", 4, 1,
                     "start");
}

}  // namespace

int main() {
  check("fig5 threshold sweep matches the reference coordinates",
        check_fig5_sweep);
  check("fig5 endpoints match an exhaustive grid search",
        check_fig5_endpoints);
  check("the fully observable bound dominates synthesized controllers",
        check_bound_dominates);
  check("product-chain entropy equals brute-force joint state entropy",
        check_brute_force_entropy);
  check("memory sweeps never lose entropy", check_memory_sweeps);
  check("the horizon reduction preserves finite-horizon values",
        check_horizon_reduction);
  check("evaluators agree: linear solve, series, simulation",
        check_evaluator_agreement);
  check("grid4 trends: entropy grows with horizon, falls with the threshold",
        check_grid_trends);
  check("fourroom10 splits its door usage and beats the feasibility baseline",
        check_fourroom_doors);
  check("the bilinear surrogate is tight and never overshoots",
        check_surrogate_bounds);
  check("the model format round-trips and positions its errors",
        check_format_roundtrip);

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criteria failed\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
