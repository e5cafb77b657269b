#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "entromax/common.hpp"
#include "entromax/evaluation.hpp"
#include "entromax/fsc.hpp"
#include "entromax/generators.hpp"
#include "entromax/model.hpp"
#include "entromax/pmc.hpp"
#include "entromax/synthesis.hpp"
#include "oracles.hpp"

using namespace entromax;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

InducedPmc fig5_pmc(int k) {
  return build_pmc(reduce_finite_horizon(builtin_model("fig5"), 3),
                   chain_memory_structure(k));
}

SynthesisConfig base_config() {
  SynthesisConfig cfg;
  cfg.beta = 1.0;
  cfg.seed = 20240904;
  cfg.restarts = 6;
  return cfg;
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

Pomdp one_state_loop() {
  Pomdp m;
  m.states = {"s"};
  m.actions = {"stay"};
  m.observations = {"z"};
  m.initial = 0;
  m.transition = {{{1.0}}};
  m.observe = {{1.0}};
  m.reward = {{0.0}};
  return m;
}

}  // namespace

TEST_CASE("fig5 endpoints reach the known optima") {
  const InducedPmc pmc = fig5_pmc(2);

  SynthesisConfig cfg = base_config();
  cfg.gamma_threshold = 0.5;
  const SynthesisResult loose = synth_with_restarts(pmc, cfg);
  CHECK(loose.feasible);
  CHECK(loose.reward >= 0.5 - 1e-6);
  CHECK(loose.entropy_bits == doctest::Approx(2.0).epsilon(0.025));

  cfg.gamma_threshold = 1.0;
  const SynthesisResult tight = synth_with_restarts(pmc, cfg);
  CHECK(tight.feasible);
  CHECK(tight.reward >= 1.0 - 1e-6);
  CHECK(tight.entropy_bits == doctest::Approx(1.0).epsilon(0.05));

  // Interior threshold: one full bit at the first branch plus the binary
  // entropy the reward constraint leaves for the second.
  cfg.gamma_threshold = 0.8;
  const SynthesisResult mid = synth_with_restarts(pmc, cfg);
  CHECK(mid.feasible);
  CHECK(mid.reward >= 0.8 - 1e-6);
  CHECK(mid.entropy_bits ==
        doctest::Approx(1.0 + binary_entropy(0.8)).epsilon(0.05));

  SUBCASE("the trace records the penalty schedule") {
    REQUIRE(!loose.trace.empty());
    CHECK(loose.iterations == static_cast<int>(loose.trace.size()));
    for (std::size_t i = 0; i < loose.trace.size(); ++i) {
      CHECK(loose.trace[i].iteration == static_cast<int>(i) + 1);
      if (i > 0) CHECK(loose.trace[i].tau >= loose.trace[i - 1].tau);
    }
    CHECK(loose.seed == derive_seed(cfg.seed, loose.restart_index));
    CHECK(loose.structure.k == 2);
  }
}

TEST_CASE("one restart is exactly one penalty run") {
  const InducedPmc pmc = fig5_pmc(2);
  SynthesisConfig cfg = base_config();
  cfg.gamma_threshold = 0.7;
  cfg.restarts = 1;

  const SynthesisResult via_restarts = synth_with_restarts(pmc, cfg);

  std::mt19937_64 rng(derive_seed(cfg.seed, 0));
  const Instantiation u0 = random_instantiation(
      pmc.k(), pmc.num_observations, pmc.num_actions, rng);
  const SynthesisResult direct = penalty_ccp(pmc, cfg, u0);

  CHECK(via_restarts.entropy_bits == direct.entropy_bits);
  CHECK(via_restarts.reward == direct.reward);
  CHECK(via_restarts.instantiation.gamma == direct.instantiation.gamma);
  CHECK(via_restarts.restart_index == 0);
  CHECK(via_restarts.seed == derive_seed(cfg.seed, 0));
}

TEST_CASE("an impossible threshold fails every restart") {
  const InducedPmc pmc = fig5_pmc(2);
  SynthesisConfig cfg = base_config();
  cfg.gamma_threshold = 2.0;  // total reward cannot exceed 1
  cfg.restarts = 2;
  cfg.max_iterations = 25;
  CHECK_THROWS_AS((void)synth_with_restarts(pmc, cfg), AllRestartsFailed);
}

TEST_CASE("the feasibility variant finds a point but not the optimum") {
  const InducedPmc pmc = fig5_pmc(2);
  SynthesisConfig cfg = base_config();
  cfg.gamma_threshold = 0.9;

  const SynthesisResult feas = synth_feasibility(pmc, cfg);
  CHECK(feas.feasible);
  CHECK(feas.reward >= 0.9 - 1e-6);

  const SynthesisResult maxent = synth_with_restarts(pmc, cfg);
  CHECK(feas.entropy_bits <= maxent.entropy_bits + 1e-6);

  CHECK_THROWS_AS((void)synth_feasibility(fig5_pmc(1), base_config()),
                  ValidationError);  // needs a finite threshold
}

TEST_CASE("memory buys entropy one observation at a time") {
  const Pomdp m = builtin_model("fig7");
  SynthesisConfig cfg = base_config();
  cfg.gamma_threshold = 1.0;
  cfg.restarts = 4;

  const auto runs = memory_sweep(m, {1, 2, 3}, cfg, -1.0);
  REQUIRE(runs.size() == 3);
  const double log2_3 = std::log2(3.0);
  CHECK(runs[0].structure.k == 1);
  CHECK(runs[1].structure.k == 2);
  CHECK(runs[2].structure.k == 3);
  CHECK(std::abs(runs[0].entropy_bits) <= 1e-6);
  CHECK(runs[1].entropy_bits == doctest::Approx(log2_3).epsilon(0.04));
  CHECK(runs[2].entropy_bits == doctest::Approx(2 * log2_3).epsilon(0.04));
  for (const auto& r : runs) CHECK(r.reward >= 1.0 - 1e-6);
  CHECK(runs[0].entropy_bits <= runs[1].entropy_bits);
  CHECK(runs[1].entropy_bits <= runs[2].entropy_bits);
}

TEST_CASE("sweeps reject malformed memory ranges") {
  SynthesisConfig cfg = base_config();
  CHECK_THROWS_AS((void)memory_sweep(builtin_model("fig5"), {}, cfg, -1.0),
                  ValidationError);
  CHECK_THROWS_AS((void)memory_sweep(builtin_model("fig5"), {2, 1}, cfg, -1.0),
                  ValidationError);
  CHECK_THROWS_AS((void)memory_sweep(builtin_model("fig5"), {0, 1}, cfg, -1.0),
                  ValidationError);
}

TEST_CASE("a sweep with an unreachable threshold reports the failure") {
  SynthesisConfig cfg = base_config();
  cfg.beta = 0.9;
  cfg.gamma_threshold = 5.0;
  cfg.restarts = 2;
  cfg.max_iterations = 20;
  CHECK_THROWS_WITH_AS(
      (void)memory_sweep(builtin_model("fig5"), {1, 2}, cfg, -1.0),
      "no feasible controller at any memory size in the sweep",
      AllRestartsFailed);
}

TEST_CASE("an unconstrained sweep is monotone and labels its sizes") {
  SynthesisConfig cfg = base_config();
  cfg.beta = 0.9;
  cfg.gamma_threshold = -kInf;
  cfg.restarts = 2;
  const auto runs = memory_sweep(builtin_model("fig5"), {1, 2}, cfg, -1.0);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].structure.k == 1);
  CHECK(runs[1].structure.k == 2);
  CHECK(runs[0].entropy_bits <= runs[1].entropy_bits);
}

TEST_CASE("a spent initial state degenerates cleanly") {
  const InducedPmc pmc = build_pmc(one_state_loop(), chain_memory_structure(1));
  SynthesisConfig cfg = base_config();

  const SynthesisResult r = synth_with_restarts(pmc, cfg);
  CHECK(r.feasible);
  CHECK(r.status == SynthesisStatus::ok);
  CHECK(r.entropy_bits == 0.0);
  CHECK(r.reward == 0.0);
  CHECK(r.instantiation.gamma[0][0][0] == 1.0);  // single action, uniform row

  cfg.gamma_threshold = 0.5;
  CHECK_THROWS_AS((void)synth_with_restarts(pmc, cfg), AllRestartsFailed);
}

TEST_CASE("configuration errors are rejected up front") {
  const InducedPmc pmc = fig5_pmc(1);
  SynthesisConfig cfg = base_config();
  cfg.beta = 0.0;
  CHECK_THROWS_AS((void)penalty_ccp(pmc, cfg, uniform_instantiation(1, 7, 2)),
                  ValidationError);
  cfg = base_config();
  cfg.restarts = 0;
  CHECK_THROWS_AS((void)synth_with_restarts(pmc, cfg), ValidationError);
  cfg = base_config();
  cfg.tau0 = 0.0;
  CHECK_THROWS_AS((void)synth_with_restarts(pmc, cfg), ValidationError);
}

TEST_CASE("status names are stable") {
  CHECK(std::string(to_string(SynthesisStatus::ok)) == "ok");
  CHECK(std::string(to_string(SynthesisStatus::slack_positive)) ==
        "slack_positive");
  CHECK(std::string(to_string(SynthesisStatus::iteration_limit)) ==
        "iteration_limit");
  CHECK(std::string(to_string(SynthesisStatus::numerical_failure)) ==
        "numerical_failure");
}
