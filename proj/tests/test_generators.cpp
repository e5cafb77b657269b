#include <doctest.h>

#include <set>

#include "entromax/generators.hpp"
#include "entromax/model.hpp"

using namespace entromax;

namespace {

int state_index(const Pomdp& m, const std::string& name) {
  for (int s = 0; s < m.num_states(); ++s)
    if (m.states[s] == name) return s;
  FAIL("no state named " << name);
  return -1;
}

bool is_absorbing(const Pomdp& m, int s) {
  for (int a = 0; a < m.num_actions(); ++a)
    if (m.transition[s][a][s] != 1.0) return false;
  return true;
}

}  // namespace

TEST_CASE("all builtins validate") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    CHECK(validate_pomdp(builtin_model(name)).ok());
  }
}

TEST_CASE("unknown builtin names are rejected") {
  CHECK_THROWS_AS((void)builtin_model("fig6"), ValidationError);
}

TEST_CASE("fig5 is the six-state branching example") {
  const Pomdp m = builtin_model("fig5");
  CHECK(m.num_states() == 6);
  CHECK(m.num_actions() == 2);
  CHECK(m.num_observations() == 1);
  CHECK(m.states[m.initial] == "sI");

  // The initial state fans into the two middle states, which fan into the
  // absorbing leaves; both middles share the rewarding action.
  const int s2 = state_index(m, "s2"), s3 = state_index(m, "s3");
  const int s4 = state_index(m, "s4"), s5 = state_index(m, "s5");
  const int s6 = state_index(m, "s6");
  CHECK(m.transition[m.initial][0][s2] == 1.0);
  CHECK(m.transition[m.initial][1][s3] == 1.0);
  CHECK(m.transition[s2][0][s5] == 1.0);
  CHECK(m.transition[s2][1][s4] == 1.0);
  CHECK(m.transition[s3][0][s5] == 1.0);
  CHECK(m.transition[s3][1][s6] == 1.0);
  for (int leaf : {s4, s5, s6}) {
    CHECK(is_absorbing(m, leaf));
    CHECK(m.reward[leaf][0] == 0.0);
    CHECK(m.reward[leaf][1] == 0.0);
  }
  CHECK(m.reward[s2][0] == 1.0);
  CHECK(m.reward[s3][0] == 1.0);
  CHECK(m.reward[s2][1] == 0.0);
  CHECK(m.reward[m.initial][0] == 0.0);
}

TEST_CASE("fig7 is five columns of three with action-selected rows") {
  const Pomdp m = builtin_model("fig7");
  CHECK(m.num_states() == 15);
  CHECK(m.num_actions() == 3);
  CHECK(m.num_observations() == 1);

  // Action a picks row a of the next column; the last column is absorbing,
  // so the model tolerates an undiscounted objective as-is.
  const int s4 = state_index(m, "s4");  // column 2 top
  CHECK(m.transition[m.initial][0][s4] == 1.0);
  for (const char* name : {"s13", "s14", "s15"})
    CHECK(is_absorbing(m, state_index(m, name)));

  // Only the fourth column pays, and only on the middle action.
  double total_reward = 0.0;
  for (int s = 0; s < 15; ++s)
    for (int a = 0; a < 3; ++a) total_reward += m.reward[s][a];
  CHECK(total_reward == 3.0);
  for (const char* name : {"s10", "s11", "s12"}) {
    const int s = state_index(m, name);
    CHECK(m.reward[s][1] == 1.0);
    CHECK(m.reward[s][0] == 0.0);
  }

  // The two outer first-column states exist but nothing reaches them.
  const int s2 = state_index(m, "s2"), s3 = state_index(m, "s3");
  for (int s = 0; s < 15; ++s)
    for (int a = 0; a < 3; ++a) {
      CHECK(m.transition[s][a][s2] == 0.0);
      CHECK(m.transition[s][a][s3] == 0.0);
    }
}

TEST_CASE("grid4 wires the slip model and the target-adjacent rewards") {
  const Pomdp m = builtin_model("grid4");
  CHECK(m.num_states() == 16);
  CHECK(m.num_actions() == 4);
  CHECK(m.num_observations() == 9);
  CHECK(m.states[m.initial] == "c1r4");

  const int target = state_index(m, "c4r1");
  CHECK(is_absorbing(m, target));
  for (const char* err : {"c1r1", "c4r4"})
    CHECK_FALSE(is_absorbing(m, state_index(m, err)));

  // Moving right from c3r1 slips: intended, two lateral, backwards.
  const GridSpec spec = grid4_spec();
  const int c3r1 = state_index(m, "c3r1");
  CHECK(m.transition[c3r1][kGridRight][target] ==
        doctest::Approx(0.95 - spec.epsilon / 3).epsilon(1e-12));
  CHECK(m.transition[c3r1][kGridRight][state_index(m, "c2r1")] ==
        doctest::Approx(spec.epsilon).epsilon(1e-12));
  // Lateral slips: up goes to c3r2, down is off-grid and folds back.
  CHECK(m.transition[c3r1][kGridRight][state_index(m, "c3r2")] ==
        doctest::Approx(0.025 - spec.epsilon / 3).epsilon(1e-12));
  CHECK(m.transition[c3r1][kGridRight][c3r1] ==
        doctest::Approx(0.025 - spec.epsilon / 3).epsilon(1e-12));

  // Rewards sit exactly on the two cells beside the target and equal the
  // chance that the listed action enters it.
  double reward_mass = 0.0;
  for (int s = 0; s < 16; ++s)
    for (int a = 0; a < 4; ++a) {
      if (m.reward[s][a] != 0.0) {
        CHECK((m.states[s] == "c3r1" || m.states[s] == "c4r2"));
        CHECK(m.reward[s][a] == doctest::Approx(m.transition[s][a][target])
                                    .epsilon(1e-12));
      }
      reward_mass += m.reward[s][a];
    }
  CHECK(reward_mass == doctest::Approx(2 * (0.95 + 0.025 - 2 * spec.epsilon / 3 +
                                            spec.epsilon))
                           .epsilon(1e-12));
}

TEST_CASE("grid4 observations flag the adjacent special cell") {
  const Pomdp m = builtin_model("grid4");
  auto obs_of = [&](const std::string& name) {
    const int s = state_index(m, name);
    for (int z = 0; z < m.num_observations(); ++z)
      if (m.observe[s][z] == 1.0) return m.observations[z];
    return std::string("none?");
  };
  CHECK(obs_of("c3r1") == "target_right");
  CHECK(obs_of("c4r2") == "target_below");
  CHECK(obs_of("c2r1") == "error_left");
  CHECK(obs_of("c4r3") == "error_above");
  CHECK(obs_of("c2r2") == "none");
  // Target itself sees nothing special next door (both neighbours plain).
  CHECK(obs_of("c2r3") == "none");
}

TEST_CASE("fourroom10 has four rooms, four doors, and entry rewards") {
  const Pomdp m = builtin_model("fourroom10");
  CHECK(m.num_states() == 100);
  CHECK(m.num_actions() == 4);
  CHECK(m.num_observations() == 36);
  CHECK(m.states[m.initial] == "c2r9");

  const int target = state_index(m, "c8r3");
  CHECK(is_absorbing(m, target));

  // Deterministic moves: rows are point masses.
  for (int s = 0; s < 100; ++s)
    for (int a = 0; a < 4; ++a) {
      int support = 0;
      for (int s2 = 0; s2 < 100; ++s2)
        if (m.transition[s][a][s2] != 0.0) {
          ++support;
          CHECK(m.transition[s][a][s2] == 1.0);
        }
      CHECK(support == 1);
    }

  // Walls block all crossings except the four door cells.
  auto crossing = [&](const std::string& from, int action,
                      const std::string& to) {
    return m.transition[state_index(m, from)][action][state_index(m, to)] ==
           1.0;
  };
  CHECK(crossing("c5r8", kGridRight, "c6r8"));   // north door
  CHECK(crossing("c5r3", kGridRight, "c6r3"));   // south door
  CHECK(crossing("c3r6", kGridDown, "c3r5"));    // west door
  CHECK(crossing("c8r6", kGridDown, "c8r5"));    // east door
  CHECK_FALSE(crossing("c5r9", kGridRight, "c6r9"));
  CHECK_FALSE(crossing("c4r6", kGridDown, "c4r5"));

  // Entering the target pays 1 (deterministic moves), from any side.
  CHECK(m.reward[state_index(m, "c7r3")][kGridRight] == 1.0);
  CHECK(m.reward[state_index(m, "c8r4")][kGridDown] == 1.0);
  CHECK(m.reward[state_index(m, "c7r3")][kGridLeft] == 0.0);
  CHECK(m.reward[target][kGridRight] == 0.0);
}

TEST_CASE("gridworld specs are sanity-checked") {
  GridSpec spec = grid4_spec();
  SUBCASE("initial outside") {
    spec.initial = {0, 1};
    CHECK_THROWS_AS((void)gen_gridworld(spec, GridObservationMode::relative9),
                    ValidationError);
  }
  SUBCASE("non-adjacent wall") {
    spec.walls.push_back({{1, 1}, {3, 1}});
    CHECK_THROWS_AS((void)gen_gridworld(spec, GridObservationMode::relative9),
                    ValidationError);
  }
  SUBCASE("slip mass must stay a distribution") {
    spec.epsilon = 0.08;
    CHECK_THROWS_AS((void)gen_gridworld(spec, GridObservationMode::relative9),
                    ValidationError);
  }
  SUBCASE("four-room observations need even dimensions") {
    GridSpec odd = fourroom10_spec();
    odd.width = 9;
    odd.initial = {2, 9};
    CHECK_THROWS_AS((void)gen_gridworld(odd, GridObservationMode::fourroom36),
                    ValidationError);
  }
}

TEST_CASE("walls block movement from both sides") {
  GridSpec spec;
  spec.width = 2;
  spec.height = 1;
  spec.deterministic_moves = true;
  spec.initial = {1, 1};
  spec.target = {2, 1};
  spec.walls = {{{1, 1}, {2, 1}}};
  const Pomdp m = gen_gridworld(spec, GridObservationMode::relative9);
  CHECK(m.transition[0][kGridRight][0] == 1.0);
  CHECK(m.transition[1][kGridLeft][1] == 1.0);
}
