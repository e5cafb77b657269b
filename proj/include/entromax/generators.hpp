#pragma once

#include <string>
#include <utility>
#include <vector>

#include "entromax/model.hpp"

namespace entromax {

/** Grid cell, 1-based, (1,1) at the bottom-left corner. */
struct Cell {
  int col = 0;
  int row = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Deterministic observation schemes for gen_gridworld.
///  - relative9: 9 observations -- target/error in the adjacent cell
///    (left/right/above/below, target takes priority), or none.
///  - fourroom36: room index crossed with the 3x3 sign partition of the
///    cell's position relative to the room's two door axes (36 total).
enum class GridObservationMode { relative9, fourroom36 };

/// Explicit reward table entry: value paid for taking `action` in `cell`.
struct GridReward {
  Cell cell;
  int action = 0;
  double value = 0.0;
};

/// Grid world description. Motion: the intended move succeeds with
/// probability 0.95 - eps/3, slips to either side with 0.025 - eps/3 each
/// and backwards with eps; with deterministic_moves the intended move
/// succeeds with probability 1. Moves off the grid or into a wall keep the
/// agent in place (the mass folds into a self-loop).
struct GridSpec {
  int width = 0;
  int height = 0;
  double epsilon = 0.0;
  bool deterministic_moves = false;
  Cell initial;
  Cell target;
  bool absorbing_target = true;
  std::vector<Cell> error_cells;
  // Blocked boundaries between adjacent cells (unordered pairs).
  std::vector<std::pair<Cell, Cell>> walls;
  // When set, R(s,a) is the probability that (s,a) enters the target;
  // otherwise the explicit `rewards` table is used (absent entries are 0).
  bool reward_enter_target = false;
  std::vector<GridReward> rewards;
};

// Grid action indices, in declaration order.
inline constexpr int kGridLeft = 0;
inline constexpr int kGridRight = 1;
inline constexpr int kGridUp = 2;
inline constexpr int kGridDown = 3;

/** Six-state two-action branching benchmark with a single observation:
 *  the initial state fans out to two middle states, each of which fans out
 *  to absorbing leaves; taking a1 in a middle state pays reward 1. */
Pomdp gen_fig5();

/** Fifteen-state three-action layered benchmark with a single observation:
 *  five columns of three states; every column-1..3 state fans out to the
 *  top/middle/bottom of the next column under a1/a2/a3, column-4 states
 *  reach the absorbing final column (a2 pays reward 1 and hits the middle
 *  leaf). The published diagram elides most edges; the regular fan above is
 *  the documented reconstruction, and the two column-1 states besides the
 *  initial one are unreachable. */
Pomdp gen_fig7();

Pomdp gen_gridworld(const GridSpec& spec, GridObservationMode mode);

/// 4x4 grid, slip 0.005, start (1,4), absorbing target (4,1), marked error
/// cells (1,1)/(4,4), relative9 observations, six-entry reward table on the
/// two cells adjacent to the target.
GridSpec grid4_spec();

/// 10x10 four-room layout, deterministic moves, start (2,9), absorbing
/// target (8,3), one door per interior wall segment, fourroom36
/// observations, enter-target rewards.
GridSpec fourroom10_spec();

std::vector<std::string> builtin_names();

/// Build a builtin by CLI-facing name (fig5, fig7, grid4, fourroom10).
/// Throws ValidationError for unknown names.
Pomdp builtin_model(const std::string& name);

}  // namespace entromax
