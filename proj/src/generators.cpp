#include "entromax/generators.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <set>

namespace entromax {

namespace {

Pomdp finish(Pomdp m) {
  // All generators emit exact tables; normalized() just validates here.
  return normalized(std::move(m));
}

int index_of(const std::vector<std::string>& ids, const std::string& id) {
  return static_cast<int>(std::find(ids.begin(), ids.end(), id) - ids.begin());
}

}  // namespace

Pomdp gen_fig5() {
  Pomdp m;
  m.states = {"sI", "s2", "s3", "s4", "s5", "s6"};
  m.actions = {"a1", "a2"};
  m.observations = {"z1"};
  m.initial = 0;
  const int S = 6, A = 2;
  m.transition.assign(S, std::vector<std::vector<double>>(
                             A, std::vector<double>(S, 0.0)));
  m.observe.assign(S, std::vector<double>(1, 1.0));
  m.reward.assign(S, std::vector<double>(A, 0.0));
  auto arc = [&](const char* s, const char* a, const char* s2) {
    m.transition[index_of(m.states, s)][index_of(m.actions, a)]
                [index_of(m.states, s2)] = 1.0;
  };
  arc("sI", "a1", "s2");
  arc("sI", "a2", "s3");
  arc("s2", "a1", "s5");
  arc("s2", "a2", "s4");
  arc("s3", "a1", "s5");
  arc("s3", "a2", "s6");
  for (const char* s : {"s4", "s5", "s6"})
    for (const char* a : {"a1", "a2"}) arc(s, a, s);
  m.reward[1][0] = 1.0;  // (s2, a1)
  m.reward[2][0] = 1.0;  // (s3, a1)
  return finish(std::move(m));
}

Pomdp gen_fig7() {
  Pomdp m;
  m.states = {"sI"};
  for (int i = 2; i <= 15; ++i) m.states.push_back("s" + std::to_string(i));
  m.actions = {"a1", "a2", "a3"};
  m.observations = {"z1"};
  m.initial = 0;
  const int S = 15, A = 3;
  m.transition.assign(S, std::vector<std::vector<double>>(
                             A, std::vector<double>(S, 0.0)));
  m.observe.assign(S, std::vector<double>(1, 1.0));
  m.reward.assign(S, std::vector<double>(A, 0.0));
  // Columns, each top/middle/bottom.  Column 1 is {s2, sI, s3}; the
  // remaining columns are consecutive triples s4..s15.
  const std::array<std::array<int, 3>, 5> col = {{
      {index_of(m.states, "s2"), 0, index_of(m.states, "s3")},
      {3, 4, 5},     // s4  s5  s6
      {6, 7, 8},     // s7  s8  s9
      {9, 10, 11},   // s10 s11 s12
      {12, 13, 14},  // s13 s14 s15
  }};
  for (int j = 0; j < 4; ++j)
    for (int pos = 0; pos < 3; ++pos)
      for (int a = 0; a < 3; ++a) m.transition[col[j][pos]][a][col[j + 1][a]] = 1.0;
  for (int pos = 0; pos < 3; ++pos)
    for (int a = 0; a < 3; ++a) m.transition[col[4][pos]][a][col[4][pos]] = 1.0;
  for (int pos = 0; pos < 3; ++pos) m.reward[col[3][pos]][1] = 1.0;  // a2
  return finish(std::move(m));
}

namespace {

struct GridGeometry {
  const GridSpec& spec;
  std::set<std::pair<int, int>> blocked;  // unordered cell-index pairs

  explicit GridGeometry(const GridSpec& s) : spec(s) {
    for (const auto& [a, b] : s.walls) {
      int i = idx(a), j = idx(b);
      blocked.insert({std::min(i, j), std::max(i, j)});
    }
  }
  bool inside(Cell c) const {
    return c.col >= 1 && c.col <= spec.width && c.row >= 1 &&
           c.row <= spec.height;
  }
  int idx(Cell c) const { return (c.row - 1) * spec.width + (c.col - 1); }
  Cell cell(int i) const { return {i % spec.width + 1, i / spec.width + 1}; }
  bool wall_between(Cell a, Cell b) const {
    int i = idx(a), j = idx(b);
    return blocked.count({std::min(i, j), std::max(i, j)}) != 0;
  }
  // Destination of a unit move; off-grid and walled moves stay put.
  Cell step(Cell from, int action) const {
    static constexpr int dc[4] = {-1, 1, 0, 0};
    static constexpr int dr[4] = {0, 0, 1, -1};
    Cell to{from.col + dc[action], from.row + dr[action]};
    if (!inside(to) || wall_between(from, to)) return from;
    return to;
  }
};

void check_grid_spec(const GridSpec& spec) {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  if (spec.width < 1 || spec.height < 1) fail("grid dimensions must be positive");
  if (!spec.deterministic_moves &&
      (spec.epsilon < 0.0 || spec.epsilon >= 0.075))
    fail("slip epsilon must lie in [0, 0.075)");
  GridGeometry g(spec);
  if (!g.inside(spec.initial)) fail("initial cell outside the grid");
  if (!g.inside(spec.target)) fail("target cell outside the grid");
  for (const Cell& c : spec.error_cells)
    if (!g.inside(c)) fail("error cell outside the grid");
  for (const auto& [a, b] : spec.walls) {
    if (!g.inside(a) || !g.inside(b)) fail("wall endpoint outside the grid");
    if (std::abs(a.col - b.col) + std::abs(a.row - b.row) != 1)
      fail("wall must separate two adjacent cells");
  }
  for (const GridReward& r : spec.rewards) {
    if (!g.inside(r.cell)) fail("reward cell outside the grid");
    if (r.action < 0 || r.action > 3) fail("reward action index out of range");
  }
}

// (action, probability) components of one move, before wall folding.
std::vector<std::pair<int, double>> move_components(const GridSpec& spec,
                                                    int action) {
  if (spec.deterministic_moves) return {{action, 1.0}};
  const double p_move = 0.95 - spec.epsilon / 3.0;
  const double p_side = 0.025 - spec.epsilon / 3.0;
  static constexpr int lat1[4] = {kGridUp, kGridUp, kGridLeft, kGridLeft};
  static constexpr int lat2[4] = {kGridDown, kGridDown, kGridRight, kGridRight};
  static constexpr int back[4] = {kGridRight, kGridLeft, kGridDown, kGridUp};
  return {{action, p_move},
          {lat1[action], p_side},
          {lat2[action], p_side},
          {back[action], spec.epsilon}};
}

std::vector<std::string> relative9_ids() {
  std::vector<std::string> ids;
  for (const char* what : {"target", "error"})
    for (const char* where : {"left", "right", "above", "below"})
      ids.push_back(std::string(what) + "_" + where);
  ids.push_back("none");
  return ids;
}

int relative9_obs(const GridGeometry& g, Cell c) {
  // The adjacent special cell, target before error, left/right/above/below.
  const Cell neighbors[4] = {{c.col - 1, c.row},
                             {c.col + 1, c.row},
                             {c.col, c.row + 1},
                             {c.col, c.row - 1}};
  for (int d = 0; d < 4; ++d)
    if (g.inside(neighbors[d]) && neighbors[d] == g.spec.target) return d;
  for (int d = 0; d < 4; ++d)
    if (g.inside(neighbors[d]) &&
        std::find(g.spec.error_cells.begin(), g.spec.error_cells.end(),
                  neighbors[d]) != g.spec.error_cells.end())
      return 4 + d;
  return 8;
}

struct FourRoomPartition {
  int door_col[4];  // per room: column of the door on its horizontal wall
  int door_row[4];  // per room: row of the door on its vertical wall
  int half_w = 0, half_h = 0;

  int room_of(Cell c) const {
    const bool west = c.col <= half_w, south = c.row <= half_h;
    if (west && south) return 0;
    if (west) return 1;
    if (!south) return 2;
    return 3;
  }
};

FourRoomPartition fourroom_partition(const GridGeometry& g) {
  const GridSpec& spec = g.spec;
  if (spec.width % 2 != 0 || spec.height % 2 != 0)
    throw ValidationError(
        "fourroom36 observations require even grid dimensions");
  FourRoomPartition p;
  p.half_w = spec.width / 2;
  p.half_h = spec.height / 2;
  // One gap per interior wall segment; the gap's coordinate is the door
  // axis for both rooms the segment borders.
  auto vertical_gap = [&](int row_lo, int row_hi) {
    int gap = 0;
    for (int r = row_lo; r <= row_hi; ++r)
      if (!g.wall_between({p.half_w, r}, {p.half_w + 1, r})) {
        if (gap != 0)
          throw ValidationError("fourroom36 requires one door per wall segment");
        gap = r;
      }
    if (gap == 0)
      throw ValidationError("fourroom36 requires one door per wall segment");
    return gap;
  };
  auto horizontal_gap = [&](int col_lo, int col_hi) {
    int gap = 0;
    for (int c = col_lo; c <= col_hi; ++c)
      if (!g.wall_between({c, p.half_h}, {c, p.half_h + 1})) {
        if (gap != 0)
          throw ValidationError("fourroom36 requires one door per wall segment");
        gap = c;
      }
    if (gap == 0)
      throw ValidationError("fourroom36 requires one door per wall segment");
    return gap;
  };
  const int south_door_row = vertical_gap(1, p.half_h);
  const int north_door_row = vertical_gap(p.half_h + 1, spec.height);
  const int west_door_col = horizontal_gap(1, p.half_w);
  const int east_door_col = horizontal_gap(p.half_w + 1, spec.width);
  p.door_col[0] = west_door_col;
  p.door_row[0] = south_door_row;
  p.door_col[1] = west_door_col;
  p.door_row[1] = north_door_row;
  p.door_col[2] = east_door_col;
  p.door_row[2] = north_door_row;
  p.door_col[3] = east_door_col;
  p.door_row[3] = south_door_row;
  return p;
}

std::vector<std::string> fourroom36_ids() {
  std::vector<std::string> ids;
  for (int room = 1; room <= 4; ++room)
    for (const char* rr : {"below", "level", "above"})
      for (const char* cr : {"left", "center", "right"})
        ids.push_back("room" + std::to_string(room) + "_" + cr + "_" + rr);
  return ids;
}

int fourroom36_obs(const FourRoomPartition& p, Cell c) {
  const int room = p.room_of(c);
  const int col_rel = c.col < p.door_col[room] ? 0
                      : c.col == p.door_col[room] ? 1
                                                  : 2;
  const int row_rel = c.row < p.door_row[room] ? 0
                      : c.row == p.door_row[room] ? 1
                                                  : 2;
  return room * 9 + row_rel * 3 + col_rel;
}

}  // namespace

Pomdp gen_gridworld(const GridSpec& spec, GridObservationMode mode) {
  check_grid_spec(spec);
  GridGeometry g(spec);
  const int S = spec.width * spec.height;
  const int A = 4;

  Pomdp m;
  m.initial = g.idx(spec.initial);
  for (int i = 0; i < S; ++i) {
    Cell c = g.cell(i);
    m.states.push_back("c" + std::to_string(c.col) + "r" +
                       std::to_string(c.row));
  }
  m.actions = {"left", "right", "up", "down"};
  m.transition.assign(S, std::vector<std::vector<double>>(
                             A, std::vector<double>(S, 0.0)));
  m.reward.assign(S, std::vector<double>(A, 0.0));

  const int target = g.idx(spec.target);
  for (int s = 0; s < S; ++s) {
    const Cell from = g.cell(s);
    const bool absorbing = spec.absorbing_target && s == target;
    for (int a = 0; a < A; ++a) {
      if (absorbing) {
        m.transition[s][a][s] = 1.0;
        continue;
      }
      for (const auto& [dir, p] : move_components(spec, a))
        m.transition[s][a][g.idx(g.step(from, dir))] += p;
    }
  }

  if (spec.reward_enter_target) {
    for (int s = 0; s < S; ++s) {
      if (spec.absorbing_target && s == target) continue;
      for (int a = 0; a < A; ++a) m.reward[s][a] = m.transition[s][a][target];
    }
  } else {
    std::set<std::pair<int, int>> seen;
    for (const GridReward& r : spec.rewards) {
      if (!seen.insert({g.idx(r.cell), r.action}).second)
        throw ValidationError("duplicate grid reward entry");
      m.reward[g.idx(r.cell)][r.action] = r.value;
    }
  }

  if (mode == GridObservationMode::relative9) {
    m.observations = relative9_ids();
    m.observe.assign(S, std::vector<double>(m.observations.size(), 0.0));
    for (int s = 0; s < S; ++s) m.observe[s][relative9_obs(g, g.cell(s))] = 1.0;
  } else {
    FourRoomPartition p = fourroom_partition(g);
    m.observations = fourroom36_ids();
    m.observe.assign(S, std::vector<double>(m.observations.size(), 0.0));
    for (int s = 0; s < S; ++s)
      m.observe[s][fourroom36_obs(p, g.cell(s))] = 1.0;
  }
  return finish(std::move(m));
}

GridSpec grid4_spec() {
  GridSpec spec;
  spec.width = spec.height = 4;
  spec.epsilon = 0.005;
  spec.initial = {1, 4};
  spec.target = {4, 1};
  spec.absorbing_target = true;
  spec.error_cells = {{1, 1}, {4, 4}};
  const double e = spec.epsilon;
  // Rewards on the two cells adjacent to the target, valued by how likely
  // the listed action is to enter it.
  spec.rewards = {{{3, 1}, kGridRight, 0.95 - e / 3},
                  {{4, 2}, kGridDown, 0.95 - e / 3},
                  {{3, 1}, kGridUp, 0.025 - e / 3},
                  {{4, 2}, kGridLeft, 0.025 - e / 3},
                  {{3, 1}, kGridLeft, e},
                  {{4, 2}, kGridUp, e}};
  return spec;
}

GridSpec fourroom10_spec() {
  GridSpec spec;
  spec.width = spec.height = 10;
  spec.deterministic_moves = true;
  spec.initial = {2, 9};
  spec.target = {8, 3};
  spec.absorbing_target = true;
  spec.reward_enter_target = true;
  // Interior walls split the grid into four rooms; each of the four wall
  // segments has a one-cell door: rows 3/8 on the vertical wall, columns
  // 3/8 on the horizontal wall.
  for (int r = 1; r <= 10; ++r)
    if (r != 3 && r != 8) spec.walls.push_back({{5, r}, {6, r}});
  for (int c = 1; c <= 10; ++c)
    if (c != 3 && c != 8) spec.walls.push_back({{c, 5}, {c, 6}});
  return spec;
}

std::vector<std::string> builtin_names() {
  return {"fig5", "fig7", "grid4", "fourroom10"};
}

Pomdp builtin_model(const std::string& name) {
  if (name == "fig5") return gen_fig5();
  if (name == "fig7") return gen_fig7();
  if (name == "grid4")
    return gen_gridworld(grid4_spec(), GridObservationMode::relative9);
  if (name == "fourroom10")
    return gen_gridworld(fourroom10_spec(), GridObservationMode::fourroom36);
  throw ValidationError("unknown builtin model '" + name + "'");
}

}  // namespace entromax
