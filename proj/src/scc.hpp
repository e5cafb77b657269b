#pragma once

#include <algorithm>
#include <vector>

namespace entromax::internal {

struct SccResult {
  std::vector<int> comp;     // component id per vertex
  std::vector<char> closed;  // per component: no edges leave it
  int count = 0;
};

/// Iterative Tarjan over an adjacency list.
inline SccResult strongly_connected_components(
    const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  SccResult r;
  r.comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  int next_index = 0;

  struct Frame {
    int v;
    std::size_t j;
  };
  std::vector<Frame> frames;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    frames.push_back({root, 0});
    while (!frames.empty()) {
      const int v = frames.back().v;
      bool descended = false;
      while (frames.back().j < adj[v].size()) {
        const int w = adj[v][frames.back().j++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        while (true) {
          const int w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          r.comp[w] = r.count;
          if (w == v) break;
        }
        ++r.count;
      }
      frames.pop_back();
      if (!frames.empty()) {
        low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  r.closed.assign(r.count, 1);
  for (int v = 0; v < n; ++v) {
    for (int w : adj[v]) {
      if (r.comp[w] != r.comp[v]) r.closed[r.comp[v]] = 0;
    }
  }
  return r;
}

}  // namespace entromax::internal
