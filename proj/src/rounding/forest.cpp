#include "nswx/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace nswx {

namespace {

// Bipartite node ids: agents 0..n-1, items n..n+m-1.
std::vector<std::vector<int>> adjacency(const SupportGraph& sg) {
  const int n = sg.num_agents();
  std::vector<std::vector<int>> adj(n + sg.num_items());
  for (const auto& [i, j] : sg.edges()) {
    adj[i].push_back(n + j);
    adj[n + j].push_back(i);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

// Returns the nodes of one cycle, starting at an agent, or empty.
std::vector<int> find_cycle(const SupportGraph& sg) {
  const int n = sg.num_agents();
  const auto adj = adjacency(sg);
  const int total = static_cast<int>(adj.size());
  std::vector<int> parent(total, -1);
  std::vector<char> visited(total, 0);
  std::vector<int> cycle;

  std::function<bool(int)> dfs = [&](int u) {
    visited[u] = 1;
    for (int x : adj[u]) {
      if (x == parent[u]) continue;
      if (visited[x]) {
        for (int y = u; y != x; y = parent[y]) cycle.push_back(y);
        cycle.push_back(x);
        return true;
      }
      parent[x] = u;
      if (dfs(x)) return true;
    }
    return false;
  };

  for (int start = 0; start < total; ++start) {
    if (!visited[start] && dfs(start)) break;
  }
  if (cycle.empty()) return cycle;
  std::reverse(cycle.begin(), cycle.end());
  if (cycle.front() >= n) std::rotate(cycle.begin(), cycle.begin() + 1, cycle.end());
  return cycle;
}

}  // namespace

bool is_forest(const SupportGraph& sg) { return find_cycle(sg).empty(); }

FractionalSolution cancel_cycles(const Instance& inst, const FractionalSolution& s, double tau) {
  if (s.num_agents() != inst.num_agents() || s.num_items() != inst.num_items()) {
    throw DimensionMismatch("solution does not match the instance dimensions");
  }
  const int n = inst.num_agents();
  const Vector q = s.q();
  Matrix b = s.b();

  for (;;) {
    const std::vector<int> cycle = find_cycle(support_graph(FractionalSolution(b), tau));
    if (cycle.empty()) break;
    const int len = static_cast<int>(cycle.size()) / 2;

    // delta = +1 on (i_x, j_x), -1 on (i_{x+1}, j_x).
    std::vector<std::pair<int, int>> plus, minus;
    for (int x = 0; x < len; ++x) {
      const int i = cycle[2 * x];
      const int j = cycle[2 * x + 1] - n;
      const int next = cycle[(2 * x + 2) % cycle.size()];
      plus.emplace_back(i, j);
      minus.emplace_back(next, j);
    }
    auto term = [&](int i, int j) { return inst.w(i) * (std::log(inst.v(i, j)) - std::log(q(j))); };
    double h = 0.0;
    for (const auto& [i, j] : plus) h += term(i, j);
    for (const auto& [i, j] : minus) h -= term(i, j);
    if (std::isnan(h)) h = 0.0;

    const auto& up = h >= 0.0 ? plus : minus;
    const auto& down = h >= 0.0 ? minus : plus;
    std::size_t arg = 0;
    for (std::size_t k = 1; k < down.size(); ++k) {
      if (b(down[k].first, down[k].second) < b(down[arg].first, down[arg].second)) arg = k;
    }
    const double eps = b(down[arg].first, down[arg].second);
    for (const auto& [i, j] : up) b(i, j) += eps;
    for (const auto& [i, j] : down) b(i, j) = std::max(0.0, b(i, j) - eps);
    b(down[arg].first, down[arg].second) = 0.0;
  }
  return FractionalSolution(std::move(b));
}

RootedForest root_forest(const SupportGraph& sg) {
  if (!is_forest(sg)) throw InvalidInput("support graph has a cycle; cannot root it");
  const int n = sg.num_agents();
  const int m = sg.num_items();
  const auto adj = adjacency(sg);

  RootedForest f;
  f.graph = sg;
  f.agent_parent.assign(n, -1);
  f.item_parent.assign(m, -1);
  f.agent_children.assign(n, {});
  f.item_children.assign(m, {});
  f.agent_depth.assign(n, -1);
  f.item_depth.assign(m, -1);

  std::vector<char> seen(n + m, 0);
  for (int root = 0; root < n; ++root) {
    if (seen[root]) continue;
    f.roots.push_back(root);
    seen[root] = 1;
    f.agent_depth[root] = 0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int x : adj[u]) {
        if (seen[x]) continue;
        seen[x] = 1;
        queue.push_back(x);
        if (u < n) {
          const int j = x - n;
          f.item_parent[j] = u;
          f.item_depth[j] = f.agent_depth[u] + 1;
          f.agent_children[u].push_back(j);
        } else {
          const int j = u - n;
          f.agent_parent[x] = j;
          f.agent_depth[x] = f.item_depth[j] + 1;
          f.item_children[j].push_back(x);
        }
      }
    }
  }
  for (int j = 0; j < m; ++j) {
    if (!seen[n + j]) f.isolated_items.push_back(j);
  }
  return f;
}

PrunedForest prune(const Instance& inst, const FractionalSolution& s_star, const RootedForest& rooted) {
  const int n = rooted.num_agents();
  const int m = rooted.num_items();
  if (inst.num_agents() != n || inst.num_items() != m || s_star.num_agents() != n || s_star.num_items() != m) {
    throw DimensionMismatch("forest, solution and instance dimensions differ");
  }
  PrunedForest pf;
  pf.rooted = rooted;
  pf.pruned = rooted.graph;
  pf.light.assign(m, 0);
  pf.leaf_bundles.assign(n, {});

  std::vector<char> has_children(m, 0);
  for (int j = 0; j < m; ++j) {
    if (rooted.item_parent[j] < 0) continue;
    if (s_star.q()(j) < 0.5) {
      pf.light[j] = 1;
      for (int child : rooted.item_children[j]) pf.pruned.remove(child, j);
    } else {
      has_children[j] = !rooted.item_children[j].empty();
    }
  }
  for (int j = 0; j < m; ++j) {
    const int parent = rooted.item_parent[j];
    if (parent < 0) continue;
    if (has_children[j]) {
      pf.nonleaf_items.push_back(j);
    } else {
      pf.leaf_bundles[parent].push_back(j);
    }
  }
  return pf;
}

}  // namespace nswx
