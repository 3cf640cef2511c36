#include "peerstore/feasibility.hpp"

#include <bit>
#include <limits>
#include <queue>
#include <stdexcept>

namespace peerstore {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Dinic max-flow, integer capacities. Edges are stored in xor-paired slots
// (edge i and its reverse i^1), so flow on edge i is the reverse capacity.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : head_(nodes), level_(nodes), iter_(nodes) {
    for (auto& h : head_) h.clear();
  }

  int add_edge(int from, int to, std::int64_t cap) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({to, cap});
    edges_.push_back({from, 0});
    head_[from].push_back(id);
    head_[to].push_back(id + 1);
    return id;
  }

  std::int64_t flow_on(int id) const { return edges_[id ^ 1].cap; }
  void add_capacity(int id, std::int64_t delta) { edges_[id].cap += delta; }

  std::int64_t run(int s, int t) {
    std::int64_t total = 0;
    while (bfs(s, t)) {
      iter_.assign(iter_.size(), 0);
      while (std::int64_t pushed = dfs(s, t, kInf)) total += pushed;
    }
    return total;
  }

  // True when t is reachable in the residual graph (existence of one more
  // augmenting path); does not change the flow.
  bool residual_path(int s, int t) { return bfs(s, t); }

  // Nodes reachable from s in the residual graph.
  std::vector<char> residual_side(int s) {
    std::vector<char> seen(head_.size(), 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int id : head_[v]) {
        const auto& e = edges_[id];
        if (e.cap > 0 && !seen[e.to]) {
          seen[e.to] = 1;
          q.push(e.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    std::int64_t cap;
  };

  bool bfs(int s, int t) {
    level_.assign(level_.size(), -1);
    std::queue<int> q;
    q.push(s);
    level_[s] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int id : head_[v]) {
        const auto& e = edges_[id];
        if (e.cap > 0 && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  std::int64_t dfs(int v, int t, std::int64_t limit) {
    if (v == t) return limit;
    for (auto& i = iter_[v]; i < head_[v].size(); ++i) {
      const int id = head_[v][i];
      auto& e = edges_[id];
      if (e.cap <= 0 || level_[e.to] != level_[v] + 1) continue;
      const std::int64_t pushed = dfs(e.to, t, std::min(limit, e.cap));
      if (pushed > 0) {
        e.cap -= pushed;
        edges_[id ^ 1].cap += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> head_;
  std::vector<int> level_;
  std::vector<std::size_t> iter_;
};

// Unit/resource network: source -> unit x (cap alpha_x), x -> y on each edge
// (uncapped; the resource arc carries the bound), resource y -> sink (cap
// beta_y).
struct Network {
  MaxFlow flow;
  int s, t;
  std::vector<int> demand_edge;                  // id of source -> unit arc
  std::vector<std::vector<std::pair<int, int>>> middle;  // per unit: (y, edge id)

  explicit Network(const Instance& inst)
      : flow(2 * inst.n() + 2), s(0), t(2 * inst.n() + 1), middle(inst.n()) {
    const int n = inst.n();
    demand_edge.reserve(n);
    for (int x = 0; x < n; ++x) demand_edge.push_back(flow.add_edge(s, 1 + x, inst.alpha(x)));
    for (int x = 0; x < n; ++x)
      for (int y : inst.out_neighbors(x))
        middle[x].emplace_back(y, flow.add_edge(1 + x, 1 + n + y, kInf));
    for (int y = 0; y < n; ++y) flow.add_edge(1 + n + y, t, inst.beta(y));
  }
};

FeasibilityReport witness_from_flow(const Instance& inst, Network& net, std::int64_t value) {
  FeasibilityReport report;
  if (value == inst.alpha_sum()) {
    report.feasible = true;
    AllocationState w(inst.n());
    for (int x = 0; x < inst.n(); ++x)
      for (const auto& [y, id] : net.middle[x])
        for (std::int64_t k = 0; k < net.flow.flow_on(id); ++k) w.add_atom(x, y);
    report.allocation = std::move(w);
    return report;
  }
  // Min cut: the source-side units form a Hall violator.
  const auto side = net.flow.residual_side(net.s);
  for (int x = 0; x < inst.n(); ++x)
    if (side[1 + x]) report.violating_units.push_back(x);
  std::vector<char> in_nbr(inst.n(), 0);
  for (int x : report.violating_units) {
    report.violating_demand += inst.alpha(x);
    for (int y : inst.out_neighbors(x)) in_nbr[y] = 1;
  }
  for (int y = 0; y < inst.n(); ++y)
    if (in_nbr[y]) report.violating_capacity += inst.beta(y);
  report.feasible = false;
  return report;
}

std::vector<std::uint32_t> neighbor_masks(const Instance& inst) {
  std::vector<std::uint32_t> nbr(inst.n(), 0);
  for (int x = 0; x < inst.n(); ++x)
    for (int y : inst.out_neighbors(x)) nbr[x] |= (1u << y);
  return nbr;
}

std::int64_t beta_of_mask(const Instance& inst, std::uint32_t mask) {
  std::int64_t sum = 0;
  while (mask) {
    const int y = std::countr_zero(mask);
    sum += inst.beta(y);
    mask &= mask - 1;
  }
  return sum;
}

}  // namespace

FeasibilityReport feasible_by_flow(const Instance& inst) {
  Network net(inst);
  const std::int64_t value = net.flow.run(net.s, net.t);
  return witness_from_flow(inst, net, value);
}

FeasibilityReport feasible_by_subsets(const Instance& inst) {
  const int n = inst.n();
  if (n > 22) throw std::invalid_argument("feasible_by_subsets: n > 22");
  const auto nbr = neighbor_masks(inst);

  // Incremental demand/neighborhood over masks via the lowest set bit.
  std::vector<std::int64_t> demand(std::size_t(1) << n, 0);
  std::vector<std::uint32_t> reach(std::size_t(1) << n, 0);
  for (std::uint32_t d = 1; d < (1u << n); ++d) {
    const int x = std::countr_zero(d);
    const std::uint32_t rest = d & (d - 1);
    demand[d] = demand[rest] + inst.alpha(x);
    reach[d] = reach[rest] | nbr[x];
    if (demand[d] > beta_of_mask(inst, reach[d])) {
      FeasibilityReport report;
      report.feasible = false;
      for (int u = 0; u < n; ++u)
        if (d & (1u << u)) report.violating_units.push_back(u);
      report.violating_demand = demand[d];
      report.violating_capacity = beta_of_mask(inst, reach[d]);
      return report;
    }
  }
  // The Hall condition holds; materialize a witness through the flow route.
  return feasible_by_flow(inst);
}

bool strictly_feasible(const Instance& inst) {
  Network net(inst);
  if (net.flow.run(net.s, net.t) < inst.alpha_sum()) return false;
  for (int x = 0; x < inst.n(); ++x) {
    // One extra atom of demand at x must still be routable.
    net.flow.add_capacity(net.demand_edge[x], 1);
    const bool ok = net.flow.residual_path(net.s, net.t);
    net.flow.add_capacity(net.demand_edge[x], -1);
    if (!ok) return false;
  }
  return true;
}

std::vector<std::vector<int>> maximal_irreducible_subsets(const Instance& inst) {
  const int n = inst.n();
  if (n > 22) throw std::invalid_argument("maximal_irreducible_subsets: n > 22");
  const auto nbr = neighbor_masks(inst);

  std::vector<std::vector<int>> result;
  std::vector<int> universe;  // units with nonempty neighborhoods
  for (int x = 0; x < n; ++x) {
    if (nbr[x] == 0)
      result.push_back({x});  // standalone check: alpha_x against zero capacity
    else
      universe.push_back(x);
  }
  const int m = static_cast<int>(universe.size());

  // Shared-resource adjacency among universe units, as index masks.
  std::vector<std::uint32_t> share(m, 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && (nbr[universe[i]] & nbr[universe[j]])) share[i] |= (1u << j);

  for (std::uint32_t d = 1; d < (1u << m); ++d) {
    // Connectivity of the shared-resource graph restricted to d.
    std::uint32_t seen = d & (~d + 1);  // lowest bit
    for (;;) {
      std::uint32_t grow = seen;
      std::uint32_t frontier = seen;
      while (frontier) {
        const int i = std::countr_zero(frontier);
        frontier &= frontier - 1;
        grow |= share[i] & d;
      }
      if (grow == seen) break;
      seen = grow;
    }
    if (seen != d) continue;  // reducible

    std::uint32_t reach = 0;
    for (std::uint32_t rest = d; rest;) {
      const int i = std::countr_zero(rest);
      rest &= rest - 1;
      reach |= nbr[universe[i]];
    }
    bool maximal = true;
    for (int j = 0; j < m && maximal; ++j)
      if (!(d & (1u << j)) && (nbr[universe[j]] & ~reach) == 0) maximal = false;
    if (!maximal) continue;

    std::vector<int> subset;
    for (int i = 0; i < m; ++i)
      if (d & (1u << i)) subset.push_back(universe[i]);
    result.push_back(std::move(subset));
  }
  return result;
}

bool feasible_by_irreducible(const Instance& inst) {
  const auto nbr = neighbor_masks(inst);
  for (const auto& subset : maximal_irreducible_subsets(inst)) {
    std::int64_t demand = 0;
    std::uint32_t reach = 0;
    for (int x : subset) {
      demand += inst.alpha(x);
      reach |= nbr[x];
    }
    if (demand > beta_of_mask(inst, reach)) return false;
  }
  return true;
}

}  // namespace peerstore
