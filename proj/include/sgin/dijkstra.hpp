#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "sgin/flow.hpp"
#include "sgin/mdrteg.hpp"

namespace sgin {

// One hop of a routed path. A negative arc marks a free dwell at the flow's
// source observer, which occupies no capacity and only advances the slot.
struct PathStep {
  int arc = -1;
  int head = -1;
};

struct PathResult {
  bool found = false;
  double dist = 0.0;
  std::vector<PathStep> steps;
};

struct PathQuery {
  int start = -1;   // node index the flow currently occupies
  int t_lo = 1;     // current scheduling slot
  int t_hi = 1;     // latest slot the search may enter
  bits_t need = 0;  // residual an arc must offer to qualify
  const Flow* flow = nullptr;
  const std::vector<char>* banned = nullptr;  // copies the flow already used
};

// Residual-filtered shortest path from the flow's position to any admissible
// ground copy, over transmission, storage and dwell edges inside the window.
// Costs favour lightly loaded arcs; ties are settled by node index so runs
// are reproducible.
inline PathResult find_path(const MdrTeg& g, const PathQuery& q) {
  PathResult res;
  if (q.start < 0 || !q.flow) return res;
  const Flow& f = *q.flow;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(g.node_count()), inf);
  std::vector<int> par_node(dist.size(), -1), par_arc(dist.size(), -2);
  std::vector<char> done(dist.size(), 0);

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[static_cast<std::size_t>(q.start)] = 0.0;
  pq.push({0.0, q.start});

  auto blocked = [&](int node) { return q.banned && (*q.banned)[static_cast<std::size_t>(node)]; };

  int goal = -1;
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[static_cast<std::size_t>(u)]) continue;
    done[static_cast<std::size_t>(u)] = 1;
    const NodeRef& nu = g.node(u);
    if (nu.kind == VertexKind::Ground) {
      goal = u;
      break;
    }
    auto relax = [&](int v, int arc, double w) {
      if (done[static_cast<std::size_t>(v)] || blocked(v)) return;
      const double nd = d + w;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        par_node[static_cast<std::size_t>(v)] = u;
        par_arc[static_cast<std::size_t>(v)] = arc;
        pq.push({nd, v});
      }
    };

    for (int arc : g.out_arcs(u)) {
      const Arc& a = g.arc(arc);
      const NodeRef& head = g.node(a.head);
      switch (a.kind) {
        case ArcKind::Os:
          if (nu.id != f.source) continue;
          break;
        case ArcKind::Ss:
          break;
        case ArcKind::Store:
          if (head.slot > q.t_hi) continue;
          break;
        case ArcKind::Sg:
          if (!f.any_dest() && head.id != f.dest) continue;
          break;
        default:
          continue;  // compute arcs are handled outside the path search
      }
      if (a.residual != kUnbounded && a.residual < q.need) continue;
      relax(a.head, arc, g.weight(arc));
    }
    // Dwell at the source observer until a later departure slot.
    if (nu.kind == VertexKind::Observation && nu.id == f.source && nu.slot < q.t_hi) {
      const int next = g.node_index(nu.id, nu.slot + 1);
      if (next >= 0) relax(next, -1, 0.0);
    }
  }

  if (goal < 0) return res;
  res.found = true;
  res.dist = dist[static_cast<std::size_t>(goal)];
  for (int v = goal; v != q.start; v = par_node[static_cast<std::size_t>(v)])
    res.steps.push_back({par_arc[static_cast<std::size_t>(v)], v});
  std::reverse(res.steps.begin(), res.steps.end());
  return res;
}

}  // namespace sgin
