#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "sgin/assignment.hpp"

namespace sgin {

// Exhaustive reference solver. Enumerates every feasible single-flow routing
// (departure slot, intra-slot relays, storage crossings, at most one
// compression, one downlink), then branch-and-bounds over flows against the
// shared capacities. Intended for small instances and certification; the
// node budget makes the "gave up" case explicit instead of silently wrong.

using PlanCost = std::function<double(std::size_t, const FlowPlan&)>;

struct ExactOptions {
  std::size_t max_plans_per_flow = 200000;
  long long max_bb_nodes = 4000000;
  PlanCost cost;  // default: -1 per timely delivery
};

struct ExactResult {
  Assignment assignment;
  double objective = 0.0;
  bool certified = false;  // true iff search completed within budget
  long long bb_nodes = 0;
  std::vector<std::size_t> plan_counts;
};

namespace detail {

struct PlanEnum {
  const MdrTeg& g;
  const Flow& f;
  std::vector<FlowPlan>& out;
  std::size_t max_plans;
  bool truncated = false;

  FlowPlan partial;
  std::vector<int> visited;  // phys-node visit marks for the current slot

  void emit(int sg_arc, bits_t vol) {
    if (out.size() >= max_plans) {
      truncated = true;
      return;
    }
    FlowPlan p = partial;
    p.x[sg_arc] = vol;
    p.arrival_arc = sg_arc;
    p.arrival_slot = g.node(g.arc(sg_arc).tail).slot;
    if (p.arrival_slot >= f.t_start && p.arrival_slot <= f.t_end)
      p.sg_indicator_arc = sg_arc;
    out.push_back(std::move(p));
  }

  bool seen(const std::string& id) const {
    for (int n : visited)
      if (g.node(n).id == id) return true;
    return false;
  }

  void walk(int node, bits_t vol, bool compressed) {
    if (truncated) return;
    for (int arc : g.out_arcs(node)) {
      const Arc& a = g.arc(arc);
      switch (a.kind) {
        case ArcKind::Sg:
          if (f.any_dest() || g.node(a.head).id == f.dest) emit(arc, vol);
          break;
        case ArcKind::Ss: {
          const NodeRef& head = g.node(a.head);
          if (seen(head.id)) break;
          visited.push_back(a.head);
          partial.x[arc] = vol;
          walk(a.head, vol, compressed);
          partial.x.erase(arc);
          visited.pop_back();
          break;
        }
        case ArcKind::Store: {
          const std::vector<int> saved = visited;
          visited = {a.head};
          partial.x[arc] = vol;
          walk(a.head, vol, compressed);
          partial.x.erase(arc);
          visited = saved;
          break;
        }
        case ArcKind::Sc: {
          if (compressed) break;
          const bits_t small = compressed_bits(vol, f.theta);
          if (small <= 0 || small >= vol) break;  // no strict reduction
          const int cs = g.cs_arc(node);
          const int ca = g.ca_arc();
          partial.x[arc] = vol;
          partial.x[cs] = small;
          partial.x[ca] = vol - small;
          partial.compress_node = node;
          walk(node, small, true);
          partial.compress_node = -1;
          partial.x.erase(ca);
          partial.x.erase(cs);
          partial.x.erase(arc);
          break;
        }
        default:
          break;
      }
    }
  }

  void run() {
    out.push_back(FlowPlan{});  // leaving the flow unrouted is always feasible
    for (int ni = 0; ni < g.node_count(); ++ni) {
      const NodeRef& nr = g.node(ni);
      if (nr.id != f.source || nr.slot < f.t_start) continue;
      for (int arc : g.out_arcs(ni)) {
        const Arc& a = g.arc(arc);
        if (a.kind != ArcKind::Os) continue;
        visited = {a.head};
        partial.x[arc] = f.volume_bits;
        walk(a.head, f.volume_bits, false);
        partial.x.erase(arc);
      }
    }
  }
};

inline bool plan_fits(const MdrTeg& g, const FlowPlan& p, const std::vector<bits_t>& residual) {
  for (const auto& [arc, amount] : p.x) {
    if (g.arc(arc).capacity == kUnbounded) continue;
    if (residual[static_cast<std::size_t>(arc)] < amount) return false;
  }
  return true;
}

inline void plan_take(const MdrTeg& g, const FlowPlan& p, std::vector<bits_t>& residual,
                      bits_t sign) {
  for (const auto& [arc, amount] : p.x) {
    if (g.arc(arc).capacity == kUnbounded) continue;
    residual[static_cast<std::size_t>(arc)] -= sign * amount;
  }
}

}  // namespace detail

inline std::vector<FlowPlan> enumerate_plans(const MdrTeg& g, const Flow& f,
                                             std::size_t max_plans, bool* truncated = nullptr) {
  check_flow(f);
  std::vector<FlowPlan> plans;
  detail::PlanEnum e{g, f, plans, max_plans, false, {}, {}};
  e.run();
  if (truncated) *truncated = e.truncated;
  return plans;
}

inline ExactResult exact_solve(const MdrTeg& g, const std::vector<Flow>& flows,
                               const ExactOptions& opt = {}) {
  PlanCost cost = opt.cost;
  if (!cost)
    cost = [](std::size_t, const FlowPlan& p) { return p.sg_indicator_arc >= 0 ? -1.0 : 0.0; };

  ExactResult res;
  res.certified = true;
  const std::size_t F = flows.size();
  res.assignment.plans.resize(F);
  res.plan_counts.resize(F);

  // Per-flow plan lists sorted by cost, size, then arc usage for determinism.
  std::vector<std::vector<FlowPlan>> plans(F);
  std::vector<std::vector<double>> costs(F);
  std::vector<double> best_of(F, 0.0);
  for (std::size_t fi = 0; fi < F; ++fi) {
    bool truncated = false;
    plans[fi] = enumerate_plans(g, flows[fi], opt.max_plans_per_flow, &truncated);
    if (truncated) res.certified = false;
    res.plan_counts[fi] = plans[fi].size();
    std::vector<std::size_t> order(plans[fi].size());
    std::vector<double> c(plans[fi].size());
    for (std::size_t k = 0; k < plans[fi].size(); ++k) {
      order[k] = k;
      c[k] = cost(fi, plans[fi][k]);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (c[a] != c[b]) return c[a] < c[b];
      const auto& pa = plans[fi][a].x;
      const auto& pb = plans[fi][b].x;
      if (pa.size() != pb.size()) return pa.size() < pb.size();
      return std::lexicographical_compare(
          pa.begin(), pa.end(), pb.begin(), pb.end(), [](const auto& l, const auto& r) {
            return l.first != r.first ? l.first < r.first : l.second < r.second;
          });
    });
    std::vector<FlowPlan> sorted;
    std::vector<double> csorted;
    sorted.reserve(order.size());
    for (std::size_t k : order) {
      sorted.push_back(std::move(plans[fi][k]));
      csorted.push_back(c[k]);
    }
    plans[fi] = std::move(sorted);
    costs[fi] = std::move(csorted);
    best_of[fi] = costs[fi].empty() ? 0.0 : costs[fi].front();
  }

  // Remaining-flows bound for pruning: sum of unconstrained per-flow minima.
  std::vector<double> suffix(F + 1, 0.0);
  for (std::size_t fi = F; fi-- > 0;) suffix[fi] = suffix[fi + 1] + best_of[fi];

  std::vector<bits_t> residual = g.residual_snapshot();
  std::vector<std::size_t> choice(F, 0), best_choice(F, 0);
  double best = 1e300;
  bool have_best = false;
  long long nodes = 0;
  bool out_of_budget = false;

  std::function<void(std::size_t, double)> dive = [&](std::size_t fi, double acc) {
    if (out_of_budget) return;
    if (++nodes > opt.max_bb_nodes) {
      out_of_budget = true;
      return;
    }
    if (have_best && acc + suffix[fi] >= best) return;
    if (fi == F) {
      best = acc;
      best_choice = choice;
      have_best = true;
      return;
    }
    for (std::size_t k = 0; k < plans[fi].size(); ++k) {
      const FlowPlan& p = plans[fi][k];
      if (!detail::plan_fits(g, p, residual)) continue;
      detail::plan_take(g, p, residual, +1);
      choice[fi] = k;
      dive(fi + 1, acc + costs[fi][k]);
      detail::plan_take(g, p, residual, -1);
      if (out_of_budget) return;
    }
  };
  dive(0, 0.0);

  res.bb_nodes = nodes;
  if (out_of_budget) res.certified = false;
  if (have_best) {
    res.objective = best;
    for (std::size_t fi = 0; fi < F; ++fi) res.assignment.plans[fi] = plans[fi][best_choice[fi]];
  }
  return res;
}

}  // namespace sgin
