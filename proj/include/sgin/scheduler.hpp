#pragma once

#include <algorithm>
#include <limits>
#include <set>
#include <tuple>
#include <vector>

#include "sgin/assignment.hpp"
#include "sgin/dijkstra.hpp"
#include "sgin/multipliers.hpp"

namespace sgin {

enum class FlowStatus { Pending, Success, Unrouted, Failed };

inline const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Pending: return "pending";
    case FlowStatus::Success: return "success";
    case FlowStatus::Unrouted: return "unrouted";
    case FlowStatus::Failed: return "failed";
  }
  return "?";
}

struct HeurOutcome {
  Assignment assignment;  // after the success check; released plans are empty
  Assignment routing;     // as routed, before the success check
  std::vector<FlowStatus> status;
  int successes = 0;
};

// A flow is priced out when every admissible downlink carries a positive
// routing price, so granting it could only worsen the relaxation. Flows with
// no admissible downlink at all are priced out vacuously.
inline bool priced_out(const Multipliers& mult, std::size_t fi) {
  auto it = mult.mu.lower_bound(MultKey{fi, std::numeric_limits<int>::min(), ""});
  for (; it != mult.mu.end() && it->first.flow == fi; ++it) {
    const auto& m = it->second;
    if (m[0] - m[1] + m[2] <= 0.0) return false;
  }
  return true;
}

namespace detail {

struct EsaState {
  int pos = -1;  // node index the flow currently occupies
  int t = 0;
  bits_t vol = 0;
  bool compressed = false;
  FlowPlan plan;
  std::vector<char> used;  // Leo copies on the committed path
};

}  // namespace detail

// Elastic per-slot scheduler followed by the success check.
//
// Flows are served from a queue keyed by (slot, rank, deadline, volume,
// index). Each service grows the lookahead window until a residual-feasible
// path to ground appears, then either delivers (path completes in the
// current slot), compresses at the earliest capable relay on the in-slot
// prefix and replans, or banks the prefix plus one storage hop and requeues
// for the next slot. Flows that exhaust their window release everything they
// held. The final check releases deliveries whose on-time indicator the
// relaxation prices at a non-negative coefficient.
inline HeurOutcome esa_fsc(MdrTeg& g, const std::vector<Flow>& flows, const Multipliers& mult,
                           const std::vector<int>& ranks = {}) {
  const std::size_t F = flows.size();
  if (!ranks.empty() && ranks.size() != F)
    throw std::invalid_argument("esa_fsc: rank vector size mismatch");
  HeurOutcome out;
  out.assignment.plans.resize(F);
  out.routing.plans.resize(F);
  out.status.assign(F, FlowStatus::Pending);

  std::vector<detail::EsaState> st(F);
  std::set<std::tuple<int, int, int, bits_t, std::size_t>> queue;

  for (std::size_t fi = 0; fi < F; ++fi) {
    const Flow& f = flows[fi];
    check_flow(f);
    auto& s = st[fi];
    s.vol = f.volume_bits;
    s.t = f.t_start;
    if (priced_out(mult, fi)) {
      out.status[fi] = FlowStatus::Failed;
      continue;
    }
    s.pos = g.node_index(f.source, f.t_start);
    if (s.pos < 0) {
      out.status[fi] = FlowStatus::Unrouted;
      continue;
    }
    s.used.assign(static_cast<std::size_t>(g.node_count()), 0);
    queue.insert({s.t, ranks.empty() ? 0 : ranks[fi], f.t_end, s.vol, fi});
  }

  auto commit = [&](detail::EsaState& s, int arc, bits_t amount) {
    g.consume(arc, amount);
    s.plan.x[arc] = amount;
    const NodeRef& head = g.node(g.arc(arc).head);
    if (head.kind == VertexKind::Leo) s.used[static_cast<std::size_t>(g.arc(arc).head)] = 1;
  };

  while (!queue.empty()) {
    const auto top = *queue.begin();
    queue.erase(queue.begin());
    const std::size_t fi = std::get<4>(top);
    auto& s = st[fi];
    const Flow& f = flows[fi];
    const int t_cap = std::min(f.t_end, g.horizon());

    for (;;) {
      PathResult path;
      for (int th = s.t; th <= t_cap && !path.found; ++th)
        path = find_path(g, {s.pos, s.t, th, s.vol, &f, &s.used});
      if (!path.found) {
        release_plan(g, s.plan);
        out.status[fi] = FlowStatus::Unrouted;
        break;
      }

      // first step that leaves the current slot (storage hop or dwell)
      std::size_t cross = path.steps.size();
      for (std::size_t i = 0; i < path.steps.size(); ++i)
        if (path.steps[i].arc < 0 || g.arc(path.steps[i].arc).kind == ArcKind::Store) {
          cross = i;
          break;
        }

      if (cross == path.steps.size()) {
        for (const auto& stp : path.steps) commit(s, stp.arc, s.vol);
        s.plan.arrival_arc = path.steps.back().arc;
        s.plan.arrival_slot = s.t;
        s.plan.sg_indicator_arc = s.plan.arrival_arc;  // window growth stops at the deadline
        out.status[fi] = FlowStatus::Success;
        break;
      }

      // compress at the earliest capable relay on the in-slot prefix
      bool compressed_now = false;
      if (!s.compressed && g.with_compute()) {
        const bits_t small = compressed_bits(s.vol, f.theta);
        if (small > 0 && small < s.vol) {
          std::vector<int> cand;
          if (g.node(s.pos).kind == VertexKind::Leo) cand.push_back(s.pos);
          for (std::size_t i = 0; i < cross; ++i)
            if (g.node(path.steps[i].head).kind == VertexKind::Leo)
              cand.push_back(path.steps[i].head);
          for (int c : cand) {
            const int sc = g.sc_arc(c);
            if (sc < 0 || g.arc(sc).residual < s.vol) continue;
            std::size_t upto = 0;
            while (c != s.pos && path.steps[upto].head != c) ++upto;
            if (c != s.pos)
              for (std::size_t i = 0; i <= upto; ++i) commit(s, path.steps[i].arc, s.vol);
            commit(s, sc, s.vol);
            s.plan.x[g.cs_arc(c)] = small;
            if (s.vol - small > 0) s.plan.x[g.ca_arc()] = s.vol - small;
            s.plan.compress_node = c;
            s.pos = c;
            s.vol = small;
            s.compressed = true;
            compressed_now = true;
            break;
          }
        }
      }
      if (compressed_now) continue;  // replan in the same slot at the new size

      // bank the prefix and step into the next slot
      for (std::size_t i = 0; i < cross; ++i) commit(s, path.steps[i].arc, s.vol);
      const PathStep& x = path.steps[cross];
      if (x.arc >= 0) commit(s, x.arc, s.vol);
      s.pos = x.head;
      s.t += 1;
      queue.insert({s.t, ranks.empty() ? 0 : ranks[fi], f.t_end, s.vol, fi});
      break;
    }
  }

  for (std::size_t fi = 0; fi < F; ++fi) out.routing.plans[fi] = st[fi].plan;

  // success check against the relaxation prices
  for (std::size_t fi = 0; fi < F; ++fi) {
    if (out.status[fi] != FlowStatus::Success) continue;
    auto& s = st[fi];
    const Flow& f = flows[fi];
    if (s.plan.arrival_slot < f.t_start || s.plan.arrival_slot > f.t_end) {
      release_plan(g, s.plan);
      out.status[fi] = FlowStatus::Unrouted;
      continue;
    }
    const NodeRef& tail = g.node(g.arc(s.plan.arrival_arc).tail);
    const MultKey key{fi, s.plan.arrival_slot, tail.id};
    if (mult.has(key) && mult.success_coef(key) >= 0.0) {
      release_plan(g, s.plan);
      out.status[fi] = FlowStatus::Failed;
    }
  }

  for (std::size_t fi = 0; fi < F; ++fi) out.assignment.plans[fi] = st[fi].plan;
  out.successes = out.assignment.success_count();
  return out;
}

// Retry each stranded flow at the head of the queue and keep the best pass.
// The graph is left holding the winning assignment.
inline HeurOutcome lsa(MdrTeg& g, const std::vector<Flow>& flows, const Multipliers& mult) {
  const std::vector<bits_t> entry = g.residual_snapshot();
  HeurOutcome best = esa_fsc(g, flows, mult);
  const std::vector<FlowStatus> base_status = best.status;
  std::vector<int> ranks(flows.size(), 0);
  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    if (base_status[fi] != FlowStatus::Unrouted) continue;
    g.restore_residuals(entry);
    std::fill(ranks.begin(), ranks.end(), 0);
    ranks[fi] = -1;
    HeurOutcome cand = esa_fsc(g, flows, mult, ranks);
    if (cand.successes > best.successes) best = std::move(cand);
  }
  g.restore_residuals(entry);
  apply_assignment(g, best.assignment);
  return best;
}

}  // namespace sgin
