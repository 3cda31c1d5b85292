#pragma once

#include <numeric>

#include "sgin/solver.hpp"

namespace sgin {

// Joint communication/caching allocation without on-board compute: the
// elastic scheduler runs a single pass at zero prices on a graph built
// without compute arcs, and no retry pass is made.
inline SolveResult ja(MdrTeg& g, const std::vector<Flow>& flows) {
  if (g.with_compute())
    throw config_error("ja: expects a graph built with with_compute=false");
  SolveResult res;
  const Multipliers mult = build_multipliers(g, flows, 0.0);
  HeurOutcome h = esa_fsc(g, flows, mult);
  res.assignment = std::move(h.assignment);
  res.status = std::move(h.status);
  res.success_count = h.successes;
  res.objective = -h.successes;
  res.ub = res.objective;
  res.lb = -static_cast<double>(flows.size());
  res.gap_pct = relative_gap_pct(res.ub, res.lb);
  res.iterations = 1;
  res.stop_reason = "single_pass";
  return res;
}

// Whole-path pre-allocation: each flow gets one residual-feasible path to
// ground at its full size, committed across all slots at once, with
// compression relief applied at the earliest capable relay on that fixed
// path. Nothing is replanned afterwards, so capacity consumed in later
// slots stays reserved even when it starves flows served next.
inline SolveResult crpaa(MdrTeg& g, const std::vector<Flow>& flows) {
  SolveResult res;
  const std::size_t F = flows.size();
  res.assignment.plans.resize(F);
  res.status.assign(F, FlowStatus::Unrouted);

  std::vector<std::size_t> order(F);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Flow& fa = flows[a];
    const Flow& fb = flows[b];
    return std::tie(fa.t_start, fa.t_end, fa.volume_bits, a) <
           std::tie(fb.t_start, fb.t_end, fb.volume_bits, b);
  });

  for (std::size_t fi : order) {
    const Flow& f = flows[fi];
    check_flow(f);
    const int start = g.node_index(f.source, f.t_start);
    if (start < 0) continue;
    const int t_cap = std::min(f.t_end, g.horizon());

    PathResult path;
    for (int th = f.t_start; th <= t_cap && !path.found; ++th)
      path = find_path(g, {start, f.t_start, th, f.volume_bits, &f, nullptr});
    if (!path.found) continue;

    FlowPlan& p = res.assignment.plans[fi];
    bits_t vol = f.volume_bits;
    bool compressed = false;
    for (const PathStep& stp : path.steps) {
      if (stp.arc >= 0) {
        g.consume(stp.arc, vol);
        p.x[stp.arc] = vol;
      }
      const NodeRef& n = g.node(stp.head);
      if (compressed || !g.with_compute() || n.kind != VertexKind::Leo) continue;
      const bits_t small = compressed_bits(vol, f.theta);
      const int sc = g.sc_arc(stp.head);
      if (small <= 0 || small >= vol || sc < 0 || g.arc(sc).residual < vol) continue;
      g.consume(sc, vol);
      p.x[sc] = vol;
      p.x[g.cs_arc(stp.head)] = small;
      if (vol - small > 0) p.x[g.ca_arc()] = vol - small;
      p.compress_node = stp.head;
      vol = small;
      compressed = true;
    }
    p.arrival_arc = path.steps.back().arc;
    p.arrival_slot = g.node(g.arc(p.arrival_arc).tail).slot;
    if (p.arrival_slot >= f.t_start && p.arrival_slot <= f.t_end) {
      p.sg_indicator_arc = p.arrival_arc;
      res.status[fi] = FlowStatus::Success;
    } else {
      release_plan(g, p);
    }
  }

  res.success_count = res.assignment.success_count();
  res.objective = -res.success_count;
  res.ub = res.objective;
  res.lb = -static_cast<double>(flows.size());
  res.gap_pct = relative_gap_pct(res.ub, res.lb);
  res.iterations = 1;
  res.stop_reason = "single_pass";
  return res;
}

}  // namespace sgin
