#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgin/assignment.hpp"

namespace sgin {

struct Violation {
  std::string tag;     // constraint family: capacity, source, dest, conservation, ...
  std::string flow;    // empty for shared-capacity violations
  std::string where;   // node or arc label
  double lhs = 0.0;
  double rhs = 0.0;
  std::string detail;
};

struct ConstraintReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["feasible"] = ok();
    j["violations"] = nlohmann::json::array();
    for (const auto& v : violations)
      j["violations"].push_back({{"tag", v.tag},
                                 {"flow", v.flow},
                                 {"where", v.where},
                                 {"lhs", v.lhs},
                                 {"rhs", v.rhs},
                                 {"detail", v.detail}});
    return j;
  }
};

// Checks an assignment against the full constraint system: shared-arc
// capacities, single full-volume departure, single downlink arrival,
// conditional per-node conservation of indicators and volume, compute-node
// accounting with the compress-once rule, and timeliness of the success
// indicators. A flow with no allocation at all is feasible (unrouted);
// a partially routed flow shows up as a conservation violation.
// Dangling arc references are a caller bug and throw instead of reporting.
inline ConstraintReport validate(const MdrTeg& g, const std::vector<Flow>& flows,
                                 const Assignment& a) {
  if (a.plans.size() != flows.size())
    throw std::invalid_argument("validate: assignment has " + std::to_string(a.plans.size()) +
                                " plans for " + std::to_string(flows.size()) + " flows");
  ConstraintReport rep;
  auto add = [&](std::string tag, std::string flow, std::string where, double lhs, double rhs,
                 std::string detail) {
    rep.violations.push_back(
        {std::move(tag), std::move(flow), std::move(where), lhs, rhs, std::move(detail)});
  };

  // Shared capacity per bounded arc.
  std::map<int, bits_t> arc_load;
  for (std::size_t fi = 0; fi < flows.size(); ++fi)
    for (const auto& [arc, amount] : a.plans[fi].x) {
      if (arc < 0 || arc >= g.arc_count())
        throw std::invalid_argument("validate: flow " + flows[fi].id +
                                    " references arc index " + std::to_string(arc) +
                                    " outside the graph");
      if (amount <= 0)
        throw std::invalid_argument("validate: flow " + flows[fi].id +
                                    " carries a nonpositive amount");
      arc_load[arc] += amount;
    }
  for (const auto& [arc, load] : arc_load) {
    const Arc& ar = g.arc(arc);
    if (ar.capacity == kUnbounded || load <= ar.capacity) continue;
    const char* tag = ar.kind == ArcKind::Store ? "capacity-store"
                      : ar.kind == ArcKind::Sc  ? "capacity-compute"
                                                : "capacity-transmission";
    add(tag, "", g.node(ar.tail).label() + "->" + g.node(ar.head).label(),
        static_cast<double>(load), static_cast<double>(ar.capacity),
        "total allocation exceeds arc capacity");
  }

  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    const Flow& f = flows[fi];
    const FlowPlan& p = a.plans[fi];

    if (!p.routed()) {
      if (p.arrival_slot != -1 || p.arrival_arc != -1)
        add("arrival", f.id, "", p.arrival_slot, -1, "unrouted flow reports an arrival");
      if (p.sg_indicator_arc != -1)
        add("timeliness", f.id, "", 1, 0, "unrouted flow reports success");
      continue;
    }

    // Per-node ledgers over the flow's own arcs.
    struct NodeIo {
      int lam_in = 0, lam_out = 0;          // transmission+storage indicators
      bits_t x_in = 0, x_out = 0;           // transmission+storage+compute-detour volume
      bits_t trans_store_in = 0;            // inflow eligible for compression
      bits_t sc = 0, cs = 0;
    };
    std::map<int, NodeIo> io;
    int os_count = 0, sg_count = 0, sc_count = 0;
    bits_t os_volume = 0, ca_volume = 0, sc_total = 0, cs_total = 0;
    int used_sg_arc = -1;

    for (const auto& [arc, amount] : p.x) {
      const Arc& ar = g.arc(arc);
      const NodeRef& tail = g.node(ar.tail);
      const NodeRef& head = g.node(ar.head);
      // A real arc is anchored at its tail slot; compute returns at the head.
      const int slot = tail.slot > 0 ? tail.slot : head.slot;
      if (slot < f.t_start && slot > 0)
        add("window", f.id, tail.label() + "->" + head.label(), slot, f.t_start,
            "allocation before the flow's start slot");
      switch (ar.kind) {
        case ArcKind::Os:
          ++os_count;
          os_volume += amount;
          if (tail.id != f.source)
            add("source", f.id, tail.label(), 0, 0, "departure from a foreign observation node");
          io[ar.head].lam_in++;
          io[ar.head].x_in += amount;
          io[ar.head].trans_store_in += amount;
          break;
        case ArcKind::Ss:
          io[ar.tail].lam_out++;
          io[ar.tail].x_out += amount;
          io[ar.head].lam_in++;
          io[ar.head].x_in += amount;
          io[ar.head].trans_store_in += amount;
          break;
        case ArcKind::Sg:
          ++sg_count;
          used_sg_arc = arc;
          io[ar.tail].lam_out++;
          io[ar.tail].x_out += amount;
          if (!f.any_dest() && head.id != f.dest)
            add("dest", f.id, head.label(), 0, 0, "arrival at a foreign ground station");
          break;
        case ArcKind::Store:
          io[ar.tail].lam_out++;
          io[ar.tail].x_out += amount;
          io[ar.head].lam_in++;
          io[ar.head].x_in += amount;
          io[ar.head].trans_store_in += amount;
          break;
        case ArcKind::Sc:
          ++sc_count;
          sc_total += amount;
          io[ar.tail].sc += amount;
          io[ar.tail].x_out += amount;
          break;
        case ArcKind::Cs:
          cs_total += amount;
          io[ar.head].cs += amount;
          io[ar.head].x_in += amount;
          break;
        case ArcKind::Ca:
          ca_volume += amount;
          break;
      }
    }

    // Source: exactly one departure carrying the full volume.
    if (os_count != 1)
      add("source", f.id, f.source, os_count, 1, "flow must leave its source exactly once");
    if (os_volume != f.volume_bits)
      add("source-volume", f.id, f.source, static_cast<double>(os_volume),
          static_cast<double>(f.volume_bits), "departure volume differs from the flow volume");

    // Destination: exactly one downlink.
    if (sg_count != 1)
      add("dest", f.id, f.dest, sg_count, 1, "flow must cross exactly one downlink");

    // Conditional conservation at every touched Leo copy. The compute
    // detour balances locally: compute-bound volume counts as outflow and
    // the compressed return as inflow, while the loss is accounted on the
    // absorption arc.
    for (const auto& [ni, n] : io) {
      const NodeRef& nr = g.node(ni);
      if (nr.kind != VertexKind::Leo) continue;
      if (n.lam_in != n.lam_out)
        add("conservation", f.id, nr.label(), n.lam_in, n.lam_out,
            "indicator in/out mismatch");
      if (n.lam_in > 1)
        add("conservation", f.id, nr.label(), n.lam_in, 1, "node visited more than once");
      if (n.x_in != n.x_out)
        add("conservation-volume", f.id, nr.label(), static_cast<double>(n.x_in),
            static_cast<double>(n.x_out), "volume in/out mismatch");
      if (n.sc > 0) {
        if (n.sc != n.trans_store_in)
          add("compute-inflow", f.id, nr.label(), static_cast<double>(n.sc),
              static_cast<double>(n.trans_store_in),
              "compressed volume must equal the node's arriving volume");
        if (n.cs != compressed_bits(n.sc, f.theta))
          add("compute-split", f.id, nr.label(), static_cast<double>(n.cs),
              static_cast<double>(compressed_bits(n.sc, f.theta)),
              "compute return must be theta * compressed input");
      } else if (n.cs > 0) {
        add("compute-split", f.id, nr.label(), static_cast<double>(n.cs), 0,
            "compute return without compute input at this node");
      }
    }

    // Loss accounting and the compress-once rule.
    if (ca_volume != sc_total - cs_total)
      add("compute-split", f.id, "absorb", static_cast<double>(ca_volume),
          static_cast<double>(sc_total - cs_total),
          "absorbed loss must equal compressed minus returned volume");
    if (sc_count > 1)
      add("compress-once", f.id, "", sc_count, 1, "flow compressed more than once");

    // Arrival bookkeeping and timely-success semantics.
    if (p.arrival_arc != used_sg_arc)
      add("arrival", f.id, "", p.arrival_arc, used_sg_arc,
          "recorded arrival arc differs from the used downlink");
    const int arrival = used_sg_arc >= 0 ? g.node(g.arc(used_sg_arc).tail).slot : -1;
    if (p.arrival_slot != arrival)
      add("arrival", f.id, "", p.arrival_slot, arrival,
          "recorded arrival slot differs from the downlink slot");
    const bool timely = arrival >= f.t_start && arrival <= f.t_end && arrival >= 0;
    const int expected_indicator = timely ? used_sg_arc : -1;
    if (p.sg_indicator_arc != expected_indicator)
      add("timeliness", f.id, "", p.sg_indicator_arc, expected_indicator,
          "success indicator disagrees with the arrival deadline check");
  }
  return rep;
}

}  // namespace sgin
