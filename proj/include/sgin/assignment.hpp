#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgin/flow.hpp"
#include "sgin/mdrteg.hpp"

namespace sgin {

// Per-flow slice of a solution. lambda is implicit: an arc carries the flow
// iff it appears in x with a positive amount. sg_indicator_arc is the arc
// whose timely-success indicator is 1 (-1 for none); on finalized solutions
// it coincides with the arrival arc iff the arrival met the deadline, but
// relaxation subproblems may set it independently.
struct FlowPlan {
  std::map<int, bits_t> x;       // arc index -> bits carried
  int arrival_slot = -1;
  int arrival_arc = -1;
  int sg_indicator_arc = -1;
  int compress_node = -1;        // Leo copy where the flow was compressed

  bool routed() const { return !x.empty(); }
  bool lambda(int arc) const {
    auto it = x.find(arc);
    return it != x.end() && it->second > 0;
  }
  void clear() { *this = FlowPlan{}; }
};

struct Assignment {
  std::vector<FlowPlan> plans;  // parallel to the flow vector

  explicit Assignment(std::size_t n_flows = 0) : plans(n_flows) {}

  int success_count() const {
    int s = 0;
    for (const auto& p : plans) s += p.sg_indicator_arc >= 0 ? 1 : 0;
    return s;
  }
};

// Success objective: number of flows whose timely-success indicator is set.
inline int objective(const std::vector<Flow>& flows, const Assignment& a) {
  if (a.plans.size() != flows.size())
    throw std::invalid_argument("objective: assignment/flow size mismatch");
  return a.success_count();
}

inline void apply_assignment(MdrTeg& g, const Assignment& a) {
  for (const auto& p : a.plans)
    for (const auto& [arc, amount] : p.x) g.consume(arc, amount);
}

inline void release_assignment(MdrTeg& g, const Assignment& a) {
  for (const auto& p : a.plans)
    for (const auto& [arc, amount] : p.x) g.release(arc, amount);
}

inline void release_plan(MdrTeg& g, FlowPlan& p) {
  for (const auto& [arc, amount] : p.x) g.release(arc, amount);
  p.clear();
}

// --- JSON round trip, arcs referenced by node labels ("s1@2", "com") ---

inline nlohmann::json assignment_to_json(const MdrTeg& g, const std::vector<Flow>& flows,
                                         const Assignment& a) {
  nlohmann::json j;
  j["flows"] = nlohmann::json::array();
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const FlowPlan& p = a.plans[i];
    nlohmann::json jf;
    jf["id"] = flows[i].id;
    jf["arcs"] = nlohmann::json::array();
    for (const auto& [arc, amount] : p.x) {
      const Arc& ar = g.arc(arc);
      jf["arcs"].push_back({{"tail", g.node(ar.tail).label()},
                            {"head", g.node(ar.head).label()},
                            {"x_bits", amount}});
    }
    jf["arrival_slot"] = p.arrival_slot;
    jf["sg_success"] = p.sg_indicator_arc >= 0;
    if (p.compress_node >= 0) jf["compressed_at"] = g.node(p.compress_node).label();
    j["flows"].push_back(std::move(jf));
  }
  return j;
}

namespace detail {
inline int resolve_label(const MdrTeg& g, const std::string& label) {
  const auto at = label.rfind('@');
  int idx = -1;
  if (at == std::string::npos) {
    idx = g.node_index(label, 0);
  } else {
    try {
      idx = g.node_index(label.substr(0, at), std::stoi(label.substr(at + 1)));
    } catch (const std::exception&) {
      idx = -1;
    }
  }
  if (idx < 0) throw parse_error("assignment: unknown node label '" + label + "'");
  return idx;
}
}  // namespace detail

inline Assignment assignment_from_json(const MdrTeg& g, const std::vector<Flow>& flows,
                                       const nlohmann::json& j) {
  Assignment a(flows.size());
  if (!j.contains("flows") || !j["flows"].is_array())
    throw parse_error("assignment: missing 'flows' array");
  for (const auto& jf : j["flows"]) {
    const std::string id = jf.at("id").get<std::string>();
    std::size_t fi = flows.size();
    for (std::size_t i = 0; i < flows.size(); ++i)
      if (flows[i].id == id) { fi = i; break; }
    if (fi == flows.size()) throw parse_error("assignment: unknown flow id '" + id + "'");
    FlowPlan& p = a.plans[fi];
    for (const auto& ja : jf.at("arcs")) {
      const int tail = detail::resolve_label(g, ja.at("tail").get<std::string>());
      const int head = detail::resolve_label(g, ja.at("head").get<std::string>());
      const auto arc = g.arc_index(tail, head);
      if (!arc)
        throw parse_error("assignment: no arc " + ja.at("tail").get<std::string>() + " -> " +
                          ja.at("head").get<std::string>());
      const bits_t amount = ja.at("x_bits").get<bits_t>();
      if (amount <= 0) throw parse_error("assignment: x_bits must be positive");
      p.x[*arc] += amount;
      if (g.arc(*arc).kind == ArcKind::Sg) {
        p.arrival_arc = *arc;
        p.arrival_slot = g.node(g.arc(*arc).tail).slot;
      }
      if (g.arc(*arc).kind == ArcKind::Sc) p.compress_node = g.arc(*arc).tail;
    }
    if (jf.contains("arrival_slot") && jf["arrival_slot"].get<int>() >= 0)
      p.arrival_slot = jf["arrival_slot"].get<int>();
    if (jf.value("sg_success", false) && p.arrival_arc >= 0)
      p.sg_indicator_arc = p.arrival_arc;
  }
  return a;
}

}  // namespace sgin
