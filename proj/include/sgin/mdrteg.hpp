#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sgin/core.hpp"
#include "sgin/topology.hpp"

namespace sgin {

// Vertex kinds of the time-expanded graph. Real nodes exist once per slot;
// the compute and absorption nodes exist exactly once regardless of the
// horizon, which keeps the expansion at K*N + 2 vertices.
enum class VertexKind { Observation, Leo, Ground, VirtualCompute, VirtualAbsorb };

// Arc categories: Os observation uplink, Ss inter-satellite, Sg downlink,
// Store cache between consecutive slots, Sc into compute, Cs compute
// return, Ca absorption of compression loss.
enum class ArcKind { Os, Ss, Sg, Store, Sc, Cs, Ca };

inline const char* to_string(ArcKind k) {
  switch (k) {
    case ArcKind::Os: return "os";
    case ArcKind::Ss: return "ss";
    case ArcKind::Sg: return "sg";
    case ArcKind::Store: return "store";
    case ArcKind::Sc: return "sc";
    case ArcKind::Cs: return "cs";
    case ArcKind::Ca: return "ca";
  }
  return "?";
}

inline const char* to_string(VertexKind k) {
  switch (k) {
    case VertexKind::Observation: return "observation";
    case VertexKind::Leo: return "leo";
    case VertexKind::Ground: return "ground";
    case VertexKind::VirtualCompute: return "compute";
    case VertexKind::VirtualAbsorb: return "absorb";
  }
  return "?";
}

struct NodeRef {
  VertexKind kind = VertexKind::Leo;
  std::string id;   // physical id; "com"/"absorb" for the virtual pair
  int slot = 0;     // 1..K for real copies, 0 for virtual nodes

  std::string label() const {
    if (slot == 0) return id;
    return id + "@" + std::to_string(slot);
  }
};

struct Arc {
  int tail = -1;
  int head = -1;
  ArcKind kind = ArcKind::Ss;
  bits_t capacity = 0;   // kUnbounded for Cs/Ca
  bits_t residual = 0;
};

struct GraphParams {
  double tau_s = 300.0;
  bits_t s_max_bits = mbits(1000);
  bits_t rho_bits = mbits(20);  // compute volume per resource unit
  int zeta_max = 20;            // resource units per (Leo, slot)
  bool with_compute = true;     // false builds the plain two-resource graph
};

class MdrTeg {
 public:
  const std::vector<NodeRef>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  Arc& arc(int i) { return arcs_[static_cast<std::size_t>(i)]; }
  const Arc& arc(int i) const { return arcs_[static_cast<std::size_t>(i)]; }
  const NodeRef& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int horizon() const { return horizon_; }
  double tau_s() const { return tau_s_; }
  bool with_compute() const { return vcom_ >= 0; }
  int vcom() const { return vcom_; }
  int vabs() const { return vabs_; }
  int ca_arc() const { return ca_arc_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int arc_count() const { return static_cast<int>(arcs_.size()); }

  const std::vector<int>& out_arcs(int node) const { return out_[static_cast<std::size_t>(node)]; }
  const std::vector<int>& in_arcs(int node) const { return in_[static_cast<std::size_t>(node)]; }

  int node_index(const std::string& id, int slot) const {
    auto it = node_idx_.find(key(id, slot));
    return it == node_idx_.end() ? -1 : it->second;
  }

  std::optional<int> arc_index(int tail, int head) const {
    auto it = arc_idx_.find((static_cast<std::uint64_t>(static_cast<std::uint32_t>(tail)) << 32) |
                            static_cast<std::uint32_t>(head));
    if (it == arc_idx_.end()) return std::nullopt;
    return it->second;
  }

  // Sc / Cs arc of a (Leo, slot) copy, -1 when absent.
  int sc_arc(int node) const { return sc_of_[static_cast<std::size_t>(node)]; }
  int cs_arc(int node) const { return cs_of_[static_cast<std::size_t>(node)]; }

  // Reciprocal-residual weight, in 1/Mbit: 0 on unbounded arcs, +inf at
  // zero residual. Comparisons like w <= 1/volume are unit-consistent with
  // the integer bit residuals.
  double weight(int arc_i) const {
    const Arc& a = arcs_[static_cast<std::size_t>(arc_i)];
    if (a.residual == kUnbounded) return 0.0;
    if (a.residual == 0) return kInfWeight;
    return static_cast<double>(kBitsPerMbit) / static_cast<double>(a.residual);
  }

  void consume(int arc_i, bits_t amount) {
    Arc& a = arcs_[static_cast<std::size_t>(arc_i)];
    if (amount <= 0) throw capacity_error("consume: amount must be positive");
    if (a.residual == kUnbounded) return;
    if (amount > a.residual) throw capacity_error("consume: amount exceeds residual");
    a.residual -= amount;
  }

  void release(int arc_i, bits_t amount) {
    Arc& a = arcs_[static_cast<std::size_t>(arc_i)];
    if (amount <= 0) throw capacity_error("release: amount must be positive");
    if (a.residual == kUnbounded) return;
    if (a.residual + amount > a.capacity) throw capacity_error("release: residual would exceed capacity");
    a.residual += amount;
  }

  std::vector<bits_t> residual_snapshot() const {
    std::vector<bits_t> snap(arcs_.size());
    for (std::size_t i = 0; i < arcs_.size(); ++i) snap[i] = arcs_[i].residual;
    return snap;
  }

  void restore_residuals(const std::vector<bits_t>& snap) {
    if (snap.size() != arcs_.size())
      throw capacity_error("restore_residuals: snapshot size mismatch");
    for (std::size_t i = 0; i < arcs_.size(); ++i) arcs_[i].residual = snap[i];
  }

  void reset_residuals() {
    for (auto& a : arcs_) a.residual = a.capacity == kUnbounded ? kUnbounded : a.capacity;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["horizon"] = horizon_;
    j["tau_s"] = tau_s_;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : nodes_)
      j["nodes"].push_back({{"kind", to_string(n.kind)}, {"id", n.id}, {"slot", n.slot}});
    j["arcs"] = nlohmann::json::array();
    for (const auto& a : arcs_) {
      nlohmann::json ja = {{"tail", a.tail}, {"head", a.head}, {"kind", to_string(a.kind)}};
      if (a.capacity == kUnbounded) {
        ja["capacity_bits"] = nullptr;
        ja["residual_bits"] = nullptr;
      } else {
        ja["capacity_bits"] = a.capacity;
        ja["residual_bits"] = a.residual;
      }
      j["arcs"].push_back(std::move(ja));
    }
    return j;
  }

 private:
  friend MdrTeg build_mdrteg(const std::vector<SlotTopology>&, const GraphParams&);

  static std::string key(const std::string& id, int slot) {
    return id + "\t" + std::to_string(slot);
  }

  int add_node(VertexKind kind, const std::string& id, int slot) {
    nodes_.push_back({kind, id, slot});
    out_.emplace_back();
    in_.emplace_back();
    sc_of_.push_back(-1);
    cs_of_.push_back(-1);
    const int idx = static_cast<int>(nodes_.size()) - 1;
    node_idx_[key(id, slot)] = idx;
    return idx;
  }

  int add_arc(int tail, int head, ArcKind kind, bits_t cap) {
    arcs_.push_back({tail, head, kind, cap, cap});
    const int idx = static_cast<int>(arcs_.size()) - 1;
    out_[static_cast<std::size_t>(tail)].push_back(idx);
    in_[static_cast<std::size_t>(head)].push_back(idx);
    arc_idx_[(static_cast<std::uint64_t>(static_cast<std::uint32_t>(tail)) << 32) |
             static_cast<std::uint32_t>(head)] = idx;
    return idx;
  }

  std::vector<NodeRef> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> out_, in_;
  std::vector<int> sc_of_, cs_of_;
  std::unordered_map<std::string, int> node_idx_;
  std::unordered_map<std::uint64_t, int> arc_idx_;
  int horizon_ = 0;
  double tau_s_ = 0.0;
  int vcom_ = -1, vabs_ = -1, ca_arc_ = -1;
};

// Expands per-slot snapshots into the time-expanded graph: one copy of every
// real node per slot, storage arcs between consecutive Leo copies, one Sc/Cs
// pair per (Leo, slot), and a single compute/absorb node pair overall.
inline MdrTeg build_mdrteg(const std::vector<SlotTopology>& slots, const GraphParams& params) {
  if (slots.empty()) throw construction_error("build_mdrteg: no slots");
  if (params.tau_s <= 0.0) throw construction_error("build_mdrteg: tau must be positive");
  if (params.s_max_bits < 0 || params.rho_bits < 0 || params.zeta_max < 0)
    throw construction_error("build_mdrteg: negative capacity parameter");
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].slot != static_cast<int>(i) + 1)
      throw construction_error("build_mdrteg: slots must be numbered contiguously from 1, got " +
                               std::to_string(slots[i].slot) + " at position " + std::to_string(i + 1));

  MdrTeg g;
  g.horizon_ = static_cast<int>(slots.size());
  g.tau_s_ = params.tau_s;

  std::set<std::string> universe;
  for (const auto& st : slots)
    for (const auto& [key, rate] : st.rate_bps) {
      (void)rate;
      universe.insert(key.first);
      universe.insert(key.second);
    }
  if (universe.empty()) throw construction_error("build_mdrteg: topology has no nodes");

  auto vk = [](const std::string& id) {
    switch (kind_of(id)) {
      case NodeKind::Observation: return VertexKind::Observation;
      case NodeKind::Ground: return VertexKind::Ground;
      default: return VertexKind::Leo;
    }
  };

  for (int t = 1; t <= g.horizon_; ++t)
    for (const auto& id : universe) g.add_node(vk(id), id, t);
  if (params.with_compute) {
    g.vcom_ = g.add_node(VertexKind::VirtualCompute, "com", 0);
    g.vabs_ = g.add_node(VertexKind::VirtualAbsorb, "absorb", 0);
  }

  for (const auto& st : slots)
    for (const auto& [key, rate] : st.rate_bps) {
      const int tail = g.node_index(key.first, st.slot);
      const int head = g.node_index(key.second, st.slot);
      const VertexKind tk = g.node(tail).kind, hk = g.node(head).kind;
      ArcKind ak;
      if (tk == VertexKind::Observation && hk == VertexKind::Leo) ak = ArcKind::Os;
      else if (tk == VertexKind::Leo && hk == VertexKind::Leo) ak = ArcKind::Ss;
      else if (tk == VertexKind::Leo && hk == VertexKind::Ground) ak = ArcKind::Sg;
      else
        throw construction_error("build_mdrteg: illegal link " + key.first + "->" + key.second +
                                 " in slot " + std::to_string(st.slot));
      const bits_t cap = static_cast<bits_t>(std::llround(rate * params.tau_s));
      g.add_arc(tail, head, ak, cap);
    }

  // Storage chains live on Leo copies only: before the first and after the
  // last slot nothing can be cached.
  for (const auto& id : universe) {
    if (vk(id) != VertexKind::Leo) continue;
    for (int t = 1; t < g.horizon_; ++t)
      g.add_arc(g.node_index(id, t), g.node_index(id, t + 1), ArcKind::Store, params.s_max_bits);
  }

  if (params.with_compute) {
    const bits_t ccap = params.rho_bits * params.zeta_max;
    for (int t = 1; t <= g.horizon_; ++t)
      for (const auto& id : universe) {
        if (vk(id) != VertexKind::Leo) continue;
        const int ni = g.node_index(id, t);
        g.sc_of_[static_cast<std::size_t>(ni)] = g.add_arc(ni, g.vcom_, ArcKind::Sc, ccap);
        g.cs_of_[static_cast<std::size_t>(ni)] = g.add_arc(g.vcom_, ni, ArcKind::Cs, kUnbounded);
      }
    g.ca_arc_ = g.add_arc(g.vcom_, g.vabs_, ArcKind::Ca, kUnbounded);
  }
  return g;
}

}  // namespace sgin
