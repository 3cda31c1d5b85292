#pragma once

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "sgin/flow.hpp"
#include "sgin/mdrteg.hpp"

namespace sgin {

// One multiplier triple per realizable downlink opportunity (flow, slot,
// relay satellite). The triple prices the three deadline couplings between
// the routing indicator and the on-time indicator; ground stations reachable
// from the same satellite and slot share the triple, with the multiplicity
// kept so constants and subgradients still sum over the full family.
struct MultKey {
  std::size_t flow = 0;
  int slot = 0;
  std::string leo;

  bool operator<(const MultKey& o) const {
    return std::tie(flow, slot, leo) < std::tie(o.flow, o.slot, o.leo);
  }
  bool operator==(const MultKey& o) const {
    return flow == o.flow && slot == o.slot && leo == o.leo;
  }
};

struct Multipliers {
  std::map<MultKey, std::array<double, 3>> mu;
  std::map<MultKey, int> multiplicity;  // ground stations behind the key
  double m_time = 0.0;

  const std::array<double, 3>& at(const MultKey& k) const { return mu.at(k); }
  bool has(const MultKey& k) const { return mu.count(k) > 0; }

  // objective weight of the routing indicator at this downlink
  double route_coef(const MultKey& k) const {
    const auto& m = mu.at(k);
    return m[0] - m[1] + m[2];
  }
  // objective weight of the on-time indicator at this downlink
  double success_coef(const MultKey& k) const {
    const auto& m = mu.at(k);
    return -1.0 + m[0] + m[1] - m[2];
  }
};

inline double horizon_big_m(int K, const std::vector<Flow>& flows) {
  int max_te = 0;
  for (const auto& f : flows) max_te = std::max(max_te, f.t_end);
  return std::max<double>(2.0 * K, K + max_te + 1);
}

inline Multipliers build_multipliers(const MdrTeg& g, const std::vector<Flow>& flows,
                                     double init = 1.0) {
  Multipliers m;
  m.m_time = horizon_big_m(g.horizon(), flows);
  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    const Flow& f = flows[fi];
    for (int ni = 0; ni < g.node_count(); ++ni) {
      const NodeRef& nr = g.node(ni);
      if (nr.kind != VertexKind::Leo || nr.slot < f.t_start) continue;
      int grounds = 0;
      for (int arc : g.out_arcs(ni)) {
        const Arc& a = g.arc(arc);
        if (a.kind != ArcKind::Sg) continue;
        if (!f.any_dest() && g.node(a.head).id != f.dest) continue;
        ++grounds;
      }
      if (grounds == 0) continue;
      const MultKey key{fi, nr.slot, nr.id};
      m.mu[key] = {init, init, init};
      m.multiplicity[key] = grounds;
    }
  }
  return m;
}

}  // namespace sgin
