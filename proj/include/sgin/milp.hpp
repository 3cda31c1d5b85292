#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sgin/assignment.hpp"

namespace sgin {

struct MilpVar {
  std::string name;
  double lb = 0.0;
  double ub = 0.0;
  bool binary = false;
};

struct MilpRow {
  std::string name;
  std::vector<std::pair<int, double>> terms;  // (var index, coefficient)
  char sense = '<';                           // '<', '>', '='
  double rhs = 0.0;
};

// Mixed-integer formulation of the success-maximisation problem, kept as an
// explicit matrix so points can be checked row by row and the model can be
// exported in LP format.
struct MilpModel {
  std::vector<MilpVar> vars;
  std::vector<MilpRow> rows;
  std::map<int, double> objective;  // minimise
  double m_flow = 0.0;
  double m_time = 0.0;

  // per-flow variable lookup, -1 / missing when inadmissible
  std::vector<std::map<int, int>> x_of, lam_of, sg_of;  // arc -> var
  std::vector<int> y_of, t_of;

  int add_var(const std::string& name, double lb, double ub, bool binary) {
    vars.push_back({name, lb, ub, binary});
    return static_cast<int>(vars.size()) - 1;
  }
};

struct MilpOptions {
  double m_flow = 0.0;  // 0: use 2 * max volume
  double m_time = 0.0;  // 0: use max(2K, K + max deadline + 1)
};

// Admissible arcs for a flow: everything at or after its start slot, with
// departures restricted to its own source and downlinks to its destination.
inline bool arc_admissible(const MdrTeg& g, const Flow& f, int arc) {
  const Arc& a = g.arc(arc);
  const NodeRef& tail = g.node(a.tail);
  const NodeRef& head = g.node(a.head);
  const int slot = tail.slot > 0 ? tail.slot : head.slot;
  if (slot > 0 && slot < f.t_start) return false;
  if (a.kind == ArcKind::Os && tail.id != f.source) return false;
  if (a.kind == ArcKind::Os && kind_of(f.source) != NodeKind::Observation) return false;
  if (a.kind == ArcKind::Sg && !f.any_dest() && head.id != f.dest) return false;
  return true;
}

inline MilpModel build_milp(const MdrTeg& g, const std::vector<Flow>& flows,
                            const MilpOptions& opt = {}) {
  MilpModel m;
  const int K = g.horizon();
  bits_t max_vol = 0;
  int max_te = 0;
  for (const auto& f : flows) {
    check_flow(f);
    max_vol = std::max(max_vol, f.volume_bits);
    max_te = std::max(max_te, f.t_end);
  }
  m.m_flow = opt.m_flow > 0 ? opt.m_flow : 2.0 * static_cast<double>(max_vol);
  m.m_time = opt.m_time > 0 ? opt.m_time : std::max<double>(2.0 * K, K + max_te + 1);
  if (!flows.empty() && m.m_time <= K + max_te)
    throw config_error("build_milp: m_time must exceed horizon + latest deadline");

  const std::size_t F = flows.size();
  m.x_of.resize(F);
  m.lam_of.resize(F);
  m.sg_of.resize(F);
  m.y_of.assign(F, -1);
  m.t_of.assign(F, -1);

  for (std::size_t fi = 0; fi < F; ++fi) {
    const Flow& f = flows[fi];
    const std::string fs = "f" + std::to_string(fi);
    for (int arc = 0; arc < g.arc_count(); ++arc) {
      if (!arc_admissible(g, f, arc)) continue;
      const std::string as = "_a" + std::to_string(arc);
      m.x_of[fi][arc] = m.add_var("x_" + fs + as, 0.0, m.m_flow, false);
      m.lam_of[fi][arc] = m.add_var("l_" + fs + as, 0.0, 1.0, true);
      if (g.arc(arc).kind == ArcKind::Sg)
        m.sg_of[fi][arc] = m.add_var("s_" + fs + as, 0.0, 1.0, true);
    }
    m.y_of[fi] = m.add_var("y_" + fs, 0.0, 1.0, true);
    m.t_of[fi] = m.add_var("t_" + fs, 0.0, K, false);
  }

  for (std::size_t fi = 0; fi < F; ++fi)
    for (const auto& [arc, v] : m.sg_of[fi]) {
      (void)arc;
      m.objective[v] = -1.0;
    }

  auto row = [&](const std::string& name, char sense, double rhs) -> MilpRow& {
    m.rows.push_back({name, {}, sense, rhs});
    return m.rows.back();
  };

  // Shared capacity on every bounded arc.
  for (int arc = 0; arc < g.arc_count(); ++arc) {
    const Arc& a = g.arc(arc);
    if (a.capacity == kUnbounded) continue;
    MilpRow* r = nullptr;
    for (std::size_t fi = 0; fi < F; ++fi) {
      auto it = m.x_of[fi].find(arc);
      if (it == m.x_of[fi].end()) continue;
      if (!r) {
        const char* tag = a.kind == ArcKind::Store ? "capacity_store"
                          : a.kind == ArcKind::Sc  ? "capacity_compute"
                                                   : "capacity_trans";
        r = &row(std::string(tag) + "_a" + std::to_string(arc), '<',
                 static_cast<double>(a.capacity));
      }
      r->terms.push_back({it->second, 1.0});
    }
  }

  for (std::size_t fi = 0; fi < F; ++fi) {
    const Flow& f = flows[fi];
    const std::string fs = "f" + std::to_string(fi);

    // Indicator/volume coupling on every admissible arc.
    for (const auto& [arc, xv] : m.x_of[fi]) {
      const int lv = m.lam_of[fi][arc];
      auto& r1 = row("couple_lo_" + fs + "_a" + std::to_string(arc), '>', 0.0);
      r1.terms = {{xv, 1.0}, {lv, -1.0}};
      auto& r2 = row("couple_hi_" + fs + "_a" + std::to_string(arc), '<', 0.0);
      r2.terms = {{xv, 1.0}, {lv, -m.m_flow}};
    }

    // Single full-volume departure, tied to the routing indicator.
    {
      auto& r1 = row("source_" + fs, '=', 0.0);
      auto& r2 = row("source_volume_" + fs, '=', 0.0);
      for (const auto& [arc, xv] : m.x_of[fi]) {
        if (g.arc(arc).kind != ArcKind::Os) continue;
        r1.terms.push_back({m.lam_of[fi][arc], 1.0});
        r2.terms.push_back({xv, 1.0});
      }
      r1.terms.push_back({m.y_of[fi], -1.0});
      r2.terms.push_back({m.y_of[fi], -static_cast<double>(f.volume_bits)});
    }

    // Single downlink arrival.
    {
      auto& r = row("dest_" + fs, '=', 0.0);
      for (const auto& [arc, lv] : m.lam_of[fi])
        if (g.arc(arc).kind == ArcKind::Sg) r.terms.push_back({lv, 1.0});
      r.terms.push_back({m.y_of[fi], -1.0});
    }

    // Conditional conservation at each admissible Leo copy.
    for (int ni = 0; ni < g.node_count(); ++ni) {
      const NodeRef& nr = g.node(ni);
      if (nr.kind != VertexKind::Leo || nr.slot < f.t_start) continue;
      MilpRow ind{"conserve_ind_" + fs + "_n" + std::to_string(ni), {}, '=', 0.0};
      MilpRow once{"visit_once_" + fs + "_n" + std::to_string(ni), {}, '<', 1.0};
      MilpRow vol{"conserve_vol_" + fs + "_n" + std::to_string(ni), {}, '=', 0.0};
      bool any = false;
      for (int arc : g.in_arcs(ni)) {
        auto it = m.x_of[fi].find(arc);
        if (it == m.x_of[fi].end()) continue;
        any = true;
        vol.terms.push_back({it->second, 1.0});
        const ArcKind k = g.arc(arc).kind;
        if (k == ArcKind::Os || k == ArcKind::Ss || k == ArcKind::Store) {
          ind.terms.push_back({m.lam_of[fi][arc], 1.0});
          once.terms.push_back({m.lam_of[fi][arc], 1.0});
        }
      }
      for (int arc : g.out_arcs(ni)) {
        auto it = m.x_of[fi].find(arc);
        if (it == m.x_of[fi].end()) continue;
        any = true;
        vol.terms.push_back({it->second, -1.0});
        const ArcKind k = g.arc(arc).kind;
        if (k == ArcKind::Ss || k == ArcKind::Sg || k == ArcKind::Store)
          ind.terms.push_back({m.lam_of[fi][arc], -1.0});
      }
      if (!any) continue;
      m.rows.push_back(std::move(ind));
      m.rows.push_back(std::move(once));
      m.rows.push_back(std::move(vol));
    }

    if (g.with_compute()) {
      // Conditional compute inflow: when the compute indicator is up, the
      // compute-bound volume equals everything arriving at that copy.
      for (int ni = 0; ni < g.node_count(); ++ni) {
        const NodeRef& nr = g.node(ni);
        if (nr.kind != VertexKind::Leo || nr.slot < f.t_start) continue;
        const int sc = g.sc_arc(ni);
        if (sc < 0 || !m.x_of[fi].count(sc)) continue;
        const int xsc = m.x_of[fi][sc];
        const int lsc = m.lam_of[fi][sc];
        MilpRow lo{"compute_inflow_lo_" + fs + "_n" + std::to_string(ni), {}, '<', m.m_flow};
        MilpRow hi{"compute_inflow_hi_" + fs + "_n" + std::to_string(ni), {}, '<', m.m_flow};
        lo.terms = {{xsc, 1.0}, {lsc, m.m_flow}};
        hi.terms = {{xsc, -1.0}, {lsc, m.m_flow}};
        for (int arc : g.in_arcs(ni)) {
          const ArcKind k = g.arc(arc).kind;
          if (k != ArcKind::Os && k != ArcKind::Ss && k != ArcKind::Store) continue;
          auto it = m.x_of[fi].find(arc);
          if (it == m.x_of[fi].end()) continue;
          lo.terms.push_back({it->second, -1.0});
          hi.terms.push_back({it->second, 1.0});
        }
        m.rows.push_back(std::move(lo));
        m.rows.push_back(std::move(hi));

        // Per-copy split: the return is theta times the compressed input.
        const int cs = g.cs_arc(ni);
        auto itc = m.x_of[fi].find(cs);
        if (itc != m.x_of[fi].end()) {
          auto& r = row("compute_split_" + fs + "_n" + std::to_string(ni), '=', 0.0);
          r.terms = {{itc->second, 1.0}, {xsc, -f.theta}};
        }
      }
      // Loss accounting on the absorption arc and the compress-once rule.
      if (m.x_of[fi].count(g.ca_arc())) {
        auto& r = row("compute_loss_" + fs, '=', 0.0);
        r.terms.push_back({m.x_of[fi][g.ca_arc()], 1.0});
        MilpRow once{"compress_once_" + fs, {}, '<', 1.0};
        for (const auto& [arc, xv] : m.x_of[fi]) {
          if (g.arc(arc).kind == ArcKind::Sc) {
            r.terms.push_back({xv, -1.0});
            once.terms.push_back({m.lam_of[fi][arc], 1.0});
          } else if (g.arc(arc).kind == ArcKind::Cs) {
            r.terms.push_back({xv, 1.0});
          }
        }
        m.rows.push_back(std::move(once));
      }
    }

    // Arrival slot bound to the chosen downlink.
    {
      auto& r = row("arrival_" + fs, '=', 0.0);
      r.terms.push_back({m.t_of[fi], 1.0});
      for (const auto& [arc, lv] : m.lam_of[fi])
        if (g.arc(arc).kind == ArcKind::Sg)
          r.terms.push_back({lv, -static_cast<double>(g.node(g.arc(arc).tail).slot)});
    }

    // Deadline window rows per candidate downlink; the slot enters as a
    // constant, so the success indicator is forced to the timeliness of the
    // selected arrival and to 0 on unselected arcs.
    const double M = m.m_time;
    for (const auto& [arc, sv] : m.sg_of[fi]) {
      const double t = g.node(g.arc(arc).tail).slot;
      const int lv = m.lam_of[fi][arc];
      const std::string as = "_a" + std::to_string(arc);
      auto& r1 = row("deadline_early_" + fs + as, '<', (2.0 * M - f.t_start) / M);
      r1.terms = {{sv, 1.0}, {lv, -(t - M) / M}};
      auto& r2 = row("deadline_late_" + fs + as, '<', f.t_end / M);
      r2.terms = {{sv, 1.0}, {lv, -(M - t) / M}};
      auto& r3 = row("deadline_force_" + fs + as, '>', (1.0 + f.t_end - M) / M);
      r3.terms = {{sv, 1.0}, {lv, -(M - t) / M}};
    }
  }
  return m;
}

// --- point evaluation ---

struct MilpCheck {
  bool feasible = true;
  std::vector<std::string> violated;  // row or bound names
};

// Row tolerance is relative to the activity of the row at the point, so a
// rounded compression volume (off by at most half a bit out of ~1e8) passes
// while a flipped indicator or a megabit of excess is still caught.
inline MilpCheck evaluate_point(const MilpModel& m, const std::vector<double>& point,
                                double tol_abs = 1e-6, double tol_rel = 5e-8) {
  if (point.size() != m.vars.size())
    throw std::invalid_argument("evaluate_point: dimension mismatch");
  MilpCheck c;
  for (std::size_t i = 0; i < m.vars.size(); ++i) {
    const MilpVar& v = m.vars[i];
    const double x = point[i];
    const double t = tol_abs + tol_rel * std::max(std::abs(v.lb), std::abs(v.ub));
    if (x < v.lb - t || x > v.ub + t) {
      c.feasible = false;
      c.violated.push_back("bound:" + v.name);
    } else if (v.binary && std::abs(x - std::round(x)) > tol_abs) {
      c.feasible = false;
      c.violated.push_back("integrality:" + v.name);
    }
  }
  for (const auto& r : m.rows) {
    double lhs = 0.0;
    double activity = 0.0;
    for (const auto& [vi, coef] : r.terms) {
      const double term = coef * point[static_cast<std::size_t>(vi)];
      lhs += term;
      activity = std::max(activity, std::abs(term));
    }
    const double t = tol_abs + tol_rel * std::max(activity, std::abs(r.rhs));
    const bool ok = r.sense == '<'   ? lhs <= r.rhs + t
                    : r.sense == '>' ? lhs >= r.rhs - t
                                     : std::abs(lhs - r.rhs) <= t;
    if (!ok) {
      c.feasible = false;
      c.violated.push_back(r.name);
    }
  }
  return c;
}

inline std::vector<double> assignment_to_point(const MilpModel& m, const MdrTeg& g,
                                               const std::vector<Flow>& flows,
                                               const Assignment& a) {
  std::vector<double> pt(m.vars.size(), 0.0);
  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    const FlowPlan& p = a.plans[fi];
    for (const auto& [arc, amount] : p.x) {
      auto it = m.x_of[fi].find(arc);
      if (it == m.x_of[fi].end())
        throw std::invalid_argument("assignment_to_point: flow " + flows[fi].id +
                                    " uses an inadmissible arc");
      pt[static_cast<std::size_t>(it->second)] = static_cast<double>(amount);
      pt[static_cast<std::size_t>(m.lam_of[fi].at(arc))] = 1.0;
    }
    if (p.sg_indicator_arc >= 0)
      pt[static_cast<std::size_t>(m.sg_of[fi].at(p.sg_indicator_arc))] = 1.0;
    pt[static_cast<std::size_t>(m.y_of[fi])] = p.routed() ? 1.0 : 0.0;
    pt[static_cast<std::size_t>(m.t_of[fi])] =
        p.arrival_slot > 0 ? static_cast<double>(p.arrival_slot) : 0.0;
    (void)g;
  }
  return pt;
}

// --- LP file format ---

namespace detail {
inline std::string lp_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void lp_terms(std::ostream& os, const MilpModel& m,
                     const std::vector<std::pair<int, double>>& terms) {
  bool first = true;
  for (const auto& [vi, coef] : terms) {
    if (coef >= 0)
      os << (first ? "" : " + ") << lp_num(coef);
    else
      os << (first ? "- " : " - ") << lp_num(-coef);
    os << ' ' << m.vars[static_cast<std::size_t>(vi)].name;
    first = false;
  }
  if (first) os << "0 " << (m.vars.empty() ? "zero" : m.vars[0].name);
}
}  // namespace detail

inline void export_lp(const MilpModel& m, std::ostream& os) {
  os << "\\ time-expanded success maximisation\n";
  os << "Minimize\n obj: ";
  std::vector<std::pair<int, double>> obj(m.objective.begin(), m.objective.end());
  detail::lp_terms(os, m, obj);
  os << "\nSubject To\n";
  for (const auto& r : m.rows) {
    os << ' ' << r.name << ": ";
    detail::lp_terms(os, m, r.terms);
    os << ' ' << (r.sense == '<' ? "<=" : r.sense == '>' ? ">=" : "=") << ' '
       << detail::lp_num(r.rhs) << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : m.vars)
    os << ' ' << detail::lp_num(v.lb) << " <= " << v.name << " <= " << detail::lp_num(v.ub)
       << '\n';
  bool any_bin = false;
  for (const auto& v : m.vars)
    if (v.binary) {
      if (!any_bin) os << "Binaries\n";
      any_bin = true;
      os << ' ' << v.name << '\n';
    }
  os << "End\n";
}

inline void export_lp(const MilpModel& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw parse_error("export_lp: cannot open " + path);
  export_lp(m, f);
}

// Reads back the canonical subset emitted by export_lp. Used for round-trip
// checks and by the CLI to lint exported files.
inline MilpModel parse_lp(std::istream& is) {
  MilpModel m;
  std::map<std::string, int> var_idx;
  auto intern = [&](const std::string& name) {
    auto it = var_idx.find(name);
    if (it != var_idx.end()) return it->second;
    const int idx = m.add_var(name, 0.0, 0.0, false);
    var_idx[name] = idx;
    return idx;
  };

  enum class Sec { None, Obj, Rows, Bounds, Bins };
  Sec sec = Sec::None;
  std::string line;
  int lineno = 0;
  auto parse_terms = [&](std::string expr, std::vector<std::pair<int, double>>& out) {
    std::istringstream ts(expr);
    std::string tok;
    double sign = 1.0, coef = 1.0;
    bool have_coef = false;
    while (ts >> tok) {
      if (tok == "+") { sign = 1.0; continue; }
      if (tok == "-") { sign = -1.0; continue; }
      char* end = nullptr;
      const double val = std::strtod(tok.c_str(), &end);
      if (end && *end == '\0') {
        coef = val;
        have_coef = true;
        continue;
      }
      std::string name = tok;
      double c = sign * (have_coef ? coef : 1.0);
      if (name.size() && name[0] == '-') { c = -c; name = name.substr(1); }
      out.push_back({intern(name), c});
      sign = 1.0;
      coef = 1.0;
      have_coef = false;
    }
  };

  while (std::getline(is, line)) {
    ++lineno;
    if (line.size() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty() || trimmed[0] == '\\') continue;
    if (trimmed == "Minimize") { sec = Sec::Obj; continue; }
    if (trimmed == "Subject To") { sec = Sec::Rows; continue; }
    if (trimmed == "Bounds") { sec = Sec::Bounds; continue; }
    if (trimmed == "Binaries") { sec = Sec::Bins; continue; }
    if (trimmed == "End") break;
    switch (sec) {
      case Sec::Obj: {
        const auto colon = trimmed.find(':');
        std::vector<std::pair<int, double>> terms;
        parse_terms(colon == std::string::npos ? trimmed : trimmed.substr(colon + 1), terms);
        for (auto& [vi, c] : terms) m.objective[vi] += c;
        break;
      }
      case Sec::Rows: {
        const auto colon = trimmed.find(':');
        if (colon == std::string::npos)
          throw parse_error("LP line " + std::to_string(lineno) + ": missing row name");
        MilpRow r;
        r.name = trimmed.substr(0, colon);
        std::string body = trimmed.substr(colon + 1);
        std::size_t pos;
        if ((pos = body.find("<=")) != std::string::npos) r.sense = '<';
        else if ((pos = body.find(">=")) != std::string::npos) r.sense = '>';
        else if ((pos = body.find('=')) != std::string::npos) r.sense = '=';
        else throw parse_error("LP line " + std::to_string(lineno) + ": missing relation");
        const std::size_t skip = r.sense == '=' && body[pos] == '=' ? 1 : 2;
        r.rhs = std::stod(body.substr(pos + skip));
        parse_terms(body.substr(0, pos), r.terms);
        m.rows.push_back(std::move(r));
        break;
      }
      case Sec::Bounds: {
        std::istringstream bs(trimmed);
        double lb, ub;
        std::string le1, name, le2;
        if (!(bs >> lb >> le1 >> name >> le2 >> ub) || le1 != "<=" || le2 != "<=")
          throw parse_error("LP line " + std::to_string(lineno) + ": unsupported bound form");
        const int vi = intern(name);
        m.vars[static_cast<std::size_t>(vi)].lb = lb;
        m.vars[static_cast<std::size_t>(vi)].ub = ub;
        break;
      }
      case Sec::Bins: {
        std::istringstream bs(trimmed);
        std::string name;
        while (bs >> name) m.vars[static_cast<std::size_t>(intern(name))].binary = true;
        break;
      }
      case Sec::None:
        throw parse_error("LP line " + std::to_string(lineno) + ": content outside any section");
    }
  }
  return m;
}

inline MilpModel parse_lp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw parse_error("parse_lp: cannot open " + path);
  return parse_lp(f);
}

}  // namespace sgin
