#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sgin/exact.hpp"
#include "sgin/scheduler.hpp"

namespace sgin {

struct SrccConfig {
  int n_max = 100;
  double beta0 = 2.0;          // step scale, halved after repeated stalls
  double eps_gap_pct = 0.0;    // stop once the relative gap reaches this
  double min_step = 0.01;      // stop when no family moves at least this much
  double beta_floor = 1e-12;
  int stall_limit = 3;
  double mu0 = 1.0;            // initial value of every multiplier
  // Called once per iteration with the multipliers used and the heuristic
  // outcome they produced, before the multipliers move.
  std::function<void(int, const Multipliers&, const HeurOutcome&)> observer;
};

struct BoundsRow {
  int iter = 0;
  double ub = 0.0;
  double lb = 0.0;
  bool certified = false;  // lower bound came from an exact subproblem
  double gap_pct = 0.0;
  double beta = 0.0;
  double step_norm = 0.0;
  std::string reason;  // set on the row that stopped the loop
};

struct SolveResult {
  Assignment assignment;
  std::vector<FlowStatus> status;
  int success_count = 0;
  double objective = 0.0;  // -success_count
  double ub = 0.0;
  double lb = 0.0;
  double gap_pct = 0.0;
  int iterations = 0;
  bool certified = false;
  std::string stop_reason;
  std::vector<BoundsRow> trace;
};

inline double relative_gap_pct(double ub, double lb) {
  return (ub - lb) / std::max(std::abs(ub), 1.0) * 100.0;
}

// Value and subgradient of the relaxed objective at a routing (the priced
// subproblem's solution or a heuristic stand-in) and the closed-form grant
// subproblem. Grants go to the cheapest admissible downlink of each flow
// when its coefficient is negative; ties keep the grant unset.
struct DualParts {
  double value = 0.0, p1 = 0.0, p2 = 0.0, constant = 0.0;
  std::map<MultKey, std::array<double, 3>> subgrad;
};

inline DualParts evaluate_dual(const MdrTeg& g, const std::vector<Flow>& flows,
                               const Multipliers& mult, const Assignment& routing) {
  if (routing.plans.size() != flows.size())
    throw std::invalid_argument("evaluate_dual: routing/flow size mismatch");
  DualParts d;
  const double M = mult.m_time;

  for (const auto& [key, m] : mult.mu) {
    const Flow& f = flows[key.flow];
    const double J = mult.multiplicity.at(key);
    d.constant += J * (m[0] * (f.t_start - 2.0 * M) / M - m[1] * f.t_end / M +
                       m[2] * (1.0 + f.t_end - M) / M);
    d.subgrad[key] = {-J * (2.0 * M - f.t_start) / M, -J * f.t_end / M,
                      J * (f.t_end + 1.0 - M) / M};
  }

  // grant subproblem, one pick per flow
  std::vector<const MultKey*> grant(flows.size(), nullptr);
  {
    auto it = mult.mu.begin();
    while (it != mult.mu.end()) {
      const std::size_t fi = it->first.flow;
      const MultKey* pick = nullptr;
      double best = 0.0;
      for (; it != mult.mu.end() && it->first.flow == fi; ++it) {
        const double c = -1.0 + it->second[0] + it->second[1] - it->second[2];
        if (c < 0.0 && (!pick || c < best)) {
          pick = &it->first;
          best = c;
        }
      }
      if (pick) {
        grant[fi] = pick;
        d.p2 += best;
      }
    }
  }

  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    for (const auto& [arc, amount] : routing.plans[fi].x) {
      if (amount <= 0 || g.arc(arc).kind != ArcKind::Sg) continue;
      const NodeRef& tail = g.node(g.arc(arc).tail);
      const MultKey key{fi, tail.slot, tail.id};
      if (!mult.has(key)) continue;
      const double t = tail.slot;
      d.p1 += mult.route_coef(key) * (M - t) / M;
      auto& sg = d.subgrad[key];
      sg[0] += -(t - M) / M;
      sg[1] += -(M - t) / M;
      sg[2] += (M - t) / M;
    }
    if (grant[fi]) {
      auto& sg = d.subgrad[*grant[fi]];
      sg[0] += 1.0;
      sg[1] += 1.0;
      sg[2] += -1.0;
    }
  }
  d.value = d.p1 + d.p2 + d.constant;
  return d;
}

namespace detail {

// Shared multiplier-update loop. `inner` runs the per-iteration subproblem
// and reports (routing for the subgradient, upper-bound candidate or NaN,
// whether the lower bound is certified).
struct IterOutcome {
  Assignment routing;
  double ub_candidate = std::numeric_limits<double>::quiet_NaN();
  bool certified = false;
};

template <typename Inner>
inline void subgradient_loop(const MdrTeg& g, const std::vector<Flow>& flows,
                             const SrccConfig& cfg, Multipliers& mult, SolveResult& res,
                             Inner&& inner) {
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double beta = cfg.beta0;
  int stall = 0;
  bool envelope_certified = true;  // every value folded into lb so far was exact

  for (int iter = 1; iter <= cfg.n_max; ++iter) {
    res.iterations = iter;
    IterOutcome it = inner(iter, mult);

    const double prev_ub = ub;
    if (!std::isnan(it.ub_candidate)) ub = std::min(ub, it.ub_candidate);

    const DualParts d = evaluate_dual(g, flows, mult, it.routing);
    lb = std::max(lb, d.value);
    envelope_certified = envelope_certified && it.certified;

    BoundsRow row;
    row.iter = iter;
    row.ub = ub;
    row.lb = lb;
    row.certified = envelope_certified;
    row.gap_pct = relative_gap_pct(ub, lb);
    row.beta = beta;

    std::string reason;
    if (row.gap_pct <= cfg.eps_gap_pct) reason = "gap";

    if (reason.empty()) {
      std::array<double, 3> norm2{0.0, 0.0, 0.0};
      for (const auto& [key, sg] : d.subgrad) {
        (void)key;
        for (int l = 0; l < 3; ++l) norm2[static_cast<std::size_t>(l)] += sg[static_cast<std::size_t>(l)] * sg[static_cast<std::size_t>(l)];
      }
      if (norm2[0] == 0.0 && norm2[1] == 0.0 && norm2[2] == 0.0) {
        reason = "stationary";
      } else {
        double step_norm = 0.0;
        for (int l = 0; l < 3; ++l) {
          const auto li = static_cast<std::size_t>(l);
          if (norm2[li] == 0.0) continue;
          const double alpha = beta * (ub - lb) / norm2[li];
          for (auto& [key, m] : mult.mu) {
            const double delta = alpha * d.subgrad.at(key)[li];
            m[li] = std::max(0.0, m[li] + delta);
            step_norm = std::max(step_norm, std::abs(delta));
          }
        }
        row.step_norm = step_norm;
        if (step_norm < cfg.min_step) reason = "min_step";
      }
    }

    if (reason.empty()) {
      if (ub < prev_ub) stall = 0;
      else if (++stall >= cfg.stall_limit) {
        beta *= 0.5;
        stall = 0;
      }
      if (beta < cfg.beta_floor) reason = "beta_underflow";
    }
    if (reason.empty() && iter == cfg.n_max) reason = "n_max";

    row.reason = reason;
    res.trace.push_back(row);
    if (!reason.empty()) {
      res.stop_reason = reason;
      break;
    }
  }
  res.ub = res.trace.empty() ? 0.0 : res.trace.back().ub;
  res.lb = res.trace.empty() ? 0.0 : res.trace.back().lb;
  res.gap_pct = res.trace.empty() ? 0.0 : res.trace.back().gap_pct;
}

}  // namespace detail

// Relaxation-guided heuristic: per iteration the scheduler plus retry pass
// supplies both the feasible point and the stand-in routing for the
// subgradient; multipliers then steer later passes. The best feasible
// assignment seen is replayed into the graph before returning.
inline SolveResult srcc(MdrTeg& g, const std::vector<Flow>& flows, const SrccConfig& cfg = {}) {
  SolveResult res;
  res.status.assign(flows.size(), FlowStatus::Unrouted);
  res.assignment.plans.resize(flows.size());

  const std::vector<bits_t> pristine = g.residual_snapshot();
  Multipliers mult = build_multipliers(g, flows, cfg.mu0);

  double best_ub = std::numeric_limits<double>::infinity();
  detail::subgradient_loop(
      g, flows, cfg, mult, res, [&](int iter, const Multipliers& m) {
        g.restore_residuals(pristine);
        HeurOutcome h = lsa(g, flows, m);
        if (cfg.observer) cfg.observer(iter, m, h);
        detail::IterOutcome it;
        it.routing = h.routing;
        it.ub_candidate = -static_cast<double>(h.successes);
        it.certified = false;
        if (it.ub_candidate < best_ub) {
          best_ub = it.ub_candidate;
          res.assignment = h.assignment;
          res.status = h.status;
        }
        return it;
      });

  g.restore_residuals(pristine);
  apply_assignment(g, res.assignment);
  res.success_count = res.assignment.success_count();
  res.objective = -res.success_count;
  res.certified = false;
  return res;
}

struct EsalrConfig {
  SrccConfig sub;
  ExactOptions exact;
};

// Exhaustive-anchor variant: the feasible point is the certified optimum of
// the success problem, and each iteration prices the routing subproblem
// exactly, so the recorded lower bounds are true bounds.
inline SolveResult esalr(MdrTeg& g, const std::vector<Flow>& flows, const EsalrConfig& cfg = {}) {
  SolveResult res;
  const std::vector<bits_t> pristine = g.residual_snapshot();

  ExactResult anchor = exact_solve(g, flows, cfg.exact);
  res.assignment = anchor.assignment;
  res.status.assign(flows.size(), FlowStatus::Unrouted);
  for (std::size_t fi = 0; fi < flows.size(); ++fi)
    if (anchor.assignment.plans[fi].sg_indicator_arc >= 0) res.status[fi] = FlowStatus::Success;
  res.certified = anchor.certified;

  Multipliers mult = build_multipliers(g, flows, cfg.sub.mu0);
  const double M = mult.m_time;
  detail::subgradient_loop(
      g, flows, cfg.sub, mult, res, [&](int iter, const Multipliers& m) {
        ExactOptions opt = cfg.exact;
        opt.cost = [&](std::size_t fi, const FlowPlan& p) {
          if (p.arrival_arc < 0) return 0.0;
          const NodeRef& tail = g.node(g.arc(p.arrival_arc).tail);
          const MultKey key{fi, tail.slot, tail.id};
          if (!m.has(key)) return 0.0;
          return m.route_coef(key) * (M - tail.slot) / M;
        };
        ExactResult priced = exact_solve(g, flows, opt);
        detail::IterOutcome it;
        it.routing = priced.assignment;
        it.certified = priced.certified;
        if (iter == 1) it.ub_candidate = anchor.objective;
        return it;
      });

  g.restore_residuals(pristine);
  apply_assignment(g, res.assignment);
  res.success_count = res.assignment.success_count();
  res.objective = -res.success_count;
  return res;
}

}  // namespace sgin
