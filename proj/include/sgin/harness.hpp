#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgin/baselines.hpp"
#include "sgin/flow.hpp"
#include "sgin/topology.hpp"
#include "sgin/validate.hpp"

namespace sgin {

// Raised when a produced assignment fails the semantic checks every run is
// subjected to; distinct from config errors so callers can map exit codes.
class validation_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CapsMbit {
  double isl = 300.0;
  double sg = 500.0;
  double store = 1000.0;
  double compute = 400.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string param_set = "value1";  // value1 | value2 | custom
  int horizon_slots = 20;
  double tau_s = 300.0;
  CapsMbit caps;
  double volume_mbit_min = 100.0;
  double volume_mbit_max = 140.0;
  int delay_slots = 12;
  double rho_mbit = 20.0;

  // topology: either a simplified constellation or an adjacency file
  std::string topology_source = "generate";  // generate | csv
  std::string topology_csv;
  ConstellationSpec constellation;
  std::vector<GroundStation> stations;

  std::vector<int> flow_counts{10};
  std::vector<double> thetas{0.5};
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> algorithms{"srcc", "ja", "crpaa"};
  int repetitions = 1;

  SrccConfig srcc_cfg;
  ExactOptions exact_budget;
};

inline std::vector<GroundStation> default_stations() {
  return {{"g_kiamusze", 43.83, 130.35},
          {"g_xiongan", 38.90, 116.00},
          {"g_korla", 41.68, 80.06},
          {"g_tongchuan", 34.90, 108.93},
          {"g_hainan", 19.65, 110.30}};
}

inline void apply_param_set(ExperimentConfig& cfg) {
  if (cfg.param_set == "value1") {
    cfg.caps = {300.0, 500.0, 1000.0, 400.0};
    cfg.volume_mbit_min = 100.0;
    cfg.volume_mbit_max = 140.0;
    cfg.delay_slots = 12;
    cfg.horizon_slots = 20;
  } else if (cfg.param_set == "value2") {
    cfg.caps = {3000.0, 5000.0, 1000.0, 4000.0};
    cfg.volume_mbit_min = 100.0;
    cfg.volume_mbit_max = 100.0;
    cfg.delay_slots = 10;
    cfg.horizon_slots = 20;
  } else if (cfg.param_set != "custom") {
    throw config_error("param_set must be value1, value2 or custom, got \"" + cfg.param_set +
                       "\"");
  }
}

inline void check_config(const ExperimentConfig& cfg) {
  if (cfg.horizon_slots < cfg.delay_slots)
    throw config_error("horizon_slots must be at least delay_slots");
  if (cfg.horizon_slots <= 0) throw config_error("horizon_slots must be positive");
  if (cfg.tau_s <= 0) throw config_error("tau_s must be positive");
  if (cfg.delay_slots <= 0) throw config_error("delay_slots must be positive");
  if (cfg.volume_mbit_min <= 0 || cfg.volume_mbit_max < cfg.volume_mbit_min)
    throw config_error("volume range must satisfy 0 < min <= max");
  if (cfg.rho_mbit <= 0) throw config_error("rho_mbit must be positive");
  if (cfg.caps.isl <= 0 || cfg.caps.sg <= 0 || cfg.caps.store < 0 || cfg.caps.compute < 0)
    throw config_error("capacities must be positive (store/compute may be zero)");
  if (cfg.flow_counts.empty()) throw config_error("flow_counts must be non-empty");
  for (int f : cfg.flow_counts)
    if (f <= 0) throw config_error("flow counts must be positive");
  for (double th : cfg.thetas)
    if (!(th > 0.0 && th <= 1.0)) throw config_error("theta values must lie in (0,1]");
  if (cfg.thetas.empty()) throw config_error("thetas must be non-empty");
  if (cfg.seeds.empty()) throw config_error("seeds must be non-empty");
  if (cfg.repetitions <= 0) throw config_error("repetitions must be positive");
  if (cfg.topology_source != "generate" && cfg.topology_source != "csv")
    throw config_error("topology.source must be generate or csv");
  if (cfg.topology_source == "csv" && cfg.topology_csv.empty())
    throw config_error("topology.source csv requires topology.csv_path");
  for (const auto& a : cfg.algorithms)
    if (a != "srcc" && a != "ja" && a != "crpaa" && a != "esalr")
      throw config_error("unknown algorithm \"" + a + "\"");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.stations = default_stations();
  cfg.name = j.value("name", cfg.name);
  cfg.param_set = j.value("param_set", cfg.param_set);
  apply_param_set(cfg);

  cfg.horizon_slots = j.value("horizon_slots", cfg.horizon_slots);
  cfg.tau_s = j.value("tau_s", cfg.tau_s);
  if (j.contains("caps_mbit")) {
    const auto& c = j.at("caps_mbit");
    cfg.caps.isl = c.value("isl", cfg.caps.isl);
    cfg.caps.sg = c.value("sg", cfg.caps.sg);
    cfg.caps.store = c.value("store", cfg.caps.store);
    cfg.caps.compute = c.value("compute", cfg.caps.compute);
  }
  if (j.contains("volume_mbit")) {
    const auto& v = j.at("volume_mbit");
    if (!v.is_array() || v.size() != 2)
      throw config_error("volume_mbit must be a [min,max] pair");
    cfg.volume_mbit_min = v[0].get<double>();
    cfg.volume_mbit_max = v[1].get<double>();
  }
  cfg.delay_slots = j.value("delay_slots", cfg.delay_slots);
  cfg.rho_mbit = j.value("rho_mbit", cfg.rho_mbit);

  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    cfg.topology_source = t.value("source", cfg.topology_source);
    cfg.topology_csv = t.value("csv_path", cfg.topology_csv);
    cfg.constellation.planes = t.value("planes", cfg.constellation.planes);
    cfg.constellation.sats_per_plane = t.value("sats_per_plane", cfg.constellation.sats_per_plane);
    cfg.constellation.altitude_km = t.value("altitude_km", cfg.constellation.altitude_km);
    cfg.constellation.inclination_deg =
        t.value("inclination_deg", cfg.constellation.inclination_deg);
    cfg.constellation.n_observation = t.value("n_observation", cfg.constellation.n_observation);
    cfg.constellation.observation_alt_offset_km =
        t.value("observation_alt_offset_km", cfg.constellation.observation_alt_offset_km);
    cfg.constellation.elevation_mask_deg =
        t.value("elevation_mask_deg", cfg.constellation.elevation_mask_deg);
    cfg.constellation.seed = t.value("seed", cfg.constellation.seed);
    if (t.contains("stations")) {
      cfg.stations.clear();
      for (const auto& s : t.at("stations"))
        cfg.stations.push_back({s.at("id").get<std::string>(), s.at("lat").get<double>(),
                                s.at("lon").get<double>()});
    }
  }

  if (j.contains("flows")) cfg.flow_counts = j.at("flows").get<std::vector<int>>();
  if (j.contains("thetas")) cfg.thetas = j.at("thetas").get<std::vector<double>>();
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  else if (j.contains("seed")) cfg.seeds = {j.at("seed").get<std::uint64_t>()};
  if (j.contains("algorithms")) cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  cfg.repetitions = j.value("repetitions", cfg.repetitions);

  if (j.contains("srcc")) {
    const auto& s = j.at("srcc");
    cfg.srcc_cfg.n_max = s.value("n_max", cfg.srcc_cfg.n_max);
    cfg.srcc_cfg.beta0 = s.value("beta0", cfg.srcc_cfg.beta0);
    cfg.srcc_cfg.eps_gap_pct = s.value("eps_gap_pct", cfg.srcc_cfg.eps_gap_pct);
    cfg.srcc_cfg.min_step = s.value("min_step", cfg.srcc_cfg.min_step);
    cfg.srcc_cfg.beta_floor = s.value("beta_floor", cfg.srcc_cfg.beta_floor);
    cfg.srcc_cfg.stall_limit = s.value("stall_limit", cfg.srcc_cfg.stall_limit);
    cfg.srcc_cfg.mu0 = s.value("mu0", cfg.srcc_cfg.mu0);
  }
  if (j.contains("exact_budget")) {
    const auto& e = j.at("exact_budget");
    cfg.exact_budget.max_plans_per_flow =
        e.value("max_plans_per_flow", cfg.exact_budget.max_plans_per_flow);
    cfg.exact_budget.max_bb_nodes = e.value("max_bb_nodes", cfg.exact_budget.max_bb_nodes);
  }
  check_config(cfg);
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["param_set"] = cfg.param_set;
  j["horizon_slots"] = cfg.horizon_slots;
  j["tau_s"] = cfg.tau_s;
  j["caps_mbit"] = {{"isl", cfg.caps.isl},
                    {"sg", cfg.caps.sg},
                    {"store", cfg.caps.store},
                    {"compute", cfg.caps.compute}};
  j["volume_mbit"] = {cfg.volume_mbit_min, cfg.volume_mbit_max};
  j["delay_slots"] = cfg.delay_slots;
  j["rho_mbit"] = cfg.rho_mbit;
  nlohmann::json t;
  t["source"] = cfg.topology_source;
  if (!cfg.topology_csv.empty()) t["csv_path"] = cfg.topology_csv;
  t["planes"] = cfg.constellation.planes;
  t["sats_per_plane"] = cfg.constellation.sats_per_plane;
  t["altitude_km"] = cfg.constellation.altitude_km;
  t["inclination_deg"] = cfg.constellation.inclination_deg;
  t["n_observation"] = cfg.constellation.n_observation;
  t["observation_alt_offset_km"] = cfg.constellation.observation_alt_offset_km;
  t["elevation_mask_deg"] = cfg.constellation.elevation_mask_deg;
  t["seed"] = cfg.constellation.seed;
  t["stations"] = nlohmann::json::array();
  for (const auto& s : cfg.stations)
    t["stations"].push_back({{"id", s.id}, {"lat", s.latitude_deg}, {"lon", s.longitude_deg}});
  j["topology"] = std::move(t);
  j["flows"] = cfg.flow_counts;
  j["thetas"] = cfg.thetas;
  j["seeds"] = cfg.seeds;
  j["algorithms"] = cfg.algorithms;
  j["repetitions"] = cfg.repetitions;
  j["srcc"] = {{"n_max", cfg.srcc_cfg.n_max},       {"beta0", cfg.srcc_cfg.beta0},
               {"eps_gap_pct", cfg.srcc_cfg.eps_gap_pct}, {"min_step", cfg.srcc_cfg.min_step},
               {"beta_floor", cfg.srcc_cfg.beta_floor},   {"stall_limit", cfg.srcc_cfg.stall_limit},
               {"mu0", cfg.srcc_cfg.mu0}};
  j["exact_budget"] = {{"max_plans_per_flow", cfg.exact_budget.max_plans_per_flow},
                       {"max_bb_nodes", cfg.exact_budget.max_bb_nodes}};
  return j;
}

inline std::vector<SlotTopology> build_topology(const ExperimentConfig& cfg) {
  if (cfg.topology_source == "csv") return load_adjacency(cfg.topology_csv);
  return propagate(cfg.constellation, cfg.stations, cfg.horizon_slots, cfg.tau_s);
}

// Per-kind capacity normalisation: link existence comes from the topology,
// per-link budgets from the parameter set.
inline void apply_caps(MdrTeg& g, const CapsMbit& caps) {
  for (int i = 0; i < g.arc_count(); ++i) {
    Arc& a = g.arc(i);
    switch (a.kind) {
      case ArcKind::Os:
      case ArcKind::Ss:
        a.capacity = mbits(caps.isl);
        break;
      case ArcKind::Sg:
        a.capacity = mbits(caps.sg);
        break;
      default:
        continue;
    }
    a.residual = a.capacity;
  }
}

inline MdrTeg build_graph(const ExperimentConfig& cfg, const std::vector<SlotTopology>& slots,
                          bool with_compute) {
  GraphParams p;
  p.tau_s = cfg.tau_s;
  p.s_max_bits = mbits(cfg.caps.store);
  p.rho_bits = mbits(cfg.rho_mbit);
  p.zeta_max = static_cast<int>(std::llround(cfg.caps.compute / cfg.rho_mbit));
  p.with_compute = with_compute;
  MdrTeg g = build_mdrteg(slots, p);
  apply_caps(g, cfg.caps);
  return g;
}

inline std::vector<std::string> observation_ids(const std::vector<SlotTopology>& slots) {
  std::set<std::string> ids;
  for (const auto& st : slots)
    for (const auto& [key, rate] : st.rate_bps) {
      (void)rate;
      if (kind_of(key.first) == NodeKind::Observation) ids.insert(key.first);
      if (kind_of(key.second) == NodeKind::Observation) ids.insert(key.second);
    }
  return {ids.begin(), ids.end()};
}

inline std::uint64_t cell_seed(std::uint64_t seed, int rep) {
  return seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(rep);
}

inline std::vector<Flow> generate_flows(const ExperimentConfig& cfg,
                                        const std::vector<std::string>& sources, int count,
                                        double theta, std::uint64_t seed) {
  if (sources.empty()) throw config_error("generate_flows: no observation nodes in topology");
  Rng rng(seed);
  std::vector<Flow> flows;
  flows.reserve(static_cast<std::size_t>(count));
  const int t_start_max = std::max(1, cfg.horizon_slots - cfg.delay_slots);
  for (int i = 0; i < count; ++i) {
    Flow f;
    f.id = "f" + std::to_string(i);
    f.source = sources[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(sources.size()) - 1))];
    f.dest = "*";
    f.volume_bits = mbits(static_cast<double>(rng.uniform_int(
        static_cast<std::int64_t>(std::llround(cfg.volume_mbit_min)),
        static_cast<std::int64_t>(std::llround(cfg.volume_mbit_max)))));
    f.t_start = static_cast<int>(rng.uniform_int(1, t_start_max));
    f.t_end = f.t_start + cfg.delay_slots;
    f.theta = theta;
    check_flow(f);
    flows.push_back(std::move(f));
  }
  return flows;
}

struct RunMetrics {
  std::string algorithm;
  std::string param_set;
  int flows = 0;
  double theta = 0.0;
  std::uint64_t seed = 0;
  int rep = 0;
  int success_count = 0;
  double success_ratio = 0.0;
  double wall_time_s = 0.0;
  double mean_delay_slots = 0.0;
};

inline const char* metrics_csv_header() {
  return "algorithm,param_set,flows,theta,seed,rep,success_count,success_ratio,wall_time_s,"
         "mean_delay_slots";
}

namespace detail {
inline std::string fmt_double(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << std::defaultfloat << v;
  return os.str();
}
}  // namespace detail

inline std::string metrics_csv_row(const RunMetrics& m) {
  std::ostringstream os;
  os << m.algorithm << ',' << m.param_set << ',' << m.flows << ',' << detail::fmt_double(m.theta)
     << ',' << m.seed << ',' << m.rep << ',' << m.success_count << ','
     << detail::fmt_double(m.success_ratio) << ',' << detail::fmt_double(m.wall_time_s) << ','
     << detail::fmt_double(m.mean_delay_slots);
  return os.str();
}

inline std::string metrics_to_csv(const std::vector<RunMetrics>& rows) {
  std::ostringstream os;
  os << metrics_csv_header() << '\n';
  for (const auto& m : rows) os << metrics_csv_row(m) << '\n';
  return os.str();
}

inline nlohmann::json metrics_to_json(const std::vector<RunMetrics>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : rows)
    arr.push_back({{"algorithm", m.algorithm},
                   {"param_set", m.param_set},
                   {"flows", m.flows},
                   {"theta", m.theta},
                   {"seed", m.seed},
                   {"rep", m.rep},
                   {"success_count", m.success_count},
                   {"success_ratio", m.success_ratio},
                   {"wall_time_s", m.wall_time_s},
                   {"mean_delay_slots", m.mean_delay_slots}});
  return arr;
}

inline std::string bounds_to_csv(const std::vector<BoundsRow>& trace) {
  std::ostringstream os;
  os << "iter,ub,lb,certified,gap_pct,beta,step_norm,reason\n";
  for (const auto& r : trace)
    os << r.iter << ',' << detail::fmt_double(r.ub, 12) << ',' << detail::fmt_double(r.lb, 12)
       << ',' << (r.certified ? 1 : 0) << ',' << detail::fmt_double(r.gap_pct, 9) << ','
       << detail::fmt_double(r.beta, 9) << ',' << detail::fmt_double(r.step_norm, 9) << ','
       << r.reason << '\n';
  return os.str();
}

// Semantic success recount: a flow is delivered iff its plan reached its
// destination class through a downlink inside the window.
inline int semantic_success_count(const MdrTeg& g, const std::vector<Flow>& flows,
                                  const Assignment& a) {
  int n = 0;
  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    const FlowPlan& p = a.plans[fi];
    if (!p.routed() || p.arrival_arc < 0) continue;
    const int slot = g.node(g.arc(p.arrival_arc).tail).slot;
    if (slot >= flows[fi].t_start && slot <= flows[fi].t_end) ++n;
  }
  return n;
}

// Runs one algorithm on one cell, enforcing the rules every run must obey:
// the assignment validates, the reported successes match the semantic
// recount, and releasing everything restores the pristine residuals.
struct CellResult {
  RunMetrics metrics;
  SolveResult solve;
};

inline CellResult run_cell(const ExperimentConfig& cfg, MdrTeg& g, MdrTeg* g_plain,
                           const std::vector<Flow>& flows, const std::string& algorithm,
                           int flow_count, double theta, std::uint64_t seed, int rep) {
  MdrTeg& target = algorithm == "ja" ? *g_plain : g;
  target.reset_residuals();
  const std::vector<bits_t> pristine = target.residual_snapshot();

  const auto t0 = std::chrono::steady_clock::now();
  SolveResult sr;
  if (algorithm == "srcc") sr = srcc(g, flows, cfg.srcc_cfg);
  else if (algorithm == "ja") sr = ja(*g_plain, flows);
  else if (algorithm == "crpaa") sr = crpaa(g, flows);
  else if (algorithm == "esalr") sr = esalr(g, flows, {cfg.srcc_cfg, cfg.exact_budget});
  else throw config_error("unknown algorithm \"" + algorithm + "\"");
  const auto t1 = std::chrono::steady_clock::now();

  const ConstraintReport report = validate(target, flows, sr.assignment);
  if (!report.ok())
    throw validation_failure("assignment from " + algorithm + " violates " +
                             report.violations.front().tag + " at " +
                             report.violations.front().where);
  const int semantic = semantic_success_count(target, flows, sr.assignment);
  if (semantic != sr.success_count)
    throw validation_failure("reported successes of " + algorithm + " (" +
                             std::to_string(sr.success_count) + ") differ from the semantic count (" +
                             std::to_string(semantic) + ")");
  release_assignment(target, sr.assignment);
  if (target.residual_snapshot() != pristine)
    throw validation_failure("releasing the " + algorithm +
                             " assignment did not restore pristine residuals");

  CellResult out;
  out.solve = std::move(sr);
  out.metrics.algorithm = algorithm;
  out.metrics.param_set = cfg.param_set;
  out.metrics.flows = flow_count;
  out.metrics.theta = theta;
  out.metrics.seed = seed;
  out.metrics.rep = rep;
  out.metrics.success_count = out.solve.success_count;
  out.metrics.success_ratio =
      flows.empty() ? 0.0
                    : static_cast<double>(out.solve.success_count) / static_cast<double>(flows.size());
  out.metrics.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  double delay_sum = 0.0;
  int delivered = 0;
  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    const FlowPlan& p = out.solve.assignment.plans[fi];
    if (p.sg_indicator_arc < 0) continue;
    delay_sum += p.arrival_slot - flows[fi].t_start;
    ++delivered;
  }
  out.metrics.mean_delay_slots = delivered > 0 ? delay_sum / delivered : 0.0;
  return out;
}

struct CellTrace {
  std::string algorithm;
  int flows = 0;
  double theta = 0.0;
  std::uint64_t seed = 0;
  int rep = 0;
  std::vector<BoundsRow> trace;
};

struct SweepResult {
  std::vector<RunMetrics> metrics;
  std::vector<CellTrace> traces;
  std::vector<std::string> cell_errors;
  bool validation_failed = false;
  bool budget_exhausted = false;
};

// Full grid: flows x thetas x seeds x repetitions x algorithms, in that
// order. A failing cell is recorded and skipped; the sweep continues.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  check_config(cfg);
  SweepResult out;
  const std::vector<SlotTopology> slots = build_topology(cfg);
  const std::vector<std::string> sources = observation_ids(slots);
  MdrTeg g = build_graph(cfg, slots, true);
  const bool need_plain =
      std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "ja") != cfg.algorithms.end();
  MdrTeg g_plain;
  if (need_plain) g_plain = build_graph(cfg, slots, false);

  for (int fc : cfg.flow_counts)
    for (double theta : cfg.thetas)
      for (std::uint64_t seed : cfg.seeds)
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
          std::vector<Flow> flows;
          try {
            flows = generate_flows(cfg, sources, fc, theta, cell_seed(seed, rep));
          } catch (const std::exception& e) {
            out.cell_errors.push_back("flow generation failed: " + std::string(e.what()));
            continue;
          }
          for (const auto& algo : cfg.algorithms) {
            try {
              CellResult cell = run_cell(cfg, g, need_plain ? &g_plain : nullptr, flows, algo,
                                         fc, theta, seed, rep);
              if (algo == "esalr" && !cell.solve.certified) out.budget_exhausted = true;
              if (!cell.solve.trace.empty())
                out.traces.push_back({algo, fc, theta, seed, rep, cell.solve.trace});
              out.metrics.push_back(std::move(cell.metrics));
            } catch (const validation_failure& e) {
              out.validation_failed = true;
              out.cell_errors.push_back(e.what());
            } catch (const std::exception& e) {
              out.cell_errors.push_back(std::string("cell failed: ") + e.what());
            }
          }
        }
  return out;
}

}  // namespace sgin
