// Command line front end: topology generation/import, single runs, grid
// sweeps, assignment validation and LP export.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgin/sgin.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitBudget = 4;

sgin::ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw sgin::config_error("cannot open config " + path);
  nlohmann::json j;
  f >> j;
  return sgin::config_from_json(j);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw sgin::parse_error("cannot open " + path.string() + " for writing");
  f << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

struct CommonOpts {
  std::string config;
  std::string out = "out";
  std::string algorithms;
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void apply_overrides(sgin::ExperimentConfig& cfg, const CommonOpts& opt) {
  if (!opt.algorithms.empty()) cfg.algorithms = split_csv(opt.algorithms);
  if (opt.seed_set) cfg.seeds = {opt.seed};
  sgin::check_config(cfg);
}

std::string theta_tag(double theta) {
  std::string s = sgin::detail::fmt_double(theta);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

int cmd_topology_gen(const std::string& config, const std::string& out, std::uint64_t seed,
                     bool seed_set) {
  sgin::ExperimentConfig cfg = load_config(config);
  if (seed_set) cfg.constellation.seed = seed;
  cfg.topology_source = "generate";
  const auto slots = sgin::build_topology(cfg);
  sgin::save_adjacency(slots, out);
  std::size_t links = 0;
  for (const auto& st : slots) links += st.rate_bps.size();
  std::cout << "wrote " << out << ": " << slots.size() << " slots, "
            << sgin::observation_ids(slots).size() << " observation nodes, " << links
            << " directed links\n";
  return kExitOk;
}

int cmd_topology_import(const std::string& in, const std::string& out) {
  const auto slots = sgin::load_adjacency(in);
  sgin::save_adjacency(slots, out);
  std::size_t links = 0;
  for (const auto& st : slots) links += st.rate_bps.size();
  std::cout << "normalized " << in << " -> " << out << ": " << slots.size() << " slots, "
            << links << " directed links\n";
  return kExitOk;
}

int cmd_run(const CommonOpts& opt) {
  sgin::ExperimentConfig cfg = load_config(opt.config);
  apply_overrides(cfg, opt);

  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_json(dir / "config_resolved.json", sgin::config_to_json(cfg));

  const auto slots = sgin::build_topology(cfg);
  const auto sources = sgin::observation_ids(slots);
  sgin::MdrTeg g = sgin::build_graph(cfg, slots, true);
  const bool need_plain = std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "ja") !=
                          cfg.algorithms.end();
  sgin::MdrTeg g_plain;
  if (need_plain) g_plain = sgin::build_graph(cfg, slots, false);

  const int fc = cfg.flow_counts.front();
  const double theta = cfg.thetas.front();
  const std::uint64_t seed = cfg.seeds.front();
  const auto flows = sgin::generate_flows(cfg, sources, fc, theta, sgin::cell_seed(seed, 0));
  sgin::save_flows(flows, (dir / "flows.csv").string());

  std::vector<sgin::RunMetrics> rows;
  bool budget_exhausted = false;
  for (const auto& algo : cfg.algorithms) {
    sgin::CellResult cell = sgin::run_cell(cfg, g, need_plain ? &g_plain : nullptr, flows, algo,
                                           fc, theta, seed, 0);
    const sgin::MdrTeg& used = algo == "ja" ? g_plain : g;
    write_json(dir / ("assignment_" + algo + ".json"),
               sgin::assignment_to_json(used, flows, cell.solve.assignment));
    if (!cell.solve.trace.empty())
      write_text(dir / ("bounds_" + algo + ".csv"), sgin::bounds_to_csv(cell.solve.trace));
    if (algo == "esalr" && !cell.solve.certified) budget_exhausted = true;
    std::cout << algo << ": " << cell.solve.success_count << "/" << flows.size()
              << " delivered, stop=" << cell.solve.stop_reason << ", wall="
              << sgin::detail::fmt_double(cell.metrics.wall_time_s, 3) << "s\n";
    rows.push_back(std::move(cell.metrics));
  }

  if (opt.format == "json") write_json(dir / "metrics.json", sgin::metrics_to_json(rows));
  else write_text(dir / "metrics.csv", sgin::metrics_to_csv(rows));
  std::cout << "artifacts in " << dir.string() << "\n";
  return budget_exhausted ? kExitBudget : kExitOk;
}

int cmd_sweep(const CommonOpts& opt) {
  sgin::ExperimentConfig cfg = load_config(opt.config);
  apply_overrides(cfg, opt);

  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_json(dir / "config_resolved.json", sgin::config_to_json(cfg));

  const sgin::SweepResult res = sgin::run_sweep(cfg);
  if (opt.format == "json") write_json(dir / "metrics.json", sgin::metrics_to_json(res.metrics));
  else write_text(dir / "metrics.csv", sgin::metrics_to_csv(res.metrics));
  for (const auto& tr : res.traces) {
    std::ostringstream name;
    name << "bounds_" << tr.algorithm << "_f" << tr.flows << "_th" << theta_tag(tr.theta) << "_s"
         << tr.seed << "_r" << tr.rep << ".csv";
    write_text(dir / name.str(), sgin::bounds_to_csv(tr.trace));
  }
  for (const auto& err : res.cell_errors) std::cerr << "cell error: " << err << "\n";
  std::cout << "sweep wrote " << res.metrics.size() << " rows, " << res.traces.size()
            << " bound traces, " << res.cell_errors.size() << " cell errors -> " << dir.string()
            << "\n";
  if (res.validation_failed) return kExitValidation;
  if (res.budget_exhausted) return kExitBudget;
  return kExitOk;
}

int cmd_validate(const std::string& config, const std::string& flows_path,
                 const std::string& assignment_path, bool no_compute, const std::string& out) {
  sgin::ExperimentConfig cfg = load_config(config);
  const auto slots = sgin::build_topology(cfg);
  sgin::MdrTeg g = sgin::build_graph(cfg, slots, !no_compute);
  const auto flows = sgin::load_flows(flows_path);
  std::ifstream af(assignment_path);
  if (!af) throw sgin::config_error("cannot open assignment " + assignment_path);
  nlohmann::json aj;
  af >> aj;
  const sgin::Assignment a = sgin::assignment_from_json(g, flows, aj);
  const sgin::ConstraintReport rep = sgin::validate(g, flows, a);
  const nlohmann::json rj = rep.to_json();
  if (out.empty()) std::cout << rj.dump(2) << "\n";
  else write_json(out, rj);
  if (!rep.ok()) {
    std::cerr << rep.violations.size() << " constraint violation(s)\n";
    return kExitValidation;
  }
  std::cout << "assignment is feasible\n";
  return kExitOk;
}

int cmd_export_lp(const CommonOpts& opt, const std::string& flows_path) {
  sgin::ExperimentConfig cfg = load_config(opt.config);
  apply_overrides(cfg, opt);
  const auto slots = sgin::build_topology(cfg);
  sgin::MdrTeg g = sgin::build_graph(cfg, slots, true);
  std::vector<sgin::Flow> flows;
  if (!flows_path.empty()) {
    flows = sgin::load_flows(flows_path);
  } else {
    flows = sgin::generate_flows(cfg, sgin::observation_ids(slots), cfg.flow_counts.front(),
                                 cfg.thetas.front(), sgin::cell_seed(cfg.seeds.front(), 0));
  }
  const sgin::MilpModel m = sgin::build_milp(g, flows);
  sgin::export_lp(m, opt.out);
  std::cout << "wrote " << opt.out << ": " << m.vars.size() << " vars, " << m.rows.size()
            << " rows\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3C resource allocation over time-expanded satellite networks"};
  app.require_subcommand(1);

  // topology
  auto* topo = app.add_subcommand("topology", "generate or import slot topologies");
  topo->require_subcommand(1);
  std::string t_config, t_out, t_in;
  std::uint64_t t_seed = 0;
  auto* tgen = topo->add_subcommand("gen", "propagate a constellation into an adjacency CSV");
  tgen->add_option("--config", t_config, "experiment config (JSON)")->required();
  tgen->add_option("--out", t_out, "output adjacency CSV")->required();
  auto* tgen_seed = tgen->add_option("--seed", t_seed, "override the observer-draw seed");
  auto* timp = topo->add_subcommand("import", "validate and normalize an adjacency CSV");
  timp->add_option("--in", t_in, "input adjacency CSV")->required();
  timp->add_option("--out", t_out, "normalized output CSV")->required();

  // run / sweep / export-lp share the common options
  CommonOpts run_opt, sweep_opt, lp_opt;
  auto add_common = [](CLI::App* cmd, CommonOpts& o, bool with_format) {
    cmd->add_option("--config", o.config, "experiment config (JSON)")->required();
    cmd->add_option("--out", o.out, "output directory or file");
    cmd->add_option("--algorithms", o.algorithms, "comma-separated algorithm override");
    auto* s = cmd->add_option("--seed", o.seed, "override the seed list with one seed");
    cmd->parse_complete_callback([&o, s]() { o.seed_set = s->count() > 0; });
    if (with_format)
      cmd->add_option("--format", o.format, "metrics format")
          ->check(CLI::IsMember({"csv", "json"}));
  };
  auto* run = app.add_subcommand("run", "run the first grid cell once, write artifacts");
  add_common(run, run_opt, true);
  auto* sweep = app.add_subcommand("sweep", "run the full grid, write metrics and bound traces");
  add_common(sweep, sweep_opt, true);

  std::string v_config, v_flows, v_assignment, v_out;
  bool v_no_compute = false;
  auto* val = app.add_subcommand("validate", "check an assignment against all constraints");
  val->add_option("--config", v_config, "experiment config (JSON)")->required();
  val->add_option("--flows", v_flows, "flow CSV")->required();
  val->add_option("--assignment", v_assignment, "assignment JSON")->required();
  val->add_flag("--no-compute", v_no_compute, "build the graph without the compute node");
  val->add_option("--out", v_out, "write the report here instead of stdout");

  std::string lp_flows;
  auto* lp = app.add_subcommand("export-lp", "emit the linearized program in LP format");
  add_common(lp, lp_opt, false);
  lp->add_option("--flows", lp_flows, "flow CSV (default: generate the first cell)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (tgen->parsed()) return cmd_topology_gen(t_config, t_out, t_seed, tgen_seed->count() > 0);
    if (timp->parsed()) return cmd_topology_import(t_in, t_out);
    if (run->parsed()) return cmd_run(run_opt);
    if (sweep->parsed()) return cmd_sweep(sweep_opt);
    if (val->parsed()) return cmd_validate(v_config, v_flows, v_assignment, v_no_compute, v_out);
    if (lp->parsed()) return cmd_export_lp(lp_opt, lp_flows);
  } catch (const sgin::validation_failure& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kExitValidation;
  } catch (const sgin::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sgin::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
