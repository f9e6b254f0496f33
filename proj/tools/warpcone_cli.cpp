// warpcone: scenario-driven front end. Reads a JSON scenario (or a canned
// one), applies flag overrides and writes CSV tables plus report.json.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "warpcone/errors.hpp"
#include "warpcone/scenario.hpp"
#include "warpcone/warpgraph.hpp"

namespace {

using nlohmann::json;
using namespace warpcone;

struct Common {
  std::string scenario;
  std::string config;
  std::vector<double> levels;
  std::optional<double> mesh_base;
  std::optional<double> mesh;
  std::optional<double> radius_factor;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> folner_n;
  std::vector<double> scales;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-s,--scenario", c.scenario, "canned scenario name");
  cmd->add_option("-c,--config", c.config, "scenario JSON file");
  cmd->add_option("--levels", c.levels, "levels t, ascending")->delimiter(',');
  cmd->add_option("--mesh-base", c.mesh_base, "h0 in the schedule mesh = h0 / t");
  cmd->add_option("--mesh", c.mesh, "fixed mesh for every level");
  cmd->add_option("--radius-factor", c.radius_factor, "metric-edge radius in units of t * mesh");
  cmd->add_option("--seed", c.seed, "sampling seed");
  cmd->add_option("--folner-n", c.folner_n, "Følner index");
  cmd->add_option("--scales", c.scales, "variation scales s")->delimiter(',');
  cmd->add_option("-o,--out", c.out, "output directory (default $WARPCONE_OUT or .)");
}

ScenarioConfig resolve(const Common& c, std::optional<std::vector<std::string>> statistics) {
  json j = json::object();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw ConfigError(c.config, "cannot open config file");
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(c.config, std::string("invalid JSON: ") + e.what());
    }
  } else if (!c.scenario.empty()) {
    j["base"] = c.scenario;
  } else {
    throw ConfigError("--scenario", "give a canned scenario or --config");
  }
  if (!c.config.empty() && !c.scenario.empty()) j["base"] = c.scenario;
  if (!c.levels.empty()) j["levels"] = c.levels;
  if (c.mesh_base) j["mesh_base"] = *c.mesh_base;
  if (c.mesh) j["mesh"] = *c.mesh;
  if (c.radius_factor) j["radius_factor"] = *c.radius_factor;
  if (c.seed) j["seed"] = *c.seed;
  if (c.folner_n) j["folner_n"] = *c.folner_n;
  if (!c.scales.empty()) j["scales"] = c.scales;
  if (statistics) j["statistics"] = *statistics;
  return parse_config(j);
}

std::filesystem::path out_dir(const Common& c) { return c.out.empty() ? output_dir() : std::filesystem::path(c.out); }

WarpedGraph level_graph(const ScenarioConfig& cfg, double t) {
  const double mesh = cfg.mesh ? *cfg.mesh : cfg.mesh_base / t;
  NetOptions no;
  no.max_nodes = cfg.max_nodes;
  auto net = std::make_shared<const Net>(make_net(cfg.space, mesh, no));
  return WarpedGraph(net, make_action(cfg), t, cfg.radius_factor * t * mesh);
}

void report_written(const Report& r, const std::filesystem::path& dir) {
  write_report(r, dir);
  std::cout << "wrote " << (dir / "report.json").string();
  for (const auto& [name, body] : r.tables) std::cout << ' ' << (dir / name).string();
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"warped-cone numerical laboratory"};
  app.set_version_flag("--version", warpcone::version());
  app.require_subcommand(1);

  Common common;
  std::optional<double> level;
  std::optional<NodeId> u, v;

  auto* net_cmd = app.add_subcommand("net", "dump the net of one level as net.csv");
  auto* graph_cmd = app.add_subcommand("graph", "dump the level graph as graph.csv");
  auto* dist_cmd = app.add_subcommand("dist", "warped distances (one pair, or dist.csv)");
  auto* diam_cmd = app.add_subcommand("diam", "diameters across the ladder");
  auto* cap_cmd = app.add_subcommand("capacity", "eps-capacities of warped balls");
  auto* wit_cmd = app.add_subcommand("witness", "Følner convolution witnesses");
  auto* ker_cmd = app.add_subcommand("kernel", "positive-type kernels and group restriction");
  auto* spec_cmd = app.add_subcommand("spectra", "unit-scale spectral diagnostics");
  auto* run_cmd = app.add_subcommand("run", "every statistic listed in the scenario");
  for (auto* cmd : {net_cmd, graph_cmd, dist_cmd, diam_cmd, cap_cmd, wit_cmd, ker_cmd, spec_cmd, run_cmd}) {
    add_common(cmd, common);
  }
  for (auto* cmd : {net_cmd, graph_cmd, dist_cmd}) cmd->add_option("-t,--level", level, "level (default: first)");
  dist_cmd->add_option("-u", u, "source node");
  dist_cmd->add_option("-v", v, "target node");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto dir = out_dir(common);
    if (net_cmd->parsed() || graph_cmd->parsed() || (dist_cmd->parsed() && u && v)) {
      const ScenarioConfig cfg = resolve(common, std::vector<std::string>{});
      const double t = level.value_or(cfg.levels.front());
      const WarpedGraph g = level_graph(cfg, t);
      if (dist_cmd->parsed()) {
        if (*u >= g.size() || *v >= g.size()) throw ConfigError("-u/-v", "node out of range");
        std::cout << warped_distance(g, *u, *v) << '\n';
        return 0;
      }
      std::filesystem::create_directories(dir);
      const auto path = dir / (net_cmd->parsed() ? "net.csv" : "graph.csv");
      std::ofstream out(path);
      if (net_cmd->parsed()) {
        write_net_csv(out, g.net());
      } else {
        write_graph_csv(out, g);
      }
      std::cout << "wrote " << path.string() << " (" << g.size() << " nodes, max snap error " << g.max_snap_error()
                << ")\n";
      return 0;
    }
    std::optional<std::vector<std::string>> stats;
    if (dist_cmd->parsed()) stats = std::vector<std::string>{"distances"};
    if (diam_cmd->parsed()) stats = std::vector<std::string>{"diameter"};
    if (cap_cmd->parsed()) stats = std::vector<std::string>{"capacity"};
    if (wit_cmd->parsed()) stats = std::vector<std::string>{"witness"};
    if (ker_cmd->parsed()) stats = std::vector<std::string>{"kernels"};
    if (spec_cmd->parsed()) stats = std::vector<std::string>{"spectra"};
    const ScenarioConfig cfg = resolve(common, stats);
    report_written(run_scenario(cfg), dir);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
