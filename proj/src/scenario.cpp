#include "warpcone/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "format.hpp"
#include "warpcone/errors.hpp"
#include "warpcone/propa.hpp"
#include "warpcone/spectra.hpp"
#include "warpcone/warpgraph.hpp"

#ifndef WARPCONE_SCENARIO_DIR
#define WARPCONE_SCENARIO_DIR "scenarios"
#endif
#ifndef WARPCONE_VERSION
#define WARPCONE_VERSION "0.0.0"
#endif

namespace warpcone {

using nlohmann::json;

std::string version() { return WARPCONE_VERSION; }

std::filesystem::path scenario_dir() {
  if (const char* env = std::getenv("WARPCONE_SCENARIOS"); env && *env) return env;
  return WARPCONE_SCENARIO_DIR;
}

std::filesystem::path output_dir() {
  if (const char* env = std::getenv("WARPCONE_OUT"); env && *env) return env;
  return std::filesystem::current_path();
}

namespace {

// Config parsing ----------------------------------------------------------------

template <typename T>
T get(const json& j, const std::string& key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key, "missing or of the wrong type");
  }
}

double positive(const json& j, const std::string& key, const std::string& path) {
  const auto v = get<double>(j, key, path);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path + "." + key, "must be a positive number");
  return v;
}

std::size_t count(const json& j, const std::string& key, const std::string& path, std::size_t min = 1) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
    throw ConfigError(path + "." + key, "must be an integer >= " + std::to_string(min));
  }
  return v.get<std::size_t>();
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
}

void apply_section(const json& j, const std::string& key, std::initializer_list<const char*> allowed, auto&& fn) {
  if (!j.contains(key)) return;
  const json& s = j.at(key);
  if (!s.is_object()) throw ConfigError("$." + key, "must be an object");
  for (const auto& [k, v] : s.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
      throw ConfigError("$." + key + "." + k, "unknown key");
    }
  }
  fn(s, "$." + key);
}

void merge(ScenarioConfig& c, const json& j) {
  static const std::set<std::string> known{
      "base",     "name",       "space",   "action",     "levels",   "mesh_base", "mesh",    "radius_factor",
      "statistics", "folner_n", "scales",  "seed",       "distances", "capacity", "witness", "kernels",
      "spectra",  "max_nodes"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("$." + key, "unknown key");
  }
  if (j.contains("name")) c.name = get<std::string>(j, "name", "$");
  if (j.contains("space")) {
    const json& s = j.at("space");
    if (!s.is_object()) throw ConfigError("$.space", "must be an object");
    const auto kind_name = get<std::string>(s, "kind", "$.space");
    try {
      c.space.kind = space_kind_from_string(kind_name);
    } catch (const DomainError&) {
      throw ConfigError("$.space.kind", "unknown space kind '" + kind_name + "'");
    }
    c.space.points = 0;
    if (c.space.kind == SpaceKind::finite_set) c.space.points = count(s, "points", "$.space");
  }
  if (j.contains("action")) {
    const json& a = j.at("action");
    if (a.is_string()) {
      c.action = json{{"name", a.get<std::string>()}};
    } else if (a.is_object() && a.contains("name") && a.at("name").is_string()) {
      c.action = a;
    } else {
      throw ConfigError("$.action", "must be a name or an object with a name");
    }
  }
  if (j.contains("levels")) {
    const json& l = j.at("levels");
    if (!l.is_array() || l.empty()) throw ConfigError("$.levels", "must be a non-empty array");
    c.levels.clear();
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!l[i].is_number() || !(l[i].get<double>() >= 1.0)) {
        throw ConfigError("$.levels[" + std::to_string(i) + "]", "level must be a number >= 1");
      }
      c.levels.push_back(l[i].get<double>());
    }
  }
  if (j.contains("mesh_base")) {
    c.mesh_base = positive(j, "mesh_base", "$");
    if (!j.contains("mesh")) c.mesh.reset();
  }
  if (j.contains("mesh")) {
    if (j.at("mesh").is_null()) {
      c.mesh.reset();
    } else {
      c.mesh = positive(j, "mesh", "$");
    }
  }
  if (j.contains("radius_factor")) c.radius_factor = positive(j, "radius_factor", "$");
  if (j.contains("statistics")) {
    const json& s = j.at("statistics");
    if (!s.is_array()) throw ConfigError("$.statistics", "must be an array");
    c.statistics.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "$.statistics[" + std::to_string(i) + "]";
      if (!s[i].is_string()) throw ConfigError(path, "must be a string");
      const auto name = s[i].get<std::string>();
      if (std::find(std::begin(kStatistics), std::end(kStatistics), name) == std::end(kStatistics)) {
        throw ConfigError(path, "unknown statistic '" + name + "'");
      }
      c.statistics.push_back(name);
    }
  }
  if (j.contains("folner_n")) c.folner_n = count(j, "folner_n", "$");
  if (j.contains("scales")) {
    const json& s = j.at("scales");
    if (!s.is_array() || s.empty()) throw ConfigError("$.scales", "must be a non-empty array");
    c.scales.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number() || !(s[i].get<double>() > 0.0)) {
        throw ConfigError("$.scales[" + std::to_string(i) + "]", "scale must be > 0");
      }
      c.scales.push_back(s[i].get<double>());
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0)) {
      throw ConfigError("$.seed", "must be a non-negative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("max_nodes")) c.max_nodes = count(j, "max_nodes", "$");
  apply_section(j, "distances", {"pairs"}, [&](const json& s, const std::string& p) {
    if (s.contains("pairs")) c.distance_pairs = count(s, "pairs", p);
  });
  apply_section(j, "capacity", {"r", "eps", "centers"}, [&](const json& s, const std::string& p) {
    if (s.contains("r")) c.capacity_r = positive(s, "r", p);
    if (s.contains("eps")) c.capacity_eps = positive(s, "eps", p);
    if (s.contains("centers")) c.capacity_centers = count(s, "centers", p);
  });
  apply_section(j, "witness", {"window"}, [&](const json& s, const std::string& p) {
    if (s.contains("window")) c.witness_window = positive(s, "window", p);
  });
  apply_section(j, "kernels", {"window", "nodes", "word_length"}, [&](const json& s, const std::string& p) {
    if (s.contains("window")) c.kernel_window = positive(s, "window", p);
    if (s.contains("nodes")) c.kernel_nodes = count(s, "nodes", p);
    if (s.contains("word_length")) c.kernel_word_length = count(s, "word_length", p, 0);
  });
  apply_section(j, "spectra", {"mesh_base", "tol"}, [&](const json& s, const std::string& p) {
    if (s.contains("mesh_base")) {
      if (s.at("mesh_base").is_null()) {
        c.spectra_mesh_base.reset();
      } else {
        c.spectra_mesh_base = positive(s, "mesh_base", p);
      }
    }
    if (s.contains("tol")) {
      const auto tol = get<double>(s, "tol", p);
      if (!(tol >= 0.0 && tol <= 0.5)) throw ConfigError(p + ".tol", "must lie in [0, 0.5]");
      c.spectra_tol = tol;
    }
  });
}

void validate(const ScenarioConfig& c) {
  if (c.levels.empty()) throw ConfigError("$.levels", "at least one level is required");
  for (std::size_t i = 1; i < c.levels.size(); ++i) {
    if (!(c.levels[i] > c.levels[i - 1])) {
      throw ConfigError("$.levels[" + std::to_string(i) + "]", "levels must be strictly ascending");
    }
  }
  if (c.action.is_null()) throw ConfigError("$.action", "an action is required");
  if (c.mesh && !(*c.mesh < c.space.diameter())) throw ConfigError("$.mesh", "must be below the space diameter");
  try {
    (void)make_action(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("$.action", e.what());
  }
}

GeneratorMap parse_generator(const SpaceSpec& space, const json& g, const std::string& path) {
  if (g.contains("angle")) return CircleRotation{get<double>(g, "angle", path)};
  if (g.contains("turns")) return CircleRotation{2.0 * M_PI * get<double>(g, "turns", path)};
  if (g.contains("translation")) {
    const auto v = get<std::vector<double>>(g, "translation", path);
    if (v.size() != 2) throw ConfigError(path + ".translation", "needs two entries");
    return TorusTranslation{v[0], v[1]};
  }
  if (g.contains("permutation")) return Permutation{get<std::vector<std::size_t>>(g, "permutation", path)};
  if (g.contains("matrix")) {
    if (space.kind == SpaceKind::torus2) {
      const auto m = get<std::vector<std::vector<std::int64_t>>>(g, "matrix", path);
      if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2) {
        throw ConfigError(path + ".matrix", "torus matrices are 2x2 integer arrays");
      }
      return TorusLinear{m[0][0], m[0][1], m[1][0], m[1][1]};
    }
    const auto m = get<std::vector<std::vector<double>>>(g, "matrix", path);
    if (m.size() != 3 || m[0].size() != 3 || m[1].size() != 3 || m[2].size() != 3) {
      throw ConfigError(path + ".matrix", "sphere matrices are 3x3 arrays");
    }
    SphereLinear s;
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) s.m[r][k] = m[r][k];
    return s;
  }
  throw ConfigError(path, "generator needs one of angle, turns, translation, permutation, matrix");
}

std::string action_name(const ScenarioConfig& c) { return c.action.at("name").get<std::string>(); }

}  // namespace

GroupAction make_action(const ScenarioConfig& c) {
  const json& a = c.action;
  const std::string name = action_name(c);
  auto require_space = [&](SpaceKind kind) {
    if (c.space.kind != kind) {
      throw ConfigError("$.action.name", "action '" + name + "' needs space " + to_string(kind));
    }
  };
  if (name == "trivial") return trivial_action(c.space);
  if (name == "cyclic-shift") {
    require_space(SpaceKind::finite_set);
    const std::size_t step = a.contains("step") ? count(a, "step", "$.action", 0) : 1;
    return cyclic_shift(c.space.points, step);
  }
  if (name == "circle-rotation") {
    require_space(SpaceKind::circle);
    const GroupModel group = GroupModel::parse(a.contains("group") ? get<std::string>(a, "group", "$.action") : "Z");
    return circle_rotation(get<double>(a, "turns", "$.action"), group);
  }
  if (name == "irrational-rotation") {
    require_space(SpaceKind::circle);
    return irrational_rotation();
  }
  if (name == "cat-map") {
    require_space(SpaceKind::torus2);
    return cat_map();
  }
  if (name == "free-so3") {
    require_space(SpaceKind::sphere2);
    return free_so3();
  }
  if (name == "custom") {
    const auto& gens = a.contains("generators") ? a.at("generators") : json::array();
    if (!gens.is_array()) throw ConfigError("$.action.generators", "must be an array");
    std::vector<Generator> list;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const std::string path = "$.action.generators[" + std::to_string(i) + "]";
      if (!gens[i].is_object()) throw ConfigError(path, "must be an object");
      const std::string gname =
          gens[i].contains("name") ? get<std::string>(gens[i], "name", path) : std::string(1, static_cast<char>('a' + i));
      list.push_back({gname, parse_generator(c.space, gens[i], path)});
    }
    const GroupModel group = GroupModel::parse(a.contains("group") ? get<std::string>(a, "group", "$.action") : "unknown");
    const bool symmetric = a.contains("symmetric") ? get<bool>(a, "symmetric", "$.action") : true;
    return GroupAction(c.space, std::move(list), group, symmetric);
  }
  throw ConfigError("$.action.name", "unknown action '" + name + "'");
}

ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
  ScenarioConfig c;
  if (j.contains("base")) {
    const auto base = get<std::string>(j, "base", "$");
    try {
      c = canned_config(base);
    } catch (const ConfigError& e) {
      throw ConfigError("$.base", "unknown scenario '" + base + "'");
    }
  }
  merge(c, j);
  validate(c);
  return c;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) { return parse_config(load_json(path)); }

std::vector<std::string> canned_names() {
  return {"trivial-circle", "cyclic8", "transitive5", "irrational-rotation", "cat-map", "free-so3"};
}

ScenarioConfig canned_config(const std::string& name) {
  const auto names = canned_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("scenario", "unknown scenario '" + name + "'");
  }
  const json j = load_json(scenario_dir() / (name + ".json"));
  if (j.contains("base")) throw ConfigError(name, "canned scenarios may not have a base");
  return parse_config(j);
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["space"] = {{"kind", to_string(c.space.kind)}};
  if (c.space.kind == SpaceKind::finite_set) j["space"]["points"] = c.space.points;
  j["action"] = c.action;
  j["levels"] = c.levels;
  j["mesh_base"] = c.mesh_base;
  j["mesh"] = c.mesh ? json(*c.mesh) : json(nullptr);
  j["radius_factor"] = c.radius_factor;
  j["statistics"] = c.statistics;
  j["folner_n"] = c.folner_n;
  j["scales"] = c.scales;
  j["seed"] = c.seed;
  j["max_nodes"] = c.max_nodes;
  j["distances"] = {{"pairs", c.distance_pairs}};
  j["capacity"] = {{"r", c.capacity_r}, {"eps", c.capacity_eps}, {"centers", c.capacity_centers}};
  j["witness"] = {{"window", c.witness_window}};
  j["kernels"] = {{"window", c.kernel_window}, {"nodes", c.kernel_nodes}, {"word_length", c.kernel_word_length}};
  j["spectra"] = {{"mesh_base", c.spectra_mesh_base ? json(*c.spectra_mesh_base) : json(nullptr)},
                  {"tol", c.spectra_tol}};
  return j;
}

// Runner -------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct LevelCache {
  const ScenarioConfig& config;
  const GroupAction& action;
  std::map<std::pair<double, double>, std::unique_ptr<WarpedGraph>> graphs;
  json& levels_json;
  json& runtimes;

  const WarpedGraph& get(double t, double mesh) {
    auto key = std::pair{t, mesh};
    auto it = graphs.find(key);
    if (it != graphs.end()) return *it->second;
    const auto start = Clock::now();
    NetOptions no;
    no.max_nodes = config.max_nodes;
    auto net = std::make_shared<const Net>(make_net(config.space, mesh, no));
    auto g = std::make_unique<WarpedGraph>(net, action, t, config.radius_factor * t * mesh);
    json entry{{"t", t},
               {"mesh", mesh},
               {"n_nodes", g->size()},
               {"radius", g->radius()},
               {"max_snap_error", g->max_snap_error()},
               {"wormhole_edges", g->wormhole_edge_count()}};
    levels_json.push_back(entry);
    runtimes["build t=" + fmt_double(t) + " mesh=" + fmt_double(mesh)] = seconds_since(start);
    return *graphs.emplace(key, std::move(g)).first->second;
  }

  double mesh_for(double t) const { return config.mesh ? *config.mesh : config.mesh_base / t; }
  double spectra_mesh_for(double t) const {
    return config.spectra_mesh_base ? *config.spectra_mesh_base / t : mesh_for(t);
  }
};

std::vector<NodeId> sample_nodes(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<NodeId> out;
  if (k >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), NodeId{0});
    return out;
  }
  std::set<NodeId> picked;
  while (picked.size() < k) picked.insert(static_cast<NodeId>(rng() % n));
  return {picked.begin(), picked.end()};
}

std::mt19937_64 level_rng(const ScenarioConfig& c, std::size_t level_index, std::uint64_t salt) {
  std::seed_seq seq{c.seed, static_cast<std::uint64_t>(level_index), salt};
  return std::mt19937_64(seq);
}

double log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mx += std::log(t[i]);
    my += y[i];
  }
  mx /= static_cast<double>(t.size());
  my /= static_cast<double>(t.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dx = std::log(t[i]) - mx;
    sxy += dx * (y[i] - my);
    sxx += dx * dx;
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

void run_distances(const ScenarioConfig& c, LevelCache& cache, Report& r) {
  std::ostringstream csv;
  csv << "t,u,v,distance\n";
  for (std::size_t li = 0; li < c.levels.size(); ++li) {
    const double t = c.levels[li];
    const WarpedGraph& g = cache.get(t, cache.mesh_for(t));
    Dijkstra dj(g);
    if (g.size() <= 512) {
      for (std::size_t u = 0; u < g.size(); ++u) {
        dj.run(static_cast<NodeId>(u));
        for (std::size_t v = u + 1; v < g.size(); ++v) {
          csv << fmt_double(t) << ',' << u << ',' << v << ',' << fmt_double(dj.distance(static_cast<NodeId>(v)))
              << '\n';
        }
      }
    } else {
      auto rng = level_rng(c, li, 1);
      std::vector<std::pair<NodeId, NodeId>> pairs;
      for (std::size_t i = 0; i < c.distance_pairs; ++i) {
        NodeId u = static_cast<NodeId>(rng() % g.size()), v = static_cast<NodeId>(rng() % g.size());
        if (u > v) std::swap(u, v);
        pairs.emplace_back(u, v);
      }
      std::sort(pairs.begin(), pairs.end());
      for (const auto& [u, v] : pairs) {
        dj.run(u, kInfinity, v);
        csv << fmt_double(t) << ',' << u << ',' << v << ',' << fmt_double(dj.distance(v)) << '\n';
      }
    }
  }
  r.tables["dist.csv"] = csv.str();
}

void run_diameter(const ScenarioConfig& c, LevelCache& cache, Report& r) {
  std::ostringstream csv;
  csv << "t,n_nodes,diameter,exact\n";
  std::vector<double> ts, ds;
  bool nondecreasing = true;
  for (double t : c.levels) {
    const WarpedGraph& g = cache.get(t, cache.mesh_for(t));
    const auto d = diameter(g);
    if (!ds.empty() && d.value < ds.back()) nondecreasing = false;
    ts.push_back(t);
    ds.push_back(d.value);
    csv << fmt_double(t) << ',' << g.size() << ',' << fmt_double(d.value) << ',' << (d.exact ? 1 : 0) << '\n';
  }
  r.tables["diam.csv"] = csv.str();
  r.summary["statistics"]["diameter"] = {{"values", ds}, {"nondecreasing", nondecreasing},
                                         {"log_slope", log_slope(ts, ds)}};
}

void run_capacity(const ScenarioConfig& c, LevelCache& cache, Report& r) {
  std::ostringstream csv;
  csv << "t,center,r,eps,count\n";
  json per_level = json::array();
  std::size_t overall = 0;
  for (std::size_t li = 0; li < c.levels.size(); ++li) {
    const double t = c.levels[li];
    const WarpedGraph& g = cache.get(t, cache.mesh_for(t));
    auto rng = level_rng(c, li, 2);
    std::size_t best = 0;
    for (NodeId x : sample_nodes(g.size(), c.capacity_centers, rng)) {
      const auto cap = epsilon_capacity(g, x, c.capacity_r, c.capacity_eps);
      best = std::max(best, cap.count);
      csv << fmt_double(t) << ',' << x << ',' << fmt_double(c.capacity_r) << ',' << fmt_double(c.capacity_eps) << ','
          << cap.count << '\n';
    }
    overall = std::max(overall, best);
    per_level.push_back({{"t", t}, {"max_count", best}});
  }
  r.tables["capacity.csv"] = csv.str();
  r.summary["statistics"]["capacity"] = {{"levels", per_level}, {"max_count", overall}};
}

void run_witness(const ScenarioConfig& c, const GroupAction& action, LevelCache& cache, Report& r) {
  const FolnerFamily mu = folner_measures(action.group(), c.folner_n);
  std::ostringstream csv;
  csv << "t,folner_n,s,dirac_variation,window_variation,convolved_variation,localization_radius,declared_radius,"
         "translation_defect\n";
  json rows = json::array();
  for (double t : c.levels) {
    const WarpedGraph& g = cache.get(t, cache.mesh_for(t));
    const WitnessMap dirac = dirac_witness(g);
    const WitnessMap window = window_witness(g, c.witness_window);
    const ConvolutionResult conv = convolve_witness(mu, window, g);
    const double loc = localization_radius(conv.witness, g);
    for (double s : c.scales) {
      const double vd = variation_statistic(dirac, g, s);
      const double vw = variation_statistic(window, g, s);
      const double vc = variation_statistic(conv.witness, g, s);
      csv << fmt_double(t) << ',' << c.folner_n << ',' << fmt_double(s) << ',' << fmt_double(vd) << ','
          << fmt_double(vw) << ',' << fmt_double(vc) << ',' << fmt_double(loc) << ','
          << fmt_double(conv.witness.radius) << ',' << fmt_double(conv.translation_defect) << '\n';
      rows.push_back({{"t", t}, {"s", s}, {"convolved_variation", vc}, {"dirac_variation", vd},
                      {"localization_bound_holds", loc <= conv.witness.radius + 1e-9}});
    }
  }
  r.tables["witness.csv"] = csv.str();
  r.summary["statistics"]["witness"] = rows;
}

void run_kernels(const ScenarioConfig& c, const GroupAction& action, LevelCache& cache, Report& r) {
  std::ostringstream csv, group;
  csv << "t,n_nodes,kernel_nodes,min_eigenvalue,positive_type,max_diagonal_error,support_radius,"
         "localization_radius\n";
  group << "t,word,value,nonzero_nodes\n";
  const auto words = enumerate_ball(action, c.kernel_word_length);
  for (std::size_t li = 0; li < c.levels.size(); ++li) {
    const double t = c.levels[li];
    const WarpedGraph& g = cache.get(t, cache.mesh_for(t));
    auto rng = level_rng(c, li, 3);
    const auto nodes = sample_nodes(g.size(), c.kernel_nodes, rng);
    const LocalKernel lk = window_kernel(g, c.kernel_window);
    KernelMatrix k{nodes, Eigen::MatrixXd(static_cast<Eigen::Index>(nodes.size()),
                                          static_cast<Eigen::Index>(nodes.size()))};
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i; j < nodes.size(); ++j) {
        const double v = lk.value(nodes[i], nodes[j]);
        k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        k.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    const auto psd = psd_check(k);
    double diag_err = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      diag_err = std::max(diag_err, std::abs(k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) - 1.0));
    }
    // Window supports of the sampled nodes.
    std::vector<NodeId> buf;
    double loc = 0.0;
    {
      Dijkstra dj(g);
      for (NodeId x : nodes) {
        g.net().within(g.net().point(x), c.kernel_window / t + 1e-12, buf);
        dj.run_until(x, buf);
        for (NodeId z : buf) loc = std::max(loc, dj.distance(z));
      }
    }
    const double support = controlled_support_radius(k, g, 1e-9, 2.0 * loc + 1.0);
    csv << fmt_double(t) << ',' << g.size() << ',' << nodes.size() << ',' << fmt_double(psd.min_eigenvalue) << ','
        << (psd.positive_type ? 1 : 0) << ',' << fmt_double(diag_err) << ',' << fmt_double(support) << ','
        << fmt_double(loc) << '\n';
    const GroupFunction h = haar_restrict(lk, g, words);
    for (const auto& v : h.values) {
      group << fmt_double(t) << ',' << v.word.to_string() << ',' << fmt_double(v.value) << ',' << v.nonzero_nodes
            << '\n';
    }
  }
  r.tables["kernel.csv"] = csv.str();
  r.tables["group.csv"] = group.str();
}

void run_spectra(const ScenarioConfig& c, LevelCache& cache, Report& r) {
  std::ostringstream csv;
  csv << "t,n_nodes,lambda1,cheeger,max_degree\n";
  std::vector<double> values;
  for (double t : c.levels) {
    const WarpedGraph& g = cache.get(t, cache.spectra_mesh_for(t));
    const UnitScaleGraph ug = unit_graph(g, c.spectra_tol);
    const auto l1 = lambda1_full(ug);
    const auto ch = cheeger_sweep(ug, l1.eigenvector);
    values.push_back(l1.value);
    csv << fmt_double(t) << ',' << g.size() << ',' << fmt_double(l1.value) << ',' << fmt_double(ch.conductance) << ','
        << ug.max_degree() << '\n';
  }
  r.tables["spectra.csv"] = csv.str();
  r.summary["statistics"]["spectra"] = {{"lambda1", values},
                                        {"first_to_last_ratio", values.front() / values.back()}};
}

}  // namespace

Report run_scenario(const ScenarioConfig& c, const RunOptions& options) {
  validate(c);
  const GroupAction action = make_action(c);
  Report r;
  r.summary["config"] = to_json(c);
  r.summary["levels"] = json::array();
  r.summary["statistics"] = json::object();
  json runtimes = json::object();
  LevelCache cache{c, action, {}, r.summary["levels"], runtimes};
  for (const std::string& stat : c.statistics) {
    const auto start = Clock::now();
    if (stat == "distances") run_distances(c, cache, r);
    if (stat == "diameter") run_diameter(c, cache, r);
    if (stat == "capacity") run_capacity(c, cache, r);
    if (stat == "witness") run_witness(c, action, cache, r);
    if (stat == "kernels") run_kernels(c, action, cache, r);
    if (stat == "spectra") run_spectra(c, cache, r);
    runtimes[stat] = seconds_since(start);
  }
  double snap = 0.0;
  for (const auto& l : r.summary["levels"]) snap = std::max(snap, l["max_snap_error"].get<double>());
  r.summary["provenance"] = {{"version", version()}, {"seed", c.seed}, {"max_snap_error", snap}};
  if (options.record_runtimes) r.summary["provenance"]["runtimes_seconds"] = runtimes;
  return r;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << report.summary.dump(2) << '\n';
  }
  for (const auto& [name, body] : report.tables) {
    std::ofstream out(dir / name);
    out << body;
  }
}

}  // namespace warpcone
