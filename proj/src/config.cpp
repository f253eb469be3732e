#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pff/errors.hpp"
#include "pff/io.hpp"

#ifndef PFF_PRESET_DIR
#define PFF_PRESET_DIR "presets"
#endif

namespace pff {

namespace fs = std::filesystem;
using boost::property_tree::ptree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string bare(const std::string& key) {
  const auto dot = key.rfind('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

ptree parse_ini(std::istream& is, const std::string& origin) {
  ptree t;
  try {
    boost::property_tree::ini_parser::read_ini(is, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(origin + ": " + e.message(), static_cast<int>(e.line()));
  }
  return t;
}

ptree load_ini(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_ini(in, path.string());
}

void overlay(ptree& base, const ptree& top) {
  for (const auto& [section, child] : top) {
    const ptree::path_type section_path(section, '\0');
    if (child.empty()) {
      base.put(section_path, child.data());
      continue;
    }
    auto existing = base.get_child_optional(section_path);
    ptree& target = existing ? *existing : base.put_child(section_path, ptree{});
    for (const auto& [key, value] : child) target.put(ptree::path_type(key, '\0'), value.data());
  }
}

class Reader {
public:
  explicit Reader(const ptree& t) : t_(t) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    const auto v = t_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const auto v = raw(key);
    return v && !v->empty() ? *v : fallback;
  }

  double number(const std::string& key, std::optional<double> fallback) {
    const auto v = raw(key);
    if (!v || v->empty()) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key '" + bare(key) + "' (" + key + ")", bare(key));
    }
    return to_number(key, *v);
  }

  int integer(const std::string& key, int fallback) {
    const auto v = raw(key);
    if (!v || v->empty()) return fallback;
    const double d = to_number(key, *v);
    if (d != static_cast<double>(static_cast<int>(d)))
      throw ConfigError("key '" + bare(key) + "' must be an integer", bare(key));
    return static_cast<int>(d);
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto v = raw(key);
    if (!v || v->empty()) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError("key '" + bare(key) + "' must be a boolean", bare(key));
  }

  std::vector<double> numbers(const std::string& key, std::size_t count, std::vector<double> fallback) {
    const auto v = raw(key);
    if (!v || v->empty()) return fallback;
    std::istringstream is(*v);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_number(key, tok));
    if (out.size() != count)
      throw ConfigError("key '" + bare(key) + "' expects " + std::to_string(count) + " numbers", bare(key));
    return out;
  }

  void reject_unknown() const {
    for (const auto& [section, child] : t_) {
      if (child.empty()) {
        if (!used_.count(section)) throw ConfigError("unknown key '" + section + "'", section);
        continue;
      }
      for (const auto& [key, value] : child) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) throw ConfigError("unknown key '" + full + "'", key);
      }
    }
  }

private:
  static double to_number(const std::string& key, const std::string& s) {
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(d))
      throw ConfigError("key '" + bare(key) + "' has invalid numeric value '" + s + "'", bare(key));
    return d;
  }

  const ptree& t_;
  std::set<std::string> used_;
};

int parse_component(const std::string& s, const std::string& key) {
  if (s == "x" || s == "0") return 0;
  if (s == "y" || s == "1") return 1;
  if (s == "z" || s == "2") return 2;
  throw ConfigError("invalid component '" + s + "' (expected x, y or z)", key);
}

// "set:comp[=value]" entries separated by commas or whitespace
std::vector<DirichletCondition> parse_conditions(const std::string& s, const std::string& key) {
  std::vector<DirichletCondition> out;
  std::string spec = s;
  for (char& c : spec)
    if (c == ',') c = ' ';
  std::istringstream is(spec);
  std::string tok;
  while (is >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos || colon == 0)
      throw ConfigError("condition '" + tok + "' must read set:component[=value]", key);
    DirichletCondition c;
    c.set = tok.substr(0, colon);
    std::string rest = tok.substr(colon + 1);
    if (const auto eq = rest.find('='); eq != std::string::npos) {
      const std::string v = rest.substr(eq + 1);
      char* end = nullptr;
      c.value = std::strtod(v.c_str(), &end);
      if (v.empty() || end != v.c_str() + v.size()) throw ConfigError("invalid value in '" + tok + "'", key);
      rest = rest.substr(0, eq);
    }
    c.component = parse_component(rest, key);
    out.push_back(c);
  }
  return out;
}

LinearSolverKind parse_solver_kind(const std::string& s, const std::string& key) {
  if (s == "cg") return LinearSolverKind::Cg;
  if (s == "direct") return LinearSolverKind::Direct;
  throw ConfigError("invalid linear solver '" + s + "' (expected cg or direct)", key);
}

RunConfig build(const ptree& tree, const fs::path& base_dir) {
  Reader r(tree);
  RunConfig c;
  c.name = r.text("run.name", "run");
  r.raw("run.preset");

  // mesh
  const std::string source = r.text("mesh.source", "generated");
  const auto file = r.raw("mesh.file");
  if (source == "file") {
    if (!file || file->empty()) throw ConfigError("missing required key 'file' for mesh source 'file'", "file");
    fs::path p = *file;
    if (p.is_relative()) p = base_dir / p;
    if (!fs::exists(p)) throw ConfigError("mesh file " + p.string() + " does not exist", "file");
    c.mesh.file = p;
  } else if (source != "generated") {
    throw ConfigError("invalid mesh source '" + source + "' (expected generated or file)", "source");
  }
  NotchedSquareSpec& g = c.mesh.generated;
  g.side_length = r.number("mesh.side_length", g.side_length);
  const auto ns = r.numbers("mesh.notch_start", 2, {g.notch_start[0], g.notch_start[1]});
  const auto ne = r.numbers("mesh.notch_end", 2, {g.notch_end[0], g.notch_end[1]});
  g.notch_start = {ns[0], ns[1]};
  g.notch_end = {ne[0], ne[1]};
  g.element_size = r.number("mesh.element_size", g.element_size);
  g.dim = r.integer("mesh.dim", g.dim);
  if (g.dim != 2 && g.dim != 3) throw ConfigError("dim must be 2 or 3", "dim");
  g.thickness = r.number("mesh.thickness", g.thickness);
  g.layers = r.integer("mesh.layers", g.layers);
  const auto rx = r.numbers("mesh.refine_x", 2, {0.0, 0.0});
  const auto ry = r.numbers("mesh.refine_y", 2, {0.0, 0.0});
  const double rsize = r.number("mesh.refine_size", 0.0);
  const double rgrowth = r.number("mesh.refine_growth", 0.25);
  if (rsize > 0.0) {
    if (!(rgrowth > 0.0)) throw ConfigError("refine_growth must be positive", "refine_growth");
    g.refinement = RefinementBox{rx[0], rx[1], ry[0], ry[1], rsize, rgrowth};
  } else if (rsize < 0.0) {
    throw ConfigError("refine_size must be positive", "refine_size");
  }
  const std::string plane = r.text("mesh.plane", "strain");
  if (plane == "strain") c.plane = PlaneMode::Strain;
  else if (plane == "stress") c.plane = PlaneMode::Stress;
  else throw ConfigError("invalid plane mode '" + plane + "' (expected strain or stress)", "plane");

  // material
  MaterialParams& m = c.material;
  m.bulk_modulus = r.number("material.K", std::nullopt);
  m.poisson_ratio = r.number("material.nu", std::nullopt);
  m.w0 = r.number("material.w0", std::nullopt);
  m.eta = r.number("material.eta", std::nullopt);
  m.model = dissipation_model_from_string(r.text("material.dissipation", "threshold"));
  m.residual_stiffness = r.number("material.residual_stiffness", 0.0);
  m.validate();

  // loading
  const auto loaded = r.raw("loading.loaded_set");
  if (!loaded || loaded->empty()) throw ConfigError("missing required key 'loaded_set'", "loaded_set");
  const auto comp = r.raw("loading.loaded_component");
  if (!comp || comp->empty()) throw ConfigError("missing required key 'loaded_component'", "loaded_component");
  const int component = parse_component(*comp, "loaded_component");
  const double increment = r.number("loading.increment", std::nullopt);
  const double final_value = r.number("loading.final_displacement", std::nullopt);
  const auto fixed = parse_conditions(r.text("loading.fixed", ""), "fixed");
  c.program = LoadProgram::monotonic(fixed, *loaded, component, increment, final_value);
  c.program.reaction_set = r.text("loading.reaction_set", *loaded);
  if (const auto rc = r.raw("loading.reaction_component"); rc && !rc->empty())
    c.program.reaction_component = parse_component(*rc, "reaction_component");

  // solver
  StaggeredConfig& s = c.solver;
  s.t_u = r.number("solver.t_u", s.t_u);
  s.t_d = r.number("solver.t_d", s.t_d);
  s.k_max = r.integer("solver.k_max", s.k_max);
  s.relative_norms = r.boolean("solver.relative_norms", s.relative_norms);
  s.extrapolation = r.number("solver.extrapolation", s.extrapolation);
  const std::string mode = r.text("solver.damage_solve", "bound_constrained");
  if (mode == "bound_constrained") s.damage_mode = DamageSolveMode::BoundConstrained;
  else if (mode == "projection") s.damage_mode = DamageSolveMode::Projection;
  else throw ConfigError("invalid damage_solve '" + mode + "'", "damage_solve");
  const std::string irr = r.text("solver.irreversibility", "step");
  if (irr == "inner") s.irreversibility = IrreversibilityMode::Inner;
  else if (irr == "step") s.irreversibility = IrreversibilityMode::Step;
  else throw ConfigError("invalid irreversibility '" + irr + "'", "irreversibility");
  s.elastic_max_iterations = r.integer("solver.elastic_max_iterations", s.elastic_max_iterations);
  s.elasticity_solver.kind = parse_solver_kind(r.text("solver.elasticity_solver", "cg"), "elasticity_solver");
  s.damage_solver.kind = parse_solver_kind(r.text("solver.damage_solver", "cg"), "damage_solver");
  const double tol = r.number("solver.cg_tolerance", 1e-10);
  const int max_it = r.integer("solver.cg_max_iterations", 0);
  if (max_it < 0) throw ConfigError("cg_max_iterations must be non-negative", "cg_max_iterations");
  s.elasticity_solver.tolerance = s.damage_solver.tolerance = tol;
  s.elasticity_solver.max_iterations = s.damage_solver.max_iterations = max_it;
  s.validate();

  // output
  fs::path out = r.text("output.directory", "output");
  c.output_directory = out.is_relative() ? base_dir / out : out;
  c.program.snapshot_every = r.integer("output.snapshot_every", 0);
  if (c.program.snapshot_every < 0) throw ConfigError("snapshot_every must be non-negative", "snapshot_every");
  c.write_vtk = r.boolean("output.vtk", true);

  r.reject_unknown();
  return c;
}

RunConfig resolve(ptree tree, const fs::path& base_dir, const std::optional<std::string>& preset) {
  std::optional<std::string> name = preset;
  if (!name) {
    if (const auto p = tree.get_optional<std::string>("run.preset"); p && !trim(*p).empty()) name = trim(*p);
  }
  if (name) {
    ptree merged = load_ini(find_preset(*name));
    overlay(merged, tree);
    tree = std::move(merged);
  }
  return build(tree, base_dir);
}

}  // namespace

std::vector<fs::path> preset_search_path() {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("PFF_PRESET_PATH")) {
    std::istringstream is(env);
    std::string d;
    while (std::getline(is, d, ':'))
      if (!d.empty()) dirs.emplace_back(d);
  }
  dirs.emplace_back(PFF_PRESET_DIR);
  return dirs;
}

fs::path find_preset(const std::string& name) {
  for (const auto& d : preset_search_path()) {
    const fs::path p = d / (name + ".cfg");
    if (fs::exists(p)) return p;
  }
  throw ConfigError("unknown preset '" + name + "'", "preset");
}

RunConfig parse_config(const fs::path& path, const std::optional<std::string>& preset) {
  if (!fs::exists(path)) throw IoError("config file " + path.string() + " does not exist");
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return resolve(load_ini(path), base, preset);
}

RunConfig parse_config_string(const std::string& text, const fs::path& base_dir,
                              const std::optional<std::string>& preset) {
  std::istringstream is(text);
  return resolve(parse_ini(is, "<string>"), base_dir, preset);
}

Mesh build_mesh(const RunConfig& config) {
  if (config.mesh.file) return load_mesh(*config.mesh.file);
  return generate_notched_square(config.mesh.generated);
}

}  // namespace pff
