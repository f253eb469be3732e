#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pff/errors.hpp"
#include "pff/io.hpp"
#include "support.hpp"

using namespace pff;
namespace fs = std::filesystem;

namespace {

const char* kMinimal =
    "[mesh]\nelement_size = 0.25\n"
    "[material]\nK = 121030\nnu = 0.227\nw0 = 75.94\neta = 0.052\n"
    "[loading]\nloaded_set = top\nloaded_component = y\nincrement = 1e-3\nfinal_displacement = 3e-3\n"
    "fixed = bottom:x bottom:y\n";

std::string config_error_key(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / "pff_io_tests";
  fs::create_directories(d);
  return d / name;
}

StepRecord record(int step, double d) {
  StepRecord r;
  r.step = step;
  r.applied_displacement = 1e-3 * step;
  r.reaction = 10.0 * step;
  r.energy.dissipated = d;
  r.energy.elastic = 0.5;
  r.energy.total = 0.5 + d;
  r.iterations = 3;
  r.converged = true;
  r.half_step_energies = {1.0, 0.9};
  return r;
}

}  // namespace

TEST_CASE("experiment presets") {
  SUBCASE("notched square in tension") {
    const auto c = parse_config_string("", ".", "experiment1-2d");
    CHECK(c.material.bulk_modulus == 121030.0);
    CHECK(c.material.poisson_ratio == 0.227);
    CHECK(c.material.w0 == 75.94);
    CHECK(c.material.eta == 0.052);
    CHECK(c.program.steps.size() == 60);
    CHECK(c.program.steps.back().applied_displacement == 6e-3);
    CHECK(c.program.reaction_set == "top");
    CHECK(c.program.reaction_component == 1);
    CHECK(c.plane == PlaneMode::Strain);
  }
  SUBCASE("notched square in shear") {
    const auto c = parse_config_string("", ".", "experiment2-2d");
    CHECK(c.program.steps.size() == 1270);
    CHECK(c.program.steps.front().applied_displacement == 1e-5);
    CHECK(c.program.reaction_component == 0);
    bool left_y = false, right_y = false;
    for (const auto& bc : c.program.steps.front().conditions) {
      left_y |= bc.set == "left" && bc.component == 1;
      right_y |= bc.set == "right" && bc.component == 1;
    }
    CHECK(left_y);
    CHECK(right_y);
  }
  SUBCASE("slab") {
    const auto c = parse_config_string("", ".", "experiment1-3d");
    CHECK(c.mesh.generated.dim == 3);
    const Mesh m = build_mesh(c);
    CHECK(m.kind == ElementKind::Hex8);
  }
  CHECK_THROWS_AS(find_preset("no-such-preset"), ConfigError);
}

TEST_CASE("config parsing") {
  SUBCASE("minimal config") {
    const auto c = parse_config_string(kMinimal);
    CHECK(c.program.steps.size() == 3);
    CHECK(c.mesh.generated.element_size == 0.25);
    CHECK(build_mesh(c).num_elements() == 16);
  }
  SUBCASE("missing w0 names the key") {
    std::string t = kMinimal;
    t.erase(t.find("w0 = 75.94\n"), 11);
    CHECK(config_error_key(t) == "w0");
  }
  SUBCASE("unknown key") { CHECK(config_error_key(std::string(kMinimal) + "[solver]\nt_x = 1\n") == "t_x"); }
  SUBCASE("invalid number") {
    std::string t = kMinimal;
    t.replace(t.find("75.94"), 5, "7x5");
    CHECK(config_error_key(t) == "w0");
  }
  SUBCASE("invalid component") {
    std::string t = kMinimal;
    t.replace(t.find("loaded_component = y"), 20, "loaded_component = w");
    CHECK(config_error_key(t) == "loaded_component");
  }
  SUBCASE("physically invalid material") {
    std::string t = kMinimal;
    t.replace(t.find("nu = 0.227"), 10, "nu = 0.6  ");
    CHECK_THROWS_AS(parse_config_string(t), ValidationError);
  }
  SUBCASE("keys override the preset") {
    const auto c = parse_config_string("[loading]\nincrement = 1e-4\n[solver]\nk_max = 7\n", ".", "experiment2-2d");
    CHECK(c.program.steps.size() == 127);
    CHECK(c.solver.k_max == 7);
    CHECK(c.material.w0 == 75.94);
  }
  SUBCASE("missing mesh file") {
    CHECK(config_error_key(std::string(kMinimal) + "[run]\n") != "file");
    std::string t = kMinimal;
    t.replace(t.find("element_size = 0.25"), 19, "source = file\nfile = nowhere.mesh");
    CHECK(config_error_key(t) == "file");
  }
  SUBCASE("mesh file relative to the config") {
    const auto mesh_path = scratch("square.mesh");
    save_mesh(test::unit_grid(2, 2), mesh_path);
    const auto cfg_path = scratch("square.cfg");
    std::string t = kMinimal;
    t.replace(t.find("element_size = 0.25"), 19, "source = file\nfile = square.mesh");
    std::ofstream(cfg_path) << t;
    const auto c = parse_config(cfg_path);
    CHECK(build_mesh(c).num_elements() == 4);
  }
  SUBCASE("unreadable syntax reports a parse error") { CHECK_THROWS_AS(parse_config_string("[mesh\n"), ParseError); }
}

TEST_CASE("VTK output") {
  SUBCASE("single quad") {
    const Mesh m = test::unit_grid(1, 1);
    std::ostringstream os;
    write_vtk(os, m, Eigen::VectorXd::Zero(8), Eigen::VectorXd::Zero(4));
    const std::string s = os.str();
    CHECK(s.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
    CHECK(s.find("POINTS 4 double") != std::string::npos);
    CHECK(s.find("CELLS 1 5") != std::string::npos);
    CHECK(s.find("CELL_TYPES 1\n9\n") != std::string::npos);
    CHECK(s.find("VECTORS displacement double") != std::string::npos);
    CHECK(s.find("SCALARS damage double 1\nLOOKUP_TABLE default\n0\n0\n0\n0\n") != std::string::npos);
  }
  SUBCASE("hexahedra") {
    const Mesh m = test::unit_cube(2);
    std::ostringstream os;
    write_vtk(os, m, Eigen::VectorXd::Zero(81), Eigen::VectorXd::Zero(27));
    const std::string s = os.str();
    CHECK(s.find("CELL_TYPES 8\n12\n12\n12\n12\n12\n12\n12\n12\n") != std::string::npos);
  }
  SUBCASE("field sizes must match") {
    std::ostringstream os;
    CHECK_THROWS_AS(write_vtk(os, test::unit_grid(1, 1), Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4)), SizeError);
  }
  SUBCASE("unwritable path") {
    CHECK_THROWS_AS(write_vtk(fs::path("/nonexistent-dir/x.vtk"), test::unit_grid(1, 1), Eigen::VectorXd::Zero(8),
                              Eigen::VectorXd::Zero(4)),
                    IoError);
  }
}

TEST_CASE("curve files") {
  const auto path = scratch("curves.csv");
  SUBCASE("round trip") {
    std::vector<StepRecord> steps{record(1, 0.0), record(2, 0.1), record(3, 0.25)};
    write_curves(path, steps, 2);
    const auto rows = read_curves(path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].step == 3);
    CHECK(rows[2].dissipated == 0.25);
    CHECK(rows[1].reaction == 20.0);
    CHECK(rows[0].converged);
    CHECK_NOTHROW(validate_curves(rows));
    const std::string text = slurp(path);
    CHECK(text.find(kCurveHeader) != std::string::npos);
    CHECK(text[0] == '#');
  }
  SUBCASE("header only") {
    write_curves(path, {}, 2);
    CHECK(read_curves(path).empty());
  }
  SUBCASE("decreasing dissipation is rejected") {
    write_curves(path, {record(1, 0.3), record(2, 0.2)}, 2);
    CHECK_THROWS_AS(validate_curves(read_curves(path)), ValidationError);
  }
  SUBCASE("malformed files") {
    std::ofstream(path) << "step,x\n1,2\n";
    CHECK_THROWS_AS(read_curves(path), ParseError);
    std::ofstream(path) << kCurveHeader << "\n1,2,3\n";
    CHECK_THROWS_AS(read_curves(path), ParseError);
    CHECK_THROWS_AS(read_curves(scratch("absent.csv")), IoError);
  }
  SUBCASE("energy log has one row per half-step") {
    const auto log = scratch("energy.csv");
    write_energy_log(log, {record(1, 0.0), record(2, 0.1)});
    const std::string t = slurp(log);
    CHECK(t.find("1,1,1\n1,2,0.90000000000000002\n2,1,1\n") != std::string::npos);
  }
}

TEST_CASE("repeated runs write identical curves") {
  const auto c = parse_config_string(kMinimal);
  const Discretization disc(build_mesh(c), c.plane);
  auto run = [&](const fs::path& out) {
    const auto h = run_load_program(disc, c.material, c.program, c.solver);
    write_curves(out, h.steps, 2);
    return slurp(out);
  };
  const auto a = run(scratch("run_a.csv"));
  const auto b = run(scratch("run_b.csv"));
  CHECK(a == b);
  CHECK(read_curves(scratch("run_a.csv")).size() == 3);
}
