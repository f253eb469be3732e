#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "pff/errors.hpp"
#include "pff/io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const fs::path& config_path, const std::string& out, const std::string& preset, int snapshot_every,
        bool quiet) {
  pff::RunConfig cfg = pff::parse_config(config_path, preset.empty() ? std::nullopt : std::optional(preset));
  if (!out.empty()) cfg.output_directory = out;
  if (snapshot_every >= 0) cfg.program.snapshot_every = snapshot_every;
  fs::create_directories(cfg.output_directory);

  pff::Mesh mesh = pff::build_mesh(cfg);
  const int dim = mesh.dim;
  pff::Discretization disc(std::move(mesh), cfg.plane);
  if (!quiet)
    std::printf("%s: %zu nodes, %zu elements, l = %.6g mm, Gc = %.6g N/mm, %zu steps\n", cfg.name.c_str(),
                disc.num_nodes(), disc.num_elements(), cfg.material.internal_length(),
                cfg.material.fracture_toughness(), cfg.program.steps.size());

  const auto start = std::chrono::steady_clock::now();
  pff::RunObserver obs;
  obs.on_step = [&](const pff::StepRecord& r, const pff::FieldState&) {
    if (!quiet)
      std::printf("step %4d  u = %.6e  F = %.6e  E = %.6e  D = %.6e  iters = %d%s\n", r.step,
                  r.applied_displacement, r.reaction, r.energy.elastic, r.energy.dissipated, r.iterations,
                  r.converged ? "" : "  (not converged)");
    std::fflush(stdout);
  };
  if (cfg.write_vtk) {
    obs.on_snapshot = [&](const pff::StepRecord& r, const pff::FieldState& s) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%05d.vtk", r.step);
      pff::write_vtk(cfg.output_directory / name, disc.mesh(), s.u, s.alpha);
    };
  }
  const pff::LoadHistory history = pff::run_load_program(disc, cfg.material, cfg.program, cfg.solver, obs);

  const fs::path curves = cfg.output_directory / "curves.csv";
  pff::write_curves(curves, history.steps, dim);
  pff::write_energy_log(cfg.output_directory / "energy_log.csv", history.steps);
  pff::validate_curves(pff::read_curves(curves));

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (history.failure) {
    std::cerr << "error: " << *history.failure << '\n';
    return 1;
  }
  if (!quiet) std::printf("finished in %.1f s; results in %s\n", seconds, cfg.output_directory.string().c_str());
  return history.all_converged() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field fracture solver with a damage threshold"};
  app.require_subcommand(1);
  auto* cmd = app.add_subcommand("run", "run a load program from a config file");
  std::string config, out, preset;
  int snapshot_every = -1;
  bool quiet = false;
  cmd->add_option("config", config, "config file")->required();
  cmd->add_option("--out", out, "output directory (overrides the config)");
  cmd->add_option("--preset", preset, "preset loaded before the config");
  cmd->add_option("--snapshot-every", snapshot_every, "VTK snapshot cadence in steps (0 disables)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("-q,--quiet", quiet, "no per-step output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(config, out, preset, snapshot_every, quiet);
  } catch (const pff::ConfigError& e) {
    std::cerr << "config error [" << e.key() << "]: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}
