#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pff/assembly.hpp"
#include "pff/material.hpp"
#include "pff/mesh.hpp"
#include "pff/solver.hpp"

namespace pff {

struct MeshSource {
  /// Mesh file in the native text format; the generator is used when empty.
  std::optional<std::filesystem::path> file;
  NotchedSquareSpec generated;
};

struct RunConfig {
  std::string name;
  MeshSource mesh;
  PlaneMode plane = PlaneMode::Strain;
  MaterialParams material;
  LoadProgram program;
  StaggeredConfig solver;
  std::filesystem::path output_directory = "output";
  bool write_vtk = true;
};

/// Directories searched for preset files: $PFF_PRESET_PATH (colon separated),
/// then the presets shipped with the sources.
std::vector<std::filesystem::path> preset_search_path();
/// Throws ConfigError (key "preset") when no file named `<name>.cfg` exists.
std::filesystem::path find_preset(const std::string& name);

/// INI-style config with [mesh], [material], [loading], [solver] and [output]
/// sections. A preset (from the argument, else `preset` in [run]) is loaded
/// first and the config's keys override it. Relative paths resolve against
/// the config file's directory.
RunConfig parse_config(const std::filesystem::path& path, const std::optional<std::string>& preset = std::nullopt);
RunConfig parse_config_string(const std::string& text, const std::filesystem::path& base_dir = ".",
                              const std::optional<std::string>& preset = std::nullopt);

Mesh build_mesh(const RunConfig& config);

/// Legacy ASCII unstructured grid: 3-component point vectors "displacement"
/// and point scalars "damage".
void write_vtk(std::ostream& os, const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& alpha);
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const Eigen::VectorXd& u,
               const Eigen::VectorXd& alpha);

inline constexpr const char* kCurveHeader =
    "step,applied_displacement_mm,reaction_force,E,D,W,iterations,converged_flag";

/// One units comment line, the header, then one row per step.
void write_curves(std::ostream& os, const std::vector<StepRecord>& steps, int dim);
void write_curves(const std::filesystem::path& path, const std::vector<StepRecord>& steps, int dim);

/// Total energy after every half-step: step,half_step,W.
void write_energy_log(const std::filesystem::path& path, const std::vector<StepRecord>& steps);

struct CurveRow {
  int step = 0;
  double applied_displacement = 0.0;
  double reaction = 0.0;
  double elastic = 0.0;
  double dissipated = 0.0;
  double total = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Throws ParseError on a malformed file.
std::vector<CurveRow> read_curves(const std::filesystem::path& path);
/// Throws ValidationError when the D column decreases.
void validate_curves(const std::vector<CurveRow>& rows);

}  // namespace pff
