#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pff/elements.hpp"

namespace pff {

/// Homogeneous unstructured mesh. Coordinates in mm; 2D meshes keep z = 0.
struct Mesh {
  int dim = 2;
  ElementKind kind = ElementKind::Quad4;
  std::vector<Point3> nodes;
  /// Flat connectivity, nodes_per_element(kind) entries per element, 0-based.
  std::vector<int> connectivity;
  std::map<std::string, std::vector<int>> boundary_sets;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_elements() const;
  std::span<const int> element(std::size_t e) const;
  std::vector<Point3> element_coords(std::size_t e) const;
  /// Throws ConfigError for an unknown name.
  const std::vector<int>& boundary_set(const std::string& name) const;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Checks every invariant: index ranges, element kind vs. dim, non-empty
/// sets and positive Jacobians. Throws ValidationError / InvertedElementError.
void validate(const Mesh& mesh);

/// Sum of element volumes (areas in 2D) by quadrature.
double mesh_volume(const Mesh& mesh);
/// Diagonal of the axis-aligned bounding box.
double mesh_diameter(const Mesh& mesh);

/// Tensor-product quad4 (zs empty) or hex8 mesh on the given grid lines with
/// boundary sets left/right/bottom/top (+ front/back at z min/max).
Mesh structured_mesh(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> zs = {});

/// Local refinement of the notched-square generator. The grid is a tensor
/// product, so the box refines full-width rows and full-height columns; the
/// spacing grows linearly with distance from the box at rate `growth` until it
/// reaches the coarse size.
struct RefinementBox {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double size = 0.0;
  double growth = 0.25;
};

struct NotchedSquareSpec {
  double side_length = 1.0;
  std::array<double, 2> notch_start{0.0, 0.5};
  std::array<double, 2> notch_end{0.5, 0.5};
  double element_size = 0.02;
  int dim = 2;
  double thickness = 0.1;  // 3D only
  int layers = 0;          // 3D only; 0 derives the count from element_size
  std::optional<RefinementBox> refinement;
};

/// Structured specimen with a horizontal slit from the left edge. Nodes on the
/// slit left of the notch tip are duplicated; elements above the slit use the
/// copies, so the two crack faces are disconnected.
Mesh generate_notched_square(const NotchedSquareSpec& spec);

/// Grid coordinates on [0, length] that hit every breakpoint exactly. Spacing
/// is `coarse`, or the refinement size inside [fine_min, fine_max] with
/// linear growth outside.
std::vector<double> graded_axis(double length, std::vector<double> breakpoints, double coarse,
                                double fine_min = 0.0, double fine_max = 0.0, double fine = 0.0,
                                double growth = 0.25);

void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);

}  // namespace pff
