#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pff {

enum class ElementKind { Tri3, Quad4, Tet4, Hex8 };

using Point3 = std::array<double, 3>;

int nodes_per_element(ElementKind kind);
/// Spatial dimension of the reference element (2 or 3).
int element_dim(ElementKind kind);
std::string_view to_string(ElementKind kind);
/// Inverse of to_string; throws UnsupportedElementError.
ElementKind element_kind_from_string(std::string_view name);

struct QuadratureRule {
  std::vector<Point3> points;
  std::vector<double> weights;
};

/// tri3 and tet4: one centroid point; quad4: 2x2 Gauss; hex8: 2x2x2 Gauss.
QuadratureRule default_rule(ElementKind kind);
/// Tensor Gauss rule of `order` points per direction (quad/hex) or a
/// degree-exact rule (tri/tet); used for accuracy cross-checks.
QuadratureRule gauss_rule(ElementKind kind, int order);

struct ShapeValues {
  std::vector<double> values;
  /// gradients[i][d] = dN_i / dxi_d in reference coordinates.
  std::vector<Point3> gradients;
};

/// Reference elements: tri/tet are the unit simplex, quad/hex are [-1,1]^d.
ShapeValues shape_and_gradients(ElementKind kind, const Point3& ref_point);

/// Strain components stored for a given spatial dimension:
/// 2D (eps_x, eps_y, gamma_xy); 3D (eps_x, eps_y, eps_z, gamma_xy, gamma_yz, gamma_zx).
constexpr int voigt_size(int dim) { return dim == 2 ? 3 : 6; }

/// Kinematic data of one quadrature point.
struct QuadraturePointData {
  Eigen::VectorXd shape;       // N_i
  Eigen::MatrixXd grad;        // B_s: dim x nen, row d holds dN_i/dx_d
  double weight = 0.0;         // |J| * quadrature weight
};

struct ElementMatrices {
  int dim = 0;
  std::vector<QuadraturePointData> points;

  /// Voigt strain-displacement matrix (voigt_size(dim) x dim*nen) at point q,
  /// dofs interleaved per node.
  Eigen::MatrixXd strain_displacement(std::size_t q) const;
};

/// Builds B_v and B_s at every point of `rule`. Throws InvertedElementError
/// when a Jacobian determinant is not strictly positive.
ElementMatrices compute_element_matrices(ElementKind kind,
                                         std::span<const Point3> node_coords,
                                         const QuadratureRule& rule);

/// Writes B_v for the given scalar gradients into `out` (resized as needed).
void fill_strain_displacement(const Eigen::MatrixXd& grad, Eigen::MatrixXd& out);

}  // namespace pff
