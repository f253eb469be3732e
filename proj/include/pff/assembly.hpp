#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pff/elements.hpp"
#include "pff/material.hpp"
#include "pff/mesh.hpp"

namespace pff {

/// Out-of-plane assumption for 2D meshes; ignored in 3D.
enum class PlaneMode { Strain, Stress };

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Mesh plus everything that does not change during a run: element
/// kinematics at every quadrature point and the sparsity patterns of the
/// displacement and damage systems.
class Discretization {
public:
  explicit Discretization(Mesh mesh, PlaneMode plane = PlaneMode::Strain);

  const Mesh& mesh() const { return mesh_; }
  int dim() const { return mesh_.dim; }
  PlaneMode plane_mode() const { return plane_; }
  std::size_t num_nodes() const { return mesh_.num_nodes(); }
  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_displacement_dofs() const { return mesh_.num_nodes() * static_cast<std::size_t>(dim()); }
  std::size_t num_quadrature_points() const { return qp_offsets_.back(); }

  const ElementMatrices& element(std::size_t e) const { return elements_[e]; }
  /// Index of the first quadrature point of element e in per-point arrays.
  std::size_t qp_offset(std::size_t e) const { return qp_offsets_[e]; }

  const SparseMatrix& displacement_pattern() const { return u_pattern_; }
  const SparseMatrix& damage_pattern() const { return a_pattern_; }
  /// Positions in the pattern's value array for the element's local (a,b) pairs, row-major.
  std::span<const int> displacement_slots(std::size_t e) const;
  std::span<const int> damage_slots(std::size_t e) const;

private:
  Mesh mesh_;
  PlaneMode plane_;
  std::vector<ElementMatrices> elements_;
  std::vector<std::size_t> qp_offsets_;
  SparseMatrix u_pattern_, a_pattern_;
  std::vector<int> u_slots_, a_slots_;
  std::size_t u_stride_ = 0, a_stride_ = 0;
};

/// Matrix and right-hand side of one linear subproblem. Global dof index is
/// node * components + component.
struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  int components = 1;
};

/// Per quadrature point flag: 1 when tr(eps) > 0 (volumetric term degrades).
using TensionPattern = std::vector<std::int8_t>;

TensionPattern tension_pattern(const Discretization& disc, const MaterialParams& params,
                               std::span<const double> alpha, std::span<const double> u);

/// Elasticity stiffness with the tension/compression branch of every
/// quadrature point taken from the strain of `u_iterate`. The right-hand side
/// is zero (no external loads).
SparseSystem assemble_elasticity(const Discretization& disc, const MaterialParams& params,
                                 std::span<const double> alpha, std::span<const double> u_iterate);
SparseSystem assemble_elasticity(const Discretization& disc, const MaterialParams& params,
                                 std::span<const double> alpha, const TensionPattern& pattern,
                                 std::span<const double> u_iterate);

/// Damage subproblem for fixed displacements:
/// [N^T (2 psi+) N + eta^2 B_s^T B_s] a = N^T (2 psi+ - w0) for the threshold model,
/// with an extra 2 w0 N^T N and no -w0 for the no-threshold model.
SparseSystem assemble_damage(const Discretization& disc, const MaterialParams& params,
                             std::span<const double> u);
/// Same, with the damage used for the plane-stress out-of-plane strain.
SparseSystem assemble_damage(const Discretization& disc, const MaterialParams& params,
                             std::span<const double> u, std::span<const double> alpha_lagged);

struct DirichletValue {
  int dof;
  double value;
};

/// Symmetric elimination: rhs -= K(:,c) value, row/column c cleared, K(c,c) = 1,
/// rhs(c) = value. Cleared entries stay in the pattern as explicit zeros.
void apply_dirichlet(SparseSystem& system, std::span<const DirichletValue> constraints);
/// Constrains one component of every node of a boundary set; throws ConfigError
/// for an unknown set and SizeError for an invalid component.
void apply_dirichlet(SparseSystem& system, const Mesh& mesh, const std::string& set, int component,
                     double value);

/// Gradient of the stored energy with respect to u: int B_v^T sigma(eps, a).
Eigen::VectorXd internal_force(const Discretization& disc, const MaterialParams& params,
                               std::span<const double> alpha, std::span<const double> u);

/// Gradient of the total energy with respect to the nodal damage:
/// int N^T (f'(a) psi+ + w'(a)) + eta^2 B_s^T B_s a.
Eigen::VectorXd damage_gradient(const Discretization& disc, const MaterialParams& params,
                                std::span<const double> u, std::span<const double> alpha);

/// Sum over the set of one component of the internal force. Units: N per
/// unit thickness in 2D, N in 3D.
double reaction_force(const Discretization& disc, const MaterialParams& params,
                      std::span<const double> alpha, std::span<const double> u,
                      const std::string& set, int component);

/// Stored energy E = int (f(a)+k) psi+ + psi- for fixed damage.
double stored_energy(const Discretization& disc, const MaterialParams& params,
                     std::span<const double> alpha, std::span<const double> u);
/// Dissipated work D = int w(a) + eta^2/2 |grad a|^2.
double dissipated_energy(const Discretization& disc, const MaterialParams& params,
                         std::span<const double> alpha);

}  // namespace pff
