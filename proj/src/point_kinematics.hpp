#pragma once

// Quadrature-point helpers shared by the assembly and energy routines.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pff/assembly.hpp"

namespace pff::detail {

std::vector<int> element_dofs(const Mesh& mesh, std::size_t e, int components);
Eigen::VectorXd gather(std::span<const double> field, const Mesh& mesh, std::size_t e,
                       int components);
/// N a at the point, clamped to [0,1] against round-off.
double interpolate_damage(const QuadraturePointData& p, const Eigen::VectorXd& ae);
/// Full six-component strain; plane stress fills eps_z from sigma_z = 0.
Voigt point_strain(const QuadraturePointData& p, int dim, const Eigen::VectorXd& ue,
                   PlaneMode plane, const MaterialParams& params, double alpha_h);
/// 2D restriction (plane strain) or static condensation (plane stress) of D.
Eigen::MatrixXd reduce_matrix(const VoigtMatrix& d, int dim, PlaneMode plane);
Eigen::VectorXd reduce_vector(const Voigt& v, int dim);

}  // namespace pff::detail
