#include "pff/assembly.hpp"

#include <algorithm>
#include <functional>

#include "pff/errors.hpp"
#include "point_kinematics.hpp"

namespace pff {

namespace {

std::vector<int> pattern_slots(const SparseMatrix& pattern, const std::vector<int>& dofs) {
  std::vector<int> slots;
  slots.reserve(dofs.size() * dofs.size());
  const int* outer = pattern.outerIndexPtr();
  const int* inner = pattern.innerIndexPtr();
  for (int row : dofs)
    for (int col : dofs) {
      const int* begin = inner + outer[col];
      const int* end = inner + outer[col + 1];
      const int* pos = std::lower_bound(begin, end, row);
      slots.push_back(static_cast<int>(pos - inner));
    }
  return slots;
}

SparseMatrix build_pattern(std::size_t n, std::size_t num_elements,
                           const std::function<std::vector<int>(std::size_t)>& dofs_of) {
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t e = 0; e < num_elements; ++e) {
    const auto dofs = dofs_of(e);
    for (int r : dofs)
      for (int c : dofs) trips.emplace_back(r, c, 0.0);
  }
  SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

void check_sizes(const Discretization& disc, std::span<const double> alpha,
                 std::span<const double> u) {
  if (alpha.size() != disc.num_nodes())
    throw SizeError("damage vector has " + std::to_string(alpha.size()) + " entries, mesh has " +
                    std::to_string(disc.num_nodes()) + " nodes");
  if (u.size() != disc.num_displacement_dofs())
    throw SizeError("displacement vector has " + std::to_string(u.size()) + " entries, expected " +
                    std::to_string(disc.num_displacement_dofs()));
}

void check_damage_range(std::span<const double> alpha) {
  for (double a : alpha)
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("nodal damage outside [0,1]");
}

}  // namespace

namespace detail {

std::vector<int> element_dofs(const Mesh& mesh, std::size_t e, int components) {
  std::vector<int> dofs;
  for (int n : mesh.element(e))
    for (int c = 0; c < components; ++c) dofs.push_back(n * components + c);
  return dofs;
}

Eigen::VectorXd gather(std::span<const double> field, const Mesh& mesh, std::size_t e,
                       int components) {
  const auto nodes = mesh.element(e);
  Eigen::VectorXd out(static_cast<Eigen::Index>(nodes.size()) * components);
  Eigen::Index k = 0;
  for (int n : nodes)
    for (int c = 0; c < components; ++c)
      out(k++) = field[static_cast<std::size_t>(n) * components + c];
  return out;
}

double interpolate_damage(const QuadraturePointData& p, const Eigen::VectorXd& ae) {
  return std::clamp(p.shape.dot(ae), 0.0, 1.0);
}

Voigt point_strain(const QuadraturePointData& p, int dim, const Eigen::VectorXd& ue,
                   PlaneMode plane, const MaterialParams& params, double alpha_h) {
  Voigt e = Voigt::Zero();
  const Eigen::Index nen = p.grad.cols();
  if (dim == 2) {
    double ex = 0, ey = 0, gxy = 0;
    for (Eigen::Index i = 0; i < nen; ++i) {
      const double dx = p.grad(0, i), dy = p.grad(1, i);
      const double ux = ue(2 * i), uy = ue(2 * i + 1);
      ex += dx * ux;
      ey += dy * uy;
      gxy += dy * ux + dx * uy;
    }
    if (plane == PlaneMode::Stress) return plane_stress_strain(params, ex, ey, gxy, alpha_h);
    e(0) = ex;
    e(1) = ey;
    e(3) = gxy;
    return e;
  }
  for (Eigen::Index i = 0; i < nen; ++i) {
    const double dx = p.grad(0, i), dy = p.grad(1, i), dz = p.grad(2, i);
    const double ux = ue(3 * i), uy = ue(3 * i + 1), uz = ue(3 * i + 2);
    e(0) += dx * ux;
    e(1) += dy * uy;
    e(2) += dz * uz;
    e(3) += dy * ux + dx * uy;
    e(4) += dz * uy + dy * uz;
    e(5) += dz * ux + dx * uz;
  }
  return e;
}

Eigen::MatrixXd reduce_matrix(const VoigtMatrix& d, int dim, PlaneMode plane) {
  if (dim == 3) return d;
  constexpr int r[3] = {0, 1, 3};
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = d(r[i], r[j]);
  if (plane == PlaneMode::Stress && d(2, 2) > 0.0)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) -= d(r[i], 2) * d(2, r[j]) / d(2, 2);
  return out;
}

Eigen::VectorXd reduce_vector(const Voigt& v, int dim) {
  if (dim == 3) return v;
  return Eigen::Vector3d(v(0), v(1), v(3));
}

}  // namespace detail

using namespace detail;

Discretization::Discretization(Mesh mesh, PlaneMode plane) : mesh_(std::move(mesh)), plane_(plane) {
  validate(mesh_);
  const QuadratureRule rule = default_rule(mesh_.kind);
  elements_.reserve(mesh_.num_elements());
  qp_offsets_.push_back(0);
  for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
    const auto xs = mesh_.element_coords(e);
    elements_.push_back(compute_element_matrices(mesh_.kind, xs, rule));
    qp_offsets_.push_back(qp_offsets_.back() + elements_.back().points.size());
  }

  const int d = dim();
  u_pattern_ = build_pattern(num_displacement_dofs(), num_elements(),
                             [&](std::size_t e) { return element_dofs(mesh_, e, d); });
  a_pattern_ = build_pattern(num_nodes(), num_elements(),
                             [&](std::size_t e) { return element_dofs(mesh_, e, 1); });
  const auto nen = static_cast<std::size_t>(nodes_per_element(mesh_.kind));
  u_stride_ = nen * nen * static_cast<std::size_t>(d * d);
  a_stride_ = nen * nen;
  for (std::size_t e = 0; e < num_elements(); ++e) {
    const auto us = pattern_slots(u_pattern_, element_dofs(mesh_, e, d));
    u_slots_.insert(u_slots_.end(), us.begin(), us.end());
    const auto as = pattern_slots(a_pattern_, element_dofs(mesh_, e, 1));
    a_slots_.insert(a_slots_.end(), as.begin(), as.end());
  }
}

std::span<const int> Discretization::displacement_slots(std::size_t e) const {
  return std::span<const int>(u_slots_).subspan(e * u_stride_, u_stride_);
}

std::span<const int> Discretization::damage_slots(std::size_t e) const {
  return std::span<const int>(a_slots_).subspan(e * a_stride_, a_stride_);
}

TensionPattern tension_pattern(const Discretization& disc, const MaterialParams& params,
                               std::span<const double> alpha, std::span<const double> u) {
  check_sizes(disc, alpha, u);
  TensionPattern pattern(disc.num_quadrature_points(), 0);
  const Mesh& mesh = disc.mesh();
  for (std::size_t e = 0; e < disc.num_elements(); ++e) {
    const auto ue = gather(u, mesh, e, disc.dim());
    const auto ae = gather(alpha, mesh, e, 1);
    const auto& em = disc.element(e);
    for (std::size_t q = 0; q < em.points.size(); ++q) {
      const auto& p = em.points[q];
      const Voigt eps = point_strain(p, disc.dim(), ue, disc.plane_mode(), params,
                                     interpolate_damage(p, ae));
      pattern[disc.qp_offset(e) + q] = (eps(0) + eps(1) + eps(2)) > 0.0 ? 1 : 0;
    }
  }
  return pattern;
}

SparseSystem assemble_elasticity(const Discretization& disc, const MaterialParams& params,
                                 std::span<const double> alpha, std::span<const double> u_iterate) {
  return assemble_elasticity(disc, params, alpha, tension_pattern(disc, params, alpha, u_iterate),
                             u_iterate);
}

SparseSystem assemble_elasticity(const Discretization& disc, const MaterialParams& params,
                                 std::span<const double> alpha, const TensionPattern& pattern,
                                 std::span<const double> u_iterate) {
  check_sizes(disc, alpha, u_iterate);
  check_damage_range(alpha);
  if (pattern.size() != disc.num_quadrature_points())
    throw SizeError("tension pattern does not match the quadrature point count");
  const Mesh& mesh = disc.mesh();
  const int dim = disc.dim();
  SparseSystem sys;
  sys.components = dim;
  sys.matrix = disc.displacement_pattern();
  std::fill_n(sys.matrix.valuePtr(), sys.matrix.nonZeros(), 0.0);
  sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_displacement_dofs()));
  double* values = sys.matrix.valuePtr();

  // plane strain and 3D: D = cv K m m^T + cd 2 mu P_dev, so
  // ke(ai,bj) = w [(cv K - 2/3 cd mu) g_ai g_bj + cd mu (delta_ij g_a.g_b + g_aj g_bi)]
  const bool condensed = dim == 2 && disc.plane_mode() == PlaneMode::Stress;
  const double K = params.bulk_modulus, mu = params.shear_modulus();
  Eigen::MatrixXd b, ke;
  for (std::size_t e = 0; e < disc.num_elements(); ++e) {
    const auto& em = disc.element(e);
    const auto ae = gather(alpha, mesh, e, 1);
    const Eigen::Index nen = static_cast<Eigen::Index>(mesh.element(e).size());
    const Eigen::Index ndof = nen * dim;
    ke.setZero(ndof, ndof);
    for (std::size_t q = 0; q < em.points.size(); ++q) {
      const auto& p = em.points[q];
      const double a = interpolate_damage(p, ae);
      const bool tension = pattern[disc.qp_offset(e) + q] != 0;
      if (condensed) {
        const Eigen::MatrixXd d =
            reduce_matrix(constitutive_matrix(params, a, tension ? 1.0 : -1.0), dim, disc.plane_mode());
        fill_strain_displacement(p.grad, b);
        ke.noalias() += p.weight * (b.transpose() * d * b);
        continue;
      }
      const double cd = degradation(a) + params.residual_stiffness;
      const double cv = tension ? cd : 1.0;
      const double vol = p.weight * (cv * K - 2.0 / 3.0 * cd * mu);
      const double dev = p.weight * cd * mu;
      const auto& g = p.grad;
      for (Eigen::Index bn = 0; bn < nen; ++bn)
        for (Eigen::Index an = 0; an < nen; ++an) {
          double dot = 0.0;
          for (int k = 0; k < dim; ++k) dot += g(k, an) * g(k, bn);
          for (int j = 0; j < dim; ++j)
            for (int i = 0; i < dim; ++i)
              ke(an * dim + i, bn * dim + j) +=
                  vol * g(i, an) * g(j, bn) + dev * ((i == j ? dot : 0.0) + g(j, an) * g(i, bn));
        }
    }
    const auto slots = disc.displacement_slots(e);
    for (Eigen::Index r = 0; r < ndof; ++r)
      for (Eigen::Index c = 0; c < ndof; ++c) values[slots[static_cast<std::size_t>(r * ndof + c)]] += ke(r, c);
  }
  return sys;
}

SparseSystem assemble_damage(const Discretization& disc, const MaterialParams& params,
                             std::span<const double> u, std::span<const double> alpha_lagged) {
  const Mesh& mesh = disc.mesh();
  if (u.size() != disc.num_displacement_dofs()) throw SizeError("displacement vector size mismatch");
  std::vector<double> zeros;
  if (alpha_lagged.empty()) {
    zeros.assign(disc.num_nodes(), 0.0);
    alpha_lagged = zeros;
  }
  check_sizes(disc, alpha_lagged, u);
  SparseSystem sys;
  sys.components = 1;
  sys.matrix = disc.damage_pattern();
  std::fill_n(sys.matrix.valuePtr(), sys.matrix.nonZeros(), 0.0);
  sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_nodes()));
  double* values = sys.matrix.valuePtr();
  const double eta2 = params.eta * params.eta;
  const bool threshold = params.model == DissipationModel::Threshold;

  Eigen::MatrixXd ke;
  Eigen::VectorXd fe;
  for (std::size_t e = 0; e < disc.num_elements(); ++e) {
    const auto& em = disc.element(e);
    const auto ue = gather(u, mesh, e, disc.dim());
    const auto ae = gather(alpha_lagged, mesh, e, 1);
    const auto nen = static_cast<Eigen::Index>(mesh.element(e).size());
    ke.setZero(nen, nen);
    fe.setZero(nen);
    for (const auto& p : em.points) {
      const Voigt eps = point_strain(p, disc.dim(), ue, disc.plane_mode(), params,
                                     interpolate_damage(p, ae));
      const double drive = 2.0 * split(params, eps).psi_plus;
      const double mass = threshold ? drive : drive + 2.0 * params.w0;
      ke.noalias() += p.weight * (mass * p.shape * p.shape.transpose() + eta2 * p.grad.transpose() * p.grad);
      fe.noalias() += p.weight * (threshold ? drive - params.w0 : drive) * p.shape;
    }
    const auto slots = disc.damage_slots(e);
    const auto nodes = mesh.element(e);
    for (Eigen::Index r = 0; r < nen; ++r) {
      sys.rhs(nodes[static_cast<std::size_t>(r)]) += fe(r);
      for (Eigen::Index c = 0; c < nen; ++c) values[slots[static_cast<std::size_t>(r * nen + c)]] += ke(r, c);
    }
  }
  return sys;
}

SparseSystem assemble_damage(const Discretization& disc, const MaterialParams& params,
                             std::span<const double> u) {
  return assemble_damage(disc, params, u, std::span<const double>{});
}

void apply_dirichlet(SparseSystem& system, std::span<const DirichletValue> constraints) {
  const Eigen::Index n = system.matrix.rows();
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd value = Eigen::VectorXd::Zero(n);
  for (const auto& c : constraints) {
    if (c.dof < 0 || c.dof >= n) throw SizeError("constrained dof " + std::to_string(c.dof) + " out of range");
    fixed[static_cast<std::size_t>(c.dof)] = 1;
    value(c.dof) = c.value;
  }
  // make sure every constrained diagonal is stored; no-op for FE patterns
  for (Eigen::Index j = 0; j < n; ++j)
    if (fixed[static_cast<std::size_t>(j)]) system.matrix.coeffRef(j, j);
  system.matrix.makeCompressed();

  for (Eigen::Index j = 0; j < system.matrix.outerSize(); ++j) {
    const bool col_fixed = fixed[static_cast<std::size_t>(j)];
    for (SparseMatrix::InnerIterator it(system.matrix, j); it; ++it) {
      const Eigen::Index i = it.row();
      const bool row_fixed = fixed[static_cast<std::size_t>(i)];
      if (col_fixed && !row_fixed) system.rhs(i) -= it.value() * value(j);
      if (col_fixed || row_fixed) it.valueRef() = (i == j) ? 1.0 : 0.0;
    }
  }
  for (Eigen::Index j = 0; j < n; ++j)
    if (fixed[static_cast<std::size_t>(j)]) {
      system.matrix.coeffRef(j, j) = 1.0;
      system.rhs(j) = value(j);
    }
}

void apply_dirichlet(SparseSystem& system, const Mesh& mesh, const std::string& set, int component,
                     double value) {
  if (component < 0 || component >= system.components)
    throw SizeError("component " + std::to_string(component) + " invalid for a field with " +
                    std::to_string(system.components) + " components");
  std::vector<DirichletValue> cs;
  for (int n : mesh.boundary_set(set)) cs.push_back({n * system.components + component, value});
  apply_dirichlet(system, cs);
}

Eigen::VectorXd internal_force(const Discretization& disc, const MaterialParams& params,
                               std::span<const double> alpha, std::span<const double> u) {
  check_sizes(disc, alpha, u);
  const Mesh& mesh = disc.mesh();
  const int dim = disc.dim();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_displacement_dofs()));
  for (std::size_t e = 0; e < disc.num_elements(); ++e) {
    const auto& em = disc.element(e);
    const auto ue = gather(u, mesh, e, dim);
    const auto ae = gather(alpha, mesh, e, 1);
    const auto nodes = mesh.element(e);
    for (const auto& p : em.points) {
      const double a = interpolate_damage(p, ae);
      const Voigt eps = point_strain(p, dim, ue, disc.plane_mode(), params, a);
      const Voigt s = p.weight * point_response(params, eps, a).stress;
      // tensor rows of the Voigt stress (xx yy zz xy yz zx)
      const double t[3][3] = {{s(0), s(3), s(5)}, {s(3), s(1), s(4)}, {s(5), s(4), s(2)}};
      for (std::size_t an = 0; an < nodes.size(); ++an)
        for (int i = 0; i < dim; ++i) {
          double v = 0.0;
          for (int j = 0; j < dim; ++j) v += t[i][j] * p.grad(j, static_cast<Eigen::Index>(an));
          f(nodes[an] * dim + i) += v;
        }
    }
  }
  return f;
}

Eigen::VectorXd damage_gradient(const Discretization& disc, const MaterialParams& params,
                                std::span<const double> u, std::span<const double> alpha) {
  check_sizes(disc, alpha, u);
  check_damage_range(alpha);
  const Mesh& mesh = disc.mesh();
  const double eta2 = params.eta * params.eta;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_nodes()));
  for (std::size_t e = 0; e < disc.num_elements(); ++e) {
    const auto& em = disc.element(e);
    const auto ue = gather(u, mesh, e, disc.dim());
    const auto ae = gather(alpha, mesh, e, 1);
    Eigen::VectorXd ge = Eigen::VectorXd::Zero(ae.size());
    for (const auto& p : em.points) {
      const double a = interpolate_damage(p, ae);
      const Voigt eps = point_strain(p, disc.dim(), ue, disc.plane_mode(), params, a);
      const double psi = split(params, eps).psi_plus;
      const double local = degradation_derivative(a) * psi + local_dissipation(params, a).dw;
      ge.noalias() += p.weight * (local * p.shape + eta2 * p.grad.transpose() * (p.grad * ae));
    }
    const auto nodes = mesh.element(e);
    for (std::size_t k = 0; k < nodes.size(); ++k) g(nodes[k]) += ge(static_cast<Eigen::Index>(k));
  }
  return g;
}

double reaction_force(const Discretization& disc, const MaterialParams& params,
                      std::span<const double> alpha, std::span<const double> u,
                      const std::string& set, int component) {
  const auto& nodes = disc.mesh().boundary_set(set);
  if (component < 0 || component >= disc.dim()) throw SizeError("invalid displacement component");
  const Eigen::VectorXd f = internal_force(disc, params, alpha, u);
  double r = 0.0;
  for (int n : nodes) r += f(n * disc.dim() + component);
  return r;
}

double stored_energy(const Discretization& disc, const MaterialParams& params,
                     std::span<const double> alpha, std::span<const double> u) {
  check_sizes(disc, alpha, u);
  const Mesh& mesh = disc.mesh();
  double energy = 0.0;
  for (std::size_t e = 0; e < disc.num_elements(); ++e) {
    const auto& em = disc.element(e);
    const auto ue = gather(u, mesh, e, disc.dim());
    const auto ae = gather(alpha, mesh, e, 1);
    for (const auto& p : em.points) {
      const double a = interpolate_damage(p, ae);
      const Voigt eps = point_strain(p, disc.dim(), ue, disc.plane_mode(), params, a);
      energy += p.weight * point_response(params, eps, a).energy;
    }
  }
  return energy;
}

double dissipated_energy(const Discretization& disc, const MaterialParams& params,
                         std::span<const double> alpha) {
  if (alpha.size() != disc.num_nodes()) throw SizeError("damage vector size mismatch");
  const Mesh& mesh = disc.mesh();
  const double eta2 = params.eta * params.eta;
  double energy = 0.0;
  for (std::size_t e = 0; e < disc.num_elements(); ++e) {
    const auto& em = disc.element(e);
    const auto ae = gather(alpha, mesh, e, 1);
    for (const auto& p : em.points) {
      const double a = interpolate_damage(p, ae);
      energy += p.weight * (local_dissipation(params, a).w + 0.5 * eta2 * (p.grad * ae).squaredNorm());
    }
  }
  return energy;
}

}  // namespace pff
