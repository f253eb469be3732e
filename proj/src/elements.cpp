#include "pff/elements.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pff/errors.hpp"

namespace pff {

namespace {

constexpr std::array<std::array<double, 2>, 4> kQuadCorners{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
constexpr std::array<std::array<double, 3>, 8> kHexCorners{{{-1, -1, -1},
                                                            {1, -1, -1},
                                                            {1, 1, -1},
                                                            {-1, 1, -1},
                                                            {-1, -1, 1},
                                                            {1, -1, 1},
                                                            {1, 1, 1},
                                                            {-1, 1, 1}}};

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

int nodes_per_element(ElementKind kind) {
  switch (kind) {
    case ElementKind::Tri3: return 3;
    case ElementKind::Quad4: return 4;
    case ElementKind::Tet4: return 4;
    case ElementKind::Hex8: return 8;
  }
  throw UnsupportedElementError("unknown element kind");
}

int element_dim(ElementKind kind) {
  switch (kind) {
    case ElementKind::Tri3:
    case ElementKind::Quad4: return 2;
    case ElementKind::Tet4:
    case ElementKind::Hex8: return 3;
  }
  throw UnsupportedElementError("unknown element kind");
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Tri3: return "tri3";
    case ElementKind::Quad4: return "quad4";
    case ElementKind::Tet4: return "tet4";
    case ElementKind::Hex8: return "hex8";
  }
  throw UnsupportedElementError("unknown element kind");
}

ElementKind element_kind_from_string(std::string_view name) {
  if (name == "tri3") return ElementKind::Tri3;
  if (name == "quad4") return ElementKind::Quad4;
  if (name == "tet4") return ElementKind::Tet4;
  if (name == "hex8") return ElementKind::Hex8;
  throw UnsupportedElementError("unsupported element kind '" + std::string(name) + "'");
}

QuadratureRule default_rule(ElementKind kind) {
  switch (kind) {
    case ElementKind::Tri3: return {{{1.0 / 3.0, 1.0 / 3.0, 0.0}}, {0.5}};
    case ElementKind::Tet4: return {{{0.25, 0.25, 0.25}}, {1.0 / 6.0}};
    case ElementKind::Quad4:
    case ElementKind::Hex8: return gauss_rule(kind, 2);
  }
  throw UnsupportedElementError("unknown element kind");
}

QuadratureRule gauss_rule(ElementKind kind, int order) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  QuadratureRule rule;
  switch (kind) {
    case ElementKind::Quad4:
      for (int j = 0; j < order; ++j)
        for (int i = 0; i < order; ++i) {
          rule.points.push_back({x[i], x[j], 0.0});
          rule.weights.push_back(w[i] * w[j]);
        }
      break;
    case ElementKind::Hex8:
      for (int k = 0; k < order; ++k)
        for (int j = 0; j < order; ++j)
          for (int i = 0; i < order; ++i) {
            rule.points.push_back({x[i], x[j], x[k]});
            rule.weights.push_back(w[i] * w[j] * w[k]);
          }
      break;
    case ElementKind::Tri3:
      // collapsed (Duffy) square rule
      for (int j = 0; j < order; ++j)
        for (int i = 0; i < order; ++i) {
          const double a = 0.5 * (1.0 + x[i]);
          const double b = 0.5 * (1.0 + x[j]);
          rule.points.push_back({a, (1.0 - a) * b, 0.0});
          rule.weights.push_back(0.25 * w[i] * w[j] * (1.0 - a));
        }
      break;
    case ElementKind::Tet4: {
      // the collapse factor is quadratic in a: one extra point keeps constants exact
      std::vector<double> xa, wa;
      gauss_legendre(order + 1, xa, wa);
      for (int k = 0; k < order; ++k)
        for (int j = 0; j < order; ++j)
          for (int i = 0; i <= order; ++i) {
            const double a = 0.5 * (1.0 + xa[i]);
            const double b = 0.5 * (1.0 + x[j]);
            const double c = 0.5 * (1.0 + x[k]);
            rule.points.push_back({a, (1.0 - a) * b, (1.0 - a) * (1.0 - b) * c});
            rule.weights.push_back(0.125 * wa[i] * w[j] * w[k] * (1.0 - a) * (1.0 - a) * (1.0 - b));
          }
      break;
    }
  }
  return rule;
}

ShapeValues shape_and_gradients(ElementKind kind, const Point3& p) {
  ShapeValues s;
  switch (kind) {
    case ElementKind::Tri3:
      s.values = {1.0 - p[0] - p[1], p[0], p[1]};
      s.gradients = {{{-1, -1, 0}, {1, 0, 0}, {0, 1, 0}}};
      break;
    case ElementKind::Tet4:
      s.values = {1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]};
      s.gradients = {{{-1, -1, -1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
      break;
    case ElementKind::Quad4:
      for (const auto& c : kQuadCorners) {
        const double a = 1.0 + c[0] * p[0];
        const double b = 1.0 + c[1] * p[1];
        s.values.push_back(0.25 * a * b);
        s.gradients.push_back({0.25 * c[0] * b, 0.25 * c[1] * a, 0.0});
      }
      break;
    case ElementKind::Hex8:
      for (const auto& c : kHexCorners) {
        const double a = 1.0 + c[0] * p[0];
        const double b = 1.0 + c[1] * p[1];
        const double d = 1.0 + c[2] * p[2];
        s.values.push_back(0.125 * a * b * d);
        s.gradients.push_back({0.125 * c[0] * b * d, 0.125 * c[1] * a * d, 0.125 * c[2] * a * b});
      }
      break;
    default: throw UnsupportedElementError("unknown element kind");
  }
  return s;
}

void fill_strain_displacement(const Eigen::MatrixXd& grad, Eigen::MatrixXd& out) {
  const int dim = static_cast<int>(grad.rows());
  const int nen = static_cast<int>(grad.cols());
  out.setZero(voigt_size(dim), dim * nen);
  for (int i = 0; i < nen; ++i) {
    if (dim == 2) {
      const double dx = grad(0, i), dy = grad(1, i);
      out(0, 2 * i) = dx;
      out(1, 2 * i + 1) = dy;
      out(2, 2 * i) = dy;
      out(2, 2 * i + 1) = dx;
    } else {
      const double dx = grad(0, i), dy = grad(1, i), dz = grad(2, i);
      out(0, 3 * i) = dx;
      out(1, 3 * i + 1) = dy;
      out(2, 3 * i + 2) = dz;
      out(3, 3 * i) = dy;
      out(3, 3 * i + 1) = dx;
      out(4, 3 * i + 1) = dz;
      out(4, 3 * i + 2) = dy;
      out(5, 3 * i) = dz;
      out(5, 3 * i + 2) = dx;
    }
  }
}

Eigen::MatrixXd ElementMatrices::strain_displacement(std::size_t q) const {
  Eigen::MatrixXd b;
  fill_strain_displacement(points.at(q).grad, b);
  return b;
}

ElementMatrices compute_element_matrices(ElementKind kind,
                                         std::span<const Point3> node_coords,
                                         const QuadratureRule& rule) {
  const int nen = nodes_per_element(kind);
  const int dim = element_dim(kind);
  if (static_cast<int>(node_coords.size()) != nen)
    throw SizeError("element of kind " + std::string(to_string(kind)) + " needs " +
                    std::to_string(nen) + " nodes, got " + std::to_string(node_coords.size()));

  ElementMatrices em;
  em.dim = dim;
  em.points.reserve(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const ShapeValues s = shape_and_gradients(kind, rule.points[q]);
    Eigen::MatrixXd ref(dim, nen);
    Eigen::MatrixXd x(dim, nen);
    Eigen::VectorXd n(nen);
    for (int i = 0; i < nen; ++i) {
      n(i) = s.values[i];
      for (int d = 0; d < dim; ++d) {
        ref(d, i) = s.gradients[i][d];
        x(d, i) = node_coords[i][d];
      }
    }
    // jac(d, e) = dx_d / dxi_e
    const Eigen::MatrixXd jac = x * ref.transpose();
    const double det = jac.determinant();
    if (!(det > 0.0))
      throw InvertedElementError("non-positive Jacobian determinant " + std::to_string(det) +
                                 " at quadrature point " + std::to_string(q));
    QuadraturePointData pd;
    pd.shape = std::move(n);
    pd.grad = jac.transpose().inverse() * ref;
    pd.weight = det * rule.weights[q];
    em.points.push_back(std::move(pd));
  }
  return em;
}

}  // namespace pff
