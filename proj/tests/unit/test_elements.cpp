#include "doctest.h"

#include <array>
#include <random>

#include "pff/elements.hpp"
#include "pff/errors.hpp"
#include "support.hpp"

using namespace pff;

namespace {

constexpr std::array kAllKinds{ElementKind::Tri3, ElementKind::Quad4, ElementKind::Tet4, ElementKind::Hex8};

std::vector<Point3> reference_nodes(ElementKind k) {
  switch (k) {
    case ElementKind::Tri3: return {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    case ElementKind::Quad4: return {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}};
    case ElementKind::Tet4: return {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    case ElementKind::Hex8:
      return {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1}, {-1, -1, 1}, {1, -1, 1}, {1, 1, 1}, {-1, 1, 1}};
  }
  return {};
}

// Physical element: reference nodes mapped to a unit-size cell and jittered.
std::vector<Point3> distorted_nodes(ElementKind k, std::mt19937& rng, double jitter) {
  std::uniform_real_distribution<double> d(-jitter, jitter);
  auto nodes = reference_nodes(k);
  const bool box = k == ElementKind::Quad4 || k == ElementKind::Hex8;
  for (auto& p : nodes)
    for (int c = 0; c < element_dim(k); ++c) p[c] = (box ? 0.5 * (p[c] + 1.0) : p[c]) + d(rng);
  return nodes;
}

double reference_volume(ElementKind k) {
  switch (k) {
    case ElementKind::Tri3: return 0.5;
    case ElementKind::Quad4: return 4.0;
    case ElementKind::Tet4: return 1.0 / 6.0;
    case ElementKind::Hex8: return 8.0;
  }
  return 0.0;
}

}  // namespace

TEST_CASE("quad4 shape functions at the centre are 1/4") {
  const auto s = shape_and_gradients(ElementKind::Quad4, {0, 0, 0});
  for (double n : s.values) CHECK(n == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("tet4 shape functions are Kronecker deltas at the vertices") {
  const auto nodes = reference_nodes(ElementKind::Tet4);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto s = shape_and_gradients(ElementKind::Tet4, nodes[i]);
    for (std::size_t j = 0; j < nodes.size(); ++j) CHECK(s.values[j] == doctest::Approx(i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("hex8 shape functions at the centre are 1/8") {
  const auto s = shape_and_gradients(ElementKind::Hex8, {0, 0, 0});
  for (double n : s.values) CHECK(n == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("every kind interpolates its own nodes") {
  for (auto k : kAllKinds) {
    const auto nodes = reference_nodes(k);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto s = shape_and_gradients(k, nodes[i]);
      for (std::size_t j = 0; j < nodes.size(); ++j) CHECK(s.values[j] == doctest::Approx(i == j ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("quadrature weights sum to the reference volume") {
  for (auto k : kAllKinds) {
    double sum = 0.0;
    for (double w : default_rule(k).weights) sum += w;
    CHECK(sum == doctest::Approx(reference_volume(k)).epsilon(1e-14));
    for (int order = 1; order <= 4; ++order) {
      double s2 = 0.0;
      for (double w : gauss_rule(k, order).weights) s2 += w;
      CHECK(s2 == doctest::Approx(reference_volume(k)).epsilon(1e-13));
    }
  }
}

TEST_CASE("partition of unity and vanishing gradient sums at random points") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto k : kAllKinds) {
    for (int trial = 0; trial < 50; ++trial) {
      Point3 p{0, 0, 0};
      const bool box = k == ElementKind::Quad4 || k == ElementKind::Hex8;
      if (box) {
        for (int c = 0; c < element_dim(k); ++c) p[c] = 2.0 * u(rng) - 1.0;
      } else {
        double left = 1.0;
        for (int c = 0; c < element_dim(k); ++c) {
          p[c] = left * u(rng) * 0.9;
          left -= p[c];
        }
      }
      const auto s = shape_and_gradients(k, p);
      double sum = 0.0;
      Point3 g{0, 0, 0};
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        sum += s.values[i];
        for (int c = 0; c < 3; ++c) g[c] += s.gradients[i][c];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
      for (int c = 0; c < 3; ++c) CHECK(std::abs(g[c]) < 1e-14);
    }
  }
}

TEST_CASE("unit quad4 with u = (x, 0) has unit eps_x at every point") {
  const std::vector<Point3> nodes{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  const auto em = compute_element_matrices(ElementKind::Quad4, nodes, default_rule(ElementKind::Quad4));
  Eigen::VectorXd u(8);
  for (int a = 0; a < 4; ++a) {
    u(2 * a) = nodes[static_cast<std::size_t>(a)][0];
    u(2 * a + 1) = 0.0;
  }
  REQUIRE(em.points.size() == 4);
  for (std::size_t q = 0; q < em.points.size(); ++q) {
    const Eigen::VectorXd e = em.strain_displacement(q) * u;
    CHECK(e(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(e(1)) < 1e-14);
    CHECK(std::abs(e(2)) < 1e-14);
  }
}

TEST_CASE("unit hex8 with alpha = z has gradient (0,0,1)") {
  auto nodes = reference_nodes(ElementKind::Hex8);
  for (auto& p : nodes)
    for (auto& c : p) c = 0.5 * (c + 1.0);
  const auto em = compute_element_matrices(ElementKind::Hex8, nodes, default_rule(ElementKind::Hex8));
  Eigen::VectorXd a(8);
  for (int i = 0; i < 8; ++i) a(i) = nodes[static_cast<std::size_t>(i)][2];
  for (const auto& p : em.points) {
    const Eigen::Vector3d g = p.grad * a;
    CHECK(std::abs(g(0)) < 1e-14);
    CHECK(std::abs(g(1)) < 1e-14);
    CHECK(g(2) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("reflected quad4 is rejected as inverted") {
  const std::vector<Point3> nodes{{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(compute_element_matrices(ElementKind::Quad4, nodes, default_rule(ElementKind::Quad4)),
                  InvertedElementError);
}

TEST_CASE("degenerate tet4 is rejected") {
  const std::vector<Point3> nodes{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  CHECK_THROWS_AS(compute_element_matrices(ElementKind::Tet4, nodes, default_rule(ElementKind::Tet4)),
                  InvertedElementError);
}

TEST_CASE("unknown element names are unsupported") {
  CHECK(element_kind_from_string("hex8") == ElementKind::Hex8);
  CHECK(element_kind_from_string("tri3") == ElementKind::Tri3);
  CHECK_THROWS_AS(element_kind_from_string("wedge6"), UnsupportedElementError);
}

TEST_CASE("affine displacement fields give their exact strain on distorted elements") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto k : kAllKinds) {
    const int dim = element_dim(k);
    for (int trial = 0; trial < 20; ++trial) {
      const auto nodes = distorted_nodes(k, rng, 0.12);
      const auto em = compute_element_matrices(k, nodes, default_rule(k));
      Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = d(rng);
      Eigen::VectorXd u(dim * static_cast<int>(nodes.size()));
      for (std::size_t a = 0; a < nodes.size(); ++a)
        for (int i = 0; i < dim; ++i) {
          double v = 0.3 * (i + 1);  // plus a translation
          for (int j = 0; j < dim; ++j) v += g(i, j) * nodes[a][static_cast<std::size_t>(j)];
          u(static_cast<Eigen::Index>(a) * dim + i) = v;
        }
      const pff::Voigt exact = test::affine_strain(g);
      for (std::size_t q = 0; q < em.points.size(); ++q) {
        const Eigen::VectorXd e = em.strain_displacement(q) * u;
        if (dim == 2) {
          CHECK(e(0) == doctest::Approx(exact(0)).epsilon(1e-12));
          CHECK(e(1) == doctest::Approx(exact(1)).epsilon(1e-12));
          CHECK(e(2) == doctest::Approx(exact(3)).epsilon(1e-12));
        } else {
          for (int c = 0; c < 6; ++c) CHECK(e(c) == doctest::Approx(exact(c)).scale(1.0).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("default rules integrate the stiffness exactly on affine geometry") {
  // parallelogram / parallelepiped: the Jacobian is constant, so the high-order
  // rule is the oracle
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  Eigen::MatrixXd c(6, 6);
  c.setRandom();
  c = (c * c.transpose()).eval();
  for (auto k : kAllKinds) {
    const int dim = element_dim(k);
    Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if (i != j) a(i, j) = d(rng);
    auto nodes = reference_nodes(k);
    for (auto& p : nodes) {
      Eigen::Vector3d x(p[0], p[1], p[2]);
      x = a * x;
      p = {x(0), x(1), dim == 3 ? x(2) : 0.0};
    }
    const int nv = voigt_size(dim);
    const Eigen::MatrixXd cd = c.topLeftCorner(nv, nv);
    auto stiffness = [&](const QuadratureRule& rule) {
      const auto em = compute_element_matrices(k, nodes, rule);
      Eigen::MatrixXd kmat = Eigen::MatrixXd::Zero(dim * static_cast<int>(nodes.size()), dim * static_cast<int>(nodes.size()));
      for (std::size_t q = 0; q < em.points.size(); ++q) {
        const Eigen::MatrixXd b = em.strain_displacement(q);
        kmat += em.points[q].weight * b.transpose() * cd * b;
      }
      return kmat;
    };
    const Eigen::MatrixXd k_default = stiffness(default_rule(k));
    const Eigen::MatrixXd k_oracle = stiffness(gauss_rule(k, 5));
    CHECK((k_default - k_oracle).norm() <= 1e-12 * k_oracle.norm());
  }
}

TEST_CASE("strain-displacement rows follow the Voigt layout") {
  Eigen::MatrixXd grad(3, 1);
  grad << 1.0, 2.0, 3.0;
  Eigen::MatrixXd b;
  fill_strain_displacement(grad, b);
  REQUIRE(b.rows() == 6);
  REQUIRE(b.cols() == 3);
  Eigen::MatrixXd expected(6, 3);
  expected << 1, 0, 0,  //
      0, 2, 0,          //
      0, 0, 3,          //
      2, 1, 0,          //
      0, 3, 2,          //
      3, 0, 1;
  CHECK((b - expected).norm() == 0.0);
}
