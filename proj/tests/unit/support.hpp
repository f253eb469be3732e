#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pff/assembly.hpp"
#include "pff/material.hpp"
#include "pff/mesh.hpp"

namespace test {

// Material block used throughout the experiments.
inline pff::MaterialParams granite() {
  pff::MaterialParams p;
  p.bulk_modulus = 121030.0;
  p.poisson_ratio = 0.227;
  p.w0 = 75.94;
  p.eta = 0.052;
  return p;
}

inline std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Unit square [0,1]^2 split into nx x ny quads.
inline pff::Mesh unit_grid(int nx, int ny) {
  std::vector<double> xs, ys;
  for (int i = 0; i <= nx; ++i) xs.push_back(static_cast<double>(i) / nx);
  for (int j = 0; j <= ny; ++j) ys.push_back(static_cast<double>(j) / ny);
  return pff::structured_mesh(xs, ys);
}

inline pff::Mesh unit_cube(int n) {
  std::vector<double> c;
  for (int i = 0; i <= n; ++i) c.push_back(static_cast<double>(i) / n);
  return pff::structured_mesh(c, c, c);
}

// Interior nodes moved by up to `amount` of the spacing; keeps elements valid for small amounts.
inline pff::Mesh perturbed(pff::Mesh m, double amount, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-amount, amount);
  for (auto& p : m.nodes)
    for (int c = 0; c < m.dim; ++c)
      if (p[c] > 1e-12 && p[c] < 1.0 - 1e-12) p[c] += d(rng);
  return m;
}

// Strain of the uniform field u = G x, Voigt with engineering shear.
inline pff::Voigt affine_strain(const Eigen::Matrix3d& g) {
  pff::Voigt e;
  e << g(0, 0), g(1, 1), g(2, 2), g(0, 1) + g(1, 0), g(1, 2) + g(2, 1), g(2, 0) + g(0, 2);
  return e;
}

inline Eigen::VectorXd affine_field(const pff::Mesh& m, const Eigen::Matrix3d& g) {
  const auto dim = static_cast<std::size_t>(m.dim);
  Eigen::VectorXd u(static_cast<Eigen::Index>(m.num_nodes() * dim));
  for (std::size_t n = 0; n < m.num_nodes(); ++n)
    for (std::size_t i = 0; i < dim; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < dim; ++j) v += g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * m.nodes[n][j];
      u(static_cast<Eigen::Index>(n * dim + i)) = v;
    }
  return u;
}

}  // namespace test
