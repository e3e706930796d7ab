#pragma once

#include <vector>

#include "covconv/geometry.hpp"

namespace covconv {

// Nodes and weights on [-1, 1], exact for polynomials of degree 2n - 1.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

// Tangent-ball resolution: metric radius plus radial and angular node counts.
struct BallSpec {
  double radius = 0.5;
  int n_radial = 8;
  int n_angular = 16;
};

// Quadrature for the coordinate measure d^d v over the metric ball
// { v : g(v, v) < r^2 } in the tangent space at `base`.
struct TangentQuadrature {
  Point base;
  double radius = 0.0;
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> weights;

  size_t size() const { return nodes.size(); }
  double weight_sum() const;
  TangentVector node(size_t i) const { return {base, nodes[i]}; }
};

// Polar product rule in a g(x)-orthonormal frame: Gauss-Legendre radii times
// uniform angles 2 pi j / n_angular. Only d = 2 is supported. The weights sum
// to pi r^2 / sqrt(det g(x)), the coordinate volume of the metric ball.
TangentQuadrature build_quadrature(const Manifold& m, const Point& x, const BallSpec& spec);

// Frame E with E^T g E = I, E = L^-T for g = L L^T.
Matrix orthonormal_frame(const Matrix& metric);

}  // namespace covconv
