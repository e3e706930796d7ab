#include "covconv/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <Eigen/Cholesky>

namespace covconv {

GaussLegendreRule gauss_legendre(int n) {
  if (n <= 0) throw InvalidArgument("Gauss-Legendre rule needs n >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  // Newton iteration on P_n from the Chebyshev-like initial guess; the rule is
  // symmetric so only half the roots are solved for.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
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
    // Re-evaluate the derivative at the converged root.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<size_t>(i)] = -z;
    rule.nodes[static_cast<size_t>(n - 1 - i)] = z;
    rule.weights[static_cast<size_t>(i)] = w;
    rule.weights[static_cast<size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<size_t>(n / 2)] = 0.0;
  return rule;
}

double TangentQuadrature::weight_sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

Matrix orthonormal_frame(const Matrix& metric) {
  Eigen::LLT<Matrix> llt(metric);
  if (llt.info() != Eigen::Success) throw NumericalError("metric is not positive definite");
  const Matrix l = llt.matrixL();
  // E = L^{-T}
  return l.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(metric.rows(), metric.cols()));
}

TangentQuadrature build_quadrature(const Manifold& m, const Point& x, const BallSpec& spec) {
  if (m.dim() != 2) throw InvalidArgument("tangent-ball quadrature is only available for d = 2");
  if (!(spec.radius > 0.0)) throw InvalidArgument("quadrature radius must be positive");
  if (spec.n_radial <= 0 || spec.n_angular <= 0)
    throw InvalidArgument("quadrature resolutions must be positive");

  const Matrix g = metric_at(m, x);
  const Matrix frame = orthonormal_frame(g);
  const double coord_volume = 1.0 / std::sqrt(g.determinant());

  const GaussLegendreRule gl = gauss_legendre(spec.n_radial);
  const double r = spec.radius;
  const double dtheta = 2.0 * std::numbers::pi / spec.n_angular;

  TangentQuadrature q;
  q.base = x;
  q.radius = r;
  for (size_t k = 0; k < gl.nodes.size(); ++k) {
    const double rho = 0.5 * r * (gl.nodes[k] + 1.0);
    const double w_radial = 0.5 * r * gl.weights[k] * rho;
    for (int j = 0; j < spec.n_angular; ++j) {
      const double theta = dtheta * j;
      Eigen::Vector2d u(rho * std::cos(theta), rho * std::sin(theta));
      q.nodes.push_back(frame * u);
      q.weights.push_back(w_radial * dtheta * coord_volume);
    }
  }
  return q;
}

}  // namespace covconv
