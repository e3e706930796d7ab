#pragma once

#include <doctest.h>

#include <numbers>

#include <Eigen/LU>

#include <vector>

#include "covconv/convolution.hpp"
#include "covconv/presets.hpp"

namespace test {

using covconv::Matrix;
using covconv::Point;

inline constexpr double kPi = std::numbers::pi;

inline Point pt(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

inline Eigen::VectorXd vec(double a, double b) { return pt(a, b); }

inline Matrix mat(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace test
