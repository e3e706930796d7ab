#pragma once

// Named manifolds and chart transitions.
//
//   flat2d-cartesian           (x, y), Euclidean metric
//   flat2d-polar   [rho_min]   (rho, psi), metric diag(1, rho^2), rho >= rho_min (1e-3)
//   sphere         [eps]       (theta, phi), round metric, theta in [eps, pi - eps] (1e-3)
//   scaled-sphere  [R, eps]    radius-R sphere in the same chart
//   graph-quadratic [a, b, c]  surface z = (a x^2 + 2 b x y + c y^2) / 2, induced metric
//
// Transitions:
//   identity                   any preset onto itself
//   polar-to-cartesian         flat2d-polar -> flat2d-cartesian
//   cartesian-rotation [alpha] flat2d-cartesian -> flat2d-cartesian, rotation by alpha
//   sphere-rotation [ax, az]   sphere -> sphere, coordinates of Rz(az) Rx(ax) X
//
// Angles are in radians throughout.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "covconv/geometry.hpp"

namespace covconv {

inline constexpr double kSphereChartMargin = 1e-3;
inline constexpr double kPolarMinRadius = 1e-3;

Manifold make_manifold(const std::string& preset, const std::vector<double>& params = {});

std::vector<std::string> manifold_preset_names();

// `manifold_preset` selects the source chart for transitions that can act
// on several presets (identity, sphere-rotation on a scaled sphere).
ChartTransition make_transition(const std::string& preset, const std::vector<double>& params = {},
                                const std::string& manifold_preset = "");

std::vector<std::string> transition_preset_names();

// Round-sphere helpers in the (theta, phi) chart.
Eigen::Vector3d sphere_embed(const Point& x);
Point sphere_chart(const Eigen::Vector3d& unit);
// Columns d X / d theta and d X / d phi.
Eigen::Matrix<double, 3, 2> sphere_tangent_frame(const Point& x);
// Central angle between two chart points.
double sphere_angle(const Point& a, const Point& b);

}  // namespace covconv
