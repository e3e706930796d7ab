#include "covconv/presets.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

namespace covconv {

namespace {

double param_or(const std::vector<double>& params, size_t i, double fallback) {
  return i < params.size() ? params[i] : fallback;
}

void expect_params(const std::string& preset, const std::vector<double>& params, size_t max) {
  if (params.size() > max)
    throw ConfigError("preset '" + preset + "' takes at most " + std::to_string(max) +
                      " parameters, got " + std::to_string(params.size()));
}

Manifold flat_cartesian() {
  return Manifold(
      "flat2d-cartesian", 2, [](const Point&) -> Matrix { return Matrix::Identity(2, 2); },
      [](const Point&) { return true; }, [](const Point&) { return Christoffel(2); },
      [](const Point& a, const Point& b) { return (a - b).norm(); }, true);
}

Manifold flat_polar(double rho_min) {
  if (!(rho_min > 0.0)) throw ConfigError("flat2d-polar needs a positive rho_min");
  auto to_cartesian = [](const Point& x) {
    return Eigen::Vector2d(x[0] * std::cos(x[1]), x[0] * std::sin(x[1]));
  };
  return Manifold(
      "flat2d-polar", 2,
      [](const Point& x) -> Matrix {
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = 1.0;
        g(1, 1) = x[0] * x[0];
        return g;
      },
      [rho_min](const Point& x) { return x[0] >= rho_min; },
      [](const Point& x) {
        Christoffel c(2);
        c(0, 1, 1) = -x[0];
        c(1, 0, 1) = 1.0 / x[0];
        c(1, 1, 0) = 1.0 / x[0];
        return c;
      },
      [to_cartesian](const Point& a, const Point& b) {
        return (to_cartesian(a) - to_cartesian(b)).norm();
      },
      true);
}

Manifold round_sphere(const std::string& name, double radius, double eps) {
  if (!(radius > 0.0)) throw ConfigError(name + " needs a positive radius");
  if (!(eps > 0.0 && eps < std::numbers::pi / 2)) throw ConfigError(name + " margin out of range");
  const double r2 = radius * radius;
  return Manifold(
      name, 2,
      [r2](const Point& x) -> Matrix {
        const double s = std::sin(x[0]);
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = r2;
        g(1, 1) = r2 * s * s;
        return g;
      },
      [eps](const Point& x) { return x[0] >= eps && x[0] <= std::numbers::pi - eps; },
      [](const Point& x) {
        Christoffel c(2);
        const double s = std::sin(x[0]), co = std::cos(x[0]);
        c(0, 1, 1) = -s * co;
        c(1, 0, 1) = co / s;
        c(1, 1, 0) = co / s;
        return c;
      },
      [radius](const Point& a, const Point& b) { return radius * sphere_angle(a, b); });
}

Manifold graph_quadratic(double a, double b, double c) {
  // h = (a x^2 + 2 b x y + c y^2) / 2
  auto grad = [a, b, c](const Point& x) {
    return Eigen::Vector2d(a * x[0] + b * x[1], b * x[0] + c * x[1]);
  };
  Eigen::Matrix2d hess;
  hess << a, b, b, c;
  return Manifold(
      "graph-quadratic", 2,
      [grad](const Point& x) -> Matrix {
        const Eigen::Vector2d dh = grad(x);
        return Matrix(Eigen::Matrix2d::Identity() + dh * dh.transpose());
      },
      [](const Point&) { return true; },
      [grad, hess](const Point& x) {
        // Gamma^l_{mn} = h_l h_{mn} / (1 + |grad h|^2)
        const Eigen::Vector2d dh = grad(x);
        const double denom = 1.0 + dh.squaredNorm();
        Christoffel g(2);
        for (int l = 0; l < 2; ++l)
          for (int m = 0; m < 2; ++m)
            for (int n = 0; n < 2; ++n) g(l, m, n) = dh[l] * hess(m, n) / denom;
        return g;
      });
}

Eigen::Matrix3d sphere_rotation_matrix(double ax, double az) {
  return (Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

Eigen::Vector3d sphere_embed(const Point& x) {
  const double s = std::sin(x[0]);
  return {s * std::cos(x[1]), s * std::sin(x[1]), std::cos(x[0])};
}

Point sphere_chart(const Eigen::Vector3d& unit) {
  Point x(2);
  x[0] = std::atan2(std::hypot(unit[0], unit[1]), unit[2]);
  x[1] = std::atan2(unit[1], unit[0]);
  return x;
}

Eigen::Matrix<double, 3, 2> sphere_tangent_frame(const Point& x) {
  const double st = std::sin(x[0]), ct = std::cos(x[0]);
  const double sp = std::sin(x[1]), cp = std::cos(x[1]);
  Eigen::Matrix<double, 3, 2> f;
  f << ct * cp, -st * sp,
       ct * sp, st * cp,
       -st, 0.0;
  return f;
}

double sphere_angle(const Point& a, const Point& b) {
  const Eigen::Vector3d pa = sphere_embed(a), pb = sphere_embed(b);
  return std::atan2(pa.cross(pb).norm(), pa.dot(pb));
}

Manifold make_manifold(const std::string& preset, const std::vector<double>& params) {
  if (preset == "flat2d-cartesian") {
    expect_params(preset, params, 0);
    return flat_cartesian();
  }
  if (preset == "flat2d-polar") {
    expect_params(preset, params, 1);
    return flat_polar(param_or(params, 0, kPolarMinRadius));
  }
  if (preset == "sphere") {
    expect_params(preset, params, 1);
    return round_sphere(preset, 1.0, param_or(params, 0, kSphereChartMargin));
  }
  if (preset == "scaled-sphere") {
    expect_params(preset, params, 2);
    return round_sphere(preset, param_or(params, 0, 1.0), param_or(params, 1, kSphereChartMargin));
  }
  if (preset == "graph-quadratic") {
    expect_params(preset, params, 3);
    return graph_quadratic(param_or(params, 0, 0.5), param_or(params, 1, 0.0),
                           param_or(params, 2, 0.5));
  }
  throw ConfigError("unknown manifold preset '" + preset + "'");
}

std::vector<std::string> manifold_preset_names() {
  return {"flat2d-cartesian", "flat2d-polar", "sphere", "scaled-sphere", "graph-quadratic"};
}

ChartTransition make_transition(const std::string& preset, const std::vector<double>& params,
                                const std::string& manifold_preset) {
  ChartTransition ct;
  ct.name = preset;
  if (preset == "identity") {
    expect_params(preset, params, 0);
    ct.source = ct.target = manifold_preset.empty() ? "flat2d-cartesian" : manifold_preset;
    ct.forward = [](const Point& x) { return x; };
    ct.inverse = [](const Point& x) { return x; };
    ct.jacobian = [](const Point& x) -> Matrix { return Matrix::Identity(x.size(), x.size()); };
    return ct;
  }
  if (preset == "polar-to-cartesian") {
    expect_params(preset, params, 0);
    ct.source = "flat2d-polar";
    ct.target = "flat2d-cartesian";
    ct.forward = [](const Point& x) -> Point {
      return Eigen::Vector2d(x[0] * std::cos(x[1]), x[0] * std::sin(x[1]));
    };
    ct.inverse = [](const Point& y) -> Point {
      return Eigen::Vector2d(std::hypot(y[0], y[1]), std::atan2(y[1], y[0]));
    };
    ct.jacobian = [](const Point& x) -> Matrix {
      Matrix j(2, 2);
      j << std::cos(x[1]), -x[0] * std::sin(x[1]),
           std::sin(x[1]), x[0] * std::cos(x[1]);
      return j;
    };
    ct.overlap = [](const Point& x) { return x.size() == 2 && x[0] > 0.0; };
    return ct;
  }
  if (preset == "cartesian-rotation") {
    expect_params(preset, params, 1);
    const double alpha = param_or(params, 0, std::numbers::pi / 2);
    Matrix r(2, 2);
    r << std::cos(alpha), -std::sin(alpha), std::sin(alpha), std::cos(alpha);
    ct.source = ct.target = "flat2d-cartesian";
    ct.forward = [r](const Point& x) -> Point { return r * x; };
    ct.inverse = [r](const Point& y) -> Point { return r.transpose() * y; };
    ct.jacobian = [r](const Point&) -> Matrix { return r; };
    return ct;
  }
  if (preset == "sphere-rotation") {
    expect_params(preset, params, 2);
    const std::string base = manifold_preset.empty() ? "sphere" : manifold_preset;
    if (base != "sphere" && base != "scaled-sphere")
      throw ConfigError("sphere-rotation needs a sphere preset, got '" + base + "'");
    const Eigen::Matrix3d r =
        sphere_rotation_matrix(param_or(params, 0, 0.7), param_or(params, 1, 0.3));
    ct.source = ct.target = base;
    ct.forward = [r](const Point& x) { return sphere_chart(r * sphere_embed(x)); };
    ct.inverse = [r](const Point& y) { return sphere_chart(r.transpose() * sphere_embed(y)); };
    ct.jacobian = [r](const Point& x) -> Matrix {
      const Point y = sphere_chart(r * sphere_embed(x));
      const Eigen::Matrix<double, 3, 2> fy = sphere_tangent_frame(y);
      Eigen::Matrix<double, 2, 3> grad;
      // Tangential gradients of theta' and phi' on the unit sphere.
      grad.row(0) = fy.col(0).transpose();
      grad.row(1) = fy.col(1).transpose() / (std::sin(y[0]) * std::sin(y[0]));
      return Matrix(grad * r * sphere_tangent_frame(x));
    };
    ct.overlap = [r](const Point& x) {
      if (x.size() != 2) return false;
      const double eps = kSphereChartMargin;
      const Point y = sphere_chart(r * sphere_embed(x));
      return x[0] >= eps && x[0] <= std::numbers::pi - eps && y[0] >= eps &&
             y[0] <= std::numbers::pi - eps;
    };
    return ct;
  }
  throw ConfigError("unknown chart transition '" + preset + "'");
}

std::vector<std::string> transition_preset_names() {
  return {"identity", "polar-to-cartesian", "cartesian-rotation", "sphere-rotation"};
}

}  // namespace covconv
