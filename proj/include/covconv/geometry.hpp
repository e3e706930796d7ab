#pragma once

// Chart-level Riemannian primitives: metric, Levi-Civita connection,
// geodesics, exponential map, parallel transport and chart transitions.
//
// Everything is expressed in the coordinate basis {d/dx^mu} of a single chart.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "covconv/errors.hpp"
#include "covconv/tensor.hpp"

namespace covconv {

inline constexpr int kDefaultStepsPerUnit = 200;

// A tangent vector v^mu at `base`.
struct TangentVector {
  Point base;
  Eigen::VectorXd components;
};

// Connection coefficients Gamma^l_{mn}, stored l-major.
class Christoffel {
 public:
  explicit Christoffel(int dim) : dim_(dim), values_(static_cast<size_t>(dim * dim * dim), 0.0) {}

  int dim() const { return dim_; }
  double operator()(int l, int m, int n) const { return values_[index(l, m, n)]; }
  double& operator()(int l, int m, int n) { return values_[index(l, m, n)]; }
  const std::vector<double>& values() const { return values_; }

  // A^l_s = Gamma^l_{m s} u^m, the connection form contracted with a velocity.
  Matrix contract(const Eigen::VectorXd& velocity) const;

 private:
  size_t index(int l, int m, int n) const { return static_cast<size_t>((l * dim_ + m) * dim_ + n); }

  int dim_;
  std::vector<double> values_;
};

class Manifold {
 public:
  using MetricFn = std::function<Matrix(const Point&)>;
  using ChristoffelFn = std::function<Christoffel(const Point&)>;
  using DomainFn = std::function<bool(const Point&)>;
  // Closed-form geodesic distance, where a preset knows one.
  using DistanceFn = std::function<double(const Point&, const Point&)>;

  Manifold(std::string name, int dim, MetricFn metric, DomainFn domain,
           ChristoffelFn christoffel = {}, DistanceFn distance = {}, bool flat = false);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  bool flat() const { return flat_; }
  bool contains(const Point& x) const;
  bool has_analytic_christoffel() const { return static_cast<bool>(christoffel_); }
  bool has_distance() const { return static_cast<bool>(distance_); }

  // Raw evaluators. No domain validation; the free functions below check.
  Matrix raw_metric(const Point& x) const { return metric_(x); }
  Christoffel raw_christoffel(const Point& x) const;
  double distance(const Point& a, const Point& b) const;

  // Throws DomainError unless x has the right size and lies in the chart.
  void require(const Point& x, const char* what) const;

 private:
  std::string name_;
  int dim_;
  MetricFn metric_;
  DomainFn domain_;
  ChristoffelFn christoffel_;
  DistanceFn distance_;
  bool flat_;
};

Matrix metric_at(const Manifold& m, const Point& x);

// sqrt|det g(x)|
double volume_density(const Manifold& m, const Point& x);

// Analytic symbols if the manifold carries them, otherwise central differences.
Christoffel christoffel_at(const Manifold& m, const Point& x);

// Central differences of the metric with h = 1e-5 * max(1, |x^mu|).
Christoffel finite_difference_christoffel(const Manifold& m, const Point& x);

double metric_norm(const Manifold& m, const TangentVector& v);
double metric_inner(const Manifold& m, const Point& x, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& w);

// Sampled curve in chart coordinates, parametrized on [0, 1]. Between samples
// the curve is the straight chart segment.
class Path {
 public:
  Path(std::vector<Point> samples, std::vector<double> params,
       std::vector<Eigen::VectorXd> velocities = {});

  // Straight chart segment a -> b with n_samples >= 2 evenly spaced samples.
  static Path segment(const Point& a, const Point& b, int n_samples = 2);
  // Polyline through the vertices, parametrized proportionally to chart
  // length. Zero-length polylines get a uniform parametrization.
  static Path polyline(const std::vector<Point>& vertices);

  const std::vector<Point>& samples() const { return samples_; }
  const std::vector<double>& params() const { return params_; }
  // dx/dt at each sample, present for geodesics only.
  const std::vector<Eigen::VectorXd>& velocities() const { return velocities_; }
  bool has_velocities() const { return !velocities_.empty(); }

  size_t size() const { return samples_.size(); }
  int dim() const { return static_cast<int>(samples_.front().size()); }
  const Point& start() const { return samples_.front(); }
  const Point& end() const { return samples_.back(); }
  double chart_length() const;

  Path reversed() const;
  // This path followed by `next`; next.start() must equal end().
  Path then(const Path& next) const;

 private:
  std::vector<Point> samples_;
  std::vector<double> params_;
  std::vector<Eigen::VectorXd> velocities_;
};

// Solves x'' + Gamma(x)[x', x'] = 0 on [0, 1] with n_steps fixed RK4 steps.
Path geodesic_integrate(const Manifold& m, const TangentVector& start, int n_steps);

// gamma_v(1)
Point exp_map(const Manifold& m, const TangentVector& v, int n_steps = kDefaultStepsPerUnit);

// Geodesic integrated jointly with the vector transport matrix along it:
// a vector u at the start arrives as transport * u at the end.
struct GeodesicFlow {
  Point end;
  Eigen::VectorXd end_velocity;
  Matrix transport;
};
GeodesicFlow geodesic_flow(const Manifold& m, const TangentVector& start, int n_steps);

// Shooting-method inverse of exp_map: finds v at x with exp_x v = target.
struct LogMapOptions {
  int n_steps = kDefaultStepsPerUnit;
  double tolerance = 1e-10;
  int max_iterations = 50;
};
TangentVector log_map(const Manifold& m, const Point& x, const Point& target,
                      const LogMapOptions& options = {});

// Transport matrix of the Levi-Civita connection along the polyline: a vector
// u at path.start() arrives as P u at path.end(). RK4 steps cover at most
// 1 / steps_per_unit of chart length, and less where the connection is large
// (near the sphere poles).
Matrix transport_matrix(const Manifold& m, const Path& path,
                        int steps_per_unit = kDefaultStepsPerUnit);

// Parallel transport of a tensor along the polyline: one connection term per
// slot, minus for upper slots and plus for lower slots.
TensorValue parallel_transport(const Manifold& m, const Path& path, const TensorValue& t,
                               int steps_per_unit = kDefaultStepsPerUnit);

// Coordinate change between two charts together with its Jacobian
// d x'^mu / d x^nu.
struct ChartTransition {
  std::string name;
  std::string source;  // manifold preset of the source chart
  std::string target;  // manifold preset of the target chart
  std::function<Point(const Point&)> forward;
  std::function<Matrix(const Point&)> jacobian;
  std::function<Point(const Point&)> inverse;
  std::function<bool(const Point&)> overlap;
};

Point transition_point(const ChartTransition& ct, const Point& x);
Matrix transition_jacobian(const ChartTransition& ct, const Point& x);
Point transition_inverse(const ChartTransition& ct, const Point& x_target);

// Central-difference Jacobian of ct.forward, step 1e-6 * max(1, |x^mu|).
Matrix finite_difference_jacobian(const ChartTransition& ct, const Point& x);

}  // namespace covconv
