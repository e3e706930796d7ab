#pragma once

// Tensor-valued feature fields over a chart region.
//
// A field is either an analytic oracle (coordinates -> components) or a
// rectangular 2-D grid with componentwise bilinear interpolation.
//
// Grid CSV layout: header `coord1,coord2,<labels>` where the labels are
// `c` for scalars and `c_<i1 i2 ...>` (1-based, storage order) otherwise.
// One row per grid node, row-major over the grid (coord2 varies fastest).

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "covconv/geometry.hpp"
#include "covconv/quadrature.hpp"
#include "covconv/tensor.hpp"

namespace covconv {

struct GridSpec {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  Eigen::Vector2d spacing = Eigen::Vector2d::Ones();
  int n1 = 0;  // nodes along coord1
  int n2 = 0;  // nodes along coord2

  Eigen::Vector2d node(int i, int j) const {
    return {origin[0] + i * spacing[0], origin[1] + j * spacing[1]};
  }
  bool contains(const Point& x) const;
};

class TensorField {
 public:
  using Evaluator = std::function<std::vector<double>(const Point&)>;
  using Region = std::function<bool(const Point&)>;

  static TensorField oracle(TensorRank rank, int dim, std::string chart, Evaluator eval,
                            Region region = {});
  static TensorField grid(TensorRank rank, std::string chart, GridSpec spec,
                          std::vector<double> values);

  const TensorRank& rank() const { return rank_; }
  int dim() const { return dim_; }
  const std::string& chart() const { return chart_; }
  bool is_grid() const { return grid_ != nullptr; }
  const GridSpec& grid_spec() const;
  const std::vector<double>& grid_values() const;
  bool contains(const Point& x) const;

  TensorValue sample(const Point& x) const;

 private:
  struct GridData {
    GridSpec spec;
    std::vector<double> values;  // node-major, components contiguous
  };

  TensorField(TensorRank rank, int dim, std::string chart) : rank_(rank), dim_(dim), chart_(std::move(chart)) {}
  std::vector<double> interpolate(const Point& x) const;

  TensorRank rank_;
  int dim_;
  std::string chart_;
  Evaluator eval_;
  Region region_;
  std::shared_ptr<const GridData> grid_;
};

inline TensorValue sample(const TensorField& f, const Point& x) { return f.sample(x); }

// Tabulates an oracle field on a grid.
TensorField tabulate(const TensorField& f, const GridSpec& spec);

TensorField read_grid_csv(const std::string& path, TensorRank rank, const std::string& chart);
void write_grid_csv(const std::string& path, const TensorField& field);

// Field expressed in the target chart of `ct`: f'(x') = push(f(x), J(x)) with
// x = ct.inverse(x'). The source field is evaluated lazily.
TensorField transform_field(const TensorField& f, const ChartTransition& ct);

// f|_{exp_x v}(x): samples f at y = exp_x v and transports the value back to
// x along the geodesic gamma_v.
TensorValue transport_to_center(const Manifold& m, const TensorField& f, const TangentVector& v,
                                int n_steps = kDefaultStepsPerUnit);

// A localized input carried along a curve (x -> x'), tabulated on the
// transported tangent-ball nodes.
struct TransportedField {
  Point center;                              // x'
  std::vector<Eigen::VectorXd> nodes;        // v_i(x')
  std::vector<Point> points;                 // y'_i = exp_{x'} v_i(x')
  std::vector<TensorValue> center_values;    // f'|_{y'_i}(x')
  std::vector<TensorValue> point_values;     // f'(y'_i)
  TensorRank rank;
};

TransportedField transported_localized_field(const Manifold& m, const TensorField& f,
                                             const Point& x, const Path& path,
                                             const BallSpec& ball,
                                             int n_steps = kDefaultStepsPerUnit);

// Built-in analytic fields. `m` supplies closed-form distances and the chart
// name. Names:
//   scalar-constant [c]                   c
//   scalar-linear   [a, b1, b2]           a + b1 x^1 + b2 x^2
//   scalar-bump     [c1, c2, sigma, amp]  amp * exp(-dist(x, c)^2 / sigma^2)
//   vector-constant [a1, a2]              (a1, a2)
//   vector-linear   [a11 a12 a21 a22 b1 b2]  A x + b
//   vector-rotation []                    (-x^2, x^1)
//   sphere-ambient  [a1, a2, a3]          tangential part of a constant R^3 vector
//   sphere-ephi-unit []                   (0, 1 / sin theta)
//   tensor-outer    [a11 a12 a21 a22 b1 b2]  u (x) u with u = A x + b, rank (2,0)
TensorField make_field_oracle(const std::string& name, const std::vector<double>& params,
                              const Manifold& m);

std::vector<std::string> field_oracle_names();

}  // namespace covconv
