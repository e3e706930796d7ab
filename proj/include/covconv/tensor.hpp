#pragma once

// Tensor values in a coordinate basis.
//
// Component layout: row-major over the slot list (upper slots first, then
// lower slots), each slot running over 0..d-1. A rank (1,1) value T^a_b at
// d = 2 is stored as [T^0_0, T^0_1, T^1_0, T^1_1].

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "covconv/errors.hpp"

namespace covconv {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct TensorRank {
  int n_upper = 0;  // contravariant slots
  int n_lower = 0;  // covariant slots

  int slots() const { return n_upper + n_lower; }
  size_t component_count(int dim) const;
  std::string str() const;

  friend bool operator==(const TensorRank&, const TensorRank&) = default;
};

struct TensorValue {
  TensorRank rank;
  Point base;
  std::vector<double> components;

  TensorValue() = default;
  TensorValue(TensorRank r, Point b, std::vector<double> c);

  static TensorValue zero(TensorRank r, const Point& base);
  static TensorValue scalar(double value, const Point& base);
  static TensorValue vector(const Eigen::VectorXd& v, const Point& base);

  int dim() const { return static_cast<int>(base.size()); }
  double max_abs_difference(const TensorValue& other) const;
  double max_abs() const;
};

// R[..a..] = sum_b M(a, b) T[..b..] on slot `slot` of a tensor with `slots`
// slots of extent `dim`.
std::vector<double> apply_to_slot(const std::vector<double>& t, int dim, int slots, int slot,
                                  const Matrix& m);

// Change of frame: upper slots contract with J, lower slots with J_inv^T.
TensorValue push_tensor(const TensorValue& t, const Matrix& jacobian, const Matrix& jacobian_inv);
TensorValue push_tensor(const TensorValue& t, const Matrix& jacobian);

// "c", "c_1", "c_12", ... with 1-based indices, in storage order.
std::vector<std::string> multi_index_labels(const std::string& prefix, int dim, int slots);

}  // namespace covconv
