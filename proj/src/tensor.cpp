#include "covconv/tensor.hpp"

#include <cmath>
#include <Eigen/LU>

namespace covconv {

size_t TensorRank::component_count(int dim) const {
  size_t n = 1;
  for (int i = 0; i < slots(); ++i) n *= static_cast<size_t>(dim);
  return n;
}

std::string TensorRank::str() const {
  return "(" + std::to_string(n_upper) + "," + std::to_string(n_lower) + ")";
}

TensorValue::TensorValue(TensorRank r, Point b, std::vector<double> c)
    : rank(r), base(std::move(b)), components(std::move(c)) {
  if (rank.n_upper < 0 || rank.n_lower < 0) throw InvalidArgument("negative tensor rank");
  if (components.size() != rank.component_count(dim()))
    throw InvalidArgument("tensor of rank " + rank.str() + " at d=" + std::to_string(dim()) +
                          " needs " + std::to_string(rank.component_count(dim())) +
                          " components, got " + std::to_string(components.size()));
  for (double c_i : components)
    if (!std::isfinite(c_i)) throw NumericalError("non-finite tensor component");
}

TensorValue TensorValue::zero(TensorRank r, const Point& base) {
  return TensorValue(r, base, std::vector<double>(r.component_count(static_cast<int>(base.size())), 0.0));
}

TensorValue TensorValue::scalar(double value, const Point& base) {
  return TensorValue(TensorRank{0, 0}, base, {value});
}

TensorValue TensorValue::vector(const Eigen::VectorXd& v, const Point& base) {
  if (v.size() != base.size()) throw InvalidArgument("vector/base dimension mismatch");
  return TensorValue(TensorRank{1, 0}, base, std::vector<double>(v.data(), v.data() + v.size()));
}

double TensorValue::max_abs_difference(const TensorValue& other) const {
  if (!(rank == other.rank) || components.size() != other.components.size())
    throw InvalidArgument("comparing tensors of different rank");
  double worst = 0.0;
  for (size_t i = 0; i < components.size(); ++i)
    worst = std::max(worst, std::abs(components[i] - other.components[i]));
  return worst;
}

double TensorValue::max_abs() const {
  double worst = 0.0;
  for (double c : components) worst = std::max(worst, std::abs(c));
  return worst;
}

std::vector<double> apply_to_slot(const std::vector<double>& t, int dim, int slots, int slot,
                                  const Matrix& m) {
  // View the storage as [outer][slot][inner].
  size_t inner = 1;
  for (int s = slot + 1; s < slots; ++s) inner *= static_cast<size_t>(dim);
  const size_t stride = inner * static_cast<size_t>(dim);
  const size_t outer = t.size() / stride;

  std::vector<double> out(t.size(), 0.0);
  for (size_t o = 0; o < outer; ++o)
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) {
        const double mab = m(a, b);
        if (mab == 0.0) continue;
        const double* src = &t[o * stride + static_cast<size_t>(b) * inner];
        double* dst = &out[o * stride + static_cast<size_t>(a) * inner];
        for (size_t i = 0; i < inner; ++i) dst[i] += mab * src[i];
      }
  return out;
}

TensorValue push_tensor(const TensorValue& t, const Matrix& jacobian, const Matrix& jacobian_inv) {
  const int d = t.dim();
  if (jacobian.rows() != d || jacobian.cols() != d || jacobian_inv.rows() != d ||
      jacobian_inv.cols() != d)
    throw InvalidArgument("Jacobian dimension does not match tensor");
  std::vector<double> c = t.components;
  const int slots = t.rank.slots();
  for (int s = 0; s < t.rank.n_upper; ++s) c = apply_to_slot(c, d, slots, s, jacobian);
  if (t.rank.n_lower > 0) {
    const Matrix cov = jacobian_inv.transpose();
    for (int s = t.rank.n_upper; s < slots; ++s) c = apply_to_slot(c, d, slots, s, cov);
  }
  return TensorValue(t.rank, t.base, std::move(c));
}

TensorValue push_tensor(const TensorValue& t, const Matrix& jacobian) {
  Eigen::FullPivLU<Matrix> lu(jacobian);
  if (!lu.isInvertible()) throw NumericalError("singular Jacobian");
  return push_tensor(t, jacobian, lu.inverse());
}

std::vector<std::string> multi_index_labels(const std::string& prefix, int dim, int slots) {
  if (slots == 0) return {prefix};
  std::vector<std::string> labels{prefix + "_"};
  for (int s = 0; s < slots; ++s) {
    std::vector<std::string> next;
    next.reserve(labels.size() * static_cast<size_t>(dim));
    for (const auto& l : labels)
      for (int i = 1; i <= dim; ++i) next.push_back(l + std::to_string(i));
    labels = std::move(next);
  }
  return labels;
}

}  // namespace covconv
