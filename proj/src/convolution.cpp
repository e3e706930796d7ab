#include "covconv/convolution.hpp"

#include <cmath>

#include <Eigen/LU>

namespace covconv {

namespace {

// Base-d digits of `flat`, most significant first.
void digits(size_t flat, int dim, int count, int* out) {
  for (int s = count - 1; s >= 0; --s) {
    out[s] = static_cast<int>(flat % static_cast<size_t>(dim));
    flat /= static_cast<size_t>(dim);
  }
}

size_t compose(const std::vector<int>& ds, int dim) {
  size_t flat = 0;
  for (int v : ds) flat = flat * static_cast<size_t>(dim) + static_cast<size_t>(v);
  return flat;
}

}  // namespace

std::vector<double> contract_kernel(const TensorValue& coeff, TensorRank rank_out, TensorRank rank_in,
                                    const TensorValue& input) {
  if (!(input.rank == rank_in))
    throw InvalidArgument("input rank " + input.rank.str() + " does not match kernel input rank " + rank_in.str());
  const TensorRank cr{rank_out.n_upper + rank_in.n_lower, rank_out.n_lower + rank_in.n_upper};
  if (!(coeff.rank == cr)) throw InvalidArgument("kernel coefficient rank mismatch");
  const int d = input.dim();
  if (coeff.dim() != d) throw InvalidArgument("kernel/input dimension mismatch");

  const int a = rank_out.n_upper, b = rank_out.n_lower;
  const int c = rank_in.n_upper, e = rank_in.n_lower;
  const size_t n_out = rank_out.component_count(d);
  const size_t n_in = rank_in.component_count(d);

  std::vector<double> out(n_out, 0.0);
  std::vector<int> od(static_cast<size_t>(a + b)), id(static_cast<size_t>(c + e));
  std::vector<int> kd;
  kd.reserve(static_cast<size_t>(a + b + c + e));
  for (size_t o = 0; o < n_out; ++o) {
    digits(o, d, a + b, od.data());
    double acc = 0.0;
    for (size_t i = 0; i < n_in; ++i) {
      digits(i, d, c + e, id.data());
      kd.clear();
      kd.insert(kd.end(), od.begin(), od.begin() + a);          // output upper
      kd.insert(kd.end(), id.begin() + c, id.end());            // duals of input lower
      kd.insert(kd.end(), od.begin() + a, od.end());            // output lower
      kd.insert(kd.end(), id.begin(), id.begin() + c);          // duals of input upper
      acc += coeff.components[compose(kd, d)] * input.components[i];
    }
    out[o] = acc;
  }
  return out;
}

TensorValue convolve_at(const Manifold& m, const SharedKernel& k, const TensorField& f, int n_steps) {
  k.validate();
  if (!(f.rank() == k.rank_in))
    throw InvalidArgument("field rank " + f.rank().str() + " does not match kernel input rank " + k.rank_in.str());
  const Point& x = k.ref_point;
  const double density = volume_density(m, x);

  std::vector<double> acc(k.rank_out.component_count(m.dim()), 0.0);
  for (size_t i = 0; i < k.quad.size(); ++i) {
    const TensorValue at_center = transport_to_center(m, f, k.quad.node(i), n_steps);
    const auto term = contract_kernel(k.coeffs[i], k.rank_out, k.rank_in, at_center);
    for (size_t c = 0; c < acc.size(); ++c) acc[c] += k.quad.weights[i] * term[c];
  }
  for (double& c : acc) c *= density;
  return TensorValue(k.rank_out, x, std::move(acc));
}

TensorValue convolve_at(const Manifold& m, const SharedKernel& k, const TransportedField& f, int n_steps) {
  k.validate();
  if (!(f.rank == k.rank_in)) throw InvalidArgument("transported field rank does not match kernel input rank");
  if (f.nodes.size() != k.quad.size()) throw InvalidArgument("transported field and kernel have different node counts");
  const Point& x = k.ref_point;
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  if ((f.center - x).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw InvalidArgument("transported field is centered elsewhere");
  const double density = volume_density(m, x);

  std::vector<double> acc(k.rank_out.component_count(m.dim()), 0.0);
  for (size_t i = 0; i < k.quad.size(); ++i) {
    const GeodesicFlow flow = geodesic_flow(m, k.quad.node(i), n_steps);
    if ((flow.end - f.points[i]).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw InvalidArgument("transported field is not tabulated at this kernel's nodes");
    Eigen::FullPivLU<Matrix> lu(flow.transport);
    if (!lu.isInvertible()) throw NumericalError("degenerate transport along geodesic");
    TensorValue at_center = push_tensor(f.point_values[i], lu.inverse(), flow.transport);
    at_center.base = x;
    const auto term = contract_kernel(k.coeffs[i], k.rank_out, k.rank_in, at_center);
    for (size_t c = 0; c < acc.size(); ++c) acc[c] += k.quad.weights[i] * term[c];
  }
  for (double& c : acc) c *= density;
  return TensorValue(k.rank_out, x, std::move(acc));
}

std::vector<TensorValue> convolve_field(const ConvolutionSpec& spec, const TensorField& f) {
  const Manifold& m = spec.manifold;
  if (spec.sharing_mode == SharingMode::None) return {convolve_at(m, spec.kernel, f, spec.n_steps)};

  std::vector<TensorValue> out;
  out.reserve(spec.output_points.size());
  for (const Point& p : spec.output_points) {
    m.require(p, "output point");
    const Path path = sharing_path(m, spec.kernel.ref_point, p, spec.sharing_mode, spec.n_steps);
    const SharedKernel shared = share_kernel(m, spec.kernel, path, spec.n_steps);
    out.push_back(convolve_at(m, shared, f, spec.n_steps));
  }
  return out;
}

}  // namespace covconv
