#pragma once

// Covariant convolution of tensor fields:
//
//   f_out(x) = sqrt|g(x)| sum_i w_i < K(x, v_i), f_in|_{exp_x v_i}(x) >
//
// where < , > contracts the kernel's input slots against the transported
// input value. Sums run in node order, so results are bitwise reproducible.

#include <vector>

#include "covconv/fields.hpp"
#include "covconv/kernel.hpp"

namespace covconv {

struct ConvolutionSpec {
  Manifold manifold;
  SharedKernel kernel;
  SharingMode sharing_mode = SharingMode::ChartSegment;
  std::vector<Point> output_points;
  int n_steps = kDefaultStepsPerUnit;
};

// < K, F >: contracts a kernel coefficient with an input value of rank
// kernel rank_in, producing a tensor of rank_out components.
std::vector<double> contract_kernel(const TensorValue& coeff, TensorRank rank_out, TensorRank rank_in,
                                    const TensorValue& input);

TensorValue convolve_at(const Manifold& m, const SharedKernel& k_at_x, const TensorField& f,
                        int n_steps = kDefaultStepsPerUnit);

// Same sum over a transported localized input. Center values are recomputed
// from the tabulated point values by transport back along the geodesics
// from the kernel base; kernel and field nodes must coincide.
TensorValue convolve_at(const Manifold& m, const SharedKernel& k_at_x, const TransportedField& f,
                        int n_steps = kDefaultStepsPerUnit);

// Shares the kernel from its reference point to every output point and
// evaluates there. With SharingMode::None only the reference point is used.
std::vector<TensorValue> convolve_field(const ConvolutionSpec& spec, const TensorField& f);

}  // namespace covconv
