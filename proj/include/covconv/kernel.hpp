#pragma once

// Tangent-space convolution kernels tabulated on a tangent-ball quadrature,
// and weight sharing by parallel transport from a reference point.
//
// Coefficient layout. For an output rank (a, b) and input rank (c, e) the
// per-node coefficient is a tensor of rank (a + e, b + c) with slots ordered
//   upper: [output upper (a) | duals of input lower (e)]
//   lower: [output lower (b) | duals of input upper (c)]
// so for purely contravariant fields the storage is row-major over
// (output slots, input slots).

#include <string>
#include <vector>

#include "covconv/geometry.hpp"
#include "covconv/quadrature.hpp"
#include "covconv/tensor.hpp"

namespace covconv {

struct SharedKernel {
  Point ref_point;
  TensorRank rank_in;
  TensorRank rank_out;
  TangentQuadrature quad;
  std::vector<TensorValue> coeffs;  // one per quadrature node, based at ref_point

  TensorRank coeff_rank() const {
    return {rank_out.n_upper + rank_in.n_lower, rank_out.n_lower + rank_in.n_upper};
  }
  // Throws InvalidArgument if sizes, ranks or bases disagree.
  void validate() const;
};

// Built-in families, tabulated on build_quadrature(m, x, ball):
//   zero            []        scalar -> scalar, K = 0
//   constant        [k0]      scalar -> scalar, K = k0
//   radial          [s]       scalar -> scalar, K = s |v|_g (s defaults to 1)
//   linear-covector []        vector -> scalar, K_n = g_{nm}(x) v^m
//   linear-vector   []        scalar -> vector, K^m = v^m
//   radial-identity [c0, c1]  vector -> vector, K^m_n = (c0 + c1 |v|_g) delta^m_n
SharedKernel make_kernel(const std::string& family, const std::vector<double>& params,
                         const Manifold& m, const Point& x, const BallSpec& ball);

std::vector<std::string> kernel_family_names();

// Node coefficient table `v1,v2,<labels>` in quadrature node order. The node
// columns must match the quadrature built from `ball` at x.
SharedKernel read_kernel_csv(const std::string& path, TensorRank rank_out, TensorRank rank_in,
                             const Manifold& m, const Point& x, const BallSpec& ball);
void write_kernel_csv(const std::string& path, const SharedKernel& k);

// Re-expresses the kernel under a linear frame map M at a new base point:
// nodes M v, coefficients pushed by M, coordinate weights scaled by |det M|.
SharedKernel map_kernel(const SharedKernel& k, const Matrix& frame_map, const Point& new_base);

// Transports every node vector and coefficient tensor along the path; the
// result is based at path.end().
SharedKernel share_kernel(const Manifold& m, const SharedKernel& k, const Path& path,
                          int steps_per_unit = kDefaultStepsPerUnit);

enum class SharingMode { ChartSegment, Geodesic, None };

SharingMode parse_sharing_mode(const std::string& s);
std::string to_string(SharingMode mode);

// Path used to share a kernel from `from` to `to`.
Path sharing_path(const Manifold& m, const Point& from, const Point& to, SharingMode mode,
                  int n_steps = kDefaultStepsPerUnit);

// Rotation angle of a linear map on T_x M measured in the g(x)-orthonormal
// frame (d = 2 only).
double rotation_angle(const Manifold& m, const Point& x, const Matrix& map);

struct TwoPathRelation {
  Matrix holonomy;           // transport around reverse(path2) then path1, at x'
  double holonomy_angle = 0.0;
  double max_deviation = 0.0;
};

// Checks K_{p1}(x', H w) = H . K_{p2}(x', w) at every node.
TwoPathRelation kernel_two_path_relation(const Manifold& m, const SharedKernel& k, const Path& path1,
                                         const Path& path2, int steps_per_unit = kDefaultStepsPerUnit);

}  // namespace covconv
