#include "covconv/kernel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/LU>

namespace covconv {

namespace {

bool same_point(const Point& a, const Point& b) {
  return a.size() == b.size() &&
         (a - b).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

void SharedKernel::validate() const {
  if (coeffs.size() != quad.size())
    throw InvalidArgument("kernel has " + std::to_string(coeffs.size()) + " coefficients for " +
                          std::to_string(quad.size()) + " nodes");
  if (quad.weights.size() != quad.nodes.size()) throw InvalidArgument("quadrature weights/nodes mismatch");
  if (!same_point(quad.base, ref_point)) throw InvalidArgument("kernel quadrature is not based at the reference point");
  const TensorRank r = coeff_rank();
  for (const auto& c : coeffs) {
    if (!(c.rank == r)) throw InvalidArgument("kernel coefficient has rank " + c.rank.str() + ", expected " + r.str());
    if (!same_point(c.base, ref_point)) throw InvalidArgument("kernel coefficient is not based at the reference point");
  }
}

SharedKernel make_kernel(const std::string& family, const std::vector<double>& params,
                         const Manifold& m, const Point& x, const BallSpec& ball) {
  auto need = [&](size_t lo, size_t hi) {
    if (params.size() < lo || params.size() > hi)
      throw ConfigError("kernel family '" + family + "' got " + std::to_string(params.size()) + " parameters");
  };

  SharedKernel k;
  k.ref_point = x;
  k.quad = build_quadrature(m, x, ball);
  const Matrix g = metric_at(m, x);
  auto norm = [&g](const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); };
  const int d = m.dim();

  if (family == "zero" || family == "constant" || family == "radial") {
    need(family == "constant" ? 1 : 0, 1);
    k.rank_in = k.rank_out = TensorRank{0, 0};
    for (const auto& v : k.quad.nodes) {
      double value = 0.0;
      if (family == "constant") value = params[0];
      if (family == "radial") value = (params.empty() ? 1.0 : params[0]) * norm(v);
      k.coeffs.push_back(TensorValue::scalar(value, x));
    }
  } else if (family == "linear-covector") {
    need(0, 0);
    k.rank_in = TensorRank{1, 0};
    k.rank_out = TensorRank{0, 0};
    for (const auto& v : k.quad.nodes) {
      const Eigen::VectorXd lowered = g * v;
      k.coeffs.emplace_back(TensorRank{0, 1}, x, std::vector<double>(lowered.data(), lowered.data() + d));
    }
  } else if (family == "linear-vector") {
    need(0, 0);
    k.rank_in = TensorRank{0, 0};
    k.rank_out = TensorRank{1, 0};
    for (const auto& v : k.quad.nodes) k.coeffs.push_back(TensorValue::vector(v, x));
  } else if (family == "radial-identity") {
    need(2, 2);
    k.rank_in = k.rank_out = TensorRank{1, 0};
    for (const auto& v : k.quad.nodes) {
      const double s = params[0] + params[1] * norm(v);
      std::vector<double> c(static_cast<size_t>(d * d), 0.0);
      for (int i = 0; i < d; ++i) c[static_cast<size_t>(i * d + i)] = s;
      k.coeffs.emplace_back(TensorRank{1, 1}, x, std::move(c));
    }
  } else {
    throw ConfigError("unknown kernel family '" + family + "'");
  }
  return k;
}

std::vector<std::string> kernel_family_names() {
  return {"zero", "constant", "radial", "linear-covector", "linear-vector", "radial-identity"};
}

SharedKernel read_kernel_csv(const std::string& path, TensorRank rank_out, TensorRank rank_in,
                             const Manifold& m, const Point& x, const BallSpec& ball) {
  SharedKernel k;
  k.ref_point = x;
  k.rank_in = rank_in;
  k.rank_out = rank_out;
  k.quad = build_quadrature(m, x, ball);
  const TensorRank cr = k.coeff_rank();

  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("kernel CSV '" + path + "' is empty");
  std::vector<std::string> expected{"v1", "v2"};
  for (const auto& l : multi_index_labels("c", m.dim(), cr.slots())) expected.push_back(l);
  if (split(line) != expected) throw IoError("kernel CSV '" + path + "' has an unexpected header for coefficient rank " + cr.str());

  size_t row = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != expected.size())
      throw IoError(path + ":" + std::to_string(lineno) + ": wrong column count");
    std::vector<double> nums;
    try {
      for (const auto& c : cells) nums.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": not a number");
    }
    if (row >= k.quad.size()) throw IoError("kernel CSV '" + path + "' has more rows than quadrature nodes");
    const Eigen::VectorXd& node = k.quad.nodes[row];
    if (std::abs(nums[0] - node[0]) > 1e-9 || std::abs(nums[1] - node[1]) > 1e-9)
      throw IoError(path + ":" + std::to_string(lineno) + ": node does not match the quadrature");
    k.coeffs.emplace_back(cr, x, std::vector<double>(nums.begin() + 2, nums.end()));
    ++row;
  }
  if (row != k.quad.size()) throw IoError("kernel CSV '" + path + "' has fewer rows than quadrature nodes");
  return k;
}

void write_kernel_csv(const std::string& path, const SharedKernel& k) {
  k.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write kernel CSV '" + path + "'");
  out.precision(17);
  out << "v1,v2";
  for (const auto& l : multi_index_labels("c", static_cast<int>(k.ref_point.size()), k.coeff_rank().slots())) out << ',' << l;
  out << '\n';
  for (size_t i = 0; i < k.quad.size(); ++i) {
    out << k.quad.nodes[i][0] << ',' << k.quad.nodes[i][1];
    for (double c : k.coeffs[i].components) out << ',' << c;
    out << '\n';
  }
}

SharedKernel map_kernel(const SharedKernel& k, const Matrix& frame_map, const Point& new_base) {
  k.validate();
  Eigen::FullPivLU<Matrix> lu(frame_map);
  if (!lu.isInvertible()) throw NumericalError("singular frame map");
  const Matrix inv = lu.inverse();
  const double jac = std::abs(frame_map.determinant());

  SharedKernel out;
  out.ref_point = new_base;
  out.rank_in = k.rank_in;
  out.rank_out = k.rank_out;
  out.quad.base = new_base;
  out.quad.radius = k.quad.radius;
  for (size_t i = 0; i < k.quad.size(); ++i) {
    out.quad.nodes.push_back(frame_map * k.quad.nodes[i]);
    out.quad.weights.push_back(k.quad.weights[i] * jac);
    TensorValue c = push_tensor(k.coeffs[i], frame_map, inv);
    c.base = new_base;
    out.coeffs.push_back(std::move(c));
  }
  return out;
}

SharedKernel share_kernel(const Manifold& m, const SharedKernel& k, const Path& path, int steps_per_unit) {
  if (!same_point(path.start(), k.ref_point))
    throw InvalidArgument("sharing path must start at the kernel reference point");
  return map_kernel(k, transport_matrix(m, path, steps_per_unit), path.end());
}

SharingMode parse_sharing_mode(const std::string& s) {
  if (s == "chart-segment") return SharingMode::ChartSegment;
  if (s == "geodesic") return SharingMode::Geodesic;
  if (s == "none") return SharingMode::None;
  throw ConfigError("unknown sharing mode '" + s + "' (chart-segment | geodesic | none)");
}

std::string to_string(SharingMode mode) {
  switch (mode) {
    case SharingMode::ChartSegment: return "chart-segment";
    case SharingMode::Geodesic: return "geodesic";
    case SharingMode::None: return "none";
  }
  return "none";
}

Path sharing_path(const Manifold& m, const Point& from, const Point& to, SharingMode mode, int n_steps) {
  switch (mode) {
    case SharingMode::ChartSegment:
      m.require(from, "sharing path start");
      m.require(to, "sharing path end");
      return Path::segment(from, to, 2);
    case SharingMode::Geodesic: {
      const TangentVector v = log_map(m, from, to, {n_steps, 1e-10, 50});
      Path p = geodesic_integrate(m, v, n_steps);
      // Snap the endpoint onto the requested point; the shooting residual is
      // below the log-map tolerance.
      std::vector<Point> samples = p.samples();
      samples.back() = to;
      return Path(std::move(samples), p.params(), p.velocities());
    }
    case SharingMode::None:
      break;
  }
  throw InvalidArgument("sharing mode 'none' has no sharing path");
}

double rotation_angle(const Manifold& m, const Point& x, const Matrix& map) {
  if (m.dim() != 2) throw InvalidArgument("rotation angle is defined for d = 2");
  const Matrix e = orthonormal_frame(metric_at(m, x));
  const Matrix q = e.fullPivLu().solve(map * e);
  return std::atan2(q(1, 0) - q(0, 1), q(0, 0) + q(1, 1));
}

TwoPathRelation kernel_two_path_relation(const Manifold& m, const SharedKernel& k, const Path& path1,
                                         const Path& path2, int steps_per_unit) {
  if (!same_point(path1.start(), path2.start()) || !same_point(path1.end(), path2.end()))
    throw InvalidArgument("paths must share both endpoints");
  const SharedKernel k1 = share_kernel(m, k, path1, steps_per_unit);
  const SharedKernel k2 = share_kernel(m, k, path2, steps_per_unit);

  TwoPathRelation rel;
  rel.holonomy = transport_matrix(m, path2.reversed().then(path1), steps_per_unit);
  if (m.dim() == 2) rel.holonomy_angle = rotation_angle(m, path1.end(), rel.holonomy);
  const SharedKernel conjugated = map_kernel(k2, rel.holonomy, path1.end());

  for (size_t i = 0; i < k1.quad.size(); ++i) {
    rel.max_deviation = std::max(rel.max_deviation,
                                 (k1.quad.nodes[i] - conjugated.quad.nodes[i]).cwiseAbs().maxCoeff());
    rel.max_deviation = std::max(rel.max_deviation, k1.coeffs[i].max_abs_difference(conjugated.coeffs[i]));
  }
  return rel;
}

}  // namespace covconv
