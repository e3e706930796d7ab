#include "covconv/fields.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/LU>

#include "covconv/presets.hpp"

namespace covconv {

bool GridSpec::contains(const Point& x) const {
  if (x.size() != 2 || n1 < 1 || n2 < 1) return false;
  const double tol = 1e-12;
  for (int a = 0; a < 2; ++a) {
    const int n = a == 0 ? n1 : n2;
    const double s = (x[a] - origin[a]) / spacing[a];
    if (s < -tol || s > (n - 1) + tol) return false;
  }
  return true;
}

TensorField TensorField::oracle(TensorRank rank, int dim, std::string chart, Evaluator eval,
                                Region region) {
  if (!eval) throw InvalidArgument("oracle field needs an evaluator");
  TensorField f(rank, dim, std::move(chart));
  f.eval_ = std::move(eval);
  f.region_ = std::move(region);
  return f;
}

TensorField TensorField::grid(TensorRank rank, std::string chart, GridSpec spec,
                              std::vector<double> values) {
  if (spec.n1 < 2 || spec.n2 < 2) throw InvalidArgument("grid field needs at least 2x2 nodes");
  if (!(spec.spacing[0] > 0.0 && spec.spacing[1] > 0.0))
    throw InvalidArgument("grid spacing must be positive");
  const size_t ncomp = rank.component_count(2);
  if (values.size() != ncomp * static_cast<size_t>(spec.n1) * static_cast<size_t>(spec.n2))
    throw InvalidArgument("grid value count does not match grid shape and rank");
  TensorField f(rank, 2, std::move(chart));
  f.grid_ = std::make_shared<const GridData>(GridData{spec, std::move(values)});
  return f;
}

const GridSpec& TensorField::grid_spec() const {
  if (!grid_) throw InvalidArgument("field is not a grid field");
  return grid_->spec;
}

const std::vector<double>& TensorField::grid_values() const {
  if (!grid_) throw InvalidArgument("field is not a grid field");
  return grid_->values;
}

bool TensorField::contains(const Point& x) const {
  if (x.size() != dim_ || !x.allFinite()) return false;
  if (grid_) return grid_->spec.contains(x);
  return !region_ || region_(x);
}

TensorValue TensorField::sample(const Point& x) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << "sample point (" << x.transpose() << ") outside the field region";
    throw DomainError(os.str());
  }
  if (grid_) return TensorValue(rank_, x, interpolate(x));
  auto c = eval_(x);
  if (c.size() != rank_.component_count(dim_))
    throw InvalidArgument("field oracle returned the wrong number of components");
  return TensorValue(rank_, x, std::move(c));
}

std::vector<double> TensorField::interpolate(const Point& x) const {
  const GridSpec& g = grid_->spec;
  const size_t ncomp = rank_.component_count(2);
  int idx[2];
  double frac[2];
  for (int a = 0; a < 2; ++a) {
    const int n = a == 0 ? g.n1 : g.n2;
    const double s = std::clamp((x[a] - g.origin[a]) / g.spacing[a], 0.0, static_cast<double>(n - 1));
    int i = static_cast<int>(std::floor(s));
    if (i >= n - 1) i = n - 2;
    idx[a] = i;
    frac[a] = s - i;
  }
  auto at = [&](int i, int j, size_t c) {
    return grid_->values[(static_cast<size_t>(i) * static_cast<size_t>(g.n2) + static_cast<size_t>(j)) * ncomp + c];
  };
  std::vector<double> out(ncomp);
  const double fx = frac[0], fy = frac[1];
  for (size_t c = 0; c < ncomp; ++c) {
    out[c] = (1 - fx) * (1 - fy) * at(idx[0], idx[1], c) + fx * (1 - fy) * at(idx[0] + 1, idx[1], c) +
             (1 - fx) * fy * at(idx[0], idx[1] + 1, c) + fx * fy * at(idx[0] + 1, idx[1] + 1, c);
  }
  return out;
}

TensorField tabulate(const TensorField& f, const GridSpec& spec) {
  if (f.dim() != 2) throw InvalidArgument("grids are two-dimensional");
  std::vector<double> values;
  for (int i = 0; i < spec.n1; ++i)
    for (int j = 0; j < spec.n2; ++j) {
      const auto v = f.sample(Point(spec.node(i, j)));
      values.insert(values.end(), v.components.begin(), v.components.end());
    }
  return TensorField::grid(f.rank(), f.chart(), spec, std::move(values));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
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

double parse_number(const std::string& s, const std::string& path, size_t line) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

// Distinct values in order of appearance, merged within a relative tolerance.
std::vector<double> distinct_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || std::abs(x - out.back()) > 1e-9 * std::max(1.0, std::abs(x))) out.push_back(x);
  return out;
}

}  // namespace

TensorField read_grid_csv(const std::string& path, TensorRank rank, const std::string& chart) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("field CSV '" + path + "' is empty");

  const auto header = split_csv_line(line);
  const auto labels = multi_index_labels("c", 2, rank.slots());
  std::vector<std::string> expected{"coord1", "coord2"};
  expected.insert(expected.end(), labels.begin(), labels.end());
  if (header != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw IoError("field CSV '" + path + "' header must be '" + want + "' for rank " + rank.str());
  }

  std::vector<Eigen::Vector2d> coords;
  std::vector<double> values;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected.size())
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(expected.size()) + " columns");
    coords.emplace_back(parse_number(cells[0], path, lineno), parse_number(cells[1], path, lineno));
    for (size_t c = 2; c < cells.size(); ++c) values.push_back(parse_number(cells[c], path, lineno));
  }

  std::vector<double> c1, c2;
  for (const auto& c : coords) {
    c1.push_back(c[0]);
    c2.push_back(c[1]);
  }
  const auto u1 = distinct_sorted(c1), u2 = distinct_sorted(c2);
  if (u1.size() < 2 || u2.size() < 2 || u1.size() * u2.size() != coords.size())
    throw IoError("field CSV '" + path + "' is not a complete rectangular grid");

  GridSpec spec;
  spec.n1 = static_cast<int>(u1.size());
  spec.n2 = static_cast<int>(u2.size());
  spec.origin = {u1.front(), u2.front()};
  spec.spacing = {(u1.back() - u1.front()) / (spec.n1 - 1), (u2.back() - u2.front()) / (spec.n2 - 1)};
  for (int i = 0; i < spec.n1; ++i)
    for (int j = 0; j < spec.n2; ++j) {
      const auto& c = coords[static_cast<size_t>(i * spec.n2 + j)];
      const Eigen::Vector2d want = spec.node(i, j);
      if ((c - want).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, want.cwiseAbs().maxCoeff()))
        throw IoError("field CSV '" + path + "' rows are not a uniform row-major grid");
    }
  return TensorField::grid(rank, chart, spec, std::move(values));
}

void write_grid_csv(const std::string& path, const TensorField& field) {
  const GridSpec& spec = field.grid_spec();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write field CSV '" + path + "'");
  out.precision(17);
  out << "coord1,coord2";
  for (const auto& l : multi_index_labels("c", 2, field.rank().slots())) out << ',' << l;
  out << '\n';
  const size_t ncomp = field.rank().component_count(2);
  const auto& values = field.grid_values();
  for (int i = 0; i < spec.n1; ++i)
    for (int j = 0; j < spec.n2; ++j) {
      const auto node = spec.node(i, j);
      out << node[0] << ',' << node[1];
      const size_t base = static_cast<size_t>(i * spec.n2 + j) * ncomp;
      for (size_t c = 0; c < ncomp; ++c) out << ',' << values[base + c];
      out << '\n';
    }
  if (!out) throw IoError("failed writing field CSV '" + path + "'");
}

// ---------------------------------------------------------------------------

TensorField transform_field(const TensorField& f, const ChartTransition& ct) {
  auto eval = [f, ct](const Point& xt) {
    const Point x = transition_inverse(ct, xt);
    const TensorValue v = f.sample(x);
    return push_tensor(v, transition_jacobian(ct, x)).components;
  };
  auto region = [f, ct](const Point& xt) {
    try {
      return f.contains(transition_inverse(ct, xt));
    } catch (const Error&) {
      return false;
    }
  };
  return TensorField::oracle(f.rank(), f.dim(), ct.target, eval, region);
}

TensorValue transport_to_center(const Manifold& m, const TensorField& f, const TangentVector& v,
                                int n_steps) {
  if (f.dim() != m.dim()) throw InvalidArgument("field dimension does not match manifold");
  const GeodesicFlow flow = geodesic_flow(m, v, n_steps);
  const TensorValue at_y = f.sample(flow.end);
  // Backward transport is the inverse of the forward transport matrix.
  Eigen::FullPivLU<Matrix> lu(flow.transport);
  if (!lu.isInvertible()) throw NumericalError("degenerate transport along geodesic");
  TensorValue out = push_tensor(at_y, lu.inverse(), flow.transport);
  out.base = v.base;
  return out;
}

TransportedField transported_localized_field(const Manifold& m, const TensorField& f,
                                             const Point& x, const Path& path,
                                             const BallSpec& ball, int n_steps) {
  if ((path.start() - x).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff()))
    throw InvalidArgument("transport path must start at the field center");
  const TangentQuadrature quad = build_quadrature(m, x, ball);
  const Matrix along = transport_matrix(m, path, n_steps);
  Eigen::FullPivLU<Matrix> lu(along);
  if (!lu.isInvertible()) throw NumericalError("degenerate transport along path");
  const Matrix along_inv = lu.inverse();

  TransportedField out;
  out.center = path.end();
  out.rank = f.rank();
  for (size_t i = 0; i < quad.size(); ++i) {
    TensorValue at_center = push_tensor(transport_to_center(m, f, quad.node(i), n_steps), along, along_inv);
    at_center.base = out.center;

    const Eigen::VectorXd node = along * quad.nodes[i];
    const GeodesicFlow flow = geodesic_flow(m, {out.center, node}, n_steps);
    Eigen::FullPivLU<Matrix> flu(flow.transport);
    if (!flu.isInvertible()) throw NumericalError("degenerate transport along geodesic");
    TensorValue at_point = push_tensor(at_center, flow.transport, flu.inverse());
    at_point.base = flow.end;

    out.nodes.push_back(node);
    out.points.push_back(flow.end);
    out.center_values.push_back(std::move(at_center));
    out.point_values.push_back(std::move(at_point));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in oracles

namespace {

void need_params(const std::string& name, const std::vector<double>& p, size_t n) {
  if (p.size() != n)
    throw ConfigError("field '" + name + "' takes " + std::to_string(n) + " parameters, got " +
                      std::to_string(p.size()));
}

bool is_sphere(const Manifold& m) { return m.name() == "sphere" || m.name() == "scaled-sphere"; }

}  // namespace

TensorField make_field_oracle(const std::string& name, const std::vector<double>& p,
                              const Manifold& m) {
  const int d = m.dim();
  const auto chart = m.name();
  auto region = [m](const Point& x) { return m.contains(x); };
  const TensorRank scalar{0, 0}, vector{1, 0};

  if (name == "scalar-constant") {
    need_params(name, p, 1);
    const double c = p[0];
    return TensorField::oracle(scalar, d, chart, [c](const Point&) { return std::vector<double>{c}; }, region);
  }
  if (name == "scalar-linear") {
    need_params(name, p, 3);
    if (d != 2) throw ConfigError("scalar-linear is defined for d = 2");
    return TensorField::oracle(scalar, d, chart, [p](const Point& x) {
      return std::vector<double>{p[0] + p[1] * x[0] + p[2] * x[1]};
    }, region);
  }
  if (name == "scalar-bump") {
    if (p.size() != 3 && p.size() != 4) throw ConfigError("field 'scalar-bump' takes 3 or 4 parameters");
    if (!m.has_distance()) throw ConfigError("scalar-bump needs a manifold with closed-form distance");
    if (!(p[2] > 0.0)) throw ConfigError("scalar-bump width must be positive");
    Point center(2);
    center << p[0], p[1];
    const double sigma2 = p[2] * p[2];
    const double amp = p.size() == 4 ? p[3] : 1.0;
    return TensorField::oracle(scalar, d, chart, [m, center, sigma2, amp](const Point& x) {
      const double r = m.distance(x, center);
      return std::vector<double>{amp * std::exp(-r * r / sigma2)};
    }, region);
  }
  if (name == "vector-constant") {
    need_params(name, p, 2);
    return TensorField::oracle(vector, d, chart, [p](const Point&) { return std::vector<double>{p[0], p[1]}; }, region);
  }
  if (name == "vector-linear" || name == "tensor-outer") {
    need_params(name, p, 6);
    auto u = [p](const Point& x) {
      return Eigen::Vector2d(p[0] * x[0] + p[1] * x[1] + p[4], p[2] * x[0] + p[3] * x[1] + p[5]);
    };
    if (name == "vector-linear")
      return TensorField::oracle(vector, d, chart, [u](const Point& x) {
        const auto v = u(x);
        return std::vector<double>{v[0], v[1]};
      }, region);
    return TensorField::oracle(TensorRank{2, 0}, d, chart, [u](const Point& x) {
      const auto v = u(x);
      return std::vector<double>{v[0] * v[0], v[0] * v[1], v[1] * v[0], v[1] * v[1]};
    }, region);
  }
  if (name == "vector-rotation") {
    need_params(name, p, 0);
    return TensorField::oracle(vector, d, chart, [](const Point& x) { return std::vector<double>{-x[1], x[0]}; }, region);
  }
  if (name == "sphere-ambient") {
    need_params(name, p, 3);
    if (!is_sphere(m)) throw ConfigError("sphere-ambient needs a sphere preset");
    const Eigen::Vector3d a(p[0], p[1], p[2]);
    return TensorField::oracle(vector, d, chart, [a](const Point& x) {
      const auto frame = sphere_tangent_frame(x);
      const double s = std::sin(x[0]);
      return std::vector<double>{a.dot(frame.col(0)), a.dot(frame.col(1)) / (s * s)};
    }, region);
  }
  if (name == "sphere-ephi-unit") {
    need_params(name, p, 0);
    if (!is_sphere(m)) throw ConfigError("sphere-ephi-unit needs a sphere preset");
    return TensorField::oracle(vector, d, chart, [](const Point& x) {
      return std::vector<double>{0.0, 1.0 / std::sin(x[0])};
    }, region);
  }
  throw ConfigError("unknown field oracle '" + name + "'");
}

std::vector<std::string> field_oracle_names() {
  return {"scalar-constant", "scalar-linear", "scalar-bump", "vector-constant", "vector-linear",
          "vector-rotation", "sphere-ambient", "sphere-ephi-unit", "tensor-outer"};
}

}  // namespace covconv
