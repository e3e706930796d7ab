#include "covconv/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "covconv/rep.hpp"

namespace covconv {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

Point to_point(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty array of numbers");
  Point p(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + " must contain numbers");
    p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return p;
}

std::vector<Point> to_points(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of points");
  std::vector<Point> out;
  for (const auto& e : j) out.push_back(to_point(e, what));
  return out;
}

std::vector<double> to_numbers(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(what + " must contain numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

TensorRank to_rank(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ConfigError(what + " must be [n_upper, n_lower]");
  TensorRank r{j[0].get<int>(), j[1].get<int>()};
  if (r.n_upper < 0 || r.n_lower < 0) throw ConfigError(what + " must be nonnegative");
  return r;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + what);
}

PresetSpec to_preset(const json& j, const std::string& what) {
  if (j.is_string()) return {j.get<std::string>(), {}};
  if (!j.is_object() || !j.contains("preset") || !j["preset"].is_string())
    throw ConfigError(what + " must be a preset name or {\"preset\": ..., \"params\": [...]}");
  check_keys(j, {"preset", "params"}, what);
  PresetSpec s{j["preset"].get<std::string>(), {}};
  if (j.contains("params")) s.params = to_numbers(j["params"], what + ".params");
  return s;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).string();
}

FieldSpec to_field(const json& j, const std::string& what, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError(what + " must be an object");
  check_keys(j, {"oracle", "params", "csv", "rank"}, what);
  FieldSpec s;
  if (j.contains("csv")) {
    if (j.contains("oracle")) throw ConfigError(what + " takes either oracle or csv");
    s.csv = resolve(j["csv"].get<std::string>(), base_dir);
    if (!j.contains("rank")) throw ConfigError(what + ".rank is required for csv fields");
    s.rank = to_rank(j["rank"], what + ".rank");
    return s;
  }
  if (!j.contains("oracle") || !j["oracle"].is_string()) throw ConfigError(what + ".oracle is required");
  s.oracle = j["oracle"].get<std::string>();
  if (j.contains("params")) s.params = to_numbers(j["params"], what + ".params");
  return s;
}

KernelSpec to_kernel(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("kernel must be an object");
  check_keys(j, {"family", "params", "csv", "rank_out", "rank_in"}, "kernel");
  KernelSpec s;
  if (j.contains("csv")) {
    if (j.contains("family")) throw ConfigError("kernel takes either family or csv");
    s.csv = resolve(j["csv"].get<std::string>(), base_dir);
    if (!j.contains("rank_out") || !j.contains("rank_in"))
      throw ConfigError("kernel.rank_out and kernel.rank_in are required for csv kernels");
    s.rank_out = to_rank(j["rank_out"], "kernel.rank_out");
    s.rank_in = to_rank(j["rank_in"], "kernel.rank_in");
    return s;
  }
  if (!j.contains("family") || !j["family"].is_string()) throw ConfigError("kernel.family is required");
  s.family = j["family"].get<std::string>();
  if (j.contains("params")) s.params = to_numbers(j["params"], "kernel.params");
  return s;
}

template <class T>
T get_as(const json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(what + " has the wrong type");
  }
}

// ---------------------------------------------------------------------------
// Report helpers

class ReportBuilder {
 public:
  explicit ReportBuilder(std::string check, double tolerance)
      : start_(std::chrono::steady_clock::now()) {
    report_.check = std::move(check);
    report_.tolerance = tolerance;
  }

  void add(const Point& coords, double abs_error, double scale) {
    report_.points.push_back({coords, abs_error});
    report_.max_abs_error = std::max(report_.max_abs_error, abs_error);
    if (abs_error > 0.0)
      report_.max_rel_error =
          std::max(report_.max_rel_error, abs_error / std::max(scale, std::numeric_limits<double>::min()));
  }

  void detail(const std::string& key, double value) { report_.details[key] = value; }

  CheckReport finish() {
    report_.passed = std::isfinite(report_.max_abs_error) && report_.max_abs_error <= report_.tolerance;
    report_.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return report_;
  }

 private:
  CheckReport report_;
  std::chrono::steady_clock::time_point start_;
};

double tolerance_for(const std::string& check, const ExperimentConfig& cfg, const Manifold& m) {
  const auto it = cfg.tolerances.find(check);
  return it != cfg.tolerances.end() ? it->second : default_tolerance(check, m);
}

std::vector<Point> evaluation_points(const ExperimentConfig& cfg) {
  if (cfg.sharing_mode == SharingMode::None || cfg.output_points.empty()) return {reference_point(cfg)};
  return cfg.output_points;
}

SharedKernel kernel_at(const ExperimentConfig& cfg, const Manifold& m, const SharedKernel& ref,
                       const Point& p) {
  if (cfg.sharing_mode == SharingMode::None) return ref;
  const Path path = sharing_path(m, ref.ref_point, p, cfg.sharing_mode, cfg.steps);
  return share_kernel(m, ref, path, cfg.steps);
}

// Uniform double in [0, 1) from a 64-bit engine, independent of the
// standard library's distribution implementation.
class Uniform {
 public:
  explicit Uniform(unsigned long long seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 rng_;
};

bool is_sphere(const Manifold& m) { return m.name() == "sphere" || m.name() == "scaled-sphere"; }

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

// Box in chart coordinates used to draw random points away from chart edges.
std::pair<Eigen::Vector2d, Eigen::Vector2d> sample_box(const Manifold& m) {
  if (is_sphere(m)) return {{0.4, -3.0}, {std::numbers::pi - 0.4, 3.0}};
  if (m.name() == "flat2d-polar") return {{0.5, -3.0}, {2.5, 3.0}};
  return {{-1.5, -1.5}, {1.5, 1.5}};
}

// ---------------------------------------------------------------------------
// Checks

CheckReport check_flat_reduction(const ExperimentConfig& cfg) {
  const Manifold m = build_manifold(cfg);
  if (m.name() != "flat2d-cartesian") throw ConfigError("flat-reduction runs on flat2d-cartesian");
  const TensorField f = build_field(cfg.field, m);
  const SharedKernel ref = build_kernel(cfg, m, reference_point(cfg));
  ReportBuilder rb("flat-reduction", tolerance_for("flat-reduction", cfg, m));

  for (const Point& p : evaluation_points(cfg)) {
    const SharedKernel k = kernel_at(cfg, m, ref, p);
    const TensorValue conv = convolve_at(m, k, f, cfg.steps);
    // Planar correlation on the same nodes: sample f(p + v) directly.
    std::vector<double> planar(conv.components.size(), 0.0);
    for (size_t i = 0; i < k.quad.size(); ++i) {
      const TensorValue fv = f.sample(Point(p + k.quad.nodes[i]));
      const auto term = contract_kernel(k.coeffs[i], k.rank_out, k.rank_in, fv);
      for (size_t c = 0; c < planar.size(); ++c) planar[c] += k.quad.weights[i] * term[c];
    }
    const TensorValue oracle(k.rank_out, p, planar);
    rb.add(p, conv.max_abs_difference(oracle), oracle.max_abs());
  }
  return rb.finish();
}

CheckReport check_gauge_equivariance(const ExperimentConfig& cfg) {
  if (!cfg.chart_transition) throw ConfigError("gauge-equivariance needs chart_transition");
  const Manifold ma = build_manifold(cfg);
  const ChartTransition ct = make_transition(cfg.chart_transition->name, cfg.chart_transition->params, ma.name());
  if (ct.source != ma.name())
    throw ConfigError("transition '" + ct.name + "' starts from '" + ct.source + "', not '" + ma.name() + "'");
  const Manifold mb = make_manifold(ct.target, ct.target == ma.name() ? cfg.manifold.params : std::vector<double>{});

  const TensorField fa = build_field(cfg.field, ma);
  const TensorField fb = transform_field(fa, ct);
  const SharedKernel ref = build_kernel(cfg, ma, reference_point(cfg));
  const auto it = cfg.tolerances.find("gauge-equivariance");
  const double tol = it != cfg.tolerances.end() ? it->second : (ma.flat() && mb.flat() ? 1e-6 : 1e-3);
  ReportBuilder rb("gauge-equivariance", tol);

  for (const Point& p : evaluation_points(cfg)) {
    const SharedKernel ka = kernel_at(cfg, ma, ref, p);
    const TensorValue out_a = convolve_at(ma, ka, fa, cfg.steps);
    const Matrix j = transition_jacobian(ct, p);
    const Point pb = transition_point(ct, p);
    const SharedKernel kb = map_kernel(ka, j, pb);
    const TensorValue out_b = convolve_at(mb, kb, fb, cfg.steps);
    TensorValue expected = push_tensor(out_a, j);
    expected.base = pb;
    rb.add(p, out_b.max_abs_difference(expected), expected.max_abs());
  }
  return rb.finish();
}

Path config_path(const ExperimentConfig& cfg, const Manifold& m, const std::vector<Point>& vertices,
                 const Point& start) {
  if (!vertices.empty()) return Path::polyline(vertices);
  if (cfg.output_points.empty()) throw ConfigError("need a path or an output point to move to");
  const SharingMode mode = cfg.sharing_mode == SharingMode::None ? SharingMode::ChartSegment : cfg.sharing_mode;
  return sharing_path(m, start, cfg.output_points.front(), mode, cfg.steps);
}

CheckReport check_weight_sharing(const ExperimentConfig& cfg) {
  const Manifold m = build_manifold(cfg);
  const Point x = reference_point(cfg);
  const TensorField f = build_field(cfg.field, m);
  const SharedKernel k = build_kernel(cfg, m, x);
  const Path path = config_path(cfg, m, cfg.path, x);
  ReportBuilder rb("weight-sharing", tolerance_for("weight-sharing", cfg, m));

  const TensorValue out_x = convolve_at(m, k, f, cfg.steps);
  const TensorValue expected = parallel_transport(m, path, out_x, cfg.steps);
  const SharedKernel moved = share_kernel(m, k, path, cfg.steps);
  const TransportedField tf = transported_localized_field(m, f, x, path, cfg.quadrature, cfg.steps);
  const TensorValue out_moved = convolve_at(m, moved, tf, cfg.steps);
  rb.add(path.end(), out_moved.max_abs_difference(expected), expected.max_abs());
  rb.detail("output_at_start_max_abs", out_x.max_abs());

  if (cfg.transported_field) {
    // The moved input given independently as an analytic field.
    const TensorField g = build_field(*cfg.transported_field, m);
    const TensorValue out_oracle = convolve_at(m, moved, g, cfg.steps);
    rb.add(path.end(), out_oracle.max_abs_difference(expected), expected.max_abs());
    double worst = 0.0;
    for (size_t i = 0; i < tf.points.size(); ++i)
      worst = std::max(worst, tf.point_values[i].max_abs_difference(g.sample(tf.points[i])));
    rb.detail("transported_input_vs_oracle", worst);
  }
  return rb.finish();
}

CheckReport check_holonomy(const ExperimentConfig& cfg) {
  const Manifold m = build_manifold(cfg);
  const LoopSpec loop = cfg.loop.value_or(LoopSpec{});
  const auto vertices = loop_vertices(loop, m);
  ReportBuilder rb("holonomy", tolerance_for("holonomy", cfg, m));

  const Path path = Path::polyline(vertices);
  const Matrix h = transport_matrix(m, path, cfg.steps);
  const double angle = rotation_angle(m, path.start(), h);
  const double predicted = predicted_holonomy_angle(loop, m);
  rb.add(path.start(), std::abs(wrap_angle(angle - predicted)), std::abs(predicted));
  rb.detail("angle", angle);
  rb.detail("predicted_angle", predicted);

  if (!cfg.path.empty() && !cfg.path2.empty()) {
    const Path p1 = Path::polyline(cfg.path), p2 = Path::polyline(cfg.path2);
    const SharedKernel k = build_kernel(cfg, m, p1.start());
    const TwoPathRelation rel = kernel_two_path_relation(m, k, p1, p2, cfg.steps);
    rb.add(p1.end(), rel.max_deviation, 1.0);
    rb.detail("two_path_holonomy_angle", rel.holonomy_angle);
  }
  return rb.finish();
}

CheckReport check_two_path_kernel(const ExperimentConfig& cfg) {
  const Manifold m = build_manifold(cfg);
  std::vector<Point> v1 = cfg.path, v2 = cfg.path2;
  if (v1.empty() || v2.empty()) {
    if (!is_sphere(m)) throw ConfigError("two-path-kernel needs path and path2");
    // Equator quarter versus a detour over the pole cap.
    const double e = kLoopPoleLatitude, q = std::numbers::pi / 2;
    v1 = {Eigen::Vector2d(q, 0.0), Eigen::Vector2d(q, q)};
    v2 = {Eigen::Vector2d(q, 0.0), Eigen::Vector2d(e, 0.0), Eigen::Vector2d(e, q), Eigen::Vector2d(q, q)};
  }
  const Path p1 = Path::polyline(v1), p2 = Path::polyline(v2);
  const SharedKernel k = build_kernel(cfg, m, p1.start());
  ReportBuilder rb("two-path-kernel", tolerance_for("two-path-kernel", cfg, m));
  const TwoPathRelation rel = kernel_two_path_relation(m, k, p1, p2, cfg.steps);
  rb.add(p1.end(), rel.max_deviation, 1.0);
  rb.detail("holonomy_angle", rel.holonomy_angle);
  return rb.finish();
}

CheckReport check_geodesic_accuracy(const ExperimentConfig& cfg) {
  const Manifold m = build_manifold(cfg);
  if (!is_sphere(m)) throw ConfigError("geodesic-accuracy compares against great circles; use a sphere preset");
  ReportBuilder rb("geodesic-accuracy", tolerance_for("geodesic-accuracy", cfg, m));
  Uniform rnd(cfg.seed);
  const double pi = std::numbers::pi;
  double worst_distance = 0.0;

  int accepted = 0;
  while (accepted < cfg.samples) {
    Point x(2);
    x << rnd(0.5, pi - 0.5), rnd(-pi, pi);
    const double beta = rnd(0.0, 2.0 * pi);
    const double s = rnd(0.05, pi / 2);
    const Eigen::Vector3d x0 = sphere_embed(x);
    const auto frame = sphere_tangent_frame(x);
    const Eigen::Vector3d t = std::cos(beta) * frame.col(0) + std::sin(beta) * frame.col(1) / std::sin(x[0]);
    // Keep the great circle clear of the chart poles.
    bool clear = true;
    for (int k = 0; k <= 64 && clear; ++k) {
      const double a = s * k / 64.0;
      const double z = std::cos(a) * x0[2] + std::sin(a) * t[2];
      clear = std::abs(z) < std::cos(0.3);
    }
    if (!clear) continue;
    ++accepted;

    Eigen::VectorXd v(2);
    v << s * std::cos(beta), s * std::sin(beta) / std::sin(x[0]);
    const Point end = exp_map(m, {x, v}, cfg.steps);
    const Point exact = sphere_chart(std::cos(s) * x0 + std::sin(s) * t);
    const double err = std::max(std::abs(end[0] - exact[0]), std::abs(wrap_angle(end[1] - exact[1])));
    rb.add(x, err, 1.0);
    worst_distance = std::max(worst_distance, std::abs(sphere_angle(x, end) - s));
  }
  rb.detail("max_distance_error", worst_distance);
  return rb.finish();
}

CheckReport check_transport_isometry(const ExperimentConfig& cfg) {
  const Manifold m = build_manifold(cfg);
  if (m.dim() != 2) throw ConfigError("transport-isometry draws 2-D paths");
  ReportBuilder rb("transport-isometry", tolerance_for("transport-isometry", cfg, m));
  Uniform rnd(cfg.seed);
  const auto [lo, hi] = sample_box(m);

  for (int n = 0; n < cfg.samples; ++n) {
    const int count = 3 + static_cast<int>(rnd() * 4.0);
    std::vector<Point> vertices;
    for (int k = 0; k < count; ++k) vertices.push_back(Eigen::Vector2d(rnd(lo[0], hi[0]), rnd(lo[1], hi[1])));
    const Path path = Path::polyline(vertices);
    Eigen::VectorXd u(2), w(2);
    u << rnd(-1.0, 1.0), rnd(-1.0, 1.0);
    w << rnd(-1.0, 1.0), rnd(-1.0, 1.0);
    const auto tu = parallel_transport(m, path, TensorValue::vector(u, path.start()), cfg.steps);
    const auto tw = parallel_transport(m, path, TensorValue::vector(w, path.start()), cfg.steps);
    const Eigen::Map<const Eigen::VectorXd> u1(tu.components.data(), 2), w1(tw.components.data(), 2);
    const double before_uw = metric_inner(m, path.start(), u, w);
    const double before_uu = metric_inner(m, path.start(), u, u);
    const double after_uw = metric_inner(m, path.end(), u1, w1);
    const double after_uu = metric_inner(m, path.end(), u1, u1);
    const double err = std::max(std::abs(after_uw - before_uw), std::abs(after_uu - before_uu));
    rb.add(path.start(), err, std::max(std::abs(before_uw), std::abs(before_uu)));
  }
  return rb.finish();
}

CheckReport check_locality_linearity(const ExperimentConfig& cfg) {
  const Manifold m = build_manifold(cfg);
  const Point x = reference_point(cfg);
  const TensorField f = build_field(cfg.field, m);
  FieldSpec second;
  if (cfg.field2) {
    second = *cfg.field2;
  } else if (f.rank() == TensorRank{0, 0}) {
    second = {"scalar-linear", {0.3, -0.7, 1.1}, "", {}};
  } else if (f.rank() == TensorRank{1, 0}) {
    second = {"vector-linear", {0.2, -0.5, 0.4, 0.1, 1.0, -0.3}, "", {}};
  } else {
    throw ConfigError("locality-linearity needs field2 for rank " + f.rank().str());
  }
  const TensorField h = build_field(second, m);
  if (!(h.rank() == f.rank())) throw ConfigError("field2 rank differs from field rank");
  const SharedKernel k = build_kernel(cfg, m, x);
  ReportBuilder rb("locality-linearity", tolerance_for("locality-linearity", cfg, m));

  const double alpha = 0.7, beta = -1.3;
  const TensorField combo = TensorField::oracle(f.rank(), f.dim(), f.chart(), [f, h, alpha, beta](const Point& y) {
    auto a = f.sample(y).components;
    const auto b = h.sample(y).components;
    for (size_t i = 0; i < a.size(); ++i) a[i] = alpha * a[i] + beta * b[i];
    return a;
  }, [f, h](const Point& y) { return f.contains(y) && h.contains(y); });
  const TensorValue cf = convolve_at(m, k, f, cfg.steps);
  const TensorValue ch = convolve_at(m, k, h, cfg.steps);
  const TensorValue cc = convolve_at(m, k, combo, cfg.steps);
  std::vector<double> lin(cf.components.size());
  for (size_t i = 0; i < lin.size(); ++i) lin[i] = alpha * cf.components[i] + beta * ch.components[i];
  const TensorValue linear(cf.rank, x, lin);
  const double lin_err = cc.max_abs_difference(linear);
  rb.add(x, lin_err, linear.max_abs());
  rb.detail("linearity_residual", lin_err);

  // Perturb the input strictly outside the chart disc that holds every
  // sampled geodesic endpoint.
  double reach = 0.0;
  for (size_t i = 0; i < k.quad.size(); ++i)
    reach = std::max(reach, (exp_map(m, k.quad.node(i), cfg.steps) - x).norm());
  const double cutoff = 1.01 * reach;
  const TensorField perturbed = TensorField::oracle(f.rank(), f.dim(), f.chart(), [f, x, cutoff](const Point& y) {
    auto a = f.sample(y).components;
    if ((y - x).norm() > cutoff)
      for (auto& c : a) c += 1.0 + y.squaredNorm();
    return a;
  }, [f](const Point& y) { return f.contains(y); });
  const TensorValue cp = convolve_at(m, k, perturbed, cfg.steps);
  const double loc_err = cp.max_abs_difference(cf);
  rb.add(x, loc_err, cf.max_abs());
  rb.detail("locality_difference", loc_err);
  return rb.finish();
}

CheckReport check_multiplicities(const ExperimentConfig& cfg) {
  if (cfg.max_power < 0 || cfg.max_power > kMaxTensorPower)
    throw ConfigError("max_power must lie in [0, " + std::to_string(kMaxTensorPower) + "]");
  ReportBuilder rb("multiplicities", cfg.tolerances.count("multiplicities") ? cfg.tolerances.at("multiplicities") : 0.0);
  double worst_raw = 0.0;
  for (int n = 0; n <= cfg.max_power; ++n) {
    const MultiplicityTable t = so3_tensor_multiplicities(n);
    double err = 0.0;
    std::uint64_t dim = 0, expected_dim = 1;
    for (int i = 0; i < n; ++i) expected_dim *= 3;
    for (int j = 0; j <= n + 1; ++j) {
      const double raw = so3_character_multiplicity(n, j);
      worst_raw = std::max(worst_raw, std::abs(raw - std::round(raw)));
      err = std::max(err, std::abs(static_cast<double>(t.at(j)) - std::round(raw)));
      dim += static_cast<std::uint64_t>(2 * j + 1) * t.at(j);
    }
    if (t.at(n) != 1) err = std::max(err, std::abs(static_cast<double>(t.at(n)) - 1.0));
    if (dim != expected_dim) err = std::max(err, std::abs(static_cast<double>(dim) - static_cast<double>(expected_dim)));
    Point coords(1);
    coords << n;
    rb.add(coords, err, 1.0);
  }
  rb.detail("max_character_rounding", worst_raw);
  return rb.finish();
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j,
             {"description", "manifold", "chart_transition", "field", "field2", "transported_field", "kernel",
              "quadrature", "integrator", "sharing_mode", "reference_point", "output_points", "path", "path2",
              "loop", "tolerances", "samples", "seed", "max_power"},
             "config");

  ExperimentConfig cfg;
  if (j.contains("manifold")) cfg.manifold = to_preset(j["manifold"], "manifold");
  if (j.contains("chart_transition")) cfg.chart_transition = to_preset(j["chart_transition"], "chart_transition");
  if (j.contains("field")) cfg.field = to_field(j["field"], "field", base_dir);
  if (j.contains("field2")) cfg.field2 = to_field(j["field2"], "field2", base_dir);
  if (j.contains("transported_field"))
    cfg.transported_field = to_field(j["transported_field"], "transported_field", base_dir);
  if (j.contains("kernel")) cfg.kernel = to_kernel(j["kernel"], base_dir);
  if (j.contains("quadrature")) {
    const auto& q = j["quadrature"];
    check_keys(q, {"radius", "n_r", "n_ang"}, "quadrature");
    if (q.contains("radius")) cfg.quadrature.radius = get_as<double>(q["radius"], "quadrature.radius");
    if (q.contains("n_r")) cfg.quadrature.n_radial = get_as<int>(q["n_r"], "quadrature.n_r");
    if (q.contains("n_ang")) cfg.quadrature.n_angular = get_as<int>(q["n_ang"], "quadrature.n_ang");
    if (!(cfg.quadrature.radius > 0.0) || cfg.quadrature.n_radial <= 0 || cfg.quadrature.n_angular <= 0)
      throw ConfigError("quadrature radius and resolutions must be positive");
  }
  if (j.contains("integrator")) {
    check_keys(j["integrator"], {"steps"}, "integrator");
    if (j["integrator"].contains("steps")) cfg.steps = get_as<int>(j["integrator"]["steps"], "integrator.steps");
    if (cfg.steps <= 0) throw ConfigError("integrator.steps must be positive");
  }
  if (j.contains("sharing_mode")) cfg.sharing_mode = parse_sharing_mode(get_as<std::string>(j["sharing_mode"], "sharing_mode"));
  if (j.contains("reference_point")) cfg.reference_point = to_point(j["reference_point"], "reference_point");
  if (j.contains("output_points")) cfg.output_points = to_points(j["output_points"], "output_points");
  if (j.contains("path")) cfg.path = to_points(j["path"], "path");
  if (j.contains("path2")) cfg.path2 = to_points(j["path2"], "path2");
  if (j.contains("loop")) {
    const auto& l = j["loop"];
    check_keys(l, {"shape", "alpha", "points", "expected_angle"}, "loop");
    LoopSpec loop;
    if (l.contains("shape")) loop.shape = get_as<std::string>(l["shape"], "loop.shape");
    if (l.contains("alpha")) loop.alpha = get_as<double>(l["alpha"], "loop.alpha");
    if (l.contains("points")) loop.points = to_points(l["points"], "loop.points");
    if (l.contains("expected_angle")) loop.expected_angle = get_as<double>(l["expected_angle"], "loop.expected_angle");
    cfg.loop = loop;
  }
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigError("tolerances must be an object");
    const auto names = check_names();
    for (const auto& [name, value] : j["tolerances"].items()) {
      if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("tolerance for unknown check '" + name + "'");
      const double t = get_as<double>(value, "tolerances." + name);
      if (!(t > 0.0)) throw ConfigError("tolerance for '" + name + "' must be positive");
      cfg.tolerances[name] = t;
    }
  }
  if (j.contains("samples")) cfg.samples = get_as<int>(j["samples"], "samples");
  if (j.contains("seed")) cfg.seed = get_as<unsigned long long>(j["seed"], "seed");
  if (j.contains("max_power")) cfg.max_power = get_as<int>(j["max_power"], "max_power");
  if (cfg.samples <= 0) throw ConfigError("samples must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::vector<std::string> check_names() {
  return {"flat-reduction",     "gauge-equivariance", "weight-sharing",
          "holonomy",           "two-path-kernel",    "geodesic-accuracy",
          "transport-isometry", "locality-linearity", "multiplicities"};
}

double default_tolerance(const std::string& check, const Manifold& m) {
  const bool flat = m.flat();
  if (check == "flat-reduction") return 1e-10;
  if (check == "gauge-equivariance") return flat ? 1e-6 : 1e-3;
  if (check == "weight-sharing" || check == "holonomy" || check == "two-path-kernel") return flat ? 1e-10 : 1e-4;
  if (check == "geodesic-accuracy" || check == "transport-isometry") return 1e-8;
  if (check == "locality-linearity") return 1e-12;
  if (check == "multiplicities") return 0.0;
  throw ConfigError("unknown check '" + check + "'");
}

CheckReport run_check(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "flat-reduction") return check_flat_reduction(cfg);
  if (name == "gauge-equivariance") return check_gauge_equivariance(cfg);
  if (name == "weight-sharing") return check_weight_sharing(cfg);
  if (name == "holonomy") return check_holonomy(cfg);
  if (name == "two-path-kernel") return check_two_path_kernel(cfg);
  if (name == "geodesic-accuracy") return check_geodesic_accuracy(cfg);
  if (name == "transport-isometry") return check_transport_isometry(cfg);
  if (name == "locality-linearity") return check_locality_linearity(cfg);
  if (name == "multiplicities") return check_multiplicities(cfg);
  throw ConfigError("unknown check '" + name + "'");
}

std::string report_to_json(const CheckReport& r, int indent) {
  json j;
  j["check"] = r.check;
  j["status"] = r.passed ? "pass" : "fail";
  j["max_abs_error"] = r.max_abs_error;
  j["max_rel_error"] = r.max_rel_error;
  j["tolerance"] = r.tolerance;
  j["points"] = json::array();
  for (const auto& p : r.points)
    j["points"].push_back({{"coords", std::vector<double>(p.coords.data(), p.coords.data() + p.coords.size())},
                           {"error", p.error}});
  j["details"] = json::object();
  for (const auto& [k, v] : r.details) j["details"][k] = v;
  j["wall_time_s"] = r.wall_time_s;
  return j.dump(indent);
}

Manifold build_manifold(const ExperimentConfig& cfg) {
  return make_manifold(cfg.manifold.name, cfg.manifold.params);
}

TensorField build_field(const FieldSpec& spec, const Manifold& m) {
  if (!spec.csv.empty()) return read_grid_csv(spec.csv, spec.rank, m.name());
  return make_field_oracle(spec.oracle, spec.params, m);
}

SharedKernel build_kernel(const ExperimentConfig& cfg, const Manifold& m, const Point& x) {
  if (!cfg.kernel.csv.empty())
    return read_kernel_csv(cfg.kernel.csv, cfg.kernel.rank_out, cfg.kernel.rank_in, m, x, cfg.quadrature);
  return make_kernel(cfg.kernel.family, cfg.kernel.params, m, x, cfg.quadrature);
}

Point reference_point(const ExperimentConfig& cfg) {
  if (cfg.reference_point) return *cfg.reference_point;
  if (!cfg.output_points.empty()) return cfg.output_points.front();
  throw ConfigError("config needs reference_point or output_points");
}

std::vector<TensorValue> run_convolution(const ExperimentConfig& cfg) {
  const Manifold m = build_manifold(cfg);
  const TensorField f = build_field(cfg.field, m);
  ConvolutionSpec spec{m, build_kernel(cfg, m, reference_point(cfg)), cfg.sharing_mode, cfg.output_points, cfg.steps};
  return convolve_field(spec, f);
}

std::string convolution_to_json(const std::vector<TensorValue>& outputs, int indent) {
  json j;
  j["outputs"] = json::array();
  for (const auto& o : outputs)
    j["outputs"].push_back({{"coords", std::vector<double>(o.base.data(), o.base.data() + o.base.size())},
                            {"rank", {o.rank.n_upper, o.rank.n_lower}},
                            {"components", o.components}});
  return j.dump(indent);
}

void write_output_csv(const std::string& path, const std::vector<TensorValue>& outputs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write output CSV '" + path + "'");
  out.precision(17);
  if (outputs.empty()) return;
  const int d = outputs.front().dim();
  for (int i = 1; i <= d; ++i) out << (i > 1 ? "," : "") << "coord" << i;
  for (const auto& l : multi_index_labels("out", d, outputs.front().rank.slots())) out << ',' << l;
  out << '\n';
  for (const auto& o : outputs) {
    for (int i = 0; i < d; ++i) out << (i ? "," : "") << o.base[i];
    for (double c : o.components) out << ',' << c;
    out << '\n';
  }
}

std::vector<Point> loop_vertices(const LoopSpec& loop, const Manifold& m) {
  std::vector<Point> v;
  if (loop.shape == "polyline") {
    if (loop.points.size() < 3) throw ConfigError("polyline loop needs at least three points");
    v = loop.points;
    if ((v.front() - v.back()).norm() > 0.0) v.push_back(v.front());
  } else {
    if (!is_sphere(m)) throw ConfigError("loop shape '" + loop.shape + "' needs a sphere preset");
    const double e = kLoopPoleLatitude, q = std::numbers::pi / 2, pi = std::numbers::pi;
    auto pt = [](double th, double ph) -> Point { return Eigen::Vector2d(th, ph); };
    if (loop.shape == "octant") {
      v = {pt(q, 0), pt(q, q), pt(e, q), pt(e, 0), pt(q, 0)};
    } else if (loop.shape == "triangle") {
      if (!(loop.alpha > 0.0 && loop.alpha < 2 * pi)) throw ConfigError("triangle loop needs alpha in (0, 2 pi)");
      v = {pt(q, 0), pt(q, loop.alpha), pt(e, loop.alpha), pt(e, 0), pt(q, 0)};
    } else if (loop.shape == "lune") {
      if (!(loop.alpha > 0.0 && loop.alpha < pi)) throw ConfigError("lune loop needs alpha in (0, pi)");
      v = {pt(q, 0), pt(pi - e, 0), pt(pi - e, loop.alpha), pt(e, loop.alpha), pt(e, 0), pt(q, 0)};
    } else {
      throw ConfigError("unknown loop shape '" + loop.shape + "'");
    }
  }
  for (const auto& p : v)
    if (!m.contains(p)) throw ConfigError("loop vertex outside chart '" + m.name() + "'");
  return v;
}

double predicted_holonomy_angle(const LoopSpec& loop, const Manifold& m) {
  if (loop.expected_angle) return *loop.expected_angle;
  if (loop.shape == "polyline") {
    if (m.flat()) return 0.0;
    throw ConfigError("polyline loops on curved presets need expected_angle");
  }
  // Enclosed area times curvature. The caps stop at theta = eps, so each
  // shape encloses a band of the sphere.
  const double c = std::cos(kLoopPoleLatitude);
  if (loop.shape == "octant") return std::numbers::pi / 2 * c;
  if (loop.shape == "triangle") return loop.alpha * c;
  if (loop.shape == "lune") return 2.0 * loop.alpha * c;
  throw ConfigError("unknown loop shape '" + loop.shape + "'");
}

}  // namespace covconv
