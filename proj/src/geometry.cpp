#include "covconv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace covconv {

namespace {

std::string format_point(const Point& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// Largest step allowed by the local rate of the connection form. sqrt|A^2| is
// a cheap bound on the spectral radius that ignores the coordinate skew of
// rotation-like connection forms near chart singularities.
constexpr double kRateStepFactor = 0.005;

double connection_rate(const Matrix& a) { return std::sqrt((a * a).norm()); }

}  // namespace

Matrix Christoffel::contract(const Eigen::VectorXd& velocity) const {
  Matrix a = Matrix::Zero(dim_, dim_);
  for (int l = 0; l < dim_; ++l)
    for (int m = 0; m < dim_; ++m) {
      const double um = velocity[m];
      if (um == 0.0) continue;
      for (int s = 0; s < dim_; ++s) a(l, s) += (*this)(l, m, s) * um;
    }
  return a;
}

Manifold::Manifold(std::string name, int dim, MetricFn metric, DomainFn domain,
                   ChristoffelFn christoffel, DistanceFn distance, bool flat)
    : name_(std::move(name)),
      dim_(dim),
      metric_(std::move(metric)),
      domain_(std::move(domain)),
      christoffel_(std::move(christoffel)),
      distance_(std::move(distance)),
      flat_(flat) {
  if (dim_ <= 0) throw InvalidArgument("manifold dimension must be positive");
  if (!metric_) throw InvalidArgument("manifold needs a metric function");
}

bool Manifold::contains(const Point& x) const {
  if (x.size() != dim_ || !x.allFinite()) return false;
  return !domain_ || domain_(x);
}

void Manifold::require(const Point& x, const char* what) const {
  if (x.size() != dim_)
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(dim_) +
                          " coordinates, got " + std::to_string(x.size()));
  if (!contains(x))
    throw DomainError(std::string(what) + ": point " + format_point(x) + " outside chart '" +
                      name_ + "'");
}

Christoffel Manifold::raw_christoffel(const Point& x) const {
  if (christoffel_) return christoffel_(x);
  return finite_difference_christoffel(*this, x);
}

double Manifold::distance(const Point& a, const Point& b) const {
  if (!distance_) throw ConfigError("manifold '" + name_ + "' has no closed-form distance");
  return distance_(a, b);
}

Matrix metric_at(const Manifold& m, const Point& x) {
  m.require(x, "metric_at");
  Matrix g = m.raw_metric(x);
  if (g.rows() != m.dim() || g.cols() != m.dim() || !g.allFinite())
    throw NumericalError("metric at " + format_point(x) + " is malformed");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NumericalError("metric at " + format_point(x) + " is not symmetric");
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success)
    throw NumericalError("metric at " + format_point(x) + " is not positive definite");
  return g;
}

double volume_density(const Manifold& m, const Point& x) {
  return std::sqrt(std::abs(metric_at(m, x).determinant()));
}

Christoffel christoffel_at(const Manifold& m, const Point& x) {
  m.require(x, "christoffel_at");
  return m.raw_christoffel(x);
}

Christoffel finite_difference_christoffel(const Manifold& m, const Point& x) {
  const int d = m.dim();
  m.require(x, "finite_difference_christoffel");

  // dg[s](mu, nu) = d_s g_{mu nu}
  std::vector<Matrix> dg(static_cast<size_t>(d));
  for (int s = 0; s < d; ++s) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[s]));
    Point xp = x, xm = x;
    xp[s] += h;
    xm[s] -= h;
    if (!m.contains(xp) || !m.contains(xm))
      throw DomainError("point " + format_point(x) +
                        " too close to the chart boundary for the difference stencil");
    dg[static_cast<size_t>(s)] = (m.raw_metric(xp) - m.raw_metric(xm)) / (xp[s] - xm[s]);
  }

  const Matrix g = m.raw_metric(x);
  Eigen::FullPivLU<Matrix> lu(g);
  if (!lu.isInvertible()) throw NumericalError("singular metric at " + format_point(x));
  const Matrix ginv = lu.inverse();

  Christoffel gamma(d);
  for (int l = 0; l < d; ++l)
    for (int mu = 0; mu < d; ++mu)
      for (int nu = mu; nu < d; ++nu) {
        double acc = 0.0;
        for (int s = 0; s < d; ++s)
          acc += ginv(l, s) * (dg[static_cast<size_t>(mu)](s, nu) +
                               dg[static_cast<size_t>(nu)](s, mu) -
                               dg[static_cast<size_t>(s)](mu, nu));
        gamma(l, mu, nu) = 0.5 * acc;
        gamma(l, nu, mu) = 0.5 * acc;
      }
  return gamma;
}

double metric_inner(const Manifold& m, const Point& x, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& w) {
  return u.dot(metric_at(m, x) * w);
}

double metric_norm(const Manifold& m, const TangentVector& v) {
  const double n2 = metric_inner(m, v.base, v.components, v.components);
  if (!std::isfinite(n2)) throw NumericalError("non-finite tangent vector norm");
  return std::sqrt(std::max(0.0, n2));
}

// ---------------------------------------------------------------------------
// Path

Path::Path(std::vector<Point> samples, std::vector<double> params,
           std::vector<Eigen::VectorXd> velocities)
    : samples_(std::move(samples)), params_(std::move(params)), velocities_(std::move(velocities)) {
  if (samples_.size() < 2) throw InvalidArgument("a path needs at least two samples");
  if (params_.size() != samples_.size()) throw InvalidArgument("path params/samples size mismatch");
  if (!velocities_.empty() && velocities_.size() != samples_.size())
    throw InvalidArgument("path velocities/samples size mismatch");
  if (params_.front() != 0.0 || params_.back() != 1.0)
    throw InvalidArgument("path parameters must run from 0 to 1");
  for (size_t i = 1; i < params_.size(); ++i)
    if (!(params_[i] > params_[i - 1]))
      throw InvalidArgument("path parameters must be strictly increasing");
  const auto d = samples_.front().size();
  for (const auto& s : samples_)
    if (s.size() != d || !s.allFinite()) throw InvalidArgument("malformed path sample");
}

Path Path::segment(const Point& a, const Point& b, int n_samples) {
  if (n_samples < 2) throw InvalidArgument("segment needs at least two samples");
  if (a.size() != b.size()) throw InvalidArgument("segment endpoints differ in dimension");
  std::vector<Point> samples;
  std::vector<double> params;
  for (int k = 0; k < n_samples; ++k) {
    const double t = static_cast<double>(k) / (n_samples - 1);
    samples.push_back(k == n_samples - 1 ? b : Point(a + t * (b - a)));
    params.push_back(t);
  }
  params.back() = 1.0;
  return Path(std::move(samples), std::move(params));
}

Path Path::polyline(const std::vector<Point>& vertices) {
  if (vertices.size() < 2) throw InvalidArgument("polyline needs at least two vertices");
  std::vector<Point> kept{vertices.front()};
  for (size_t i = 1; i < vertices.size(); ++i)
    if ((vertices[i] - kept.back()).norm() > 0.0) kept.push_back(vertices[i]);
  if (kept.size() < 2) return segment(vertices.front(), vertices.front(), 2);

  std::vector<double> cumulative{0.0};
  for (size_t i = 1; i < kept.size(); ++i)
    cumulative.push_back(cumulative.back() + (kept[i] - kept[i - 1]).norm());
  const double total = cumulative.back();
  for (auto& c : cumulative) c /= total;
  cumulative.back() = 1.0;
  return Path(std::move(kept), std::move(cumulative));
}

double Path::chart_length() const {
  double total = 0.0;
  for (size_t i = 1; i < samples_.size(); ++i) total += (samples_[i] - samples_[i - 1]).norm();
  return total;
}

Path Path::reversed() const {
  std::vector<Point> samples(samples_.rbegin(), samples_.rend());
  std::vector<double> params;
  params.reserve(params_.size());
  for (auto it = params_.rbegin(); it != params_.rend(); ++it) params.push_back(1.0 - *it);
  params.front() = 0.0;
  params.back() = 1.0;
  std::vector<Eigen::VectorXd> velocities;
  for (auto it = velocities_.rbegin(); it != velocities_.rend(); ++it)
    velocities.push_back(-*it);
  return Path(std::move(samples), std::move(params), std::move(velocities));
}

Path Path::then(const Path& next) const {
  if (next.dim() != dim()) throw InvalidArgument("concatenating paths of different dimension");
  if ((next.start() - end()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, end().cwiseAbs().maxCoeff()))
    throw InvalidArgument("concatenated path does not start where this one ends");

  const double la = chart_length(), lb = next.chart_length();
  const double split = (la + lb > 0.0) ? la / (la + lb) : 0.5;
  // Degenerate pieces still need a nonzero share of the parameter range.
  const double cut = std::clamp(split, 1e-6, 1.0 - 1e-6);

  std::vector<Point> samples(samples_);
  std::vector<double> params;
  for (double t : params_) params.push_back(cut * t);
  for (size_t i = 1; i < next.samples_.size(); ++i) {
    samples.push_back(next.samples_[i]);
    params.push_back(cut + (1.0 - cut) * next.params_[i]);
  }
  params.back() = 1.0;
  return Path(std::move(samples), std::move(params));
}

// ---------------------------------------------------------------------------
// Geodesics

namespace {

struct GeodesicState {
  Point x;
  Eigen::VectorXd u;
  Matrix p;  // empty when transport is not tracked
};

class GeodesicStepper {
 public:
  GeodesicStepper(const Manifold& m, bool track_transport) : m_(m), track_(track_transport) {}

  // One RK4 step of size h. Throws DomainExitError with `last` if a stage
  // point leaves the chart.
  GeodesicState step(const GeodesicState& s, double h, double t) const {
    const auto k1 = rhs(s, s, t);
    const auto k2 = rhs(s, advance(s, k1, 0.5 * h), t);
    const auto k3 = rhs(s, advance(s, k2, 0.5 * h), t);
    const auto k4 = rhs(s, advance(s, k3, h), t);
    GeodesicState out;
    out.x = s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    out.u = s.u + (h / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    if (track_) out.p = s.p + (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    return out;
  }

 private:
  GeodesicState advance(const GeodesicState& s, const GeodesicState& k, double h) const {
    GeodesicState out;
    out.x = s.x + h * k.x;
    out.u = s.u + h * k.u;
    if (track_) out.p = s.p + h * k.p;
    return out;
  }

  GeodesicState rhs(const GeodesicState& last, const GeodesicState& s, double t) const {
    if (!m_.contains(s.x))
      throw DomainExitError("geodesic leaves chart '" + m_.name() + "' after t = " +
                                std::to_string(t) + " at " + format_point(last.x),
                            last.x, t);
    Christoffel gamma(m_.dim());
    try {
      gamma = m_.raw_christoffel(s.x);
    } catch (const DomainError& e) {
      throw DomainExitError(std::string("geodesic reaches chart boundary: ") + e.what(), last.x, t);
    }
    const Matrix a = gamma.contract(s.u);
    GeodesicState d;
    d.x = s.u;
    d.u = -a * s.u;
    if (track_) d.p = -a * s.p;
    return d;
  }

  const Manifold& m_;
  bool track_;
};

void check_start(const Manifold& m, const TangentVector& start, int n_steps) {
  if (n_steps <= 0) throw InvalidArgument("geodesic needs a positive step count");
  m.require(start.base, "geodesic start");
  if (start.components.size() != m.dim())
    throw InvalidArgument("initial velocity has wrong dimension");
  if (!start.components.allFinite()) throw NumericalError("non-finite initial velocity");
}

}  // namespace

Path geodesic_integrate(const Manifold& m, const TangentVector& start, int n_steps) {
  check_start(m, start, n_steps);
  GeodesicStepper stepper(m, false);
  const double h = 1.0 / n_steps;

  std::vector<Point> samples{start.base};
  std::vector<double> params{0.0};
  std::vector<Eigen::VectorXd> velocities{start.components};
  GeodesicState s{start.base, start.components, {}};
  for (int k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) / n_steps;
    s = stepper.step(s, h, t);
    if (!m.contains(s.x))
      throw DomainExitError("geodesic leaves chart '" + m.name() + "' before t = " +
                                std::to_string(t + h),
                            samples.back(), t);
    samples.push_back(s.x);
    params.push_back(k + 1 == n_steps ? 1.0 : static_cast<double>(k + 1) / n_steps);
    velocities.push_back(s.u);
  }
  return Path(std::move(samples), std::move(params), std::move(velocities));
}

Point exp_map(const Manifold& m, const TangentVector& v, int n_steps) {
  if (v.components.size() == m.dim() && v.components.isZero(0.0)) {
    m.require(v.base, "exp_map");
    return v.base;
  }
  return geodesic_integrate(m, v, n_steps).end();
}

GeodesicFlow geodesic_flow(const Manifold& m, const TangentVector& start, int n_steps) {
  check_start(m, start, n_steps);
  const int d = m.dim();
  if (start.components.isZero(0.0)) return {start.base, start.components, Matrix::Identity(d, d)};

  GeodesicStepper stepper(m, true);
  const double h = 1.0 / n_steps;
  GeodesicState s{start.base, start.components, Matrix::Identity(d, d)};
  for (int k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) / n_steps;
    Point before = s.x;
    s = stepper.step(s, h, t);
    if (!m.contains(s.x))
      throw DomainExitError("geodesic leaves chart '" + m.name() + "'", before, t);
  }
  return {s.x, s.u, s.p};
}

TangentVector log_map(const Manifold& m, const Point& x, const Point& target,
                      const LogMapOptions& options) {
  m.require(x, "log_map base");
  m.require(target, "log_map target");
  const int d = m.dim();
  Eigen::VectorXd v = target - x;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd residual = exp_map(m, {x, v}, options.n_steps) - target;
    if (residual.norm() < options.tolerance) return {x, v};

    Matrix jac(d, d);
    const double h = 1e-6 * std::max(1.0, v.norm());
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd vp = v, vm = v;
      vp[j] += h;
      vm[j] -= h;
      jac.col(j) = (exp_map(m, {x, vp}, options.n_steps) - exp_map(m, {x, vm}, options.n_steps)) /
                   (2.0 * h);
    }
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) throw NumericalError("log_map: singular exp_map differential");
    v -= lu.solve(residual);
  }
  throw NumericalError("log_map: shooting did not converge in " +
                       std::to_string(options.max_iterations) + " iterations");
}

// ---------------------------------------------------------------------------
// Parallel transport along polylines

namespace {

// Integrates the linear system dY/dt = F(A(t), Y) along each chart segment,
// where A(t) is the connection form contracted with the segment velocity.
template <class State, class Rhs>
State integrate_along(const Manifold& m, const Path& path, State y, int steps_per_unit, Rhs rhs) {
  if (steps_per_unit <= 0) throw InvalidArgument("transport needs a positive step count");
  if (path.dim() != m.dim()) throw InvalidArgument("path dimension does not match manifold");
  for (const auto& s : path.samples()) m.require(s, "transport path sample");

  const double h_max = 1.0 / steps_per_unit;
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    const Point& x0 = path.samples()[k];
    const Point& x1 = path.samples()[k + 1];
    const double t0 = path.params()[k];
    const double dt = path.params()[k + 1] - t0;
    const Eigen::VectorXd xdot = (x1 - x0) / dt;
    if (xdot.isZero(0.0)) continue;

    auto form = [&](double tau) {
      const Point x = x0 + tau * xdot;
      if (!m.contains(x))
        throw DomainExitError("transport path leaves chart '" + m.name() + "'", x0, t0);
      return m.raw_christoffel(x).contract(xdot);
    };

    double tau = 0.0;
    while (tau < dt) {
      const Matrix a0 = form(tau);
      double h = std::min(h_max, dt - tau);
      const double rate = connection_rate(a0);
      if (rate * h > kRateStepFactor) h = kRateStepFactor / rate;
      // Avoid a sliver step at the end of the segment.
      const bool last = dt - tau - h < 1e-3 * h;
      if (last) h = dt - tau;

      const Matrix am = form(tau + 0.5 * h);
      const Matrix a1 = form(tau + h);
      const State k1 = rhs(a0, y);
      const State k2 = rhs(am, State(y + (0.5 * h) * k1));
      const State k3 = rhs(am, State(y + (0.5 * h) * k2));
      const State k4 = rhs(a1, State(y + h * k3));
      y = State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      tau = last ? dt : tau + h;
    }
  }
  return y;
}

}  // namespace

Matrix transport_matrix(const Manifold& m, const Path& path, int steps_per_unit) {
  const int d = m.dim();
  return integrate_along<Matrix>(m, path, Matrix::Identity(d, d), steps_per_unit,
                                 [](const Matrix& a, const Matrix& p) -> Matrix { return -a * p; });
}

TensorValue parallel_transport(const Manifold& m, const Path& path, const TensorValue& t,
                               int steps_per_unit) {
  const int d = m.dim();
  if (t.dim() != d) throw InvalidArgument("tensor dimension does not match manifold");
  if ((t.base - path.start()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, t.base.cwiseAbs().maxCoeff()))
    throw InvalidArgument("tensor is not based at the path start");

  const int slots = t.rank.slots();
  const int upper = t.rank.n_upper;
  using Vec = Eigen::VectorXd;
  Vec y = Eigen::Map<const Vec>(t.components.data(), static_cast<Eigen::Index>(t.components.size()));
  if (slots > 0) {
    y = integrate_along<Vec>(m, path, y, steps_per_unit, [&](const Matrix& a, const Vec& c) -> Vec {
      std::vector<double> in(c.data(), c.data() + c.size());
      Vec out = Vec::Zero(c.size());
      for (int s = 0; s < slots; ++s) {
        const bool up = s < upper;
        const auto term = apply_to_slot(in, d, slots, s, up ? Matrix(a) : Matrix(a.transpose()));
        const Eigen::Map<const Vec> tv(term.data(), static_cast<Eigen::Index>(term.size()));
        if (up) out -= tv;
        else out += tv;
      }
      return out;
    });
  } else {
    for (const auto& s : path.samples()) m.require(s, "transport path sample");
  }
  return TensorValue(t.rank, path.end(), std::vector<double>(y.data(), y.data() + y.size()));
}

// ---------------------------------------------------------------------------
// Chart transitions

Point transition_point(const ChartTransition& ct, const Point& x) {
  if (ct.overlap && !ct.overlap(x))
    throw DomainError("point " + format_point(x) + " outside the overlap of transition '" +
                      ct.name + "'");
  return ct.forward(x);
}

Matrix transition_jacobian(const ChartTransition& ct, const Point& x) {
  if (ct.overlap && !ct.overlap(x))
    throw DomainError("point " + format_point(x) + " outside the overlap of transition '" +
                      ct.name + "'");
  Matrix j = ct.jacobian(x);
  if (std::abs(j.determinant()) < 1e-14 * std::max(1.0, j.cwiseAbs().maxCoeff()))
    throw NumericalError("singular transition Jacobian at " + format_point(x));
  return j;
}

Point transition_inverse(const ChartTransition& ct, const Point& x_target) {
  if (!ct.inverse) throw ConfigError("transition '" + ct.name + "' has no inverse map");
  Point x = ct.inverse(x_target);
  if (ct.overlap && !ct.overlap(x))
    throw DomainError("point " + format_point(x_target) + " maps outside the overlap of '" +
                      ct.name + "'");
  return x;
}

Matrix finite_difference_jacobian(const ChartTransition& ct, const Point& x) {
  const auto d = x.size();
  const Point fx = ct.forward(x);
  Matrix j(fx.size(), d);
  for (Eigen::Index s = 0; s < d; ++s) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[s]));
    Point xp = x, xm = x;
    xp[s] += h;
    xm[s] -= h;
    j.col(s) = (ct.forward(xp) - ct.forward(xm)) / (xp[s] - xm[s]);
  }
  return j;
}

}  // namespace covconv
