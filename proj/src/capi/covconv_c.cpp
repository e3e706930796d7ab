#include "covconv/covconv.h"

#include <cstring>
#include <exception>
#include <string>

#include <json.hpp>

#include "covconv/harness.hpp"
#include "covconv/rep.hpp"

struct covconv_manifold {
  covconv::Manifold m;
};

struct covconv_path {
  covconv::Path p;
};

namespace {

thread_local std::string g_last_error;

covconv_status fail(covconv_status s, const char* what) {
  g_last_error = what;
  return s;
}

// Maps library exceptions onto status codes.
template <class F>
covconv_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return COVCONV_OK;
  } catch (const covconv::ConfigError& e) {
    return fail(COVCONV_CONFIG, e.what());
  } catch (const covconv::IoError& e) {
    return fail(COVCONV_IO, e.what());
  } catch (const covconv::DomainError& e) {
    return fail(COVCONV_DOMAIN, e.what());
  } catch (const covconv::NumericalError& e) {
    return fail(COVCONV_NUMERICAL, e.what());
  } catch (const covconv::InvalidArgument& e) {
    return fail(COVCONV_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(COVCONV_INTERNAL, e.what());
  } catch (...) {
    return fail(COVCONV_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) throw covconv::InvalidArgument(std::string(what) + " is null");
}

covconv::Point point(const double* x, int d) {
  return Eigen::Map<const Eigen::VectorXd>(x, d);
}

}  // namespace

extern "C" {

const char* covconv_last_error(void) { return g_last_error.c_str(); }

const char* covconv_status_name(covconv_status status) {
  switch (status) {
    case COVCONV_OK: return "ok";
    case COVCONV_INVALID_ARGUMENT: return "invalid argument";
    case COVCONV_DOMAIN: return "domain error";
    case COVCONV_NUMERICAL: return "numerical error";
    case COVCONV_CONFIG: return "config error";
    case COVCONV_IO: return "io error";
    case COVCONV_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void covconv_string_free(char* s) { delete[] s; }

covconv_status covconv_manifold_create(const char* preset, const double* params, size_t n_params,
                                       covconv_manifold** out) {
  return guarded([&] {
    need(preset, "preset");
    need(out, "out");
    if (n_params) need(params, "params");
    std::vector<double> ps(params, params + n_params);
    try {
      *out = new covconv_manifold{covconv::make_manifold(preset, ps)};
    } catch (const covconv::ConfigError& e) {
      // Unknown presets are argument errors at this level.
      throw covconv::InvalidArgument(e.what());
    }
  });
}

void covconv_manifold_destroy(covconv_manifold* m) { delete m; }

covconv_status covconv_manifold_dim(const covconv_manifold* m, int* dim) {
  return guarded([&] {
    need(m, "manifold");
    need(dim, "dim");
    *dim = m->m.dim();
  });
}

covconv_status covconv_metric_at(const covconv_manifold* m, const double* x, double* g) {
  return guarded([&] {
    need(m, "manifold");
    need(x, "x");
    need(g, "g");
    const int d = m->m.dim();
    const covconv::Matrix mg = covconv::metric_at(m->m, point(x, d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g[i * d + j] = mg(i, j);
  });
}

covconv_status covconv_volume_density(const covconv_manifold* m, const double* x, double* out) {
  return guarded([&] {
    need(m, "manifold");
    need(x, "x");
    need(out, "out");
    *out = covconv::volume_density(m->m, point(x, m->m.dim()));
  });
}

covconv_status covconv_christoffel_at(const covconv_manifold* m, const double* x, double* gamma) {
  return guarded([&] {
    need(m, "manifold");
    need(x, "x");
    need(gamma, "gamma");
    const int d = m->m.dim();
    const covconv::Christoffel c = covconv::christoffel_at(m->m, point(x, d));
    for (int l = 0; l < d; ++l)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) gamma[(l * d + a) * d + b] = c(l, a, b);
  });
}

covconv_status covconv_exp_map(const covconv_manifold* m, const double* x, const double* v, int n_steps,
                               double* out) {
  return guarded([&] {
    need(m, "manifold");
    need(x, "x");
    need(v, "v");
    need(out, "out");
    const int d = m->m.dim();
    const covconv::Point y = covconv::exp_map(m->m, {point(x, d), point(v, d)}, n_steps);
    for (int i = 0; i < d; ++i) out[i] = y[i];
  });
}

covconv_status covconv_geodesic(const covconv_manifold* m, const double* x, const double* v, int n_steps,
                                covconv_path** out) {
  return guarded([&] {
    need(m, "manifold");
    need(x, "x");
    need(v, "v");
    need(out, "out");
    const int d = m->m.dim();
    *out = new covconv_path{covconv::geodesic_integrate(m->m, {point(x, d), point(v, d)}, n_steps)};
  });
}

covconv_status covconv_path_from_points(const double* points, size_t n_points, int dim, covconv_path** out) {
  return guarded([&] {
    need(points, "points");
    need(out, "out");
    if (dim <= 0) throw covconv::InvalidArgument("dim must be positive");
    std::vector<covconv::Point> vs;
    for (size_t i = 0; i < n_points; ++i) vs.push_back(point(points + i * static_cast<size_t>(dim), dim));
    *out = new covconv_path{covconv::Path::polyline(vs)};
  });
}

covconv_status covconv_path_size(const covconv_path* p, size_t* n_samples, int* dim) {
  return guarded([&] {
    need(p, "path");
    if (n_samples) *n_samples = p->p.size();
    if (dim) *dim = p->p.dim();
  });
}

covconv_status covconv_path_sample(const covconv_path* p, size_t i, double* out) {
  return guarded([&] {
    need(p, "path");
    need(out, "out");
    if (i >= p->p.size()) throw covconv::InvalidArgument("sample index out of range");
    const covconv::Point& s = p->p.samples()[i];
    for (Eigen::Index k = 0; k < s.size(); ++k) out[k] = s[k];
  });
}

void covconv_path_destroy(covconv_path* p) { delete p; }

covconv_status covconv_parallel_transport(const covconv_manifold* m, const covconv_path* p, int n_upper,
                                          int n_lower, const double* components, int steps_per_unit,
                                          double* out) {
  return guarded([&] {
    need(m, "manifold");
    need(p, "path");
    need(components, "components");
    need(out, "out");
    const covconv::TensorRank rank{n_upper, n_lower};
    if (n_upper < 0 || n_lower < 0) throw covconv::InvalidArgument("rank must be nonnegative");
    const size_t n = rank.component_count(m->m.dim());
    covconv::TensorValue t(rank, p->p.start(), std::vector<double>(components, components + n));
    const covconv::TensorValue r = covconv::parallel_transport(m->m, p->p, t, steps_per_unit);
    std::copy(r.components.begin(), r.components.end(), out);
  });
}

covconv_status covconv_run_check(const char* name, const char* config_json, const char* base_dir,
                                 char** report_json, int* passed) {
  return guarded([&] {
    need(name, "name");
    need(config_json, "config");
    need(report_json, "report");
    const auto cfg = covconv::parse_config(config_json, base_dir ? base_dir : "");
    const auto report = covconv::run_check(name, cfg);
    *report_json = dup_string(covconv::report_to_json(report));
    if (passed) *passed = report.passed ? 1 : 0;
  });
}

covconv_status covconv_convolve(const char* config_json, const char* base_dir, const char* csv_path,
                                char** outputs_json) {
  return guarded([&] {
    need(config_json, "config");
    need(outputs_json, "outputs");
    const auto cfg = covconv::parse_config(config_json, base_dir ? base_dir : "");
    const auto outputs = covconv::run_convolution(cfg);
    if (csv_path && *csv_path) covconv::write_output_csv(csv_path, outputs);
    *outputs_json = dup_string(covconv::convolution_to_json(outputs));
  });
}

covconv_status covconv_decompose(int n, char** json) {
  return guarded([&] {
    need(json, "json");
    const auto table = covconv::so3_tensor_multiplicities(n);
    nlohmann::ordered_json j;
    j["n"] = n;
    j["multiplicities"] = nlohmann::ordered_json::object();
    for (const auto& [spin, mult] : table.entries) j["multiplicities"][std::to_string(spin)] = mult;
    *json = dup_string(j.dump());
  });
}

}  // extern "C"
