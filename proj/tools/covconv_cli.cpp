// Command-line front end over the C API.
//
//   covconv geodesic  --manifold sphere --x 1.57,0 --v 0,1.57 [--steps 200] [--csv out.csv]
//   covconv transport --manifold sphere --path "1.57,0;1.57,1" --tensor 1,0 [--rank 1,0]
//   covconv convolve  --config cfg.json [--csv out.csv]
//   covconv check <name> --config cfg.json [--csv errors.csv]
//   covconv decompose --n 4
//
// Exit codes: 0 pass / success, 1 check failure or runtime error, 2 config
// or usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covconv/covconv.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("cannot parse " + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

// Maps a C API status onto an exit code; runtime failures are exit 1.
int status_exit(covconv_status s) {
  if (s == COVCONV_OK) return kExitPass;
  std::cerr << "covconv: " << covconv_status_name(s) << ": " << covconv_last_error() << '\n';
  return (s == COVCONV_CONFIG || s == COVCONV_INVALID_ARGUMENT) ? kExitConfig : kExitFail;
}

struct ManifoldHandle {
  covconv_manifold* m = nullptr;
  ~ManifoldHandle() { covconv_manifold_destroy(m); }
};
struct PathHandle {
  covconv_path* p = nullptr;
  ~PathHandle() { covconv_path_destroy(p); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string parent_dir(const std::string& path) { return std::filesystem::path(path).parent_path().string(); }

int emit_owned(char* s) {
  std::cout << s << '\n';
  covconv_string_free(s);
  return kExitPass;
}

struct GeodesicArgs {
  std::string manifold, params, x, v, csv;
  int steps = 200;
};

int run_geodesic(const GeodesicArgs& a) {
  ManifoldHandle mh;
  const auto params = a.params.empty() ? std::vector<double>{} : parse_numbers(a.params, "--params");
  if (int rc = status_exit(covconv_manifold_create(a.manifold.c_str(), params.data(), params.size(), &mh.m))) return rc;
  int d = 0;
  covconv_manifold_dim(mh.m, &d);
  const auto x = parse_numbers(a.x, "--x"), v = parse_numbers(a.v, "--v");
  if (static_cast<int>(x.size()) != d || static_cast<int>(v.size()) != d)
    throw UsageError("--x and --v need " + std::to_string(d) + " components");
  PathHandle ph;
  if (int rc = status_exit(covconv_geodesic(mh.m, x.data(), v.data(), a.steps, &ph.p))) return rc;

  size_t n = 0;
  covconv_path_size(ph.p, &n, &d);
  nlohmann::ordered_json j;
  j["manifold"] = a.manifold;
  j["steps"] = a.steps;
  j["samples"] = nlohmann::json::array();
  std::vector<double> s(static_cast<size_t>(d));
  std::ofstream csv;
  if (!a.csv.empty()) {
    csv.open(a.csv);
    if (!csv) throw std::runtime_error("cannot write '" + a.csv + "'");
    csv.precision(17);
    for (int i = 1; i <= d; ++i) csv << (i > 1 ? "," : "") << "coord" << i;
    csv << '\n';
  }
  for (size_t i = 0; i < n; ++i) {
    covconv_path_sample(ph.p, i, s.data());
    j["samples"].push_back(s);
    if (csv.is_open()) {
      for (int k = 0; k < d; ++k) csv << (k ? "," : "") << s[static_cast<size_t>(k)];
      csv << '\n';
    }
  }
  j["end"] = s;
  std::cout << j.dump(2) << '\n';
  return kExitPass;
}

struct TransportArgs {
  std::string manifold, params, path, tensor, rank = "1,0";
  int steps = 200;
};

int run_transport(const TransportArgs& a) {
  ManifoldHandle mh;
  const auto params = a.params.empty() ? std::vector<double>{} : parse_numbers(a.params, "--params");
  if (int rc = status_exit(covconv_manifold_create(a.manifold.c_str(), params.data(), params.size(), &mh.m))) return rc;
  int d = 0;
  covconv_manifold_dim(mh.m, &d);

  std::vector<double> flat;
  size_t n_points = 0;
  std::stringstream ss(a.path);
  std::string vertex;
  while (std::getline(ss, vertex, ';')) {
    const auto p = parse_numbers(vertex, "--path");
    if (static_cast<int>(p.size()) != d) throw UsageError("--path vertices need " + std::to_string(d) + " components");
    flat.insert(flat.end(), p.begin(), p.end());
    ++n_points;
  }
  const auto rank = parse_numbers(a.rank, "--rank");
  if (rank.size() != 2 || rank[0] < 0 || rank[1] < 0) throw UsageError("--rank must be n_upper,n_lower");
  const int nu = static_cast<int>(rank[0]), nl = static_cast<int>(rank[1]);
  size_t count = 1;
  for (int i = 0; i < nu + nl; ++i) count *= static_cast<size_t>(d);
  const auto comps = parse_numbers(a.tensor, "--tensor");
  if (comps.size() != count) throw UsageError("--tensor needs " + std::to_string(count) + " components");

  PathHandle ph;
  if (int rc = status_exit(covconv_path_from_points(flat.data(), n_points, d, &ph.p))) return rc;
  std::vector<double> out(count);
  if (int rc = status_exit(covconv_parallel_transport(mh.m, ph.p, nu, nl, comps.data(), a.steps, out.data())))
    return rc;
  size_t n = 0;
  covconv_path_size(ph.p, &n, nullptr);
  std::vector<double> start(static_cast<size_t>(d)), end(static_cast<size_t>(d));
  covconv_path_sample(ph.p, 0, start.data());
  covconv_path_sample(ph.p, n - 1, end.data());

  nlohmann::ordered_json j;
  j["manifold"] = a.manifold;
  j["start"] = start;
  j["end"] = end;
  j["rank"] = {nu, nl};
  j["input"] = comps;
  j["components"] = out;
  std::cout << j.dump(2) << '\n';
  return kExitPass;
}

int run_convolve(const std::string& config, const std::string& csv) {
  const std::string text = read_file(config);
  char* out = nullptr;
  if (int rc = status_exit(covconv_convolve(text.c_str(), parent_dir(config).c_str(), csv.c_str(), &out))) return rc;
  return emit_owned(out);
}

int run_check(const std::string& name, const std::string& config, const std::string& csv) {
  const std::string text = read_file(config);
  char* report = nullptr;
  int passed = 0;
  if (int rc = status_exit(covconv_run_check(name.c_str(), text.c_str(), parent_dir(config).c_str(), &report, &passed)))
    return rc;
  if (!csv.empty()) {
    const auto j = nlohmann::json::parse(report);
    std::ofstream out(csv);
    if (!out) {
      covconv_string_free(report);
      throw std::runtime_error("cannot write '" + csv + "'");
    }
    out.precision(17);
    const auto& pts = j["points"];
    const size_t d = pts.empty() ? 0 : pts[0]["coords"].size();
    for (size_t i = 1; i <= d; ++i) out << "coord" << i << ',';
    out << "error\n";
    for (const auto& p : pts) {
      for (const auto& c : p["coords"]) out << c.get<double>() << ',';
      out << p["error"].get<double>() << '\n';
    }
  }
  emit_owned(report);
  return passed ? kExitPass : kExitFail;
}

int run_decompose(int n) {
  char* out = nullptr;
  if (int rc = status_exit(covconv_decompose(n, &out))) return rc;
  return emit_owned(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariant convolution on chart-described manifolds"};
  app.require_subcommand(1);

  GeodesicArgs geo;
  auto* g = app.add_subcommand("geodesic", "Integrate the geodesic from x with initial velocity v");
  g->add_option("--manifold", geo.manifold, "manifold preset")->required();
  g->add_option("--params", geo.params, "comma-separated preset parameters");
  g->add_option("--x", geo.x, "start point, comma-separated")->required();
  g->add_option("--v", geo.v, "initial velocity, comma-separated")->required();
  g->add_option("--steps", geo.steps, "RK4 steps per unit parameter")->check(CLI::PositiveNumber);
  g->add_option("--csv", geo.csv, "write the sampled path as CSV");

  TransportArgs tr;
  auto* t = app.add_subcommand("transport", "Parallel-transport a tensor along a polyline");
  t->add_option("--manifold", tr.manifold, "manifold preset")->required();
  t->add_option("--params", tr.params, "comma-separated preset parameters");
  t->add_option("--path", tr.path, "vertices 'a,b;c,d;...'")->required();
  t->add_option("--tensor", tr.tensor, "components, comma-separated")->required();
  t->add_option("--rank", tr.rank, "n_upper,n_lower (default 1,0)");
  t->add_option("--steps", tr.steps, "RK4 steps per unit chart length")->check(CLI::PositiveNumber);

  std::string config, csv;
  auto* c = app.add_subcommand("convolve", "Evaluate the convolution described by a config");
  c->add_option("--config", config, "JSON config")->required();
  c->add_option("--csv", csv, "write outputs as CSV");

  std::string check_name;
  auto* k = app.add_subcommand("check", "Run a named property check");
  k->add_option("name", check_name, "check name")->required();
  k->add_option("--config", config, "JSON config")->required();
  k->add_option("--csv", csv, "write the per-point error table as CSV");

  int power = 0;
  auto* dcmp = app.add_subcommand("decompose", "SO(3) multiplicities of the n-th tensor power");
  dcmp->add_option("--n", power, "tensor power")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (*g) return run_geodesic(geo);
    if (*t) return run_transport(tr);
    if (*c) return run_convolve(config, csv);
    if (*k) return run_check(check_name, config, csv);
    if (*dcmp) return run_decompose(power);
  } catch (const UsageError& e) {
    std::cerr << "covconv: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "covconv: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitConfig;
}
