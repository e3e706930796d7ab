#pragma once

// Configuration-driven checks of the covariance properties.
//
// A check consumes an ExperimentConfig (parsed from JSON, schema in
// README.md) and produces a CheckReport whose status is pass iff
// max_abs_error <= tolerance.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "covconv/convolution.hpp"
#include "covconv/presets.hpp"

namespace covconv {

struct PresetSpec {
  std::string name;
  std::vector<double> params;
};

struct FieldSpec {
  std::string oracle;           // built-in oracle name, or empty when csv is set
  std::vector<double> params;
  std::string csv;              // grid CSV path
  TensorRank rank;              // required for csv fields
};

struct KernelSpec {
  std::string family;
  std::vector<double> params;
  std::string csv;              // node coefficient table
  TensorRank rank_out;
  TensorRank rank_in;
};

// Colatitude of the pole-side legs of the built-in sphere loops. Kept inside
// the chart margin so polyline legs never touch the chart edge.
inline constexpr double kLoopPoleLatitude = 2e-3;

struct LoopSpec {
  std::string shape = "octant";  // octant | lune | triangle | polyline
  double alpha = 0.0;            // longitude extent for lune and triangle
  std::vector<Point> points;     // polyline vertices
  std::optional<double> expected_angle;
};

struct ExperimentConfig {
  PresetSpec manifold{"flat2d-cartesian", {}};
  std::optional<PresetSpec> chart_transition;
  FieldSpec field{"scalar-constant", {1.0}, "", {}};
  std::optional<FieldSpec> field2;             // second input for linearity
  std::optional<FieldSpec> transported_field;  // independent oracle for the moved input
  KernelSpec kernel{"constant", {1.0}, "", {}, {}};
  BallSpec quadrature;
  int steps = kDefaultStepsPerUnit;
  SharingMode sharing_mode = SharingMode::ChartSegment;
  std::optional<Point> reference_point;
  std::vector<Point> output_points;
  std::vector<Point> path;    // polyline vertices
  std::vector<Point> path2;
  std::optional<LoopSpec> loop;
  std::map<std::string, double> tolerances;
  int samples = 20;
  unsigned long long seed = 20190601ULL;
  int max_power = 10;
};

// `base_dir` resolves relative CSV paths.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);

struct PointError {
  Point coords;
  double error = 0.0;
};

struct CheckReport {
  std::string check;
  bool passed = false;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::vector<PointError> points;
  std::map<std::string, double> details;
  double wall_time_s = 0.0;
};

std::vector<std::string> check_names();
double default_tolerance(const std::string& check, const Manifold& m);

// Throws ConfigError for unknown checks or inconsistent configs.
CheckReport run_check(const std::string& name, const ExperimentConfig& cfg);

std::string report_to_json(const CheckReport& report, int indent = 2);

// Builders shared by the checks and the CLI.
Manifold build_manifold(const ExperimentConfig& cfg);
TensorField build_field(const FieldSpec& spec, const Manifold& m);
SharedKernel build_kernel(const ExperimentConfig& cfg, const Manifold& m, const Point& x);
Point reference_point(const ExperimentConfig& cfg);

// Runs convolve_field for the config. Returns one tensor per output point.
std::vector<TensorValue> run_convolution(const ExperimentConfig& cfg);
std::string convolution_to_json(const std::vector<TensorValue>& outputs, int indent = 2);
// `coord1,coord2,out_<multi-index>...`
void write_output_csv(const std::string& path, const std::vector<TensorValue>& outputs);

// Loop vertices for a holonomy experiment, and the enclosed-curvature
// prediction of its rotation angle.
std::vector<Point> loop_vertices(const LoopSpec& loop, const Manifold& m);
double predicted_holonomy_angle(const LoopSpec& loop, const Manifold& m);

}  // namespace covconv
