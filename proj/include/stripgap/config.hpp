#pragma once

#include <string>
#include <vector>

#include "stripgap/geometry.hpp"

namespace stripgap {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One structured config file drives every command; flags may override any
/// key via --set section.key=value. Unknown keys are rejected.
struct RunConfig {
  // [geometry]
  double H = 0.4;
  int N = 8;
  std::string hole_kind = "disk";  // disk | ellipse | smooth-star | none
  double hole_center_x = 0.0, hole_center_y = 0.2;
  double hole_radius = 0.08;               // disk
  double hole_semi_axis_x = 0.08, hole_semi_axis_y = 0.05;  // ellipse
  double hole_base_radius = 0.08, hole_amplitude = 0.2;     // smooth-star
  int hole_frequency = 5;
  double boundary_tolerance = 0.0;  // 0 = auto

  // [fem]
  double target_h = 0.0;  // 0 = auto
  int dense_ceiling = 4000;
  bool iterative = true;
  double solver_tol = 1e-9;

  // [sweep]
  int eta_samples = 33;
  int bands = 3;
  double psi_max = 8.0;
  int window_samples = 17;
  bool edge_refine = true;
  int threads = 0;

  // [cell_constants]
  double T = 0.0;  // 0 = auto
  double cc_target_h = 0.008;
  double grading = 1.25;
  double cross_tol = 0.01;

  // [limit]
  double lambda_max = 0.0;  // 0 = auto (covers `bands`+1 branches)

  // [output]
  std::string out_dir = "out";
  std::vector<std::string> formats = {"csv", "json", "svg"};

  bool perforated() const { return hole_kind != "none"; }
  HoleShape make_hole() const;  // throws ConfigError when kind == none
  CellSpec make_cell() const;
  StripSpec make_strip() const;
  bool wants(const std::string& format) const;
};

RunConfig parse_config_text(const std::string& text,
                            const std::vector<std::string>& overrides = {});
RunConfig parse_config_file(const std::string& path,
                            const std::vector<std::string>& overrides = {});

/// Default config with comments; also serves as the documented schema.
std::string default_config_text();

}  // namespace stripgap
