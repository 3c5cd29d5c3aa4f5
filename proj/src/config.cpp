#include "stripgap/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace stripgap {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

struct KeyValue {
  std::string section, key, value;
};

std::vector<KeyValue> parse_ini(const std::string& text) {
  std::vector<KeyValue> out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value on line " + std::to_string(lineno));
    out.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  return out;
}

double to_double(const KeyValue& kv) {
  try {
    size_t pos;
    double v = std::stod(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("key " + kv.section + "." + kv.key + ": not a number: " + kv.value);
  }
}

int to_int(const KeyValue& kv) {
  try {
    size_t pos;
    int v = std::stoi(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("key " + kv.section + "." + kv.key + ": not an integer: " + kv.value);
  }
}

bool to_bool(const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1" || kv.value == "on") return true;
  if (kv.value == "false" || kv.value == "0" || kv.value == "off") return false;
  throw ConfigError("key " + kv.section + "." + kv.key + ": not a boolean: " + kv.value);
}

void apply(RunConfig& cfg, const KeyValue& kv) {
  const std::string full = kv.section + "." + kv.key;
  if (full == "geometry.H") cfg.H = to_double(kv);
  else if (full == "geometry.N") cfg.N = to_int(kv);
  else if (full == "geometry.hole.kind") cfg.hole_kind = kv.value;
  else if (full == "geometry.hole.center_x") cfg.hole_center_x = to_double(kv);
  else if (full == "geometry.hole.center_y") cfg.hole_center_y = to_double(kv);
  else if (full == "geometry.hole.radius") cfg.hole_radius = to_double(kv);
  else if (full == "geometry.hole.semi_axis_x") cfg.hole_semi_axis_x = to_double(kv);
  else if (full == "geometry.hole.semi_axis_y") cfg.hole_semi_axis_y = to_double(kv);
  else if (full == "geometry.hole.base_radius") cfg.hole_base_radius = to_double(kv);
  else if (full == "geometry.hole.amplitude") cfg.hole_amplitude = to_double(kv);
  else if (full == "geometry.hole.frequency") cfg.hole_frequency = to_int(kv);
  else if (full == "geometry.hole.boundary_tolerance") cfg.boundary_tolerance = to_double(kv);
  else if (full == "fem.target_h") cfg.target_h = to_double(kv);
  else if (full == "fem.dense_ceiling") cfg.dense_ceiling = to_int(kv);
  else if (full == "fem.iterative") cfg.iterative = to_bool(kv);
  else if (full == "fem.solver_tol") cfg.solver_tol = to_double(kv);
  else if (full == "sweep.eta_samples") cfg.eta_samples = to_int(kv);
  else if (full == "sweep.bands") cfg.bands = to_int(kv);
  else if (full == "sweep.psi_max") cfg.psi_max = to_double(kv);
  else if (full == "sweep.window_samples") cfg.window_samples = to_int(kv);
  else if (full == "sweep.edge_refine") cfg.edge_refine = to_bool(kv);
  else if (full == "sweep.threads") cfg.threads = to_int(kv);
  else if (full == "cell_constants.T") cfg.T = to_double(kv);
  else if (full == "cell_constants.target_h") cfg.cc_target_h = to_double(kv);
  else if (full == "cell_constants.grading") cfg.grading = to_double(kv);
  else if (full == "cell_constants.cross_tol") cfg.cross_tol = to_double(kv);
  else if (full == "limit.lambda_max") cfg.lambda_max = to_double(kv);
  else if (full == "output.dir") cfg.out_dir = kv.value;
  else if (full == "output.formats") {
    cfg.formats.clear();
    std::istringstream ss(kv.value);
    std::string item;
    while (ss >> item) {
      if (item != "csv" && item != "json" && item != "svg")
        throw ConfigError("unknown output format: " + item);
      cfg.formats.push_back(item);
    }
  } else {
    throw ConfigError("unknown config key: " + full);
  }
}

}  // namespace

HoleShape RunConfig::make_hole() const {
  HoleShape h;
  h.center = Vec2(hole_center_x, hole_center_y);
  h.boundary_tolerance = boundary_tolerance;
  if (hole_kind == "disk") {
    h.shape = Disk{hole_radius};
  } else if (hole_kind == "ellipse") {
    h.shape = Ellipse{hole_semi_axis_x, hole_semi_axis_y};
  } else if (hole_kind == "smooth-star") {
    h.shape = SmoothStar{hole_base_radius, hole_amplitude, hole_frequency};
  } else if (hole_kind == "none") {
    throw ConfigError("this command needs a hole; geometry.hole.kind is 'none'");
  } else {
    throw ConfigError("unknown hole kind: " + hole_kind);
  }
  return h;
}

CellSpec RunConfig::make_cell() const {
  CellSpec spec;
  spec.H = H;
  spec.N = N;
  if (perforated()) spec.hole = make_hole();
  return spec;
}

StripSpec RunConfig::make_strip() const {
  StripSpec spec;
  spec.H = H;
  spec.T = T;
  if (perforated()) spec.hole = make_hole();
  return spec;
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  for (const auto& kv : parse_ini(text)) apply(cfg, kv);
  for (const auto& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value: " + ov);
    std::string path = trim(ov.substr(0, eq));
    auto dot = path.find('.');
    if (dot == std::string::npos) throw ConfigError("--set expects section.key=value: " + ov);
    KeyValue kv{path.substr(0, dot), path.substr(dot + 1), trim(ov.substr(eq + 1))};
    apply(cfg, kv);
  }
  if (!(cfg.H > 0)) throw ConfigError("geometry.H must be positive");
  if (cfg.N < 1) throw ConfigError("geometry.N must be a positive integer");
  return cfg;
}

RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::string default_config_text() {
  return R"(# stripgap run configuration (all values shown are the defaults)

[geometry]
H = 0.4                      # strip height (dimensionless)
N = 8                        # holes per cell; epsilon = 1/N
hole.kind = disk             # disk | ellipse | smooth-star | none
hole.center_x = 0.0          # unit-strip coordinates
hole.center_y = 0.2
hole.radius = 0.08           # disk
hole.semi_axis_x = 0.08      # ellipse
hole.semi_axis_y = 0.05
hole.base_radius = 0.08      # smooth-star: r = r0 (1 + amp cos(freq t))
hole.amplitude = 0.2
hole.frequency = 5
hole.boundary_tolerance = 0  # 0 = auto: 1e-3 * min(H, diam)

[fem]
target_h = 0                 # cell mesh size; 0 = auto from epsilon
dense_ceiling = 4000         # capacity of the dense eigensolver path
iterative = true             # shift-invert Lanczos beyond the dense path
solver_tol = 1e-9

[sweep]
eta_samples = 33             # uniform eta grid; node windows added on top
bands = 3
psi_max = 8                  # node window |psi| <= psi_max
window_samples = 17
edge_refine = true           # h vs h/2 Richardson at the band edges
threads = 0                  # 0 = hardware

[cell_constants]
T = 0                        # strip truncation; 0 = auto from the decay rate
target_h = 0.008
grading = 1.25
cross_tol = 0.01             # allowed m1 route disagreement (relative)

[limit]
lambda_max = 0               # node search range; 0 = auto

[output]
dir = out
formats = csv json svg
)";
}

}  // namespace stripgap
