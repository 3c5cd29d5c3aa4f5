// stripgap: band structure and gap asymptotics for a Neumann strip perforated
// by a periodic transversal string of small holes.
//
// Commands: limit | cell-constants | dispersion | gaps | verify
// One config file drives everything; any key can be overridden on the command
// line with --set section.key=value. See FORMATS.md for the output schemas.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "stripgap/acceptance.hpp"
#include "stripgap/band_sweep.hpp"
#include "stripgap/cell_constants.hpp"
#include "stripgap/config.hpp"
#include "stripgap/report.hpp"

namespace sg = stripgap;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "run configuration file (key = value sections)");
  cmd->add_option("--set", args.overrides, "override a config key: section.key=value")
      ->take_all();
}

sg::RunConfig load(const CommonArgs& args) {
  if (args.config_path.empty()) return sg::parse_config_text("", args.overrides);
  return sg::parse_config_file(args.config_path, args.overrides);
}

std::string out_path(const sg::RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

double auto_lambda_max(const sg::RunConfig& cfg) {
  if (cfg.lambda_max > 0) return cfg.lambda_max;
  double top = 0;
  for (double eta : {0.0, M_PI}) {
    auto lims = sg::limit_eigenvalues(cfg.H, eta, cfg.bands + 1);
    top = std::max(top, lims.back().value);
  }
  return top + 1e-9;
}

sg::SweepOptions sweep_options(const sg::RunConfig& cfg) {
  sg::SweepOptions o;
  o.eta_samples = cfg.eta_samples;
  o.bands = cfg.bands;
  o.mesh_h = cfg.target_h;
  o.psi_max = cfg.psi_max;
  o.window_samples = cfg.window_samples;
  o.edge_refine = cfg.edge_refine;
  o.threads = cfg.threads;
  o.eig.dense_ceiling = cfg.dense_ceiling;
  o.eig.iterative = cfg.iterative;
  o.eig.tol = cfg.solver_tol;
  return o;
}

std::vector<std::string> symmetry_warnings(const sg::RunConfig& cfg) {
  std::vector<std::string> warnings;
  if (!cfg.perforated()) return warnings;
  double defect = sg::mirror_symmetry_defect(cfg.make_hole(), cfg.H);
  double tol = 10.0 * cfg.make_hole().tolerance(cfg.H);
  if (defect > tol) {
    std::ostringstream msg;
    msg << "hole is not mirror-symmetric (defect " << defect
        << "); the justified gap-opening results assume the mirror symmetry";
    warnings.push_back(msg.str());
  }
  return warnings;
}

int cmd_limit(const CommonArgs& args) {
  sg::RunConfig cfg = load(args);
  sg::LimitCurves curves =
      sg::sample_limit_curves(cfg.H, cfg.bands + 2, std::max(129, cfg.eta_samples),
                              auto_lambda_max(cfg));
  if (sg::is_exceptional_height(cfg.H))
    std::cerr << "warning: H = " << cfg.H
              << " is an exceptional width; degenerate nodes are flagged, not classified\n";
  if (cfg.wants("csv")) sg::write_limit_csv(out_path(cfg, "limit_dispersion.csv"), curves);
  if (cfg.wants("json")) sg::write_nodes_json(out_path(cfg, "limit_nodes.json"), curves);
  if (cfg.wants("svg"))
    sg::write_dispersion_svg(out_path(cfg, "limit_dispersion.svg"), curves.eta_grid,
                             curves.values, nullptr, &curves.nodes,
                             "limit dispersion curves, H = " + std::to_string(cfg.H));
  std::cout << "limit: " << curves.nodes.size() << " nodes, outputs in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_cell_constants(const CommonArgs& args) {
  sg::RunConfig cfg = load(args);
  sg::CellConstantsOptions opts;
  opts.target_h = cfg.cc_target_h;
  opts.grading = cfg.grading;
  opts.cross_tol = cfg.cross_tol;
  sg::StripSpec strip = cfg.make_strip();
  auto warnings = symmetry_warnings(cfg);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  sg::CellConstants cc;
  try {
    cc = sg::compute_cell_constants(strip, opts);
  } catch (const sg::ResolutionError& err) {
    std::cerr << "cross-method verification failed: " << err.what() << "\n";
    return kExitVerify;
  }
  if (cfg.wants("json"))
    sg::write_cell_constants_json(out_path(cfg, "cell_constants.json"), cc, warnings);
  std::cout << "m1 = " << cc.m1 << "  m2 = " << cc.m2 << "  M_Xi = " << cc.M_Xi
            << "  |omega| = " << cc.area_omega << "  (T = " << cc.diag.T
            << ", dofs = " << cc.diag.dofs << ")\n";
  return 0;
}

int cmd_dispersion(const CommonArgs& args) {
  sg::RunConfig cfg = load(args);
  sg::DispersionDataset ds = sg::sweep(cfg.make_cell(), sweep_options(cfg));
  sg::BandsGaps bg = sg::extract_bands_gaps(ds, cfg.bands);
  if (cfg.wants("csv")) sg::write_dispersion_csv(out_path(cfg, "dispersion.csv"), ds);
  if (cfg.wants("json")) sg::write_dispersion_json(out_path(cfg, "dispersion.json"), ds);
  if (cfg.wants("svg"))
    sg::write_dispersion_svg(out_path(cfg, "dispersion.svg"), ds.eta_grid, ds.values, &bg,
                             nullptr,
                             "dispersion, eps = 1/" + std::to_string(cfg.N) +
                                 ", H = " + std::to_string(cfg.H));
  std::cout << "dispersion: " << ds.eta_grid.size() << " eta points, " << ds.dofs
            << " dofs, outputs in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_gaps(const CommonArgs& args) {
  sg::RunConfig cfg = load(args);
  auto warnings = symmetry_warnings(cfg);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  sg::DispersionDataset ds = sg::sweep(cfg.make_cell(), sweep_options(cfg));
  sg::BandsGaps bg = sg::extract_bands_gaps(ds, cfg.bands);

  sg::GapPredictions pred;
  bool have_cc = cfg.perforated();
  sg::CellConstants cc;
  if (have_cc) {
    sg::CellConstantsOptions opts;
    opts.target_h = cfg.cc_target_h;
    opts.grading = cfg.grading;
    opts.cross_tol = cfg.cross_tol;
    cc = sg::compute_cell_constants(cfg.make_strip(), opts);
    pred = sg::predicted_gaps(cc, cfg.make_cell().epsilon());
  }

  if (cfg.wants("json")) {
    sg::write_bands_gaps_json(out_path(cfg, "bands_gaps.json"), bg, pred,
                              cfg.make_cell().epsilon());
    sg::write_dispersion_json(out_path(cfg, "dispersion.json"), ds);
  }
  if (cfg.wants("csv")) sg::write_dispersion_csv(out_path(cfg, "dispersion.csv"), ds);
  if (cfg.wants("svg"))
    sg::write_dispersion_svg(out_path(cfg, "dispersion.svg"), ds.eta_grid, ds.values, &bg,
                             nullptr,
                             "bands and gaps, eps = 1/" + std::to_string(cfg.N) +
                                 ", H = " + std::to_string(cfg.H));
  if (have_cc) {
    sg::ComparisonReport rep = sg::compare_asymptotics(ds, cc, pred);
    if (cfg.wants("json"))
      sg::write_comparison_json(out_path(cfg, "comparison.json"), rep,
                                cfg.make_cell().epsilon());
    for (const auto& n : rep.nodes)
      std::cout << sg::node_id_name(n.id) << " node: measured width " << n.measured_width
                << ", predicted slope " << n.predicted_slope << " (eps*slope = "
                << n.predicted_slope * cfg.make_cell().epsilon() << "), fit C = " << n.fit_C
                << "\n";
  }
  for (const auto& g : bg.gaps)
    std::cout << "gap " << g.p << ": [" << g.lo << ", " << g.hi << "] width " << g.width()
              << (g.open ? " open" : " closed") << "\n";
  for (const auto& reason : pred.omitted) std::cout << "prediction omitted: " << reason << "\n";
  return 0;
}

int cmd_verify(const CommonArgs& args, const std::vector<int>& only) {
  sg::RunConfig cfg = load(args);
  sg::AcceptanceOptions opts;
  opts.only = only;
  opts.threads = cfg.threads;
  auto results = sg::run_acceptance(opts, std::cout);
  return sg::all_passed(results) ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"band-structure solver and gap-asymptotics validator for a "
               "periodically perforated Neumann strip"};
  app.require_subcommand(1);
  std::ostringstream defaults;
  defaults << "\nConfig keys and defaults:\n" << sg::default_config_text();
  app.footer(defaults.str());

  CommonArgs limit_args, cc_args, disp_args, gaps_args, verify_args;
  std::vector<int> verify_only;

  CLI::App* limit = app.add_subcommand("limit", "limit dispersion curves and node table");
  add_common(limit, limit_args);
  CLI::App* cellc = app.add_subcommand("cell-constants",
                                       "boundary-layer constants m1, m2, M(Xi), |omega|");
  add_common(cellc, cc_args);
  CLI::App* disp = app.add_subcommand("dispersion", "FEM dispersion sweep");
  add_common(disp, disp_args);
  CLI::App* gaps = app.add_subcommand("gaps", "bands, gaps, and asymptotics comparison");
  add_common(gaps, gaps_args);
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
  add_common(verify, verify_args);
  verify->add_option("--only", verify_only, "criterion ids to run (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (limit->parsed()) return cmd_limit(limit_args);
    if (cellc->parsed()) return cmd_cell_constants(cc_args);
    if (disp->parsed()) return cmd_dispersion(disp_args);
    if (gaps->parsed()) return cmd_gaps(gaps_args);
    if (verify->parsed()) return cmd_verify(verify_args, verify_only);
  } catch (const sg::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const sg::GeometryError& err) {
    std::cerr << "geometry error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const sg::MeshError& err) {
    std::cerr << "mesh error: " << err.what() << "\n";
    return kExitSolver;
  } catch (const sg::SolverError& err) {
    std::cerr << "solver error: " << err.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
