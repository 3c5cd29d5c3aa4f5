#include "stripgap/band_sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

namespace stripgap {

namespace {
constexpr double kPi = M_PI;

double auto_mesh_h(const CellSpec& spec) {
  if (spec.hole) return spec.epsilon() * spec.hole->diameter() / 4.5;
  return spec.H / 24.0;
}

// run fn(i) for i in [0, n) on a bounded pool; rethrows the first error
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  int T = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  T = std::max(1, std::min(T, n));
  if (T == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(T);
  std::vector<std::thread> pool;
  for (int t = 0; t < T; ++t) {
    pool.emplace_back([&, t]() {
      try {
        while (true) {
          int i = next.fetch_add(1);
          if (i >= n) break;
          fn(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
        next.store(n);  // drain remaining work
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> build_grid(double H, double epsilon, const SweepOptions& opts,
                               std::vector<double>& node_etas) {
  std::vector<double> grid;
  for (int i = 0; i < opts.eta_samples; ++i)
    grid.push_back(-kPi + 2.0 * kPi * i / (opts.eta_samples - 1));

  // refinement clusters around the limit-model nodes within the band range
  double lam_upper = 0;
  for (double eta : {0.0, kPi}) {
    auto lims = limit_eigenvalues(H, eta, opts.bands + 1);
    lam_upper = std::max(lam_upper, lims.back().value);
  }
  for (const auto& node : find_nodes(H, lam_upper + 1e-9)) {
    node_etas.push_back(node.eta_star);
    for (int i = 0; i < opts.window_samples; ++i) {
      double psi = -opts.psi_max + 2.0 * opts.psi_max * i / (opts.window_samples - 1);
      double eta = node.eta_star + epsilon * psi;
      if (eta >= -kPi - 1e-12 && eta <= kPi + 1e-12)
        grid.push_back(std::clamp(eta, -kPi, kPi));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());
  std::sort(node_etas.begin(), node_etas.end());
  node_etas.erase(std::unique(node_etas.begin(), node_etas.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                  node_etas.end());
  return grid;
}

}  // namespace

int DispersionDataset::index_of(double eta, double tol) const {
  int best = -1;
  double bd = tol;
  for (size_t i = 0; i < eta_grid.size(); ++i) {
    double d = std::abs(eta_grid[i] - eta);
    if (d <= bd) {
      bd = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

DispersionDataset sweep(const CellSpec& spec, const SweepOptions& opts) {
  if (opts.eta_samples < 9) throw std::invalid_argument("eta_samples must be >= 9");
  spec.validate();

  DispersionDataset ds;
  ds.epsilon = spec.epsilon();
  ds.H = spec.H;

  double h = opts.mesh_h > 0 ? opts.mesh_h : auto_mesh_h(spec);
  PeriodicMesh mesh = mesh_cell(spec, h);
  ds.mesh_h = mesh.h;
  BlochAssembler assembler(mesh);
  ds.dofs = assembler.ndof();

  ds.eta_grid = build_grid(spec.H, ds.epsilon, opts, ds.node_etas);
  const int n = static_cast<int>(ds.eta_grid.size());
  const int count = opts.bands + opts.extra_eigen;
  ds.values.assign(n, {});

  parallel_for(n, opts.threads, [&](int i) {
    try {
      BlochSystem sys = assembler.assemble(ds.eta_grid[i]);
      EigenOptions eo = opts.eig;
      eo.want_vectors = false;
      ds.values[i] = solve_lowest(sys, count, eo).values;
    } catch (const std::exception& err) {
      std::ostringstream msg;
      msg << "eta = " << ds.eta_grid[i] << ": " << err.what();
      throw SolverError(msg.str());
    }
  });

  if (opts.edge_refine) {
    // h vs h/2 Richardson at the node etas; the measured per-band h-error is
    // then subtracted across each node's whole psi-window so the values feeding
    // the parabolic edge refinement stay locally consistent
    PeriodicMesh fine = refine_uniform(mesh);
    BlochAssembler fine_assembler(fine);
    std::vector<int> idx;
    for (double eta : ds.node_etas) {
      int i = ds.index_of(eta);
      if (i >= 0) idx.push_back(i);
    }
    std::vector<std::vector<double>> fine_vals(idx.size());
    parallel_for(static_cast<int>(idx.size()), opts.threads, [&](int k) {
      BlochSystem sys = fine_assembler.assemble(ds.eta_grid[idx[k]]);
      EigenOptions eo = opts.eig;
      eo.want_vectors = false;
      fine_vals[k] = solve_lowest(sys, count, eo).values;
    });
    std::vector<std::vector<double>> offsets(idx.size(), std::vector<double>(count, 0.0));
    double err = 0;
    for (size_t k = 0; k < idx.size(); ++k) {
      const auto& coarse = ds.values[idx[k]];
      for (int p = 0; p < count; ++p) {
        double rich = (4.0 * fine_vals[k][p] - coarse[p]) / 3.0;
        offsets[k][p] = coarse[p] - rich;
        err = std::max(err, std::abs(fine_vals[k][p] - coarse[p]) / 3.0);
      }
    }
    const double window = opts.psi_max * ds.epsilon + 1e-12;
    for (int i = 0; i < n; ++i) {
      int best = -1;
      double bd = window;
      for (size_t k = 0; k < idx.size(); ++k) {
        double d = std::abs(ds.eta_grid[i] - ds.eta_grid[idx[k]]);
        if (d <= bd) {
          bd = d;
          best = static_cast<int>(k);
        }
      }
      if (best < 0) continue;
      for (int p = 0; p < count; ++p) ds.values[i][p] -= offsets[best][p];
      std::sort(ds.values[i].begin(), ds.values[i].end());
    }
    ds.eig_error_estimate = err;
  }
  return ds;
}

BandsGaps extract_bands_gaps(const DispersionDataset& ds, int count, double gap_tolerance) {
  if (count > ds.bands()) throw std::invalid_argument("dataset has fewer bands than requested");
  const int n = static_cast<int>(ds.eta_grid.size());

  auto refine = [&](int i, int p, bool maximize) -> std::pair<double, double> {
    // parabola through the three samples nearest the extremum
    if (i == 0 || i == n - 1) return {ds.eta_grid[i], ds.values[i][p]};
    double x0 = ds.eta_grid[i - 1], x1 = ds.eta_grid[i], x2 = ds.eta_grid[i + 1];
    double y0 = ds.values[i - 1][p], y1 = ds.values[i][p], y2 = ds.values[i + 1][p];
    double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
    double a = (d2 - d1) / (x2 - x0);
    if (std::abs(a) < 1e-300) return {x1, y1};
    double xv = 0.5 * (x0 + x1 - d1 / a);
    if (xv < x0 || xv > x2) return {x1, y1};
    // Newton form: p(x) = y0 + d1 (x - x0) + a (x - x0)(x - x1)
    double yv = y0 + d1 * (xv - x0) + a * (xv - x0) * (xv - x1);
    bool better = maximize ? yv >= y1 : yv <= y1;
    return better ? std::make_pair(xv, yv) : std::make_pair(x1, y1);
  };

  BandsGaps out;
  for (int p = 0; p < count; ++p) {
    int imin = 0, imax = 0;
    for (int i = 1; i < n; ++i) {
      if (ds.values[i][p] < ds.values[imin][p]) imin = i;
      if (ds.values[i][p] > ds.values[imax][p]) imax = i;
    }
    auto [alo, lo] = refine(imin, p, false);
    auto [ahi, hi] = refine(imax, p, true);
    out.bands.push_back({p + 1, lo, hi, alo, ahi});
  }
  double scale = std::abs(out.bands.back().hi) + 1.0;
  out.gap_tolerance = gap_tolerance >= 0
                          ? gap_tolerance
                          : std::max(3.0 * ds.eig_error_estimate, 1e-9 * scale);
  for (int p = 0; p + 1 < count; ++p) {
    Gap g;
    g.p = p + 1;
    g.lo = out.bands[p].hi;
    g.hi = out.bands[p + 1].lo;
    g.open = (g.hi - g.lo) > out.gap_tolerance;
    out.gaps.push_back(g);
  }
  return out;
}

ComparisonReport compare_asymptotics(const DispersionDataset& ds, const CellConstants& cc,
                                     const GapPredictions& pred) {
  ComparisonReport report;
  const double eps = ds.epsilon;
  const double psi_window = 8.0;

  BandsGaps bg = extract_bands_gaps(ds, std::min(3, ds.bands()));

  struct NodeSetup {
    NodeId id;
    int band_lower;  // 0-based column of the lower branch
  };
  std::vector<NodeSetup> setups;
  if (cc.H < 1.0) setups.push_back({NodeId::square, 0});
  if (cc.H < 0.5 && ds.bands() >= 3) setups.push_back({NodeId::circ, 1});

  for (const auto& setup : setups) {
    NodeWindowComparison nc;
    nc.id = setup.id;
    nc.eta_star = node_eta(setup.id);
    nc.lambda_star = node_lambda(setup.id);
    for (const auto& g : pred.gaps) {
      if ((setup.id == NodeId::square && g.p == 1) || (setup.id == NodeId::circ && g.p == 2))
        nc.predicted_slope = g.width_slope;
    }
    if (setup.id == NodeId::square && !bg.gaps.empty()) nc.measured_width = bg.gaps[0].width();
    if (setup.id == NodeId::circ && bg.gaps.size() >= 2) nc.measured_width = bg.gaps[1].width();

    // collect grid points inside the window; the square node at +-pi uses the
    // 2 pi periodicity to cover both signs of psi
    for (size_t i = 0; i < ds.eta_grid.size(); ++i) {
      double eta = ds.eta_grid[i];
      double psi;
      if (setup.id == NodeId::circ) {
        psi = eta / eps;
      } else {
        double d1 = (eta - kPi) / eps, d2 = (eta + kPi) / eps;
        psi = std::abs(d1) <= std::abs(d2) ? d1 : d2;
      }
      if (std::abs(psi) > psi_window + 1e-9) continue;
      NodeCorrection corr = correction_node(cc, setup.id, psi);
      double lower = ds.values[i][setup.band_lower];
      double upper = ds.values[i][setup.band_lower + 1];
      nc.psi.push_back(psi);
      nc.residual_lower.push_back(lower - nc.lambda_star - eps * corr.lambda_prime_minus);
      nc.residual_upper.push_back(upper - nc.lambda_star - eps * corr.lambda_prime_plus);
    }
    double worst = 0;
    for (double r : nc.residual_lower) worst = std::max(worst, std::abs(r));
    for (double r : nc.residual_upper) worst = std::max(worst, std::abs(r));
    nc.fit_C = worst / (eps * eps);
    report.nodes.push_back(std::move(nc));
  }

  // away-from-node distance to the three low limit branches
  auto branch = [&](int which, double eta) {
    if (which == 0) return eta * eta;
    if (which == 1) return (eta - 2.0 * kPi) * (eta - 2.0 * kPi);
    return (eta + 2.0 * kPi) * (eta + 2.0 * kPi);
  };
  double max_res = 0;
  for (size_t i = 0; i < ds.eta_grid.size(); ++i) {
    double eta = ds.eta_grid[i];
    for (int b = 0; b < 3; ++b) {
      double bv = branch(b, eta);
      double best = std::numeric_limits<double>::max();
      for (double v : ds.values[i]) best = std::min(best, std::abs(v - bv));
      max_res = std::max(max_res, best);
    }
  }
  report.away.max_residual = max_res;
  report.away.max_residual_over_eps = max_res / eps;
  int ambiguous = 0;
  for (double eta : ds.eta_grid) {
    double b0 = branch(0, eta), b1 = branch(1, eta), b2 = branch(2, eta);
    double c0 = 2.0 * max_res;
    if (std::abs(b0 - b1) < c0 || std::abs(b0 - b2) < c0 || std::abs(b1 - b2) < c0) ++ambiguous;
  }
  report.away.ambiguous_points = ambiguous;
  return report;
}

double sweep_symmetry_defect(const DispersionDataset& ds) {
  double worst = 0;
  const int n = static_cast<int>(ds.eta_grid.size());
  for (int i = 0; i < n; ++i) {
    double eta = ds.eta_grid[i];
    if (eta < 0) continue;
    int j = ds.index_of(-eta, 1e-9);
    if (j < 0) continue;
    for (size_t p = 0; p < ds.values[i].size(); ++p) {
      double a = ds.values[i][p], b = ds.values[j][p];
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
  }
  return worst;
}

}  // namespace stripgap
