#include <cmath>

#include "doctest.h"
#include "stripgap/band_sweep.hpp"
#include "stripgap/cell_constants.hpp"

using namespace stripgap;

namespace {
const double pi = M_PI;
const double pi2 = pi * pi;

CellSpec cell(double H, int N, bool holed) {
  CellSpec s;
  s.H = H;
  s.N = N;
  if (holed) {
    HoleShape h;
    h.shape = Disk{0.08};
    h.center = Vec2(0.0, 0.2);
    s.hole = h;
  }
  return s;
}

SweepOptions quick_opts() {
  SweepOptions o;
  o.eta_samples = 17;
  o.bands = 3;
  o.threads = 2;
  return o;
}
}  // namespace

TEST_CASE("unperforated sweep matches the limit spectrum pointwise") {
  SweepOptions opts = quick_opts();
  opts.mesh_h = 0.015;
  opts.edge_refine = false;
  DispersionDataset ds = sweep(cell(0.4, 1, false), opts);
  REQUIRE(!ds.eta_grid.empty());
  CHECK(ds.eta_grid.front() == doctest::Approx(-pi));
  CHECK(ds.eta_grid.back() == doctest::Approx(pi));
  for (size_t i = 0; i < ds.eta_grid.size(); ++i) {
    auto lims = limit_eigenvalues(0.4, ds.eta_grid[i], 3);
    for (int p = 0; p < 3; ++p)
      CHECK(std::abs(ds.values[i][p] - lims[p].value) < 2e-3 * (1 + lims[p].value));
  }
  // Lambda_1(0) = 0: constant eigenfunction survives
  int i0 = ds.index_of(0.0);
  REQUIRE(i0 >= 0);
  CHECK(std::abs(ds.values[i0][0]) < 1e-8);
}

TEST_CASE("unperforated bands touch: every gap closed") {
  SweepOptions opts = quick_opts();
  opts.mesh_h = 0.015;
  DispersionDataset ds = sweep(cell(0.4, 1, false), opts);
  BandsGaps bg = extract_bands_gaps(ds, 3);
  for (const auto& g : bg.gaps) CHECK(!g.open);
  // band 1 = [0, pi^2], band 2 = [pi^2, 4 pi^2] within FEM error
  CHECK(bg.bands[0].lo == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bg.bands[0].hi == doctest::Approx(pi2).epsilon(1e-3));
  CHECK(bg.bands[1].lo == doctest::Approx(pi2).epsilon(1e-3));
  CHECK(bg.bands[1].hi == doctest::Approx(4 * pi2).epsilon(1e-3));
}

TEST_CASE("perforated eps=1/4: gaps 1 and 2 open, symmetry holds") {
  SweepOptions opts = quick_opts();
  DispersionDataset ds = sweep(cell(0.4, 4, true), opts);
  BandsGaps bg = extract_bands_gaps(ds, 3);
  REQUIRE(bg.gaps.size() == 2);
  CHECK(bg.gaps[0].open);
  CHECK(bg.gaps[1].open);
  // the gaps straddle the node values
  CHECK(bg.gaps[0].lo < pi2);
  CHECK(bg.gaps[0].hi > pi2);
  CHECK(bg.gaps[1].lo < 4 * pi2);
  CHECK(bg.gaps[1].hi > 4 * pi2);
  CHECK(sweep_symmetry_defect(ds) < 1e-7);
  // band extrema sit at the node etas
  CHECK(std::abs(std::abs(bg.bands[0].arg_hi) - pi) < 1e-9);
  CHECK(std::abs(bg.bands[1].arg_hi) < 1e-9);
}

TEST_CASE("known band edges at eps=1/4 against the asymptotic prediction") {
  SweepOptions opts = quick_opts();
  DispersionDataset ds = sweep(cell(0.4, 4, true), opts);
  BandsGaps bg = extract_bands_gaps(ds, 3);

  CellConstantsOptions cco;
  cco.target_h = 0.008;
  StripSpec strip;
  strip.H = 0.4;
  HoleShape h;
  h.shape = Disk{0.08};
  h.center = Vec2(0.0, 0.2);
  strip.hole = h;
  CellConstants cc = compute_cell_constants(strip, cco);
  GapPredictions pred = predicted_gaps(cc, 0.25);

  // first-order edges are upper/lower bounds up to O(eps^2)
  double slack = 0.2 * 0.25 * 0.25 * 4 * pi2;  // generous eps^2 allowance
  CHECK(bg.gaps[0].lo <= pred.gaps[0].lower_edge(0.25) + slack);
  CHECK(bg.gaps[0].hi >= pred.gaps[0].upper_edge(0.25) - slack);
  double width_ratio = bg.gaps[0].width() / (pred.gaps[0].width_slope * 0.25);
  CHECK(width_ratio > 0.7);
  CHECK(width_ratio < 1.3);

  ComparisonReport rep = compare_asymptotics(ds, cc, pred);
  REQUIRE(rep.nodes.size() == 2);
  for (const auto& n : rep.nodes) {
    CHECK(n.fit_C > 0);
    CHECK(n.fit_C < 100.0);  // bounded constant at eps=1/4
    CHECK(!n.psi.empty());
  }
  // eps=1/4 is far from asymptopia; the acceptance suite checks the eps-ratio
  CHECK(rep.away.max_residual_over_eps < 60.0);
}

TEST_CASE("sweep determinism with threads") {
  SweepOptions opts = quick_opts();
  opts.eta_samples = 9;
  opts.edge_refine = false;
  DispersionDataset a = sweep(cell(0.4, 4, true), opts);
  DispersionDataset b = sweep(cell(0.4, 4, true), opts);
  REQUIRE(a.eta_grid.size() == b.eta_grid.size());
  for (size_t i = 0; i < a.eta_grid.size(); ++i) {
    CHECK(a.eta_grid[i] == b.eta_grid[i]);
    for (size_t p = 0; p < a.values[i].size(); ++p) CHECK(a.values[i][p] == b.values[i][p]);
  }
}

TEST_CASE("grid includes node windows") {
  SweepOptions opts = quick_opts();
  opts.eta_samples = 9;
  opts.edge_refine = false;
  DispersionDataset ds = sweep(cell(0.4, 4, true), opts);
  // psi = -4 sample of the square node window and psi = +4 of the circ window
  CHECK(ds.index_of(pi - 4.0 * 0.25) >= 0);
  CHECK(ds.index_of(4.0 * 0.25) >= 0);
  CHECK(!ds.node_etas.empty());
}
