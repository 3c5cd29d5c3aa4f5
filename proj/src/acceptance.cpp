#include "stripgap/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "stripgap/band_sweep.hpp"
#include "stripgap/cell_constants.hpp"

namespace stripgap {

namespace {

using Clock = std::chrono::steady_clock;
const double kPi = M_PI;
const double kPi2 = kPi * kPi;

// Reference geometry of the verification suite: H = 0.4, disk of radius 0.08
// centered at (0, 0.2) in unit-strip coordinates.
const double kH = 0.4;
const double kR = 0.08;

// Regression values for the reference disk produced by the nested two-mesh
// Richardson oracle ((4 m(h/2) - m(h))/3 at h = 0.008, T = 1.31928), frozen
// from an oracle run of this exact code path.
const double kFrozenM1 = 0.0577560169713;
const double kFrozenMXi = 0.0154065507110;

HoleShape reference_hole() {
  HoleShape h;
  h.shape = Disk{kR};
  h.center = Vec2(0.0, kH / 2);
  return h;
}

CellSpec reference_cell(int N, bool perforated = true) {
  CellSpec s;
  s.H = kH;
  s.N = N;
  if (perforated) s.hole = reference_hole();
  return s;
}

StripSpec reference_strip() {
  StripSpec s;
  s.H = kH;
  s.hole = reference_hole();
  return s;
}

struct Shared {
  int threads = 0;

  // cell constants with the Richardson-extrapolated m1 / M(Xi)
  std::optional<CellConstants> cc_raw;
  double m1_rich = 0, MXi_rich = 0;
  void ensure_constants() {
    if (cc_raw) return;
    StripSolver coarse(reference_strip(), 0.008, 1.25);
    StripSolver fine(reference_strip(), refine_uniform(coarse.mesh()));
    CellConstants a = extract_cell_constants(coarse, 0.01);
    CellConstants b = extract_cell_constants(fine, 0.01);
    m1_rich = (4.0 * b.diag.m1_energy - a.diag.m1_energy) / 3.0;
    MXi_rich = (4.0 * b.M_Xi - a.M_Xi) / 3.0;
    cc_raw = a;
  }
  CellConstants constants() {
    ensure_constants();
    CellConstants cc = *cc_raw;
    cc.m1 = m1_rich;
    cc.M_Xi = MXi_rich;
    return cc;
  }

  std::map<int, DispersionDataset> sweeps;
  const DispersionDataset& sweep_for(int N) {
    auto it = sweeps.find(N);
    if (it != sweeps.end()) return it->second;
    SweepOptions opts;
    opts.eta_samples = 33;
    opts.bands = 3;
    opts.extra_eigen = 2;
    opts.threads = threads;
    opts.edge_refine = true;
    DispersionDataset ds = sweep(reference_cell(N), opts);
    return sweeps.emplace(N, std::move(ds)).first->second;
  }

  double gap_width(int N, int p) {
    BandsGaps bg = extract_bands_gaps(sweep_for(N), 3);
    return bg.gaps.at(p - 1).width();
  }
};

struct Check {
  bool pass = true;
  std::ostringstream detail;
  template <typename T>
  Check& operator<<(const T& v) {
    detail << v;
    return *this;
  }
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [FAILED: " << what << "]";
    }
  }
};

// ---- criteria 1 & 2: limit-spectrum exactness and the degenerate pair ----

struct LimitExactness {
  bool computed = false;
  std::vector<std::array<std::vector<double>, 2>> fem;  // per eta: values at h, h/2
  std::vector<std::vector<double>> exact;
  std::vector<double> etas{0.0, kPi / 2, kPi};
};

LimitExactness run_limit_exactness() {
  LimitExactness out;
  PeriodicMesh m1 = mesh_cell(reference_cell(1, false), 0.01);
  PeriodicMesh m2 = refine_uniform(m1);
  BlochAssembler a1(m1), a2(m2);
  for (double eta : out.etas) {
    std::array<std::vector<double>, 2> pair;
    pair[0] = solve_lowest(a1.assemble(eta), 5).values;
    pair[1] = solve_lowest(a2.assemble(eta), 5).values;
    out.fem.push_back(pair);
    auto lims = limit_eigenvalues(kH, eta, 5);
    std::vector<double> ex;
    for (const auto& l : lims) ex.push_back(l.value);
    out.exact.push_back(ex);
  }
  out.computed = true;
  return out;
}

Check criterion_limit_exactness(const LimitExactness& le) {
  Check c;
  double worst = 0;
  for (size_t ie = 0; ie < le.etas.size(); ++ie) {
    for (int p = 0; p < 5; ++p) {
      double ex = le.exact[ie][p];
      double scale = std::max(std::abs(ex), 1.0);
      double err_h = le.fem[ie][0][p] - ex;
      double err_h2 = le.fem[ie][1][p] - ex;
      worst = std::max(worst, std::abs(err_h) / scale);
      std::ostringstream tag;
      tag << "eta=" << le.etas[ie] << " p=" << p + 1;
      c.require(std::abs(err_h) <= 1e-3 * scale, tag.str() + " rel err > 1e-3");
      if (std::abs(err_h) > 1e-9 * scale) {
        double ratio = err_h / err_h2;
        c.require(ratio >= 3.5 && ratio <= 4.5,
                  tag.str() + " h->h/2 ratio " + std::to_string(ratio) + " outside [3.5,4.5]");
      }
    }
  }
  c << "worst rel err " << std::setprecision(3) << worst;
  return c;
}

Check criterion_degenerate_pair(const LimitExactness& le) {
  Check c;
  const auto& at_pi = le.fem[2][0];  // h mesh, eta = pi
  c.require(std::abs(at_pi[0] - kPi2) <= 1e-3 * kPi2, "Lambda_1(pi) off pi^2");
  c.require(std::abs(at_pi[1] - kPi2) <= 1e-3 * kPi2, "Lambda_2(pi) off pi^2");
  c.require(std::abs(at_pi[1] - at_pi[0]) <= 1e-3 * kPi2, "pair split beyond tolerance");
  c << "Lambda_{1,2}(pi) = " << std::setprecision(8) << at_pi[0] << ", " << at_pi[1];
  return c;
}

// ---- criterion 3: cell constants ----

Check criterion_cell_constants(Shared& sh) {
  Check c;
  sh.ensure_constants();
  const CellConstants& cc = *sh.cc_raw;
  double w2h = cc.area_omega / (2 * kH);
  c.require(std::abs(sh.m1_rich - kFrozenM1) <= 5e-4 * kFrozenM1,
            "m1 regression vs frozen oracle value");
  c.require(std::abs(sh.MXi_rich - kFrozenMXi) <= 5e-4 * kFrozenMXi,
            "M_Xi regression vs frozen oracle value");
  c.require(cc.diag.cross_rel_diff <= 0.01, "m1 energy vs far-field beyond 1%");
  c.require(cc.m1 >= w2h, "m1 below |omega|/(2H)");
  c.require(std::abs(cc.m2) <= 1e-2 * cc.m1, "|m2| beyond 1e-2 m1");
  c.require(cc.M_Xi > 0, "M_Xi not positive");
  c.require(cc.diag.decay.ok, "decay check failed");
  c << "m1 = " << std::setprecision(8) << sh.m1_rich << " (frozen " << kFrozenM1
    << "), M_Xi = " << sh.MXi_rich << ", cross " << std::setprecision(2)
    << cc.diag.cross_rel_diff * 100 << "%, decay rate " << std::setprecision(4)
    << cc.diag.decay.rate;
  return c;
}

// ---- criteria 4 & 5: gap width laws ----

Check criterion_gap_law(Shared& sh, int p) {
  Check c;
  CellConstants cc = sh.constants();
  double slope = (p == 1 ? 4.0 : 16.0) * kPi2 * (cc.m1 + cc.area_omega / (2 * kH));
  std::vector<int> Ns{4, 8, 16};
  std::vector<double> devs;
  c << "width/eps:";
  for (int N : Ns) {
    double w = sh.gap_width(N, p);
    double ratio = w * N;  // width / eps
    devs.push_back(std::abs(ratio - slope) / slope);
    c << " " << std::setprecision(6) << ratio;
  }
  c << " -> slope " << std::setprecision(6) << slope << "; rel devs";
  for (double d : devs) c << " " << std::setprecision(3) << d * 100 << "%";
  c.require(devs[1] < devs[0], "residual not decreasing from eps=1/4 to 1/8");
  c.require(devs[2] < devs[1], "residual not decreasing from eps=1/8 to 1/16");
  c.require(devs[2] <= 0.15, "final deviation beyond 15% at eps=1/16");
  if (p == 2) {
    double r = sh.gap_width(16, 2) / sh.gap_width(16, 1);
    c << "; width ratio " << std::setprecision(4) << r;
    c.require(std::abs(r - 4.0) <= 0.4, "width(g2)/width(g1) off 4 by >10%");
  }
  return c;
}

// ---- criterion 6: node splitting profile ----

Check criterion_node_profile(Shared& sh) {
  Check c;
  CellConstants cc = sh.constants();
  auto fitted_C = [&](int N) {
    const DispersionDataset& ds = sh.sweep_for(N);
    GapPredictions pred = predicted_gaps(cc, ds.epsilon);
    ComparisonReport rep = compare_asymptotics(ds, cc, pred);
    double C = 0;
    for (const auto& node : rep.nodes) {
      for (size_t i = 0; i < node.psi.size(); ++i) {
        double psi = node.psi[i];
        bool wanted = false;
        for (double q : {-4.0, -2.0, 0.0, 2.0, 4.0})
          if (std::abs(psi - q) < 1e-6) wanted = true;
        if (!wanted) continue;
        C = std::max(C, std::abs(node.residual_lower[i]) / (ds.epsilon * ds.epsilon));
        C = std::max(C, std::abs(node.residual_upper[i]) / (ds.epsilon * ds.epsilon));
      }
    }
    return C;
  };
  double c8 = fitted_C(8);
  double c16 = fitted_C(16);
  c << "fitted C: eps=1/8 -> " << std::setprecision(5) << c8 << ", eps=1/16 -> " << c16;
  c.require(std::isfinite(c8) && std::isfinite(c16) && c8 > 0 && c16 > 0, "C not finite");
  double ratio = c16 / c8;
  c << ", ratio " << std::setprecision(3) << ratio;
  c.require(ratio >= 0.5 && ratio <= 2.0, "C changed by more than a factor 2");
  return c;
}

// ---- criterion 7: uniform O(eps) closeness ----

double away_max(const DispersionDataset& ds) {
  double worst = 0;
  for (int i = 0; i < 33; ++i) {
    double eta = -kPi + 2.0 * kPi * i / 32.0;
    int gi = ds.index_of(eta, 1e-9);
    if (gi < 0) continue;
    for (int b = 0; b < 3; ++b) {
      double bv = b == 0 ? eta * eta
                         : (b == 1 ? (eta - 2 * kPi) * (eta - 2 * kPi)
                                   : (eta + 2 * kPi) * (eta + 2 * kPi));
      double best = 1e300;
      for (double v : ds.values[gi]) best = std::min(best, std::abs(v - bv));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

Check criterion_linear_closeness(Shared& sh) {
  Check c;
  double d8 = away_max(sh.sweep_for(8));
  double d16 = away_max(sh.sweep_for(16));
  double ratio = d8 / d16;
  c << "max branch distance: eps=1/8 -> " << std::setprecision(5) << d8 << ", eps=1/16 -> "
    << d16 << ", ratio " << std::setprecision(3) << ratio;
  c.require(ratio >= 1.5 && ratio <= 3.0, "halving eps does not halve the distance");
  return c;
}

// ---- criterion 8: certificate soundness ----

Check criterion_certificate(Shared&) {
  Check c;
  // 50-dof Bloch system
  PeriodicMesh m = mesh_cell(reference_cell(1, false), 0.16);
  BlochSystem sys = assemble_bloch(m, 0.8);
  EigenOptions opts;
  opts.iterative = false;
  EigenSeq all = solve_lowest(sys, sys.ndof, opts);  // dense oracle spectrum
  std::mt19937_64 rng(20260810);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int hits = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd u(sys.ndof);
    for (int i = 0; i < sys.ndof; ++i) u[i] = Complex(unif(rng), unif(rng));
    double mu = 0.55 + 0.5 * unif(rng);
    double delta = residual_certificate(sys, u, mu);
    for (double lam : all.values) {
      if (std::abs(1.0 / (1.0 + lam) - mu) <= delta * (1 + 1e-12)) {
        ++hits;
        break;
      }
    }
  }
  c << hits << "/" << trials << " certified intervals contain a pencil eigenvalue (n = "
    << sys.ndof << ")";
  c.require(hits == trials, "a certificate interval missed the spectrum");
  return c;
}

// ---- criterion 9: box-count sanity ----

Check criterion_box_counts(Shared& sh) {
  Check c;
  const DispersionDataset& ds = sh.sweep_for(16);
  BoxConstants box = count_box_constants(kH, 0.5, 0.5);
  double bound2 = kPi2 + *box.K1;
  double bound4 = 4 * kPi2 + *box.K4;
  double min2 = 1e300, min4 = 1e300;
  for (size_t i = 0; i < ds.eta_grid.size(); ++i) {
    double eta = ds.eta_grid[i];
    if (eta >= -kPi + 0.5 && eta <= kPi - 0.5) min2 = std::min(min2, ds.values[i][1]);
    min4 = std::min(min4, ds.values[i][3]);
  }
  c << "min Lambda_2 on I_1 = " << std::setprecision(7) << min2 << " vs pi^2+K1 = " << bound2
    << "; min Lambda_4 = " << min4 << " vs 4pi^2+K4 = " << bound4;
  c.require(min2 > bound2, "Lambda_2 dips below pi^2 + K1 on the inner interval");
  c.require(min4 > bound4, "Lambda_4 dips below 4pi^2 + K4");
  return c;
}

// ---- criterion 10: symmetry invariants ----

Check criterion_symmetry(Shared& sh) {
  Check c;
  for (int N : {4, 8, 16}) {
    double defect = sweep_symmetry_defect(sh.sweep_for(N));
    c << "N=" << N << " defect " << std::setprecision(3) << defect << "; ";
    c.require(defect < 1e-6, "spectrum not even/periodic in eta at N=" + std::to_string(N));
  }
  // m2 flips sign under vertical reflection of an asymmetric hole
  StripSpec a;
  a.H = kH;
  HoleShape ha;
  ha.shape = Disk{0.06};
  ha.center = Vec2(0.0, 0.15);
  a.hole = ha;
  StripSpec b = a;
  HoleShape hb = ha;
  hb.center = Vec2(0.0, kH - 0.15);
  b.hole = hb;
  CellConstantsOptions opts;
  opts.target_h = 0.006;
  double m2a = compute_cell_constants(a, opts).m2;
  double m2b = compute_cell_constants(b, opts).m2;
  c << "m2 reflect: " << std::setprecision(4) << m2a << " vs " << m2b;
  c.require(std::abs(m2a + m2b) <= 0.02 * std::max(std::abs(m2a), std::abs(m2b)),
            "m2 does not flip sign under reflection");
  return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream& log) {
  Shared sh;
  sh.threads = opts.threads;
  LimitExactness le;

  struct Entry {
    int id;
    const char* name;
    std::function<Check()> run;
  };
  std::vector<Entry> entries = {
      {1, "limit-spectrum exactness (H=0.4, eta in {0, pi/2, pi}, O(h^2))",
       [&] {
         if (!le.computed) le = run_limit_exactness();
         return criterion_limit_exactness(le);
       }},
      {2, "degenerate multiplicity at (pi, pi^2)",
       [&] {
         if (!le.computed) le = run_limit_exactness();
         return criterion_degenerate_pair(le);
       }},
      {3, "cell constants consistency and frozen regression",
       [&] { return criterion_cell_constants(sh); }},
      {4, "gap gamma_1 width law vs 4 pi^2 (m1 + |w|/2H)",
       [&] { return criterion_gap_law(sh, 1); }},
      {5, "gap gamma_2 width law vs 16 pi^2 (m1 + |w|/2H) and the 4x ratio",
       [&] { return criterion_gap_law(sh, 2); }},
      {6, "node-splitting profile: fitted C stable under eps halving",
       [&] { return criterion_node_profile(sh); }},
      {7, "uniform O(eps) closeness to the three limit branches",
       [&] { return criterion_linear_closeness(sh); }},
      {8, "residual certificate soundness, 100 random trials",
       [&] { return criterion_certificate(sh); }},
      {9, "eigenvalue-count boxes: K1 and K4 bounds at eps=1/16",
       [&] { return criterion_box_counts(sh); }},
      {10, "symmetry invariants: even spectrum, m2 sign flip",
       [&] { return criterion_symmetry(sh); }},
  };

  std::vector<CriterionResult> results;
  for (const auto& e : entries) {
    if (!opts.only.empty() &&
        std::find(opts.only.begin(), opts.only.end(), e.id) == opts.only.end())
      continue;
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    auto t0 = Clock::now();
    try {
      Check c = e.run();
      r.pass = c.pass;
      r.detail = c.detail.str();
    } catch (const std::exception& err) {
      r.pass = false;
      r.detail = std::string("exception: ") + err.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    log << "[" << std::setw(2) << r.id << "] " << (r.pass ? "PASS" : "FAIL") << " " << r.name
        << " | " << r.detail << " | " << std::setprecision(3) << r.seconds << " s"
        << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return !results.empty();
}

}  // namespace stripgap
