#include "stripgap/cell_constants.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace stripgap {

namespace {

// Trace mean (1/H) * integral of the field along the left or right side.
double trace_mean(const PeriodicMesh& mesh, const Eigen::VectorXd& values, EdgeTag side) {
  double integral = 0.0, length = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != side) continue;
    double len = (mesh.vertices[e.v0] - mesh.vertices[e.v1]).norm();
    integral += 0.5 * len * (values[e.v0] + values[e.v1]);
    length += len;
  }
  if (length <= 0) throw SolverError("empty trace side in far-field extraction");
  return integral / length;
}

// Integral over the hole boundary of f(x) * nu_component ds, with f given per
// vertex and the normal outward w.r.t. the fluid domain (into the hole).
double hole_boundary_integral(const PeriodicMesh& mesh, const Eigen::VectorXd& vertex_values,
                              int nu_component, bool add_x1) {
  std::map<uint64_t, int> owner;
  auto ek = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
  };
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) {
      uint64_t k = ek(mesh.triangles[t][i], mesh.triangles[t][(i + 1) % 3]);
      auto it = owner.find(k);
      if (it == owner.end())
        owner[k] = t;
      else
        it->second = -1;
    }
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  double total = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != EdgeTag::hole) continue;
    const Vec2& a = mesh.vertices[e.v0];
    const Vec2& b = mesh.vertices[e.v1];
    int t = owner[ek(e.v0, e.v1)];
    Vec2 third = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
      int v = mesh.triangles[t][i];
      if (v != e.v0 && v != e.v1) third = mesh.vertices[v];
    }
    Vec2 tangent = b - a;
    double len = tangent.norm();
    Vec2 nrm(tangent.y(), -tangent.x());
    nrm /= len;
    if (nrm.dot(third - 0.5 * (a + b)) > 0) nrm = -nrm;
    double fa = vertex_values[e.v0] + (add_x1 ? a.x() : 0.0);
    double fb = vertex_values[e.v1] + (add_x1 ? b.x() : 0.0);
    for (double s : gp) total += 0.5 * len * ((1.0 - s) * fa + s * fb) * nrm[nu_component];
  }
  return total;
}

}  // namespace

StripSolver::StripSolver(const StripSpec& spec, double target_h, double grading)
    : spec_(spec) {
  spec_.T = spec.truncation();
  mesh_ = std::make_shared<PeriodicMesh>(mesh_strip(spec_, target_h, grading));
  factorize();
}

StripSolver::StripSolver(StripSpec spec, PeriodicMesh mesh) : spec_(std::move(spec)) {
  spec_.T = spec_.truncation();
  mesh_ = std::make_shared<PeriodicMesh>(std::move(mesh));
  factorize();
}

void StripSolver::factorize() {
  base_ = assemble_real_neumann(*mesh_, NeumannData::minus_nu1);
  const int n = base_.ndof;
  Eigen::VectorXd c = base_.M * Eigen::VectorXd::Ones(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(base_.K.nonZeros() + 2 * n);
  for (int k = 0; k < base_.K.outerSize(); ++k)
    for (SpMatR::InnerIterator it(base_.K, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, n, c[i]);
    trips.emplace_back(n, i, c[i]);
  }
  SpMatR A(n + 1, n + 1);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  lu_ = std::make_shared<Eigen::SparseLU<SpMatR>>();
  lu_->compute(A);
  if (lu_->info() != Eigen::Success)
    throw SolverError("factorization of the strip Neumann system failed");
}

CorrectorField StripSolver::solve(NeumannData data) const {
  RealSystem sys = assemble_real_neumann(*mesh_, data);
  const int n = sys.ndof;
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = sys.F;
  rhs[n] = 0.0;
  Eigen::VectorXd sol = lu_->solve(rhs);
  Eigen::VectorXd reduced = sol.head(n);

  CorrectorField field;
  field.mesh = mesh_;
  field.values = expand_to_vertices(*mesh_, sys.dof_map, reduced);
  field.energy = reduced.dot(base_.K * reduced);
  field.C_plus = trace_mean(*mesh_, field.values, EdgeTag::right);
  field.C_minus = trace_mean(*mesh_, field.values, EdgeTag::left);
  return field;
}

CorrectorField solve_W1(const StripSpec& spec, double target_h, double grading) {
  return StripSolver(spec, target_h, grading).solve(NeumannData::minus_nu1);
}

CorrectorField solve_W2(const StripSpec& spec, double target_h, double grading) {
  return StripSolver(spec, target_h, grading).solve(NeumannData::minus_nu2);
}

DecayEstimate fit_decay(const PeriodicMesh& mesh, const Eigen::VectorXd& vertex_values,
                        double farfield_const, double x_from, double x_to) {
  const double H = mesh.y1 - mesh.y0;
  DecayEstimate est;
  est.expected_rate = -2.0 * M_PI / H;
  if (!(x_to > x_from)) throw SolverError("decay window is empty");

  const int ncol = 10;
  if (x_to - x_from < 4 * mesh.h) throw SolverError("insufficient columns in the decay window");

  // bucket triangles by x-range for cheap column sampling
  struct Hit {
    int tri;
    double xmin, xmax;
  };
  std::vector<Hit> hits;
  hits.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tv = mesh.triangles[t];
    double xmin = std::min({mesh.vertices[tv[0]].x(), mesh.vertices[tv[1]].x(),
                            mesh.vertices[tv[2]].x()});
    double xmax = std::max({mesh.vertices[tv[0]].x(), mesh.vertices[tv[1]].x(),
                            mesh.vertices[tv[2]].x()});
    if (xmax < x_from - mesh.h || xmin > x_to + mesh.h) continue;
    hits.push_back({t, xmin, xmax});
  }

  auto sample = [&](const Vec2& q) -> double {
    for (const auto& hit : hits) {
      if (q.x() < hit.xmin - 1e-12 || q.x() > hit.xmax + 1e-12) continue;
      const auto& tv = mesh.triangles[hit.tri];
      const Vec2 &a = mesh.vertices[tv[0]], &b = mesh.vertices[tv[1]], &c = mesh.vertices[tv[2]];
      double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
      double l1 = ((q.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (q.y() - a.y())) / det;
      double l2 = ((b.x() - a.x()) * (q.y() - a.y()) - (q.x() - a.x()) * (b.y() - a.y())) / det;
      double l0 = 1.0 - l1 - l2;
      if (l0 < -1e-9 || l1 < -1e-9 || l2 < -1e-9) continue;
      return l0 * vertex_values[tv[0]] + l1 * vertex_values[tv[1]] + l2 * vertex_values[tv[2]];
    }
    return farfield_const;  // outside (numerical gaps); contributes zero
  };

  std::vector<double> xs, lognorms;
  double vmax = 0;
  const int ny = 48;
  for (int i = 0; i < ncol; ++i) {
    double x = x_from + (x_to - x_from) * (i + 0.5) / ncol;
    double s = 0;
    for (int j = 0; j < ny; ++j) {
      double y = mesh.y0 + H * (j + 0.5) / ny;
      double v = sample(Vec2(x, y)) - farfield_const;
      s += v * v;
    }
    double norm = std::sqrt(s / ny * H);
    vmax = std::max(vmax, norm);
    xs.push_back(x);
    lognorms.push_back(norm);
  }
  est.columns = ncol;

  double scale = vertex_values.cwiseAbs().maxCoeff() + std::abs(farfield_const);
  if (vmax <= 1e-12 * std::max(scale, 1.0)) {
    est.rate = 0.0;
    est.ok = false;
    return est;
  }

  // least squares on log of the norms (guard tiny values)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (int i = 0; i < ncol; ++i) {
    if (lognorms[i] <= 1e-14 * std::max(scale, 1.0)) continue;
    double lx = xs[i], ly = std::log(lognorms[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++used;
  }
  if (used < 4) throw SolverError("insufficient columns with signal in the decay window");
  est.rate = (used * sxy - sx * sy) / (used * sxx - sx * sx);
  est.ok = est.rate <= est.expected_rate * (1.0 - 0.3);
  return est;
}

DecayEstimate decay_check(const CorrectorField& field, const StripSpec& spec) {
  const double T = spec.truncation();
  return fit_decay(*field.mesh, field.values, field.C_plus, T / 2.0, T - spec.H);
}

CellConstants extract_cell_constants(const StripSolver& solver, double cross_tol) {
  const StripSpec& spec = solver.spec();
  if (!spec.hole) throw GeometryError("cell constants require a hole of positive area");

  CorrectorField w1 = solver.solve(NeumannData::minus_nu1);
  CorrectorField w2 = solver.solve(NeumannData::minus_nu2);

  CellConstants cc;
  cc.H = spec.H;
  cc.area_omega = polygon_area(spec.hole->boundary_polygon(spec.H));

  cc.diag.T = spec.truncation();
  cc.diag.h = solver.mesh().h;
  cc.diag.dofs = solver.mesh().num_vertices();
  cc.diag.m1_energy = (w1.energy + cc.area_omega) / (2.0 * spec.H);
  cc.diag.m1_farfield = 0.5 * (w1.C_plus - w1.C_minus);
  cc.diag.m2_farfield = 0.5 * (w2.C_plus - w2.C_minus);
  // integral representation: int_{d omega} W^1 nu_2 ds = -2 H m2, W^1 = xi1 + W1_0
  cc.diag.m2_boundary_integral =
      -hole_boundary_integral(solver.mesh(), w1.values, 1, true) / (2.0 * spec.H);
  if (cc.diag.T - spec.H > cc.diag.T / 2.0 + 4 * solver.mesh().h) {
    cc.diag.decay = decay_check(w1, spec);
  } else {
    cc.diag.decay = {};  // truncation too short for the diagnostic window
  }

  cc.m1 = cc.diag.m1_energy;
  cc.m2 = cc.diag.m2_boundary_integral;
  cc.M_Xi = w2.energy;

  cc.diag.cross_rel_diff =
      std::abs(cc.diag.m1_energy - cc.diag.m1_farfield) / std::max(cc.diag.m1_energy, 1e-300);
  if (cc.diag.cross_rel_diff > cross_tol) {
    std::ostringstream msg;
    msg << "m1 extraction routes disagree by " << cc.diag.cross_rel_diff * 100
        << "% (energy " << cc.diag.m1_energy << " vs far-field " << cc.diag.m1_farfield
        << "); increase T or decrease target_h";
    throw ResolutionError(msg.str());
  }
  return cc;
}

CellConstants compute_cell_constants(const StripSpec& spec, const CellConstantsOptions& opts) {
  StripSolver solver(spec, opts.target_h, opts.grading);
  return extract_cell_constants(solver, opts.cross_tol);
}

}  // namespace stripgap
