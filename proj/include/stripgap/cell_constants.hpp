#pragma once

#include <Eigen/SparseLU>
#include <memory>

#include "stripgap/fem.hpp"

namespace stripgap {

/// Truncation/resolution failure: the two extraction routes disagree.
struct ResolutionError : SolverError {
  using SolverError::SolverError;
};

/// A solved corrector on the truncated strip Xi_T.
struct CorrectorField {
  std::shared_ptr<const PeriodicMesh> mesh;
  Eigen::VectorXd values;  // per mesh vertex, mean-zero
  double C_plus = 0.0;     // trace mean at xi1 = +T
  double C_minus = 0.0;    // trace mean at xi1 = -T
  double energy = 0.0;     // || grad ||^2 over Xi_T
};

/// Shared mesh + factorization for the strip problems; W1 and W2 reuse both.
class StripSolver {
 public:
  StripSolver(const StripSpec& spec, double target_h, double grading = 1.25);
  StripSolver(StripSpec spec, PeriodicMesh mesh);

  CorrectorField solve(NeumannData data) const;
  const PeriodicMesh& mesh() const { return *mesh_; }
  const StripSpec& spec() const { return spec_; }

 private:
  void factorize();
  StripSpec spec_;
  std::shared_ptr<const PeriodicMesh> mesh_;
  RealSystem base_;
  std::shared_ptr<Eigen::SparseLU<SpMatR>> lu_;  // bordered mean-zero system
};

/// W1_0: harmonic corrector with boundary data -nu1; carries m1 via both the
/// energy identity and the far-field mismatch.
CorrectorField solve_W1(const StripSpec& spec, double target_h, double grading = 1.25);
/// W2: boundary data -nu2; carries M(Xi) and m2.
CorrectorField solve_W2(const StripSpec& spec, double target_h, double grading = 1.25);

struct DecayEstimate {
  double rate = 0.0;           // fitted slope of log per-column L2 norm
  double expected_rate = 0.0;  // -2 pi / H
  bool ok = false;
  int columns = 0;
};

/// Least-squares decay rate of (field - far-field constant) over the window
/// xi1 in [T/2, T - H]; ok when the rate is within 30% of -2 pi / H.
DecayEstimate decay_check(const CorrectorField& field, const StripSpec& spec);

/// Low-level fit on arbitrary vertex data (used with synthetic fields too).
DecayEstimate fit_decay(const PeriodicMesh& mesh, const Eigen::VectorXd& vertex_values,
                        double farfield_const, double x_from, double x_to);

struct CellConstants {
  double m1 = 0.0;
  double m2 = 0.0;
  double M_Xi = 0.0;
  double area_omega = 0.0;
  double H = 0.0;
  struct Diagnostics {
    double T = 0.0;
    double h = 0.0;
    int dofs = 0;
    double m1_energy = 0.0;
    double m1_farfield = 0.0;
    double m2_farfield = 0.0;
    double m2_boundary_integral = 0.0;
    double cross_rel_diff = 0.0;
    DecayEstimate decay;
  } diag;
};

struct CellConstantsOptions {
  double target_h = 0.01;
  double grading = 1.25;
  double cross_tol = 0.01;  // relative m1 route disagreement allowed
};

/// Full pipeline: mesh the strip, solve W1 and W2, extract m1 (two ways),
/// m2 (two ways), M(Xi), |omega| (shoelace), run the decay diagnostic.
/// Throws ResolutionError when the m1 routes disagree beyond cross_tol.
CellConstants compute_cell_constants(const StripSpec& spec,
                                     const CellConstantsOptions& opts = {});

/// Same extraction from an existing solver (refinement studies).
CellConstants extract_cell_constants(const StripSolver& solver, double cross_tol = 0.01);

}  // namespace stripgap
