#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <complex>

#include "stripgap/meshgen.hpp"

namespace stripgap {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CapacityError : SolverError {
  using SolverError::SolverError;
};
struct SolvabilityError : SolverError {
  using SolverError::SolverError;
};
struct AssemblyError : SolverError {
  using SolverError::SolverError;
};

using Complex = std::complex<double>;
using SpMatC = Eigen::SparseMatrix<Complex>;
using SpMatR = Eigen::SparseMatrix<double>;

/// Hermitian pencil (K(eta), M) of the Bloch-substituted cell problem:
/// U = e^{i eta x1} V with V periodic, so the form is
///   ((d1 + i eta)V, (d1 + i eta)W) + (d2 V, d2 W)
/// on the mesh with paired DOFs identified. Natural Neumann elsewhere.
struct BlochSystem {
  double eta = 0.0;
  SpMatC K;  // Hermitian, PSD; constants in kernel at eta = 0
  SpMatC M;  // SPD mass
  std::vector<int> dof_map;  // mesh vertex -> reduced dof
  int ndof = 0;
};

/// Precomputes the eta-independent matrices once; K(eta) = K0 + i eta S + eta^2 M
/// with S real antisymmetric. One mesh serves all eta.
class BlochAssembler {
 public:
  explicit BlochAssembler(const PeriodicMesh& mesh);
  BlochSystem assemble(double eta) const;
  int ndof() const { return n_; }
  const std::vector<int>& dof_map() const { return dof_map_; }
  const SpMatR& stiffness() const { return K0_; }
  const SpMatR& mass() const { return M_; }

 private:
  SpMatR K0_, S_, M_;
  std::vector<int> dof_map_;
  int n_ = 0;
};

BlochSystem assemble_bloch(const PeriodicMesh& mesh, double eta);

/// Right-hand-side selector for the real Neumann problems on the strip:
/// boundary data G = -nu1 or G = -nu2 on the hole, or unit volume load F = 1
/// (the latter fails the compatibility check by design and exists for
/// negative testing of it).
enum class NeumannData { minus_nu1, minus_nu2, volume_unit };

struct RealSystem {
  SpMatR K;  // singular, kernel = constants
  SpMatR M;
  Eigen::VectorXd F;
  std::vector<int> dof_map;
  int ndof = 0;
};

RealSystem assemble_real_neumann(const PeriodicMesh& mesh, NeumannData data);

/// Mean-zero solution of K w = F via a Lagrange multiplier on the mass-weighted
/// mean; returns reduced-dof coefficients.
Eigen::VectorXd solve_singular_neumann(const RealSystem& sys);

/// Expand reduced-dof coefficients to per-vertex values (slaves copy masters).
Eigen::VectorXd expand_to_vertices(const PeriodicMesh& mesh, const std::vector<int>& dof_map,
                                   const Eigen::VectorXd& reduced);

struct EigenOptions {
  int dense_ceiling = 4000;      // capacity limit of the dense path
  bool iterative = true;         // shift-invert Lanczos fallback/preference
  int iterative_threshold = 900; // prefer Lanczos above this many DOFs
  double tol = 1e-9;             // relative residual target
  int max_basis = 0;             // 0 = auto
  bool want_vectors = true;
};

struct EigenSeq {
  std::vector<double> values;     // ascending
  Eigen::MatrixXcd vectors;       // reduced dofs x count (empty if not requested)
  std::vector<double> residuals;  // ||K v - lambda M v|| / ||M v||
};

EigenSeq solve_lowest(const BlochSystem& sys, int count, const EigenOptions& opts = {});

/// Discrete almost-eigenvalue certificate: delta such that the pencil has an
/// eigenvalue mu_p = (1 + Lambda_p)^{-1} with |mu_p - mu_trial| <= delta.
/// Computed as ||B u - mu u|| / ||u|| in the (K + M)-inner product with
/// B = (K + M)^{-1} M.
double residual_certificate(const BlochSystem& sys, const Eigen::VectorXcd& trial,
                            double mu_trial);

}  // namespace stripgap
