#pragma once

#include "stripgap/asymptotics.hpp"
#include "stripgap/fem.hpp"
#include "stripgap/limit_model.hpp"

namespace stripgap {

struct SweepOptions {
  int eta_samples = 33;    // uniform grid size, endpoints included
  int bands = 3;
  double mesh_h = 0.0;     // <= 0: auto from epsilon and hole size
  double psi_max = 8.0;    // node window |psi| <= psi_max
  int window_samples = 17;
  int extra_eigen = 2;     // eigenvalues computed beyond `bands`
  EigenOptions eig;
  int threads = 0;         // 0 = hardware concurrency
  bool edge_refine = true; // h vs h/2 Richardson at the node etas
};

struct DispersionDataset {
  std::vector<double> eta_grid;               // sorted, includes -pi and pi
  std::vector<std::vector<double>> values;    // per eta, ascending eigenvalues
  double epsilon = 1.0;
  double H = 0.0;
  double mesh_h = 0.0;
  int dofs = 0;
  double eig_error_estimate = 0.0;            // |lambda_h - lambda_{h/2}| / 3 at edges
  std::vector<double> node_etas;              // refinement window centers

  int bands() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
  /// Index of the grid point closest to eta (must be within tol).
  int index_of(double eta, double tol = 1e-9) const;
};

/// Eta sweep on a shared mesh: uniform grid plus fast-variable clusters
/// eta* + eps*psi around each limit-model node.
DispersionDataset sweep(const CellSpec& spec, const SweepOptions& opts = {});

struct Band {
  int p = 0;
  double lo = 0, hi = 0;
  double arg_lo = 0, arg_hi = 0;  // eta of the extrema
};
struct Gap {
  int p = 0;
  double lo = 0, hi = 0;  // (max band p, min band p+1)
  bool open = false;
  double width() const { return hi - lo; }
};
struct BandsGaps {
  std::vector<Band> bands;
  std::vector<Gap> gaps;
  double gap_tolerance = 0;
};

/// Band extrema over the grid with parabolic refinement through the three
/// samples nearest each extremum; a gap counts as open only if it exceeds
/// gap_tolerance (default: 3x the eigenvalue error estimate).
BandsGaps extract_bands_gaps(const DispersionDataset& ds, int count, double gap_tolerance = -1.0);

struct NodeWindowComparison {
  NodeId id = NodeId::square;
  double eta_star = 0, lambda_star = 0;
  std::vector<double> psi;
  std::vector<double> residual_lower, residual_upper;  // data - (node + eps*Lambda'_{-+})
  double fit_C = 0;           // max |residual| / eps^2
  double measured_width = 0;  // gap width from the dataset
  double predicted_slope = 0; // first-order width slope
};

struct AwayFromNodeComparison {
  double max_residual = 0;           // max over grid of branch distance
  double max_residual_over_eps = 0;
  int ambiguous_points = 0;          // two limit branches closer than 2 C0 eps
};

struct ComparisonReport {
  std::vector<NodeWindowComparison> nodes;
  AwayFromNodeComparison away;
};

ComparisonReport compare_asymptotics(const DispersionDataset& ds, const CellConstants& cc,
                                     const GapPredictions& pred);

/// Max relative mismatch between Lambda_p(eta) and Lambda_p(-eta) over the
/// grid (includes the +-pi periodicity identification).
double sweep_symmetry_defect(const DispersionDataset& ds);

}  // namespace stripgap
