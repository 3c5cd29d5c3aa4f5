#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace stripgap {

/// One eigenvalue of the unperforated (limit) cell problem:
/// value = (eta + 2 pi j)^2 + pi^2 k^2 / H^2.
struct LimitEigen {
  int j = 0;
  int k = 0;
  double eta = 0.0;
  double value = 0.0;
};

/// The `count` smallest limit eigenvalues at the given Floquet parameter,
/// ascending, with (j, k) labels and multiplicity.
std::vector<LimitEigen> limit_eigenvalues(double H, double eta, int count);

enum class NodeStatus {
  opens_gap,
  shaded,
  symmetry_protected,
  same_slope_no_gap,
  exceptional_H,
};

std::string node_status_name(NodeStatus s);

/// Crossing point of two (or, at exceptional widths, more) limit dispersion
/// branches. `rule` records which catalogue entry classified it.
struct Node {
  double eta_star = 0.0;
  double lambda_star = 0.0;
  std::array<std::pair<int, int>, 2> branches{};  // (j, k) labels
  int multiplicity = 2;                           // branches through the point
  NodeStatus status = NodeStatus::shaded;
  std::string rule;
};

/// All crossings of distinct branches with value <= lambda_max, classified.
/// Widths within 1e-6 of {1/2, 1/sqrt(3), 1/sqrt(8), 1/sqrt(5), 1} are
/// degenerate; triple crossings there get status exceptional_H.
std::vector<Node> find_nodes(double H, double lambda_max);

bool is_exceptional_height(double H, double tol = 1e-6);

/// Eigenvalue-count box constants; K1/K2 need H in (0,1), K3/K4 need
/// H in (0,1/2); out-of-range entries are absent.
struct BoxConstants {
  std::optional<double> K1, K2, K3, K4;
};
BoxConstants count_box_constants(double H, double delta1, double delta3);

}  // namespace stripgap
