#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "stripgap/cell_constants.hpp"

namespace stripgap {

/// The two nodes with justified splitting: circ = (0, 4 pi^2),
/// square = (+-pi, pi^2).
enum class NodeId { circ, square };

std::string node_id_name(NodeId id);
double node_eta(NodeId id);     // 0 or pi (the +pi representative)
double node_lambda(NodeId id);  // 4 pi^2 or pi^2

/// First-order correction of a simple limit eigenvalue (j, k) at eta:
/// Lambda' = -2 [ (pi^2 k^2 / H^2) * M(Xi) / (2H)
///              + (eta + 2 pi j)^2 * (m1 - |omega| / (2H)) ],  always <= 0.
double correction_simple(const CellConstants& cc, int j, int k, double eta);

/// Split corrections at a node in the fast Floquet variable psi:
/// circ:   Lambda'_{+-} = 4 pi [ 2 pi (|w|/2H - m1) +- sqrt(4 pi^2 (m1 + |w|/2H)^2 + psi^2) ]
/// square: Lambda'_{+-} = 2 pi [   pi (|w|/2H - m1) +- sqrt(  pi^2 (m1 + |w|/2H)^2 + psi^2) ]
struct NodeCorrection {
  NodeId node = NodeId::circ;
  double psi = 0.0;
  double lambda_prime_minus = 0.0;
  double lambda_prime_plus = 0.0;
  Eigen::Vector2d eigvec_minus = Eigen::Vector2d::Zero();  // (a_+, a_-), unit
  Eigen::Vector2d eigvec_plus = Eigen::Vector2d::Zero();
};
NodeCorrection correction_node(const CellConstants& cc, NodeId node, double psi);

/// First-order band-edge and gap-width predictions.
struct GapPrediction {
  int p = 0;  // gap index
  double lower_edge_const = 0.0, lower_edge_slope = 0.0;  // value = const + slope*eps
  double upper_edge_const = 0.0, upper_edge_slope = 0.0;
  double width_slope = 0.0;  // gap width >= width_slope * eps + O(eps^2)
  double lower_edge(double eps) const { return lower_edge_const + lower_edge_slope * eps; }
  double upper_edge(double eps) const { return upper_edge_const + upper_edge_slope * eps; }
};

struct GapPredictions {
  std::vector<GapPrediction> gaps;
  std::vector<std::string> omitted;  // reasons for absent entries
};

/// p = 1 for H in (0,1); p = 2 additionally for H in (0,1/2).
GapPredictions predicted_gaps(const CellConstants& cc, double epsilon);

}  // namespace stripgap
