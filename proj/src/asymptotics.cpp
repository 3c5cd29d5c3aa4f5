#include "stripgap/asymptotics.hpp"

#include <cmath>
#include <sstream>

namespace stripgap {

namespace {
constexpr double kPi = M_PI;

// the 2x2 node system is [[A + c psi, B], [B, A - c psi]]; eigenvector for
// eigenvalue lam is (B, lam - A - c psi) up to normalization
Eigen::Vector2d node_eigvec(double A, double B, double c, double psi, double lam) {
  Eigen::Vector2d v(B, lam - A - c * psi);
  double n = v.norm();
  if (n < 1e-300) return Eigen::Vector2d(1.0, 0.0);
  return v / n;
}
}  // namespace

std::string node_id_name(NodeId id) { return id == NodeId::circ ? "circ" : "square"; }

double node_eta(NodeId id) { return id == NodeId::circ ? 0.0 : kPi; }

double node_lambda(NodeId id) { return id == NodeId::circ ? 4.0 * kPi * kPi : kPi * kPi; }

double correction_simple(const CellConstants& cc, int j, int k, double eta) {
  const double H = cc.H;
  double transversal = (kPi * kPi * k * k / (H * H)) * (cc.M_Xi / (2.0 * H));
  double a = eta + 2.0 * kPi * j;
  double longitudinal = a * a * (cc.m1 - cc.area_omega / (2.0 * H));
  return -2.0 * (transversal + longitudinal);
}

NodeCorrection correction_node(const CellConstants& cc, NodeId node, double psi) {
  const double H = cc.H;
  const double w2h = cc.area_omega / (2.0 * H);

  NodeCorrection out;
  out.node = node;
  out.psi = psi;
  double A, B, c;
  if (node == NodeId::circ) {
    A = 8.0 * kPi * kPi * (w2h - cc.m1);
    B = 8.0 * kPi * kPi * (w2h + cc.m1);
    c = 4.0 * kPi;
  } else {
    A = 2.0 * kPi * kPi * (w2h - cc.m1);
    B = 2.0 * kPi * kPi * (w2h + cc.m1);
    c = 2.0 * kPi;
  }
  double rad = std::sqrt(B * B + c * c * psi * psi);
  out.lambda_prime_minus = A - rad;
  out.lambda_prime_plus = A + rad;
  out.eigvec_minus = node_eigvec(A, B, c, psi, out.lambda_prime_minus);
  out.eigvec_plus = node_eigvec(A, B, c, psi, out.lambda_prime_plus);
  return out;
}

GapPredictions predicted_gaps(const CellConstants& cc, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1]");
  const double H = cc.H;
  const double pi2 = kPi * kPi;
  const double woverH = cc.area_omega / H;

  GapPredictions out;
  if (H < 1.0) {
    GapPrediction g;
    g.p = 1;
    g.lower_edge_const = pi2;
    g.lower_edge_slope = -4.0 * pi2 * cc.m1;
    g.upper_edge_const = pi2;
    g.upper_edge_slope = 2.0 * pi2 * woverH;
    g.width_slope = 4.0 * pi2 * (cc.m1 + 0.5 * woverH);
    out.gaps.push_back(g);
  } else {
    out.omitted.push_back("p=1 requires H in (0,1)");
  }
  if (H < 0.5) {
    GapPrediction g;
    g.p = 2;
    g.lower_edge_const = 4.0 * pi2;
    g.lower_edge_slope = -16.0 * pi2 * cc.m1;
    g.upper_edge_const = 4.0 * pi2;
    g.upper_edge_slope = 8.0 * pi2 * woverH;
    g.width_slope = 16.0 * pi2 * (cc.m1 + 0.5 * woverH);
    out.gaps.push_back(g);
  } else {
    std::ostringstream msg;
    msg << "p=2 requires H in (0,1/2), got H = " << H;
    out.omitted.push_back(msg.str());
  }
  return out;
}

}  // namespace stripgap
