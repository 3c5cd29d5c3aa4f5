#include <cmath>

#include "doctest.h"
#include "stripgap/asymptotics.hpp"

using namespace stripgap;

namespace {
const double pi = M_PI;
const double pi2 = pi * pi;

CellConstants sample_constants(double m1 = 0.0577, double MXi = 0.0154, double omega = -1.0,
                               double H = 0.4) {
  CellConstants cc;
  cc.H = H;
  cc.m1 = m1;
  cc.M_Xi = MXi;
  cc.area_omega = omega > 0 ? omega : M_PI * 0.08 * 0.08;
  cc.m2 = 0;
  return cc;
}
}  // namespace

TEST_CASE("correction_simple: trivial zeros and signs") {
  CellConstants cc = sample_constants();
  CHECK(correction_simple(cc, 0, 0, 0.0) == 0.0);
  // k=0: pure longitudinal term
  for (int j : {-1, 0, 1, 2}) {
    for (double eta : {-2.0, 0.3, 1.0}) {
      double expect = -2.0 * std::pow(eta + 2 * pi * j, 2) * (cc.m1 - cc.area_omega / (2 * cc.H));
      CHECK(correction_simple(cc, j, 0, eta) == doctest::Approx(expect).epsilon(1e-14));
    }
  }
  // j=0, k=1, eta=0: -pi^2 M_Xi / H^3
  CHECK(correction_simple(cc, 0, 1, 0.0) ==
        doctest::Approx(-pi2 * cc.M_Xi / std::pow(cc.H, 3)).epsilon(1e-14));
  // always <= 0 (m1 >= |omega|/2H for the energy formula)
  for (int j : {-2, 0, 3})
    for (int k : {0, 1, 2})
      for (double eta : {-3.0, 0.0, 2.2}) CHECK(correction_simple(cc, j, k, eta) <= 1e-15);
}

TEST_CASE("correction_node at psi=0: radical collapses to the paper bounds") {
  CellConstants cc = sample_constants();
  double w2h = cc.area_omega / (2 * cc.H);

  NodeCorrection circ = correction_node(cc, NodeId::circ, 0.0);
  CHECK(circ.lambda_prime_plus == doctest::Approx(8 * pi2 * 2 * w2h).epsilon(1e-12));
  CHECK(circ.lambda_prime_minus == doctest::Approx(-16 * pi2 * cc.m1).epsilon(1e-12));

  NodeCorrection square = correction_node(cc, NodeId::square, 0.0);
  CHECK(square.lambda_prime_plus == doctest::Approx(2 * pi2 * 2 * w2h).epsilon(1e-12));
  CHECK(square.lambda_prime_minus == doctest::Approx(-4 * pi2 * cc.m1).epsilon(1e-12));
}

TEST_CASE("correction_node split width formula") {
  CellConstants cc = sample_constants();
  double s = cc.m1 + cc.area_omega / (2 * cc.H);
  for (double psi : {-6.0, -1.0, 0.0, 0.5, 3.0, 8.0}) {
    NodeCorrection c = correction_node(cc, NodeId::circ, psi);
    double width = c.lambda_prime_plus - c.lambda_prime_minus;
    CHECK(width == doctest::Approx(8 * pi * std::sqrt(4 * pi2 * s * s + psi * psi)).epsilon(1e-12));
    CHECK(c.lambda_prime_plus > c.lambda_prime_minus);
    // paper bounds hold for every psi
    CHECK(c.lambda_prime_minus <= -16 * pi2 * cc.m1 + 1e-12);
    CHECK(c.lambda_prime_plus >= 8 * pi2 * cc.area_omega / cc.H - 1e-12);
  }
}

TEST_CASE("node corrections: monotone in |psi|, eigenvectors swap under psi -> -psi") {
  CellConstants cc = sample_constants();
  for (NodeId id : {NodeId::circ, NodeId::square}) {
    double prev_plus = correction_node(cc, id, 0.0).lambda_prime_plus;
    double prev_minus = correction_node(cc, id, 0.0).lambda_prime_minus;
    for (double psi : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      NodeCorrection c = correction_node(cc, id, psi);
      NodeCorrection cm = correction_node(cc, id, -psi);
      CHECK(c.lambda_prime_plus > prev_plus);
      CHECK(c.lambda_prime_minus < prev_minus);
      prev_plus = c.lambda_prime_plus;
      prev_minus = c.lambda_prime_minus;
      // evenness
      CHECK(c.lambda_prime_plus == doctest::Approx(cm.lambda_prime_plus).epsilon(1e-13));
      CHECK(c.lambda_prime_minus == doctest::Approx(cm.lambda_prime_minus).epsilon(1e-13));
      // component swap (up to sign convention of the eigenvector)
      Eigen::Vector2d swapped(c.eigvec_plus[1], c.eigvec_plus[0]);
      double match = std::min((cm.eigvec_plus - swapped).norm(), (cm.eigvec_plus + swapped).norm());
      CHECK(match < 1e-10);
    }
  }
}

TEST_CASE("node eigenvectors solve the 2x2 system") {
  CellConstants cc = sample_constants();
  double w2h = cc.area_omega / (2 * cc.H);
  double A = 8 * pi2 * (w2h - cc.m1), B = 8 * pi2 * (w2h + cc.m1), c4 = 4 * pi;
  for (double psi : {-2.0, 0.7}) {
    NodeCorrection c = correction_node(cc, NodeId::circ, psi);
    Eigen::Matrix2d K;
    K << A + c4 * psi, B, B, A - c4 * psi;
    CHECK((K * c.eigvec_plus - c.lambda_prime_plus * c.eigvec_plus).norm() < 1e-9);
    CHECK((K * c.eigvec_minus - c.lambda_prime_minus * c.eigvec_minus).norm() < 1e-9);
    CHECK(c.eigvec_plus.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("predicted gaps: formulas, limits, slope ratio") {
  CellConstants cc = sample_constants();
  GapPredictions pred = predicted_gaps(cc, 0.125);
  REQUIRE(pred.gaps.size() == 2);
  const GapPrediction& g1 = pred.gaps[0];
  const GapPrediction& g2 = pred.gaps[1];
  double w2h = cc.area_omega / (2 * cc.H);
  CHECK(g1.width_slope == doctest::Approx(4 * pi2 * (cc.m1 + w2h)).epsilon(1e-13));
  CHECK(g2.width_slope == doctest::Approx(16 * pi2 * (cc.m1 + w2h)).epsilon(1e-13));
  CHECK(g2.width_slope == doctest::Approx(4.0 * g1.width_slope).epsilon(1e-14));
  // eps -> 0: edges converge to the node values
  CHECK(g1.lower_edge(0.0) == doctest::Approx(pi2));
  CHECK(g1.upper_edge(0.0) == doctest::Approx(pi2));
  CHECK(g2.lower_edge(0.0) == doctest::Approx(4 * pi2));
  // stated-input arithmetic: m1 = |w|/2H = a gives slope 8 pi^2 a
  CellConstants eq = sample_constants(0.0125, 0.01, 0.0125 * 2 * 0.4);
  GapPredictions p2 = predicted_gaps(eq, 0.1);
  CHECK(p2.gaps[0].width_slope == doctest::Approx(8 * pi2 * 0.0125).epsilon(1e-12));
  // m1 = 0.05, |w|/2H = 0.0125, eps = 0.1: predicted width = eps * 4 pi^2 * 0.0625
  CellConstants mix = sample_constants(0.05, 0.01, 0.0125 * 2 * 0.4);
  GapPredictions p3 = predicted_gaps(mix, 0.1);
  CHECK(p3.gaps[0].width_slope * 0.1 == doctest::Approx(0.1 * 4 * pi2 * 0.0625).epsilon(1e-12));
}

TEST_CASE("predicted gaps omitted outside the theorem ranges") {
  CellConstants wide = sample_constants(0.05, 0.01, 0.01, 0.7);
  GapPredictions pred = predicted_gaps(wide, 0.1);
  REQUIRE(pred.gaps.size() == 1);
  CHECK(pred.gaps[0].p == 1);
  REQUIRE(pred.omitted.size() == 1);
  CHECK(pred.omitted[0].find("H in (0,1/2)") != std::string::npos);

  CellConstants wider = sample_constants(0.05, 0.01, 0.01, 1.3);
  GapPredictions pred2 = predicted_gaps(wider, 0.1);
  CHECK(pred2.gaps.empty());
  CHECK(pred2.omitted.size() == 2);
}
