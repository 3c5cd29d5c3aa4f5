#include <cmath>

#include "doctest.h"
#include "stripgap/limit_model.hpp"

using namespace stripgap;

namespace {
const double pi = M_PI;
const double pi2 = pi * pi;

// independent brute-force oracle over a wide fixed window
std::vector<double> brute_force(double H, double eta, int count) {
  std::vector<double> vals;
  for (int j = -10; j <= 10; ++j)
    for (int k = 0; k <= 10; ++k)
      vals.push_back(std::pow(eta + 2 * pi * j, 2) + pi2 * k * k / (H * H));
  std::sort(vals.begin(), vals.end());
  vals.resize(count);
  return vals;
}
}  // namespace

TEST_CASE("limit eigenvalues H=0.4 eta=0 count=5") {
  auto v = limit_eigenvalues(0.4, 0.0, 5);
  REQUIRE(v.size() == 5);
  CHECK(v[0].value == doctest::Approx(0.0));
  CHECK(v[1].value == doctest::Approx(4 * pi2));
  CHECK(v[2].value == doctest::Approx(4 * pi2));
  CHECK(v[3].value == doctest::Approx(6.25 * pi2));
  CHECK(v[4].value == doctest::Approx(10.25 * pi2));
  CHECK(v[0].j == 0);
  CHECK(v[0].k == 0);
  CHECK(v[3].k == 1);
  CHECK(std::abs(v[1].j) == 1);
}

TEST_CASE("limit eigenvalues H=0.4 eta=pi double point") {
  auto v = limit_eigenvalues(0.4, pi, 2);
  CHECK(v[0].value == doctest::Approx(pi2));
  CHECK(v[1].value == doctest::Approx(pi2));
  bool has_zero = (v[0].j == 0) || (v[1].j == 0);
  bool has_minus = (v[0].j == -1) || (v[1].j == -1);
  CHECK(has_zero);
  CHECK(has_minus);
}

TEST_CASE("limit eigenvalues count=1 is eta^2") {
  for (double H : {0.3, 0.7, 1.4}) {
    for (double eta : {-2.0, 0.0, 1.1}) {
      auto v = limit_eigenvalues(H, eta, 1);
      CHECK(v[0].value == doctest::Approx(eta * eta));
      CHECK(v[0].j == 0);
      CHECK(v[0].k == 0);
    }
  }
}

TEST_CASE("limit eigenvalues agree with brute-force enumeration") {
  for (double H : {0.25, 0.4, 0.77, 1.3}) {
    for (double eta : {-pi, -1.0, 0.0, 0.4, pi}) {
      auto got = limit_eigenvalues(H, eta, 20);
      auto expect = brute_force(H, eta, 20);
      for (int i = 0; i < 20; ++i)
        CHECK(got[i].value == doctest::Approx(expect[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("sequence stability: count extension preserves the prefix") {
  auto a = limit_eigenvalues(0.4, 0.7, 8);
  auto b = limit_eigenvalues(0.4, 0.7, 9);
  for (int i = 0; i < 8; ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].j == b[i].j);
    CHECK(a[i].k == b[i].k);
  }
  for (int i = 1; i < 8; ++i) CHECK(a[i].value >= a[i - 1].value);
}

TEST_CASE("symmetry in eta") {
  auto a = limit_eigenvalues(0.55, 0.9, 12);
  auto b = limit_eigenvalues(0.55, -0.9, 12);
  for (int i = 0; i < 12; ++i) CHECK(a[i].value == doctest::Approx(b[i].value).epsilon(1e-14));
}

TEST_CASE("find_nodes H=0.4: theorem nodes present and classified") {
  auto nodes = find_nodes(0.4, 5 * pi2);
  bool found_circ = false, found_square_p = false, found_square_m = false;
  for (const auto& n : nodes) {
    CHECK(n.lambda_star >= pi2 - 1e-9);  // no node below pi^2
    // node invariant: both branches pass through the node value
    for (const auto& [j, k] : n.branches) {
      double v = std::pow(n.eta_star + 2 * pi * j, 2) + pi2 * k * k / (0.4 * 0.4);
      CHECK(std::abs(v - n.lambda_star) <= 1e-12 * std::max(1.0, n.lambda_star));
    }
    if (std::abs(n.lambda_star - 4 * pi2) < 1e-9 && std::abs(n.eta_star) < 1e-12) {
      found_circ = true;
      CHECK(n.status == NodeStatus::opens_gap);
      CHECK(std::abs(n.branches[0].first) == 1);
      CHECK(std::abs(n.branches[1].first) == 1);
    }
    if (std::abs(n.lambda_star - pi2) < 1e-9 && std::abs(n.eta_star - pi) < 1e-12) {
      found_square_p = true;
      CHECK(n.status == NodeStatus::opens_gap);
    }
    if (std::abs(n.lambda_star - pi2) < 1e-9 && std::abs(n.eta_star + pi) < 1e-12) {
      found_square_m = true;
      CHECK(n.status == NodeStatus::opens_gap);
    }
  }
  CHECK(found_circ);
  CHECK(found_square_p);
  CHECK(found_square_m);
}

TEST_CASE("find_nodes H=0.7: circle node shaded, diamond nodes protected") {
  auto nodes = find_nodes(0.7, 5 * pi2);
  bool circ_shaded = false, any_protected = false;
  for (const auto& n : nodes) {
    if (std::abs(n.lambda_star - 4 * pi2) < 1e-9 && std::abs(n.eta_star) < 1e-12)
      circ_shaded = (n.status == NodeStatus::shaded);
    if (n.status == NodeStatus::symmetry_protected) any_protected = true;
  }
  CHECK(circ_shaded);
  CHECK(any_protected);
}

TEST_CASE("find_nodes H=1.2: square node shaded") {
  auto nodes = find_nodes(1.2, 2 * pi2);
  bool square_shaded = false;
  for (const auto& n : nodes)
    if (std::abs(n.lambda_star - pi2) < 1e-9 && std::abs(std::abs(n.eta_star) - pi) < 1e-12)
      square_shaded = (n.status == NodeStatus::shaded);
  CHECK(square_shaded);
}

TEST_CASE("exceptional width H=1/2 flags degenerate nodes") {
  CHECK(is_exceptional_height(0.5));
  CHECK(is_exceptional_height(1.0 / std::sqrt(3.0)));
  CHECK(!is_exceptional_height(0.4));
  auto nodes = find_nodes(0.5, 6 * pi2);
  bool any_exceptional = false;
  for (const auto& n : nodes) any_exceptional |= (n.status == NodeStatus::exceptional_H);
  CHECK(any_exceptional);
}

TEST_CASE("count box constants at H=0.4") {
  auto box = count_box_constants(0.4, 0.5, 0.5);
  REQUIRE(box.K1.has_value());
  REQUIRE(box.K2.has_value());
  REQUIRE(box.K3.has_value());
  REQUIRE(box.K4.has_value());
  CHECK(*box.K1 == doctest::Approx(pi));           // min(pi, 2.625 pi^2)
  CHECK(*box.K2 == doctest::Approx(2 * pi2));      // min(2pi^2, 3.5 pi^2)
  CHECK(*box.K3 == doctest::Approx(2 * pi));       // min(2pi, 2.25 pi^2)
  CHECK(*box.K4 == doctest::Approx(1.125 * pi2));  // min(4pi^2, 1.125 pi^2)
}

TEST_CASE("count box constants out of range entries absent") {
  auto box = count_box_constants(0.7, 0.5, 0.5);
  CHECK(box.K1.has_value());
  CHECK(!box.K3.has_value());
  auto box2 = count_box_constants(1.5, 0.5, 0.5);
  CHECK(!box2.K1.has_value());
}
