#include "stripgap/limit_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace stripgap {

namespace {
constexpr double kPi = M_PI;

double branch_value(double H, int j, int k, double eta) {
  double a = eta + 2.0 * kPi * j;
  return a * a + kPi * kPi * k * k / (H * H);
}
}  // namespace

std::vector<LimitEigen> limit_eigenvalues(double H, double eta, int count) {
  if (!(H > 0)) throw std::invalid_argument("H must be positive");
  if (count < 1) throw std::invalid_argument("count must be >= 1");

  int J = 2, K = 2;
  std::vector<LimitEigen> all;
  while (true) {
    all.clear();
    for (int j = -J; j <= J; ++j)
      for (int k = 0; k <= K; ++k)
        all.push_back({j, k, eta, branch_value(H, j, k, eta)});
    std::stable_sort(all.begin(), all.end(), [](const LimitEigen& a, const LimitEigen& b) {
      if (a.value != b.value) return a.value < b.value;
      if (a.k != b.k) return a.k < b.k;
      return a.j < b.j;
    });
    if (static_cast<int>(all.size()) >= count) {
      double nth = all[count - 1].value;
      // any omitted j has value >= (2 pi (J+1) - pi)^2; omitted k likewise
      double j_floor = std::pow(2.0 * kPi * (J + 1) - kPi, 2);
      double k_floor = std::pow(kPi * (K + 1) / H, 2);
      if (nth <= j_floor && nth <= k_floor) break;
    }
    ++J;
    ++K;
    if (J > 4096) throw std::runtime_error("limit eigenvalue search window blew up");
  }
  all.resize(count);
  return all;
}

bool is_exceptional_height(double H, double tol) {
  const double ex[] = {0.5, 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(8.0), 1.0 / std::sqrt(5.0),
                       1.0};
  for (double e : ex)
    if (std::abs(H - e) < tol) return true;
  return false;
}

std::string node_status_name(NodeStatus s) {
  switch (s) {
    case NodeStatus::opens_gap: return "opens_gap";
    case NodeStatus::shaded: return "shaded";
    case NodeStatus::symmetry_protected: return "symmetry_protected";
    case NodeStatus::same_slope_no_gap: return "same_slope_no_gap";
    case NodeStatus::exceptional_H: return "exceptional_H";
  }
  return "?";
}

std::vector<Node> find_nodes(double H, double lambda_max) {
  if (!(H > 0) || !(lambda_max > 0)) throw std::invalid_argument("H, lambda_max must be positive");
  const double pi2 = kPi * kPi;

  // branch ranges: j with min over eta of (eta+2pi j)^2 <= lambda_max
  int Jmax = 1;
  while (std::pow(2.0 * kPi * Jmax - kPi, 2) <= lambda_max) ++Jmax;
  int Kmax = 0;
  while (pi2 * (Kmax + 1) * (Kmax + 1) / (H * H) <= lambda_max) ++Kmax;

  struct Crossing {
    double eta, lambda;
    std::pair<int, int> b1, b2;
  };
  std::vector<Crossing> cross;
  for (int k1 = 0; k1 <= Kmax; ++k1)
    for (int k2 = k1; k2 <= Kmax; ++k2)
      for (int j1 = -Jmax; j1 <= Jmax; ++j1)
        for (int j2 = (k1 == k2 ? j1 + 1 : -Jmax); j2 <= Jmax; ++j2) {
          if (j1 == j2) continue;  // same j: parallel branches (or same branch)
          double c1 = pi2 * k1 * k1 / (H * H);
          double c2 = pi2 * k2 * k2 / (H * H);
          double eta = (c2 - c1) / (4.0 * kPi * (j1 - j2)) - kPi * (j1 + j2);
          if (std::abs(eta) > kPi + 1e-12) continue;
          double lam = branch_value(H, j1, k1, eta);
          if (lam > lambda_max + 1e-9) continue;
          cross.push_back({eta, lam, {j1, k1}, {j2, k2}});
        }

  // cluster crossings into nodes (triple points at exceptional H collapse)
  std::stable_sort(cross.begin(), cross.end(), [](const Crossing& a, const Crossing& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.eta < b.eta;
  });
  const double ctol = 1e-9 * std::max(1.0, lambda_max);

  std::vector<Node> nodes;
  std::vector<std::vector<std::pair<int, int>>> members;
  for (const auto& c : cross) {
    int found = -1;
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (std::abs(nodes[i].lambda_star - c.lambda) < ctol &&
          std::abs(nodes[i].eta_star - c.eta) < 1e-9) {
        found = static_cast<int>(i);
        break;
      }
    }
    if (found < 0) {
      Node n;
      n.eta_star = c.eta;
      n.lambda_star = c.lambda;
      n.branches = {c.b1, c.b2};
      nodes.push_back(n);
      members.push_back({c.b1, c.b2});
    } else {
      for (auto b : {c.b1, c.b2}) {
        auto& mem = members[found];
        if (std::find(mem.begin(), mem.end(), b) == mem.end()) mem.push_back(b);
      }
    }
  }

  for (size_t i = 0; i < nodes.size(); ++i) {
    Node& n = nodes[i];
    n.multiplicity = static_cast<int>(members[i].size());
    auto [j1, k1] = n.branches[0];
    auto [j2, k2] = n.branches[1];
    double s1 = 2.0 * (n.eta_star + 2.0 * kPi * j1);
    double s2 = 2.0 * (n.eta_star + 2.0 * kPi * j2);

    if (n.multiplicity > 2) {
      n.status = NodeStatus::exceptional_H;
      n.rule = "triple crossing (degenerate width H)";
      continue;
    }
    if (std::abs(n.lambda_star - pi2) < ctol && std::abs(std::abs(n.eta_star) - kPi) < 1e-9 &&
        k1 == 0 && k2 == 0) {
      if (H < 1.0) {
        n.status = NodeStatus::opens_gap;
        n.rule = "square node (+-pi, pi^2), H in (0,1)";
      } else {
        n.status = NodeStatus::shaded;
        n.rule = "square node shaded by the k=1 branch for H > 1";
      }
      continue;
    }
    if (std::abs(n.lambda_star - 4.0 * pi2) < ctol && std::abs(n.eta_star) < 1e-9 && k1 == 0 &&
        k2 == 0) {
      if (H < 0.5) {
        n.status = NodeStatus::opens_gap;
        n.rule = "circle node (0, 4 pi^2), H in (0, 1/2)";
      } else {
        n.status = NodeStatus::shaded;
        n.rule = "circle node shaded by a k=1 branch for H > 1/2";
      }
      continue;
    }
    if (s1 * s2 > 0) {
      n.status = NodeStatus::same_slope_no_gap;
      n.rule = "both curves ascend/descend through the node";
      continue;
    }
    if ((k1 % 2) != (k2 % 2)) {
      n.status = NodeStatus::symmetry_protected;
      n.rule = "branches of opposite transversal parity do not interact "
               "(mirror-symmetric hole)";
      continue;
    }
    // remaining: opposite slopes, same parity, not a catalogued gap-opener;
    // check whether another band covers the node value
    bool covered = false;
    for (int k = 0; k <= Kmax + 1 && !covered; ++k) {
      for (int j = -Jmax - 1; j <= Jmax + 1 && !covered; ++j) {
        if ((j == j1 && k == k1) || (j == j2 && k == k2)) continue;
        double lo = branch_value(H, j, k, std::clamp(-2.0 * kPi * j, -kPi, kPi));
        double hi = std::max(branch_value(H, j, k, -kPi), branch_value(H, j, k, kPi));
        if (n.lambda_star >= lo - ctol && n.lambda_star <= hi + ctol) covered = true;
      }
    }
    n.status = NodeStatus::shaded;
    n.rule = covered ? "node value lies inside another branch's range"
                     : "advisory: outside the proved catalogue, no gap claimed";
  }

  // near a degenerate width, nearly coincident nodes make the catalogue
  // unreliable; flag those (and only those)
  if (is_exceptional_height(H)) {
    const double near_eta = 1e-3;
    const double near_lam = 1e-3 * std::max(1.0, lambda_max);
    for (size_t i = 0; i < nodes.size(); ++i) {
      for (size_t j = i + 1; j < nodes.size(); ++j) {
        if (std::abs(nodes[i].eta_star - nodes[j].eta_star) < near_eta &&
            std::abs(nodes[i].lambda_star - nodes[j].lambda_star) < near_lam) {
          for (size_t k : {i, j}) {
            nodes[k].status = NodeStatus::exceptional_H;
            nodes[k].rule = "nearly degenerate crossing at an exceptional width";
          }
        }
      }
    }
  }
  return nodes;
}

BoxConstants count_box_constants(double H, double delta1, double delta3) {
  if (!(H > 0)) throw std::invalid_argument("H must be positive");
  if (!(delta1 > 0 && delta1 < kPi) || !(delta3 > 0 && delta3 < kPi))
    throw std::invalid_argument("delta1, delta3 must lie in (0, pi)");
  const double pi2 = kPi * kPi;
  BoxConstants out;
  if (H < 1.0) {
    out.K1 = std::min(2.0 * kPi * delta1, pi2 * (1.0 - H * H) / (2.0 * H * H));
    out.K2 = std::min(2.0 * pi2, 2.0 * pi2 * (1.0 - H * H) / (3.0 * H * H));
  }
  if (H < 0.5) {
    out.K3 = std::min(4.0 * kPi * delta3, pi2 * (1.0 - 4.0 * H * H) / (H * H));
    out.K4 = std::min(4.0 * pi2, pi2 * (1.0 - 4.0 * H * H) / (2.0 * H * H));
  }
  return out;
}

}  // namespace stripgap
