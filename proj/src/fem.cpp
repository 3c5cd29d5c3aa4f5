#include "stripgap/fem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stripgap {

namespace {

std::vector<int> build_dof_map(const PeriodicMesh& mesh, int& ndof) {
  const int nv = mesh.num_vertices();
  std::vector<int> master(nv);
  for (int v = 0; v < nv; ++v) master[v] = v;
  for (const auto& [m, s] : mesh.periodic_pairs) master[s] = m;
  std::vector<int> map(nv, -1);
  int next = 0;
  for (int v = 0; v < nv; ++v)
    if (master[v] == v) map[v] = next++;
  for (int v = 0; v < nv; ++v)
    if (master[v] != v) {
      if (master[master[v]] != master[v]) throw AssemblyError("chained periodic pairing");
      map[v] = map[master[v]];
      if (map[v] < 0) throw AssemblyError("unpaired trace vertex");
    }
  ndof = next;
  return map;
}

struct LocalP1 {
  // gradients of the three hat functions and the area
  Eigen::Matrix<double, 3, 2> grad;
  double area;
};

LocalP1 local_p1(const Vec2& a, const Vec2& b, const Vec2& c) {
  LocalP1 L;
  double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  L.area = 0.5 * det;
  // grad phi_i = perp(opposite edge) / (2 area)
  L.grad.row(0) = Eigen::RowVector2d(b.y() - c.y(), c.x() - b.x()) / det;
  L.grad.row(1) = Eigen::RowVector2d(c.y() - a.y(), a.x() - c.x()) / det;
  L.grad.row(2) = Eigen::RowVector2d(a.y() - b.y(), b.x() - a.x()) / det;
  return L;
}

}  // namespace

BlochAssembler::BlochAssembler(const PeriodicMesh& mesh) {
  if (mesh.pair_direction != PairDirection::left_right)
    throw AssemblyError("Bloch assembly needs a left/right-paired cell mesh");
  dof_map_ = build_dof_map(mesh, n_);

  std::vector<Eigen::Triplet<double>> tk, ts, tm;
  tk.reserve(mesh.num_triangles() * 9);
  ts.reserve(mesh.num_triangles() * 9);
  tm.reserve(mesh.num_triangles() * 9);
  for (const auto& t : mesh.triangles) {
    LocalP1 L = local_p1(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    for (int i = 0; i < 3; ++i) {
      int I = dof_map_[t[i]];
      for (int j = 0; j < 3; ++j) {
        int J = dof_map_[t[j]];
        double k = L.area * L.grad.row(i).dot(L.grad.row(j));
        double m = L.area / 12.0 * (i == j ? 2.0 : 1.0);
        // row = test index i, column = trial index j:
        // S_ij = ∫ phi_j d1(phi_i) - ∫ phi_i d1(phi_j); i eta S is Hermitian
        double s = L.area / 3.0 * (L.grad(i, 0) - L.grad(j, 0));
        tk.emplace_back(I, J, k);
        tm.emplace_back(I, J, m);
        ts.emplace_back(I, J, s);
      }
    }
  }
  K0_.resize(n_, n_);
  S_.resize(n_, n_);
  M_.resize(n_, n_);
  K0_.setFromTriplets(tk.begin(), tk.end());
  S_.setFromTriplets(ts.begin(), ts.end());
  M_.setFromTriplets(tm.begin(), tm.end());
}

BlochSystem BlochAssembler::assemble(double eta) const {
  BlochSystem sys;
  sys.eta = eta;
  sys.dof_map = dof_map_;
  sys.ndof = n_;
  sys.K = K0_.cast<Complex>() + Complex(0.0, eta) * S_.cast<Complex>() +
          (eta * eta) * M_.cast<Complex>();
  sys.M = M_.cast<Complex>();
  sys.K.makeCompressed();
  sys.M.makeCompressed();
  return sys;
}

BlochSystem assemble_bloch(const PeriodicMesh& mesh, double eta) {
  return BlochAssembler(mesh).assemble(eta);
}

RealSystem assemble_real_neumann(const PeriodicMesh& mesh, NeumannData data) {
  RealSystem sys;
  sys.dof_map = build_dof_map(mesh, sys.ndof);
  const int n = sys.ndof;

  std::vector<Eigen::Triplet<double>> tk, tm;
  tk.reserve(mesh.num_triangles() * 9);
  tm.reserve(mesh.num_triangles() * 9);
  sys.F = Eigen::VectorXd::Zero(n);
  double load_integral = 0.0;

  for (const auto& t : mesh.triangles) {
    LocalP1 L = local_p1(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    for (int i = 0; i < 3; ++i) {
      int I = sys.dof_map[t[i]];
      for (int j = 0; j < 3; ++j) {
        int J = sys.dof_map[t[j]];
        tk.emplace_back(I, J, L.area * L.grad.row(i).dot(L.grad.row(j)));
        tm.emplace_back(I, J, L.area / 12.0 * (i == j ? 2.0 : 1.0));
      }
      if (data == NeumannData::volume_unit) sys.F[I] += L.area / 3.0;
    }
    if (data == NeumannData::volume_unit) load_integral += L.area;
  }
  sys.K.resize(n, n);
  sys.M.resize(n, n);
  sys.K.setFromTriplets(tk.begin(), tk.end());
  sys.M.setFromTriplets(tm.begin(), tm.end());

  if (data != NeumannData::volume_unit) {
    // adjacency: which triangle owns each boundary edge (to orient the normal
    // outward with respect to the domain, i.e. into the hole)
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
          it->second = -1;  // interior
      }
    const int comp = (data == NeumannData::minus_nu1) ? 0 : 1;
    for (const auto& e : mesh.boundary_edges) {
      if (e.tag != EdgeTag::hole) continue;
      const Vec2& a = mesh.vertices[e.v0];
      const Vec2& b = mesh.vertices[e.v1];
      int t = owner[ek(e.v0, e.v1)];
      if (t < 0) throw AssemblyError("hole edge not on the boundary");
      Vec2 mid = 0.5 * (a + b);
      Vec2 third = Vec2::Zero();
      for (int i = 0; i < 3; ++i) {
        int v = mesh.triangles[t][i];
        if (v != e.v0 && v != e.v1) third = mesh.vertices[v];
      }
      Vec2 tangent = b - a;
      double len = tangent.norm();
      Vec2 nrm(tangent.y(), -tangent.x());
      nrm /= len;
      if (nrm.dot(third - mid) > 0) nrm = -nrm;  // outward w.r.t. domain
      double g = -nrm[comp];
      // 2-point Gauss on the edge; G constant, hat functions linear
      const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
      for (double s : gp) {
        double w = 0.5 * len;
        sys.F[sys.dof_map[e.v0]] += w * g * (1.0 - s);
        sys.F[sys.dof_map[e.v1]] += w * g * s;
        load_integral += w * g;
      }
    }
  }

  double scale = sys.F.lpNorm<1>() + std::abs(load_integral);
  if (std::abs(load_integral) > 1e-8 * std::max(scale, 1e-30)) {
    std::ostringstream msg;
    msg << "right-hand side violates the solvability (orthogonality) condition: "
        << "integral = " << load_integral;
    throw SolvabilityError(msg.str());
  }
  return sys;
}

Eigen::VectorXd solve_singular_neumann(const RealSystem& sys) {
  const int n = sys.ndof;
  // bordered symmetric system [K c; c^T 0] with c = M * 1 enforcing zero mean
  Eigen::VectorXd c = sys.M * Eigen::VectorXd::Ones(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.K.nonZeros() + 2 * n);
  for (int k = 0; k < sys.K.outerSize(); ++k)
    for (SpMatR::InnerIterator it(sys.K, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, n, c[i]);
    trips.emplace_back(n, i, c[i]);
  }
  SpMatR A(n + 1, n + 1);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::SparseLU<SpMatR> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("LU factorization failed on Neumann system");
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = sys.F;
  rhs[n] = 0.0;
  Eigen::VectorXd sol = lu.solve(rhs);
  return sol.head(n);
}

Eigen::VectorXd expand_to_vertices(const PeriodicMesh& mesh, const std::vector<int>& dof_map,
                                   const Eigen::VectorXd& reduced) {
  Eigen::VectorXd out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) out[v] = reduced[dof_map[v]];
  return out;
}

namespace {

void compute_residuals(const BlochSystem& sys, EigenSeq& seq) {
  seq.residuals.resize(seq.values.size());
  for (size_t i = 0; i < seq.values.size(); ++i) {
    Eigen::VectorXcd v = seq.vectors.col(static_cast<int>(i));
    Eigen::VectorXcd mv = sys.M * v;
    double denom = mv.norm();
    seq.residuals[i] = (sys.K * v - seq.values[i] * mv).norm() / std::max(denom, 1e-300);
  }
}

EigenSeq solve_dense(const BlochSystem& sys, int count, const EigenOptions& opts) {
  const int n = sys.ndof;
  Eigen::MatrixXcd K = Eigen::MatrixXcd(sys.K);
  Eigen::MatrixXcd M = Eigen::MatrixXcd(sys.M);
  Eigen::LLT<Eigen::MatrixXcd> llt(M);
  if (llt.info() != Eigen::Success) throw SolverError("mass matrix not positive definite");
  Eigen::MatrixXcd A = llt.matrixL().solve(K);
  A = llt.matrixL().solve(A.adjoint()).adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  es.compute(0.5 * (A + A.adjoint()));
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");

  EigenSeq seq;
  seq.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + count);
  seq.vectors.resize(n, count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXcd y = es.eigenvectors().col(i);
    seq.vectors.col(i) = llt.matrixU().solve(y);
    seq.vectors.col(i) /= seq.vectors.col(i).norm();
  }
  compute_residuals(sys, seq);
  if (!opts.want_vectors) seq.vectors.resize(0, 0);
  return seq;
}

// Shift-invert Lanczos at sigma = -1 on Op = (K + M)^{-1} M, self-adjoint in
// the M-inner product. Largest Ritz values theta map to the lowest pencil
// eigenvalues via Lambda = 1/theta - 1. Full reorthogonalization.
EigenSeq solve_lanczos(const BlochSystem& sys, int count, const EigenOptions& opts) {
  const int n = sys.ndof;
  SpMatC A = sys.K + sys.M;
  A.makeCompressed();
  Eigen::SimplicialLDLT<SpMatC, Eigen::Lower> ldlt;
  ldlt.compute(A);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("shift-invert factorization failed (K + M not PD?)");

  int m_max = opts.max_basis > 0 ? opts.max_basis : std::min(n, std::max(8 * count + 40, 90));
  m_max = std::min(m_max, n);

  Eigen::MatrixXcd Q(n, m_max);
  std::vector<double> alpha, beta;
  alpha.reserve(m_max);
  beta.reserve(m_max);

  std::mt19937_64 rng(0x5eedu);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXcd q(n);
  for (int i = 0; i < n; ++i) q[i] = Complex(1.0 + 0.01 * unif(rng), 0.01 * unif(rng));
  {
    Eigen::VectorXcd mq = sys.M * q;
    q /= std::sqrt(std::abs(q.dot(mq).real()));
  }
  Q.col(0) = q;

  EigenSeq seq;
  Eigen::VectorXcd prev = Eigen::VectorXcd::Zero(n);
  double beta_prev = 0.0;
  int m = 0;
  Eigen::MatrixXd evecT;
  Eigen::VectorXd evalT;

  auto ritz_converged = [&](int basis, double next_beta) -> bool {
    // tridiagonal eigendecomposition
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(basis, basis);
    for (int i = 0; i < basis; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < basis) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    evalT = es.eigenvalues();
    evecT = es.eigenvectors();
    if (basis < count) return false;
    if (basis >= n) return true;  // exact Krylov space
    double bl = next_beta;
    for (int i = 0; i < count; ++i) {
      int col = basis - 1 - i;  // largest theta
      double theta = evalT[col];
      double bound = std::abs(bl * evecT(basis - 1, col));
      // |theta - theta_exact| <= bound; translate to Lambda accuracy
      double lam = 1.0 / std::max(theta, 1e-300) - 1.0;
      double dlam = bound / std::max(theta * theta, 1e-300);
      if (dlam > opts.tol * std::max(1.0, std::abs(lam)) * 0.1) return false;
    }
    return true;
  };

  while (true) {
    // one Lanczos step
    Eigen::VectorXcd w = ldlt.solve(sys.M * Q.col(m));
    double a = (Q.col(m).adjoint() * (sys.M * w))(0, 0).real();
    alpha.push_back(a);
    w -= a * Q.col(m);
    if (m > 0) w -= beta_prev * prev;
    // full reorthogonalization (two passes)
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXcd mw = sys.M * w;
      Eigen::VectorXcd coef = Q.leftCols(m + 1).adjoint() * mw;
      w -= Q.leftCols(m + 1) * coef;
    }
    double b = std::sqrt(std::abs((w.adjoint() * (sys.M * w))(0, 0).real()));
    ++m;
    bool breakdown = b < 1e-13;
    bool full = (m >= m_max) || (m >= n);
    if (m >= count && (breakdown || full || (m % 10 == 0))) {
      if (ritz_converged(m, b) || breakdown || full) break;
    }
    if (!breakdown) {
      beta.push_back(b);
      prev = Q.col(m - 1);
      beta_prev = b;
      Q.col(m) = w / b;
    } else {
      // invariant subspace hit; restart direction
      Eigen::VectorXcd r(n);
      for (int i = 0; i < n; ++i) r[i] = Complex(unif(rng), unif(rng));
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXcd mr = sys.M * r;
        Eigen::VectorXcd coef = Q.leftCols(m).adjoint() * mr;
        r -= Q.leftCols(m) * coef;
      }
      double rn = std::sqrt(std::abs((r.adjoint() * (sys.M * r))(0, 0).real()));
      if (rn < 1e-13 || m >= n) break;
      beta.push_back(0.0);
      prev = Q.col(m - 1);
      beta_prev = 0.0;
      Q.col(m) = r / rn;
    }
  }

  ritz_converged(m, 0.0);  // final T decomposition
  if (m < count) throw SolverError("Lanczos basis smaller than requested eigenvalue count");

  EigenSeq out;
  out.values.resize(count);
  out.vectors.resize(n, count);
  for (int i = 0; i < count; ++i) {
    int col = m - 1 - i;  // descending theta = ascending Lambda
    double theta = evalT[col];
    out.values[i] = 1.0 / std::max(theta, 1e-300) - 1.0;
    Eigen::VectorXcd v = Q.leftCols(m) * evecT.col(col).cast<Complex>();
    out.vectors.col(i) = v / v.norm();
  }
  // ensure ascending order
  for (int i = 1; i < count; ++i)
    if (out.values[i] < out.values[i - 1] - 1e-12)
      throw SolverError("Lanczos produced non-sorted eigenvalues");
  compute_residuals(sys, out);
  double worst = 0;
  for (double r : out.residuals) worst = std::max(worst, r);
  double res_tol = std::max(opts.tol, 1e-8);
  if (worst > res_tol * 50) {
    std::ostringstream msg;
    msg << "iterative eigensolver did not converge: residual " << worst;
    throw SolverError(msg.str());
  }
  if (!opts.want_vectors) out.vectors.resize(0, 0);
  return out;
}

}  // namespace

EigenSeq solve_lowest(const BlochSystem& sys, int count, const EigenOptions& opts) {
  if (count < 1 || count > sys.ndof) throw SolverError("invalid eigenvalue count");
  const int n = sys.ndof;
  bool dense_ok = n <= opts.dense_ceiling;
  bool use_dense = dense_ok && (n <= opts.iterative_threshold || !opts.iterative);
  if (!dense_ok && !opts.iterative) {
    std::ostringstream msg;
    msg << "problem size " << n << " exceeds the dense ceiling " << opts.dense_ceiling
        << " and the iterative fallback is disabled";
    throw CapacityError(msg.str());
  }
  return use_dense ? solve_dense(sys, count, opts) : solve_lanczos(sys, count, opts);
}

double residual_certificate(const BlochSystem& sys, const Eigen::VectorXcd& trial,
                            double mu_trial) {
  if (trial.size() != sys.ndof) throw SolverError("trial vector size mismatch");
  if (trial.norm() == 0.0) throw SolverError("zero trial vector");
  SpMatC A = sys.K + sys.M;
  A.makeCompressed();
  Eigen::SimplicialLDLT<SpMatC, Eigen::Lower> ldlt;
  ldlt.compute(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("certificate factorization failed");
  Eigen::VectorXcd bu = ldlt.solve(sys.M * trial);
  Eigen::VectorXcd r = bu - mu_trial * trial;
  double num = std::sqrt(std::abs((r.adjoint() * (A * r))(0, 0).real()));
  double den = std::sqrt(std::abs((trial.adjoint() * (A * trial))(0, 0).real()));
  return num / den;
}

}  // namespace stripgap
