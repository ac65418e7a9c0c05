#pragma once

#include <tsdae/error.hpp>
#include <tsdae/projalg.hpp>
#include <tsdae/timescale.hpp>
#include <tsdae/types.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsdae {

enum class IndexFlag { Index0, Index1, NotIndexLe1 };

inline std::string_view to_string(IndexFlag f) noexcept {
  switch (f) {
    case IndexFlag::Index0: return "index0";
    case IndexFlag::Index1: return "index1";
    case IndexFlag::NotIndexLe1: return "not_index_le_1";
  }
  return "unknown";
}

/// Level-0/1 chain data at one grid point for A (n x m), B (m x n), C (n x n).
struct ChainPoint {
  double t = 0.0;
  Matrix A, B, C;
  Matrix G0, G1;
  Projector R;       // onto im B along ker A, m x m
  Projector P0, Q0;  // P0 along ker G0, Q0 = I - P0
  Matrix Binv;       // n x m reflexive inverse with Binv B = P0, B Binv = R
  std::optional<Matrix> G1inv;
  int r = 0;   // rank G0
  int r1 = 0;  // rank G1
  IndexFlag index_flag = IndexFlag::NotIndexLe1;

  Eigen::Index n() const noexcept { return G0.rows(); }
  Eigen::Index m() const noexcept { return B.rows(); }
};

/// index0 if G0 is nonsingular, index1 if only G1 is, otherwise not_index_le_1.
inline IndexFlag classify_index(const ChainPoint& cp, double tol) {
  const auto n = cp.G0.rows();
  if (numerical_rank(cp.G0, tol) == n) return IndexFlag::Index0;
  if (numerical_rank(cp.G1, tol) == n) return IndexFlag::Index1;
  return IndexFlag::NotIndexLe1;
}

namespace detail {

inline void check_chain_shapes(const Matrix& a, const Matrix& b, const Matrix& c) {
  const auto n = a.rows();
  const auto m = a.cols();
  if (b.rows() != m || b.cols() != n || c.rows() != n || c.cols() != n) {
    throw Error(Errc::DimensionMismatch, "expected A n x m, B m x n, C n x n; got A " +
                                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                             ", B " + std::to_string(b.rows()) + "x" +
                                             std::to_string(b.cols()) + ", C " + std::to_string(c.rows()) +
                                             "x" + std::to_string(c.cols()));
  }
}

}  // namespace detail

/// Assembles the chain at a single point. With no P0 given, the orthogonal
/// projector along ker G0 is used; a supplied P0 must be a projector along ker G0.
inline ChainPoint build_chain_point(double t, const Matrix& a, const Matrix& b, const Matrix& c,
                                    double tol, const std::optional<Projector>& p0 = std::nullopt) {
  detail::check_chain_shapes(a, b, c);
  const auto ps = check_properly_stated(a, b, tol);
  if (!ps.properly_stated) {
    throw Error(Errc::NotProperlyStated,
                "at t=" + std::to_string(t) + ": dim ker A = " + std::to_string(ps.dim_ker_a) +
                    ", dim im B = " + std::to_string(ps.dim_im_b) + ", m = " + std::to_string(ps.m) +
                    ", rank of joint basis = " + std::to_string(ps.rank_sum));
  }
  ChainPoint cp;
  cp.t = t;
  cp.A = a;
  cp.B = b;
  cp.C = c;
  cp.G0 = a * b;
  const auto n = cp.G0.rows();
  const SubspaceBasis n0 = kernel_basis(cp.G0, tol);
  cp.r = static_cast<int>(n - n0.dim());
  if (p0) {
    if (p0->dim() != n) throw Error(Errc::DimensionMismatch, "P0 must be n x n");
    if (p0->idempotency_residual() > tol) throw Error(Errc::ProjectorInvalid, "P0 is not idempotent");
    const Matrix q0 = identity(n) - p0->matrix;
    if ((cp.G0 * q0).norm() > tol * (1.0 + cp.G0.norm() * (1.0 + q0.norm())) ||
        numerical_rank(p0->matrix, tol) != cp.r) {
      throw Error(Errc::ProjectorInvalid, "P0 is not a projector along ker G0");
    }
    cp.P0 = *p0;
  } else {
    cp.P0 = orthogonal_projector_along(n0);
  }
  cp.Q0 = cp.P0.complement();
  cp.R = oblique_projector(image_basis(b, tol), kernel_basis(a, tol));
  cp.Binv = one_two_inverse(b, cp.P0, cp.R, std::max(tol, 1e-9));
  cp.G1 = cp.G0 + c * cp.Q0.matrix;
  cp.r1 = numerical_rank(cp.G1, tol);
  cp.index_flag = classify_index(cp, tol);
  if (cp.r1 == n) cp.G1inv = cp.G1.fullPivLu().inverse();
  return cp;
}

/// Chain at every grid point; ranks r, r1 and the index flag must be constant on the grid.
inline std::vector<ChainPoint> build_chain(const MatrixFn& a, const MatrixFn& b, const MatrixFn& c,
                                           const TimeScale& ts, double tol) {
  std::vector<ChainPoint> chain;
  chain.reserve(ts.size());
  for (double t : ts.points()) {
    chain.push_back(build_chain_point(t, a(t), b(t), c(t), tol));
    const auto& first = chain.front();
    const auto& cur = chain.back();
    if (cur.r != first.r) {
      throw Error(Errc::RankDrift, "rank G0 changes from " + std::to_string(first.r) + " at t=" +
                                       std::to_string(first.t) + " to " + std::to_string(cur.r) +
                                       " at t=" + std::to_string(cur.t));
    }
    if (cur.r1 != first.r1) {
      throw Error(Errc::RankDrift, "rank G1 changes from " + std::to_string(first.r1) + " at t=" +
                                       std::to_string(first.t) + " to " + std::to_string(cur.r1) +
                                       " at t=" + std::to_string(cur.t));
    }
    if (cur.index_flag != first.index_flag) {
      throw Error(Errc::RankDrift, "index classification changes between t=" +
                                       std::to_string(first.t) + " and t=" + std::to_string(cur.t));
    }
  }
  return chain;
}

/// Level-1 projectors: Q1 onto N1 = ker G1 with ker Q1 = N0 (+) (N0 (+) N1)^perp.
struct ChainLevel1 {
  SubspaceBasis N1basis;
  Projector Q1, P1;
};

inline ChainLevel1 build_level1(const ChainPoint& cp, double tol) {
  const auto n = cp.n();
  const SubspaceBasis n1 = kernel_basis(cp.G1, tol);
  ChainLevel1 lvl;
  lvl.N1basis = n1;
  if (n1.empty()) {
    lvl.Q1 = {Matrix::Zero(n, n), ProjectorKind::Orthogonal};
    lvl.P1 = lvl.Q1.complement();
    return lvl;
  }
  const SubspaceBasis n0 = image_basis(cp.Q0.matrix, tol);
  const SubspaceBasis sum = direct_sum(n0, n1);
  if (numerical_rank(sum.basis, tol) != sum.dim()) {
    throw Error(Errc::AdmissibilityViolation,
                "N0 and N1 intersect nontrivially at t=" + std::to_string(cp.t));
  }
  const SubspaceBasis along = direct_sum(n0, orthogonal_complement(sum));
  lvl.Q1 = oblique_projector(n1, along);
  lvl.P1 = lvl.Q1.complement();
  return lvl;
}

/// Outcome of comparing a chain against one built from another admissible P0.
struct ChainComparison {
  Matrix Z1;
  std::map<std::string, double> identity_residuals;

  double max_residual() const {
    double m = 0.0;
    for (const auto& [_, v] : identity_residuals) m = std::max(m, v);
    return m;
  }
};

/// Residuals of the projector-exchange identities, G1bar = G1 Z1 with
/// Z1 = I + Q0 Q0bar P0, and principal-angle distances of the chain subspaces.
inline ChainComparison compare_chains(const ChainPoint& cp, const ChainPoint& alt, double tol) {
  if (cp.n() != alt.n() || cp.m() != alt.m()) {
    throw Error(Errc::DimensionMismatch, "chains have different dimensions");
  }
  const Matrix& q0 = cp.Q0.matrix;
  const Matrix& qb = alt.Q0.matrix;
  const Matrix& p0 = cp.P0.matrix;
  const Matrix& pb = alt.P0.matrix;
  ChainComparison out;
  out.Z1 = identity(cp.n()) + q0 * qb * p0;
  auto& res = out.identity_residuals;
  res["Q0*Q0bar=Q0bar"] = relative_residual(q0 * qb, qb);
  res["Q0bar*Q0=Q0"] = relative_residual(qb * q0, q0);
  res["P0*P0bar=P0"] = relative_residual(p0 * pb, p0);
  res["P0bar*P0=P0bar"] = relative_residual(pb * p0, pb);
  res["G0*Q0=0"] = (cp.G0 * q0).norm() / (1.0 + cp.G0.norm());
  res["G0*Q0bar=0"] = (cp.G0 * qb).norm() / (1.0 + cp.G0.norm());
  res["Binvbar=P0bar*Binv"] = relative_residual(pb * cp.Binv, alt.Binv);
  res["G1bar=G1*Z1"] = relative_residual(cp.G1 * out.Z1, alt.G1);

  res["angle(im G0)"] = subspace_distance(cp.G0, alt.G0, tol);
  res["angle(im G1)"] = subspace_distance(cp.G1, alt.G1, tol);
  res["angle(N0)"] = subspace_distance(q0, qb, tol);
  const SubspaceBasis n1 = kernel_basis(cp.G1, tol);
  const SubspaceBasis n1b = kernel_basis(alt.G1, tol);
  const Matrix sum = direct_sum(image_basis(q0, tol), n1).basis;
  const Matrix sumb = direct_sum(image_basis(qb, tol), n1b).basis;
  res["angle(N0+N1)"] = (sum.cols() == 0 && sumb.cols() == 0) ? 0.0 : subspace_distance(sum, sumb, tol);
  return out;
}

/// Rank and annihilation checks for ker(P0 P1) = N0 (+) N1.
struct KernelSumReport {
  Eigen::Index dim_ker_p0p1 = 0;
  Eigen::Index dim_n0 = 0;
  Eigen::Index dim_n1 = 0;
  double annihilation_residual = 0.0;  // max ||P0 P1 z|| over unit basis vectors of N0 and N1

  bool holds(double tol) const {
    return dim_ker_p0p1 == dim_n0 + dim_n1 && annihilation_residual <= tol;
  }
};

inline KernelSumReport kernel_sum_report(const ChainPoint& cp, const ChainLevel1& lvl, double tol) {
  KernelSumReport rep;
  const Matrix p0p1 = cp.P0.matrix * lvl.P1.matrix;
  // P0 P1 vanishes when N0 (+) N1 is the whole space; judge its rank against the
  // size of the factors, not against its own rounding noise.
  const double scale = cp.P0.matrix.norm() * lvl.P1.matrix.norm();
  rep.dim_ker_p0p1 = kernel_basis(p0p1, tol, scale).dim();
  const SubspaceBasis n0 = image_basis(cp.Q0.matrix, tol);
  rep.dim_n0 = n0.dim();
  rep.dim_n1 = lvl.N1basis.dim();
  double worst = 0.0;
  for (const Matrix* basis : {&n0.basis, &lvl.N1basis.basis}) {
    for (Eigen::Index j = 0; j < basis->cols(); ++j) {
      const Vector z = basis->col(j).normalized();
      worst = std::max(worst, (p0p1 * z).norm());
    }
  }
  rep.annihilation_residual = worst;
  return rep;
}

/// Kernel bases of A carried along the grid by n(sigma(t)) = n(t) + mu(t) Q^Delta(t) n(t),
/// where Q(t) is the orthogonal projector onto ker A(t).
struct KernelFlow {
  std::size_t start_index = 0;  // bases[k] belongs to grid point start_index + k
  std::vector<Matrix> bases;
};

inline KernelFlow kernel_flow(const MatrixFn& a, const TimeScale& ts, double t0, double tol) {
  KernelFlow flow;
  flow.start_index = ts.index_of(t0);
  std::vector<Matrix> q;
  Eigen::Index dim = -1;
  for (std::size_t i = flow.start_index; i < ts.size(); ++i) {
    const SubspaceBasis ker = kernel_basis(a(ts[i]), tol);
    if (dim >= 0 && ker.dim() != dim) {
      throw Error(Errc::RankDrift, "dim ker A changes from " + std::to_string(dim) + " to " +
                                       std::to_string(ker.dim()) + " at t=" + std::to_string(ts[i]));
    }
    if (dim < 0) {
      dim = ker.dim();
      flow.bases.push_back(ker.basis);
    }
    q.push_back(projector_onto_span(ker).matrix);
  }
  for (std::size_t k = 0; k + 1 < q.size(); ++k) {
    const std::size_t i = flow.start_index + k;
    const Matrix q_delta = (q[k + 1] - q[k]) / ts.mu_at(i);
    const Matrix& nk = flow.bases.back();
    flow.bases.push_back(nk + ts.mu_at(i) * q_delta * nk);
  }
  return flow;
}

}  // namespace tsdae
