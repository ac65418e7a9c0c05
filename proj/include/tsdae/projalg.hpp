#pragma once

#include <tsdae/error.hpp>
#include <tsdae/types.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tsdae {

/// Independent spanning columns of a subspace of R^d. Zero columns is the zero subspace.
struct SubspaceBasis {
  Matrix basis;
  double tol = 1e-9;

  Eigen::Index ambient_dim() const noexcept { return basis.rows(); }
  Eigen::Index dim() const noexcept { return basis.cols(); }
  bool empty() const noexcept { return basis.cols() == 0; }
};

enum class ProjectorKind { Orthogonal, Oblique };

struct Projector {
  Matrix matrix;
  ProjectorKind kind = ProjectorKind::Oblique;

  Eigen::Index dim() const noexcept { return matrix.rows(); }

  /// I - P, with the same kind.
  Projector complement() const { return {identity(matrix.rows()) - matrix, kind}; }

  /// ||P^2 - P|| / (1 + ||P||^2).
  double idempotency_residual() const {
    return (matrix * matrix - matrix).norm() / (1.0 + matrix.squaredNorm());
  }
};

namespace detail {

inline Eigen::JacobiSVD<Matrix> full_svd(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

/// Singular values above tol * max(sigma_max, scale). A positive scale keeps a
/// product that is zero up to rounding from looking full rank.
inline int rank_from_singular_values(const Vector& sv, double tol, double scale = 0.0) {
  if (sv.size() == 0) return 0;
  const double smax = std::max(sv.maxCoeff(), scale);
  if (smax == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > tol * smax ? 1 : 0;
  return r;
}

}  // namespace detail

/// Count of singular values above tol * sigma_max.
inline int numerical_rank(const Matrix& m, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidArgument, "rank tolerance must be positive");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return detail::rank_from_singular_values(svd.singularValues(), tol);
}

/// Orthonormal basis of the numerical null space. `scale` is a lower bound for
/// the magnitude the rank threshold is taken relative to (see above).
inline SubspaceBasis kernel_basis(const Matrix& m, double tol, double scale = 0.0) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidArgument, "rank tolerance must be positive");
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return {identity(n), tol};
  auto svd = detail::full_svd(m);
  const int r = detail::rank_from_singular_values(svd.singularValues(), tol, scale);
  return {svd.matrixV().rightCols(n - r), tol};
}

/// Orthonormal basis of the numerical column space.
inline SubspaceBasis image_basis(const Matrix& m, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidArgument, "rank tolerance must be positive");
  if (m.cols() == 0) return {Matrix(m.rows(), 0), tol};
  auto svd = detail::full_svd(m);
  const int r = detail::rank_from_singular_values(svd.singularValues(), tol);
  return {svd.matrixU().leftCols(r), tol};
}

/// Orthonormal basis of the orthogonal complement of span(basis).
inline SubspaceBasis orthogonal_complement(const SubspaceBasis& b) {
  const Eigen::Index d = b.ambient_dim();
  if (b.empty()) return {identity(d), b.tol};
  auto svd = detail::full_svd(b.basis);
  const int r = detail::rank_from_singular_values(svd.singularValues(), b.tol);
  return {svd.matrixU().rightCols(d - r), b.tol};
}

/// Column concatenation [U W].
inline SubspaceBasis direct_sum(const SubspaceBasis& u, const SubspaceBasis& w) {
  if (u.ambient_dim() != w.ambient_dim()) {
    throw Error(Errc::DimensionMismatch, "subspaces live in different ambient spaces");
  }
  Matrix cat(u.ambient_dim(), u.dim() + w.dim());
  cat << u.basis, w.basis;
  return {cat, std::max(u.tol, w.tol)};
}

/// Orthogonal projector F (F^T F)^{-1} F^T onto span(F); zero for the empty basis.
inline Projector projector_onto_span(const SubspaceBasis& f) {
  const Eigen::Index d = f.ambient_dim();
  if (f.empty()) return {Matrix::Zero(d, d), ProjectorKind::Orthogonal};
  const Matrix gram = f.basis.transpose() * f.basis;
  Eigen::JacobiSVD<Matrix> svd(gram);
  const auto& sv = svd.singularValues();
  const double smin = sv.minCoeff();
  if (!(smin > 0.0) || sv.maxCoeff() / smin > 1.0 / f.tol) {
    throw Error(Errc::IllConditionedBasis, "Gram matrix of the spanning set is ill-conditioned");
  }
  Matrix q = f.basis * gram.ldlt().solve(f.basis.transpose());
  q = 0.5 * (q + q.transpose());
  return {q, ProjectorKind::Orthogonal};
}

/// Orthogonal projector whose null space is span(kernel).
inline Projector orthogonal_projector_along(const SubspaceBasis& kernel) {
  return projector_onto_span(kernel).complement();
}

/// Projector onto span(onto) along span(along). The two subspaces must be
/// complementary: [U W] square and numerically invertible.
inline Projector oblique_projector(const SubspaceBasis& onto, const SubspaceBasis& along) {
  const Eigen::Index d = onto.ambient_dim();
  if (along.ambient_dim() != d) {
    throw Error(Errc::DimensionMismatch, "subspaces live in different ambient spaces");
  }
  if (onto.dim() + along.dim() != d) {
    throw Error(Errc::NotTransversal, "dimensions " + std::to_string(onto.dim()) + " + " +
                                          std::to_string(along.dim()) + " do not add up to " +
                                          std::to_string(d));
  }
  if (d == 0) return {Matrix(0, 0), ProjectorKind::Oblique};
  if (onto.empty()) return {Matrix::Zero(d, d), ProjectorKind::Oblique};
  if (along.empty()) return {identity(d), ProjectorKind::Oblique};
  const SubspaceBasis s = direct_sum(onto, along);
  const double tol = std::max(onto.tol, along.tol);
  if (numerical_rank(s.basis, tol) != d) {
    throw Error(Errc::NotTransversal, "subspaces intersect nontrivially");
  }
  // R = U * (first k rows of [U W]^{-1})
  const Matrix sinv = s.basis.fullPivLu().inverse();
  return {onto.basis * sinv.topRows(onto.dim()), ProjectorKind::Oblique};
}

/// sin of the largest principal angle between span(u) and span(v); 1 when the
/// dimensions differ.
inline double subspace_distance(const Matrix& u, const Matrix& v, double tol = 1e-9) {
  const SubspaceBasis bu = image_basis(u, tol);
  const SubspaceBasis bv = image_basis(v, tol);
  if (bu.dim() != bv.dim()) return 1.0;
  if (bu.dim() == 0) return 0.0;
  const Matrix d1 = bu.basis - bv.basis * (bv.basis.transpose() * bu.basis);
  const Matrix d2 = bv.basis - bu.basis * (bu.basis.transpose() * bv.basis);
  auto spectral = [](const Matrix& m) {
    return m.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  };
  return std::max(spectral(d1), spectral(d2));
}

struct ProperlyStatedReport {
  Eigen::Index m = 0;
  Eigen::Index dim_ker_a = 0;
  Eigen::Index dim_im_b = 0;
  Eigen::Index rank_sum = 0;       // rank [basis(ker A) | basis(im B)]
  bool ker_ab_equals_ker_b = false;
  double ker_containment_residual = 0.0;
  bool properly_stated = false;
};

/// Transversality ker A (+) im B = R^m, plus the consequence ker AB = ker B.
inline ProperlyStatedReport check_properly_stated(const Matrix& a, const Matrix& b, double tol) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) {
    throw Error(Errc::DimensionMismatch, "A must be n x m and B m x n");
  }
  ProperlyStatedReport rep;
  rep.m = a.cols();
  const SubspaceBasis ker_a = kernel_basis(a, tol);
  const SubspaceBasis im_b = image_basis(b, tol);
  rep.dim_ker_a = ker_a.dim();
  rep.dim_im_b = im_b.dim();
  const SubspaceBasis both = direct_sum(ker_a, im_b);
  rep.rank_sum = both.dim() == 0 ? 0 : numerical_rank(both.basis, tol);

  const Matrix ab = a * b;
  const SubspaceBasis ker_ab = kernel_basis(ab, tol);
  const SubspaceBasis ker_b = kernel_basis(b, tol);
  double res = 0.0;
  if (ker_b.dim() > 0) res = std::max(res, (ab * ker_b.basis).norm() / (1.0 + ab.norm()));
  if (ker_ab.dim() > 0) res = std::max(res, (b * ker_ab.basis).norm() / (1.0 + b.norm()));
  rep.ker_containment_residual = res;
  rep.ker_ab_equals_ker_b = ker_ab.dim() == ker_b.dim() && res <= std::sqrt(tol);

  rep.properly_stated = rep.dim_ker_a + rep.dim_im_b == rep.m && rep.rank_sum == rep.m &&
                        rep.ker_ab_equals_ker_b;
  return rep;
}

/// Residuals of the four defining identities of the reflexive inverse, each scaled
/// by (1 + ||rhs||).
struct InverseResiduals {
  double bzb_b = 0.0;
  double zbz_z = 0.0;
  double zb_p0 = 0.0;
  double bz_r = 0.0;
  double max() const { return std::max({bzb_b, zbz_z, zb_p0, bz_r}); }
};

inline InverseResiduals inverse_residuals(const Matrix& b, const Matrix& binv, const Matrix& p0,
                                          const Matrix& r) {
  return {relative_residual(b * binv * b, b), relative_residual(binv * b * binv, binv),
          relative_residual(binv * b, p0), relative_residual(b * binv, r)};
}

/// The {1,2}-inverse Z of B fixed by ZB = P0 and BZ = R.
///
/// Solves [B; I - P0] Z = [R; 0]. The stacked matrix has full column rank when
/// ker P0 = ker B, so the least-squares solution is exact and unique.
inline Matrix one_two_inverse(const Matrix& b, const Projector& p0, const Projector& r, double tol) {
  const Eigen::Index m = b.rows();
  const Eigen::Index n = b.cols();
  if (p0.dim() != n || r.dim() != m) {
    throw Error(Errc::DimensionMismatch, "P0 must be n x n and R m x m for B m x n");
  }
  const Matrix q0 = identity(n) - p0.matrix;
  const double bq0 = (b * q0).norm() / (1.0 + b.norm());
  const double rank_tol = std::max(tol, 1e-12);
  if (bq0 > tol || numerical_rank(p0.matrix, rank_tol) != numerical_rank(b, rank_tol)) {
    throw Error(Errc::InverseConditionsViolated, "ker P0 differs from ker B");
  }
  Matrix stacked(m + n, n);
  stacked << b, q0;
  Matrix rhs(m + n, m);
  rhs << r.matrix, Matrix::Zero(n, m);
  const Matrix z = stacked.colPivHouseholderQr().solve(rhs);
  const InverseResiduals res = inverse_residuals(b, z, p0.matrix, r.matrix);
  if (res.max() > tol) {
    throw Error(Errc::InverseConditionsViolated,
                "reflexive inverse identities fail (max residual " + std::to_string(res.max()) +
                    "); P0 and R are inconsistent with B");
  }
  return z;
}

}  // namespace tsdae
