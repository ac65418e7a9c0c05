#pragma once

// Seeded generators of well-conditioned test problems: properly stated,
// time-varying index-1 (or index-0) problems on random discrete grids,
// alternative admissible projectors, and single-point chains with dim N1 >= 1.

#include <tsdae/chain.hpp>
#include <tsdae/decouple.hpp>
#include <tsdae/error.hpp>
#include <tsdae/projalg.hpp>
#include <tsdae/solver.hpp>
#include <tsdae/timescale.hpp>
#include <tsdae/types.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tsdae {

/// M(t) = M0 + sin(w t + phase) M1
struct SmoothMatrix {
  Matrix m0, m1;
  double w = 1.0;
  double phase = 0.0;
  Matrix operator()(double t) const { return m0 + std::sin(w * t + phase) * m1; }
};

struct RandomProblem {
  ProperProblem problem;
  TimeScale ts;
  Eigen::Index n = 0, m = 0, r = 0;
  Vector x0;
};

struct Level1Instance {
  Matrix A, B, C;
  Eigen::Index k = 0;  // dim N1
};

inline double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed) : rng_(seed) {}

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Matrix gaussian(Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> nd;
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng_);
    return m;
  }

  Vector gaussian_vector(Eigen::Index n) { return gaussian(n, 1).col(0); }

  /// Strictly increasing points starting in [0, 1) with graininess in [0.05, 0.2].
  TimeScale grid(std::size_t points) {
    std::vector<double> pts{uniform(0.0, 1.0)};
    while (pts.size() < points) pts.push_back(pts.back() + uniform(0.05, 0.2));
    return TimeScale::explicit_points(std::move(pts));
  }

  SmoothMatrix smooth(Eigen::Index rows, Eigen::Index cols, double amplitude = 0.3) {
    SmoothMatrix s{gaussian(rows, cols), amplitude * gaussian(rows, cols), uniform(0.5, 2.0),
                   uniform(0.0, 6.28)};
    return s;
  }

  /// Smooth square matrix function with condition number <= cap on the grid.
  SmoothMatrix smooth_invertible(Eigen::Index n, const TimeScale& ts, double cap = 30.0) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      SmoothMatrix s = smooth(n, n);
      bool ok = true;
      for (double t : ts.points()) {
        if (condition_number(s(t)) > cap) {
          ok = false;
          break;
        }
      }
      if (ok) return s;
    }
    throw Error(Errc::InvalidArgument, "could not draw a well-conditioned matrix function");
  }

  /// Properly stated problem with rank G0 = r:
  ///   A = L E S^{-1},  B = S E^T K,  E = [I_r 0; 0 0] (n x m)
  /// so ker A = span(last m - r columns of S) and im B = span(first r columns of S).
  /// Rejected unless G1, the inherent step matrices and the oracle step matrices
  /// all have condition number <= cap, and the solution from x0 stays below
  /// growth * (1 + |x0|). Residuals of the equation are absolute in x, so
  /// instances whose solutions blow up by many orders of magnitude only measure
  /// rounding.
  RandomProblem index1(std::size_t points, bool allow_index0 = true, double cap = 1e4, double growth = 1e4) {
    for (int attempt = 0; attempt < 500; ++attempt) {
      const Eigen::Index n = uniform_int(1, 6);
      const Eigen::Index m = uniform_int(1, 6);
      const Eigen::Index rmax = std::min(n, m);
      const Eigen::Index r = allow_index0 ? uniform_int(0, static_cast<int>(rmax))
                                          : uniform_int(0, static_cast<int>(std::min(rmax, n - 1)));
      TimeScale ts = grid(points);
      const SmoothMatrix l = smooth_invertible(n, ts);
      const SmoothMatrix k = smooth_invertible(n, ts);
      const SmoothMatrix s = smooth_invertible(m, ts);
      const SmoothMatrix c = smooth(n, n);
      const SmoothMatrix fmat = smooth(n, 1);
      Matrix e = Matrix::Zero(n, m);
      for (Eigen::Index i = 0; i < r; ++i) e(i, i) = 1.0;

      ProperProblem p;
      p.A = [l, s, e](double t) -> Matrix { return l(t) * e * s(t).inverse(); };
      p.B = [s, k, e](double t) -> Matrix { return s(t) * e.transpose() * k(t); };
      p.C = c;
      p.f = [fmat](double t) -> Vector { return fmat(t).col(0); };
      RandomProblem out{p, ts, n, m, r, gaussian_vector(n)};
      if (acceptable(out, cap, growth)) return out;
    }
    throw Error(Errc::InvalidArgument, "could not draw an admissible random problem");
  }

  /// Alternative admissible projector: Q0bar onto N0 along a random complement
  /// W + N0 X, with ||Q0bar|| <= cap.
  Projector alternative_p0(const ChainPoint& cp, double tol, double cap = 1e3) {
    const Eigen::Index n = cp.n();
    const SubspaceBasis n0 = image_basis(cp.Q0.matrix, tol);
    if (n0.dim() == 0 || n0.dim() == n) return cp.P0;
    const SubspaceBasis w = orthogonal_complement(n0);
    for (int attempt = 0; attempt < 100; ++attempt) {
      const Matrix x = gaussian(n0.dim(), w.dim());
      const SubspaceBasis wbar{w.basis + n0.basis * x, tol};
      const Projector q0bar = oblique_projector(n0, wbar);
      if (q0bar.matrix.norm() <= cap) return {identity(n) - q0bar.matrix, ProjectorKind::Oblique};
    }
    throw Error(Errc::InvalidArgument, "could not draw a bounded alternative projector");
  }

  /// Constant properly stated pair with G1 singular, dim N1 = k >= 1 and
  /// N0 and N1 independent. C is corrected by a rank-k update so that
  /// C Q0 Z = -G0 Z for a random n x k matrix Z.
  Level1Instance level1(double tol) {
    for (int attempt = 0; attempt < 500; ++attempt) {
      const Eigen::Index n = uniform_int(2, 6);
      const Eigen::Index r = uniform_int(1, static_cast<int>(n - 1));
      const Eigen::Index m = uniform_int(static_cast<int>(r), 6);
      const Eigen::Index k = uniform_int(1, static_cast<int>(std::min(r, n - r)));
      const Matrix l = gaussian(n, n);
      const Matrix kk = gaussian(n, n);
      const Matrix s = gaussian(m, m);
      if (condition_number(l) > 30 || condition_number(kk) > 30 || condition_number(s) > 30) continue;
      Matrix e = Matrix::Zero(n, m);
      for (Eigen::Index i = 0; i < r; ++i) e(i, i) = 1.0;
      Level1Instance inst;
      inst.A = l * e * s.inverse();
      inst.B = s * e.transpose() * kk;
      inst.C = gaussian(n, n);
      const Matrix g0 = inst.A * inst.B;
      const Matrix q0 = orthogonal_projector_along(kernel_basis(g0, tol)).complement().matrix;
      const Matrix z = gaussian(n, k);
      const Matrix y = q0 * z;
      if (condition_number(y.transpose() * y) > 1e6) continue;
      inst.C += (-g0 * z - inst.C * y) * (y.transpose() * y).inverse() * y.transpose();
      inst.k = k;
      try {
        const ChainPoint cp = build_chain_point(0.0, inst.A, inst.B, inst.C, tol);
        if (cp.r1 != n - k) continue;
        const ChainLevel1 lvl = build_level1(cp, tol);
        if (lvl.N1basis.dim() != k || lvl.Q1.matrix.norm() > 1e3) continue;
      } catch (const Error&) {
        continue;
      }
      return inst;
    }
    throw Error(Errc::InvalidArgument, "could not draw a level-1 instance");
  }

  std::mt19937_64& engine() noexcept { return rng_; }

 private:
  static bool acceptable(const RandomProblem& rp, double cap, double growth) {
    try {
      const auto chain = build_chain(rp.problem.A, rp.problem.B, rp.problem.C, rp.ts, 1e-9);
      for (const auto& cp : chain) {
        if (!cp.G1inv || condition_number(cp.G1) > cap) return false;
      }
      const DecoupledSystem ds = decouple_chain(chain, rp.problem.f, rp.ts);
      for (std::size_t i = 0; i < ds.points.size(); ++i) {
        const double mu = rp.ts.mu_at(i);
        const double s = rp.ts[i + 1];
        if (condition_number(identity(ds.k) - mu * ds.points[i].Madv) > cap) return false;
        const Matrix oracle = rp.problem.A(s) * rp.problem.B(s) - mu * rp.problem.C(s);
        if (condition_number(oracle) > cap) return false;
      }
      // Growth is measured on the direct recursion, independently of the decoupling.
      const double bound = growth * (1.0 + rp.x0.norm());
      for (const Vector& x : direct_recursion_oracle(rp.problem, rp.ts, rp.x0, 1.0 / cap).x) {
        if (!(x.norm() <= bound)) return false;
      }
    } catch (const Error&) {
      return false;
    }
    return true;
  }

  std::mt19937_64 rng_;
};

}  // namespace tsdae
