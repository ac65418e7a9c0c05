#pragma once

#include <tsdae/chain.hpp>
#include <tsdae/error.hpp>
#include <tsdae/projalg.hpp>
#include <tsdae/timescale.hpp>
#include <tsdae/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsdae {

/// A^sigma(t) (B x)^Delta(t) = C^sigma(t) x^sigma(t) + f(t)
struct ProperProblem {
  MatrixFn A;  // n x m
  MatrixFn B;  // m x n
  MatrixFn C;  // n x n
  VectorFn f;  // n
};

/// A^sigma (P x)^Delta = C^sigma x^sigma + f with P a projector along ker A.
/// Without P the orthogonal projector along ker A(t) is used.
struct StandardProblem {
  MatrixFn A;
  MatrixFn C;
  std::optional<MatrixFn> P;
  VectorFn f;
};

enum class Form { Proper, Standard };

inline std::string_view to_string(Form f) noexcept {
  return f == Form::Proper ? "proper" : "standard";
}

/// Coefficients at a non-final grid point t:
///   u^Delta(t)   = Mdet u(t) + Madv u^sigma(t) + g(t),   g = Fu f(t)
///   v^sigma(t)   = Valg u^sigma(t) + h(t),              h = Vf f(t)
///   x^sigma(t)   = Binv_sigma u^sigma(t) + v^sigma(t)
struct DecoupledPoint {
  double t = 0.0;
  Matrix Mdet;
  Matrix Madv;
  Matrix Fu;
  Vector g;
  Matrix Valg;
  Matrix Vf;
  Vector h;
  Matrix Binv_sigma;  // identity for the standard form
};

/// Non-fatal finding, e.g. a hypothesis of the standard-form theory that the
/// data violates. Entry indices are 1-based; zero when not applicable.
struct Warning {
  std::string code;
  std::string message;
  double t = 0.0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Per-point standard-form data: A1 = A + C Q and its inverse where it exists.
struct StandardFormPoint {
  Matrix P, Q, A1;
  std::optional<Matrix> A1inv;
};

class DecoupledSystem {
 public:
  DecoupledSystem(Form form, TimeScale ts) : form(form), ts(std::move(ts)) {}

  Form form;
  TimeScale ts;
  Eigen::Index n = 0;  // state dimension
  Eigen::Index k = 0;  // inherent dimension (m proper, n standard)
  std::vector<DecoupledPoint> points;  // one per non-final grid point

  // Per grid point: u = state_to_inherent x (B P0 or P), the projector onto the
  // invariant subspace of the inherent equation (B P0 Binv or P), and the map
  // used in reconstruction (Binv or I).
  std::vector<Matrix> state_to_inherent;
  std::vector<Matrix> invariant_projector;
  std::vector<Matrix> inherent_to_state;

  std::vector<StandardFormPoint> standard;  // empty for the proper form
  std::vector<Warning> warnings;
  std::map<std::string, double> max_residuals;

  void note_residual(const std::string& name, double value) {
    auto [it, inserted] = max_residuals.emplace(name, value);
    if (!inserted) it->second = std::max(it->second, value);
  }
};

/// Decoupled system of the properly stated form from an already built chain.
inline DecoupledSystem decouple_chain(const std::vector<ChainPoint>& chain, const VectorFn& f,
                                      const TimeScale& ts) {
  if (chain.size() != ts.size()) throw Error(Errc::DimensionMismatch, "chain and grid differ in size");
  DecoupledSystem ds(Form::Proper, ts);
  ds.n = chain.front().n();
  ds.k = chain.front().m();
  for (const auto& cp : chain) {
    if (cp.index_flag == IndexFlag::NotIndexLe1 || !cp.G1inv) {
      throw Error(Errc::NotIndexOne, "G1 is singular at t=" + std::to_string(cp.t));
    }
    const Matrix bp0 = cp.B * cp.P0.matrix;
    ds.state_to_inherent.push_back(bp0);
    ds.invariant_projector.push_back(bp0 * cp.Binv);
    ds.inherent_to_state.push_back(cp.Binv);

    const Matrix& g1inv = *cp.G1inv;
    const Matrix& q0 = cp.Q0.matrix;
    ds.note_residual("G1*G1inv=I", relative_residual(cp.G1 * g1inv, identity(ds.n)));
    ds.note_residual("G1inv*G0=I-Q0", relative_residual(g1inv * cp.G0, identity(ds.n) - q0));
    ds.note_residual("G1inv*C*Q0=Q0", relative_residual(g1inv * cp.C * q0, q0));
    ds.note_residual("G0*Q0=0", (cp.G0 * q0).norm() / (1.0 + cp.G0.norm()));
    const auto inv = inverse_residuals(cp.B, cp.Binv, cp.P0.matrix, cp.R.matrix);
    ds.note_residual("B*Binv*B=B", inv.bzb_b);
    ds.note_residual("Binv*B*Binv=Binv", inv.zbz_z);
    ds.note_residual("Binv*B=P0", inv.zb_p0);
    ds.note_residual("B*Binv=R", inv.bz_r);
  }
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const ChainPoint& cs = chain[i + 1];  // quantities at sigma(t)
    const double t = ts[i];
    const double mu = ts.mu_at(i);
    const Matrix& g1inv = *cs.G1inv;
    DecoupledPoint dp;
    dp.t = t;
    dp.Mdet = (ds.invariant_projector[i + 1] - ds.invariant_projector[i]) / mu;
    const Matrix bp0 = cs.B * cs.P0.matrix;
    dp.Fu = bp0 * g1inv;
    const Matrix cbinv = cs.C * cs.Binv;
    dp.Madv = dp.Fu * cbinv;
    dp.g = dp.Fu * f(t);
    dp.Vf = -cs.Q0.matrix * g1inv;
    dp.Valg = dp.Vf * cbinv;
    dp.h = dp.Vf * f(t);
    dp.Binv_sigma = cs.Binv;

    const Matrix direct = cs.B * (cs.P0.matrix * (g1inv * (cs.C * cs.Binv)));
    ds.note_residual("Madv assembly order", relative_residual(dp.Madv, direct));
    ds.note_residual("Bs*P0s*G1invs*Cs*Q0s=0",
                     (dp.Fu * cs.C * cs.Q0.matrix).norm() / (1.0 + dp.Fu.norm() * cs.C.norm()));
    ds.points.push_back(std::move(dp));
  }
  return ds;
}

inline DecoupledSystem build_proper(const ProperProblem& problem, const TimeScale& ts, double tol) {
  return decouple_chain(build_chain(problem.A, problem.B, problem.C, ts, tol), problem.f, ts);
}

namespace detail {

/// Largest-magnitude entry of m as (row, col, value), 1-based.
inline Warning largest_entry(const Matrix& m) {
  Eigen::Index r = 0, c = 0;
  if (m.size() > 0) m.cwiseAbs().maxCoeff(&r, &c);
  Warning w;
  w.row = static_cast<int>(r) + 1;
  w.col = static_cast<int>(c) + 1;
  w.value = m.size() > 0 ? m(r, c) : 0.0;
  return w;
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Decoupled system of the standard form. Hypotheses of the standard-form theory
/// (A P = A, ker P = ker A) are checked and reported as ConsistencyWarning; the
/// coefficients are still assembled from the data as given.
inline DecoupledSystem build_standard(const StandardProblem& problem, const TimeScale& ts, double tol) {
  DecoupledSystem ds(Form::Standard, ts);
  const Matrix a0 = problem.A(ts.front());
  ds.n = a0.rows();
  ds.k = a0.rows();
  const auto n = ds.n;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    const Matrix a = problem.A(t);
    const Matrix c = problem.C(t);
    if (a.rows() != n || a.cols() != n || c.rows() != n || c.cols() != n) {
      throw Error(Errc::DimensionMismatch, "standard form needs square A and C of equal size");
    }
    StandardFormPoint sp;
    if (problem.P) {
      sp.P = (*problem.P)(t);
      if (sp.P.rows() != n || sp.P.cols() != n) throw Error(Errc::DimensionMismatch, "P must be n x n");
    } else {
      sp.P = orthogonal_projector_along(kernel_basis(a, tol)).matrix;
    }
    const double idem = Projector{sp.P}.idempotency_residual();
    ds.note_residual("P*P=P", idem);
    if (idem > tol) {
      throw Error(Errc::ProjectorInvalid, "P is not idempotent at t=" + std::to_string(t));
    }
    sp.Q = identity(n) - sp.P;
    sp.A1 = a + c * sp.Q;
    if (numerical_rank(sp.A1, tol) == n) sp.A1inv = sp.A1.fullPivLu().inverse();

    const Matrix ap_a = a * sp.P - a;
    const double ap_res = ap_a.norm() / (1.0 + a.norm());
    ds.note_residual("A*P=A", ap_res);
    if (ap_res > tol) {
      Warning w = detail::largest_entry(ap_a);
      w.code = "ConsistencyWarning";
      w.t = t;
      w.message = "A*P != A at entry (" + std::to_string(w.row) + "," + std::to_string(w.col) +
                  "), (A*P - A) = " + detail::fmt(w.value);
      ds.warnings.push_back(std::move(w));
    }
    const SubspaceBasis ker_a = kernel_basis(a, tol);
    const SubspaceBasis ker_p = kernel_basis(sp.P, tol);
    double ker_res = 0.0;
    if (ker_p.dim() > 0) ker_res = std::max(ker_res, (a * ker_p.basis).norm() / (1.0 + a.norm()));
    if (ker_a.dim() > 0) ker_res = std::max(ker_res, (sp.P * ker_a.basis).norm() / (1.0 + sp.P.norm()));
    ds.note_residual("ker P = ker A", ker_res);
    if (ker_a.dim() != ker_p.dim() || ker_res > tol) {
      Warning w;
      w.code = "ConsistencyWarning";
      w.t = t;
      w.value = ker_res;
      w.message = "ker P != ker A (dim ker P = " + std::to_string(ker_p.dim()) + ", dim ker A = " +
                  std::to_string(ker_a.dim()) + ", containment residual " + detail::fmt(ker_res) + ")";
      ds.warnings.push_back(std::move(w));
    }
    if (sp.A1inv) {
      ds.note_residual("A1inv*A=P", relative_residual(*sp.A1inv * a, sp.P));
      ds.note_residual("A1inv*C*Q=Q", relative_residual(*sp.A1inv * c * sp.Q, sp.Q));
      ds.note_residual("A1*A1inv=I", relative_residual(sp.A1 * *sp.A1inv, identity(n)));
    } else if (i > 0) {
      throw Error(Errc::NotIndexOne, "A1 = A + C Q is singular at t=" + std::to_string(t));
    }
    ds.state_to_inherent.push_back(sp.P);
    ds.invariant_projector.push_back(sp.P);
    ds.inherent_to_state.push_back(identity(n));
    ds.standard.push_back(std::move(sp));
  }
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double t = ts[i];
    const double s = ts[i + 1];
    const StandardFormPoint& sp = ds.standard[i + 1];
    const Matrix cs = problem.C(s);
    DecoupledPoint dp;
    dp.t = t;
    dp.Mdet = (sp.P - ds.standard[i].P) / ts.mu_at(i);
    dp.Fu = sp.P * *sp.A1inv;
    dp.Madv = dp.Fu * cs;
    const Vector ft = problem.f(t);
    dp.g = dp.Fu * ft;
    dp.Vf = -sp.Q * *sp.A1inv;
    dp.Valg = dp.Vf * cs;
    dp.h = dp.Vf * ft;
    dp.Binv_sigma = identity(n);
    ds.points.push_back(std::move(dp));
  }
  return ds;
}

/// A^sigma x^Delta = C^sigma x^sigma + f rewritten as A^sigma (P x)^Delta = C1^sigma x^sigma + f
/// with C1^sigma = A^sigma P^Delta + C^sigma, where P(t) is a projector along
/// ker A(sigma(t)) so that A^sigma P = A^sigma.
struct UnboundReduction {
  MatrixFn A;
  MatrixFn P;
  MatrixFn C1;  // meaningful at sigma-images; equals C at the first grid point
};

inline UnboundReduction reduce_unbound(const MatrixFn& a, const MatrixFn& c,
                                       const std::optional<MatrixFn>& p, const TimeScale& ts,
                                       double tol) {
  Eigen::Index dim = -1;
  for (double t : ts.points()) {
    const auto d = kernel_basis(a(t), tol).dim();
    if (dim >= 0 && d != dim) {
      throw Error(Errc::RankDrift, "dim ker A changes to " + std::to_string(d) + " at t=" + std::to_string(t));
    }
    dim = d;
  }
  MatrixFn pfn;
  if (p) {
    pfn = *p;
  } else {
    pfn = [a, ts, tol](double t) -> Matrix {
      return orthogonal_projector_along(kernel_basis(a(ts.sigma(t)), tol)).matrix;
    };
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Matrix as = a(ts.sigma_at(i));
    const Matrix pm = pfn(ts[i]);
    if (Projector{pm}.idempotency_residual() > tol) {
      throw Error(Errc::ProjectorInvalid, "P is not idempotent at t=" + std::to_string(ts[i]));
    }
    if (relative_residual(as * pm, as) > tol) {
      throw Error(Errc::ProjectorInvalid,
                  "A(sigma(t)) P(t) != A(sigma(t)) at t=" + std::to_string(ts[i]));
    }
  }
  MatrixFn c1 = [a, c, pfn, ts](double s) -> Matrix {
    const std::size_t k = ts.index_of(s);
    if (k == 0) return c(s);
    const double t = ts[k - 1];
    return a(s) * ((pfn(s) - pfn(t)) / (s - t)) + c(s);
  };
  return {a, pfn, c1};
}

/// x^sigma = Binv^sigma u^sigma + v^sigma (proper) or u^sigma + v^sigma (standard),
/// at the non-final grid point with index i.
inline Vector reconstruct(const DecoupledSystem& ds, const Vector& u_sigma, const Vector& v_sigma,
                          std::size_t i) {
  if (i >= ds.points.size()) throw Error(Errc::InvalidArgument, "no sigma-image for this grid index");
  if (u_sigma.size() != ds.k || v_sigma.size() != ds.n) {
    throw Error(Errc::DimensionMismatch, "u^sigma must have size " + std::to_string(ds.k) +
                                             " and v^sigma size " + std::to_string(ds.n));
  }
  return ds.points[i].Binv_sigma * u_sigma + v_sigma;
}

struct ResidualReport {
  double max = 0.0;
  std::vector<double> per_point;  // one per non-final grid point
};

/// max_t ||A^sigma (Bx)^Delta - C^sigma x^sigma - f|| / (1 + ||f||) for a state
/// trajectory x given at every grid point.
inline ResidualReport reversibility_residual(const ProperProblem& problem, const std::vector<Vector>& x,
                                             const TimeScale& ts) {
  if (x.size() < 2 || ts.size() < 2) {
    throw Error(Errc::InsufficientTrajectory, "need the state at two or more consecutive points");
  }
  if (x.size() != ts.size()) throw Error(Errc::DimensionMismatch, "one state per grid point expected");
  ResidualReport rep;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double t = ts[i];
    const double s = ts[i + 1];
    const Vector bx_delta = (problem.B(s) * x[i + 1] - problem.B(t) * x[i]) / ts.mu_at(i);
    const Vector ft = problem.f(t);
    const Vector r = problem.A(s) * bx_delta - problem.C(s) * x[i + 1] - ft;
    const double v = r.norm() / (1.0 + ft.norm());
    rep.per_point.push_back(v);
    rep.max = std::max(rep.max, v);
  }
  return rep;
}

}  // namespace tsdae
