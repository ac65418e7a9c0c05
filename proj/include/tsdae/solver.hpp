#pragma once

#include <tsdae/decouple.hpp>
#include <tsdae/error.hpp>
#include <tsdae/timescale.hpp>
#include <tsdae/types.hpp>

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

namespace tsdae {

/// u at every grid point; v^sigma and x^sigma at the sigma-image of every
/// non-final point, i.e. entry i belongs to grid point i + 1.
class Trajectory {
 public:
  Trajectory(Form form, TimeScale ts) : form(form), ts(std::move(ts)) {}

  Form form;
  TimeScale ts;
  Vector x0;
  std::vector<Vector> u;
  std::vector<Vector> v_sigma;
  std::vector<Vector> x_sigma;
  std::vector<double> inv_dist;   // ||u - Pi u||, Pi the invariant projector, per grid point
  std::vector<double> step_cond;  // condition number of I - mu Madv per step
  std::vector<std::string> notes;

  /// x at every grid point: x0 followed by the reconstructed x^sigma.
  std::vector<Vector> states() const {
    std::vector<Vector> x;
    x.reserve(x_sigma.size() + 1);
    x.push_back(x0);
    x.insert(x.end(), x_sigma.begin(), x_sigma.end());
    return x;
  }
};

struct StepResult {
  Vector u_sigma;
  double cond = 0.0;
};

namespace detail {

/// Solves m y = rhs; throws `code` when sigma_min / sigma_max < rcond_tol.
inline StepResult guarded_solve(const Matrix& m, const Vector& rhs, double rcond_tol, Errc code,
                                double t) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  const double rcond = smax > 0.0 ? smin / smax : 0.0;
  if (!(rcond >= rcond_tol)) {
    throw Error(code, "step matrix is singular to tolerance at t=" + std::to_string(t) +
                          " (reciprocal condition " + std::to_string(rcond) + ")");
  }
  return {m.fullPivLu().solve(rhs), smax / smin};
}

}  // namespace detail

/// One step of the inherent equation at non-final grid index i:
///   (I - mu Madv) u^sigma = (I + mu Mdet) u + mu g.
inline StepResult step_inherent(const DecoupledSystem& ds, const Vector& u, std::size_t i,
                                double step_tol) {
  if (i >= ds.points.size()) throw Error(Errc::InvalidArgument, "no step from the last grid point");
  if (u.size() != ds.k) throw Error(Errc::DimensionMismatch, "u has the wrong size");
  const DecoupledPoint& p = ds.points[i];
  const double mu = ds.ts.mu_at(i);
  const Matrix lhs = identity(ds.k) - mu * p.Madv;
  const Vector rhs = u + mu * (p.Mdet * u) + mu * p.g;
  return detail::guarded_solve(lhs, rhs, step_tol, Errc::NonRegressiveStep, p.t);
}

/// Forward sweep from the first grid point. Only the component of x0 that the
/// inherent map picks up (B P0 x0 or P x0) enters the dynamics.
inline Trajectory solve(const DecoupledSystem& ds, const Vector& x0, double t0, double step_tol) {
  if (t0 != ds.ts.front()) {
    throw Error(Errc::InvalidArgument, "t0 must be the first grid point");
  }
  if (x0.size() != ds.n) {
    throw Error(Errc::DimensionMismatch, "x0 must have size " + std::to_string(ds.n));
  }
  Trajectory tr(ds.form, ds.ts);
  tr.x0 = x0;
  Vector u = ds.state_to_inherent.front() * x0;
  const Vector kept = ds.inherent_to_state.front() * u;
  if ((x0 - kept).norm() > 0.0) {
    tr.notes.push_back("x0 has a component outside the dynamic part (norm " +
                       std::to_string((x0 - kept).norm()) +
                       "); it does not enter the dynamics and x^sigma is consistent regardless");
  }
  auto record_invariance = [&](const Vector& uu, std::size_t i) {
    tr.inv_dist.push_back((uu - ds.invariant_projector[i] * uu).norm());
  };
  tr.u.push_back(u);
  record_invariance(u, 0);
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    StepResult st = step_inherent(ds, u, i, step_tol);
    const DecoupledPoint& p = ds.points[i];
    Vector v = p.Valg * st.u_sigma + p.h;
    tr.x_sigma.push_back(reconstruct(ds, st.u_sigma, v, i));
    tr.v_sigma.push_back(std::move(v));
    tr.step_cond.push_back(st.cond);
    u = std::move(st.u_sigma);
    record_invariance(u, i + 1);
    tr.u.push_back(u);
  }
  return tr;
}

struct OracleTrajectory {
  std::vector<Vector> x;  // every grid point, x[0] = x0
  std::vector<double> step_cond;
};

/// Brute-force reference without projectors: substitute
/// (Bx)^Delta = (B^sigma x^sigma - B x) / mu into the equation and solve
///   (A^sigma B^sigma - mu C^sigma) x^sigma = A^sigma B x + mu f.
inline OracleTrajectory direct_recursion_oracle(const ProperProblem& problem, const TimeScale& ts,
                                                const Vector& x0, double step_tol) {
  OracleTrajectory out;
  out.x.push_back(x0);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double t = ts[i];
    const double s = ts[i + 1];
    const double mu = ts.mu_at(i);
    const Matrix as = problem.A(s);
    const Matrix lhs = as * problem.B(s) - mu * problem.C(s);
    if (lhs.rows() != x0.size()) throw Error(Errc::DimensionMismatch, "x0 has the wrong size");
    const Vector rhs = as * (problem.B(t) * out.x.back()) + mu * problem.f(t);
    StepResult st = detail::guarded_solve(lhs, rhs, step_tol, Errc::OracleStepSingular, t);
    out.x.push_back(std::move(st.u_sigma));
    out.step_cond.push_back(st.cond);
  }
  return out;
}

/// max over sigma-points of ||x_dec - x_ref|| / (1 + ||x_ref||).
inline double oracle_discrepancy(const Trajectory& tr, const OracleTrajectory& oracle) {
  if (oracle.x.size() != tr.x_sigma.size() + 1) {
    throw Error(Errc::DimensionMismatch, "trajectories cover different grids");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.x_sigma.size(); ++i) {
    const Vector& ref = oracle.x[i + 1];
    worst = std::max(worst, (tr.x_sigma[i] - ref).norm() / (1.0 + ref.norm()));
  }
  return worst;
}

struct InvarianceReport {
  double max_ratio = 0.0;
  std::vector<double> ratio;     // per grid point
  std::vector<double> flagged;   // grid points where the ratio exceeds tol
  bool holds() const { return flagged.empty(); }
};

/// dist(u(t), invariant subspace) / (1 + ||u(t)||) at every grid point.
inline InvarianceReport invariance_check(const Trajectory& tr, const DecoupledSystem& ds, double tol) {
  InvarianceReport rep;
  for (std::size_t i = 0; i < tr.u.size(); ++i) {
    const Vector& u = tr.u[i];
    const double d = (u - ds.invariant_projector.at(i) * u).norm() / (1.0 + u.norm());
    rep.ratio.push_back(d);
    rep.max_ratio = std::max(rep.max_ratio, d);
    if (d > tol) rep.flagged.push_back(tr.ts[i]);
  }
  return rep;
}

}  // namespace tsdae
