#pragma once

// End-to-end acceptance checks: regression against the two worked examples,
// randomized identity / kernel / solver suites and delta-calculus properties.
// Shared by `tsdae selftest` and the acceptance test binary.

#include <tsdae/chain.hpp>
#include <tsdae/commands.hpp>
#include <tsdae/decouple.hpp>
#include <tsdae/random_instances.hpp>
#include <tsdae/reference_problems.hpp>
#include <tsdae/solver.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace tsdae::selftest {

inline constexpr std::uint64_t default_seed = 20240611;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// max_ij |a - b| / max(|b_ij|, s), s the smallest nonzero |b| (1 when b = 0),
/// so zero entries are held to the scale of the matrix's smallest entry.
inline double entrywise_relative(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  double s = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const double v = std::abs(b.data()[i]);
    if (v > 0.0) s = std::min(s, v);
  }
  if (!std::isfinite(s)) s = 1.0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / std::max(std::abs(b.data()[i]), s));
  }
  return worst;
}

/// max_ij |a - b| / max(1, |b_ij|)
inline double entrywise_mixed(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / std::max(1.0, std::abs(b.data()[i])));
  }
  return worst;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

/// Tracks the worst value of a set of named residuals.
struct Worst {
  double value = 0.0;
  std::string where;
  void update(double v, const std::string& label) {
    if (where.empty() || v > value) {
      value = v;
      where = label;
    }
  }
};

template <class F>
CriterionResult timed(int id, std::string name, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.id = id;
  r.name = std::move(name);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace detail

// Closed forms printed for the second worked example.
namespace example2_expected {
inline Matrix G1(double t) {
  const double s = t * t;
  return detail::mat({{s, 0, 0, -1, 1}, {0, s, 0, 1, 0}, {0, 0, s, 0, 0}, {0, 0, 0, -s, 0}, {0, 0, 0, 0, s}});
}
inline Matrix G1inv(double t) {
  const double a = 1 / (t * t), b = 1 / (t * t * t * t);
  return detail::mat({{a, 0, 0, -b, -b}, {0, a, 0, b, 0}, {0, 0, a, 0, 0}, {0, 0, 0, -a, 0}, {0, 0, 0, 0, a}});
}
inline Matrix Binv(double t) {
  return detail::mat({{1 / t, 0, 0}, {0, 1 / (t * t), 0}, {0, 0, 1}, {0, 0, 0}, {0, 0, 0}});
}
inline Matrix Fu(double t) {
  const double c = 1 / (8 * t * t * t), d = 1 / (4 * t * t);
  return detail::mat({{1 / (2 * t), 0, 0, -c, -c}, {0, 1, 0, d, 0}, {0, 0, d, 0, 0}});
}
inline Matrix Madv(double t) {
  const double t3 = t * t * t, t4 = t3 * t, t5 = t4 * t;
  return detail::mat({{0, -1 / (32 * t5), 0}, {-1 / (8 * t3), 1 / (16 * t4), 2 * t}, {0, -1 / (16 * t4), 0}});
}
/// Q0^sigma (G1^{-1})^sigma
inline Matrix Q0G1inv(double t) {
  const double d = 1 / (4 * t * t);
  Matrix m = Matrix::Zero(5, 5);
  m(3, 3) = -d;
  m(4, 4) = d;
  return m;
}
/// Q0^sigma (G1^{-1})^sigma C^sigma B^{-sigma}
inline Matrix Q0G1invCBinv(double t) {
  const double c = 1 / (8 * t * t * t), e = 1 / (16 * t * t * t * t);
  Matrix m = Matrix::Zero(5, 3);
  m(3, 0) = c;
  m(3, 1) = -e;
  m(4, 0) = c;
  return m;
}
}  // namespace example2_expected

// Closed forms printed for the first worked example (sigma(t) = t + 1).
namespace example1_expected {
inline Matrix A1(double t) { return detail::mat({{-1, 2 * (t + 1), -1}, {0, 1, 0}, {0, 3 * t + 5, -1}}); }
inline Matrix A1inv(double t) { return detail::mat({{-1, -(t + 3), 1}, {0, 1, 0}, {0, 3 * t + 5, -1}}); }
inline Matrix Q(double t) { return detail::mat({{0, 0, 0}, {0, 1, 0}, {0, t + 1, 0}}); }
inline Matrix Pdelta() { return detail::mat({{0, 0, 0}, {0, 0, 0}, {0, -1, 0}}); }
/// P^sigma (A1^{-1})^sigma
inline Matrix PA1inv(double t) { return detail::mat({{-1, -(t + 4), 1}, {0, 0, 0}, {0, 2 * (t + 3), -1}}); }
/// P^sigma (A1^{-1})^sigma C^sigma
inline Matrix PA1invC(double t) {
  return detail::mat({{0, (t + 2) * (t + 3), -(t + 4)}, {0, 0, 0}, {0, -2 * (t + 2) * (t + 2), 2 * t + 5}});
}
/// Q^sigma (A1^{-1})^sigma
inline Matrix QA1inv(double t) { return detail::mat({{0, 0, 0}, {0, 1, 0}, {0, t + 2, 0}}); }
/// Q^sigma (A1^{-1})^sigma C^sigma
inline Matrix QA1invC(double t) {
  return detail::mat({{0, 0, 0}, {0, -t - 1, 1}, {0, -(t + 1) * (t + 2), t + 2}});
}
/// f-coefficient as printed in the final decoupled system; entry (1,3) reads -1
/// there while the product P^sigma (A1^{-1})^sigma gives +1.
inline Matrix printed_f_coefficient(double t) {
  return detail::mat({{-1, -(t + 4), -1}, {0, 0, 0}, {0, 2 * (t + 3), -1}});
}
}  // namespace example1_expected

inline CriterionResult example2_regression() {
  CriterionResult r;
  const auto start = std::chrono::steady_clock::now();
  const ProblemSpec spec = reference::example2();
  const Decoupling dec = decouple_problem(spec);
  const auto& ts = spec.ts();
  namespace ex = example2_expected;
  detail::Worst worst;
  double det_err = 0.0;
  const Matrix i3 = identity(3);
  for (double t : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const std::size_t i = ts.index_of(t);
    const ChainPoint& cp = dec.chain[i];
    const ChainPoint& cs = dec.chain[i + 1];
    const DecoupledPoint& dp = dec.ds.points[i];
    const std::string at = " at t=" + detail::sci(t);
    auto cmp = [&](const std::string& name, const Matrix& a, const Matrix& b) {
      worst.update(detail::entrywise_relative(a, b), name + at);
    };
    if (!cp.G1inv || !cs.G1inv) throw Error(Errc::NotIndexOne, "G1 singular" + at);
    cmp("G1", cp.G1, ex::G1(t));
    cmp("G1inv", *cp.G1inv, ex::G1inv(t));
    cmp("G1inv^sigma", *cs.G1inv, ex::G1inv(2 * t));
    cmp("Binv", cp.Binv, ex::Binv(t));
    cmp("Binv^sigma", dp.Binv_sigma, ex::Binv(2 * t));
    cmp("R", cp.R.matrix, i3);
    cmp("B P0 Binv", dec.ds.invariant_projector[i], i3);
    cmp("Mdet", dp.Mdet, Matrix::Zero(3, 3));
    cmp("Fu", dp.Fu, ex::Fu(t));
    cmp("Madv", dp.Madv, ex::Madv(t));
    cmp("Q0 G1inv (sigma)", -dp.Vf, ex::Q0G1inv(t));
    cmp("Q0 G1inv C Binv (sigma)", -dp.Valg, ex::Q0G1invCBinv(t));
    const double expected_det = -std::pow(t, 10);
    det_err = std::max(det_err, std::abs(cp.G1.determinant() - expected_det) / std::abs(expected_det));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.passed = worst.value <= 1e-10 && det_err <= 1e-10 && secs < 1.0;
  r.detail = "max entrywise relative error " + detail::sci(worst.value) + " (" + worst.where +
             "), det G1 relative error " + detail::sci(det_err) + ", " + detail::sci(secs) + " s";
  return r;
}

inline CriterionResult example1_regression() {
  CriterionResult r;
  const ProblemSpec spec = reference::example1();
  const Decoupling dec = decouple_problem(spec);
  const auto& ds = dec.ds;
  namespace ex = example1_expected;
  detail::Worst worst;
  double det_err = 0.0;
  bool exception_reproduced = true;
  for (int k = 0; k <= 5; ++k) {
    const double t = k;
    const std::size_t i = spec.ts().index_of(t);
    const StandardFormPoint& sp = ds.standard[i];
    const DecoupledPoint& dp = ds.points[i];
    const std::string at = " at t=" + std::to_string(k);
    auto cmp = [&](const std::string& name, const Matrix& a, const Matrix& b) {
      worst.update(detail::entrywise_mixed(a, b), name + at);
    };
    if (!sp.A1inv) throw Error(Errc::NotIndexOne, "A1 singular" + at);
    cmp("A1", sp.A1, ex::A1(t));
    cmp("A1inv", *sp.A1inv, ex::A1inv(t));
    cmp("Q", sp.Q, ex::Q(t));
    cmp("P^Delta", dp.Mdet, ex::Pdelta());
    cmp("P A1inv (sigma)", dp.Fu, ex::PA1inv(t));
    cmp("P A1inv C (sigma)", dp.Madv, ex::PA1invC(t));
    cmp("Q A1inv (sigma)", -dp.Vf, ex::QA1inv(t));
    cmp("Q A1inv C (sigma)", -dp.Valg, ex::QA1invC(t));
    // The final display's f-coefficient agrees except at (1,3), which is +1.
    Matrix printed = ex::printed_f_coefficient(t);
    exception_reproduced = exception_reproduced && std::abs(dp.Fu(0, 2) - 1.0) <= 1e-12;
    printed(0, 2) = 1.0;
    cmp("f-coefficient", dp.Fu, printed);
    det_err = std::max(det_err, std::abs(sp.A1.determinant() - 1.0));
  }
  r.passed = worst.value <= 1e-12 && det_err <= 1e-12 && exception_reproduced;
  r.detail = "max entrywise error " + detail::sci(worst.value) + " (" + worst.where + "), |det A1 - 1| " +
             detail::sci(det_err) + ", f-coefficient (1,3) = +1 " +
             (exception_reproduced ? "reproduced" : "NOT reproduced");
  return r;
}

inline CriterionResult example1_hypothesis_detection() {
  CriterionResult r;
  const ProblemSpec spec = reference::example1();
  const CommandResult res = analyze(spec);
  const Json& rep = res.report;
  std::size_t entry_hits = 0, kernel_hits = 0;
  for (double t : spec.ts().points()) {
    bool entry = false, kernel = false;
    for (const auto& w : rep["warnings"]) {
      if (w["code"] != "ConsistencyWarning" || w["t"].get<double>() != t) continue;
      if (w.contains("entry") && w["entry"] == Json::array({3, 2}) &&
          std::abs(w["value"].get<double>() + (t + 1)) <= 1e-12 * (t + 2)) {
        entry = true;
      }
      if (w["message"].get<std::string>().rfind("ker P != ker A", 0) == 0) kernel = true;
    }
    entry_hits += entry;
    kernel_hits += kernel;
  }
  bool identities_flagged = false;
  for (const auto& c : rep["checks"]) {
    if ((c["name"] == "A1inv*A=P" || c["name"] == "A1inv*C*Q=Q") && !c["passed"].get<bool>()) identities_flagged = true;
  }
  const std::size_t n = spec.ts().size();
  r.passed = entry_hits == n && kernel_hits == n && identities_flagged && !rep["checks_passed"].get<bool>();
  r.detail = "(A P - A)(3,2) = -(t+1) flagged at " + std::to_string(entry_hits) + "/" + std::to_string(n) +
             " points, ker P != ker A at " + std::to_string(kernel_hits) + "/" + std::to_string(n) +
             ", A1inv-identity checks " + (identities_flagged ? "reported as failed" : "NOT flagged");
  return r;
}

inline CriterionResult identity_suite(std::uint64_t seed, int instances = 200) {
  CriterionResult r;
  InstanceGenerator gen(seed);
  detail::Worst worst;
  const double tol = 1e-9;
  const auto start = std::chrono::steady_clock::now();
  for (int k = 0; k < instances; ++k) {
    const RandomProblem rp = gen.index1(12);
    const auto chain = build_chain(rp.problem.A, rp.problem.B, rp.problem.C, rp.ts, tol);
    for (const auto& cp : chain) {
      const ChainPoint alt = build_chain_point(cp.t, cp.A, cp.B, cp.C, tol, gen.alternative_p0(cp, tol));
      for (const ChainPoint* c : {&cp, &alt}) {
        const std::string label = std::string(c == &cp ? "" : "alternative ") + "instance " + std::to_string(k);
        worst.update(inverse_residuals(c->B, c->Binv, c->P0.matrix, c->R.matrix).max(), "Binv identities, " + label);
        const Matrix& g1inv = *c->G1inv;
        worst.update(relative_residual(g1inv * c->G0, identity(c->n()) - c->Q0.matrix), "G1inv G0, " + label);
        worst.update(relative_residual(g1inv * c->C * c->Q0.matrix, c->Q0.matrix), "G1inv C Q0, " + label);
      }
      const ChainComparison cmp = compare_chains(cp, alt, tol);
      for (const auto& [name, v] : cmp.identity_residuals) worst.update(v, name + ", instance " + std::to_string(k));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.passed = worst.value <= 1e-9 && secs < 30.0;
  r.detail = std::to_string(instances) + " instances, max residual " + detail::sci(worst.value) + " (" + worst.where +
             "), " + detail::sci(secs) + " s";
  return r;
}

inline CriterionResult kernel_sum_suite(std::uint64_t seed, int instances = 50) {
  CriterionResult r;
  InstanceGenerator gen(seed);
  const double tol = 1e-9;
  int held = 0;
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const Level1Instance inst = gen.level1(tol);
    const ChainPoint cp = build_chain_point(0.0, inst.A, inst.B, inst.C, tol);
    const ChainLevel1 lvl = build_level1(cp, tol);
    const KernelSumReport rep = kernel_sum_report(cp, lvl, tol);
    held += rep.holds(tol) && rep.dim_n1 >= 1;
    worst = std::max(worst, rep.annihilation_residual);
  }
  r.passed = held == instances;
  r.detail = std::to_string(held) + "/" + std::to_string(instances) +
             " instances with dim ker(P0 P1) = dim N0 + dim N1, max annihilation residual " + detail::sci(worst);
  return r;
}

/// Shared by the oracle, invariance and reversibility criteria.
struct SolveSuite {
  int random_solves = 0;
  int total_solves = 0;
  double oracle = 0.0;
  double invariance = 0.0;
  double reversibility = 0.0;
};

inline SolveSuite run_solve_suite(std::uint64_t seed, int instances = 50) {
  SolveSuite s;
  InstanceGenerator gen(seed + 1);
  auto account = [&](const Decoupling& dec, const Trajectory& tr) {
    s.invariance = std::max(s.invariance, invariance_check(tr, dec.ds, 1e-8).max_ratio);
    s.reversibility = std::max(s.reversibility, reversibility_residual(dec.equation, tr.states(), tr.ts).max);
    ++s.total_solves;
  };
  for (int k = 0; k < instances; ++k) {
    const RandomProblem rp = gen.index1(30, false);
    const auto chain = build_chain(rp.problem.A, rp.problem.B, rp.problem.C, rp.ts, 1e-9);
    Decoupling dec{decouple_chain(chain, rp.problem.f, rp.ts), rp.problem, chain};
    const Trajectory tr = solve(dec.ds, rp.x0, rp.ts.front(), 1e-12);
    const OracleTrajectory oracle = direct_recursion_oracle(rp.problem, rp.ts, rp.x0, 1e-12);
    s.oracle = std::max(s.oracle, oracle_discrepancy(tr, oracle));
    account(dec, tr);
    ++s.random_solves;
  }
  // The second worked example with the forcing of the fixture and with f = (1, ..., 1).
  ProblemSpec spec = reference::example2();
  for (int variant = 0; variant < 2; ++variant) {
    if (variant == 1) spec.f = MatrixFunction::constant(Matrix::Ones(spec.n, 1));
    const Decoupling dec = decouple_problem(spec);
    const Trajectory tr = solve(dec.ds, spec.initial->x0, spec.initial->t0, spec.tolerances.step);
    const OracleTrajectory oracle = direct_recursion_oracle(dec.equation, spec.ts(), spec.initial->x0, 1e-12);
    s.oracle = std::max(s.oracle, oracle_discrepancy(tr, oracle));
    account(dec, tr);
  }
  return s;
}

inline CriterionResult oracle_equivalence(const SolveSuite& s) {
  return {6, "", s.oracle <= 1e-8,
          std::to_string(s.random_solves) + " random index-1 problems on 30-point grids plus 2 example solves, "
          "max relative x^sigma difference " + detail::sci(s.oracle)};
}

inline CriterionResult invariance(const SolveSuite& s) {
  return {7, "", s.invariance <= 1e-8,
          std::to_string(s.total_solves) + " solves, max dist(u, im B P0) / (1 + |u|) " + detail::sci(s.invariance)};
}

inline CriterionResult reversibility(const SolveSuite& s) {
  return {8, "", s.reversibility <= 1e-8,
          std::to_string(s.total_solves) + " solves, max scaled residual in the original equation " +
              detail::sci(s.reversibility)};
}

inline CriterionResult delta_calculus(std::uint64_t seed) {
  CriterionResult r;
  InstanceGenerator gen(seed + 2);
  double jump = 0.0, product = 0.0;
  for (int k = 0; k < 50; ++k) {
    const TimeScale ts = gen.grid(20);
    const SmoothMatrix fa = gen.smooth(3, 4), fb = gen.smooth(4, 2);
    const GridMatrixSamples f = tabulate(MatrixFn(fa), ts);
    const GridMatrixSamples g = tabulate(MatrixFn(fb), ts);
    std::vector<Matrix> prod;
    for (std::size_t i = 0; i < ts.size(); ++i) prod.push_back(f[i] * g[i]);
    const GridMatrixSamples fg(ts, prod);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const double mu = ts.mu_at(i);
      jump = std::max(jump, relative_residual(f[i] + mu * f.delta_at(i), f[i + 1]));
      product = std::max(product, relative_residual(fg.delta_at(i), f.delta_at(i) * g[i] + f[i + 1] * g.delta_at(i)));
    }
  }
  const ProblemSpec ex1 = reference::example1();
  const TimeScale ts = TimeScale::integer_range(0, 10);
  const KernelFlow flow = kernel_flow(ex1.A.as_fn(), ts, 0.0, 1e-9);
  double annihilation = 0.0, smin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < flow.bases.size(); ++k) {
    const Matrix& nb = flow.bases[k];
    annihilation = std::max(annihilation, (ex1.A(ts[flow.start_index + k]) * nb).norm());
    smin = std::min(smin, Eigen::JacobiSVD<Matrix>(nb).singularValues().minCoeff());
  }
  r.passed = jump <= 1e-14 && product <= 1e-12 && annihilation <= 1e-10 && smin > 1e-6 && flow.bases.size() == 11;
  r.detail = "f^sigma = f + mu f^Delta to " + detail::sci(jump) + ", product rule to " + detail::sci(product) +
             "; kernel flow on t=0..10: max |A n| " + detail::sci(annihilation) + ", min sigma_min " + detail::sci(smin);
  return r;
}

inline std::vector<CriterionResult> run(std::uint64_t seed = default_seed) {
  std::vector<CriterionResult> out;
  out.push_back(detail::timed(1, "worked example 2 regression", [] { return example2_regression(); }));
  out.push_back(detail::timed(2, "worked example 1 regression", [] { return example1_regression(); }));
  out.push_back(detail::timed(3, "worked example 1 hypothesis detection", [] { return example1_hypothesis_detection(); }));
  out.push_back(detail::timed(4, "chain identity suite", [&] { return identity_suite(seed); }));
  out.push_back(detail::timed(5, "kernel of P0 P1 suite", [&] { return kernel_sum_suite(seed); }));
  SolveSuite suite;
  std::string suite_error;
  const auto start = std::chrono::steady_clock::now();
  try {
    suite = run_solve_suite(seed);
  } catch (const std::exception& e) {
    suite_error = e.what();
  }
  const double suite_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::pair<int, std::string> names[] = {
      {6, "decoupled solve vs direct recursion"}, {7, "invariance of im B P0"}, {8, "reversibility of solves"}};
  for (const auto& [id, name] : names) {
    CriterionResult c;
    if (!suite_error.empty()) {
      c.detail = "exception: " + suite_error;
    } else {
      c = id == 6 ? oracle_equivalence(suite) : id == 7 ? invariance(suite) : reversibility(suite);
    }
    c.id = id;
    c.name = name;
    c.seconds = suite_secs;
    out.push_back(std::move(c));
  }
  out.push_back(detail::timed(9, "delta calculus and kernel flow", [&] { return delta_calculus(seed); }));
  return out;
}

inline std::string format_line(const CriterionResult& c) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] criterion %d: ", c.passed ? "PASS" : "FAIL", c.id);
  return head + c.name + " -- " + c.detail + " (" + detail::sci(c.seconds) + " s)";
}

}  // namespace tsdae::selftest
