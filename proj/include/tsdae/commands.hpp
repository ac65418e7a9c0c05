#pragma once

// The analyze / decouple / solve / verify commands. Each returns a JSON report
// (the deterministic payload) plus an exit code; text and CSV renderings are
// derived from the same data.

#include <tsdae/chain.hpp>
#include <tsdae/decouple.hpp>
#include <tsdae/error.hpp>
#include <tsdae/problem.hpp>
#include <tsdae/random_instances.hpp>
#include <tsdae/solver.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace tsdae {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view version = "0.1.0";

enum ExitCode : int { Success = 0, ValidationFailure = 1, InputError = 2 };

/// Malformed input maps to 2, everything the analysis itself rejects to 1.
inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::SchemaError:
    case Errc::DimensionMismatch:
    case Errc::EvalError:
    case Errc::InvalidArgument:
    case Errc::NotAGridPoint:
      return InputError;
    default:
      return ValidationFailure;
  }
}

/// Negative zero prints as "-0"; normalize so equal values render identically.
inline double plain(double v) { return v == 0.0 ? 0.0 : v; }

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(plain(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(plain(v(i)));
  return out;
}

inline Json error_json(const Error& e) {
  return {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
}

struct Check {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool passed() const { return value <= tol; }
};

inline Json to_json(const std::vector<Check>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name}, {"value", c.value}, {"tol", c.tol}, {"passed", c.passed()}});
  }
  return out;
}

inline bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed()) return false;
  return true;
}

inline Json to_json(const std::vector<Warning>& warnings) {
  Json out = Json::array();
  for (const auto& w : warnings) {
    Json j{{"code", w.code}, {"t", w.t}, {"message", w.message}};
    if (w.row > 0) {
      j["entry"] = {w.row, w.col};
      j["value"] = w.value;
    } else {
      j["residual"] = w.value;
    }
    out.push_back(std::move(j));
  }
  return out;
}

/// A decoupled problem together with the equation its solutions must satisfy,
/// written as A^sigma (B x)^Delta = C^sigma x^sigma + f.
struct Decoupling {
  DecoupledSystem ds;
  ProperProblem equation;
  std::vector<ChainPoint> chain;  // empty for the standard form
};

/// Matrix function defined by one sample per grid point.
inline MatrixFn sampled_fn(const TimeScale& ts, std::vector<Matrix> values) {
  auto data = std::make_shared<const std::vector<Matrix>>(std::move(values));
  return [ts, data](double t) -> Matrix { return (*data)[ts.index_of(t)]; };
}

inline std::optional<MatrixFn> projector_fn(const ProblemSpec& spec) {
  if (!spec.P) return std::nullopt;
  return spec.P->as_fn();
}

inline std::vector<ChainPoint> chain_for(const ProblemSpec& spec, ProperProblem& reduced) {
  const auto& ts = spec.ts();
  const double tol = spec.tolerances.rank;
  if (spec.form == ProblemForm::ProperStated) {
    reduced = {spec.A.as_fn(), spec.B->as_fn(), spec.C.as_fn(), spec.f.as_vector_fn()};
  } else {
    const UnboundReduction red = reduce_unbound(spec.A.as_fn(), spec.C.as_fn(), projector_fn(spec), ts, tol);
    reduced = {red.A, red.P, red.C1, spec.f.as_vector_fn()};
  }
  return build_chain(reduced.A, reduced.B, reduced.C, ts, tol);
}

inline Decoupling decouple_problem(const ProblemSpec& spec) {
  const auto& ts = spec.ts();
  const VectorFn f = spec.f.as_vector_fn();
  if (spec.form == ProblemForm::Standard) {
    StandardProblem sp{spec.A.as_fn(), spec.C.as_fn(), projector_fn(spec), f};
    DecoupledSystem ds = build_standard(sp, ts, spec.tolerances.rank);
    std::vector<Matrix> ps;
    for (const auto& s : ds.standard) ps.push_back(s.P);
    ProperProblem eq{sp.A, sampled_fn(ts, std::move(ps)), sp.C, f};
    return {std::move(ds), std::move(eq), {}};
  }
  ProperProblem reduced;
  std::vector<ChainPoint> chain = chain_for(spec, reduced);
  DecoupledSystem ds = decouple_chain(chain, f, ts);
  if (spec.form == ProblemForm::ProperStated) return {std::move(ds), std::move(reduced), std::move(chain)};
  // The unbound form is checked against the original x^Delta equation (B = I).
  const Eigen::Index n = spec.n;
  ProperProblem original{spec.A.as_fn(), [n](double) -> Matrix { return identity(n); }, spec.C.as_fn(), f};
  return {std::move(ds), std::move(original), std::move(chain)};
}

/// Identity and hypothesis residuals recorded while decoupling, against the
/// residual tolerance (assembly-order independence against 1e-12).
inline std::vector<Check> decoupling_checks(const DecoupledSystem& ds, const Tolerances& tol) {
  std::vector<Check> out;
  for (const auto& [name, value] : ds.max_residuals) {
    out.push_back({name, value, name == "Madv assembly order" ? 1e-12 : tol.residual});
  }
  return out;
}

struct CommandResult {
  Json report;
  int exit_code = Success;
  std::string csv;  // trajectory (solve) or coefficient table (decouple)
};

namespace detail {

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", plain(v));
  return buf;
}

inline void append_matrix_header(std::string& h, const std::string& name, Eigen::Index r, Eigen::Index c) {
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) h += "," + name + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

inline void append_values(std::string& row, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) row += "," + csv_number(m(i, j));
}

inline Json timescale_json(const TimeScale& ts) {
  static constexpr std::string_view kinds[] = {"integer-range", "geometric", "uniform", "explicit"};
  return {{"kind", kinds[static_cast<int>(ts.kind())]},
          {"points", ts.size()},
          {"first", ts.front()},
          {"last", ts.back()}};
}

inline Json header_json(const ProblemSpec& spec, std::string_view command) {
  return {{"command", command},
          {"form", to_string(spec.form)},
          {"n", spec.n},
          {"m", spec.m},
          {"timescale", timescale_json(spec.ts())},
          {"tolerances",
           {{"rank", spec.tolerances.rank},
            {"residual", spec.tolerances.residual},
            {"invariance", spec.tolerances.invariance},
            {"step", spec.tolerances.step}}}};
}

}  // namespace detail

/// Ranks, index, identity residuals and hypothesis warnings.
inline CommandResult analyze(const ProblemSpec& spec) {
  CommandResult res;
  Json rep = detail::header_json(spec, "analyze");
  const auto& ts = spec.ts();
  const double tol = spec.tolerances.rank;
  if (spec.form == ProblemForm::Standard) {
    const Decoupling dec = decouple_problem(spec);
    Json pts = Json::array();
    std::set<std::string> flags;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const auto& sp = dec.ds.standard[i];
      const Matrix a = spec.A(ts[i]);
      const int rank_a = numerical_rank(a, tol);
      const std::string flag = sp.A1inv ? (rank_a == spec.n ? "index0" : "index1") : "not_index_le_1";
      flags.insert(flag);
      pts.push_back({{"t", ts[i]},
                     {"rank_A", rank_a},
                     {"rank_A1", numerical_rank(sp.A1, tol)},
                     {"det_A1", sp.A1.determinant()},
                     {"index", flag}});
    }
    // A1 may only be singular at the first point, which no sigma-image reaches.
    rep["index"] = flags.size() == 1 ? *flags.begin() : "varies";
    rep["points"] = std::move(pts);
    const auto checks = decoupling_checks(dec.ds, spec.tolerances);
    rep["checks"] = to_json(checks);
    rep["checks_passed"] = all_passed(checks);
    rep["warnings"] = to_json(dec.ds.warnings);
    res.report = std::move(rep);
    return res;
  }

  ProperProblem reduced;
  const std::vector<ChainPoint> chain = chain_for(spec, reduced);
  if (spec.form == ProblemForm::UnboundDerivative) {
    rep["reduction"] = spec.P ? "user-supplied P" : "orthogonal projector along ker A(sigma(t))";
  }
  Json pts = Json::array();
  for (const auto& cp : chain) {
    pts.push_back({{"t", cp.t},
                   {"rank_G0", cp.r},
                   {"rank_G1", cp.r1},
                   {"det_G1", cp.G1.determinant()},
                   {"index", to_string(cp.index_flag)}});
  }
  const IndexFlag flag = chain.front().index_flag;
  rep["index"] = to_string(flag);
  rep["points"] = std::move(pts);
  if (flag == IndexFlag::NotIndexLe1) {
    rep["checks"] = Json::array();
    rep["checks_passed"] = false;
    rep["warnings"] = Json::array();
    res.exit_code = ValidationFailure;
  } else {
    const DecoupledSystem ds = decouple_chain(chain, reduced.f, ts);
    const auto checks = decoupling_checks(ds, spec.tolerances);
    rep["checks"] = to_json(checks);
    rep["checks_passed"] = all_passed(checks);
    rep["warnings"] = to_json(ds.warnings);
  }
  res.report = std::move(rep);
  return res;
}

/// Per-point coefficients of the decoupled system.
inline CommandResult decouple(const ProblemSpec& spec) {
  CommandResult res;
  const Decoupling dec = decouple_problem(spec);
  const DecoupledSystem& ds = dec.ds;
  Json rep = detail::header_json(spec, "decouple");
  rep["decoupled_form"] = to_string(ds.form);
  rep["inherent_dim"] = ds.k;
  Json pts = Json::array();
  for (const auto& p : ds.points) {
    Json j{{"t", p.t},       {"Mdet", to_json(p.Mdet)}, {"Madv", to_json(p.Madv)},
           {"Fu", to_json(p.Fu)}, {"g", to_json(p.g)},       {"Valg", to_json(p.Valg)},
           {"Vf", to_json(p.Vf)}, {"h", to_json(p.h)}};
    if (ds.form == Form::Proper) j["Binv_sigma"] = to_json(p.Binv_sigma);
    pts.push_back(std::move(j));
  }
  rep["points"] = std::move(pts);
  rep["warnings"] = to_json(ds.warnings);
  res.report = std::move(rep);

  std::string csv = "t";
  const auto k = ds.k, n = ds.n;
  detail::append_matrix_header(csv, "Mdet", k, k);
  detail::append_matrix_header(csv, "Madv", k, k);
  for (Eigen::Index i = 0; i < k; ++i) csv += ",g_" + std::to_string(i + 1);
  detail::append_matrix_header(csv, "Valg", n, k);
  detail::append_matrix_header(csv, "Vf", n, n);
  detail::append_matrix_header(csv, "Fu", k, n);
  csv += "\n";
  for (const auto& p : ds.points) {
    std::string row = detail::csv_number(p.t);
    detail::append_values(row, p.Mdet);
    detail::append_values(row, p.Madv);
    detail::append_values(row, Matrix(p.g));
    detail::append_values(row, p.Valg);
    detail::append_values(row, p.Vf);
    detail::append_values(row, p.Fu);
    csv += row + "\n";
  }
  res.csv = std::move(csv);
  return res;
}

/// Trajectory CSV: t, u, then v^sigma and x^sigma at sigma(t), invariance
/// distance at t and the condition number of the step leaving t.
inline std::string trajectory_csv(const Trajectory& tr) {
  const auto k = tr.u.front().size();
  const auto n = tr.x0.size();
  std::string csv = "t";
  for (Eigen::Index i = 0; i < k; ++i) csv += ",u_" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < n; ++i) csv += ",vsigma_" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < n; ++i) csv += ",xsigma_" + std::to_string(i + 1);
  csv += ",inv_dist,step_cond\n";
  for (std::size_t i = 0; i < tr.u.size(); ++i) {
    std::string row = detail::csv_number(tr.ts[i]);
    for (Eigen::Index j = 0; j < k; ++j) row += "," + detail::csv_number(tr.u[i](j));
    const bool has_sigma = i < tr.x_sigma.size();
    for (Eigen::Index j = 0; j < n; ++j) row += "," + (has_sigma ? detail::csv_number(tr.v_sigma[i](j)) : "");
    for (Eigen::Index j = 0; j < n; ++j) row += "," + (has_sigma ? detail::csv_number(tr.x_sigma[i](j)) : "");
    row += "," + detail::csv_number(tr.inv_dist[i]);
    row += "," + (has_sigma ? detail::csv_number(tr.step_cond[i]) : "");
    csv += row + "\n";
  }
  return csv;
}

struct SolveSummary {
  double reversibility = 0.0;
  double invariance = 0.0;
  double max_step_cond = 0.0;
};

inline SolveSummary summarize(const Decoupling& dec, const Trajectory& tr, double inv_tol) {
  SolveSummary s;
  s.reversibility = reversibility_residual(dec.equation, tr.states(), tr.ts).max;
  s.invariance = invariance_check(tr, dec.ds, inv_tol).max_ratio;
  for (double c : tr.step_cond) s.max_step_cond = std::max(s.max_step_cond, c);
  return s;
}

inline CommandResult solve_command(const ProblemSpec& spec) {
  if (!spec.initial) throw Error(Errc::SchemaError, "solve needs \"initial\" data in the problem file");
  CommandResult res;
  const Decoupling dec = decouple_problem(spec);
  const Trajectory tr = solve(dec.ds, spec.initial->x0, spec.initial->t0, spec.tolerances.step);
  const SolveSummary s = summarize(dec, tr, spec.tolerances.invariance);
  Json rep = detail::header_json(spec, "solve");
  rep["t0"] = spec.initial->t0;
  rep["x0"] = to_json(spec.initial->x0);
  rep["reversibility_residual"] = s.reversibility;
  rep["max_invariance_ratio"] = s.invariance;
  rep["max_step_cond"] = s.max_step_cond;
  rep["notes"] = tr.notes;
  rep["warnings"] = to_json(dec.ds.warnings);
  Json traj = Json::array();
  for (std::size_t i = 0; i < tr.u.size(); ++i) {
    Json p{{"t", tr.ts[i]}, {"u", to_json(tr.u[i])}, {"inv_dist", tr.inv_dist[i]}};
    if (i < tr.x_sigma.size()) {
      p["v_sigma"] = to_json(tr.v_sigma[i]);
      p["x_sigma"] = to_json(tr.x_sigma[i]);
      p["step_cond"] = tr.step_cond[i];
    }
    traj.push_back(std::move(p));
  }
  rep["trajectory"] = std::move(traj);
  res.report = std::move(rep);
  res.csv = trajectory_csv(tr);
  return res;
}

/// Every property this problem can be checked for: decoupling identities and
/// hypotheses, reversibility and invariance of solves from the given and from a
/// seeded random x0, agreement with the direct recursion, and linearity.
inline CommandResult verify(const ProblemSpec& spec, std::uint64_t seed) {
  CommandResult res;
  const Tolerances& tol = spec.tolerances;
  const Decoupling dec = decouple_problem(spec);
  const auto& ts = spec.ts();
  std::vector<Check> checks = decoupling_checks(dec.ds, tol);
  Json notes = Json::array();

  std::vector<std::pair<std::string, Vector>> starts;
  if (spec.initial) {
    if (spec.initial->t0 != ts.front()) throw Error(Errc::InvalidArgument, "t0 must be the first grid point");
    starts.emplace_back("given x0", spec.initial->x0);
  }
  InstanceGenerator gen(seed);
  starts.emplace_back("random x0", gen.gaussian_vector(spec.n));

  for (const auto& [label, x0] : starts) {
    const Trajectory tr = solve(dec.ds, x0, ts.front(), tol.step);
    const SolveSummary s = summarize(dec, tr, tol.invariance);
    checks.push_back({"reversibility (" + label + ")", s.reversibility, tol.residual});
    checks.push_back({"invariance (" + label + ")", s.invariance, tol.invariance});
    try {
      const OracleTrajectory oracle = direct_recursion_oracle(dec.equation, ts, x0, tol.step);
      checks.push_back({"direct recursion agreement (" + label + ")", oracle_discrepancy(tr, oracle),
                        tol.residual});
    } catch (const Error& e) {
      if (e.code() != Errc::OracleStepSingular) throw;
      notes.push_back("direct recursion skipped (" + label + "): " + std::string(e.what()));
    }
    // Linearity: doubling x0 and f doubles the solution.
    DecoupledSystem doubled = dec.ds;
    for (auto& p : doubled.points) {
      p.g *= 2.0;
      p.h *= 2.0;
    }
    const Trajectory tr2 = solve(doubled, 2.0 * x0, ts.front(), tol.step);
    double lin = 0.0;
    for (std::size_t i = 0; i < tr.x_sigma.size(); ++i) {
      lin = std::max(lin, (tr2.x_sigma[i] - 2.0 * tr.x_sigma[i]).norm() / (1.0 + 2.0 * tr.x_sigma[i].norm()));
    }
    checks.push_back({"linearity (" + label + ")", lin, 1e-10});
  }

  Json rep = detail::header_json(spec, "verify");
  rep["seed"] = seed;
  rep["checks"] = to_json(checks);
  rep["warnings"] = to_json(dec.ds.warnings);
  rep["notes"] = std::move(notes);
  const bool ok = all_passed(checks) && dec.ds.warnings.empty();
  rep["passed"] = ok;
  res.exit_code = ok ? Success : ValidationFailure;
  res.report = std::move(rep);
  return res;
}

/// Report document: deterministic payload plus a separate metadata block.
inline Json wrap_report(Json report, std::string_view command, const std::string& input) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {{"metadata", {{"tool", "tsdae"}, {"version", version}, {"command", command}, {"input", input},
                        {"generated_at", stamp}}},
          {"report", std::move(report)}};
}

namespace detail {

inline void render(const Json& j, const std::string& indent, std::ostringstream& out) {
  std::size_t index = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++index) {
    const std::string key = j.is_object() ? it.key() : "[" + std::to_string(index) + "]";
    const Json& v = it.value();
    const bool nested = (v.is_object() && !v.empty()) ||
                        (v.is_array() && !v.empty() && (v.front().is_object()));
    if (nested) {
      out << indent << key << ":\n";
      render(v, indent + "  ", out);
    } else if (v.is_string()) {
      out << indent << key << ": " << v.get<std::string>() << "\n";
    } else {
      out << indent << key << ": " << v.dump() << "\n";
    }
  }
}

}  // namespace detail

/// Human-readable rendering of a report; every value is printed exactly as in the JSON.
inline std::string render_text(const Json& report) {
  std::ostringstream out;
  detail::render(report, "", out);
  return out.str();
}

}  // namespace tsdae
