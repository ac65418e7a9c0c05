#pragma once

// JSON problem files:
// {"form": "proper-stated" | "standard" | "unbound-derivative",
//  "timescale": {"kind": "integer-range", "start": 0, "end": 20} | {"kind": "geometric", ...} | ...,
//  "dimensions": {"n": 5, "m": 3},
//  "A": [["t", "0"], ...], "B": [[...]], "C": [[...]], "f": ["1", "0", ...], "P": [[...]],
//  "initial": {"t0": 1, "x0": [1, 1, 1, 0, 0]},
//  "tolerances": {"rank": 1e-9, "residual": 1e-8, "invariance": 1e-8, "step": 1e-12}}

#include <tsdae/error.hpp>
#include <tsdae/matexpr.hpp>
#include <tsdae/timescale.hpp>
#include <tsdae/types.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace tsdae {

enum class ProblemForm { ProperStated, Standard, UnboundDerivative };

inline std::string_view to_string(ProblemForm f) noexcept {
  switch (f) {
    case ProblemForm::ProperStated: return "proper-stated";
    case ProblemForm::Standard: return "standard";
    case ProblemForm::UnboundDerivative: return "unbound-derivative";
  }
  return "unknown";
}

struct Tolerances {
  double rank = 1e-9;
  double residual = 1e-8;
  double invariance = 1e-8;
  double step = 1e-12;

  /// Sets one tolerance by name; false for an unknown name.
  bool set(std::string_view name, double value) {
    if (name == "rank") rank = value;
    else if (name == "residual") residual = value;
    else if (name == "invariance") invariance = value;
    else if (name == "step") step = value;
    else return false;
    return true;
  }
};

struct InitialData {
  double t0 = 0.0;
  Vector x0;
};

struct ProblemSpec {
  ProblemForm form = ProblemForm::ProperStated;
  std::optional<TimeScale> timescale;  // always set after loading
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  MatrixFunction A, C, f;
  std::optional<MatrixFunction> B;
  std::optional<MatrixFunction> P;
  std::optional<InitialData> initial;
  Tolerances tolerances;

  const TimeScale& ts() const { return *timescale; }
};

namespace detail {

using nlohmann::json;

inline void only_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                      const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::SchemaError, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw Error(Errc::SchemaError, "unexpected field \"" + key + "\" in " + where);
  }
}

inline const json& required(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::SchemaError, "missing field \"" + key + "\" in " + where);
  return *it;
}

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(Errc::SchemaError, what + " must be a number");
  return j.get<double>();
}

inline long long integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw Error(Errc::SchemaError, what + " must be an integer");
  return j.get<long long>();
}

inline std::string expr_string(const json& j, const std::string& what) {
  if (!j.is_string()) throw Error(Errc::SchemaError, what + " entries must be expression strings");
  return j.get<std::string>();
}

inline MatrixFunction matrix_field(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw Error(Errc::SchemaError, name + " must be a non-empty array of rows");
  std::vector<std::vector<std::string>> grid;
  for (const auto& row : j) {
    if (!row.is_array()) throw Error(Errc::SchemaError, name + " rows must be arrays");
    auto& out = grid.emplace_back();
    for (const auto& e : row) out.push_back(expr_string(e, name));
  }
  try {
    return MatrixFunction::parse(grid);
  } catch (const ParseError& e) {
    throw ParseError(e.offset(), "in " + name + ": " + e.what());
  }
}

inline MatrixFunction vector_field(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw Error(Errc::SchemaError, name + " must be a non-empty array");
  std::vector<std::string> col;
  for (const auto& e : j) col.push_back(expr_string(e, name));
  try {
    return MatrixFunction::parse_column(col);
  } catch (const ParseError& e) {
    throw ParseError(e.offset(), "in " + name + ": " + e.what());
  }
}

inline TimeScale timescale_field(const json& j) {
  const std::string where = "timescale";
  const json& kind_j = required(j, "kind", where);
  if (!kind_j.is_string()) throw Error(Errc::SchemaError, "timescale.kind must be a string");
  const std::string kind = kind_j.get<std::string>();
  try {
    if (kind == "integer-range") {
      only_keys(j, {"kind", "start", "end"}, where);
      return TimeScale::integer_range(integer(required(j, "start", where), "timescale.start"),
                                      integer(required(j, "end", where), "timescale.end"));
    }
    if (kind == "geometric") {
      only_keys(j, {"kind", "base", "start", "count"}, where);
      const long long count = integer(required(j, "count", where), "timescale.count");
      if (count <= 0) throw Error(Errc::SchemaError, "timescale.count must be positive");
      return TimeScale::geometric(number(required(j, "base", where), "timescale.base"),
                                  number(required(j, "start", where), "timescale.start"),
                                  static_cast<std::size_t>(count));
    }
    if (kind == "uniform") {
      only_keys(j, {"kind", "a", "b", "points"}, where);
      const long long pts = integer(required(j, "points", where), "timescale.points");
      if (pts < 2) throw Error(Errc::SchemaError, "timescale.points must be at least 2");
      return TimeScale::uniform(number(required(j, "a", where), "timescale.a"),
                                number(required(j, "b", where), "timescale.b"),
                                static_cast<std::size_t>(pts));
    }
    if (kind == "explicit") {
      only_keys(j, {"kind", "points"}, where);
      const json& pts = required(j, "points", where);
      if (!pts.is_array()) throw Error(Errc::SchemaError, "timescale.points must be an array");
      std::vector<double> v;
      for (const auto& p : pts) v.push_back(number(p, "timescale.points"));
      return TimeScale::explicit_points(std::move(v));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidArgument) throw Error(Errc::SchemaError, e.what());
    throw;
  }
  throw Error(Errc::SchemaError, "unknown timescale kind \"" + kind + "\"");
}

inline void expect_shape(const MatrixFunction& mf, Eigen::Index rows, Eigen::Index cols,
                         const std::string& name) {
  if (mf.rows() != rows || mf.cols() != cols) {
    throw Error(Errc::DimensionMismatch, name + " is " + std::to_string(mf.rows()) + "x" +
                                             std::to_string(mf.cols()) + ", expected " +
                                             std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace detail

inline ProblemSpec parse_problem(const nlohmann::json& doc) {
  using detail::required;
  const std::string where = "problem";
  detail::only_keys(doc, {"form", "timescale", "dimensions", "A", "B", "C", "f", "P", "initial", "tolerances"},
                    where);
  ProblemSpec spec;
  const auto& form_j = required(doc, "form", where);
  const std::string form = form_j.is_string() ? form_j.get<std::string>() : "";
  if (form == "proper-stated") spec.form = ProblemForm::ProperStated;
  else if (form == "standard") spec.form = ProblemForm::Standard;
  else if (form == "unbound-derivative") spec.form = ProblemForm::UnboundDerivative;
  else throw Error(Errc::SchemaError, "form must be proper-stated, standard or unbound-derivative");

  spec.timescale = detail::timescale_field(required(doc, "timescale", where));

  const auto& dims = required(doc, "dimensions", where);
  detail::only_keys(dims, {"n", "m"}, "dimensions");
  spec.n = detail::integer(required(dims, "n", "dimensions"), "dimensions.n");
  spec.m = detail::integer(required(dims, "m", "dimensions"), "dimensions.m");
  if (spec.n <= 0 || spec.m <= 0) throw Error(Errc::SchemaError, "dimensions must be positive");

  spec.A = detail::matrix_field(required(doc, "A", where), "A");
  spec.C = detail::matrix_field(required(doc, "C", where), "C");
  spec.f = detail::vector_field(required(doc, "f", where), "f");
  if (doc.contains("B")) spec.B = detail::matrix_field(doc["B"], "B");
  if (doc.contains("P")) spec.P = detail::matrix_field(doc["P"], "P");

  if (spec.form == ProblemForm::ProperStated) {
    if (!spec.B) throw Error(Errc::SchemaError, "proper-stated form requires B");
    if (spec.P) throw Error(Errc::SchemaError, "P is only allowed for standard and unbound-derivative forms");
    detail::expect_shape(spec.A, spec.n, spec.m, "A");
    detail::expect_shape(*spec.B, spec.m, spec.n, "B");
  } else {
    if (spec.B) throw Error(Errc::SchemaError, "B is only allowed for the proper-stated form");
    if (spec.m != spec.n) throw Error(Errc::SchemaError, "standard and unbound forms require m = n");
    detail::expect_shape(spec.A, spec.n, spec.n, "A");
    if (spec.P) detail::expect_shape(*spec.P, spec.n, spec.n, "P");
  }
  detail::expect_shape(spec.C, spec.n, spec.n, "C");
  detail::expect_shape(spec.f, spec.n, 1, "f");

  if (doc.contains("initial")) {
    const auto& init = doc["initial"];
    detail::only_keys(init, {"t0", "x0"}, "initial");
    InitialData data;
    data.t0 = detail::number(required(init, "t0", "initial"), "initial.t0");
    const auto& x0 = required(init, "x0", "initial");
    if (!x0.is_array()) throw Error(Errc::SchemaError, "initial.x0 must be an array");
    data.x0.resize(static_cast<Eigen::Index>(x0.size()));
    for (std::size_t i = 0; i < x0.size(); ++i) {
      data.x0(static_cast<Eigen::Index>(i)) = detail::number(x0[i], "initial.x0");
    }
    if (data.x0.size() != spec.n) {
      throw Error(Errc::DimensionMismatch, "initial.x0 must have n = " + std::to_string(spec.n) + " entries");
    }
    spec.initial = std::move(data);
  }
  if (doc.contains("tolerances")) {
    const auto& tol = doc["tolerances"];
    if (!tol.is_object()) throw Error(Errc::SchemaError, "tolerances must be an object");
    for (const auto& [key, value] : tol.items()) {
      const double v = detail::number(value, "tolerances." + key);
      if (!(v > 0.0)) throw Error(Errc::SchemaError, "tolerances." + key + " must be positive");
      if (!spec.tolerances.set(key, v)) throw Error(Errc::SchemaError, "unknown tolerance \"" + key + "\"");
    }
  }
  return spec;
}

inline ProblemSpec parse_problem_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(doc);
}

inline ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str());
}

}  // namespace tsdae
