#include <tsdae/commands.hpp>
#include <tsdae/problem.hpp>
#include <tsdae/reference_problems.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace tsdae;

namespace {

std::string fixture(const std::string& name) { return std::string(TSDAE_FIXTURES) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Errc code_of(const std::string& text) {
  try {
    (void)parse_problem_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << text;
  return Errc::InvalidArgument;
}

const char* kMinimal = R"({"form": "standard", "timescale": {"kind": "integer-range", "start": 0, "end": 3},
  "dimensions": {"n": 1, "m": 1}, "A": [["1"]], "C": [["0.5"]], "f": ["0"]})";

}  // namespace

TEST(LoadProblem, Fixtures) {
  const auto ex1 = load_problem(fixture("example1.json"));
  EXPECT_EQ(ex1.form, ProblemForm::Standard);
  EXPECT_EQ(ex1.n, 3);
  EXPECT_EQ(ex1.m, 3);
  EXPECT_EQ(ex1.ts().size(), 21u);
  EXPECT_TRUE(ex1.P.has_value());

  const auto ex2 = load_problem(fixture("example2.json"));
  EXPECT_EQ(ex2.form, ProblemForm::ProperStated);
  EXPECT_EQ(ex2.n, 5);
  EXPECT_EQ(ex2.m, 3);
  EXPECT_DOUBLE_EQ(ex2.ts().back(), 1024);
  ASSERT_TRUE(ex2.initial.has_value());
  EXPECT_DOUBLE_EQ(ex2.initial->t0, 1);
}

TEST(LoadProblem, FixturesMatchEmbeddedCopies) {
  EXPECT_EQ(nlohmann::json::parse(slurp(fixture("example1.json"))), nlohmann::json::parse(reference::example1_json));
  EXPECT_EQ(nlohmann::json::parse(slurp(fixture("example2.json"))), nlohmann::json::parse(reference::example2_json));
}

TEST(LoadProblem, MissingFile) {
  try {
    (void)load_problem(fixture("does-not-exist.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidArgument);
  }
}

TEST(ParseProblem, Minimal) {
  const auto spec = parse_problem_text(kMinimal);
  EXPECT_EQ(spec.n, 1);
  EXPECT_FALSE(spec.initial.has_value());
  EXPECT_DOUBLE_EQ(spec.tolerances.rank, 1e-9);
}

TEST(ParseProblem, SchemaErrors) {
  auto with = [](const std::string& key, const std::string& value) {
    auto doc = nlohmann::json::parse(kMinimal);
    doc[key] = nlohmann::json::parse(value);
    return doc.dump();
  };
  EXPECT_EQ(code_of(with("B", R"([["1"]])")), Errc::SchemaError);
  EXPECT_EQ(code_of(with("extra", "1")), Errc::SchemaError);
  EXPECT_EQ(code_of(with("form", R"("implicit")")), Errc::SchemaError);
  EXPECT_EQ(code_of(with("timescale", R"({"kind": "spiral"})")), Errc::SchemaError);
  EXPECT_EQ(code_of(with("timescale", R"({"kind": "integer-range", "start": 3, "end": 1})")), Errc::SchemaError);
  EXPECT_EQ(code_of(with("A", R"([[1]])")), Errc::SchemaError);
  EXPECT_EQ(code_of(with("tolerances", R"({"rank": -1})")), Errc::SchemaError);
  EXPECT_EQ(code_of(with("tolerances", R"({"bogus": 1})")), Errc::SchemaError);
  auto proper = nlohmann::json::parse(kMinimal);
  proper["form"] = "proper-stated";
  EXPECT_EQ(code_of(proper.dump()), Errc::SchemaError);  // needs B
}

TEST(ParseProblem, DimensionErrors) {
  auto doc = nlohmann::json::parse(kMinimal);
  doc["C"] = nlohmann::json::array({nlohmann::json::array({"1", "2"})});
  EXPECT_EQ(code_of(doc.dump()), Errc::DimensionMismatch);
  doc = nlohmann::json::parse(kMinimal);
  doc["initial"] = {{"t0", 0}, {"x0", {1, 2}}};
  EXPECT_EQ(code_of(doc.dump()), Errc::DimensionMismatch);
}

TEST(ParseProblem, ExpressionAndJsonErrors) {
  auto doc = nlohmann::json::parse(kMinimal);
  doc["A"] = nlohmann::json::array({nlohmann::json::array({"2t"})});
  EXPECT_EQ(code_of(doc.dump()), Errc::ParseError);
  EXPECT_EQ(code_of("{\"form\": "), Errc::ParseError);
}

TEST(ParseProblem, TimescaleKinds) {
  auto doc = nlohmann::json::parse(kMinimal);
  doc["timescale"] = {{"kind", "uniform"}, {"a", 0}, {"b", 1}, {"points", 11}};
  EXPECT_DOUBLE_EQ(parse_problem(doc).ts().graininess(0.5), 0.1);
  doc["timescale"] = {{"kind", "explicit"}, {"points", {0, 0.5, 2}}};
  EXPECT_DOUBLE_EQ(parse_problem(doc).ts().sigma(0.5), 2);
  doc["timescale"] = {{"kind", "geometric"}, {"base", 3}, {"start", 1}, {"count", 4}};
  EXPECT_DOUBLE_EQ(parse_problem(doc).ts().back(), 27);
}

TEST(Commands, AnalyzePowersOfTwo) {
  const auto res = analyze(reference::example2());
  EXPECT_EQ(res.exit_code, Success);
  const auto& pts = res.report.at("points");
  ASSERT_EQ(pts.size(), 11u);
  EXPECT_EQ(pts[1].at("t").get<double>(), 2.0);
  EXPECT_NEAR(pts[1].at("det_G1").get<double>(), -1024.0, 1e-9);
  EXPECT_EQ(res.report.at("index").get<std::string>(), "index1");
  EXPECT_TRUE(res.report.at("checks_passed").get<bool>());
}

TEST(Commands, AnalyzeIntegerExampleWarns) {
  const auto res = analyze(reference::example1());
  EXPECT_EQ(res.exit_code, Success);
  EXPECT_FALSE(res.report.at("checks_passed").get<bool>());
  const auto& warnings = res.report.at("warnings");
  ASSERT_FALSE(warnings.empty());
  bool found = false;
  for (const auto& w : warnings) {
    if (w.at("message").get<std::string>().find("A*P != A at entry (3,2)") != std::string::npos) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(Commands, VerifyOutcomes) {
  EXPECT_EQ(verify(reference::example2(), 1).exit_code, Success);
  EXPECT_EQ(verify(reference::example1(), 1).exit_code, ValidationFailure);
}

TEST(Commands, SolveNeedsInitialData) {
  try {
    (void)solve_command(parse_problem_text(kMinimal));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SchemaError);
  }
}

TEST(Commands, DecoupleCsvShape) {
  const auto res = decouple(reference::example2());
  std::istringstream in(res.csv);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("t,Mdet_1_1", 0), 0u);
  int rows = 0;
  const auto columns = std::count(header.begin(), header.end(), ',');
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), columns);
  }
  EXPECT_EQ(rows, 10);
}

TEST(Commands, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(Errc::SchemaError), InputError);
  EXPECT_EQ(exit_code_for(Errc::ParseError), InputError);
  EXPECT_EQ(exit_code_for(Errc::NotIndexOne), ValidationFailure);
  EXPECT_EQ(exit_code_for(Errc::NonRegressiveStep), ValidationFailure);
}
