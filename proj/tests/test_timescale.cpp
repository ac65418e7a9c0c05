#include <tsdae/matexpr.hpp>
#include <tsdae/timescale.hpp>

#include <gtest/gtest.h>

#include <vector>

using namespace tsdae;

namespace {

GridMatrixSamples scalar_samples(const TimeScale& ts, double (*f)(double)) {
  std::vector<Matrix> v;
  for (double t : ts.points()) v.push_back(Matrix::Constant(1, 1, f(t)));
  return {ts, v};
}

}  // namespace

TEST(TimeScale, SigmaOnIntegers) {
  const auto ts = TimeScale::integer_range(0, 10);
  EXPECT_EQ(ts.size(), 11u);
  EXPECT_DOUBLE_EQ(ts.sigma(3), 4);
  EXPECT_DOUBLE_EQ(ts.sigma(10), 10);  // right-scattered end maps to itself
  EXPECT_DOUBLE_EQ(ts.graininess(5), 1);
  EXPECT_DOUBLE_EQ(ts.graininess(10), 0);
}

TEST(TimeScale, SigmaOnPowersOfTwo) {
  const auto ts = TimeScale::geometric(2, 1, 11);
  EXPECT_DOUBLE_EQ(ts.back(), 1024);
  EXPECT_DOUBLE_EQ(ts.sigma(4), 8);
  EXPECT_DOUBLE_EQ(ts.graininess(8), 8);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) EXPECT_DOUBLE_EQ(ts.sigma_at(i), 2 * ts[i]);
}

TEST(TimeScale, UniformAndExplicit) {
  const auto u = TimeScale::uniform(0, 1, 5);
  EXPECT_EQ(u.size(), 5u);
  EXPECT_DOUBLE_EQ(u.graininess(0.25), 0.25);
  const auto e = TimeScale::explicit_points({0.0, 0.5, 2.0});
  EXPECT_DOUBLE_EQ(e.sigma(0.5), 2.0);
  EXPECT_EQ(e.kind(), GridKind::Explicit);
}

TEST(TimeScale, RejectsPointsOffTheGrid) {
  const auto ts = TimeScale::integer_range(0, 10);
  EXPECT_FALSE(ts.contains(2.5));
  try {
    (void)ts.sigma(2.5);
    FAIL() << "expected NotAGridPoint";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotAGridPoint);
  }
}

TEST(TimeScale, RejectsBadConstruction) {
  EXPECT_THROW(TimeScale::explicit_points({1.0, 1.0}), Error);
  EXPECT_THROW(TimeScale::explicit_points({2.0, 1.0}), Error);
  EXPECT_THROW(TimeScale::integer_range(3, 1), Error);
}

TEST(DeltaDerivative, SquareOnIntegers) {
  const auto ts = TimeScale::integer_range(0, 10);
  const auto s = scalar_samples(ts, [](double t) { return t * t; });
  EXPECT_DOUBLE_EQ(delta_derivative(s, 3)(0, 0), 7);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) EXPECT_DOUBLE_EQ(s.delta_at(i)(0, 0), 2 * ts[i] + 1);
}

TEST(DeltaDerivative, ConstantIsZero) {
  const auto ts = TimeScale::geometric(2, 1, 6);
  const auto s = tabulate(MatrixFunction::constant(Matrix::Constant(2, 3, 4.0)), ts);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) EXPECT_EQ(s.delta_at(i), Matrix::Zero(2, 3));
}

TEST(DeltaDerivative, UndefinedAtLastPoint) {
  const auto ts = TimeScale::integer_range(0, 3);
  const auto s = scalar_samples(ts, [](double t) { return t; });
  try {
    (void)s.delta_at(3);
    FAIL() << "expected LastPointUndefined";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LastPointUndefined);
  }
}

TEST(DeltaDerivative, ProjectorOfTheIntegerExample) {
  const auto p = MatrixFunction::parse({{"1", "0", "0"}, {"0", "0", "0"}, {"0", "-(t+1)", "1"}});
  const auto ts = TimeScale::integer_range(0, 20);
  const auto s = tabulate(p, ts);
  Matrix expected = Matrix::Zero(3, 3);
  expected(2, 1) = -1;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) EXPECT_EQ(s.delta_at(i), expected) << "t=" << ts[i];
}

TEST(DeltaDerivative, ProductRule) {
  // (fg)^Delta = f^Delta g + f^sigma g^Delta on a nonuniform grid
  const auto ts = TimeScale::explicit_points({0.0, 0.3, 0.45, 1.0, 1.7});
  const auto f = MatrixFunction::parse({{"t", "1"}, {"t^2", "2-t"}});
  const auto g = MatrixFunction::parse({{"1/(1+t)", "t"}, {"3", "t*t*t"}});
  std::vector<Matrix> fg;
  for (double t : ts.points()) fg.push_back(f(t) * g(t));
  const GridMatrixSamples sfg(ts, fg), sf = tabulate(f, ts), sg = tabulate(g, ts);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const Matrix rhs = sf.delta_at(i) * sg[i] + sf[i + 1] * sg.delta_at(i);
    EXPECT_LE((sfg.delta_at(i) - rhs).norm(), 1e-12);
  }
}

TEST(Regressivity, ZeroIsRegressive) {
  const auto ts = TimeScale::integer_range(0, 5);
  const auto rep = check_regressive(tabulate(MatrixFunction::constant(Matrix::Zero(2, 2)), ts), 1e-12);
  EXPECT_TRUE(rep.all_regressive());
  EXPECT_EQ(rep.points.size(), 5u);
}

TEST(Regressivity, MinusOneFailsOnIntegers) {
  const auto ts = TimeScale::integer_range(0, 5);
  const auto rep = check_regressive(tabulate(MatrixFunction::constant(Matrix::Constant(1, 1, -1)), ts), 1e-12);
  EXPECT_FALSE(rep.all_regressive());
  for (const auto& p : rep.points) EXPECT_FALSE(p.regressive) << "t=" << p.t;
}

TEST(Regressivity, MinusHalfPasses) {
  const auto ts = TimeScale::integer_range(0, 5);
  const auto rep = check_regressive(tabulate(MatrixFunction::constant(Matrix::Constant(1, 1, -0.5)), ts), 1e-12);
  EXPECT_TRUE(rep.all_regressive());
  EXPECT_DOUBLE_EQ(rep.points.front().smallest_singular_value, 0.5);
}

TEST(Regressivity, NonSquareRejected) {
  const auto ts = TimeScale::integer_range(0, 2);
  try {
    (void)check_regressive(tabulate(MatrixFunction::constant(Matrix::Zero(2, 3)), ts), 1e-12);
    FAIL() << "expected NonSquare";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonSquare);
  }
}
