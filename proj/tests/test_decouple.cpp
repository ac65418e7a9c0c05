#include <tsdae/commands.hpp>
#include <tsdae/decouple.hpp>
#include <tsdae/reference_problems.hpp>
#include <tsdae/selftest.hpp>
#include <tsdae/solver.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace tsdae;

namespace {

constexpr double kTol = 1e-9;

ProperProblem powers_of_two_problem(VectorFn f) {
  const auto spec = reference::example2();
  return {spec.A.as_fn(), spec.B->as_fn(), spec.C.as_fn(), std::move(f)};
}

VectorFn constant_vector(Vector v) {
  return [v](double) { return v; };
}

MatrixFn constant_matrix(Matrix m) {
  return [m](double) { return m; };
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST(Proper, PowersOfTwoCoefficients) {
  const auto spec = reference::example2();
  const auto ds = build_proper(powers_of_two_problem(spec.f.as_vector_fn()), spec.ts(), kTol);
  namespace ex = selftest::example2_expected;
  ASSERT_EQ(ds.points.size(), 10u);
  EXPECT_EQ(ds.n, 5);
  EXPECT_EQ(ds.k, 3);
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    const auto& dp = ds.points[i];
    const double t = dp.t;
    EXPECT_LE(dp.Mdet.norm(), 1e-12) << "t=" << t;
    EXPECT_LE((dp.Madv - ex::Madv(t)).norm(), 1e-12 * (1 + ex::Madv(t).norm())) << "t=" << t;
    EXPECT_LE((dp.Fu - ex::Fu(t)).norm(), 1e-12) << "t=" << t;
    EXPECT_LE((dp.Binv_sigma - ex::Binv(2 * t)).norm(), 1e-14) << "t=" << t;
    EXPECT_LE((ds.invariant_projector[i] - Matrix::Identity(3, 3)).norm(), 1e-14);
    // g = Fu f with f = e1
    EXPECT_LE((dp.g - ex::Fu(t).col(0)).norm(), 1e-14);
  }
  // Madv(1) printed: [[0,-1/32,0],[-1/8,1/16,2],[0,-1/16,0]]
  Matrix m1(3, 3);
  m1 << 0, -1.0 / 32, 0, -1.0 / 8, 1.0 / 16, 2, 0, -1.0 / 16, 0;
  EXPECT_LE((ds.points[0].Madv - m1).norm(), 1e-15);
  for (const auto& [name, value] : ds.max_residuals) EXPECT_LE(value, 1e-12) << name;
}

TEST(Proper, AssemblyOrderIsImmaterial) {
  const auto spec = reference::example2();
  const auto ds = build_proper(powers_of_two_problem(spec.f.as_vector_fn()), spec.ts(), kTol);
  EXPECT_LE(ds.max_residuals.at("Madv assembly order"), 1e-12);
}

TEST(Proper, HigherIndexRejected) {
  const auto ts = TimeScale::integer_range(0, 3);
  Matrix a(2, 1), b(1, 2);
  a << 1, 0;
  b << 1, 0;
  ProperProblem p{constant_matrix(a), constant_matrix(b), constant_matrix(Matrix::Zero(2, 2)),
                  constant_vector(Vector::Zero(2))};
  try {
    (void)build_proper(p, ts, kTol);
    FAIL() << "expected NotIndexOne";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotIndexOne);
  }
}

TEST(Standard, IntegerExampleCoefficients) {
  const auto spec = reference::example1();
  StandardProblem sp{spec.A.as_fn(), spec.C.as_fn(), spec.P->as_fn(), spec.f.as_vector_fn()};
  const auto ds = build_standard(sp, spec.ts(), kTol);
  namespace ex = selftest::example1_expected;
  ASSERT_EQ(ds.points.size(), 20u);
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    const double t = ds.points[i].t;
    const auto& sp_i = ds.standard[i];
    ASSERT_TRUE(sp_i.A1inv.has_value());
    EXPECT_LE((sp_i.A1 - ex::A1(t)).norm(), 1e-12);
    EXPECT_LE((*sp_i.A1inv - ex::A1inv(t)).norm(), 1e-10);
    EXPECT_LE((ds.points[i].Mdet - ex::Pdelta()).norm(), 1e-12);
    EXPECT_LE((ds.points[i].Fu - ex::PA1inv(t)).norm(), 1e-10);
    EXPECT_LE((ds.points[i].Madv - ex::PA1invC(t)).norm(), 1e-9);
    EXPECT_LE((-ds.points[i].Vf - ex::QA1inv(t)).norm(), 1e-10);
    EXPECT_LE((-ds.points[i].Valg - ex::QA1invC(t)).norm(), 1e-9);
    EXPECT_NEAR(ds.points[i].Fu(0, 2), 1.0, 1e-12);
  }
}

TEST(Standard, IntegerExampleHypothesisWarnings) {
  const auto spec = reference::example1();
  StandardProblem sp{spec.A.as_fn(), spec.C.as_fn(), spec.P->as_fn(), spec.f.as_vector_fn()};
  const auto ds = build_standard(sp, spec.ts(), kTol);
  std::size_t ap_warnings = 0;
  for (const auto& w : ds.warnings) {
    EXPECT_EQ(w.code, "ConsistencyWarning");
    if (w.message.rfind("A*P != A", 0) == 0) {
      ++ap_warnings;
      EXPECT_EQ(w.row, 3);
      EXPECT_EQ(w.col, 2);
      EXPECT_DOUBLE_EQ(w.value, -(w.t + 1));
    }
  }
  EXPECT_EQ(ap_warnings, spec.ts().size());
  EXPECT_GT(ds.max_residuals.at("A*P=A"), 0.1);
  EXPECT_GT(ds.max_residuals.at("ker P = ker A"), 0.1);
}

TEST(Standard, ConsistentDataHasNoWarnings) {
  // A = diag(1, 0), default P is the orthogonal projector along ker A
  const auto ts = TimeScale::integer_range(0, 5);
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1;
  StandardProblem sp{constant_matrix(a), constant_matrix(Matrix::Identity(2, 2)), std::nullopt,
                     constant_vector(Vector::Ones(2))};
  const auto ds = build_standard(sp, ts, kTol);
  EXPECT_TRUE(ds.warnings.empty());
  EXPECT_EQ(ds.standard.front().P, a);
  for (const auto& [name, value] : ds.max_residuals) EXPECT_LE(value, 1e-14) << name;
}

TEST(Standard, NonIdempotentProjectorRejected) {
  const auto ts = TimeScale::integer_range(0, 2);
  StandardProblem sp{constant_matrix(Matrix::Identity(2, 2)), constant_matrix(Matrix::Identity(2, 2)),
                     constant_matrix(2 * Matrix::Identity(2, 2)), constant_vector(Vector::Zero(2))};
  try {
    (void)build_standard(sp, ts, kTol);
    FAIL() << "expected ProjectorInvalid";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ProjectorInvalid);
  }
}

TEST(Unbound, ConstantDataNeedsNoCorrection) {
  const auto ts = TimeScale::integer_range(0, 4);
  Matrix c(2, 2);
  c << 1, 2, 3, 4;
  Matrix inv(2, 2);
  inv << 2, 1, 1, 1;
  const auto red1 = reduce_unbound(constant_matrix(inv), constant_matrix(c), constant_matrix(Matrix::Identity(2, 2)),
                                   ts, kTol);
  Matrix sing(2, 2);
  sing << 1, 1, 2, 2;
  const auto red2 = reduce_unbound(constant_matrix(sing), constant_matrix(c), std::nullopt, ts, kTol);
  for (double t : ts.points()) {
    EXPECT_LE((red1.C1(t) - c).norm(), 1e-14);
    EXPECT_LE((red2.C1(t) - c).norm(), 1e-12);
    EXPECT_LE((sing * red2.P(t) - sing).norm(), 1e-12);
  }
}

TEST(Unbound, ScalarReductionPreservesSolutions) {
  const auto ts = TimeScale::integer_range(1, 10);
  MatrixFn a = [](double t) { return scalar(t); };
  MatrixFn c = constant_matrix(scalar(0.5));
  VectorFn f = [](double t) { return Vector::Constant(1, std::sin(t)); };
  const auto red = reduce_unbound(a, c, constant_matrix(scalar(1)), ts, kTol);
  for (double t : ts.points()) EXPECT_DOUBLE_EQ(red.C1(t)(0, 0), 0.5);
  const auto ds = build_proper({red.A, red.P, red.C1, f}, ts, kTol);
  const Vector x0 = Vector::Constant(1, 2.0);
  const auto tr = solve(ds, x0, ts.front(), 1e-12);
  const ProperProblem original{a, constant_matrix(scalar(1)), c, f};
  const auto oracle = direct_recursion_oracle(original, ts, x0, 1e-12);
  EXPECT_LE(oracle_discrepancy(tr, oracle), 1e-12);
  EXPECT_LE(reversibility_residual(original, tr.states(), ts).max, 1e-12);
}

TEST(Unbound, RotatingKernel) {
  // ker A(t) = span(-t, 1) moves, so C1 picks up A^sigma P^Delta.
  const auto ts = TimeScale::uniform(0, 1, 21);
  MatrixFn a = [](double t) {
    Matrix m(2, 2);
    m << 1, t, 0, 0;
    return m;
  };
  Matrix c(2, 2);
  c << 0.3, 0, 0.2, 1;
  const VectorFn f = [](double t) { return Vector::Constant(2, 1.0 + t); };
  const auto red = reduce_unbound(a, constant_matrix(c), std::nullopt, ts, kTol);
  EXPECT_GT((red.C1(ts[5]) - c).norm(), 1e-3);
  const auto ds = build_proper({red.A, red.P, red.C1, f}, ts, kTol);
  Vector x0(2);
  x0 << 1, -1;
  const auto tr = solve(ds, x0, ts.front(), 1e-12);
  const ProperProblem original{a, constant_matrix(Matrix::Identity(2, 2)), constant_matrix(c), f};
  const auto res = reversibility_residual(original, tr.states(), ts);
  EXPECT_LE(res.max, 1e-10);
}

TEST(Unbound, ProjectorMustFitA) {
  const auto ts = TimeScale::integer_range(0, 3);
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1;
  Matrix wrong = Matrix::Zero(2, 2);
  wrong(1, 1) = 1;
  try {
    (void)reduce_unbound(constant_matrix(a), constant_matrix(Matrix::Identity(2, 2)), constant_matrix(wrong), ts,
                         kTol);
    FAIL() << "expected ProjectorInvalid";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ProjectorInvalid);
  }
}

TEST(Unbound, RankDriftRejected) {
  const auto ts = TimeScale::integer_range(0, 3);
  MatrixFn a = [](double t) { return scalar(t); };  // singular at t = 0 only
  try {
    (void)reduce_unbound(a, constant_matrix(scalar(1)), std::nullopt, ts, kTol);
    FAIL() << "expected RankDrift";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankDrift);
  }
}

TEST(Reconstruct, Examples) {
  const auto spec = reference::example2();
  const auto ds = build_proper(powers_of_two_problem(spec.f.as_vector_fn()), spec.ts(), kTol);
  Vector u = Vector::Unit(3, 0);
  Vector expected = Vector::Zero(5);
  expected(0) = 0.5;
  EXPECT_LE((reconstruct(ds, u, Vector::Zero(5), 0) - expected).norm(), 1e-15);

  const auto ts = TimeScale::integer_range(0, 3);
  StandardProblem sp{constant_matrix(Matrix::Identity(2, 2)), constant_matrix(Matrix::Zero(2, 2)), std::nullopt,
                     constant_vector(Vector::Zero(2))};
  const auto sds = build_standard(sp, ts, kTol);
  const Vector us = Vector::Ones(2);
  EXPECT_EQ(reconstruct(sds, us, Vector::Zero(2), 1), us);

  ProperProblem id{constant_matrix(Matrix::Identity(2, 2)), constant_matrix(Matrix::Identity(2, 2)),
                   constant_matrix(Matrix::Zero(2, 2)), constant_vector(Vector::Zero(2))};
  const auto pds = build_proper(id, ts, kTol);
  Vector v(2);
  v << 3, 4;
  EXPECT_EQ(reconstruct(pds, us, v, 0), us + v);
  EXPECT_THROW((void)reconstruct(pds, us, v, 3), Error);
}

TEST(Reversibility, ExactScalarSolution) {
  // (x)^Delta = x^sigma / 2 on the integers: x^sigma = 2 x
  const auto ts = TimeScale::integer_range(0, 8);
  ProperProblem p{constant_matrix(scalar(1)), constant_matrix(scalar(1)), constant_matrix(scalar(0.5)),
                  constant_vector(Vector::Zero(1))};
  std::vector<Vector> x;
  for (double t : ts.points()) x.push_back(Vector::Constant(1, std::pow(2.0, t)));
  EXPECT_LE(reversibility_residual(p, x, ts).max, 1e-12);
  x[4](0) += 1.0;
  EXPECT_GT(reversibility_residual(p, x, ts).max, 0.1);
}

TEST(Reversibility, PowersOfTwoWithOnesForcing) {
  const auto spec = reference::example2();
  const auto problem = powers_of_two_problem(constant_vector(Vector::Ones(5)));
  const auto ds = build_proper(problem, spec.ts(), kTol);
  const auto tr = solve(ds, spec.initial->x0, 1, 1e-12);
  const auto res = reversibility_residual(problem, tr.states(), spec.ts());
  EXPECT_EQ(res.per_point.size(), 10u);
  EXPECT_LE(res.max, 1e-8);

  auto corrupted = tr.states();
  corrupted[3](1) += 1.0;
  EXPECT_GT(reversibility_residual(problem, corrupted, spec.ts()).max, 0.1);
}

TEST(Reversibility, NeedsTwoPoints) {
  const auto ts = TimeScale::integer_range(0, 3);
  ProperProblem p{constant_matrix(scalar(1)), constant_matrix(scalar(1)), constant_matrix(scalar(0.5)),
                  constant_vector(Vector::Zero(1))};
  try {
    (void)reversibility_residual(p, {Vector::Zero(1)}, ts);
    FAIL() << "expected InsufficientTrajectory";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientTrajectory);
  }
}
