#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "admlab/grid_fn.hpp"

using namespace admlab;

TEST(LpNorm, ConstantFunctionOnUnitInterval) {
  auto f = GridFunction::sample(0.0, 1.0, 64, [](double) { return 2.0; });
  EXPECT_NEAR(lp_norm(f, 1.0), 2.0, 1e-14);
  EXPECT_NEAR(lp_norm(f, 2.0), 2.0, 1e-14);
  EXPECT_NEAR(lp_norm(f, kInf), 2.0, 1e-14);
}

TEST(LpNorm, LinearFunctionMatchesClosedForm) {
  // midpoint samples of x on [0,1]: sum (i+1/2) h^2 = 1/2 exactly
  auto f = GridFunction::sample(0.0, 1.0, 1000, [](double x) { return x; });
  EXPECT_NEAR(lp_norm(f, 1.0), 0.5, 1e-12);
  // sum ((i+1/2)h)^2 h = 1/3 - h^2/12
  EXPECT_NEAR(lp_norm(f, 2.0), std::sqrt(1.0 / 3.0 - 1e-6 / 12.0), 1e-12);
}

TEST(LpNorm, RejectsNonFiniteSamples) {
  std::vector<double> v{1.0, std::nan(""), 2.0};
  EXPECT_THROW(lp_norm(v, 0.1, 2.0), InvalidInput);
  EXPECT_THROW(lp_norm(v, 0.1, kInf), InvalidInput);
}

TEST(LpNorm, HolderInequalityHoldsOnRandomGrids) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> P(1.0, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + trial % 50;
    std::vector<double> f(n), g(n), fg(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = N(rng);
      g[i] = N(rng);
      fg[i] = f[i] * g[i];
    }
    const double h = 1.0 / static_cast<double>(n);
    const double p = trial % 7 == 0 ? 1.0 : P(rng);
    const double q = conjugate_exponent(p);
    EXPECT_LE(lp_norm(fg, h, 1.0), lp_norm(f, h, p) * lp_norm(g, h, q) * (1 + 1e-12) + 1e-14);
  }
}

TEST(LpNorm, TriangleInequalityHolds) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 40;
    std::vector<double> f(n), g(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = N(rng);
      g[i] = N(rng);
      s[i] = f[i] + g[i];
    }
    for (double p : {1.0, 1.5, 2.0, 3.0, kInf})
      EXPECT_LE(lp_norm(s, 0.1, p), (lp_norm(f, 0.1, p) + lp_norm(g, 0.1, p)) * (1 + 1e-12));
  }
}

TEST(ConjugateExponent, Endpoints) {
  EXPECT_TRUE(std::isinf(conjugate_exponent(1.0)));
  EXPECT_EQ(conjugate_exponent(kInf), 1.0);
  EXPECT_DOUBLE_EQ(conjugate_exponent(2.0), 2.0);
  EXPECT_DOUBLE_EQ(conjugate_exponent(4.0), 4.0 / 3.0);
  EXPECT_THROW(conjugate_exponent(0.5), InvalidInput);
}

TEST(GridFunction, RightContinuousLookup) {
  GridFunction f(0.0, 1.0, {1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(f(0.0), 1.0);
  EXPECT_EQ(f(0.25), 2.0);
  EXPECT_EQ(f(0.2499), 1.0);
  EXPECT_EQ(f(0.99), 4.0);
  EXPECT_EQ(f(1.0), 0.0);
  EXPECT_EQ(f(-0.1), 0.0);
}

TEST(GridFunction, RejectsEmptyOrReversed) {
  EXPECT_THROW(GridFunction(0.0, 1.0, {}), InvalidInput);
  EXPECT_THROW(GridFunction(1.0, 0.0, {1.0}), InvalidInput);
}

TEST(IntegrateCurve, MidpointRuleIsExactForLinearCurves) {
  std::vector<Eigen::VectorXd> samples;
  const int m = 10;
  for (int i = 0; i < m; ++i) {
    const double t = (i + 0.5) / m * 2.0;
    Eigen::VectorXd v(2);
    v << 3.0 * t + 1.0, -t;
    samples.push_back(v);
  }
  const auto I = integrate_curve(samples, 0.0, 2.0);
  EXPECT_NEAR(I[0], 3.0 * 2.0 + 2.0, 1e-13);
  EXPECT_NEAR(I[1], -2.0, 1e-13);
}

TEST(IntegrateCurve, QuadraticConvergesAtSecondOrder) {
  auto err = [](int m) {
    std::vector<double> s(m);
    for (int i = 0; i < m; ++i) {
      const double t = (i + 0.5) / m;
      s[i] = t * t;
    }
    return std::abs(integrate_curve(s, 0.0, 1.0) - 1.0 / 3.0);
  };
  EXPECT_NEAR(err(10) / err(20), 4.0, 1e-6);
}

TEST(IntegrateCurve, EmptyInputThrows) {
  std::vector<double> none;
  EXPECT_THROW(integrate_curve(none, 0.0, 1.0), InvalidInput);
}

TEST(StepFunction, ValidationAndEvaluation) {
  StepFunction u({0.0, 0.5, 1.0}, {1.0, -2.0});
  EXPECT_EQ(u(0.25), 1.0);
  EXPECT_EQ(u(0.5), -2.0);
  EXPECT_EQ(u(1.0), -2.0);
  EXPECT_EQ(u.sup_norm(), 2.0);
  EXPECT_NEAR(u.lp(1.0), 1.5, 1e-15);
  EXPECT_THROW(StepFunction({0.1, 1.0}, {1.0}), InvalidInput);
  EXPECT_THROW(StepFunction({0.0, 0.5, 0.5}, {1.0, 2.0}), InvalidInput);
  EXPECT_THROW(StepFunction({0.0, 1.0}, {1.0, 2.0}), InvalidInput);
}

TEST(Partition, DyadicHasTwoToTheDepthIntervals) {
  auto P = Partition::dyadic(0.3, 5);
  EXPECT_EQ(P.intervals(), 32u);
  EXPECT_EQ(P.points.front(), 0.0);
  EXPECT_EQ(P.points.back(), 0.3);
  EXPECT_THROW(Partition({0.0, 0.2, 0.1}), InvalidInput);
}

TEST(ContinuousInterpolant, AgreesWithStepOutsideRampsAndKeepsSupNorm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(8);
    for (auto& x : v) x = U(rng);
    auto u = StepFunction::uniform(1.0, v);
    const double eps = 0.01;
    auto ue = continuous_interpolant(u, eps);
    EXPECT_NEAR(ue.sup_norm(), u.sup_norm(), 1e-15);
    for (int i = 0; i < 8; ++i) {
      const double left = i / 8.0;
      const double right = (i + 1) / 8.0;
      EXPECT_DOUBLE_EQ(ue(0.5 * (left + right)), v[i]);
      EXPECT_DOUBLE_EQ(ue(right - eps - 1e-9), v[i]);
    }
    // continuity across a ramp
    EXPECT_NEAR(ue(0.125 - 1e-12), ue(0.125), 1e-9);
  }
}

TEST(ContinuousInterpolant, RejectsTooWideRamps) {
  auto u = StepFunction::uniform(1.0, {1.0, 2.0});
  EXPECT_THROW(continuous_interpolant(u, 0.5), InvalidInput);
  EXPECT_THROW(continuous_interpolant(u, 0.0), InvalidInput);
}

TEST(Csv, GridRoundTrip) {
  auto f = GridFunction::sample(0.0, 1.0, 16, [](double x) { return std::sin(7 * x); });
  std::stringstream ss;
  write_csv(ss, f);
  auto g = read_grid_csv(ss);
  ASSERT_EQ(g.n(), f.n());
  EXPECT_NEAR(g.a, 0.0, 1e-15);
  EXPECT_NEAR(g.b, 1.0, 1e-15);
  for (std::size_t i = 0; i < f.n(); ++i) EXPECT_EQ(g.values[i], f.values[i]);
}

TEST(Csv, StepRoundTripAndErrors) {
  StepFunction u({0.0, 0.1, 0.35}, {1.0 / 3.0, -2.0});
  std::stringstream ss;
  write_csv(ss, u);
  auto v = read_step_csv(ss);
  EXPECT_EQ(v.breakpoints, u.breakpoints);
  EXPECT_EQ(v.values, u.values);

  std::stringstream bad("t_left,t_right,value\n0,0.1,1\n0.1,x,2\n");
  try {
    read_step_csv(bad);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}
