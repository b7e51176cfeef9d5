#include <gtest/gtest.h>

#include <random>

#include "admlab/admissibility.hpp"
#include "support.hpp"

using namespace admlab;
using admlab::testing::random_bv;
using admlab::testing::random_vector;

namespace {

SemigroupModel scalar_zero() { return SemigroupModel::matrix(Eigen::MatrixXd::Zero(1, 1)); }

ControlOperator unit_control(const SemigroupModel& S) { return control_from_state(S, 1.0, Eigen::VectorXd::Ones(1)); }

// Cell averages of the exact right translate of a cell-valued b.
Eigen::VectorXd translate_average(const Eigen::VectorXd& b, double s) {
  const auto n = b.size();
  const double h = 1.0 / static_cast<double>(n);
  const CellIntegral B(GridFunction(0.0, 1.0, std::vector<double>(b.data(), b.data() + n)));
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) * h - s;
    const double hi = lo + h;
    out[i] = (B(std::clamp(hi, 0.0, 1.0)) - B(std::clamp(lo, 0.0, 1.0))) / h;
  }
  return out;
}

}  // namespace

TEST(BracketKernel, MatchesBruteForceOnSmallProblems) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index d = 1 + trial % 4;
    const Eigen::Index m = 2 + trial % 7;
    Eigen::MatrixXd K(d, m);
    for (Eigen::Index j = 0; j < m; ++j) K.col(j) = random_vector(d, rng);
    const std::vector<double> w(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m));
    for (TargetKind kind : {TargetKind::Euclidean, TargetKind::L1Grid, TargetKind::SupGrid}) {
      const TargetNorm N{kind, 0.25};
      // p = inf: brute force over every sign vector
      double brute = 0.0;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        Eigen::VectorXd s(m);
        for (Eigen::Index k = 0; k < m; ++k) s[k] = (mask >> k) & 1 ? 1.0 : -1.0;
        brute = std::max(brute, N(K * s));
      }
      const auto b = bracket_kernel(K, w, kInf, N);
      EXPECT_NEAR(b.lower, brute, 1e-12 * (1 + brute));
      EXPECT_GE(b.upper, brute * (1 - 1e-12));
      // p = 1: best scaled impulse
      double imp = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) imp = std::max(imp, N(K.col(k)) / w[0]);
      const auto b1 = bracket_kernel(K, w, 1.0, N);
      EXPECT_NEAR(b1.lower, imp, 1e-12 * imp);
      EXPECT_NEAR(b1.upper, imp, 1e-12 * imp);
    }
  }
}

TEST(BracketKernel, SoundOnRandomInteriorExponents) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> P(1.2, 5.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index d = 2 + trial % 3;
    const Eigen::Index m = 6 + trial % 10;
    Eigen::MatrixXd K(d, m);
    for (Eigen::Index j = 0; j < m; ++j) K.col(j) = random_vector(d, rng);
    std::vector<double> w(static_cast<std::size_t>(m));
    for (auto& x : w) x = 0.05 + std::abs(random_vector(1, rng)[0]);
    const double p = P(rng);
    for (TargetKind kind : {TargetKind::Euclidean, TargetKind::L1Grid, TargetKind::SupGrid}) {
      const TargetNorm N{kind, 0.5};
      const auto b = bracket_kernel(K, w, p, N);
      ASSERT_LE(b.lower, b.upper * (1 + 1e-12));
      EXPECT_NEAR(weighted_lp(b.witness, w, p), 1.0, 1e-10);
      EXPECT_NEAR(N(K * b.witness), b.lower, 1e-12 * (1 + b.lower));
      // random unit inputs never beat the upper bound
      for (int s = 0; s < 50; ++s) {
        Eigen::VectorXd u = random_vector(m, rng);
        u /= weighted_lp(u, w, p);
        EXPECT_LE(N(K * u), b.upper * (1 + 1e-12));
      }
    }
  }
}

TEST(InputMap, ScalarIdentityIntegratesInput) {
  const auto S = scalar_zero();
  const auto B = unit_control(S);
  for (double tau : {0.1, 0.5, 2.0}) {
    const auto u = StepFunction::uniform(tau, {1.0});
    EXPECT_NEAR(input_map(B, u, tau, S)[0], tau, 1e-14);
  }
  const auto u = StepFunction({0.0, 0.3, 1.0}, {2.0, -1.0});
  EXPECT_NEAR(input_map(B, u, 1.0, S)[0], 0.6 - 0.7, 1e-14);
}

TEST(InputMap, ShiftResolventFormMatchesDirectQuadrature) {
  std::mt19937_64 rng(21);
  const std::size_t n = 64;
  const auto S = SemigroupModel::shift_right_l1(n);
  const double h = 1.0 / n;
  const double g = 0.5 / std::sqrt(3.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd b = random_vector(static_cast<Eigen::Index>(n), rng);
    const auto B = control_from_state(S, 1.0 + trial, b);
    for (std::size_t steps : {1u, 7u, 32u, 64u}) {
      const double tau = steps * h;
      const auto phi = input_map(B, StepFunction::uniform(tau, {1.0}), tau, S);
      Eigen::VectorXd oracle = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j < steps; ++j) {
        const double mid = (j + 0.5) * h;
        oracle += 0.5 * h * (translate_average(b, mid - g * h) + translate_average(b, mid + g * h));
      }
      EXPECT_LT((phi - oracle).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(InputMap, ZeroInputGivesZeroAndMisalignedShiftInputThrows) {
  std::mt19937_64 rng(2);
  const auto S = SemigroupModel::shift_right_l1(32);
  const auto B = control_from_state(S, 1.0, random_vector(32, rng));
  EXPECT_EQ(input_map(B, StepFunction::uniform(0.5, {0.0, 0.0}), 0.5, S).norm(), 0.0);
  EXPECT_THROW(input_map(B, StepFunction({0.0, 0.1, 0.5}, {1.0, 1.0}), 0.5, S), InvalidInput);
  EXPECT_THROW(input_map(B, StepFunction::uniform(0.51, {1.0}), 0.51, S), InvalidInput);
  const auto M = SemigroupModel::matrix(random_nilpotent(4, rng));
  const auto BM = control_from_state(M, 1.0, random_vector(4, rng));
  EXPECT_EQ(input_map(BM, StepFunction::uniform(0.7, {0.0}), 0.7, M).norm(), 0.0);
}

TEST(InputMap, PiecewiseLinearMatchesQuadratureOnMatrices) {
  std::mt19937_64 rng(4);
  const auto S = SemigroupModel::matrix(random_nilpotent(4, rng));
  const auto B = control_from_state(S, 1.0, random_vector(4, rng));
  const PiecewiseLinear u{{0.0, 0.2, 0.55, 0.8}, {1.0, -0.5, 0.25, 2.0}};
  const double tau = 0.8;
  const auto phi = input_map(B, u, tau, S);
  const int N = 20000;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < N; ++i) {
    const double s = (i + 0.5) * tau / N;
    const Eigen::VectorXd v = S.apply(tau - s, *B.direct);
    q += v * u(s) * (tau / N);
  }
  EXPECT_LT((phi - q).norm(), 1e-7);
}

TEST(InputNorm, ScalarIdentityIsExact) {
  const auto S = scalar_zero();
  const auto B = unit_control(S);
  for (double tau : {0.25, 1.0, 3.0}) {
    const auto inf = input_norm(B, kInf, tau, S);
    const auto one = input_norm(B, 1.0, tau, S);
    const auto two = input_norm(B, 2.0, tau, S);
    EXPECT_LE(inf.lower, tau + 1e-12);
    EXPECT_GE(inf.upper, tau - 1e-12);
    EXPECT_LE(inf.width(), 1e-6);
    EXPECT_LE(one.lower, 1.0 + 1e-12);
    EXPECT_GE(one.upper, 1.0 - 1e-12);
    EXPECT_LE(one.width(), 1e-6);
    EXPECT_LE(two.lower, std::sqrt(tau) + 1e-12);
    EXPECT_GE(two.upper, std::sqrt(tau) - 1e-12);
    EXPECT_LE(two.width(), 1e-6);
    EXPECT_TRUE(inf.converged && one.converged && two.converged);
  }
}

TEST(InputNorm, ZeroHorizonIsZero) {
  const auto S = scalar_zero();
  const auto b = input_norm(unit_control(S), 2.0, 0.0, S);
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_EQ(b.upper, 0.0);
  EXPECT_TRUE(b.converged);
}

TEST(InputNorm, NilpotentBracketsAreSoundAndWitnessesReevaluate) {
  std::mt19937_64 rng(99);
  NormOptions opt;
  opt.max_cells = 256;
  for (int trial = 0; trial < 100; ++trial) {
    const auto S = SemigroupModel::matrix(random_nilpotent(4, rng));
    const auto B = control_from_state(S, 1.0, random_vector(4, rng));
    const double p = std::array<double, 4>{1.0, 2.0, 3.0, kInf}[trial % 4];
    const auto b = input_norm(B, p, 0.5 + 0.01 * trial, S, opt);
    ASSERT_LE(b.lower, b.upper);
    ASSERT_TRUE(b.input_witness.has_value());
    EXPECT_LE(b.input_witness->lp(p), 1.0 + 1e-10);
    const double re = input_map(B, *b.input_witness, b.tau, S).norm();
    EXPECT_NEAR(re, b.lower, 1e-10 * (1 + b.lower));
    // a random unit step input on a finer grid stays below the upper bound
    std::vector<double> v(37);
    for (auto& x : v) x = random_vector(1, rng)[0];
    auto u = StepFunction::uniform(b.tau, v);
    const double nu = u.lp(p);
    for (auto& x : u.values) x /= nu;
    EXPECT_LE(input_map(B, u, b.tau, S).norm(), b.upper * (1 + 1e-12));
  }
}

TEST(InputNorm, ShiftSupUpperBelowIntegralOfTranslateNorms) {
  std::mt19937_64 rng(6);
  const std::size_t n = 128;
  const auto S = SemigroupModel::shift_right_l1(n);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd b = random_vector(static_cast<Eigen::Index>(n), rng);
    const auto B = control_from_state(S, 1.0, b);
    const double tau = 0.5;
    const auto br = input_norm(B, kInf, tau, S);
    // int_0^tau int_0^{1-s} |b| dx ds on a fine s grid (the integrand is monotone)
    const CellIntegral abs_b(GridFunction(0.0, 1.0, std::vector<double>(b.data(), b.data() + b.size())));
    double oracle = 0.0;
    const int N = 1 << 14;
    for (int i = 0; i < N; ++i) oracle += abs_b.absolute(1.0 - (i + 1.0) * tau / N) * tau / N;
    EXPECT_LE(br.lower, br.upper);
    EXPECT_LE(br.upper, oracle + 1e-12);
  }
}

TEST(InputNorm, LowerBoundsNondecreasingAlongCurves) {
  std::mt19937_64 rng(12);
  const auto taus = geometric_grid(0.05, 1.0, 8);
  NormOptions opt;
  opt.max_cells = 128;
  for (int trial = 0; trial < 6; ++trial) {
    const auto S = SemigroupModel::matrix(random_nilpotent(4, rng));
    const auto B = control_from_state(S, 1.0, random_vector(4, rng));
    for (double p : {1.5, 2.0, kInf}) {
      const auto curve = input_norm_curve(B, p, taus, S, opt);
      for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GE(curve[i].lower, curve[i - 1].lower * (1 - 1e-12));
    }
  }
  const auto S = SemigroupModel::shift_right_l1(64);
  const auto B = control_from_state(S, 1.0, random_vector(64, rng));
  for (double p : {1.0, 2.0, kInf}) {
    const auto curve = input_norm_curve(B, p, taus, S);
    for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GE(curve[i].lower, curve[i - 1].lower * (1 - 1e-12));
  }
}

TEST(InputNorm, ContinuousBridgeApproachesStepInput) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto S = SemigroupModel::matrix(random_nilpotent(4, rng));
    const auto B = control_from_state(S, 1.0, random_vector(4, rng));
    const double tau = 1.0;
    std::vector<double> v(10);
    for (auto& x : v) x = U(rng);
    const auto u = StepFunction::uniform(tau, v);
    const double base = input_map(B, u, tau, S).norm();
    const double b1 = input_norm(B, 1.0, tau, S).upper;
    double prev = kInf;
    for (double eps : {0.05, 0.01, 0.002, 0.0004}) {
      const auto ue = continuous_interpolant(u, eps);
      const double diff = std::abs(input_map(B, ue, tau, S).norm() - base);
      // |u_eps - u|_1 <= eps/2 * sum of jump sizes
      double l1 = 0.0;
      for (std::size_t i = 0; i + 1 < v.size(); ++i) l1 += 0.5 * eps * std::abs(v[i + 1] - v[i]);
      EXPECT_LE(diff, l1 * b1 + 1e-12);
      EXPECT_LE(diff, prev + 1e-12);
      prev = diff;
    }
    EXPECT_LT(prev, 1e-2);
  }
}

TEST(InputNorm, ContinuousNormBracketedByStepNorm) {
  std::mt19937_64 rng(3);
  const auto S = SemigroupModel::matrix(random_nilpotent(4, rng));
  const auto B = control_from_state(S, 1.0, random_vector(4, rng));
  const auto c = input_norm_continuous(B, 1.0, S);
  const auto s = input_norm(B, kInf, 1.0, S);
  ASSERT_TRUE(c.continuous_witness.has_value());
  EXPECT_LE(c.continuous_witness->sup_norm(), 1.0 + 1e-15);
  EXPECT_LE(c.lower, s.upper);
  EXPECT_NEAR(c.lower, input_map(B, *c.continuous_witness, c.tau, S).norm(), 1e-12);
  EXPECT_GT(c.lower, 0.9 * s.lower);
}

TEST(OutputMap, ScalarIdentityIsConstant) {
  const auto S = scalar_zero();
  const auto y = output_map(ObservationOperator::from_row(Eigen::RowVectorXd::Ones(1)), Eigen::VectorXd::Ones(1), 0.7, S, 16);
  for (double v : y.values) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(OutputMap, DiracSiftsOnRightShift) {
  const std::size_t n = 256;
  const auto S = SemigroupModel::shift_right_l1(n);
  std::mt19937_64 rng(1);
  const Eigen::VectorXd x = random_vector(n, rng);
  const double a = 0.6180339;
  const auto C = ObservationOperator::from_measure(BorelMeasure::dirac(a));
  const auto y = output_map(C, x, 0.75, S);
  const auto f = S.as_grid(x);
  for (std::size_t k = 0; k < y.n(); ++k) {
    const double t = y.midpoint(k);
    EXPECT_EQ(y.values[k], t <= a ? f(a - t) : 0.0);
  }
}

TEST(OutputMap, AgreesWithConvReflect) {
  std::mt19937_64 rng(77);
  const std::size_t n = 256;
  const auto S = SemigroupModel::shift_right_l1(n);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_bv(rng, trial % 3 == 0);
    c.boundary = trial % 2 ? BoundaryConvention::Include : BoundaryConvention::Exclude;
    const auto mu = derivative_measure(c);
    const Eigen::VectorXd x = random_vector(n, rng);
    const double tau = (1 + trial * 12) / static_cast<double>(n);
    const auto y = output_map(ObservationOperator::from_measure(mu), x, tau, S);
    const auto z = conv_reflect(S.as_grid(x), mu, tau);
    ASSERT_EQ(y.n(), z.n());
    for (std::size_t k = 0; k < y.n(); ++k) EXPECT_NEAR(y.values[k], z.values[k], 1e-8);
  }
}

TEST(OutputNorm, ScalarIdentity) {
  const auto S = scalar_zero();
  const auto C = ObservationOperator::from_row(Eigen::RowVectorXd::Ones(1));
  for (double tau : {0.3, 1.0}) {
    const auto b = output_norm(C, 1.0, tau, S);
    EXPECT_LE(b.lower, tau + 1e-12);
    EXPECT_GE(b.upper, tau - 1e-12);
    EXPECT_LE(b.width(), 1e-6);
    const auto b2 = output_norm(C, 2.0, tau, S);
    EXPECT_NEAR(b2.lower, std::sqrt(tau), 1e-6);
  }
}

TEST(OutputNorm, DiracObservationConcentratesNearAtom) {
  const std::size_t n = 1024;
  const auto S = SemigroupModel::shift_right_l1(n);
  const auto C = ObservationOperator::from_measure(BorelMeasure::dirac(0.7));
  for (double tau : {0.05, 0.2, 0.5}) {
    const auto b = output_norm(C, 1.0, tau, S);
    EXPECT_GE(b.lower, 0.99);
    EXPECT_LE(b.lower, b.upper);
    // brute force over scaled cell indicators
    const auto ok = output_kernel(C, b.tau, 0, S);
    double brute = 0.0;
    for (Eigen::Index j = 0; j < ok.O.cols(); ++j) brute = std::max(brute, ok.O.col(j).lpNorm<1>() * ok.dt / S.cell_width());
    EXPECT_NEAR(b.lower, brute, 1e-12);
  }
}

TEST(OutputNorm, LebesgueObservationBoundedByHorizon) {
  const auto S = SemigroupModel::shift_right_l1(512);
  const auto C = ObservationOperator::from_measure(BorelMeasure::lebesgue());
  for (double tau : {0.01, 0.1, 0.6}) {
    const auto b = output_norm(C, 1.0, tau, S);
    EXPECT_LE(b.upper, b.tau + 1e-12);
    EXPECT_GE(b.lower, 0.9 * b.tau);
  }
}

TEST(OutputNorm, MatrixBracketsSound) {
  std::mt19937_64 rng(17);
  NormOptions opt;
  opt.max_cells = 256;
  for (int trial = 0; trial < 30; ++trial) {
    const auto S = SemigroupModel::matrix(random_nilpotent(4, rng));
    const auto C = ObservationOperator::from_row(random_vector(4, rng).transpose());
    const double p = std::array<double, 3>{1.0, 2.0, kInf}[trial % 3];
    const auto b = output_norm(C, p, 0.8, S, opt);
    ASSERT_LE(b.lower, b.upper);
    EXPECT_NEAR(b.state_witness.norm(), 1.0, 1e-12);
    for (int s = 0; s < 20; ++s) {
      Eigen::VectorXd x = random_vector(4, rng);
      x.normalize();
      // fine-grid L^p norm of the exact output
      const int N = 4000;
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        const double y = C.row.dot(S.apply((i + 0.5) * 0.8 / N, x));
        acc = std::isinf(p) ? std::max(acc, std::abs(y)) : acc + std::pow(std::abs(y), p) * 0.8 / N;
      }
      if (!std::isinf(p)) acc = std::pow(acc, 1.0 / p);
      EXPECT_LE(acc, b.upper * (1 + 1e-9));
    }
  }
}

TEST(WindowedOutputNorm, Examples) {
  const auto S = SemigroupModel::shift_right_l1(1024);
  const auto atom = ObservationOperator::from_measure(BorelMeasure::dirac(0.5));
  const auto leb = ObservationOperator::from_measure(BorelMeasure::lebesgue());
  const auto zero = ObservationOperator::from_measure(BorelMeasure{});
  for (double tau : {0.25, 0.05, 0.01, 0.002}) {
    EXPECT_GE(windowed_output_norm(atom, 0.5, tau, S).lower, 0.9);
    for (double xi : {0.0, 0.3, 0.7}) EXPECT_LE(windowed_output_norm(leb, xi, tau, S).upper, S.snap(tau) + 1e-12);
    EXPECT_EQ(windowed_output_norm(zero, 0.2, tau, S).upper, 0.0);
  }
}

TEST(ZeroClass, Examples) {
  const auto S = SemigroupModel::shift_right_l1(1024);
  const auto taus = geometric_grid(1e-3, 0.5, 8);
  const auto leb = output_norm_curve(ObservationOperator::from_measure(BorelMeasure::lebesgue()), 1.0, taus, S);
  EXPECT_EQ(zero_class_classify(leb).verdict, ZeroClass::ZeroClass);

  std::vector<NormBracket> atom;
  const auto dirac = ObservationOperator::from_measure(BorelMeasure::dirac(0.5));
  for (double tau : taus) atom.push_back(windowed_output_norm(dirac, 0.5, std::min(tau, 0.5), S));
  EXPECT_EQ(zero_class_classify(atom).verdict, ZeroClass::NotZeroClass);

  std::vector<NormBracket> zero;
  for (double tau : taus) zero.push_back(zero_bracket(tau, {}));
  const auto z = zero_class_classify(zero);
  EXPECT_EQ(z.verdict, ZeroClass::ZeroClass);
  EXPECT_EQ(z.tau_grid.front(), 0.5);
  EXPECT_THROW(zero_class_classify(std::vector<NormBracket>(3)), InvalidInput);
}

TEST(ZeroClass, VerdictInvariants) {
  std::mt19937_64 rng(8);
  const auto S = SemigroupModel::shift_right_l1(512);
  const auto taus = geometric_grid(2e-3, 0.5, 8);
  for (int trial = 0; trial < 8; ++trial) {
    const auto c = random_bv(rng, trial % 2 == 0);
    const auto v = zero_class_classify(output_norm_curve(ObservationOperator::from_measure(derivative_measure(c)), 1.0, taus, S));
    if (v.verdict == ZeroClass::ZeroClass) EXPECT_LT(v.extrapolated_limit + v.uncertainty, v.threshold);
    if (v.verdict == ZeroClass::NotZeroClass)
      for (std::size_t i = v.norm_curve.size() - 6; i < v.norm_curve.size(); ++i)
        EXPECT_GE(v.norm_curve[i].lower, v.threshold);
    for (std::size_t i = 1; i < v.tau_grid.size(); ++i) EXPECT_LT(v.tau_grid[i], v.tau_grid[i - 1]);
  }
}

TEST(Reports, CurveCsvHeaderAndVerdictJson) {
  std::vector<NormBracket> curve(6);
  for (std::size_t i = 0; i < curve.size(); ++i) curve[i].tau = std::ldexp(1.0, -static_cast<int>(i));
  std::ostringstream os;
  write_curve_csv(os, curve);
  EXPECT_EQ(os.str().substr(0, 26), "tau,lower,upper,converged\n");
  const auto j = verdict_to_json(zero_class_classify(curve));
  for (const char* key : {"verdict", "slope", "limit", "threshold", "tau_grid"}) EXPECT_TRUE(j.contains(key));
}
