#pragma once

// Input and output maps over a finite horizon and two-sided bounds for their
// operator norms, norm curves over horizons, and zero-class classification.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "admlab/bracket.hpp"
#include "admlab/error.hpp"
#include "admlab/grid_fn.hpp"
#include "admlab/measures_bv.hpp"
#include "admlab/semigroups.hpp"

namespace admlab {

struct TracePoint {
  std::size_t cells = 0;
  double lower = 0.0;
  double upper = 0.0;
};

struct NormBracket {
  double tau = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool converged = true;
  double tolerance = 0.0;
  std::size_t cells = 0;
  std::vector<TracePoint> refinement_trace;
  std::optional<StepFunction> input_witness;
  std::optional<PiecewiseLinear> continuous_witness;
  Eigen::VectorXd state_witness;

  double width() const { return upper - lower; }
};

struct NormOptions {
  double tolerance = 1e-6;
  std::size_t min_cells = 8;
  std::size_t max_cells = 2048;
  SearchOptions search;
};

inline NormBracket zero_bracket(double tau, const NormOptions& opt) {
  NormBracket b;
  b.tau = tau;
  b.tolerance = opt.tolerance;
  return b;
}

inline TargetNorm state_target(const SemigroupModel& S) {
  switch (S.kind()) {
    case ModelKind::Matrix: return {TargetKind::Euclidean, 1.0};
    case ModelKind::ShiftRightL1: return {TargetKind::L1Grid, S.cell_width()};
    case ModelKind::ShiftLeftSun: return {TargetKind::SupGrid, 1.0};
  }
  return {};
}

inline TargetNorm dual_target(const SemigroupModel& S) {
  switch (S.kind()) {
    case ModelKind::Matrix: return {TargetKind::Euclidean, 1.0};
    case ModelKind::ShiftRightL1: return {TargetKind::SupGrid, 1.0};
    case ModelKind::ShiftLeftSun: return {TargetKind::L1Grid, S.cell_width()};
  }
  return {};
}

inline double horizon_for(const SemigroupModel& S, double tau) {
  require(std::isfinite(tau) && tau >= 0.0, "horizon must be finite and nonnegative");
  return S.snap(tau);
}

namespace detail {

inline bool on_grid(const SemigroupModel& S, double t) {
  const double u = t * static_cast<double>(S.cells());
  return std::abs(u - std::round(u)) < 1e-9 * std::max(1.0, std::abs(u));
}

inline double matrix_norm2(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues()[0];
}

/// Exact integral of a piecewise-linear function over [l, r].
inline double pl_integral(const PiecewiseLinear& u, double l, double r) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < u.knots.size(); ++i) {
    const double a = std::max(l, u.knots[i]);
    const double b = std::min(r, u.knots[i + 1]);
    if (b <= a) continue;
    acc += 0.5 * (u(a) + u(b)) * (b - a);
  }
  return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Input map

/// Phi_tau u for a step input, summed cell by cell through the resolvent
/// representation. Shift models need grid-aligned horizon and breakpoints.
inline Eigen::VectorXd input_map(const ControlOperator& B, const StepFunction& u, double tau,
                                 const SemigroupModel& S) {
  u.validate();
  require(std::abs(u.horizon() - tau) <= 1e-12 * std::max(1.0, tau), "input must be defined on [0, tau]");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(S.dim());
  if (S.is_shift()) {
    require(detail::on_grid(S, tau), "horizon is not aligned with the shift grid");
    for (double t : u.breakpoints) require(detail::on_grid(S, t), "input breakpoints are not aligned with the shift grid");
  }
  for (std::size_t i = 0; i < u.cells(); ++i) {
    const double ui = u.values[i];
    if (ui == 0.0) continue;
    const double lo = std::max(0.0, tau - u.breakpoints[i + 1]);
    const double hi = std::max(0.0, tau - u.breakpoints[i]);
    const Eigen::VectorXd part = B.lambda * S.orbit_integral(lo, hi, B.W) - (S.apply(hi, B.W) - S.apply(lo, B.W));
    acc += ui * part;
  }
  return acc;
}

struct InputKernel {
  double tau = 0.0;
  double dt = 0.0;
  Eigen::MatrixXd K;  // column k: Phi_tau of the indicator of cell k
  std::vector<double> weights;
  double lipschitz = 0.0;  // bound on |d/ds T(tau - s) B| for matrix models
};

inline InputKernel input_kernel(const ControlOperator& B, double tau, std::size_t m, const SemigroupModel& S) {
  InputKernel ik;
  ik.tau = tau;
  if (S.is_shift()) m = S.snap_steps(tau);
  require(m >= 1, "input kernel needs at least one cell");
  ik.dt = tau / static_cast<double>(m);
  ik.weights.assign(m, ik.dt);
  const auto d = S.dim();
  ik.K.resize(d, static_cast<Eigen::Index>(m));
  Eigen::VectorXd col = B.lambda * S.orbit_integral(0.0, ik.dt, B.W) - (S.apply(ik.dt, B.W) - B.W);
  Eigen::MatrixXd E;
  if (!S.is_shift()) E = (S.generator_matrix() * ik.dt).exp();
  for (std::size_t j = 0; j < m; ++j) {
    const auto k = static_cast<Eigen::Index>(m - 1 - j);
    ik.K.col(k) = col;
    if (j + 1 < m) {
      if (S.is_shift()) {
        const Eigen::VectorXd next = S.shift_by(1, col);
        col = next;
      } else {
        const Eigen::VectorXd next = E * col;
        col = next;
      }
    }
  }
  if (!S.is_shift()) {
    const Eigen::MatrixXd& A = S.generator_matrix();
    Eigen::VectorXd v = B.materialize(S);
    double best = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      best = std::max(best, (A * v).norm());
      const Eigen::VectorXd next = E * v;
      v = next;
    }
    ik.lipschitz = std::exp(ik.dt * detail::matrix_norm2(A)) * best;
  }
  return ik;
}

/// Phi_tau u for a continuous piecewise-linear input. Matrix models integrate
/// exactly; shift models act on the cell averages of u (their time resolution).
inline Eigen::VectorXd input_map(const ControlOperator& B, const PiecewiseLinear& u, double tau,
                                 const SemigroupModel& S) {
  require(u.knots.size() >= 2 && u.knots.size() == u.values.size(), "piecewise-linear input is malformed");
  require(std::abs(u.knots.front()) <= 1e-12 && std::abs(u.knots.back() - tau) <= 1e-12 * std::max(1.0, tau),
          "input must be defined on [0, tau]");
  if (S.is_shift()) {
    require(detail::on_grid(S, tau), "horizon is not aligned with the shift grid");
    const auto ik = input_kernel(B, tau, 0, S);
    Eigen::VectorXd avg(ik.K.cols());
    for (Eigen::Index k = 0; k < ik.K.cols(); ++k) {
      const double l = static_cast<double>(k) * ik.dt;
      avg[k] = detail::pl_integral(u, l, l + ik.dt) / ik.dt;
    }
    return ik.K * avg;
  }
  const Eigen::VectorXd Bm = B.materialize(S);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(S.dim());
  for (std::size_t i = 0; i + 1 < u.knots.size(); ++i) {
    const double a = u.knots[i];
    const double b = u.knots[i + 1];
    if (b <= a) continue;
    const double beta = (u.values[i + 1] - u.values[i]) / (b - a);
    const double alpha = u.values[i] - beta * a;
    const double lo = std::max(0.0, tau - b);
    const double hi = std::max(0.0, tau - a);
    acc += (alpha + beta * tau) * S.orbit_integral(lo, hi, Bm) - beta * S.orbit_moment(lo, hi, Bm);
  }
  return acc;
}

/// Zero prefix extending an input on [0, tau_old] to [0, tau]; Phi_tau of the
/// result equals Phi_{tau_old} of the original.
inline StepFunction pad_front(const StepFunction& u, double tau) {
  const double gap = tau - u.horizon();
  require(gap >= -1e-12, "padding cannot shorten an input");
  if (gap <= 1e-12 * std::max(1.0, tau)) return u;
  std::vector<double> t{0.0};
  std::vector<double> v{0.0};
  for (double b : u.breakpoints) t.push_back(gap + b);
  t.back() = tau;
  for (double x : u.values) v.push_back(x);
  return StepFunction(std::move(t), std::move(v));
}

/// ||B||_{B_p(tau)} bracket. `warm` is an earlier witness on a shorter horizon.
inline NormBracket input_norm(const ControlOperator& B, double p, double tau, const SemigroupModel& S,
                              const NormOptions& opt = {}, const std::optional<StepFunction>& warm = std::nullopt) {
  require(p >= 1.0, "exponent must lie in [1, inf]");
  tau = horizon_for(S, tau);
  NormBracket out = zero_bracket(tau, opt);
  if (tau == 0.0) return out;
  const TargetNorm N = state_target(S);
  const double q = conjugate_exponent(p);
  const double tau_q = std::isinf(q) ? 1.0 : std::pow(tau, 1.0 / q);

  double best_upper = kInf;
  double best_lower = -1.0;
  std::vector<double> best_vals;
  Eigen::VectorXd prev;
  std::size_t m = S.is_shift() ? S.snap_steps(tau) : opt.min_cells;
  for (;;) {
    const auto ik = input_kernel(B, tau, m, S);
    m = static_cast<std::size_t>(ik.K.cols());
    std::vector<Eigen::VectorXd> starts;
    if (prev.size() > 0 && 2 * prev.size() == static_cast<Eigen::Index>(m)) {
      Eigen::VectorXd up(static_cast<Eigen::Index>(m));
      for (Eigen::Index k = 0; k < up.size(); ++k) up[k] = prev[k / 2];
      starts.push_back(up);
    }
    const auto disc = bracket_kernel(ik.K, ik.weights, p, N, opt.search, starts);
    const double slack = S.is_shift() ? 0.0 : ik.dt * ik.lipschitz * tau_q;
    best_upper = std::min(best_upper, disc.upper + slack);
    if (disc.lower > best_lower) {
      best_lower = disc.lower;
      best_vals.assign(disc.witness.data(), disc.witness.data() + disc.witness.size());
    }
    prev = disc.witness;
    out.refinement_trace.push_back({m, best_lower, best_upper});
    out.cells = m;
    if (best_upper - best_lower <= opt.tolerance || S.is_shift() || 2 * m > opt.max_cells) break;
    m *= 2;
  }
  out.lower = best_lower;
  out.upper = std::max(best_upper, best_lower);
  out.input_witness = StepFunction::uniform(tau, best_vals);
  if (warm && warm->horizon() <= tau + 1e-12) {
    StepFunction padded = pad_front(*warm, tau);
    const double scale = padded.lp(p);
    if (scale > 0.0) {
      for (auto& v : padded.values) v /= scale;
      const double val = N(input_map(B, padded, tau, S));
      if (val > out.lower) {
        out.lower = val;
        out.upper = std::max(out.upper, val);
        out.input_witness = std::move(padded);
      }
    }
  }
  out.converged = out.upper - out.lower <= opt.tolerance;
  return out;
}

/// ||B||_{B_C(tau)}: sup-norm unit ball of continuous inputs. The lower bound
/// evaluates the continuous bridge of the B_inf witness; the upper bound is B_inf's.
inline NormBracket input_norm_continuous(const ControlOperator& B, double tau, const SemigroupModel& S,
                                         const NormOptions& opt = {},
                                         const std::optional<StepFunction>& warm = std::nullopt) {
  NormBracket out = input_norm(B, kInf, tau, S, opt, warm);
  if (out.tau == 0.0 || !out.input_witness) return out;
  const StepFunction& u = *out.input_witness;
  PiecewiseLinear ue = u.cells() > 1 ? continuous_interpolant(u, u.min_cell_width() / 8.0)
                                     : PiecewiseLinear{{0.0, out.tau}, {u.values[0], u.values[0]}};
  out.lower = state_target(S)(input_map(B, ue, out.tau, S));
  out.upper = std::max(out.upper, out.lower);
  out.continuous_witness = std::move(ue);
  out.converged = out.upper - out.lower <= opt.tolerance;
  return out;
}

// ---------------------------------------------------------------------------
// Output map

struct OutputKernel {
  double tau = 0.0;
  double dt = 0.0;
  Eigen::MatrixXd O;  // row k: output on cell k (midpoint value or cell average)
  double lipschitz = 0.0;
};

inline OutputKernel output_kernel(const ObservationOperator& C, double tau, std::size_t m, const SemigroupModel& S) {
  OutputKernel ok;
  ok.tau = tau;
  if (S.is_shift()) m = S.snap_steps(tau);
  require(m >= 1, "output kernel needs at least one cell");
  ok.dt = tau / static_cast<double>(m);
  const auto d = S.dim();
  ok.O.resize(static_cast<Eigen::Index>(m), d);
  if (S.is_shift()) {
    require(C.kind == ObservationOperator::Kind::Measure, "shift models observe through a measure");
    const MeasureCdf cdf(C.measure);
    const double h = S.cell_width();
    const bool right = S.kind() == ModelKind::ShiftRightL1;
    for (std::size_t k = 0; k < m; ++k) {
      const double s = (static_cast<double>(k) + 0.5) * ok.dt;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double l = static_cast<double>(j) * h + (right ? s : -s);
        ok.O(static_cast<Eigen::Index>(k), j) = cdf.mass(l, l + h);
      }
    }
    return ok;
  }
  require(C.kind == ObservationOperator::Kind::Row && C.row.size() == d, "matrix models observe through a row");
  const Eigen::MatrixXd& A = S.generator_matrix();
  // J = int_0^dt e^{sA} ds from the block exponential of [[A, I], [0, 0]]
  Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  blk.topLeftCorner(d, d) = A * ok.dt;
  blk.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d) * ok.dt;
  const Eigen::MatrixXd eb = blk.exp();
  const Eigen::MatrixXd E = eb.topLeftCorner(d, d);
  const Eigen::MatrixXd J = eb.topRightCorner(d, d);
  Eigen::RowVectorXd r = C.row;
  double best = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    ok.O.row(static_cast<Eigen::Index>(k)) = r * J / ok.dt;
    best = std::max(best, (r * A).norm());
    const Eigen::RowVectorXd next = r * E;
    r = next;
  }
  ok.lipschitz = std::exp(ok.dt * detail::matrix_norm2(A)) * best;
  return ok;
}

/// t -> C T(t) x on an m-cell grid of [0, tau]; shift models use the grid of the model.
inline GridFunction output_map(const ObservationOperator& C, const Eigen::VectorXd& x, double tau,
                               const SemigroupModel& S, std::size_t m = 256) {
  tau = horizon_for(S, tau);
  require(tau > 0.0, "output horizon must be positive");
  require(x.size() == S.dim(), "state has the wrong dimension");
  const auto ok = output_kernel(C, tau, m, S);
  const Eigen::VectorXd y = ok.O * x;
  return GridFunction(0.0, tau, std::vector<double>(y.data(), y.data() + y.size()));
}

namespace detail {

/// Output norm on a fixed kernel through its dual problem.
inline DiscreteBracket output_bracket(const OutputKernel& ok, double p, const SemigroupModel& S,
                                      const SearchOptions& search, Eigen::VectorXd& state,
                                      const std::vector<Eigen::VectorXd>& warm_states) {
  const double q = conjugate_exponent(p);
  const double wx = S.is_shift() ? S.cell_width() : 1.0;
  const Eigen::MatrixXd G = ok.O.transpose() * (ok.dt / wx);
  const std::vector<double> w(static_cast<std::size_t>(ok.O.rows()), ok.dt);
  std::vector<Eigen::VectorXd> warm;
  for (const auto& x : warm_states) {
    const Eigen::VectorXd y = ok.O * x;
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(y.size());
    const double ny = weighted_lp(y, w, p);
    if (ny == 0.0) continue;
    // Holder-norming psi of the output y
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      if (std::isinf(p)) continue;
      psi[k] = (y[k] < 0 ? -1.0 : 1.0) * std::pow(std::abs(y[k]) / ny, p - 1.0);
    }
    if (std::isinf(p)) {
      Eigen::Index arg = 0;
      y.cwiseAbs().maxCoeff(&arg);
      psi[arg] = (y[arg] < 0 ? -1.0 : 1.0) / ok.dt;
    }
    warm.push_back(psi);
  }
  DiscreteBracket disc = bracket_kernel(G, w, q, dual_target(S), search, warm);
  const Eigen::VectorXd f = G * disc.witness;
  state = S.sun_dual().norming_functional(f);
  double lower = weighted_lp(ok.O * state, w, p);
  for (const auto& x : warm_states) {
    const double nx = S.norm(x);
    if (nx == 0.0) continue;
    const double v = weighted_lp(ok.O * x, w, p) / nx;
    if (v > lower) {
      lower = v;
      state = x / nx;
    }
  }
  disc.lower = lower;
  disc.upper = std::max(disc.upper, lower);
  return disc;
}

}  // namespace detail

/// ||C||_{C_p(tau)} bracket; the witness is a unit state.
inline NormBracket output_norm(const ObservationOperator& C, double p, double tau, const SemigroupModel& S,
                               const NormOptions& opt = {}, const std::optional<Eigen::VectorXd>& warm = std::nullopt) {
  require(p >= 1.0, "exponent must lie in [1, inf]");
  tau = horizon_for(S, tau);
  NormBracket out = zero_bracket(tau, opt);
  out.state_witness = Eigen::VectorXd::Zero(S.dim());
  if (tau == 0.0) return out;
  const double tau_p = std::isinf(p) ? 1.0 : std::pow(tau, 1.0 / p);
  double best_upper = kInf;
  double best_lower = -1.0;
  std::vector<Eigen::VectorXd> seeds;
  if (warm && warm->size() == S.dim()) seeds.push_back(*warm);
  std::size_t m = S.is_shift() ? S.snap_steps(tau) : opt.min_cells;
  for (;;) {
    const auto ok = output_kernel(C, tau, m, S);
    m = static_cast<std::size_t>(ok.O.rows());
    Eigen::VectorXd state;
    const auto disc = detail::output_bracket(ok, p, S, opt.search, state, seeds);
    const double slack = S.is_shift() ? 0.0 : ok.dt * ok.lipschitz * tau_p;
    best_upper = std::min(best_upper, disc.upper + slack);
    if (disc.lower > best_lower) {
      best_lower = disc.lower;
      out.state_witness = state;
    }
    seeds.assign(1, out.state_witness);
    out.refinement_trace.push_back({m, best_lower, best_upper});
    out.cells = m;
    if (best_upper - best_lower <= opt.tolerance || S.is_shift() || 2 * m > opt.max_cells) break;
    m *= 2;
  }
  out.lower = best_lower;
  out.upper = std::max(best_upper, best_lower);
  out.converged = out.upper - out.lower <= opt.tolerance;
  return out;
}

/// Norm of x -> int |C T(s) x| ds with C restricted to the spatial window [xi, xi + tau].
inline NormBracket windowed_output_norm(const ObservationOperator& C, double xi, double tau, const SemigroupModel& S,
                                        const NormOptions& opt = {}) {
  require(S.is_shift() && C.kind == ObservationOperator::Kind::Measure, "windowed norms need a shift model");
  require(xi >= 0.0 && xi + tau <= 1.0 + 1e-12 && tau >= 0.0, "window must lie inside [0, 1]");
  return output_norm(ObservationOperator::from_measure(C.measure.restricted(xi, xi + tau)), 1.0, tau, S, opt);
}

// ---------------------------------------------------------------------------
// Norm curves

inline std::vector<double> sorted_grid(std::vector<double> taus) {
  std::sort(taus.begin(), taus.end());
  return taus;
}

/// Input norms along a horizon grid, computed in increasing tau with the previous
/// witness carried forward so the lower bounds are nondecreasing.
inline std::vector<NormBracket> input_norm_curve(const ControlOperator& B, double p, const std::vector<double>& taus,
                                                 const SemigroupModel& S, const NormOptions& opt = {},
                                                 bool continuous = false) {
  std::vector<NormBracket> out;
  std::optional<StepFunction> warm;
  for (double tau : sorted_grid(taus)) {
    NormBracket b = continuous ? input_norm_continuous(B, tau, S, opt, warm) : input_norm(B, p, tau, S, opt, warm);
    if (b.input_witness) warm = b.input_witness;
    out.push_back(std::move(b));
  }
  return out;
}

inline std::vector<NormBracket> output_norm_curve(const ObservationOperator& C, double p,
                                                  const std::vector<double>& taus, const SemigroupModel& S,
                                                  const NormOptions& opt = {}) {
  std::vector<NormBracket> out;
  std::optional<Eigen::VectorXd> warm;
  for (double tau : sorted_grid(taus)) {
    NormBracket b = output_norm(C, p, tau, S, opt, warm);
    if (b.tau > 0.0) warm = b.state_witness;
    out.push_back(std::move(b));
  }
  return out;
}

/// `k` geometrically spaced horizons from lo to hi.
inline std::vector<double> geometric_grid(double lo, double hi, std::size_t k) {
  require(lo > 0.0 && hi >= lo && k >= 1, "geometric grid needs 0 < min <= max and at least one point");
  std::vector<double> out;
  if (k == 1) return {hi};
  for (std::size_t i = 0; i < k; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(k - 1)));
  out.back() = hi;
  return out;
}

// ---------------------------------------------------------------------------
// Zero-class classification

enum class ZeroClass { ZeroClass, NotZeroClass, Inconclusive };

inline std::string to_string(ZeroClass z) {
  switch (z) {
    case ZeroClass::ZeroClass: return "zero_class";
    case ZeroClass::NotZeroClass: return "not_zero_class";
    case ZeroClass::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct ZeroClassOptions {
  double relative_threshold = 1e-2;
  std::size_t tail_points = 6;
};

struct ZeroClassVerdict {
  ZeroClass verdict = ZeroClass::Inconclusive;
  std::vector<double> tau_grid;  // decreasing
  std::vector<NormBracket> norm_curve;
  double slope = 0.0;
  double extrapolated_limit = 0.0;
  double uncertainty = 0.0;
  double fitted_exponent = 0.0;
  double threshold = 0.0;
  ZeroClassOptions options;
};

/// Verdict on lim_{tau -> 0} of a norm curve. The upper bounds on the tail are
/// fitted by L + K tau^s (L >= 0); zero class needs a positive log-log slope and
/// L plus its uncertainty under the threshold.
inline ZeroClassVerdict zero_class_classify(std::vector<NormBracket> curve, const ZeroClassOptions& opt = {}) {
  require(curve.size() >= opt.tail_points && opt.tail_points >= 3, "zero-class classification needs a longer tau grid");
  std::sort(curve.begin(), curve.end(), [](const NormBracket& a, const NormBracket& b) { return a.tau > b.tau; });
  ZeroClassVerdict v;
  v.options = opt;
  for (const auto& b : curve) v.tau_grid.push_back(b.tau);
  v.threshold = opt.relative_threshold * curve.front().upper;
  const std::vector<NormBracket> tail(curve.end() - static_cast<std::ptrdiff_t>(opt.tail_points), curve.end());
  v.norm_curve = std::move(curve);

  bool all_zero = true;
  for (const auto& b : v.norm_curve) all_zero = all_zero && b.upper == 0.0;
  if (all_zero) {
    v.verdict = ZeroClass::ZeroClass;
    return v;
  }

  // log-log slope of the tail uppers
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (const auto& b : tail) {
      if (b.upper <= 0.0 || b.tau <= 0.0) continue;
      const double x = std::log(b.tau);
      const double y = std::log(b.upper);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    const double den = static_cast<double>(cnt) * sxx - sx * sx;
    v.slope = (cnt >= 2 && den > 0.0) ? (static_cast<double>(cnt) * sxy - sx * sy) / den : 0.0;
  }

  // fit upper = L + K tau^s over an exponent grid
  struct Fit {
    double s, L, rss;
  };
  std::vector<Fit> fits;
  const double n = static_cast<double>(tail.size());
  for (int i = 5; i <= 200; ++i) {
    const double s = 0.01 * i;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& b : tail) {
      const double x = std::pow(b.tau, s);
      sx += x;
      sy += b.upper;
      sxx += x * x;
      sxy += x * b.upper;
      syy += b.upper * b.upper;
    }
    const double den = n * sxx - sx * sx;
    double K = den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    double L = (sy - K * sx) / n;
    if (L < 0.0) {
      L = 0.0;
      K = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    double rss = 0.0;
    for (const auto& b : tail) {
      const double r = b.upper - L - K * std::pow(b.tau, s);
      rss += r * r;
    }
    fits.push_back({s, L, rss});
  }
  const auto best = *std::min_element(fits.begin(), fits.end(), [](const Fit& a, const Fit& b) { return a.rss < b.rss; });
  double spread = 0.0;
  for (const auto& f : fits)
    if (f.rss <= 1.1 * best.rss + 1e-30) spread = std::max(spread, std::abs(f.L - best.L));
  v.fitted_exponent = best.s;
  v.extrapolated_limit = best.L;
  v.uncertainty = std::sqrt(best.rss / n) + spread;

  double tail_min_lower = kInf;
  for (const auto& b : tail) tail_min_lower = std::min(tail_min_lower, b.lower);
  if (v.slope > 0.0 && v.extrapolated_limit + v.uncertainty < v.threshold)
    v.verdict = ZeroClass::ZeroClass;
  else if (tail_min_lower >= v.threshold && v.threshold > 0.0)
    v.verdict = ZeroClass::NotZeroClass;
  else
    v.verdict = ZeroClass::Inconclusive;
  return v;
}

// ---------------------------------------------------------------------------
// Reports

inline void write_curve_csv(std::ostream& os, const std::vector<NormBracket>& curve) {
  os << "tau,lower,upper,converged\n";
  for (const auto& b : curve)
    os << format_double(b.tau) << ',' << format_double(b.lower) << ',' << format_double(b.upper) << ','
       << (b.converged ? "true" : "false") << '\n';
}

inline nlohmann::ordered_json bracket_to_json(const NormBracket& b) {
  nlohmann::ordered_json j;
  j["tau"] = b.tau;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["converged"] = b.converged;
  j["cells"] = b.cells;
  return j;
}

inline nlohmann::ordered_json verdict_to_json(const ZeroClassVerdict& v) {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(v.verdict);
  j["slope"] = v.slope;
  j["limit"] = v.extrapolated_limit;
  j["uncertainty"] = v.uncertainty;
  j["threshold"] = v.threshold;
  j["tau_grid"] = v.tau_grid;
  j["relative_threshold"] = v.options.relative_threshold;
  j["tail_points"] = v.options.tail_points;
  return j;
}

}  // namespace admlab
