#pragma once

// Evaluatable C0-semigroups: finite matrix semigroups exp(tA) on Euclidean R^d,
// and the nilpotent shift pair on n-cell grids of [0,1]: right translation on
// L^1 and left translation on the continuous functions vanishing at 1.
//
// Shift models are exact at grid times t = k/n. Their generator is the Cayley
// form A_h = (2/h)(S - I)(I + S)^{-1}, the unique bounded operator for which the
// trapezoidal time integral of T(s) A_h w over a grid step equals the increment
// of T(s) w, so resolvent representations and direct quadrature agree exactly.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "admlab/error.hpp"
#include "admlab/grid_fn.hpp"
#include "admlab/measures_bv.hpp"

namespace admlab {

enum class ModelKind { Matrix, ShiftRightL1, ShiftLeftSun };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Matrix: return "matrix";
    case ModelKind::ShiftRightL1: return "shift-right-l1";
    case ModelKind::ShiftLeftSun: return "shift-left-sun";
  }
  return "unknown";
}

/// ||T(t)|| <= M exp(omega t).
struct GrowthBound {
  double M = 1.0;
  double omega = 0.0;
};

struct ResolventNorms {
  double lambda_resolvent = 0.0;            // ||lambda R(lambda, A)||
  double identity_minus_lambda_resolvent = 0.0;  // ||1 - lambda R(lambda, A)||
};

class SemigroupModel {
 public:
  static SemigroupModel matrix(Eigen::MatrixXd A) {
    require(A.rows() == A.cols() && A.rows() >= 1, "generator must be a nonempty square matrix");
    require(A.allFinite(), "generator has non-finite entries");
    SemigroupModel m;
    m.kind_ = ModelKind::Matrix;
    m.A_ = std::move(A);
    return m;
  }

  static SemigroupModel shift_right_l1(std::size_t n) { return shift(ModelKind::ShiftRightL1, n); }
  static SemigroupModel shift_left_sun(std::size_t n) { return shift(ModelKind::ShiftLeftSun, n); }

  ModelKind kind() const { return kind_; }
  bool is_shift() const { return kind_ != ModelKind::Matrix; }
  Eigen::Index dim() const { return is_shift() ? static_cast<Eigen::Index>(n_) : A_.rows(); }
  std::size_t cells() const { return n_; }
  double cell_width() const { return is_shift() ? 1.0 / static_cast<double>(n_) : 0.0; }
  const Eigen::MatrixXd& generator_matrix() const { return A_; }

  std::string id() const {
    if (is_shift()) return to_string(kind_) + "(n=" + std::to_string(n_) + ")";
    return "matrix(d=" + std::to_string(A_.rows()) + ")";
  }

  GrowthBound growth_bound() const {
    if (is_shift()) return {1.0, 0.0};
    return {1.0, A_.operatorNorm()};
  }

  /// limsup_{t -> 0} ||T(t)||; every model here is contractive near t = 0.
  double limsup_norm_at_zero() const { return 1.0; }

  /// Shift models snap t to the nearest grid time.
  double snap(double t) const {
    if (!is_shift()) return t;
    return std::round(t * static_cast<double>(n_)) / static_cast<double>(n_);
  }

  std::size_t snap_steps(double t) const {
    return static_cast<std::size_t>(std::llround(t * static_cast<double>(n_)));
  }

  /// T(t) x; shift models use t rounded to the grid.
  Eigen::VectorXd apply(double t, const Eigen::VectorXd& x) const {
    require(t >= 0.0 && std::isfinite(t), "semigroup time must be finite and nonnegative");
    check_state(x);
    if (is_shift()) return shift_by(snap_steps(t), x);
    return exp_at(t) * x;
  }

  /// Orbit used inside time integrals. Matrix models are exact; shift models
  /// interpolate linearly between consecutive grid shifts, which is the cell
  /// average of the exact translate of a cell-valued state.
  Eigen::VectorXd orbit(double sigma, const Eigen::VectorXd& x) const {
    require(sigma >= -1e-14, "orbit time must be nonnegative");
    sigma = std::max(sigma, 0.0);
    if (!is_shift()) return exp_at(sigma) * x;
    const double u = sigma * static_cast<double>(n_);
    const double ur = std::round(u);
    if (std::abs(u - ur) < 1e-9) return shift_by(static_cast<std::size_t>(ur), x);
    const auto j = static_cast<std::size_t>(std::floor(u));
    const double theta = u - static_cast<double>(j);
    return (1.0 - theta) * shift_by(j, x) + theta * shift_by(j + 1, x);
  }

  /// int_alpha^beta orbit(sigma) x dsigma.
  Eigen::VectorXd orbit_integral(double alpha, double beta, const Eigen::VectorXd& x) const {
    require(beta >= alpha && alpha >= -1e-14, "orbit integral needs 0 <= alpha <= beta");
    if (beta == alpha) return Eigen::VectorXd::Zero(x.size());
    if (is_shift()) return shift_combination(shift_weights(alpha, beta, false), x);
    const auto [I0, M0] = van_loan(beta - alpha, x);
    (void)M0;
    return exp_at(alpha) * I0;
  }

  /// int_alpha^beta sigma orbit(sigma) x dsigma.
  Eigen::VectorXd orbit_moment(double alpha, double beta, const Eigen::VectorXd& x) const {
    require(beta >= alpha && alpha >= -1e-14, "orbit moment needs 0 <= alpha <= beta");
    if (beta == alpha) return Eigen::VectorXd::Zero(x.size());
    if (is_shift()) return shift_combination(shift_weights(alpha, beta, true), x);
    const auto [I0, M0] = van_loan(beta - alpha, x);
    return exp_at(alpha) * (alpha * I0 + M0);
  }

  /// A x for the (bounded) generator of the model.
  Eigen::VectorXd generator_apply(const Eigen::VectorXd& x) const {
    check_state(x);
    if (!is_shift()) return A_ * x;
    // y = (I + S)^{-1} x by forward substitution along the transport direction.
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::VectorXd y(n);
    if (kind_ == ModelKind::ShiftRightL1) {
      for (Eigen::Index i = 0; i < n; ++i) y[i] = x[i] - (i > 0 ? y[i - 1] : 0.0);
    } else {
      for (Eigen::Index i = n - 1; i >= 0; --i) y[i] = x[i] - (i + 1 < n ? y[i + 1] : 0.0);
    }
    return (2.0 / cell_width()) * (shift_by(1, y) - y);
  }

  /// R(lambda, A) x.
  Eigen::VectorXd resolvent(double lambda, const Eigen::VectorXd& x) const {
    check_state(x);
    if (is_shift()) return shift_combination(resolvent_kernel(lambda), x);
    const Eigen::MatrixXd M = lambda * Eigen::MatrixXd::Identity(A_.rows(), A_.cols()) - A_;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
      throw SingularResolvent("lambda lies in the spectrum of A");
    return lu.solve(x);
  }

  ResolventNorms resolvent_norms(double lambda) const {
    if (is_shift()) {
      const auto r = resolvent_kernel(lambda);
      ResolventNorms out;
      double tail = 0.0;
      for (std::size_t k = 1; k < r.size(); ++k) tail += std::abs(r[k]);
      out.lambda_resolvent = std::abs(lambda) * (std::abs(r[0]) + tail);
      out.identity_minus_lambda_resolvent = std::abs(1.0 - lambda * r[0]) + std::abs(lambda) * tail;
      return out;
    }
    const auto d = A_.rows();
    const Eigen::MatrixXd M = lambda * Eigen::MatrixXd::Identity(d, d) - A_;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw SingularResolvent("lambda lies in the spectrum of A");
    const Eigen::MatrixXd R = lu.inverse();
    const Eigen::MatrixXd lR = lambda * R;
    return {lR.operatorNorm(), (Eigen::MatrixXd::Identity(d, d) - lR).operatorNorm()};
  }

  /// State norm: Euclidean, grid L^1 or grid sup.
  double norm(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case ModelKind::Matrix: return x.norm();
      case ModelKind::ShiftRightL1: return x.lpNorm<1>() * cell_width();
      case ModelKind::ShiftLeftSun: return x.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
  }

  /// Norm of a functional under the pairing below.
  double dual_norm(const Eigen::VectorXd& f) const {
    switch (kind_) {
      case ModelKind::Matrix: return f.norm();
      case ModelKind::ShiftRightL1: return f.lpNorm<Eigen::Infinity>();
      case ModelKind::ShiftLeftSun: return f.lpNorm<1>() * cell_width();
    }
    return 0.0;
  }

  /// <x, f> = sum x_i f_i (matrix) or h sum x_i f_i (grid).
  double pairing(const Eigen::VectorXd& x, const Eigen::VectorXd& f) const {
    const double dot = x.dot(f);
    return is_shift() ? dot * cell_width() : dot;
  }

  /// Norming functional of x: <x, f> = ||x||, dual_norm(f) <= 1.
  Eigen::VectorXd norming_functional(const Eigen::VectorXd& x) const {
    const double nx = norm(x);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(x.size());
    if (nx == 0.0) return f;
    switch (kind_) {
      case ModelKind::Matrix: return x / nx;
      case ModelKind::ShiftRightL1:
        for (Eigen::Index i = 0; i < x.size(); ++i) f[i] = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0);
        return f;
      case ModelKind::ShiftLeftSun: {
        Eigen::Index arg = 0;
        x.cwiseAbs().maxCoeff(&arg);
        f[arg] = (x[arg] > 0 ? 1.0 : -1.0) / cell_width();
        return f;
      }
    }
    return f;
  }

  /// The paired model on the sun-dual space: transpose for matrices, and the
  /// left/right translation pair for shifts (the pair is sun-reflexive).
  SemigroupModel sun_dual() const {
    switch (kind_) {
      case ModelKind::Matrix: return matrix(A_.transpose());
      case ModelKind::ShiftRightL1: return shift_left_sun(n_);
      case ModelKind::ShiftLeftSun: return shift_right_l1(n_);
    }
    return *this;
  }

  /// Cell-valued grid function view of a shift-model state.
  GridFunction as_grid(const Eigen::VectorXd& x) const {
    require(is_shift(), "grid view only exists for shift models");
    std::vector<double> v(x.data(), x.data() + x.size());
    return GridFunction(0.0, 1.0, std::move(v), kind_ == ModelKind::ShiftRightL1 ? SpaceTag::L1 : SpaceTag::Sup);
  }

  Eigen::VectorXd shift_by(std::size_t k, const Eigen::VectorXd& x) const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    const auto kk = static_cast<Eigen::Index>(k);
    if (kk >= n) return y;
    if (kind_ == ModelKind::ShiftRightL1)
      y.tail(n - kk) = x.head(n - kk);
    else
      y.head(n - kk) = x.tail(n - kk);
    return y;
  }

 private:
  static SemigroupModel shift(ModelKind kind, std::size_t n) {
    require(n >= 2, "shift models need at least two cells");
    SemigroupModel m;
    m.kind_ = kind;
    m.n_ = n;
    return m;
  }

  void check_state(const Eigen::VectorXd& x) const {
    require(x.size() == dim(), "state dimension does not match the model");
  }

  Eigen::MatrixXd exp_at(double t) const { return (A_ * t).exp(); }

  /// (int_0^L e^{rA} x dr, int_0^L r e^{rA} x dr) from one block exponential.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> van_loan(double L, const Eigen::VectorXd& x) const {
    const auto d = A_.rows();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d + 2, d + 2);
    G.topLeftCorner(d, d) = A_;
    G.block(0, d, d, 1) = x;
    G(d, d + 1) = 1.0;
    const Eigen::MatrixXd E = (G * L).exp();
    Eigen::VectorXd I0 = E.block(0, d, d, 1);
    Eigen::VectorXd tail = E.block(0, d + 1, d, 1);  // int_0^L e^{(L-s)A} s x ds
    return {I0, L * I0 - tail};
  }

  /// Coefficients c_k with int_alpha^beta orbit = sum_k c_k S^k (times sigma if moment).
  std::vector<double> shift_weights(double alpha, double beta, bool moment) const {
    const double h = cell_width();
    const double ua = alpha / h;
    const double ub = beta / h;
    const auto jmax = static_cast<std::size_t>(std::ceil(ub - 1e-12));
    std::vector<double> c(std::min(jmax + 2, n_ + 1), 0.0);
    auto add = [&](std::size_t k, double v) {
      if (k < c.size()) c[k] += v;
    };
    for (auto j = static_cast<std::size_t>(std::floor(ua + 1e-12)); static_cast<double>(j) < ub - 1e-12; ++j) {
      const double t0 = std::max(ua - static_cast<double>(j), 0.0);
      const double t1 = std::min(ub - static_cast<double>(j), 1.0);
      if (t1 <= t0) continue;
      auto P = [&](double t, int p) { return std::pow(t, p); };
      const double i1 = t1 - t0;
      const double i2 = (P(t1, 2) - P(t0, 2)) / 2.0;
      const double i3 = (P(t1, 3) - P(t0, 3)) / 3.0;
      if (!moment) {
        add(j, h * (i1 - i2));
        add(j + 1, h * i2);
      } else {
        // sigma = h (j + theta)
        const double jj = static_cast<double>(j);
        add(j, h * h * (jj * (i1 - i2) + (i2 - i3)));
        add(j + 1, h * h * (jj * i2 + i3));
      }
    }
    return c;
  }

  Eigen::VectorXd shift_combination(const std::vector<double>& c, const Eigen::VectorXd& x) const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    const bool right = kind_ == ModelKind::ShiftRightL1;
    for (std::size_t k = 0; k < c.size() && static_cast<Eigen::Index>(k) < n; ++k) {
      if (c[k] == 0.0) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      if (right)
        y.tail(n - kk) += c[k] * x.head(n - kk);
      else
        y.head(n - kk) += c[k] * x.tail(n - kk);
    }
    return y;
  }

  /// Toeplitz coefficients of R(lambda, A_h) = (I + S)[(lambda + 2/h) I + (lambda - 2/h) S]^{-1}.
  std::vector<double> resolvent_kernel(double lambda) const {
    const double h = cell_width();
    const double a = lambda + 2.0 / h;
    const double b = lambda - 2.0 / h;
    if (std::abs(a) < 1e-12 * (2.0 / h)) throw SingularResolvent("lambda = -2/h is singular for the shift model");
    std::vector<double> r(n_, 0.0);
    r[0] = 1.0 / a;
    const double rho = -b / a;
    double geom = (4.0 / h) / (a * a);
    for (std::size_t k = 1; k < n_; ++k) {
      r[k] = geom;
      geom *= rho;
    }
    return r;
  }

  ModelKind kind_ = ModelKind::Matrix;
  Eigen::MatrixXd A_;
  std::size_t n_ = 0;
};

/// Strictly upper-triangular d x d generator with entries uniform in [-1, 1].
inline Eigen::MatrixXd random_nilpotent(Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) A(i, j) = U(rng);
  return A;
}

/// Control operator B in L(R, X_{-1}) carried as W = R(lambda, A_{-1}) B.
struct ControlOperator {
  double lambda = 1.0;
  Eigen::VectorXd W;
  bool bounded = false;
  Eigen::VectorXd B;                    // direct action, set when bounded
  std::optional<BorelMeasure> measure;  // source measure on shift models
  std::optional<Eigen::VectorXd> direct;  // raw (possibly large) grid representative of B

  /// B = (lambda - A) W recovered as a state vector; for shift models this is the
  /// grid representative, whose size reflects how unbounded B is.
  Eigen::VectorXd materialize(const SemigroupModel& S) const { return lambda * W - S.generator_apply(W); }
};

inline ControlOperator control_from_state(const SemigroupModel& S, double lambda, const Eigen::VectorXd& b) {
  ControlOperator op;
  op.lambda = lambda;
  op.W = S.resolvent(lambda, b);
  op.bounded = true;
  op.B = b;
  op.direct = b;
  return op;
}

/// Grid representative of a measure as a functional: g_j = mu(cell_j) / h, the
/// atom at 1 assigned to the last cell.
inline Eigen::VectorXd measure_density_on_grid(const BorelMeasure& mu, std::size_t n) {
  const MeasureCdf cdf(mu);
  const double h = 1.0 / static_cast<double>(n);
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const double l = static_cast<double>(j) * h;
    const double r = (j + 1 == n) ? 1.0 : static_cast<double>(j + 1) * h;
    g[static_cast<Eigen::Index>(j)] = ((j + 1 == n) ? cdf.mass_closed(l, r) : cdf.mass(l, r)) / h;
  }
  return g;
}

inline ControlOperator control_from_measure(const SemigroupModel& S, double lambda, const BorelMeasure& mu) {
  require(S.is_shift(), "measure-valued controls need a shift model");
  ControlOperator op;
  op.lambda = lambda;
  const auto g = measure_density_on_grid(mu, S.cells());
  op.W = S.resolvent(lambda, g);
  op.bounded = false;
  op.measure = mu;
  op.direct = g;
  return op;
}

/// Observation functional: a measure pairing on shift models, a row on matrix models.
struct ObservationOperator {
  enum class Kind { Measure, Row };
  Kind kind = Kind::Row;
  BorelMeasure measure;
  Eigen::RowVectorXd row;

  static ObservationOperator from_measure(BorelMeasure mu) {
    ObservationOperator c;
    c.kind = Kind::Measure;
    c.measure = std::move(mu);
    return c;
  }
  static ObservationOperator from_row(Eigen::RowVectorXd r) {
    ObservationOperator c;
    c.kind = Kind::Row;
    c.row = std::move(r);
    return c;
  }

  /// C x on a cell-valued state (measure kind) or a vector (row kind).
  double apply(const SemigroupModel& S, const Eigen::VectorXd& x) const {
    if (kind == Kind::Row) {
      require(!S.is_shift() && row.size() == x.size(), "row observation needs a matching matrix model");
      return row.dot(x);
    }
    require(S.is_shift(), "measure observation needs a shift model");
    return S.pairing(x, measure_density_on_grid(measure, S.cells()));
  }
};

/// B' as an observation on the sun-dual model.
inline ObservationOperator adjoint_observation(const ControlOperator& B, const SemigroupModel& S) {
  if (!S.is_shift()) return ObservationOperator::from_row(B.materialize(S).transpose());
  if (B.measure) return ObservationOperator::from_measure(*B.measure);
  // bounded grid element b: the functional f -> h sum b_i f_i is the measure b dx
  const Eigen::VectorXd b = B.direct ? *B.direct : B.materialize(S);
  BorelMeasure mu;
  mu.ac_density = GridFunction(0.0, 1.0, std::vector<double>(b.data(), b.data() + b.size()));
  return ObservationOperator::from_measure(std::move(mu));
}

/// C' as a control operator on the sun-dual model.
inline ControlOperator adjoint_control(const ObservationOperator& C, const SemigroupModel& S, double lambda) {
  const SemigroupModel dual = S.sun_dual();
  if (C.kind == ObservationOperator::Kind::Row) return control_from_state(dual, lambda, C.row.transpose());
  return control_from_measure(dual, lambda, C.measure);
}

/// Candidate control C' on the left translation model built from c. Two
/// membership criteria are reported side by side:
///  - strict: d~c = d~b in the dual of the test space vanishing only at 0, for
///    b = c - c(1-) continuous with b(1) = 0; needs no interior atoms and no
///    boundary atom;
///  - weak: C'(1) = db for such a b, tested against functions vanishing at both
///    ends; blind to the boundary atom.
struct BVControl {
  ControlOperator op;
  BorelMeasure derivative;
  bool member = false;       // strict criterion
  bool weak_member = false;  // weak criterion
  double antiderivative_offset = 0.0;  // b(x) = c(x) - offset
  double boundary_atom_weight = 0.0;
  bool boundary_flag = false;  // the two criteria disagree because of the atom at 1
};

inline BVControl control_from_bv(const BVFunction& c, std::size_t n, double lambda = 1.0) {
  BVControl out;
  out.derivative = derivative_measure(c);
  const auto S = SemigroupModel::shift_left_sun(n);
  out.op = control_from_measure(S, lambda, out.derivative);
  bool interior_atoms = false;
  for (const auto& a : out.derivative.atoms)
    if (a.location > 0.0 && a.location < 1.0) interior_atoms = true;
  out.antiderivative_offset = c.left_limit_at_one();
  out.boundary_atom_weight = out.derivative.boundary_weight;
  out.weak_member = !interior_atoms;
  out.member = out.weak_member && out.boundary_atom_weight == 0.0;
  out.boundary_flag = out.member != out.weak_member;
  return out;
}

/// Approximate membership of a grid function in {f in C[0,1] : f(1) = 0}.
struct SunDualMembership {
  bool member = false;
  double modulus = 0.0;    // max |f_{i+1} - f_i|
  double end_value = 0.0;  // |f_{n-1}|
  double modulus_threshold = 0.0;
  double end_tolerance = 0.0;
};

inline SunDualMembership sun_dual_membership(const GridFunction& f, double modulus_threshold = 0.05,
                                             double end_tolerance = 1e-6) {
  SunDualMembership m;
  for (std::size_t i = 1; i < f.n(); ++i) m.modulus = std::max(m.modulus, std::abs(f.values[i] - f.values[i - 1]));
  m.end_value = std::abs(f.values.back());
  m.modulus_threshold = modulus_threshold;
  m.end_tolerance = end_tolerance;
  m.member = m.modulus <= modulus_threshold && m.end_value <= end_tolerance;
  return m;
}

}  // namespace admlab
