#pragma once

// Executable duality checks between control operators on a model and
// observation operators on its sun-dual model, as bracket inequalities.

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "admlab/admissibility.hpp"

namespace admlab {

struct DualityRow {
  double tau = 0.0;
  std::string inequality;
  NormBracket lhs;
  NormBracket rhs;
  bool pass = true;
};

struct DualityConstants {
  double lambda = 0.0;
  double f0_norm = 0.0;  // ||F(0)|| = ||R(lambda, A) B||
  std::vector<double> c_tau;
  double limsup_norm = 1.0;
  double identity_minus_lambda_resolvent = 0.0;
  double discretization_defect = 0.0;  // shift models with a source measure only
};

struct DualityReport {
  std::string kind;
  std::string primal_model;
  std::string dual_model;
  double p = 0.0;
  double q = 0.0;
  std::vector<double> tau_grid;
  std::vector<DualityRow> rows;
  DualityConstants constants;
  std::map<std::string, bool> verdicts;
  std::map<std::string, std::string> notes;

  bool pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    for (const auto& [k, v] : verdicts)
      if (!v) return false;
    return true;
  }
};

struct DualityOptions {
  NormOptions norm;
  double tolerance = 1e-9;           // absolute slack on bracket comparisons
  double relative_tolerance = 0.05;  // for the explicit estimates
  std::size_t samples = 64;
  std::uint64_t seed = 0;
  bool check_zero_class = false;
  std::vector<double> zero_class_grid = geometric_grid(1e-3, 0.5, 8);
  ZeroClassOptions zero_class;
};

namespace detail {

inline bool leq(double a, double b, double tol) { return a <= b + tol * (1.0 + std::abs(b)); }

inline void add_row(DualityReport& rep, double tau, std::string label, NormBracket lhs, NormBracket rhs, bool pass) {
  rep.rows.push_back({tau, std::move(label), std::move(lhs), std::move(rhs), pass});
}

/// How far grid norms on a shift model can sit below the continuum norm:
/// mass cancelled by averaging over two adjacent cells, sum_i min(mu+(W_i), mu-(W_i))
/// with W_i = [ih, (i+2)h], plus the continuous mass two window edges can cut off.
inline double cancellation_defect(const BorelMeasure& mu, std::size_t n) {
  BorelMeasure cont = mu;
  cont.atoms.clear();
  const MeasureCdf cdf(mu), ccdf(cont);
  const double h = 1.0 / static_cast<double>(n);
  double cancelled = 0.0, edge = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double l = static_cast<double>(i) * h, r = std::min(1.0, static_cast<double>(i + 2) * h);
    cancelled += 0.5 * std::max(0.0, cdf.variation(l, r) - std::abs(cdf.mass_closed(l, r)));
    edge = std::max(edge, ccdf.variation(l, r));
  }
  return cancelled + 2.0 * edge;
}

inline NormBracket point_bracket(double tau, double v) {
  NormBracket b;
  b.tau = tau;
  b.lower = v;
  b.upper = v;
  return b;
}

}  // namespace detail

/// ||B'||_{C_q} on the sun-dual model against ||B||_{B_p}; the reverse
/// comparison is added for p < inf.
inline DualityReport check_control_duality(const ControlOperator& B, double p, const std::vector<double>& taus,
                                           const SemigroupModel& S, const DualityOptions& opt = {}) {
  DualityReport rep;
  rep.kind = "control";
  rep.p = p;
  rep.q = conjugate_exponent(p);
  rep.primal_model = S.id();
  const SemigroupModel D = S.sun_dual();
  rep.dual_model = D.id();
  rep.constants.lambda = B.lambda;
  rep.constants.f0_norm = S.norm(B.W);
  rep.constants.limsup_norm = S.limsup_norm_at_zero();
  if (S.is_shift() && B.measure) rep.constants.discretization_defect = detail::cancellation_defect(*B.measure, S.dim());
  const double defect = rep.constants.discretization_defect;
  const auto Cp = adjoint_observation(B, S);
  const auto lhs_curve = output_norm_curve(Cp, rep.q, taus, D, opt.norm);
  const auto rhs_curve = input_norm_curve(B, p, taus, S, opt.norm);
  for (std::size_t i = 0; i < lhs_curve.size(); ++i) {
    const auto& l = lhs_curve[i];
    const auto& r = rhs_curve[i];
    rep.tau_grid.push_back(r.tau);
    detail::add_row(rep, r.tau, "dual_observation_le_control", l, r,
                    detail::leq(l.lower, r.upper + defect, opt.tolerance));
    if (!std::isinf(p))
      detail::add_row(rep, r.tau, "control_le_dual_observation", r, l,
                      detail::leq(r.lower, l.upper + defect, opt.tolerance));
  }
  return rep;
}

/// ||C||_{C_p} against ||C'||_{B_q} on the sun-dual model. For p = 1 and a
/// zero-class C, C' must also be C-admissible with ||C'||_{B_C} <= ||C||_{C_1}.
inline DualityReport check_observation_duality(const ObservationOperator& C, double p, const std::vector<double>& taus,
                                               const SemigroupModel& S, double lambda = 1.0,
                                               const DualityOptions& opt = {}) {
  DualityReport rep;
  rep.kind = "observation";
  rep.p = p;
  rep.q = conjugate_exponent(p);
  rep.primal_model = S.id();
  const SemigroupModel D = S.sun_dual();
  rep.dual_model = D.id();
  const auto Cp = adjoint_control(C, S, lambda);
  rep.constants.lambda = lambda;
  rep.constants.f0_norm = D.norm(Cp.W);
  rep.constants.limsup_norm = D.limsup_norm_at_zero();
  if (S.is_shift() && C.kind == ObservationOperator::Kind::Measure)
    rep.constants.discretization_defect = detail::cancellation_defect(C.measure, S.dim());
  const auto lhs_curve = output_norm_curve(C, p, taus, S, opt.norm);
  const auto rhs_curve = input_norm_curve(Cp, rep.q, taus, D, opt.norm);
  for (std::size_t i = 0; i < lhs_curve.size(); ++i) {
    rep.tau_grid.push_back(lhs_curve[i].tau);
    detail::add_row(rep, lhs_curve[i].tau, "observation_le_dual_control", lhs_curve[i], rhs_curve[i],
                    detail::leq(lhs_curve[i].lower, rhs_curve[i].upper + rep.constants.discretization_defect,
                                opt.tolerance));
  }
  if (p == 1.0 && opt.check_zero_class) {
    const auto zc = zero_class_classify(output_norm_curve(C, 1.0, opt.zero_class_grid, S, opt.norm), opt.zero_class);
    rep.notes["observation_zero_class"] = to_string(zc.verdict);
    if (zc.verdict == ZeroClass::ZeroClass) {
      const auto bc = input_norm_curve(Cp, kInf, taus, D, opt.norm, true);
      bool ok = true;
      for (std::size_t i = 0; i < bc.size(); ++i) {
        const bool row_ok = std::isfinite(bc[i].upper) &&
                            bc[i].upper <= (1.0 + opt.relative_tolerance) * lhs_curve[i].upper + opt.tolerance;
        detail::add_row(rep, bc[i].tau, "dual_continuous_control_le_observation", bc[i], lhs_curve[i], row_ok);
        ok = ok && row_ok;
      }
      rep.verdicts["dual_c_admissible"] = ok;
    }
  }
  return rep;
}

/// Unit states in the domain of the sun-dual generator. Shift models use
/// moving averages of random signs with the inflow cell set to zero.
inline std::vector<Eigen::VectorXd> sample_sun_dual_states(const SemigroupModel& D, std::size_t count,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin;
  const auto n = D.dim();
  if (!D.is_shift()) {
    std::normal_distribution<double> gauss;
    std::vector<Eigen::VectorXd> out;
    for (std::size_t s = 0; s < count; ++s) {
      Eigen::VectorXd x(n);
      for (Eigen::Index i = 0; i < n; ++i) x[i] = gauss(rng);
      out.push_back(x.normalized());
    }
    return out;
  }
  const Eigen::Index width = std::max<Eigen::Index>(2, n / 64);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t s = 0; s < count; ++s) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = coin(rng) ? 1.0 : -1.0;
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - width / 2);
        const Eigen::Index hi = std::min<Eigen::Index>(n, lo + width);
        y[i] = x.segment(lo, hi - lo).mean();
      }
      x = y;
    }
    if (D.kind() == ModelKind::ShiftRightL1)
      x[0] = 0.0;
    else
      x[n - 1] = 0.0;
    const double nx = D.norm(x);
    if (nx > 0.0) out.push_back(x / nx);
  }
  return out;
}

/// Explicit estimates between C-admissibility of B on S and L^1-admissibility
/// of B' on the sun-dual model:
///   int_0^tau |B' T(s) x| ds <= (tau |lambda| ||F(0)|| + C_tau ||B||_{B_C}) ||x||,
///   C_tau = 2 (tau |lambda| + 1) ||1 - lambda R(lambda, A)||,
///   ||Phi_tau u|| <= ||B'||_{C_1} limsup ||T(t)|| ||u||_inf.
inline DualityReport check_c_adm_duality(const ControlOperator& B, const std::vector<double>& taus,
                                         const SemigroupModel& S, const DualityOptions& opt = {}) {
  DualityReport rep;
  rep.kind = "c-admissibility";
  rep.p = kInf;
  rep.q = 1.0;
  rep.primal_model = S.id();
  const SemigroupModel D = S.sun_dual();
  rep.dual_model = D.id();
  const double lambda = B.lambda;
  const auto rn = S.resolvent_norms(lambda);
  rep.constants.lambda = lambda;
  rep.constants.f0_norm = S.norm(B.W);
  rep.constants.limsup_norm = S.limsup_norm_at_zero();
  rep.constants.identity_minus_lambda_resolvent = rn.identity_minus_lambda_resolvent;
  const auto Cp = adjoint_observation(B, S);
  const auto xs = sample_sun_dual_states(D, opt.samples, opt.seed);
  std::mt19937_64 rng(opt.seed + 1);
  std::bernoulli_distribution coin;
  bool c_to_l1 = true;
  bool l1_to_c = true;
  for (double tau0 : sorted_grid(taus)) {
    const double tau = horizon_for(S, tau0);
    rep.tau_grid.push_back(tau);
    const double c_tau = 2.0 * (tau * std::abs(lambda) + 1.0) * rn.identity_minus_lambda_resolvent;
    rep.constants.c_tau.push_back(c_tau);
    const NormBracket bc = input_norm_continuous(B, tau, S, opt.norm);
    const double bound = tau * std::abs(lambda) * rep.constants.f0_norm + c_tau * bc.upper;
    // left side on every sample
    const auto ok = output_kernel(Cp, tau, D.is_shift() ? 0 : opt.norm.max_cells, D);
    const std::vector<double> w(static_cast<std::size_t>(ok.O.rows()), ok.dt);
    double worst = 0.0;
    for (const auto& x : xs) worst = std::max(worst, weighted_lp(ok.O * x, w, 1.0));
    const bool row1 = worst <= (1.0 + opt.relative_tolerance) * bound + opt.tolerance;
    detail::add_row(rep, tau, "c_to_l1", detail::point_bracket(tau, worst), detail::point_bracket(tau, bound), row1);
    c_to_l1 = c_to_l1 && row1;
    // converse on sampled step and continuous inputs
    const NormBracket c1 = output_norm(Cp, 1.0, tau, D, opt.norm);
    const double rhs = c1.upper * rep.constants.limsup_norm;
    const std::size_t m = S.is_shift() ? S.snap_steps(tau) : 16;
    double worst_u = 0.0;
    for (std::size_t s = 0; s < std::max<std::size_t>(1, opt.samples / 4); ++s) {
      std::vector<double> v(m);
      for (auto& x : v) x = coin(rng) ? 1.0 : -1.0;
      const auto u = StepFunction::uniform(tau, v);
      worst_u = std::max(worst_u, S.norm(input_map(B, u, tau, S)));
      if (m > 1) worst_u = std::max(worst_u, S.norm(input_map(B, continuous_interpolant(u, u.min_cell_width() / 8.0), tau, S)));
    }
    const bool row2 = worst_u <= (1.0 + opt.relative_tolerance) * rhs + opt.tolerance;
    detail::add_row(rep, tau, "l1_to_c", detail::point_bracket(tau, worst_u), c1, row2);
    l1_to_c = l1_to_c && row2;
  }
  rep.verdicts["c_to_l1"] = c_to_l1;
  rep.verdicts["l1_to_c"] = l1_to_c;
  if (opt.check_zero_class) {
    const auto zb = zero_class_classify(input_norm_curve(B, kInf, opt.zero_class_grid, S, opt.norm, true), opt.zero_class);
    const auto zc = zero_class_classify(output_norm_curve(Cp, 1.0, opt.zero_class_grid, D, opt.norm), opt.zero_class);
    rep.notes["control_zero_class"] = to_string(zb.verdict);
    rep.notes["observation_zero_class"] = to_string(zc.verdict);
    rep.verdicts["zero_class_agreement"] = zb.verdict == zc.verdict;
  }
  return rep;
}

inline nlohmann::ordered_json duality_to_json(const DualityReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  j["primal_model"] = r.primal_model;
  j["dual_model"] = r.dual_model;
  j["p"] = std::isinf(r.p) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(r.p);
  j["q"] = std::isinf(r.q) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(r.q);
  j["tau_grid"] = r.tau_grid;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["tau"] = row.tau;
    o["inequality"] = row.inequality;
    o["lhs_lower"] = row.lhs.lower;
    o["lhs_upper"] = row.lhs.upper;
    o["rhs_lower"] = row.rhs.lower;
    o["rhs_upper"] = row.rhs.upper;
    o["pass"] = row.pass;
    rows.push_back(o);
  }
  j["rows"] = rows;
  nlohmann::ordered_json c;
  c["lambda"] = r.constants.lambda;
  c["f0_norm"] = r.constants.f0_norm;
  c["c_tau"] = r.constants.c_tau;
  c["limsup_norm"] = r.constants.limsup_norm;
  c["identity_minus_lambda_resolvent"] = r.constants.identity_minus_lambda_resolvent;
  c["discretization_defect"] = r.constants.discretization_defect;
  j["constants"] = c;
  nlohmann::ordered_json v = nlohmann::ordered_json::object();
  for (const auto& [k, b] : r.verdicts) v[k] = b;
  j["verdicts"] = v;
  nlohmann::ordered_json notes = nlohmann::ordered_json::object();
  for (const auto& [k, s] : r.notes) notes[k] = s;
  j["notes"] = notes;
  j["pass"] = r.pass();
  return j;
}

}  // namespace admlab
