#pragma once

// Semivariation and variation over dyadic partitions, and the inequality chain
// linking them to the continuous-input norm of a control operator.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "admlab/admissibility.hpp"

namespace admlab {

struct VariationOptions {
  int max_depth = 10;
  double tolerance = 1e-9;  // relative change between the last two depths
  SearchOptions search;
};

struct DepthValue {
  int depth = 0;
  std::size_t intervals = 0;
  double value = 0.0;
};

struct VariationResult {
  double value = 0.0;
  std::vector<DepthValue> trace;
  bool converged = false;
};

struct SemivariationResult {
  double value = 0.0;
  std::vector<DepthValue> trace;
  bool converged = false;
  Eigen::VectorXd signs;  // at the deepest partition
  Eigen::VectorXd sum;    // sum_i signs_i (F(t_i) - F(t_{i-1}))
};

/// Columns F(tau i / 2^depth), i = 0..2^depth.
template <class F>
Eigen::MatrixXd sample_dyadic(F&& f, double tau, int depth) {
  require(tau >= 0.0 && depth >= 0 && depth <= 24, "dyadic sampling needs tau >= 0 and depth in [0, 24]");
  const std::size_t n = std::size_t{1} << depth;
  Eigen::VectorXd first = f(0.0);
  Eigen::MatrixXd out(first.size(), static_cast<Eigen::Index>(n + 1));
  out.col(0) = first;
  for (std::size_t i = 1; i <= n; ++i)
    out.col(static_cast<Eigen::Index>(i)) = f(tau * static_cast<double>(i) / static_cast<double>(n));
  return out;
}

/// Increments of the samples at a coarser depth.
inline Eigen::MatrixXd dyadic_increments(const Eigen::MatrixXd& samples, int depth) {
  const auto total = samples.cols() - 1;
  const Eigen::Index n = Eigen::Index{1} << depth;
  require(total % n == 0, "depth exceeds the sampled resolution");
  const Eigen::Index stride = total / n;
  Eigen::MatrixXd inc(samples.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) inc.col(i) = samples.col((i + 1) * stride) - samples.col(i * stride);
  return inc;
}

/// sup over signs of norm(sum_i s_i inc_i) on one partition.
inline DiscreteBracket semivariation_partition(const Eigen::MatrixXd& increments, const TargetNorm& N,
                                               const SearchOptions& opt = {},
                                               const std::vector<Eigen::VectorXd>& warm = {}) {
  const std::vector<double> w(static_cast<std::size_t>(increments.cols()), 1.0);
  return bracket_kernel(increments, w, kInf, N, opt, warm);
}

using SignCandidates = std::function<std::vector<Eigen::VectorXd>(const Eigen::MatrixXd&)>;

/// Lower bound for SV_0^tau of sampled F (scalar inputs), monotone in depth.
inline SemivariationResult semivariation(const Eigen::MatrixXd& samples, const TargetNorm& N,
                                         const VariationOptions& opt = {}, const SignCandidates& extra = {}) {
  SemivariationResult out;
  const auto total = samples.cols() - 1;
  int max_depth = 0;
  while ((Eigen::Index{1} << (max_depth + 1)) <= total && max_depth < opt.max_depth) ++max_depth;
  Eigen::VectorXd prev;
  for (int depth = 0; depth <= max_depth; ++depth) {
    const Eigen::MatrixXd inc = dyadic_increments(samples, depth);
    std::vector<Eigen::VectorXd> warm;
    if (prev.size() > 0) {
      Eigen::VectorXd dup(inc.cols());
      for (Eigen::Index i = 0; i < dup.size(); ++i) dup[i] = prev[i / 2];
      warm.push_back(dup);
    }
    if (extra)
      for (auto& s : extra(inc)) warm.push_back(std::move(s));
    auto disc = semivariation_partition(inc, N, opt.search, warm);
    // keep the refined previous signs when the search found nothing better
    if (!warm.empty() && N(inc * warm.front()) > disc.lower) {
      disc.witness = warm.front();
      disc.lower = N(inc * warm.front());
    }
    out.value = std::max(disc.lower, out.value);
    out.signs = disc.witness;
    out.sum = inc * disc.witness;
    prev = disc.witness;
    out.trace.push_back({depth, static_cast<std::size_t>(inc.cols()), out.value});
  }
  const auto& tr = out.trace;
  out.converged = tr.size() >= 2 && tr.back().value - tr[tr.size() - 2].value <= opt.tolerance * std::max(1.0, tr.back().value);
  return out;
}

template <class F>
SemivariationResult semivariation(F&& f, double tau, const TargetNorm& N, const VariationOptions& opt = {},
                                  const SignCandidates& extra = {}) {
  return semivariation(sample_dyadic(std::forward<F>(f), tau, opt.max_depth), N, opt, extra);
}

/// Dyadic-refinement variation of sampled values under a norm on the columns.
template <class Norm>
VariationResult variation(const Eigen::MatrixXd& samples, Norm&& norm, const VariationOptions& opt = {}) {
  VariationResult out;
  const auto total = samples.cols() - 1;
  int max_depth = 0;
  while ((Eigen::Index{1} << (max_depth + 1)) <= total && max_depth < opt.max_depth) ++max_depth;
  for (int depth = 0; depth <= max_depth; ++depth) {
    const Eigen::MatrixXd inc = dyadic_increments(samples, depth);
    double v = 0.0;
    for (Eigen::Index i = 0; i < inc.cols(); ++i) v += norm(Eigen::VectorXd(inc.col(i)));
    out.value = std::max(out.value, v);
    out.trace.push_back({depth, static_cast<std::size_t>(inc.cols()), out.value});
  }
  const auto& tr = out.trace;
  out.converged = tr.size() >= 2 && tr.back().value - tr[tr.size() - 2].value <= opt.tolerance * std::max(1.0, tr.back().value);
  return out;
}

/// Variation of a scalar function on [0, tau].
template <class G>
VariationResult variation(G&& g, double tau, const VariationOptions& opt = {}) {
  auto lift = [&](double t) {
    Eigen::VectorXd v(1);
    v[0] = g(t);
    return v;
  };
  return variation(sample_dyadic(lift, tau, opt.max_depth), [](const Eigen::VectorXd& v) { return std::abs(v[0]); },
                   opt);
}

// ---------------------------------------------------------------------------
// Semivariation chain

struct ChainOptions {
  NormOptions norm;
  VariationOptions variation;
  int random_functionals = 16;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
};

struct ChainReport {
  double lambda = 0.0;
  double tau = 0.0;
  double lambda_resolvent_norm = 0.0;             // ||lambda R(lambda, A)||
  double identity_minus_lambda_resolvent = 0.0;   // ||1 - lambda R(lambda, A)||
  NormBracket continuous_norm;                    // ||B||_{B_C}
  SemivariationResult semivariation;
  double max_variation = 0.0;                     // over the sampled unit functionals
  std::vector<DepthValue> variation_trace;        // of the maximizing functional
  std::size_t functionals = 0;
  bool lower_chain_asserted = false;
  bool lower_ok = true;
  bool variation_ok = true;
  bool upper_ok = true;
  double tolerance = 0.0;

  bool pass() const { return lower_ok && variation_ok && upper_ok; }
};

namespace detail {

/// Random unit functionals for the dual of the state space.
inline std::vector<Eigen::VectorXd> sample_functionals(const SemigroupModel& S, int count, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<Eigen::VectorXd> out;
  for (int r = 0; r < count; ++r) {
    Eigen::VectorXd f(S.dim());
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = gauss(rng);
    if (S.kind() == ModelKind::ShiftRightL1)
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = f[i] < 0 ? -1.0 : 1.0;
    const double nf = S.dual_norm(f);
    if (nf > 0.0) out.push_back(f / nf);
  }
  return out;
}

}  // namespace detail

/// Computes ||B||_{B_C}, SV_0^tau(T(.) R(lambda) B), the largest sampled
/// Var_0^tau <F(.), x'> and both resolvent norms, then checks
///   (1 - ||lambda R||) ||B||_{B_C} <= max Var <= 2 SV <= 2 ||1 - lambda R|| ||B||_{B_C},
/// the first link only when 1 - ||lambda R|| > 0.
inline ChainReport resolvent_chain_check(const ControlOperator& B0, double lambda, double tau, const SemigroupModel& S,
                                const ChainOptions& opt = {}) {
  ChainReport rep;
  rep.lambda = lambda;
  rep.tau = horizon_for(S, tau);
  ControlOperator B = B0;
  if (lambda != B0.lambda) {
    B.lambda = lambda;
    B.W = S.resolvent(lambda, B0.materialize(S));
  }
  const auto rn = S.resolvent_norms(lambda);
  rep.lambda_resolvent_norm = rn.lambda_resolvent;
  rep.identity_minus_lambda_resolvent = rn.identity_minus_lambda_resolvent;
  rep.continuous_norm = input_norm_continuous(B, rep.tau, S, opt.norm);
  rep.tolerance = opt.tolerance + rep.continuous_norm.width();
  if (rep.tau == 0.0) return rep;

  const TargetNorm N = state_target(S);
  const Eigen::MatrixXd samples = sample_dyadic([&](double t) { return S.orbit(t, B.W); }, rep.tau, opt.variation.max_depth);

  std::mt19937_64 rng(opt.seed);
  std::vector<Eigen::VectorXd> functionals = detail::sample_functionals(S, opt.random_functionals, rng);
  if (rep.continuous_norm.continuous_witness) {
    const Eigen::VectorXd y = input_map(B, *rep.continuous_norm.continuous_witness, rep.tau, S);
    if (S.norm(y) > 0.0) functionals.push_back(S.norming_functional(y));
  }
  if (rep.continuous_norm.input_witness) {
    const Eigen::VectorXd y = input_map(B, *rep.continuous_norm.input_witness, rep.tau, S);
    if (S.norm(y) > 0.0) functionals.push_back(S.norming_functional(y));
  }

  auto signs_from = [&](const std::vector<Eigen::VectorXd>& fs) {
    return [&S, fs](const Eigen::MatrixXd& inc) {
      std::vector<Eigen::VectorXd> out;
      for (const auto& f : fs) {
        Eigen::VectorXd s(inc.cols());
        for (Eigen::Index i = 0; i < inc.cols(); ++i) s[i] = S.pairing(inc.col(i), f) < 0 ? -1.0 : 1.0;
        out.push_back(s);
      }
      return out;
    };
  };
  rep.semivariation = semivariation(samples, N, opt.variation, signs_from(functionals));
  if (rep.semivariation.sum.size() > 0 && S.norm(rep.semivariation.sum) > 0.0)
    functionals.push_back(S.norming_functional(rep.semivariation.sum));
  rep.functionals = functionals.size();

  for (const auto& f : functionals) {
    Eigen::MatrixXd g(1, samples.cols());
    for (Eigen::Index i = 0; i < samples.cols(); ++i) g(0, i) = S.pairing(samples.col(i), f);
    const auto var = variation(g, [](const Eigen::VectorXd& v) { return std::abs(v[0]); }, opt.variation);
    if (var.value > rep.max_variation || rep.variation_trace.empty()) {
      rep.max_variation = std::max(rep.max_variation, var.value);
      rep.variation_trace = var.trace;
    }
  }

  const double gap = 1.0 - rep.lambda_resolvent_norm;
  rep.lower_chain_asserted = gap > 0.0;
  if (rep.lower_chain_asserted) rep.lower_ok = gap * rep.continuous_norm.lower <= rep.max_variation + rep.tolerance;
  rep.variation_ok = rep.max_variation <= 2.0 * rep.semivariation.value + rep.tolerance;
  rep.upper_ok = 2.0 * rep.semivariation.value <=
                 2.0 * rep.identity_minus_lambda_resolvent * rep.continuous_norm.upper + rep.tolerance;
  return rep;
}

inline nlohmann::ordered_json chain_to_json(const ChainReport& r) {
  nlohmann::ordered_json j;
  j["lambda"] = r.lambda;
  j["tau"] = r.tau;
  j["lambda_resolvent_norm"] = r.lambda_resolvent_norm;
  j["identity_minus_lambda_resolvent_norm"] = r.identity_minus_lambda_resolvent;
  j["continuous_norm"] = bracket_to_json(r.continuous_norm);
  j["semivariation"] = r.semivariation.value;
  j["semivariation_converged"] = r.semivariation.converged;
  auto trace = nlohmann::ordered_json::array();
  for (const auto& t : r.semivariation.trace) trace.push_back({{"depth", t.depth}, {"value", t.value}});
  j["semivariation_trace"] = trace;
  j["max_variation"] = r.max_variation;
  j["functionals"] = r.functionals;
  j["lower_chain_asserted"] = r.lower_chain_asserted;
  j["lower_ok"] = r.lower_ok;
  j["variation_ok"] = r.variation_ok;
  j["upper_ok"] = r.upper_ok;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass();
  return j;
}

}  // namespace admlab
