#pragma once

// Two-sided bounds for the norm of a finite linear map u -> K u, where u is a
// cell-valued function with the weighted L^p norm (sum |u_k|^p w_k)^(1/p) and
// the target carries a Euclidean, grid-L^1 or grid-sup norm. Every input and
// output norm of the admissibility module reduces to this problem.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "admlab/error.hpp"

namespace admlab {

enum class TargetKind { Euclidean, L1Grid, SupGrid };

struct TargetNorm {
  TargetKind kind = TargetKind::Euclidean;
  double h = 1.0;  // cell width of a grid target

  double operator()(const Eigen::VectorXd& y) const {
    switch (kind) {
      case TargetKind::Euclidean: return y.norm();
      case TargetKind::L1Grid: return h * y.lpNorm<1>();
      case TargetKind::SupGrid: return y.size() ? y.lpNorm<Eigen::Infinity>() : 0.0;
    }
    return 0.0;
  }

  /// phi with phi . y = norm(y) and phi . z <= norm(z) for all z.
  Eigen::VectorXd norming(const Eigen::VectorXd& y) const {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(y.size());
    const double ny = (*this)(y);
    if (ny == 0.0) return phi;
    switch (kind) {
      case TargetKind::Euclidean: return y / ny;
      case TargetKind::L1Grid:
        for (Eigen::Index i = 0; i < y.size(); ++i) phi[i] = h * (y[i] > 0 ? 1.0 : (y[i] < 0 ? -1.0 : 0.0));
        return phi;
      case TargetKind::SupGrid: {
        Eigen::Index arg = 0;
        y.cwiseAbs().maxCoeff(&arg);
        phi[arg] = y[arg] > 0 ? 1.0 : -1.0;
        return phi;
      }
    }
    return phi;
  }
};

/// Weighted L^p norm of cell values.
inline double weighted_lp(const Eigen::VectorXd& u, const std::vector<double>& w, double p) {
  if (std::isinf(p)) return u.size() ? u.lpNorm<Eigen::Infinity>() : 0.0;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) acc += std::pow(std::abs(u[k]), p) * w[static_cast<std::size_t>(k)];
  return std::pow(acc, 1.0 / p);
}

/// Dual value sup { g . u : ||u||_{p,w} <= 1 } = ||g / w||_{q,w}.
inline double holder_dual_value(const Eigen::VectorXd& g, const std::vector<double>& w, double p) {
  const double q = conjugate_exponent(p);
  double acc = 0.0;
  if (std::isinf(q)) {
    for (Eigen::Index k = 0; k < g.size(); ++k) acc = std::max(acc, std::abs(g[k]) / w[static_cast<std::size_t>(k)]);
    return acc;
  }
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double wk = w[static_cast<std::size_t>(k)];
    acc += std::pow(std::abs(g[k]) / wk, q) * wk;
  }
  return std::pow(acc, 1.0 / q);
}

/// Unit-norm u attaining the dual value above; ties resolve to the first cell.
inline Eigen::VectorXd holder_maximizer(const Eigen::VectorXd& g, const std::vector<double>& w, double p) {
  const auto m = g.size();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  if (m == 0) return u;
  if (std::isinf(p)) {
    for (Eigen::Index k = 0; k < m; ++k) u[k] = g[k] < 0 ? -1.0 : 1.0;
    return u;
  }
  if (p == 1.0) {
    Eigen::Index best = 0;
    double val = -1.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double v = std::abs(g[k]) / w[static_cast<std::size_t>(k)];
      if (v > val) {
        val = v;
        best = k;
      }
    }
    u[best] = (g[best] < 0 ? -1.0 : 1.0) / w[static_cast<std::size_t>(best)];
    return u;
  }
  const double q = conjugate_exponent(p);
  const double dual = holder_dual_value(g, w, p);
  if (dual == 0.0) {
    // any unit vector; spread evenly
    double total = 0.0;
    for (double wk : w) total += wk;
    u.setConstant(std::pow(total, -1.0 / p));
    return u;
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    const double r = std::abs(g[k]) / w[static_cast<std::size_t>(k)];
    u[k] = (g[k] < 0 ? -1.0 : 1.0) * std::pow(r / dual, q - 1.0);
  }
  return u;
}

struct DiscreteBracket {
  double lower = 0.0;
  double upper = 0.0;
  Eigen::VectorXd witness;  // cell values with ||witness||_{p,w} <= 1 and norm(K witness) = lower
  bool exact = false;
};

struct SearchOptions {
  int restarts = 16;
  int max_iterations = 200;
  int flip_sweeps = 20;
  std::uint64_t seed = 0;
  std::size_t exhaustive_cells = 20;
  double exhaustive_budget = 67108864.0;  // 2^26 target-vector updates
};

namespace detail {

inline double col_norm(const Eigen::MatrixXd& K, Eigen::Index k, const TargetNorm& N) {
  return N(K.col(k));
}

/// Largest singular value of a matrix together with its right singular vector.
inline std::pair<double, Eigen::VectorXd> top_singular(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return {0.0, Eigen::VectorXd::Zero(M.cols())};
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinV);
  return {svd.singularValues()[0], svd.matrixV().col(0)};
}

/// sup over signs s of norm(K s), exhaustive in Gray-code order.
inline std::pair<double, Eigen::VectorXd> exhaustive_signs(const Eigen::MatrixXd& K, const TargetNorm& N) {
  const auto m = K.cols();
  Eigen::VectorXd s = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd y = K * s;
  double best = N(y);
  Eigen::VectorXd arg = s;
  const std::uint64_t total = std::uint64_t{1} << m;
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto k = static_cast<Eigen::Index>(__builtin_ctzll(i));
    y -= 2.0 * s[k] * K.col(k);
    s[k] = -s[k];
    const double v = N(y);
    if (v > best) {
      best = v;
      arg = s;
    }
  }
  return {best, arg};
}

/// First-improvement single-cell sign flips, cells scanned in index order.
inline double improve_by_flips(const Eigen::MatrixXd& K, const TargetNorm& N, Eigen::VectorXd& s, int sweeps) {
  Eigen::VectorXd y = K * s;
  double val = N(y);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    bool improved = false;
    for (Eigen::Index k = 0; k < K.cols(); ++k) {
      Eigen::VectorXd trial = y - 2.0 * s[k] * K.col(k);
      const double v = N(trial);
      if (v > val * (1.0 + 1e-13) + 1e-300) {
        y = std::move(trial);
        s[k] = -s[k];
        val = v;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return val;
}

}  // namespace detail

/// Bracket for sup { norm(K u) : ||u||_{p,w} <= 1 }. `warm` seeds the ascent.
inline DiscreteBracket bracket_kernel(const Eigen::MatrixXd& K, const std::vector<double>& w, double p,
                                      const TargetNorm& N, const SearchOptions& opt = {},
                                      const std::vector<Eigen::VectorXd>& warm = {}) {
  require(p >= 1.0, "exponent must lie in [1, inf]");
  require(static_cast<std::size_t>(K.cols()) == w.size(), "kernel and weights disagree");
  const auto m = K.cols();
  const auto d = K.rows();
  DiscreteBracket out;
  out.witness = Eigen::VectorXd::Zero(m);
  if (m == 0 || d == 0 || K.isZero(0.0)) {
    out.exact = true;
    return out;
  }
  const double q = conjugate_exponent(p);
  std::vector<double> c(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) c[static_cast<std::size_t>(k)] = detail::col_norm(K, k, N);

  auto finish = [&](Eigen::VectorXd u) {
    out.witness = std::move(u);
    out.lower = N(K * out.witness);
    out.upper = std::max(out.upper, out.lower);
    return out;
  };

  // p = 1: extreme points are scaled single-cell impulses.
  if (p == 1.0) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] / w[k] > c[best] / w[best]) best = k;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    u[static_cast<Eigen::Index>(best)] = 1.0 / w[best];
    out.upper = c[best] / w[best];
    out.exact = true;
    return finish(std::move(u));
  }

  // Sup target: the norm is a maximum of linear functionals, each solved by Holder.
  if (N.kind == TargetKind::SupGrid) {
    Eigen::Index best = 0;
    double val = -1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double v = holder_dual_value(K.row(i).transpose(), w, p);
      if (v > val) {
        val = v;
        best = i;
      }
    }
    out.upper = val;
    out.exact = true;
    return finish(holder_maximizer(K.row(best).transpose(), w, p));
  }

  // Weighted spectral norm: exact for the Euclidean target at p = 2, and an
  // upper bound for p >= 2 after comparing L^p and L^2 on a finite measure.
  double total_w = 0.0;
  for (double wk : w) total_w += wk;
  Eigen::MatrixXd KD = K;
  for (Eigen::Index k = 0; k < m; ++k) KD.col(k) /= std::sqrt(w[static_cast<std::size_t>(k)]);
  double spectral_upper = kInf;
  Eigen::VectorXd spectral_witness;
  if (N.kind == TargetKind::Euclidean || (N.kind == TargetKind::L1Grid && p >= 2.0)) {
    const auto [sigma, v] = detail::top_singular(KD);
    Eigen::VectorXd u = v;
    for (Eigen::Index k = 0; k < m; ++k) u[k] /= std::sqrt(w[static_cast<std::size_t>(k)]);
    spectral_witness = u / std::max(weighted_lp(u, w, p), 1e-300);
    if (p >= 2.0) {
      const double lift = std::isinf(p) ? std::sqrt(total_w) : std::pow(total_w, 0.5 - 1.0 / p);
      // h sum |y| <= h sqrt(d) |y|_2
      const double to_target = N.kind == TargetKind::L1Grid ? N.h * std::sqrt(static_cast<double>(d)) : 1.0;
      spectral_upper = sigma * lift * to_target;
    }
    if (N.kind == TargetKind::Euclidean && p == 2.0) {
      out.upper = sigma;
      out.exact = true;
      return finish(u);
    }
  }

  // Triangle/Holder majorant from column norms.
  double holder_upper = 0.0;
  if (std::isinf(p)) {
    for (double ck : c) holder_upper += ck;
  } else {
    for (std::size_t k = 0; k < c.size(); ++k) holder_upper += std::pow(c[k] / w[k], q) * w[k];
    holder_upper = std::pow(holder_upper, 1.0 / q);
  }
  out.upper = std::min(holder_upper, spectral_upper);

  // Lower bound: exhaustive signs when cheap, else alternating ascent with restarts.
  if (std::isinf(p) && static_cast<std::size_t>(m) <= opt.exhaustive_cells &&
      std::ldexp(static_cast<double>(d), static_cast<int>(m)) <= opt.exhaustive_budget) {
    auto [val, s] = detail::exhaustive_signs(K, N);
    (void)val;
    if (d == 1 || m == 1) out.exact = true;
    return finish(std::move(s));
  }

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::vector<Eigen::VectorXd> starts;  // starting inputs
  for (const auto& u : warm)
    if (u.size() == m) starts.push_back(u);
  if (spectral_witness.size() == m) starts.push_back(spectral_witness);
  {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] / w[k] > c[best] / w[best]) best = k;
    starts.push_back(holder_maximizer(K.transpose() * N.norming(K.col(static_cast<Eigen::Index>(best))), w, p));
  }
  starts.push_back(holder_maximizer(Eigen::VectorXd::Ones(m), w, p));
  for (int r = 0; r < opt.restarts; ++r) {
    Eigen::VectorXd phi(d);
    for (Eigen::Index i = 0; i < d; ++i) phi[i] = gauss(rng);
    starts.push_back(holder_maximizer(K.transpose() * phi, w, p));
  }

  double best_val = -1.0;
  Eigen::VectorXd best_u;
  for (auto u : starts) {
    double val = N(K * u) / std::max(weighted_lp(u, w, p), 1e-300);
    u /= std::max(weighted_lp(u, w, p), 1e-300);
    for (int it = 0; it < opt.max_iterations; ++it) {
      const Eigen::VectorXd phi = N.norming(K * u);
      Eigen::VectorXd next = holder_maximizer(K.transpose() * phi, w, p);
      const double nv = N(K * next);
      if (nv <= val * (1.0 + 1e-14)) break;
      u = std::move(next);
      val = nv;
    }
    if (val > best_val) {
      best_val = val;
      best_u = u;
    }
  }
  if (std::isinf(p)) detail::improve_by_flips(K, N, best_u, opt.flip_sweeps);
  return finish(std::move(best_u));
}

}  // namespace admlab
