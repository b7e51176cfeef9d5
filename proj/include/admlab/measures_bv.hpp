#pragma once

// Bounded-variation functions on [0,1], their distributional derivative against
// test functions vanishing at 0, finite Borel measures stored as
// atoms + absolutely continuous density + Cantor-type singular part, and the
// reflected Stieltjes convolution s -> int f(x - s) dmu(x).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "admlab/error.hpp"
#include "admlab/grid_fn.hpp"

namespace admlab {

/// Running integral of a cell-valued function, clamped outside its interval.
class CellIntegral {
 public:
  CellIntegral() = default;
  explicit CellIntegral(const GridFunction& f) : a_(f.a), h_(f.width()), values_(f.values) {
    signed_.assign(values_.size() + 1, 0.0);
    absolute_.assign(values_.size() + 1, 0.0);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      signed_[i + 1] = signed_[i] + values_[i] * h_;
      absolute_[i + 1] = absolute_[i] + std::abs(values_[i]) * h_;
    }
  }

  double operator()(double x) const { return eval(x, signed_, false); }
  double absolute(double x) const { return eval(x, absolute_, true); }
  double total() const { return signed_.empty() ? 0.0 : signed_.back(); }
  double total_absolute() const { return absolute_.empty() ? 0.0 : absolute_.back(); }

 private:
  double eval(double x, const std::vector<double>& prefix, bool abs) const {
    if (values_.empty() || x <= a_) return 0.0;
    const double t = (x - a_) / h_;
    if (t >= static_cast<double>(values_.size())) return prefix.back();
    const auto i = static_cast<std::size_t>(t);
    const double v = abs ? std::abs(values_[i]) : values_[i];
    return prefix[i] + v * (x - (a_ + static_cast<double>(i) * h_));
  }

  double a_ = 0.0;
  double h_ = 1.0;
  std::vector<double> values_;
  std::vector<double> signed_;
  std::vector<double> absolute_;
};

/// Finite-depth Cantor template: uniform mass 2^-depth on each of the 2^depth
/// surviving intervals of length 3^-depth. Depth 0 is Lebesgue measure.
struct CantorTemplate {
  int depth = 0;
  double scale = 0.0;

  bool active() const { return scale != 0.0; }

  static double cdf(double x, int depth) {
    double acc = 0.0;
    double weight = 1.0;
    for (int k = 0; k < depth; ++k) {
      if (x <= 0.0) return acc;
      if (x >= 1.0) return acc + weight;
      if (x < 1.0 / 3.0) {
        x *= 3.0;
      } else if (x > 2.0 / 3.0) {
        acc += 0.5 * weight;
        x = 3.0 * x - 2.0;
      } else {
        return acc + 0.5 * weight;
      }
      weight *= 0.5;
    }
    return acc + weight * std::clamp(x, 0.0, 1.0);
  }

  double cdf(double x) const { return cdf(x, depth); }

  /// Left endpoints of the surviving intervals, increasing.
  std::vector<double> interval_starts() const {
    std::vector<double> starts{0.0};
    double len = 1.0;
    for (int k = 0; k < depth; ++k) {
      len /= 3.0;
      std::vector<double> next;
      next.reserve(starts.size() * 2);
      for (double s : starts) next.push_back(s);
      for (double s : starts) next.push_back(s + 2.0 * len);
      std::sort(next.begin(), next.end());
      starts = std::move(next);
    }
    return starts;
  }

  double interval_length() const { return std::pow(3.0, -depth); }
};

enum class BoundaryConvention { Include, Exclude };

/// Normalized BV function on [0,1]: c(0) = 0, right-continuous,
/// c = sum of jumps + int_0^x density + scale * Cantor_depth(x).
struct BVFunction {
  std::string name;
  std::vector<std::pair<double, double>> jumps;  // (location in (0,1], height)
  GridFunction ac_density{0.0, 1.0, {0.0}};
  CantorTemplate singular;
  BoundaryConvention boundary = BoundaryConvention::Include;

  void validate() const {
    ac_density.validate();
    require(ac_density.a == 0.0 && ac_density.b == 1.0, "BV density must live on [0,1]");
    for (double v : ac_density.values) require(std::isfinite(v), "non-finite BV density value");
    for (auto [x, h] : jumps) {
      require(std::isfinite(x) && std::isfinite(h), "non-finite jump");
      require(x > 0.0 && x <= 1.0, "jump locations must lie in (0,1]; c(0) = 0 is required");
      require(h != 0.0, "jump heights must be nonzero");
    }
    require(singular.depth >= 0 && singular.depth <= 20, "Cantor depth must lie in [0,20]");
    require(std::isfinite(singular.scale), "non-finite Cantor scale");
  }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    double v = CellIntegral(ac_density)(std::min(x, 1.0)) + singular.scale * singular.cdf(x);
    for (auto [xj, h] : jumps)
      if (xj <= x) v += h;
    return v;
  }

  /// c(1-), the value that the boundary functional sees.
  double left_limit_at_one() const {
    double v = CellIntegral(ac_density).total() + singular.scale;
    for (auto [xj, h] : jumps)
      if (xj < 1.0) v += h;
    return v;
  }
};

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

/// Piece of a continuous part: uniform density on [lo, hi).
struct DensityPiece {
  double lo = 0.0;
  double hi = 0.0;
  double density = 0.0;
};

/// Finite signed measure on [0,1] kept in decomposed form. `window` restricts
/// every evaluation to the closed interval [window.first, window.second].
struct BorelMeasure {
  std::vector<Atom> atoms;
  GridFunction ac_density{0.0, 1.0, {0.0}};
  CantorTemplate singular;
  std::pair<double, double> window{0.0, 1.0};
  double boundary_weight = 0.0;  // part of the atom at 1 contributed by the boundary functional

  static BorelMeasure dirac(double a, double w = 1.0) {
    BorelMeasure m;
    m.atoms.push_back({a, w});
    return m;
  }

  static BorelMeasure lebesgue(std::size_t n = 1) {
    BorelMeasure m;
    m.ac_density = GridFunction(0.0, 1.0, std::vector<double>(n, 1.0));
    return m;
  }

  static BorelMeasure cantor(int depth, double scale = 1.0) {
    BorelMeasure m;
    m.singular = {depth, scale};
    return m;
  }

  BorelMeasure restricted(double lo, double hi) const {
    BorelMeasure m = *this;
    m.window = {std::max(lo, window.first), std::min(hi, window.second)};
    return m;
  }

  bool in_window(double x) const { return x >= window.first && x <= window.second; }

  double ac_integral(double l, double r, bool absolute) const;
  double singular_mass(double l, double r) const;
  /// Signed mass of the half-open interval [l, r).
  double mass(double l, double r) const;
  /// Signed mass of the closed interval [l, r].
  double mass_closed(double l, double r) const;
  /// Total variation |mu|([l, r]) of the closed interval.
  double variation(double l, double r) const;

  double atomic_norm() const {
    double m = 0.0;
    for (const auto& at : atoms)
      if (in_window(at.location)) m += std::abs(at.weight);
    return m;
  }
  double ac_norm() const { return ac_integral(0.0, 1.0, true); }
  double singular_norm() const { return std::abs(singular_mass(0.0, 1.0)); }

  /// ||mu|| = ||mu_atomic|| + ||mu_ac|| + ||mu_singular||.
  double norm() const { return atomic_norm() + ac_norm() + singular_norm(); }

  /// int phi dmu; continuous parts by composite 3-point Gauss.
  template <class F>
  double integrate(F&& phi) const;

  /// Density pieces of the ac and singular parts, clipped to the window.
  std::vector<DensityPiece> continuous_pieces() const {
    std::vector<DensityPiece> out;
    auto push = [&](double lo, double hi, double d) {
      lo = std::max(lo, window.first);
      hi = std::min(hi, window.second);
      if (hi > lo && d != 0.0) out.push_back({lo, hi, d});
    };
    const double h = ac_density.width();
    for (std::size_t i = 0; i < ac_density.n(); ++i)
      push(ac_density.a + static_cast<double>(i) * h, ac_density.a + static_cast<double>(i + 1) * h,
           ac_density.values[i]);
    if (singular.active()) {
      const double len = singular.interval_length();
      const double d = singular.scale * std::pow(2.0, -singular.depth) / len;
      for (double s : singular.interval_starts()) push(s, s + len, d);
    }
    return out;
  }
};

/// Precomputed cumulative view of a measure for repeated interval queries.
class MeasureCdf {
 public:
  explicit MeasureCdf(const BorelMeasure& mu) : mu_(&mu), ac_(mu.ac_density) {}

  double ac_integral(double l, double r, bool absolute) const {
    l = std::max(l, mu_->window.first);
    r = std::min(r, mu_->window.second);
    if (r <= l) return 0.0;
    return absolute ? ac_.absolute(r) - ac_.absolute(l) : ac_(r) - ac_(l);
  }

  double singular_mass(double l, double r) const {
    const auto& s = mu_->singular;
    if (!s.active()) return 0.0;
    l = std::max(l, mu_->window.first);
    r = std::min(r, mu_->window.second);
    if (r <= l) return 0.0;
    return s.scale * (s.cdf(r) - s.cdf(l));
  }

  double mass(double l, double r) const {
    double m = ac_integral(l, r, false) + singular_mass(l, r);
    for (const auto& at : mu_->atoms)
      if (at.location >= l && at.location < r && mu_->in_window(at.location)) m += at.weight;
    return m;
  }

  double mass_closed(double l, double r) const {
    double m = ac_integral(l, r, false) + singular_mass(l, r);
    for (const auto& at : mu_->atoms)
      if (at.location >= l && at.location <= r && mu_->in_window(at.location)) m += at.weight;
    return m;
  }

  double variation(double l, double r) const {
    double m = ac_integral(l, r, true) + std::abs(singular_mass(l, r));
    for (const auto& at : mu_->atoms)
      if (at.location >= l && at.location <= r && mu_->in_window(at.location)) m += std::abs(at.weight);
    return m;
  }

 private:
  const BorelMeasure* mu_;
  CellIntegral ac_;
};

inline double BorelMeasure::ac_integral(double l, double r, bool absolute) const {
  return MeasureCdf(*this).ac_integral(l, r, absolute);
}
inline double BorelMeasure::singular_mass(double l, double r) const { return MeasureCdf(*this).singular_mass(l, r); }
inline double BorelMeasure::mass(double l, double r) const { return MeasureCdf(*this).mass(l, r); }
inline double BorelMeasure::mass_closed(double l, double r) const { return MeasureCdf(*this).mass_closed(l, r); }
inline double BorelMeasure::variation(double l, double r) const { return MeasureCdf(*this).variation(l, r); }

template <class F>
double BorelMeasure::integrate(F&& phi) const {
  static constexpr double kNode = 0.7745966692414834;  // sqrt(3/5)
  double acc = 0.0;
  for (const auto& at : atoms)
    if (in_window(at.location)) acc += at.weight * phi(at.location);
  for (const auto& p : continuous_pieces()) {
    // sub-intervals of width at most 1/1024 keep oscillatory integrands accurate
    const auto parts = static_cast<int>(std::ceil((p.hi - p.lo) * 1024.0));
    const double len = (p.hi - p.lo) / parts;
    for (int k = 0; k < parts; ++k) {
      const double r = 0.5 * len;
      const double c = p.lo + (k + 0.5) * len;
      acc += p.density * r * (5.0 * phi(c - kNode * r) + 8.0 * phi(c) + 5.0 * phi(c + kNode * r)) / 9.0;
    }
  }
  return acc;
}

/// Distributional derivative against test functions vanishing at 0: the
/// Stieltjes measure dc on (0,1) plus the boundary atom -c(1-) at 1.
inline BorelMeasure derivative_measure(const BVFunction& c, BoundaryConvention convention) {
  c.validate();
  BorelMeasure mu;
  for (auto [x, h] : c.jumps)
    if (x < 1.0) mu.atoms.push_back({x, h});
  std::sort(mu.atoms.begin(), mu.atoms.end(), [](const Atom& l, const Atom& r) { return l.location < r.location; });
  mu.ac_density = c.ac_density;
  mu.singular = c.singular;
  if (convention == BoundaryConvention::Include) {
    const double w = -c.left_limit_at_one();
    if (w != 0.0) {
      mu.atoms.push_back({1.0, w});
      mu.boundary_weight = w;
    }
  }
  return mu;
}

inline BorelMeasure derivative_measure(const BVFunction& c) { return derivative_measure(c, c.boundary); }

/// Exact variation of c over the closed window [a, b] from its decomposition.
inline double total_variation(const BVFunction& c, double a, double b) {
  c.validate();
  require(0.0 <= a && a <= b && b <= 1.0, "variation window must satisfy 0 <= a <= b <= 1");
  const CellIntegral ci(c.ac_density);
  double v = ci.absolute(b) - ci.absolute(a);
  v += std::abs(c.singular.scale) * (c.singular.cdf(b) - c.singular.cdf(a));
  for (auto [x, h] : c.jumps)
    if (x >= a && x <= b) v += std::abs(h);
  return v;
}

/// s -> int_[0,1] f(x - s) dmu(x) on the midpoints of an m-cell grid of [0, tau],
/// f extended by zero outside its interval. Atoms are evaluated exactly; the
/// continuous parts through the antiderivative of f.
inline GridFunction conv_reflect(const GridFunction& f, const BorelMeasure& mu, double tau, std::size_t m = 0) {
  f.validate();
  require(tau > 0.0 && tau <= 1.0 + 1e-12, "convolution horizon must lie in (0,1]");
  if (m == 0) m = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(tau / f.width())));
  const CellIntegral antiderivative(f);
  const auto pieces = mu.continuous_pieces();
  std::vector<double> out(m, 0.0);
  const double ds = tau / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double s = (static_cast<double>(k) + 0.5) * ds;
    double acc = 0.0;
    for (const auto& at : mu.atoms)
      if (mu.in_window(at.location)) acc += at.weight * f(at.location - s);
    for (const auto& p : pieces) acc += p.density * (antiderivative(p.hi - s) - antiderivative(p.lo - s));
    out[k] = acc;
  }
  return GridFunction(0.0, tau, std::move(out));
}

/// Atom detection from a windowed-variation oracle: dyadic windows are refined
/// while their variation stays above tol; survivors at the finest level whose
/// mass is stable against a 16x wider window are reported with their signed mass.
struct AtomOracle {
  std::function<double(double, double)> variation;    // |mu|([l, r])
  std::function<double(double, double)> signed_mass;  // mu([l, r])
};

inline AtomOracle oracle_for(const BorelMeasure& mu) {
  auto owned = std::make_shared<const BorelMeasure>(mu);
  auto cdf = std::make_shared<const MeasureCdf>(*owned);
  return {[owned, cdf](double l, double r) { return cdf->variation(l, r); },
          [owned, cdf](double l, double r) { return cdf->mass_closed(l, r); }};
}

inline std::vector<Atom> detect_atoms(const AtomOracle& oracle, double tol, int finest_level = 30) {
  require(tol > 0.0, "atom tolerance must be positive");
  constexpr int kCoarse = 4;
  std::vector<std::pair<double, double>> live;
  const double w0 = std::ldexp(1.0, -kCoarse);
  for (int i = 0; i < (1 << kCoarse); ++i) {
    const double l = i * w0;
    if (oracle.variation(l, l + w0) >= tol) live.emplace_back(l, l + w0);
  }
  for (int level = kCoarse + 1; level <= finest_level && !live.empty(); ++level) {
    std::vector<std::pair<double, double>> next;
    for (auto [l, r] : live) {
      const double mid = 0.5 * (l + r);
      if (oracle.variation(l, mid) >= tol) next.emplace_back(l, mid);
      if (oracle.variation(mid, r) >= tol) next.emplace_back(mid, r);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    live = std::move(next);
  }
  // Merge windows that touch: an atom on a shared endpoint survives in both.
  std::vector<std::pair<double, double>> merged;
  for (auto w : live) {
    if (!merged.empty() && w.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, w.second);
    } else {
      merged.push_back(w);
    }
  }
  std::vector<Atom> found;
  for (auto [l, r] : merged) {
    const double centre = 0.5 * (l + r);
    const double width = r - l;
    const double local = oracle.variation(l, r);
    const double wide = oracle.variation(centre - 8.0 * width, centre + 8.0 * width);
    if (local < tol || local < 0.95 * wide) continue;
    found.push_back({centre, oracle.signed_mass(l, r)});
  }
  return found;
}

inline std::vector<Atom> detect_atoms(const BorelMeasure& mu, double tol) { return detect_atoms(oracle_for(mu), tol); }

// JSON: {"name", "jumps": [[x,h],...], "ac_density": {"n", "values"},
//        "singular": {"kind": "none"|"cantor", "depth", "scale"}, "boundary": "include"|"exclude"}

inline BVFunction bv_from_json(const nlohmann::json& j) {
  BVFunction c;
  try {
    c.name = j.value("name", std::string{});
    if (j.contains("jumps"))
      for (const auto& jump : j.at("jumps")) c.jumps.emplace_back(jump.at(0).get<double>(), jump.at(1).get<double>());
    if (j.contains("ac_density")) {
      const auto& ac = j.at("ac_density");
      auto values = ac.at("values").get<std::vector<double>>();
      const auto n = ac.value("n", values.size());
      require(n == values.size(), "ac_density.n does not match the number of values");
      c.ac_density = GridFunction(0.0, 1.0, std::move(values));
    }
    if (j.contains("singular")) {
      const auto& s = j.at("singular");
      const auto kind = s.value("kind", std::string("none"));
      require(kind == "none" || kind == "cantor", "singular.kind must be 'none' or 'cantor'");
      if (kind == "cantor") c.singular = {s.value("depth", 12), s.value("scale", 1.0)};
    }
    const auto boundary = j.value("boundary", std::string("include"));
    require(boundary == "include" || boundary == "exclude", "boundary must be 'include' or 'exclude'");
    c.boundary = boundary == "include" ? BoundaryConvention::Include : BoundaryConvention::Exclude;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed BV description: ") + e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json bv_to_json(const BVFunction& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["jumps"] = nlohmann::json::array();
  for (auto [x, h] : c.jumps) j["jumps"].push_back({x, h});
  j["ac_density"] = {{"n", c.ac_density.n()}, {"values", c.ac_density.values}};
  if (c.singular.active())
    j["singular"] = {{"kind", "cantor"}, {"depth", c.singular.depth}, {"scale", c.singular.scale}};
  else
    j["singular"] = {{"kind", "none"}};
  j["boundary"] = c.boundary == BoundaryConvention::Include ? "include" : "exclude";
  return j;
}

inline BVFunction load_bv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open BV file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("BV file '" + path + "': " + e.what());
  }
  auto c = bv_from_json(j);
  if (c.name.empty()) c.name = path;
  return c;
}

inline nlohmann::json measure_to_json(const BorelMeasure& mu) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : mu.atoms) atoms.push_back({a.location, a.weight});
  return {{"atoms", atoms},
          {"atomic_norm", mu.atomic_norm()},
          {"ac_norm", mu.ac_norm()},
          {"singular_norm", mu.singular_norm()},
          {"boundary_atom_weight", mu.boundary_weight}};
}

}  // namespace admlab
