#pragma once

// Uniform-grid functions on an interval, step functions, partitions and the
// quadrature shared by every other module. Cell values follow the midpoint
// convention: values[i] represents the function on [a + i*h, a + (i+1)*h).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "admlab/error.hpp"

namespace admlab {

enum class SpaceTag { L1, Lp, Sup };

struct GridFunction {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> values;
  SpaceTag space = SpaceTag::L1;
  double p = 1.0;  // only meaningful for SpaceTag::Lp

  GridFunction() = default;
  GridFunction(double lo, double hi, std::vector<double> v, SpaceTag tag = SpaceTag::L1, double exponent = 1.0)
      : a(lo), b(hi), values(std::move(v)), space(tag), p(exponent) {
    validate();
  }

  /// Samples f at the cell midpoints of an n-cell grid on [lo, hi].
  template <class F>
  static GridFunction sample(double lo, double hi, std::size_t n, F&& f, SpaceTag tag = SpaceTag::L1) {
    require(n >= 1, "grid function needs at least one cell");
    std::vector<double> v(n);
    const double h = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(lo + (static_cast<double>(i) + 0.5) * h);
    return GridFunction(lo, hi, std::move(v), tag);
  }

  void validate() const {
    require(!values.empty(), "grid function needs at least one cell");
    require(std::isfinite(a) && std::isfinite(b) && b > a, "grid function interval must satisfy a < b");
  }

  std::size_t n() const { return values.size(); }
  double width() const { return (b - a) / static_cast<double>(values.size()); }
  double midpoint(std::size_t i) const { return a + (static_cast<double>(i) + 0.5) * width(); }

  /// Right-continuous cell lookup; zero outside [a, b).
  double operator()(double x) const {
    if (x < a || x >= b) return 0.0;
    auto i = static_cast<std::size_t>(std::floor((x - a) / width()));
    return values[std::min(i, values.size() - 1)];
  }

  Eigen::Map<const Eigen::VectorXd> as_vector() const {
    return {values.data(), static_cast<Eigen::Index>(values.size())};
  }
};

/// Discrete L^p norm: (sum |v_i|^p h)^(1/p), or max |v_i| for p = inf.
inline double lp_norm(std::span<const double> values, double h, double p) {
  require(p >= 1.0, "exponent must lie in [1, inf]");
  double acc = 0.0;
  if (std::isinf(p)) {
    for (double v : values) {
      require(std::isfinite(v), "non-finite sample value");
      acc = std::max(acc, std::abs(v));
    }
    return acc;
  }
  for (double v : values) {
    require(std::isfinite(v), "non-finite sample value");
    acc += (p == 1.0) ? std::abs(v) : std::pow(std::abs(v), p);
  }
  acc *= h;
  if (p == 1.0) return acc;
  return std::pow(acc, 1.0 / p);
}

inline double lp_norm(const GridFunction& f, double p) { return lp_norm(f.values, f.width(), p); }

/// Composite midpoint rule: samples[i] is the curve value at the midpoint of cell i of [a, b].
inline Eigen::VectorXd integrate_curve(std::span<const Eigen::VectorXd> samples, double a, double b) {
  require(!samples.empty(), "integrate_curve needs at least one sample");
  require(b >= a, "integration interval reversed");
  const Eigen::Index dim = samples.front().size();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  for (const auto& s : samples) {
    require(s.size() == dim, "curve samples differ in dimension");
    acc += s;
  }
  return acc * ((b - a) / static_cast<double>(samples.size()));
}

inline double integrate_curve(std::span<const double> samples, double a, double b) {
  require(!samples.empty(), "integrate_curve needs at least one sample");
  double acc = 0.0;
  for (double s : samples) acc += s;
  return acc * ((b - a) / static_cast<double>(samples.size()));
}

/// Piecewise-constant function with breakpoints t_0 < ... < t_n, right-continuous.
struct StepFunction {
  std::vector<double> breakpoints;
  std::vector<double> values;

  StepFunction() = default;
  StepFunction(std::vector<double> t, std::vector<double> v) : breakpoints(std::move(t)), values(std::move(v)) {
    validate();
  }

  /// n equal cells on [0, tau].
  static StepFunction uniform(double tau, std::vector<double> v) {
    require(!v.empty(), "step function needs at least one cell");
    std::vector<double> t(v.size() + 1);
    for (std::size_t i = 0; i <= v.size(); ++i) t[i] = tau * static_cast<double>(i) / static_cast<double>(v.size());
    t.back() = tau;
    return {std::move(t), std::move(v)};
  }

  void validate() const {
    require(!values.empty() && breakpoints.size() == values.size() + 1, "step function shape mismatch");
    require(breakpoints.front() == 0.0, "step function must start at t = 0");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      require(breakpoints[i] > breakpoints[i - 1], "step breakpoints must be strictly increasing");
    for (double v : values) require(std::isfinite(v), "non-finite step value");
  }

  double horizon() const { return breakpoints.back(); }
  std::size_t cells() const { return values.size(); }

  double operator()(double t) const {
    if (t < breakpoints.front() || t > breakpoints.back()) return 0.0;
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    auto i = static_cast<std::size_t>(std::distance(breakpoints.begin(), it));
    return values[std::min(i == 0 ? 0 : i - 1, values.size() - 1)];
  }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  double lp(double p) const {
    if (std::isinf(p)) return sup_norm();
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      acc += std::pow(std::abs(values[i]), p) * (breakpoints[i + 1] - breakpoints[i]);
    return std::pow(acc, 1.0 / p);
  }

  double min_cell_width() const {
    double w = kInf;
    for (std::size_t i = 1; i < breakpoints.size(); ++i) w = std::min(w, breakpoints[i] - breakpoints[i - 1]);
    return w;
  }
};

/// Strictly increasing points 0 = t_0 < ... < t_n = tau.
struct Partition {
  std::vector<double> points;

  explicit Partition(std::vector<double> pts) : points(std::move(pts)) {
    require(points.size() >= 2, "partition needs at least two points");
    for (std::size_t i = 1; i < points.size(); ++i)
      require(points[i] > points[i - 1], "partition points must be strictly increasing");
  }

  static Partition dyadic(double tau, int depth) {
    const std::size_t n = std::size_t{1} << depth;
    std::vector<double> pts(n + 1);
    for (std::size_t i = 0; i <= n; ++i) pts[i] = tau * static_cast<double>(i) / static_cast<double>(n);
    pts.back() = tau;
    return Partition(std::move(pts));
  }

  std::size_t intervals() const { return points.size() - 1; }
};

/// Continuous piecewise-linear function through (knots[i], values[i]).
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> values;

  double operator()(double t) const {
    if (t <= knots.front()) return values.front();
    if (t >= knots.back()) return values.back();
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    auto i = static_cast<std::size_t>(std::distance(knots.begin(), it)) - 1;
    const double w = (t - knots[i]) / (knots[i + 1] - knots[i]);
    return (1.0 - w) * values[i] + w * values[i + 1];
  }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  GridFunction sample(std::size_t n) const {
    return GridFunction::sample(knots.front(), knots.back(), n, *this, SpaceTag::Sup);
  }
};

/// Continuous bridging u_eps of a step function: constant u_i on [t_{i-1}, t_i - eps],
/// linear from u_i to u_{i+1} on [t_i - eps, t_i]. The last cell carries no ramp.
inline PiecewiseLinear continuous_interpolant(const StepFunction& u, double eps) {
  require(eps > 0.0, "interpolation width must be positive");
  require(eps < u.min_cell_width(), "interpolation width must be smaller than every cell");
  PiecewiseLinear out;
  const std::size_t n = u.cells();
  out.knots.push_back(u.breakpoints[0]);
  out.values.push_back(u.values[0]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t = u.breakpoints[i + 1];
    out.knots.push_back(t - eps);
    out.values.push_back(u.values[i]);
    out.knots.push_back(t);
    out.values.push_back(u.values[i + 1]);
  }
  out.knots.push_back(u.breakpoints[n]);
  out.values.push_back(u.values[n - 1]);
  return out;
}

// CSV serialization: GridFunction as `x,value` on midpoints, StepFunction as `t_left,t_right,value`.

inline void write_csv(std::ostream& os, const GridFunction& f) {
  os << "x,value\n";
  for (std::size_t i = 0; i < f.n(); ++i) os << format_double(f.midpoint(i)) << ',' << format_double(f.values[i]) << '\n';
}

inline void write_csv(std::ostream& os, const StepFunction& u) {
  os << "t_left,t_right,value\n";
  for (std::size_t i = 0; i < u.cells(); ++i)
    os << format_double(u.breakpoints[i]) << ',' << format_double(u.breakpoints[i + 1]) << ','
       << format_double(u.values[i]) << '\n';
}

namespace detail {
inline std::vector<std::vector<double>> read_csv_rows(std::istream& is, const std::string& header, std::size_t cols) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == header, "unexpected CSV header '" + line + "', expected '" + header + "'");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidInput("CSV line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    require(row.size() == cols, "CSV line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " columns");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "CSV has no data rows");
  return rows;
}
}  // namespace detail

/// Reads a midpoint CSV; the interval is reconstructed from the uniform spacing.
inline GridFunction read_grid_csv(std::istream& is) {
  auto rows = detail::read_csv_rows(is, "x,value", 2);
  const std::size_t n = rows.size();
  const double h = n > 1 ? (rows[n - 1][0] - rows[0][0]) / static_cast<double>(n - 1) : 2.0 * rows[0][0];
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rows[i][1];
  return GridFunction(rows[0][0] - 0.5 * h, rows[n - 1][0] + 0.5 * h, std::move(v));
}

inline StepFunction read_step_csv(std::istream& is) {
  auto rows = detail::read_csv_rows(is, "t_left,t_right,value", 3);
  std::vector<double> t{rows[0][0]};
  std::vector<double> v;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(i == 0 || rows[i][0] == rows[i - 1][1], "step CSV cells are not contiguous");
    t.push_back(rows[i][1]);
    v.push_back(rows[i][2]);
  }
  return {std::move(t), std::move(v)};
}

}  // namespace admlab
