#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml++/toml.hpp>

#include "admlab/admissibility.hpp"
#include "admlab/duality.hpp"
#include "admlab/shift_example.hpp"
#include "admlab/variation.hpp"

namespace admlab {

/// Malformed scenario file; what() carries "file:line: message".
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& file, std::size_t line, const std::string& message)
      : InvalidInput(file + ":" + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// "<min>:<max>:geom=<k>"
inline std::vector<double> parse_tau_grid(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  require(b != std::string::npos, "tau grid must read <min>:<max>:geom=<k>, got '" + spec + "'");
  const std::string tail = spec.substr(b + 1);
  require(tail.rfind("geom=", 0) == 0, "tau grid spacing must be geom=<k>, got '" + tail + "'");
  double lo = 0.0, hi = 0.0;
  long k = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(spec.substr(0, a), &used);
    require(used == a, "bad tau grid minimum");
    hi = std::stod(spec.substr(a + 1, b - a - 1), &used);
    require(used == b - a - 1, "bad tau grid maximum");
    k = std::stol(tail.substr(5), &used);
    require(used == tail.size() - 5, "bad tau grid count");
  } catch (const std::logic_error&) {
    throw InvalidInput("tau grid must read <min>:<max>:geom=<k>, got '" + spec + "'");
  }
  require(k >= 1, "tau grid needs at least one point");
  return geometric_grid(lo, hi, static_cast<std::size_t>(k));
}

struct SemigroupSpec {
  std::string kind = "matrix";  // matrix | random-nilpotent | shift-right-l1 | shift-left-sun
  std::vector<std::vector<double>> matrix;
  std::size_t dim = 4;
  std::size_t cells = 256;
};

struct OperatorSpec {
  std::string kind = "control";  // control | observation
  std::vector<double> vector;
  std::string bv_path;  // as written in the file
  std::optional<BVFunction> bv;
  bool random = false;
};

struct Tolerances {
  double norm = 1e-6;
  double relative = 0.05;
  std::size_t max_cells = 2048;
  double zero_class_relative = 1e-2;
  std::size_t zero_class_tail = 6;
};

struct Scenario {
  std::string name;
  std::string mode;
  std::uint64_t seed = 0;
  std::optional<double> p;
  std::string tau_spec;
  std::vector<double> tau_grid;
  double lambda = 1.0;
  std::string expect;
  SemigroupSpec semigroup;
  OperatorSpec op;
  Tolerances tolerances;
  std::string output_dir;  // resolved against the scenario file
  std::string source;
};

namespace detail {

inline const std::set<std::string>& known_modes() {
  static const std::set<std::string> m{"norms",           "prop21",          "zero-class",
                                       "duality-control", "duality-observation", "shift-example"};
  return m;
}

class TomlReader {
 public:
  explicit TomlReader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const toml::node* n, const std::string& msg) const {
    throw ConfigError(file_, n ? n->source().begin.line : 1, msg);
  }

  void only_keys(const toml::table& t, std::initializer_list<const char*> keys, const std::string& where) const {
    for (const auto& [k, v] : t) {
      bool ok = false;
      for (const char* key : keys) ok = ok || k.str() == key;
      if (!ok) fail(&v, "unknown key '" + std::string(k.str()) + "' in " + where);
    }
  }

  const toml::table* section(const toml::table& t, const char* key) const {
    const auto* n = t.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) fail(n, std::string("'") + key + "' must be a table");
    return n->as_table();
  }

  std::string str(const toml::table& t, const char* key, std::string fallback) const {
    const auto* n = t.get(key);
    if (!n) return fallback;
    if (!n->is_string()) fail(n, std::string("'") + key + "' must be a string");
    return n->value<std::string>().value();
  }

  double number(const toml::table& t, const char* key, double fallback) const {
    const auto* n = t.get(key);
    if (!n) return fallback;
    if (!n->is_number()) fail(n, std::string("'") + key + "' must be a number");
    return n->value<double>().value();
  }

  std::int64_t integer(const toml::table& t, const char* key, std::int64_t fallback, std::int64_t min) const {
    const auto* n = t.get(key);
    if (!n) return fallback;
    if (!n->is_integer()) fail(n, std::string("'") + key + "' must be an integer");
    const auto v = n->value<std::int64_t>().value();
    if (v < min) fail(n, std::string("'") + key + "' must be at least " + std::to_string(min));
    return v;
  }

  bool boolean(const toml::table& t, const char* key, bool fallback) const {
    const auto* n = t.get(key);
    if (!n) return fallback;
    if (!n->is_boolean()) fail(n, std::string("'") + key + "' must be true or false");
    return n->value<bool>().value();
  }

  std::vector<double> numbers(const toml::node& n, const char* what) const {
    if (!n.is_array()) fail(&n, std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *n.as_array()) {
      if (!e.is_number()) fail(&e, std::string(what) + " must contain only numbers");
      out.push_back(e.value<double>().value());
    }
    return out;
  }

 private:
  std::string file_;
};

}  // namespace detail

inline Scenario parse_scenario(const std::string& text, const std::string& path) {
  namespace fs = std::filesystem;
  const detail::TomlReader rd(path);
  toml::table root;
  try {
    root = toml::parse(text, path);
  } catch (const toml::parse_error& e) {
    throw ConfigError(path, e.source().begin.line, std::string(e.description()));
  }
  rd.only_keys(root, {"name", "mode", "seed", "p", "tau_grid", "lambda", "expect", "semigroup", "operator",
                      "tolerances", "output"},
               "scenario");

  Scenario s;
  s.source = path;
  s.name = rd.str(root, "name", fs::path(path).stem().string());
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
    rd.fail(root.get("name"), "name must be a non-empty file stem");
  if (!root.get("mode")) throw ConfigError(path, 1, "missing required key 'mode'");
  s.mode = rd.str(root, "mode", "");
  if (!detail::known_modes().count(s.mode)) rd.fail(root.get("mode"), "unknown mode '" + s.mode + "'");
  s.seed = static_cast<std::uint64_t>(rd.integer(root, "seed", 0, 0));
  s.lambda = rd.number(root, "lambda", 1.0);
  if (!(s.lambda > 0.0)) rd.fail(root.get("lambda"), "lambda must be positive");
  s.expect = rd.str(root, "expect", "");
  if (!s.expect.empty() && s.expect != "zero_class" && s.expect != "not_zero_class" && s.expect != "inconclusive")
    rd.fail(root.get("expect"), "expect must be zero_class, not_zero_class or inconclusive");

  if (const auto* n = root.get("p")) {
    if (n->is_string()) {
      const auto v = n->value<std::string>().value();
      if (v != "inf") rd.fail(n, "p must be a number >= 1 or \"inf\"");
      s.p = kInf;
    } else if (n->is_number()) {
      s.p = n->value<double>().value();
      if (!(*s.p >= 1.0)) rd.fail(n, "p must be a number >= 1 or \"inf\"");
    } else {
      rd.fail(n, "p must be a number >= 1 or \"inf\"");
    }
  }

  if (const auto* n = root.get("tau_grid")) {
    if (n->is_string()) {
      s.tau_spec = n->value<std::string>().value();
      try {
        s.tau_grid = parse_tau_grid(s.tau_spec);
      } catch (const InvalidInput& e) {
        rd.fail(n, e.what());
      }
    } else {
      s.tau_grid = rd.numbers(*n, "tau_grid");
      if (s.tau_grid.empty()) rd.fail(n, "tau_grid must not be empty");
      for (double t : s.tau_grid)
        if (!(t > 0.0) || !std::isfinite(t)) rd.fail(n, "tau_grid entries must be positive");
    }
  } else {
    s.tau_grid = s.mode == "shift-example" || s.mode == "zero-class" ? geometric_grid(1e-3, 0.5, 8)
                                                                     : std::vector<double>{0.25, 0.5, 1.0};
  }

  if (const auto* t = rd.section(root, "semigroup")) {
    rd.only_keys(*t, {"kind", "matrix", "dim", "cells"}, "[semigroup]");
    s.semigroup.kind = rd.str(*t, "kind", "matrix");
    const auto& k = s.semigroup.kind;
    if (k != "matrix" && k != "random-nilpotent" && k != "shift-right-l1" && k != "shift-left-sun")
      rd.fail(t->get("kind"), "unknown semigroup kind '" + k + "'");
    s.semigroup.dim = static_cast<std::size_t>(rd.integer(*t, "dim", 4, 1));
    s.semigroup.cells = static_cast<std::size_t>(rd.integer(*t, "cells", 256, 8));
    if (const auto* m = t->get("matrix")) {
      if (!m->is_array() || m->as_array()->empty()) rd.fail(m, "matrix must be a non-empty array of rows");
      for (const auto& row : *m->as_array()) s.semigroup.matrix.push_back(rd.numbers(row, "matrix row"));
      for (const auto& row : s.semigroup.matrix)
        if (row.size() != s.semigroup.matrix.size()) rd.fail(m, "matrix must be square");
    }
    if (k == "matrix" && s.semigroup.matrix.empty()) rd.fail(t->get("kind"), "matrix semigroup needs 'matrix'");
  } else if (s.mode != "shift-example") {
    throw ConfigError(path, 1, "missing [semigroup] section");
  }

  if (const auto* t = rd.section(root, "operator")) {
    rd.only_keys(*t, {"kind", "vector", "bv", "random"}, "[operator]");
    s.op.kind = rd.str(*t, "kind", s.mode == "duality-observation" || s.mode == "shift-example" ? "observation"
                                                                                                 : "control");
    if (s.op.kind != "control" && s.op.kind != "observation")
      rd.fail(t->get("kind"), "operator kind must be control or observation");
    s.op.random = rd.boolean(*t, "random", false);
    if (const auto* v = t->get("vector")) s.op.vector = rd.numbers(*v, "operator vector");
    s.op.bv_path = rd.str(*t, "bv", "");
    const int sources = (s.op.random ? 1 : 0) + (s.op.vector.empty() ? 0 : 1) + (s.op.bv_path.empty() ? 0 : 1);
    if (sources != 1) rd.fail(t, "operator needs exactly one of 'vector', 'bv' or 'random = true'");
    if (!s.op.bv_path.empty()) {
      const auto resolved = fs::path(path).parent_path() / s.op.bv_path;
      try {
        s.op.bv = load_bv(resolved.string());
      } catch (const InvalidInput& e) {
        rd.fail(t->get("bv"), e.what());
      }
    }
  } else {
    throw ConfigError(path, 1, "missing [operator] section");
  }

  if (const auto* t = rd.section(root, "tolerances")) {
    rd.only_keys(*t, {"norm", "relative", "max_cells", "zero_class_relative", "zero_class_tail"}, "[tolerances]");
    s.tolerances.norm = rd.number(*t, "norm", 1e-6);
    s.tolerances.relative = rd.number(*t, "relative", 0.05);
    s.tolerances.max_cells = static_cast<std::size_t>(rd.integer(*t, "max_cells", 2048, 8));
    s.tolerances.zero_class_relative = rd.number(*t, "zero_class_relative", 1e-2);
    s.tolerances.zero_class_tail = static_cast<std::size_t>(rd.integer(*t, "zero_class_tail", 6, 2));
    if (!(s.tolerances.norm > 0.0)) rd.fail(t->get("norm"), "norm tolerance must be positive");
    if (!(s.tolerances.relative >= 0.0)) rd.fail(t->get("relative"), "relative tolerance must be nonnegative");
  }

  if (const auto* t = rd.section(root, "output")) {
    rd.only_keys(*t, {"dir"}, "[output]");
    const auto dir = rd.str(*t, "dir", "");
    if (!dir.empty()) s.output_dir = (fs::path(path).parent_path() / dir).lexically_normal().string();
  }

  // cross-field checks
  const bool bv = s.op.bv.has_value();
  const auto& k = s.semigroup.kind;
  if (s.mode == "shift-example" && !bv) rd.fail(root.get("operator"), "shift-example needs an operator 'bv' file");
  if (bv && s.mode != "shift-example") {
    if (s.op.kind == "control" && k != "shift-left-sun")
      rd.fail(root.get("operator"), "a BV control operator lives on the shift-left-sun model");
    if (s.op.kind == "observation" && k != "shift-right-l1")
      rd.fail(root.get("operator"), "a BV observation operator lives on the shift-right-l1 model");
  }
  if (s.mode == "prop21" && s.op.kind != "control") rd.fail(root.get("operator"), "prop21 needs a control operator");
  if (s.mode == "duality-control" && s.op.kind != "control")
    rd.fail(root.get("operator"), "duality-control needs a control operator");
  if (s.mode == "duality-observation" && s.op.kind != "observation")
    rd.fail(root.get("operator"), "duality-observation needs an observation operator");
  const std::size_t dim = k == "matrix" ? s.semigroup.matrix.size()
                          : k == "random-nilpotent" ? s.semigroup.dim
                                                    : s.semigroup.cells;
  if (!s.op.vector.empty() && s.op.vector.size() != dim)
    rd.fail(root.get("operator"), "operator vector has " + std::to_string(s.op.vector.size()) +
                                      " entries, the state space has dimension " + std::to_string(dim));
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ConfigError(path, 0, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

inline nlohmann::ordered_json scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["mode"] = s.mode;
  j["seed"] = s.seed;
  if (s.p) j["p"] = std::isinf(*s.p) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(*s.p);
  if (!s.tau_spec.empty()) j["tau_spec"] = s.tau_spec;
  j["tau_grid"] = s.tau_grid;
  j["lambda"] = s.lambda;
  if (!s.expect.empty()) j["expect"] = s.expect;
  nlohmann::ordered_json sg;
  sg["kind"] = s.semigroup.kind;
  if (s.semigroup.kind == "matrix") sg["matrix"] = s.semigroup.matrix;
  if (s.semigroup.kind == "random-nilpotent") sg["dim"] = s.semigroup.dim;
  if (s.semigroup.kind.rfind("shift", 0) == 0) sg["cells"] = s.semigroup.cells;
  j["semigroup"] = sg;
  nlohmann::ordered_json op;
  op["kind"] = s.op.kind;
  if (s.op.random) op["random"] = true;
  if (!s.op.vector.empty()) op["vector"] = s.op.vector;
  if (s.op.bv) {
    op["bv_path"] = s.op.bv_path;
    op["bv"] = bv_to_json(*s.op.bv);
  }
  j["operator"] = op;
  nlohmann::ordered_json t;
  t["norm"] = s.tolerances.norm;
  t["relative"] = s.tolerances.relative;
  t["max_cells"] = s.tolerances.max_cells;
  t["zero_class_relative"] = s.tolerances.zero_class_relative;
  t["zero_class_tail"] = s.tolerances.zero_class_tail;
  j["tolerances"] = t;
  return j;
}

// ---------------------------------------------------------------------------
// Running

struct ScenarioResult {
  std::string name;
  int exit_code = 0;  // 0 pass, 1 input error, 2 assertion failure
  std::string message;
  nlohmann::ordered_json report;
  std::string csv;
  std::vector<std::string> files;
};

namespace detail {

inline Eigen::VectorXd gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Built {
  SemigroupModel S;
  std::optional<ControlOperator> B;
  std::optional<ObservationOperator> C;
};

inline Built build(const Scenario& s) {
  std::mt19937_64 rng(s.seed);
  const auto& k = s.semigroup.kind;
  auto S = [&] {
    if (k == "matrix") {
      const auto n = static_cast<Eigen::Index>(s.semigroup.matrix.size());
      Eigen::MatrixXd A(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = s.semigroup.matrix[i][j];
      return SemigroupModel::matrix(A);
    }
    if (k == "random-nilpotent") return SemigroupModel::matrix(random_nilpotent(static_cast<Eigen::Index>(s.semigroup.dim), rng));
    if (k == "shift-right-l1") return SemigroupModel::shift_right_l1(s.semigroup.cells);
    return SemigroupModel::shift_left_sun(s.semigroup.cells);
  }();
  Built b{S, std::nullopt, std::nullopt};
  if (s.op.kind == "control") {
    if (s.op.bv)
      b.B = control_from_bv(*s.op.bv, s.semigroup.cells, s.lambda).op;
    else
      b.B = control_from_state(S, s.lambda, s.op.random ? gaussian_vector(S.dim(), rng) : to_vector(s.op.vector));
  } else {
    if (s.op.bv)
      b.C = ObservationOperator::from_measure(derivative_measure(*s.op.bv));
    else
      b.C = ObservationOperator::from_row(
          (s.op.random ? gaussian_vector(S.dim(), rng) : to_vector(s.op.vector)).transpose());
  }
  return b;
}

inline NormOptions norm_options(const Scenario& s) {
  NormOptions o;
  o.tolerance = s.tolerances.norm;
  o.max_cells = s.tolerances.max_cells;
  o.min_cells = std::min(o.min_cells, o.max_cells);
  o.search.seed = s.seed;
  return o;
}

inline ZeroClassOptions zero_class_options(const Scenario& s) {
  return {s.tolerances.zero_class_relative, s.tolerances.zero_class_tail};
}

inline DualityOptions duality_options(const Scenario& s) {
  DualityOptions o;
  o.norm = norm_options(s);
  o.relative_tolerance = s.tolerances.relative;
  o.seed = s.seed;
  o.zero_class = zero_class_options(s);
  return o;
}

inline std::string duality_csv(const std::vector<DualityReport>& reps) {
  std::ostringstream os;
  os << "kind,p,tau,inequality,lhs_lower,lhs_upper,rhs_lower,rhs_upper,pass\n";
  for (const auto& r : reps)
    for (const auto& row : r.rows)
      os << r.kind << ',' << format_double(r.p) << ',' << format_double(row.tau) << ',' << row.inequality << ','
         << format_double(row.lhs.lower) << ',' << format_double(row.lhs.upper) << ','
         << format_double(row.rhs.lower) << ',' << format_double(row.rhs.upper) << ','
         << (row.pass ? "true" : "false") << '\n';
  return os.str();
}

inline std::vector<NormBracket> curve_for(const Scenario& s, const Built& b, double p) {
  const auto opt = norm_options(s);
  return b.B ? input_norm_curve(*b.B, p, s.tau_grid, b.S, opt) : output_norm_curve(*b.C, p, s.tau_grid, b.S, opt);
}

inline bool bracket_sane(const NormBracket& b) {
  return std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower >= 0.0 &&
         b.lower <= b.upper + 1e-12 * (1.0 + b.upper);
}

}  // namespace detail

/// Runs one scenario in memory; nothing is written.
inline ScenarioResult evaluate_scenario(const Scenario& s) {
  ScenarioResult res;
  res.name = s.name;
  nlohmann::ordered_json j;
  j["scenario"] = scenario_to_json(s);
  bool pass = true;
  std::ostringstream csv;

  if (s.mode == "shift-example") {
    ShiftExampleConfig cfg;
    cfg.n = s.semigroup.kind.rfind("shift", 0) == 0 ? s.semigroup.cells : 1024;
    cfg.tau_grid = s.tau_grid;
    cfg.norm = detail::norm_options(s);
    cfg.zero_class = detail::zero_class_options(s);
    const auto r = run_shift_example(*s.op.bv, cfg);
    j["report"] = shift_example_to_json(r);
    write_shift_example_csv(csv, r);
    pass = r.pass();
  } else {
    const auto b = detail::build(s);
    if (s.mode == "norms") {
      const double p = s.p.value_or(kInf);
      const auto curve = detail::curve_for(s, b, p);
      auto arr = nlohmann::ordered_json::array();
      for (const auto& br : curve) {
        arr.push_back(bracket_to_json(br));
        pass = pass && detail::bracket_sane(br);
      }
      j["curve"] = arr;
      write_curve_csv(csv, curve);
    } else if (s.mode == "zero-class") {
      const auto curve = detail::curve_for(s, b, s.p.value_or(b.B ? kInf : 1.0));
      const auto v = zero_class_classify(curve, detail::zero_class_options(s));
      j["verdict"] = verdict_to_json(v);
      write_curve_csv(csv, curve);
      if (!s.expect.empty()) pass = to_string(v.verdict) == s.expect;
    } else if (s.mode == "prop21") {
      auto arr = nlohmann::ordered_json::array();
      csv << "tau,lambda,lambda_resolvent_norm,continuous_lower,continuous_upper,max_variation,semivariation,pass\n";
      for (double tau : s.tau_grid) {
        ChainOptions opt;
        opt.norm = detail::norm_options(s);
        opt.seed = s.seed;
        const auto r = resolvent_chain_check(*b.B, s.lambda, tau, b.S, opt);
        arr.push_back(chain_to_json(r));
        csv << format_double(r.tau) << ',' << format_double(r.lambda) << ',' << format_double(r.lambda_resolvent_norm)
            << ',' << format_double(r.continuous_norm.lower) << ',' << format_double(r.continuous_norm.upper) << ','
            << format_double(r.max_variation) << ',' << format_double(r.semivariation.value) << ','
            << (r.pass() ? "true" : "false") << '\n';
        pass = pass && r.pass();
      }
      j["chains"] = arr;
    } else {
      const auto opt = detail::duality_options(s);
      std::vector<DualityReport> reps;
      const std::vector<double> ps = s.p ? std::vector<double>{*s.p} : std::vector<double>{1.0, 2.0, kInf};
      for (double p : ps) {
        if (s.mode == "duality-control") {
          reps.push_back(check_control_duality(*b.B, p, s.tau_grid, b.S, opt));
        } else {
          auto o = opt;
          o.check_zero_class = p == 1.0 && b.S.is_shift();
          reps.push_back(check_observation_duality(*b.C, p, s.tau_grid, b.S, s.lambda, o));
        }
      }
      if (s.mode == "duality-control") {
        auto o = opt;
        o.check_zero_class = b.S.is_shift();
        reps.push_back(check_c_adm_duality(*b.B, s.tau_grid, b.S, o));
      }
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : reps) {
        arr.push_back(duality_to_json(r));
        pass = pass && r.pass();
      }
      j["reports"] = arr;
      csv << detail::duality_csv(reps);
    }
  }
  j["pass"] = pass;
  res.report = std::move(j);
  res.csv = csv.str();
  res.exit_code = pass ? 0 : 2;
  res.message = s.name + ": " + (pass ? "pass" : "FAIL");
  return res;
}

inline void write_result(ScenarioResult& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto json_path = (fs::path(dir) / (r.name + ".json")).string();
  const auto csv_path = (fs::path(dir) / (r.name + ".csv")).string();
  std::ofstream(json_path, std::ios::binary) << r.report.dump(2) << '\n';
  std::ofstream(csv_path, std::ios::binary) << r.csv;
  r.files = {json_path, csv_path};
}

/// Loads, runs and writes one scenario. out overrides the file's [output] dir.
inline ScenarioResult run_scenario(const std::string& path, const std::string& out = {}) {
  ScenarioResult res;
  try {
    const auto s = load_scenario(path);
    res = evaluate_scenario(s);
    write_result(res, !out.empty() ? out : !s.output_dir.empty() ? s.output_dir : std::string("admlab-reports"));
  } catch (const InvalidInput& e) {
    res.exit_code = 1;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.message = path + ": " + e.what();
  }
  return res;
}

/// f(0..n-1) on up to `jobs` threads; results land in index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, std::size_t jobs, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(n);
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

/// Worst exit code wins: 1 over 2 over 0.
inline int combine_exit_codes(const std::vector<ScenarioResult>& rs) {
  int code = 0;
  for (const auto& r : rs) {
    if (r.exit_code == 1) return 1;
    code = std::max(code, r.exit_code);
  }
  return code;
}

}  // namespace admlab
