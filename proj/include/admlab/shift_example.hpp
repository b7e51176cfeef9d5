#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "admlab/admissibility.hpp"
#include "admlab/measures_bv.hpp"
#include "admlab/semigroups.hpp"

namespace admlab {

/// Right translation on L1 observed by dc, traced along two independent routes.
struct ShiftExampleConfig {
  std::size_t n = 1024;
  std::vector<double> tau_grid = geometric_grid(1e-3, 0.5, 8);
  double atom_tolerance = 1e-4;
  NormOptions norm;
  ZeroClassOptions zero_class;
};

struct ShiftExampleReport {
  BVFunction c;
  BorelMeasure derivative;
  NormBracket l1_bracket;  // tau = 1
  std::vector<NormBracket> curve;
  ZeroClassVerdict verdict;
  std::vector<Atom> atoms;
  std::vector<NormBracket> atom_windows;  // one per detected atom
  bool agreement = false;
  bool member = false;
  bool weak_member = false;
  bool boundary_flag = false;
  double conv_reflect_difference = 0.0;  // relative to the largest output value

  bool pass() const { return agreement && conv_reflect_difference <= 1e-9; }
};

inline ShiftExampleReport run_shift_example(const BVFunction& c, const ShiftExampleConfig& cfg = {}) {
  c.validate();
  require(cfg.n >= 8, "shift example needs at least 8 cells");
  ShiftExampleReport r;
  r.c = c;
  r.derivative = derivative_measure(c);
  const auto S = SemigroupModel::shift_right_l1(cfg.n);
  const auto C = ObservationOperator::from_measure(r.derivative);

  // norm route
  r.l1_bracket = output_norm(C, 1.0, 1.0, S, cfg.norm);
  r.curve = output_norm_curve(C, 1.0, cfg.tau_grid, S, cfg.norm);
  r.verdict = zero_class_classify(r.curve, cfg.zero_class);

  // measure route
  r.atoms = detect_atoms(r.derivative, cfg.atom_tolerance);
  const double tau_min = r.curve.front().tau;
  for (const auto& a : r.atoms) {
    // centred, since detected locations carry the bisection error
    const double xi = std::clamp(a.location - 0.5 * tau_min, 0.0, 1.0 - tau_min);
    r.atom_windows.push_back(windowed_output_norm(C, xi, tau_min, S, cfg.norm));
  }

  const bool zero = r.verdict.verdict == ZeroClass::ZeroClass;
  const bool nonzero = r.verdict.verdict == ZeroClass::NotZeroClass;
  r.agreement = (zero && r.atoms.empty()) || (nonzero && !r.atoms.empty());

  const auto bv = control_from_bv(c, cfg.n);
  r.member = bv.member;
  r.weak_member = bv.weak_member;
  r.boundary_flag = bv.boundary_flag;

  // kernel route against the direct convolution, on the witness of the widest window
  const auto& widest = r.curve.back();
  if (widest.state_witness.size() == S.dim()) {
    // one output cell per state cell keeps the sampling points off the cell edges
    const auto m = static_cast<std::size_t>(std::lround(widest.tau / S.cell_width()));
    const auto direct = conv_reflect(S.as_grid(widest.state_witness), r.derivative, widest.tau, m);
    const auto kernel = output_map(C, widest.state_witness, widest.tau, S, m);
    double diff = 0.0, scale = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      diff = std::max(diff, std::abs(direct.values[k] - kernel.values[k]));
      scale = std::max(scale, std::abs(direct.values[k]));
    }
    r.conv_reflect_difference = diff / scale;
  }
  return r;
}

inline nlohmann::ordered_json shift_example_to_json(const ShiftExampleReport& r) {
  nlohmann::ordered_json j;
  j["c"] = bv_to_json(r.c);
  const auto m = measure_to_json(r.derivative);
  nlohmann::ordered_json d;
  for (const char* k : {"atoms", "atomic_norm", "ac_norm", "singular_norm", "boundary_atom_weight"}) d[k] = m.at(k);
  j["decomposition"] = d;
  j["l1_bracket"] = bracket_to_json(r.l1_bracket);
  j["zero_class"] = verdict_to_json(r.verdict);
  auto atoms = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.atoms.size(); ++i) {
    nlohmann::ordered_json a;
    a["location"] = r.atoms[i].location;
    a["weight"] = r.atoms[i].weight;
    a["windowed_norm_lower"] = r.atom_windows[i].lower;
    a["windowed_norm_upper"] = r.atom_windows[i].upper;
    atoms.push_back(a);
  }
  j["atoms"] = atoms;
  j["agreement"] = r.agreement;
  nlohmann::ordered_json mem;
  mem["member"] = r.member;
  mem["weak_member"] = r.weak_member;
  mem["boundary_flag"] = r.boundary_flag;
  j["membership"] = mem;
  j["conv_reflect_difference"] = r.conv_reflect_difference;
  j["pass"] = r.pass();
  return j;
}

inline void write_shift_example_csv(std::ostream& os, const ShiftExampleReport& r) { write_curve_csv(os, r.curve); }

}  // namespace admlab
