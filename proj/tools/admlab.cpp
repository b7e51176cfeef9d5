#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "admlab/admlab.hpp"

namespace {

using namespace admlab;

int report(ScenarioResult res, const std::string& out) {
  if (out.empty()) {
    std::cout << res.report.dump(2) << '\n';
  } else {
    write_result(res, out);
    for (const auto& f : res.files) std::cerr << "wrote " << f << '\n';
  }
  std::cerr << res.message << '\n';
  return res.exit_code;
}

double parse_p(const std::string& s) {
  if (s == "inf") return kInf;
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(s, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  require(used == s.size() && p >= 1.0, "--p must be a number >= 1 or 'inf'");
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"admissibility lab: norms of input and output maps for semigroup models"};
  app.require_subcommand(1);

  std::vector<std::string> files;
  std::size_t jobs = 1;
  std::string out;
  auto* run = app.add_subcommand("run", "run scenario files");
  run->add_option("scenarios", files, "scenario TOML files")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs,-j", jobs, "scenarios run in parallel")->check(CLI::PositiveNumber);
  run->add_option("--out,-o", out, "report directory (overrides [output] dir)");

  std::string bv_file, tau_grid = "1e-3:0.5:geom=8";
  std::size_t cells = 1024;
  auto* shift = app.add_subcommand("shift-example", "zero-class verdict against atom detection for one BV file");
  shift->add_option("--bv", bv_file, "BV function JSON")->required()->check(CLI::ExistingFile);
  shift->add_option("--n", cells, "grid cells")->check(CLI::Range(8, 1 << 16));
  shift->add_option("--tau-grid", tau_grid, "<min>:<max>:geom=<k>");
  shift->add_option("--out,-o", out, "report directory; JSON goes to stdout when absent");

  std::string kind = "control", p_text = "inf", dual_grid = "0.25:1:geom=3";
  std::uint64_t seed = 0;
  std::size_t dim = 4;
  auto* dual = app.add_subcommand("duality", "duality inequalities on a seeded random nilpotent model");
  dual->add_option("--kind", kind, "control or observation")->check(CLI::IsMember({"control", "observation"}));
  dual->add_option("--p", p_text, "exponent in [1, inf]");
  dual->add_option("--seed", seed, "random seed");
  dual->add_option("--dim", dim, "state dimension")->check(CLI::Range(1, 64));
  dual->add_option("--tau-grid", dual_grid, "<min>:<max>:geom=<k>");
  dual->add_option("--out,-o", out, "report directory; JSON goes to stdout when absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const auto results = parallel_map<ScenarioResult>(
          files.size(), jobs, [&](std::size_t i) { return run_scenario(files[i], out); });
      for (const auto& r : results) std::cout << r.message << '\n';
      return combine_exit_codes(results);
    }

    Scenario s;
    s.output_dir = out;
    if (*shift) {
      s.mode = "shift-example";
      s.op.kind = "observation";
      s.op.bv_path = bv_file;
      s.op.bv = load_bv(bv_file);
      s.name = "shift-example-" + std::filesystem::path(bv_file).stem().string();
      s.semigroup.kind = "shift-right-l1";
      s.semigroup.cells = cells;
      s.tau_spec = tau_grid;
      s.tau_grid = parse_tau_grid(tau_grid);
    } else {
      s.mode = kind == "control" ? "duality-control" : "duality-observation";
      s.op.kind = kind;
      s.op.random = true;
      s.seed = seed;
      s.p = parse_p(p_text);
      s.name = "duality-" + kind + "-seed" + std::to_string(seed);
      s.semigroup.kind = "random-nilpotent";
      s.semigroup.dim = dim;
      s.tau_spec = dual_grid;
      s.tau_grid = parse_tau_grid(dual_grid);
    }
    return report(evaluate_scenario(s), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
