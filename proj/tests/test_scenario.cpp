#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "admlab/scenario.hpp"

using namespace admlab;
namespace fs = std::filesystem;

namespace {

const fs::path kData = ADMLAB_DATA_DIR;

std::vector<fs::path> files_in(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("admlab-test-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(TauGrid, GeometricGrid) {
  const auto g = parse_tau_grid("1e-3:0.5:geom=8");
  ASSERT_EQ(g.size(), 8u);
  EXPECT_EQ(g.front(), 1e-3);
  EXPECT_EQ(g.back(), 0.5);
  const double ratio = std::pow(500.0, 1.0 / 7.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], ratio, 1e-12);
  EXPECT_EQ(parse_tau_grid("0.5:0.5:geom=1"), std::vector<double>{0.5});
}

TEST(TauGrid, RejectsMalformedSpecs) {
  for (const char* bad : {"", "0.1", "0.1:0.5", "0.1:0.5:lin=4", "0.1:0.5:geom=", "x:0.5:geom=3", "0.5:0.1:geom=3",
                          "0:0.5:geom=3", "0.1:0.5:geom=0", "0.1:0.5:geom=3x"})
    EXPECT_THROW(parse_tau_grid(bad), InvalidInput) << bad;
}

TEST(ShiftExample, WholeCorpusAgrees) {
  const auto files = files_in(kData / "corpus", ".json");
  ASSERT_GE(files.size(), 15u);
  for (const auto& f : files) {
    const auto r = run_shift_example(load_bv(f.string()));
    EXPECT_TRUE(r.agreement) << f << "\n" << shift_example_to_json(r).dump(2);
    EXPECT_TRUE(r.pass()) << f;
    // the measure route reports every interior jump of the file
    for (auto [x, h] : r.c.jumps) {
      if (x >= 1.0) continue;
      bool found = false;
      for (const auto& a : r.atoms) found = found || (std::abs(a.location - x) < 1e-6 && std::abs(a.weight - h) < 1e-6);
      EXPECT_TRUE(found) << f << " jump at " << x;
    }
  }
}

TEST(ShiftExample, RampIsZeroClassWithoutAtoms) {
  const auto r = run_shift_example(load_bv((kData / "corpus/ramp.json").string()));
  EXPECT_EQ(r.verdict.verdict, ZeroClass::ZeroClass);
  EXPECT_TRUE(r.atoms.empty());
  EXPECT_TRUE(r.member);
  // ||Psi_tau|| = tau for the Lebesgue observation
  for (const auto& b : r.curve) EXPECT_NEAR(b.upper, b.tau, 1e-12);
}

TEST(ShiftExample, InteriorUnitJump) {
  const auto r = run_shift_example(load_bv((kData / "corpus/unit_step_half.json").string()));
  EXPECT_EQ(r.verdict.verdict, ZeroClass::NotZeroClass);
  ASSERT_EQ(r.atoms.size(), 1u);
  EXPECT_NEAR(r.atoms[0].location, 0.5, 1e-9);
  EXPECT_NEAR(r.atoms[0].weight, 1.0, 1e-12);
  EXPECT_GE(r.atom_windows[0].lower, 0.9);
  EXPECT_FALSE(r.member);
  EXPECT_FALSE(r.weak_member);
}

TEST(ShiftExample, CantorIsZeroClassDespiteSingularPart) {
  const auto r = run_shift_example(load_bv((kData / "corpus/cantor_depth12.json").string()));
  EXPECT_GT(r.derivative.singular_norm(), 0.99);
  EXPECT_EQ(r.derivative.ac_norm(), 0.0);
  EXPECT_EQ(r.verdict.verdict, ZeroClass::ZeroClass);
  EXPECT_TRUE(r.atoms.empty());
}

TEST(ShiftExample, BoundaryAtomIsSeenByTheRightShift) {
  const auto r = run_shift_example(load_bv((kData / "corpus/ramp_with_boundary_atom.json").string()));
  EXPECT_EQ(r.verdict.verdict, ZeroClass::NotZeroClass);
  ASSERT_EQ(r.atoms.size(), 1u);
  EXPECT_NEAR(r.atoms[0].weight, -1.0, 1e-6);  // finest window also holds ac mass
  EXPECT_TRUE(r.weak_member);
  EXPECT_FALSE(r.member);
  EXPECT_TRUE(r.boundary_flag);
}

TEST(RunScenario, ResolventChainOnIdentityReportsZeroSemivariation) {
  const auto out = scratch("prop21");
  const auto r = run_scenario((kData / "scenarios/prop21_identity.toml").string(), out.string());
  EXPECT_EQ(r.exit_code, 0) << r.message;
  for (const auto& c : r.report["chains"]) EXPECT_EQ(c["semivariation"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(out / "prop21_identity.json"));
  EXPECT_TRUE(fs::exists(out / "prop21_identity.csv"));
}

TEST(RunScenario, DualityControlSeed42Passes) {
  const auto r = run_scenario((kData / "scenarios/duality_control_seed42.toml").string(), scratch("dual42").string());
  EXPECT_EQ(r.exit_code, 0) << r.message;
  EXPECT_TRUE(r.report["pass"].get<bool>());
}

TEST(RunScenario, EveryBundledScenarioPasses) {
  const auto out = scratch("bundled");
  for (const auto& f : files_in(kData / "scenarios", ".toml")) {
    const auto r = run_scenario(f.string(), out.string());
    EXPECT_EQ(r.exit_code, 0) << f << ": " << r.message;
  }
}

TEST(RunScenario, MalformedConfigExitsWithLineNumber) {
  const auto out = scratch("malformed");
  auto r = run_scenario((kData / "scenarios/malformed/bad_p.toml").string(), out.string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.message.find("bad_p.toml:4:"), std::string::npos) << r.message;
  r = run_scenario((kData / "scenarios/malformed/syntax.toml").string(), out.string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.message.find("syntax.toml:4:"), std::string::npos) << r.message;
  EXPECT_TRUE(fs::is_empty(out));
}

TEST(RunScenario, SemanticErrorsPointAtTheOffendingKey) {
  const auto dir = scratch("semantic");
  const auto f = write_file(dir / "s.toml",
                            "mode = \"norms\"\n"
                            "\n"
                            "[semigroup]\n"
                            "kind = \"matrix\"\n"
                            "matrix = [[0.0, 1.0], [0.0, 0.0]]\n"
                            "\n"
                            "[operator]\n"
                            "vector = [1.0]\n"
                            "colour = \"red\"\n");
  const auto r = run_scenario(f.string(), dir.string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.message.find("s.toml:9:"), std::string::npos) << r.message;
  EXPECT_THROW(load_scenario((dir / "missing.toml").string()), ConfigError);
}

TEST(RunScenario, FailedExpectationExitsWithTwo) {
  const auto dir = scratch("expect");
  fs::copy_file(kData / "corpus/unit_step_half.json", dir / "step.json");
  const auto f = write_file(dir / "s.toml",
                            "mode = \"zero-class\"\n"
                            "expect = \"zero_class\"\n"
                            "tau_grid = \"1e-3:0.5:geom=8\"\n"
                            "[semigroup]\nkind = \"shift-right-l1\"\ncells = 1024\n"
                            "[operator]\nkind = \"observation\"\nbv = \"step.json\"\n");
  const auto r = run_scenario(f.string(), dir.string());
  EXPECT_EQ(r.exit_code, 2) << r.message;
  EXPECT_EQ(r.report["verdict"]["verdict"], "not_zero_class");
  EXPECT_TRUE(fs::exists(dir / "s.json"));
}

TEST(RunScenario, ReportEmbedsTheResolvedScenario) {
  const auto s = load_scenario((kData / "scenarios/ramp_observation_zero_class.toml").string());
  const auto r = evaluate_scenario(s);
  const auto& j = r.report["scenario"];
  EXPECT_EQ(j["mode"], "zero-class");
  EXPECT_EQ(j["tau_grid"].size(), 8u);
  EXPECT_EQ(j["operator"]["bv"]["name"], "ramp");
  EXPECT_EQ(j["semigroup"]["cells"], 1024);
}

TEST(Determinism, RerunsAreByteIdentical) {
  const auto a = scratch("det-a"), b = scratch("det-b");
  const auto files = files_in(kData / "scenarios", ".toml");
  const auto run_all = [&](const fs::path& out, std::size_t jobs) {
    return parallel_map<ScenarioResult>(files.size(), jobs,
                                        [&](std::size_t i) { return run_scenario(files[i].string(), out.string()); });
  };
  run_all(a, 1);
  run_all(b, 4);
  const auto written = files_in(a, ".json");
  ASSERT_EQ(written.size(), files.size());
  for (const auto& f : written) {
    EXPECT_EQ(slurp(f), slurp(b / f.filename())) << f;
    const auto csv = fs::path(f).replace_extension(".csv");
    EXPECT_EQ(slurp(csv), slurp(b / csv.filename())) << csv;
  }
}

TEST(ParallelMap, KeepsIndexOrder) {
  const auto v = parallel_map<std::size_t>(100, 8, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
  EXPECT_TRUE(parallel_map<int>(0, 4, [](std::size_t) { return 1; }).empty());
}
