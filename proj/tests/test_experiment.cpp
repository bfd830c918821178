#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "hitlaw/experiment.hpp"

using namespace hitlaw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "hitlaw_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ErrorCode config_code(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HITLAW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall =
    "name = small\n"
    "system = full3\n"
    "measure = uniform\n"
    "family = prefix\n"
    "family.head = 0\n"
    "family.tail = 1, 2\n"
    "n.min = 2\n"
    "n.max = 5\n"
    "checks = proposition1, lemmas\n"
    "mc.trials = 2000\n"
    "mc.seed = 9\n";

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  const auto c = parse_config(std::string(kSmall) + "# trailing comment\nworkers = 3  # inline\n");
  EXPECT_EQ(c.name, "small");
  EXPECT_EQ(c.family_tail, (std::vector<int>{1, 2}));
  EXPECT_EQ(c.n_max, 5);
  EXPECT_EQ(c.mc_trials, 2000u);
  EXPECT_EQ(c.workers, 3u);
  EXPECT_EQ(c.checks, (std::vector<std::string>{"proposition1", "lemmas"}));
}

TEST(Config, StrictErrors) {
  EXPECT_EQ(config_code("nmax = 3\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("n.max = 3\nn.max = 4\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("n.max = \n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("n.max = 3x\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("n.min = 5\nn.max = 3\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("checks = proposition7\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("fault = scramble\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("measure = bernoulli\n"), ErrorCode::ConfigError);
  EXPECT_EQ(config_code("just some words\n"), ErrorCode::ConfigError);
}

TEST(Config, CanonicalFormRoundTrips) {
  const auto c = parse_config(kSmall);
  const std::string text = format_config(c);
  EXPECT_EQ(format_config(parse_config(text)), text);
  auto d = c;
  d.workers = 8;
  d.mc_workers = 8;
  EXPECT_EQ(format_config(d), text);
}

TEST(Presets, RegistryParses) {
  std::set<std::string> names;
  for (const auto& p : presets()) {
    names.insert(p.name);
    EXPECT_FALSE(p.doc.empty());
    EXPECT_NO_THROW(preset_config(p.name)) << p.name;
  }
  for (const char* n : {"example1", "example2", "submatrix", "golden-parry-cyl", "example4", "example5",
                        "counterexample-periodic", "fault-injection"})
    EXPECT_TRUE(names.count(n)) << n;
  EXPECT_THROW(find_preset("nope"), Error);
}

TEST(Resolve, PotentialsAndPoints) {
  const auto a = TransitionMatrix::golden_mean();
  const auto p1 = random_potential(a, 4, 0.5);
  const auto p2 = random_potential(a, 4, 0.5);
  EXPECT_EQ(p1.values(), p2.values());
  EXPECT_EQ(p1(1, 1), 0.0);
  EXPECT_LE(p1.sup_norm(), 0.5);
  EXPECT_EQ(parse_point("periodic:01", 2).slice(0, 4), (Word{0, 1, 0, 1}));
  EXPECT_EQ(parse_point("asymptotic:1/0", 2).slice(-1, 2), (Word{1, 0}));
  EXPECT_EQ(parse_point("explicit:0110@1", 2).slice(-1, 4), (Word{0, 1, 1, 0}));
  EXPECT_THROW(parse_point("spiral", 2), Error);
}

TEST(Faults, KernelPerturbation) {
  const auto m = parry(TransitionMatrix::golden_mean());
  const Matrix k = perturb_kernel(m, 1e-3);
  EXPECT_NEAR(k(0, 0), m.kernel()(0, 0) + 1e-3, 1e-15);
  EXPECT_NEAR(k(0, 1), m.kernel()(0, 1) - 1e-3, 1e-15);
  EXPECT_EQ(k(1, 0), 1.0);
  const std::vector<double> xs{1.0, 2.0, 3.0};
  EXPECT_EQ(dropping_sum(xs), 3.0);
}

TEST(Run, ArtifactsAndDeterminism) {
  const fs::path root = scratch("run");
  auto cfg = parse_config(kSmall);
  const auto a = run_experiment(cfg, root / "a");
  cfg.workers = 3;
  cfg.mc_workers = 3;
  const auto b = run_experiment(cfg, root / "b");
  EXPECT_EQ(a.exit_code, kExitOk);
  for (const char* f : {"summary.json", "metadata.json", "config.txt", "ks.csv", "survival_n2.csv", "empirical_n5.csv",
                        "lemmas.json", "hypotheses.json", "hypotheses.txt"})
    EXPECT_TRUE(fs::exists(root / "a" / f)) << f;
  EXPECT_EQ(read_text_file(root / "a" / "summary.json"), read_text_file(root / "b" / "summary.json"));
  const json& s = a.summary;
  EXPECT_EQ(s["rows"].size(), 4u);
  EXPECT_TRUE(s["lemmas"]["pass"].get<bool>());
  for (const auto& row : s["rows"]) {
    EXPECT_EQ(row["eta"].get<int>(), row["n"].get<int>());
    EXPECT_TRUE(row["mc"]["within_band"].get<bool>());
  }
  EXPECT_EQ(parse_config(read_text_file(root / "a" / "config.txt")).n_max, 5);
}

TEST(Run, StrictExitOnFailedHypothesis) {
  const fs::path root = scratch("strict");
  const auto cfg = parse_config(
      "system = full2\nmeasure = uniform\nfamily = fixed-point\nfamily.point = periodic:0\nn.min = 2\nn.max = 5\n"
      "checks = proposition1\n");
  EXPECT_EQ(run_experiment(cfg, root / "lenient").exit_code, kExitOk);
  EXPECT_EQ(run_experiment(cfg, root / "strict", RunOptions{true, true}).exit_code, kExitConditions);
}

TEST(Run, GuardExit) {
  const fs::path root = scratch("guard");
  const auto cfg = parse_config("system = full2\nmeasure = uniform\nfamily = fixed-point\nfamily.point = periodic:01\n"
                                "n.min = 21\nn.max = 21\n");
  const auto r = run_experiment(cfg, root / "g");
  EXPECT_EQ(r.exit_code, kExitGuard);
  EXPECT_TRUE(r.summary["rows"][0].contains("guard"));
}

TEST(Run, InjectedFaultsFlipChecks) {
  const fs::path root = scratch("faults");
  const auto cfg = parse_config(
      "system = golden\nmeasure = parry\nfamily = prefix\nfamily.head = 1\nfamily.tail = 0\nn.min = 3\nn.max = 4\n"
      "checks = lemmas\nfault = kernel-perturb:0.001, psi-scale:0, telescoping-drop\n");
  const auto r = run_experiment(cfg, root / "f");
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_TRUE(r.summary["lemmas"]["pass"].get<bool>());
  const auto flipped = r.summary["faults"]["flipped_checks"];
  ASSERT_TRUE(flipped.is_array());
  std::set<std::string> ids;
  for (const auto& f : flipped) ids.insert(f.get<std::string>());
  EXPECT_TRUE(ids.count("lemma3-identity"));
  EXPECT_TRUE(ids.count("lemma1-telescoping"));
  EXPECT_TRUE(ids.count("lemma4-eq13"));
}

TEST(Plot, ScriptOverlaysRuns) {
  const fs::path root = scratch("plot");
  auto cfg = parse_config(kSmall);
  cfg.mc_trials = 0;
  run_experiment(cfg, root / "one");
  cfg.name = "two";
  run_experiment(cfg, root / "two");
  const std::string single = emit_plot_script({root / "one"});
  EXPECT_NE(single.find("survival_n2.csv"), std::string::npos);
  const std::string both = emit_plot_script({root / "one", root / "two"});
  EXPECT_NE(both.find((root / "two" / "ks.csv").generic_string()), std::string::npos);
  EXPECT_NE(both.find((root / "one" / "ks.csv").generic_string()), std::string::npos);
  fs::create_directories(root / "empty");
  EXPECT_THROW(emit_plot_script({root / "empty"}), Error);
  EXPECT_THROW(emit_plot_script({}), Error);
}

TEST(Cli, ExitCodes) {
  const fs::path root = scratch("cli");
  {
    std::ofstream(root / "bad.cfg") << "unknown.key = 1\n";
    std::ofstream(root / "good.cfg") << kSmall << "out = runs/good\n";
    std::ofstream(root / "guard.cfg") << "system = full2\nfamily = fixed-point\nfamily.point = periodic:01\n"
                                         "n.min = 21\nn.max = 21\n";
  }
  EXPECT_EQ(run_cli("list-presets"), 0);
  EXPECT_EQ(run_cli((root / "bad.cfg").string()), 1);
  EXPECT_EQ(run_cli("run " + (root / "bad.cfg").string()), 1);
  EXPECT_EQ(run_cli("run " + (root / "missing.cfg").string()), 1);
  EXPECT_EQ(run_cli("run " + (root / "good.cfg").string()), 0);
  EXPECT_TRUE(fs::exists(root / "runs" / "good" / "summary.json"));
  EXPECT_EQ(run_cli("run " + (root / "guard.cfg").string() + " --out " + (root / "g").string()), 4);
  EXPECT_EQ(run_cli("plot " + (root / "runs" / "good").string()), 0);
  EXPECT_TRUE(fs::exists(root / "runs" / "good" / "plot.gp"));
  EXPECT_EQ(run_cli("plot " + (root / "nothing").string()), 1);
  EXPECT_EQ(run_cli("preset nope"), 1);
}
