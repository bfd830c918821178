#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hitlaw/experiment.hpp"

namespace fs = std::filesystem;
using namespace hitlaw;

namespace {

void print_summary(const RunResult& r) {
  const json& s = r.summary;
  std::cout << "run " << s["name"].get<std::string>() << " -> " << r.out_dir.string() << '\n';
  std::cout << "  n      eps            eta  ks_oracle      mc_ks_oracle   band\n";
  for (const auto& row : s["rows"]) {
    std::printf("  %-6d", row["n"].get<int>());
    if (row.contains("guard")) {
      std::cout << row["guard"].get<std::string>() << '\n';
      continue;
    }
    std::printf(" %-14.6g %-4d", row["eps"].get<double>(), row["eta"].get<int>());
    if (row["ks_oracle"].is_null()) std::printf(" %-14s", "-");
    else std::printf(" %-14.6g", row["ks_oracle"]["ks"].get<double>());
    const json& mc = row["mc"];
    if (mc.is_null() || !mc.contains("ks_oracle")) std::printf(" %-14s %s\n", "-", "-");
    else std::printf(" %-14.6g %.6g\n", mc["ks_oracle"].get<double>(), mc["dkw_band_99"].get<double>());
  }
  const json& st = s["status"];
  std::cout << "  oracle KS strictly decreasing: " << (s["ks_oracle_trend"]["strictly_decreasing"].get<bool>() ? "yes" : "no")
            << '\n';
  for (const auto& [key, rep] : s["hypotheses"].items()) {
    const json& h = key == "example2" ? rep["proposition1"] : rep;
    for (const auto& res : h["results"])
      std::cout << "  [" << key << "] " << res["name"].get<std::string>() << ": "
                << (res["applies"].get<bool>() ? "applies" : "not established") << '\n';
  }
  std::cout << "  lemma checks: " << s["lemmas"]["checked"].get<long>() << " run, "
            << s["lemmas"]["failed"].size() << " failed\n";
  if (s.contains("faults"))
    std::cout << "  faults flipped: " << s["faults"]["flipped_checks"].dump() << '\n';
  std::cout << "  exit code " << st["exit_code"].get<int>() << '\n';
}

int execute(const ExperimentConfig& cfg, const std::string& out, bool strict) {
  const fs::path dir = !out.empty() ? fs::path(out) : !cfg.out.empty() ? cfg.base_dir / cfg.out : fs::path("runs") / cfg.name;
  const RunResult r = run_experiment(cfg, dir, RunOptions{strict, true});
  print_summary(r);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and sampled hitting-time laws on subshifts of finite type"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::string out;
  bool strict = false;
  unsigned workers = 0;
  std::vector<std::string> plot_dirs;
  std::string plot_out;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out, "output directory");
  run->add_flag("--strict", strict, "exit 2 when a checked condition fails");
  run->add_option("--workers", workers, "worker threads (overrides the config)");

  auto* preset = app.add_subcommand("preset", "run a builtin preset");
  preset->add_option("name", preset_name, "preset name")->required();
  preset->add_option("--out", out, "output directory");
  preset->add_flag("--strict", strict, "exit 2 when a checked condition fails");
  preset->add_option("--workers", workers, "worker threads");

  auto* list = app.add_subcommand("list-presets", "list builtin presets");

  auto* plot = app.add_subcommand("plot", "write a gnuplot script for one or more run directories");
  plot->add_option("run-dir", plot_dirs, "run directories")->required();
  plot->add_option("--out", plot_out, "script path (default <first run-dir>/plot.gp)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; usage errors share the config-error code.
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto& p : presets()) std::cout << p.name << "\t" << p.doc << '\n';
      return 0;
    }
    if (*plot) {
      std::vector<fs::path> dirs(plot_dirs.begin(), plot_dirs.end());
      const std::string script = emit_plot_script(dirs);
      const fs::path target = plot_out.empty() ? dirs.front() / "plot.gp" : fs::path(plot_out);
      write_text_file(target, script);
      std::cout << "wrote " << target.string() << '\n';
      return 0;
    }
    ExperimentConfig cfg;
    if (*run) {
      const fs::path p(config_path);
      cfg = parse_config(read_text_file(p), p.has_parent_path() ? p.parent_path() : fs::path("."));
    } else {
      cfg = preset_config(preset_name);
    }
    if (workers > 0) {
      cfg.workers = workers;
      cfg.mc_workers = workers;
    }
    return execute(cfg, out, strict);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::ParseError) return kExitConfig;
    if (is_guard(e.code())) return kExitGuard;
    return kExitConfig;
  }
}
