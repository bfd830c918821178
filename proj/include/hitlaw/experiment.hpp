#pragma once

// Batch experiments: strict key=value configuration, builtin presets, per-n
// orchestration of oracle, Monte Carlo, lemma and hypothesis checks, and
// artifact emission. Grammar in docs/config.md.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hitlaw/error.hpp"
#include "hitlaw/families.hpp"
#include "hitlaw/hypotheses.hpp"
#include "hitlaw/io.hpp"
#include "hitlaw/lemmas.hpp"
#include "hitlaw/measures.hpp"
#include "hitlaw/monte_carlo.hpp"
#include "hitlaw/oracle.hpp"
#include "hitlaw/parallel.hpp"
#include "hitlaw/rng.hpp"
#include "hitlaw/sft.hpp"
#include "hitlaw/window_chain.hpp"

namespace hitlaw {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitConditions = 2;
inline constexpr int kExitGuard = 4;

struct ExperimentConfig {
  std::string name = "custom";
  std::string system = "full2";
  std::string measure = "parry";
  std::vector<double> bernoulli_p;
  std::string potential = "zero";
  std::string family = "prefix";
  int family_head = 0;
  std::vector<int> family_tail;
  std::vector<int> family_block;
  int family_entry = 0;
  std::string family_point = "periodic:0";
  std::vector<std::string> family_points;
  std::string family_anchor = "one-sided";
  std::string family_file;
  int n_min = 2;
  int n_max = 8;
  bool oracle = true;
  std::string horizon = "ks";
  std::size_t mc_trials = 0;
  std::uint64_t mc_seed = 1;
  std::uint64_t mc_max_steps = 0;
  unsigned mc_workers = 1;
  double mc_min_eps = 1e-4;
  std::vector<std::string> checks;
  long lemma_q = 500;
  int lemma_n_max = 8;
  double lemma_t = 1.0;
  int psi_cutoff = 4;
  std::vector<std::string> faults;
  unsigned workers = 1;
  std::string out;
  fs::path base_dir = ".";

  bool wants(std::string_view check) const {
    return std::find(checks.begin(), checks.end(), check) != checks.end();
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] inline void config_fail(int line, const std::string& msg) {
  fail(ErrorCode::ConfigError, (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + msg);
}

template <class T>
T parse_number(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t used = 0;
    T out{};
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(v, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
      if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
      out = static_cast<T>(std::stoull(v, &used, 0));
    } else {
      const long long x = std::stoll(v, &used);
      if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) throw std::out_of_range(v);
      out = static_cast<T>(x);
    }
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    config_fail(line, "bad number '" + v + "' for " + key);
  }
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v, int line) {
  std::vector<int> out;
  for (const auto& item : split(v, ',')) out.push_back(parse_number<int>(key, item, line));
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v, int line) {
  if (v == "on" || v == "true" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "no") return false;
  config_fail(line, key + " expects on|off, got '" + v + "'");
}

inline void require_one_of(const std::string& key, const std::string& v, std::initializer_list<std::string_view> opts,
                           int line) {
  for (auto o : opts)
    if (v == o) return;
  std::string list;
  for (auto o : opts) list += (list.empty() ? "" : "|") + std::string(o);
  config_fail(line, key + " must be one of " + list + ", got '" + v + "'");
}

inline const std::set<std::string>& known_checks() {
  static const std::set<std::string> k{"proposition1", "corollary1", "theorem1", "example2", "lemmas", "gibbs-bound"};
  return k;
}

}  // namespace detail

/// Strict parser: '#' comments, blank lines, one "key = value" per line.
/// Unknown or repeated keys are errors.
inline ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir = ".") {
  using namespace detail;
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) config_fail(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string v = trim(s.substr(eq + 1));
    if (!seen.insert(key).second) config_fail(line, "duplicate key '" + key + "'");
    if (v.empty()) config_fail(line, "empty value for '" + key + "'");
    // "-" spells an empty list; the canonical form writes it that way.
    const bool none = v == "-";

    if (key == "name") {
      cfg.name = v;
    } else if (key == "system") {
      cfg.system = v;
    } else if (key == "measure") {
      require_one_of(key, v, {"uniform", "bernoulli", "parry", "gibbs"}, line);
      cfg.measure = v;
    } else if (key == "bernoulli.p") {
      cfg.bernoulli_p.clear();
      for (const auto& item : split(v, ',')) cfg.bernoulli_p.push_back(parse_number<double>(key, item, line));
    } else if (key == "potential") {
      cfg.potential = v;
    } else if (key == "family") {
      require_one_of(key, v,
                     {"prefix", "fixed-point", "points", "submatrix", "explicit", "log-return", "late-return",
                      "early-return", "alternating-blocks"},
                     line);
      cfg.family = v;
    } else if (key == "family.head") {
      cfg.family_head = parse_number<int>(key, v, line);
    } else if (key == "family.tail") {
      cfg.family_tail = none ? std::vector<int>{} : parse_int_list(key, v, line);
    } else if (key == "family.block") {
      cfg.family_block = none ? std::vector<int>{} : parse_int_list(key, v, line);
    } else if (key == "family.entry") {
      cfg.family_entry = parse_number<int>(key, v, line);
    } else if (key == "family.point") {
      cfg.family_point = v;
    } else if (key == "family.points") {
      cfg.family_points = none ? std::vector<std::string>{} : split(v, ';');
    } else if (key == "family.anchor") {
      require_one_of(key, v, {"one-sided", "centered"}, line);
      cfg.family_anchor = v;
    } else if (key == "family.file") {
      cfg.family_file = none ? std::string() : v;
    } else if (key == "n.min") {
      cfg.n_min = parse_number<int>(key, v, line);
    } else if (key == "n.max") {
      cfg.n_max = parse_number<int>(key, v, line);
    } else if (key == "oracle") {
      cfg.oracle = parse_bool(key, v, line);
    } else if (key == "oracle.horizon") {
      if (v != "ks") (void)parse_number<long>(key, v, line);
      cfg.horizon = v;
    } else if (key == "mc.trials") {
      cfg.mc_trials = parse_number<std::size_t>(key, v, line);
    } else if (key == "mc.seed") {
      cfg.mc_seed = parse_number<std::uint64_t>(key, v, line);
    } else if (key == "mc.max_steps") {
      cfg.mc_max_steps = parse_number<std::uint64_t>(key, v, line);
    } else if (key == "mc.workers") {
      cfg.mc_workers = std::max(1u, parse_number<unsigned>(key, v, line));
    } else if (key == "mc.min_eps") {
      cfg.mc_min_eps = parse_number<double>(key, v, line);
    } else if (key == "checks") {
      cfg.checks = none ? std::vector<std::string>{} : split(v, ',');
      for (const auto& c : cfg.checks)
        if (!known_checks().count(c)) config_fail(line, "unknown check '" + c + "'");
    } else if (key == "lemmas.q") {
      cfg.lemma_q = parse_number<long>(key, v, line);
    } else if (key == "lemmas.n_max") {
      cfg.lemma_n_max = parse_number<int>(key, v, line);
    } else if (key == "lemmas.t") {
      cfg.lemma_t = parse_number<double>(key, v, line);
    } else if (key == "psi.cutoff") {
      cfg.psi_cutoff = parse_number<int>(key, v, line);
    } else if (key == "fault") {
      cfg.faults = v == "none" ? std::vector<std::string>{} : split(v, ',');
      for (const auto& f : cfg.faults) {
        const auto colon = f.find(':');
        const std::string kind = f.substr(0, colon);
        if (kind == "telescoping-drop") continue;
        if ((kind == "psi-scale" || kind == "kernel-perturb") && colon != std::string::npos) {
          (void)parse_number<double>(key, f.substr(colon + 1), line);
          continue;
        }
        config_fail(line, "unknown fault '" + f + "'");
      }
    } else if (key == "workers") {
      cfg.workers = std::max(1u, parse_number<unsigned>(key, v, line));
    } else if (key == "out") {
      cfg.out = v;
    } else {
      config_fail(line, "unknown key '" + key + "'");
    }
  }
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) config_fail(0, "need 1 <= n.min <= n.max");
  if (cfg.lemma_q < 1) config_fail(0, "lemmas.q must be >= 1");
  if (!(cfg.lemma_t > 0.0)) config_fail(0, "lemmas.t must be > 0");
  if (!(cfg.mc_min_eps >= 0.0)) config_fail(0, "mc.min_eps must be >= 0");
  if (cfg.measure == "bernoulli" && cfg.bernoulli_p.empty()) config_fail(0, "measure = bernoulli needs bernoulli.p");
  return cfg;
}

/// Canonical text form: every key with its effective value, fixed order.
inline std::string format_config(const ExperimentConfig& c) {
  auto ints = [](const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s.empty() ? std::string("-") : s;
  };
  std::ostringstream os;
  os << "name = " << c.name << '\n' << "system = " << c.system << '\n' << "measure = " << c.measure << '\n';
  if (!c.bernoulli_p.empty()) {
    os << "bernoulli.p = ";
    for (std::size_t i = 0; i < c.bernoulli_p.size(); ++i) os << (i ? "," : "") << format_double(c.bernoulli_p[i]);
    os << '\n';
  }
  os << "potential = " << c.potential << '\n' << "family = " << c.family << '\n';
  os << "family.head = " << c.family_head << '\n' << "family.tail = " << ints(c.family_tail) << '\n';
  os << "family.block = " << ints(c.family_block) << '\n' << "family.entry = " << c.family_entry << '\n';
  os << "family.point = " << c.family_point << '\n';
  os << "family.points = ";
  for (std::size_t i = 0; i < c.family_points.size(); ++i) os << (i ? ";" : "") << c.family_points[i];
  os << (c.family_points.empty() ? "-" : "") << '\n';
  os << "family.anchor = " << c.family_anchor << '\n' << "family.file = " << (c.family_file.empty() ? "-" : c.family_file) << '\n';
  os << "n.min = " << c.n_min << '\n' << "n.max = " << c.n_max << '\n';
  os << "oracle = " << (c.oracle ? "on" : "off") << '\n' << "oracle.horizon = " << c.horizon << '\n';
  os << "mc.trials = " << c.mc_trials << '\n' << "mc.seed = " << c.mc_seed << '\n';
  os << "mc.max_steps = " << c.mc_max_steps << '\n' << "mc.min_eps = " << format_double(c.mc_min_eps) << '\n';
  os << "checks = ";
  for (std::size_t i = 0; i < c.checks.size(); ++i) os << (i ? "," : "") << c.checks[i];
  os << (c.checks.empty() ? "-" : "") << '\n';
  os << "lemmas.q = " << c.lemma_q << '\n' << "lemmas.n_max = " << c.lemma_n_max << '\n';
  os << "lemmas.t = " << format_double(c.lemma_t) << '\n' << "psi.cutoff = " << c.psi_cutoff << '\n';
  os << "fault = ";
  for (std::size_t i = 0; i < c.faults.size(); ++i) os << (i ? "," : "") << c.faults[i];
  os << (c.faults.empty() ? "none" : "") << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Presets

struct Preset {
  std::string name;
  std::string doc;
  std::string config;
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> all{
      {"example1", "full 3-shift, uniform Bernoulli, U_n = [0 x_1..x_{n-1}] with x_i in {1,2}: Proposition 1",
       "system = full3\nmeasure = uniform\nfamily = prefix\nfamily.head = 0\nfamily.tail = 1,2\n"
       "n.min = 2\nn.max = 12\nchecks = proposition1,lemmas\nlemmas.n_max = 8\n"
       "mc.trials = 100000\nmc.seed = 20150630\n"},
      {"example2", "full 3-shift Gibbs state, small seeded potential, entry symbol 2 into the block {0,1}",
       "system = full3\nmeasure = gibbs\npotential = random:11:0.1\nfamily = submatrix\nfamily.block = 0,1\n"
       "family.entry = 2\nn.min = 2\nn.max = 10\nchecks = example2,proposition1,gibbs-bound,lemmas\n"
       "lemmas.n_max = 7\nmc.trials = 100000\nmc.seed = 20160225\n"},
      {"submatrix", "submatrix family on the full 3-shift under the Parry measure",
       "system = full3\nmeasure = parry\nfamily = submatrix\nfamily.block = 0,1\nfamily.entry = 2\n"
       "n.min = 2\nn.max = 10\nchecks = proposition1,lemmas\nlemmas.n_max = 7\n"
       "mc.trials = 100000\nmc.seed = 20160226\n"},
      {"golden-parry-cyl", "golden mean Parry measure, cylinders [x]_n around the Fibonacci word: Corollary 1",
       "system = golden\nmeasure = parry\nfamily = fixed-point\nfamily.point = fibonacci\n"
       "family.anchor = one-sided\nn.min = 2\nn.max = 16\nchecks = corollary1,lemmas\nlemmas.n_max = 10\n"
       "mc.trials = 100000\nmc.seed = 20150916\n"},
      {"example4", "golden mean Parry measure, shrinking family [1 0^{n-1}]: Corollary 1 under mu_Parry",
       "system = golden\nmeasure = parry\nfamily = prefix\nfamily.head = 1\nfamily.tail = 0\n"
       "n.min = 2\nn.max = 16\nchecks = corollary1,proposition1,lemmas\nlemmas.n_max = 10\n"
       "mc.trials = 100000\nmc.seed = 20150917\n"},
      {"example5", "full 2-shift uniform, eta_n = floor(log2 n) + floor(sqrt n) single cylinders",
       "system = full2\nmeasure = uniform\nfamily = log-return\nn.min = 4\nn.max = 14\n"
       "checks = corollary1,lemmas\nlemmas.n_max = 10\nmc.trials = 100000\nmc.seed = 20150918\n"},
      {"counterexample-periodic", "full 2-shift uniform, cylinders of the fixed point 0^inf: hypotheses fail",
       "system = full2\nmeasure = uniform\nfamily = fixed-point\nfamily.point = periodic:0\n"
       "family.anchor = one-sided\nn.min = 2\nn.max = 12\nchecks = proposition1,corollary1,lemmas\n"
       "lemmas.n_max = 10\nmc.trials = 100000\nmc.seed = 20150919\n"},
      {"theorem1-case1", "full 2-shift Parry, centered cylinders of 1^inf . 0^inf (eta_n = 2n): Theorem 1",
       "system = full2\nmeasure = parry\nfamily = fixed-point\nfamily.point = asymptotic:1/0\n"
       "family.anchor = centered\nn.min = 2\nn.max = 7\nchecks = theorem1,lemmas\nlemmas.n_max = 7\n"
       "mc.trials = 100000\nmc.seed = 20160301\n"},
      {"theorem1-case2", "full 2-shift Parry, centered 1^n 0^n / 0^n 1^n by parity (eta_n = 2n, not nested)",
       "system = full2\nmeasure = parry\nfamily = alternating-blocks\nn.min = 2\nn.max = 7\n"
       "checks = theorem1,lemmas\nlemmas.n_max = 7\nmc.trials = 100000\nmc.seed = 20160302\n"},
      {"theorem1-case3", "full 2-shift Parry, centered 1^o 0^{2n-2o} 1^o with eta_n = n + ceil(n/2) + 1",
       "system = full2\nmeasure = parry\nfamily = late-return\nn.min = 2\nn.max = 7\n"
       "checks = theorem1,lemmas\nlemmas.n_max = 7\nmc.trials = 100000\nmc.seed = 20160303\n"},
      {"fault-injection", "golden mean Parry, [1 0^{n-1}], with perturbed kernel, zeroed psi and a broken telescoping sum",
       "system = golden\nmeasure = parry\nfamily = prefix\nfamily.head = 1\nfamily.tail = 0\n"
       "n.min = 3\nn.max = 8\nchecks = lemmas\nlemmas.n_max = 8\n"
       "fault = kernel-perturb:0.001,psi-scale:0,telescoping-drop\nmc.trials = 100000\nmc.seed = 20160304\n"},
  };
  return all;
}

inline const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  fail(ErrorCode::ConfigError, "unknown preset '" + name + "'");
}

inline ExperimentConfig preset_config(const std::string& name) {
  const Preset& p = find_preset(name);
  ExperimentConfig c = parse_config("name = " + p.name + "\n" + p.config);
  return c;
}

// ---------------------------------------------------------------------------
// Building blocks

inline TransitionMatrix resolve_system(const ExperimentConfig& c) {
  if (c.system == "full2") return TransitionMatrix::full_shift(2);
  if (c.system == "full3") return TransitionMatrix::full_shift(3);
  if (c.system == "golden") return TransitionMatrix::golden_mean();
  const fs::path p = c.base_dir / c.system;
  std::ifstream in(p);
  if (!in) fail(ErrorCode::ConfigError, "system: not a builtin and cannot open '" + p.string() + "'");
  return parse_transition_matrix(in);
}

/// phi(i, j) ~ U[-amp, amp] on support edges in row-major order, from
/// Xoshiro256(derive_seed(seed, 0)).
inline LocallyConstantPotential random_potential(const TransitionMatrix& a, std::uint64_t seed, double amp = 1.0) {
  const auto n = static_cast<std::size_t>(a.size());
  Matrix v(n, n);
  Xoshiro256 g(derive_seed(seed, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a.allowed(static_cast<int>(i), static_cast<int>(j))) v(i, j) = amp * (2.0 * g.uniform() - 1.0);
  return {a, std::move(v)};
}

/// phi(i, i) = v and phi(i, j) = -v for i != j on the support.
inline LocallyConstantPotential sticky_potential(const TransitionMatrix& a, double value = 1.0) {
  const auto n = static_cast<std::size_t>(a.size());
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a.allowed(static_cast<int>(i), static_cast<int>(j))) v(i, j) = i == j ? value : -value;
  return {a, std::move(v)};
}

inline LocallyConstantPotential resolve_potential(const ExperimentConfig& c, const TransitionMatrix& a) {
  const std::string& p = c.potential;
  const auto parts = detail::split(p, ':');
  if (p == "zero") return LocallyConstantPotential::zero(a);
  if (!parts.empty() && parts[0] == "random" && (parts.size() == 2 || parts.size() == 3)) {
    const auto seed = detail::parse_number<std::uint64_t>("potential", parts[1], 0);
    const double amp = parts.size() == 3 ? detail::parse_number<double>("potential", parts[2], 0) : 1.0;
    return random_potential(a, seed, amp);
  }
  if (!parts.empty() && parts[0] == "sticky" && parts.size() <= 2)
    return sticky_potential(a, parts.size() == 2 ? detail::parse_number<double>("potential", parts[1], 0) : 1.0);
  if (p.rfind("file:", 0) == 0) {
    std::ifstream in(c.base_dir / p.substr(5));
    if (!in) fail(ErrorCode::ConfigError, "potential: cannot open '" + p.substr(5) + "'");
    return parse_potential(in, a);
  }
  fail(ErrorCode::ConfigError, "potential must be zero | random:SEED[:AMP] | sticky[:V] | file:PATH");
}

struct ResolvedMeasure {
  MarkovMeasure measure;
  std::optional<GibbsData> gibbs;
};

inline ResolvedMeasure resolve_measure(const ExperimentConfig& c, const TransitionMatrix& a) {
  if (c.measure == "parry") return {parry(a), std::nullopt};
  if (c.measure == "gibbs") {
    GibbsData g = gibbs(a, resolve_potential(c, a));
    MarkovMeasure m = g.measure;
    return {std::move(m), std::move(g)};
  }
  std::vector<double> p = c.bernoulli_p;
  if (c.measure == "uniform") p.assign(static_cast<std::size_t>(a.size()), 1.0 / a.size());
  if (static_cast<int>(p.size()) != a.size())
    fail(ErrorCode::ConfigError, "bernoulli.p needs " + std::to_string(a.size()) + " entries");
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j)
      if (!a.allowed(i, j)) fail(ErrorCode::ConfigError, "Bernoulli measures need a full shift");
  return {bernoulli(p), std::nullopt};
}

/// periodic:W | fibonacci | asymptotic:L/R | explicit:W@ORIGIN
inline PointStream parse_point(const std::string& spec, int alphabet) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (kind == "fibonacci" && arg.empty()) return PointStream::fibonacci();
  if (kind == "periodic" && !arg.empty()) return PointStream::periodic(word_from_string(arg, alphabet));
  if (kind == "asymptotic") {
    const auto slash = arg.find('/');
    if (slash != std::string::npos)
      return PointStream::asymptotic(word_from_string(arg.substr(0, slash), alphabet),
                                     word_from_string(arg.substr(slash + 1), alphabet));
  }
  if (kind == "explicit") {
    const auto at = arg.find('@');
    if (at != std::string::npos)
      return PointStream::explicit_symbols(word_from_string(arg.substr(0, at), alphabet),
                                           detail::parse_number<int>("point origin", arg.substr(at + 1), 0));
  }
  fail(ErrorCode::ConfigError, "point must be periodic:W | fibonacci | asymptotic:L/R | explicit:W@ORIGIN, got '" + spec + "'");
}

inline std::vector<Symbol> to_symbols(const std::vector<int>& v, int alphabet, const char* key) {
  std::vector<Symbol> out;
  for (int x : v) {
    if (x < 0 || x >= alphabet) fail(ErrorCode::ConfigError, std::string(key) + ": symbol " + std::to_string(x) + " out of range");
    out.push_back(static_cast<Symbol>(x));
  }
  return out;
}

inline FamilyDescriptor resolve_family(const ExperimentConfig& c, const TransitionMatrix& a) {
  const Anchor anchor = c.family_anchor == "centered" ? Anchor::Centered : Anchor::OneSided;
  auto need_full2 = [&] {
    if (!(a == TransitionMatrix::full_shift(2))) fail(ErrorCode::ConfigError, c.family + " is defined on the full 2-shift");
  };
  if (c.family == "prefix") {
    if (c.family_head < 0 || c.family_head >= a.size()) fail(ErrorCode::ConfigError, "family.head out of range");
    return FamilyDescriptor::prefix(a, static_cast<Symbol>(c.family_head), to_symbols(c.family_tail, a.size(), "family.tail"));
  }
  if (c.family == "fixed-point") return FamilyDescriptor::fixed_point(a, parse_point(c.family_point, a.size()), anchor);
  if (c.family == "points") {
    if (c.family_points.empty()) fail(ErrorCode::ConfigError, "family = points needs family.points");
    std::vector<PointStream> pts;
    for (const auto& s : c.family_points) pts.push_back(parse_point(s, a.size()));
    ExplicitFamily fam;
    for (int n = c.n_min; n <= c.n_max + 1; ++n) {
      const int offset = anchor == Anchor::Centered ? -n : 0;
      const int len = anchor == Anchor::Centered ? 2 * n : n;
      ExplicitEntry e{offset, len, {}};
      for (const auto& p : pts)
        if (p.covers(offset, len)) e.words.push_back(p.slice(offset, len));
      if (!e.words.empty()) fam.entries[n] = std::move(e);
    }
    return FamilyDescriptor::explicit_list(a, std::move(fam));
  }
  if (c.family == "submatrix") {
    if (c.family_entry < 0 || c.family_entry >= a.size()) fail(ErrorCode::ConfigError, "family.entry out of range");
    return FamilyDescriptor::submatrix(a, to_symbols(c.family_block, a.size(), "family.block"),
                                       static_cast<Symbol>(c.family_entry));
  }
  if (c.family == "explicit") {
    if (c.family_file.empty()) fail(ErrorCode::ConfigError, "family = explicit needs family.file");
    json doc;
    try {
      doc = json::parse(read_text_file(c.base_dir / c.family_file));
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError, std::string("family.file: ") + e.what());
    }
    return load_explicit_family(doc, a);
  }
  need_full2();
  if (c.family == "log-return") return log_return_family(1, c.n_max + 1);
  if (c.family == "late-return") return late_return_family(2, c.n_max + 1);
  if (c.family == "alternating-blocks") return alternating_block_family(1, c.n_max + 1);
  return early_return_family(2, c.n_max + 1);
}

/// Moves d of probability from the last to the first allowed entry of every
/// row with two or more allowed entries.
inline Matrix perturb_kernel(const MarkovMeasure& m, double d) {
  Matrix p = m.kernel();
  for (int i = 0; i < m.alphabet(); ++i) {
    int first = -1;
    int last = -1;
    for (int j = 0; j < m.alphabet(); ++j)
      if (m.base().allowed(i, j)) {
        if (first < 0) first = j;
        last = j;
      }
    if (first >= 0 && last != first) {
      const double move = std::min(d, p(static_cast<std::size_t>(i), static_cast<std::size_t>(last)));
      p(static_cast<std::size_t>(i), static_cast<std::size_t>(first)) += move;
      p(static_cast<std::size_t>(i), static_cast<std::size_t>(last)) -= move;
    }
  }
  return p;
}

/// Drops the last summand: a deliberately broken summation.
inline double dropping_sum(std::span<const double> xs) {
  return xs.empty() ? 0.0 : compensated_sum(xs.first(xs.size() - 1));
}

inline bool is_guard(ErrorCode c) {
  return c == ErrorCode::StateSpaceTooLarge || c == ErrorCode::HorizonExceeded || c == ErrorCode::CapExceeded ||
         c == ErrorCode::WindowTooLong;
}

struct FaultSpec {
  std::optional<double> kernel_perturb;
  std::optional<double> psi_scale;
  bool telescoping_drop = false;

  bool any() const { return kernel_perturb || psi_scale || telescoping_drop; }
};

inline FaultSpec resolve_faults(const ExperimentConfig& c) {
  FaultSpec f;
  for (const auto& s : c.faults) {
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    if (kind == "telescoping-drop") f.telescoping_drop = true;
    else if (kind == "kernel-perturb") f.kernel_perturb = std::stod(s.substr(colon + 1));
    else if (kind == "psi-scale") f.psi_scale = std::stod(s.substr(colon + 1));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Lemma battery

struct LemmaInputs {
  const FamilyDescriptor* family;
  const MarkovMeasure* measure;
  const WindowChain* chain;
  const SurvivalCurve* curve;
  const MixingProfile* psi;
  Summation summation = default_summation;
  int n = 0;
  int eta = 0;
  long q = 500;
  double t = 1.0;
};

/// Every applicable exact check at index n.
inline std::vector<LemmaReport> lemma_battery(const LemmaInputs& in) {
  std::vector<LemmaReport> out;
  const SurvivalCurve& curve = *in.curve;
  const long q = std::min<long>(in.q, curve.horizon() - 1);
  out.push_back(telescoping_scan(curve));
  out.push_back(telescoping_check(curve, curve.horizon(), in.summation));
  out.push_back(lemma3_check(*in.chain, q));
  if (grid_index(in.t, curve.eps) <= curve.horizon())
    for (auto& r : s1_s2_bounds(curve, *in.psi, in.n, in.t, in.eta)) out.push_back(std::move(r));
  if (in.family->anchor() == Anchor::OneSided) {
    for (auto& r : lemma4_checks(*in.chain, *in.psi, q, in.n)) out.push_back(std::move(r));
    try {
      for (auto& r : section42_check(*in.family, in.n, *in.measure, *in.psi, q)) out.push_back(std::move(r));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FamilyNotShrinking) throw;
      out.push_back(LemmaReport::not_applicable("sec42-bound", LemmaKind::Inequality, e.what()));
    }
  } else if (in.family->anchor() == Anchor::Centered) {
    for (auto& r : section43_check(*in.family, in.n, *in.measure, *in.psi)) out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run

struct RunResult {
  int exit_code = kExitOk;
  json summary;
  fs::path out_dir;
};

struct RunOptions {
  bool strict = false;
  bool write_artifacts = true;
};

namespace detail {

struct RowOutcome {
  json row;
  std::optional<double> ks_oracle;
  bool mc_ran = false;
  bool mc_within = true;
  std::vector<LemmaReport> lemmas;
  std::vector<LemmaReport> faulted;
  std::string guard;
  std::string survival_csv;
  std::string empirical_csv;
};

inline std::string opt_csv(const json& j) {
  return j.is_null() ? std::string() : format_double(j.get<double>());
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, RunOptions opt = {}) {
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();

  const TransitionMatrix a = resolve_system(cfg);
  const ResolvedMeasure rm = resolve_measure(cfg, a);
  const MarkovMeasure& m = rm.measure;
  const FamilyDescriptor fam = resolve_family(cfg, a);
  const FaultSpec faults = resolve_faults(cfg);

  std::vector<int> ns;
  for (int n = cfg.n_min; n <= cfg.n_max; ++n)
    if (fam.instantiable(n)) ns.push_back(n);
  if (ns.empty()) fail(ErrorCode::ConfigError, "family has no index in [n.min, n.max]");

  const bool lemmas_on = cfg.wants("lemmas") && cfg.oracle;
  std::optional<MixingProfile> psi;
  std::optional<MixingProfile> psi_faulted;
  if (lemmas_on) {
    const int lemma_top = std::min(cfg.lemma_n_max, cfg.n_max);
    const int max_delta = 2 * lemma_top + (a.size() - 1) * (a.size() - 1) + 4;
    psi = psi_profile(m, max_delta, cfg.psi_cutoff);
    psi_faulted = faults.psi_scale ? psi->scaled(*faults.psi_scale) : *psi;
  }

  if (opt.write_artifacts) fs::create_directories(out_dir);

  std::vector<detail::RowOutcome> rows(ns.size());
  parallel_for(
      ns.size(), cfg.workers,
      [&](std::size_t idx) {
        const int n = ns[idx];
        detail::RowOutcome& out = rows[idx];
        json& row = out.row;
        row["n"] = n;
        try {
          const WindowSet u = fam.instantiate(n);
          const ReturnTimeRecord rt = return_time(u);
          const double eps = set_measure(m, u);
          row["eps"] = eps;
          row["words"] = u.cardinality();
          row["eta"] = rt.eta;
          row["regime"] = rt.regime == ReturnRegime::Overlap ? "overlap" : "bridge";
          row["offset"] = u.offset();
          row["length"] = u.length();
          row["nested"] = fam.instantiable(n + 1)
                              ? json(check_nested(fam.instantiate(n + 1), u, NestingAlignment::SetInclusion).holds)
                              : json(nullptr);
          if (rm.gibbs && cfg.wants("gibbs-bound")) row["gibbs_bound"] = to_json(gibbs_bound(*rm.gibbs, u));

          std::optional<WindowChain> chain;
          std::optional<SurvivalCurve> curve;
          row["ks_oracle"] = nullptr;
          if (cfg.oracle) {
            chain = WindowChain::build(m, u);
            const long horizon = cfg.horizon == "ks" ? ks_horizon(eps) : std::stol(cfg.horizon);
            curve = survival(*chain, horizon, n);
            row["horizon"] = curve->horizon();
            if (std::exp(-curve->t(curve->horizon())) < kTailThreshold) {
              const KsResult ks = ks_vs_exponential(*curve);
              row["ks_oracle"] = to_json(ks);
              out.ks_oracle = ks.ks;
            }
            if (opt.write_artifacts) {
              std::ostringstream os;
              write_survival_csv(os, *curve);
              out.survival_csv = os.str();
            }
          }

          row["mc"] = nullptr;
          if (cfg.mc_trials > 0 && eps >= cfg.mc_min_eps) {
            SamplerConfig sc{cfg.mc_seed, cfg.mc_trials, cfg.mc_max_steps, cfg.mc_workers};
            const EmpiricalLaw law = sample_entry_times(m, u, sc, n);
            const double band = dkw_band(law.trials, 0.99);
            json mc{{"trials", law.trials},
                    {"seed", law.seed},
                    {"max_steps", law.max_steps},
                    {"censored", law.censored},
                    {"ks_exp", ks_statistic(law).ks},
                    {"dkw_band_99", band},
                    {"warnings", law.warnings}};
            out.mc_ran = true;
            if (curve) {
              const double d = ks_statistic(law, *curve).ks;
              mc["ks_oracle"] = d;
              mc["within_band"] = d <= band;
              out.mc_within = d <= band;
            }
            row["mc"] = mc;
            if (opt.write_artifacts) {
              std::ostringstream os;
              write_empirical_csv(os, law);
              out.empirical_csv = os.str();
            }
          }

          if (lemmas_on && n <= cfg.lemma_n_max) {
            LemmaInputs in{&fam, &m, &*chain, &*curve, &*psi, default_summation, n, rt.eta, cfg.lemma_q, cfg.lemma_t};
            out.lemmas = lemma_battery(in);
            if (faults.any()) {
              std::optional<WindowChain> chain_f;
              std::optional<SurvivalCurve> curve_f;
              if (faults.kernel_perturb) {
                chain_f = WindowChain::build(m, u, perturb_kernel(m, *faults.kernel_perturb));
                curve_f = survival(*chain_f, curve->horizon(), n);
              }
              LemmaInputs fin = in;
              if (chain_f) {
                fin.chain = &*chain_f;
                fin.curve = &*curve_f;
              }
              fin.psi = &*psi_faulted;
              if (faults.telescoping_drop) fin.summation = dropping_sum;
              out.faulted = lemma_battery(fin);
            }
            json compact = json::array();
            for (const auto& r : out.lemmas) compact.push_back(to_json(r, false));
            row["lemmas"] = compact;
          }
        } catch (const Error& e) {
          if (!is_guard(e.code())) throw;
          out.guard = std::string(to_string(e.code())) + ": " + e.what();
          row["guard"] = out.guard;
        }
      },
      1);

  json summary;
  summary["name"] = cfg.name;
  summary["config"] = detail::split(format_config(cfg), '\n');
  summary["system"] = {{"alphabet", a.size()},
                       {"matrix", format_transition_matrix(a)},
                       {"lambda", perron(a, 1e-14).eigenvalue},
                       {"entropy", entropy(a)}};
  json mj = to_json(m);
  if (rm.gibbs) {
    mj["pressure"] = rm.gibbs->pressure;
    mj["c1"] = rm.gibbs->c1;
    mj["c2"] = rm.gibbs->c2;
  }
  summary["measure"] = mj;
  summary["family"] = {{"kind", fam.kind_name()}, {"anchor", std::string(to_string(fam.anchor()))}};
  if (psi) summary["psi"] = to_json(*psi);

  json row_list = json::array();
  std::vector<std::pair<int, double>> ks_seq;
  bool guards = false;
  bool mc_pass = true;
  long lemma_checked = 0;
  std::vector<std::string> lemma_failed;
  json faults_json = json::array();
  bool faults_detected = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    row_list.push_back(r.row);
    if (!r.guard.empty()) guards = true;
    if (r.ks_oracle) ks_seq.emplace_back(ns[i], *r.ks_oracle);
    if (r.mc_ran && !r.mc_within) mc_pass = false;
    for (const auto& l : r.lemmas) {
      if (!l.applicable || l.diagnostic) continue;
      ++lemma_checked;
      if (!l.pass) lemma_failed.push_back(l.id + "@n=" + std::to_string(ns[i]));
    }
    if (!r.faulted.empty()) {
      json flips = json::array();
      for (std::size_t k = 0; k < r.lemmas.size() && k < r.faulted.size(); ++k) {
        const auto& c = r.lemmas[k];
        const auto& f = r.faulted[k];
        if (!c.applicable || c.diagnostic) continue;
        flips.push_back({{"id", c.id}, {"clean_pass", c.pass}, {"faulted_pass", f.pass},
                         {"clean_worst", finite_or_null(c.worst)}, {"faulted_worst", finite_or_null(f.worst)}});
      }
      faults_json.push_back({{"n", ns[i]}, {"checks", flips}});
    }
  }
  summary["rows"] = row_list;

  bool ks_decreasing = ks_seq.size() >= 2;
  for (std::size_t i = 1; i < ks_seq.size(); ++i)
    if (!(ks_seq[i].second < ks_seq[i - 1].second)) ks_decreasing = false;
  json ks_json{{"strictly_decreasing", ks_decreasing}, {"values", json::array()}};
  for (const auto& [n, v] : ks_seq) ks_json["values"].push_back({n, v});
  summary["ks_oracle_trend"] = ks_json;

  json hyp = json::object();
  int hyp_exit = 0;
  std::vector<HypothesisReport> reports;
  auto add_report = [&](const std::string& key, HypothesisReport r) {
    hyp[key] = to_json(r);
    if (r.exit_code() != 0) hyp_exit = std::max(hyp_exit, r.exit_code());
    reports.push_back(std::move(r));
  };
  const int hn_min = ns.front();
  const int hn_max = ns.back();
  if (cfg.wants("proposition1")) add_report("proposition1", check_proposition1(fam, m, hn_min, hn_max));
  if (cfg.wants("corollary1")) add_report("corollary1", check_corollary1(fam, m, hn_min, hn_max));
  if (cfg.wants("theorem1")) add_report("theorem1", check_theorem1(fam, m, hn_min, hn_max));
  if (cfg.wants("example2")) {
    if (!std::holds_alternative<SubmatrixFamily>(fam.kind()))
      fail(ErrorCode::ConfigError, "check example2 needs family = submatrix");
    const auto& sf = std::get<SubmatrixFamily>(fam.kind());
    const LocallyConstantPotential phi = rm.gibbs ? rm.gibbs->potential : LocallyConstantPotential::zero(a);
    const Example2Report e2 = check_example2(a, sf.block, sf.entry, phi, m, hn_min, hn_max);
    hyp["example2"] = to_json(e2);
    if (e2.proposition1.exit_code() != 0) hyp_exit = std::max(hyp_exit, e2.proposition1.exit_code());
    reports.push_back(e2.proposition1);
  }
  summary["hypotheses"] = hyp;

  summary["lemmas"] = {{"checked", lemma_checked}, {"failed", lemma_failed}, {"pass", lemma_failed.empty()}};
  if (faults.any()) {
    for (auto& entry : faults_json) {
      for (auto& c : entry["checks"])
        if (c["clean_pass"].get<bool>() && c["faulted_pass"].get<bool>()) c["flipped"] = false;
        else c["flipped"] = c["clean_pass"].get<bool>();
    }
    json flipped = json::array();
    std::set<std::string> flipped_ids;
    for (const auto& entry : faults_json)
      for (const auto& c : entry["checks"])
        if (c["flipped"].get<bool>()) flipped_ids.insert(c["id"].get<std::string>());
    for (const auto& id : flipped_ids) flipped.push_back(id);
    faults_detected = !flipped_ids.empty();
    summary["faults"] = {{"injected", cfg.faults}, {"per_n", faults_json}, {"flipped_checks", flipped}};
  }

  int exit_code = kExitOk;
  const bool conditions_ok = hyp_exit == 0 && (faults.any() || lemma_failed.empty()) && mc_pass && faults_detected;
  if (opt.strict && !conditions_ok) exit_code = kExitConditions;
  if (guards) exit_code = kExitGuard;
  summary["status"] = {{"hypotheses_exit", hyp_exit},
                       {"lemmas_pass", lemma_failed.empty()},
                       {"mc_within_band", mc_pass},
                       {"faults_detected", faults.any() ? json(faults_detected) : json(nullptr)},
                       {"guards_triggered", guards},
                       {"conditions_ok", conditions_ok},
                       {"strict", opt.strict},
                       {"exit_code", exit_code}};

  if (opt.write_artifacts) {
    std::ostringstream ks_csv;
    ks_csv << "n,eps,eta,ks_oracle,ks_mc_exp,ks_mc_oracle,dkw_band\n";
    json lemma_doc = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const json& row = r.row;
      const std::string tag = "n" + std::to_string(ns[i]);
      if (!r.survival_csv.empty()) write_text_file(out_dir / ("survival_" + tag + ".csv"), r.survival_csv);
      if (!r.empirical_csv.empty()) write_text_file(out_dir / ("empirical_" + tag + ".csv"), r.empirical_csv);
      if (!row.contains("eps")) continue;
      const json mc = row.value("mc", json());
      ks_csv << ns[i] << ',' << format_double(row["eps"].get<double>()) << ',' << row["eta"].get<int>() << ','
             << (r.ks_oracle ? format_double(*r.ks_oracle) : "") << ','
             << (mc.is_null() ? "" : detail::opt_csv(mc["ks_exp"])) << ','
             << (mc.is_null() || !mc.contains("ks_oracle") ? "" : detail::opt_csv(mc["ks_oracle"])) << ','
             << (mc.is_null() ? "" : detail::opt_csv(mc["dkw_band_99"])) << '\n';
      json per_n{{"n", ns[i]}, {"reports", json::array()}, {"faulted", json::array()}};
      for (const auto& l : r.lemmas) per_n["reports"].push_back(to_json(l));
      for (const auto& l : r.faulted) per_n["faulted"].push_back(to_json(l));
      lemma_doc.push_back(per_n);
    }
    write_text_file(out_dir / "ks.csv", ks_csv.str());
    if (lemmas_on) write_text_file(out_dir / "lemmas.json", lemma_doc.dump(1) + "\n");
    if (!hyp.empty()) {
      write_text_file(out_dir / "hypotheses.json", hyp.dump(2) + "\n");
      std::string text;
      for (const auto& r : reports) text += format_report(r);
      write_text_file(out_dir / "hypotheses.txt", text);
    }
    write_text_file(out_dir / "config.txt", format_config(cfg));
    write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::time_t tt = std::chrono::system_clock::to_time_t(started);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    json meta{{"started_utc", stamp}, {"elapsed_seconds", elapsed}, {"workers", cfg.workers}, {"mc_workers", cfg.mc_workers}};
    write_text_file(out_dir / "metadata.json", meta.dump(2) + "\n");
  }
  return RunResult{exit_code, std::move(summary), out_dir};
}

// ---------------------------------------------------------------------------
// Plot scripts

/// gnuplot script overlaying the survival curves of every run against
/// exp(-t), and KS against n. Throws MissingArtifacts when a directory has no
/// survival CSV or no ks.csv.
inline std::string emit_plot_script(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.empty()) fail(ErrorCode::MissingArtifacts, "no run directories given");
  std::vector<std::pair<fs::path, std::vector<fs::path>>> runs;
  for (const auto& dir : run_dirs) {
    if (!fs::is_directory(dir)) fail(ErrorCode::MissingArtifacts, dir.string() + " is not a directory");
    std::vector<fs::path> curves;
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("survival_n", 0) == 0 && e.path().extension() == ".csv") curves.push_back(e.path());
    }
    if (curves.empty() || !fs::exists(dir / "ks.csv"))
      fail(ErrorCode::MissingArtifacts, dir.string() + " has no survival CSVs or ks.csv");
    std::sort(curves.begin(), curves.end(), [](const fs::path& x, const fs::path& y) {
      auto num = [](const fs::path& p) { return std::stoi(p.stem().string().substr(10)); };
      return num(x) < num(y);
    });
    runs.emplace_back(dir, std::move(curves));
  }
  auto quote = [](const fs::path& p) { return "'" + p.generic_string() + "'"; };
  std::ostringstream os;
  os << "# gnuplot script\n";
  os << "set datafile separator ','\n";
  os << "set key outside right\n";
  os << "set terminal pngcairo size 1000,700\n\n";
  os << "set output 'survival.png'\n";
  os << "set xlabel 't = q eps_n'\nset ylabel 'mu(tau_n > q)'\nset xrange [0:6]\n";
  os << "plot exp(-x) with lines lw 2 dt 2 title 'exp(-t)'";
  for (const auto& [dir, curves] : runs)
    for (const auto& c : curves)
      os << ", \\\n     " << quote(c) << " using 2:3 every ::1 with steps title '"
         << dir.filename().generic_string() << " " << c.stem().string().substr(9) << "'";
  os << "\n\nset output 'ks.png'\n";
  os << "set autoscale x\nset xlabel 'n'\nset ylabel 'KS distance to Exp(1)'\nset logscale y\n";
  os << "plot ";
  bool first = true;
  for (const auto& [dir, curves] : runs) {
    os << (first ? "" : ", \\\n     ") << quote(dir / "ks.csv") << " using 1:4 every ::1 with linespoints title '"
       << dir.filename().generic_string() << " oracle'";
    first = false;
  }
  os << "\nunset logscale y\n";
  return os.str();
}

}  // namespace hitlaw
