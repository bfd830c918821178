#pragma once

// JSON and CSV exports, plus loaders for potential files and explicit
// family documents.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hitlaw/error.hpp"
#include "hitlaw/families.hpp"
#include "hitlaw/hypotheses.hpp"
#include "hitlaw/lemmas.hpp"
#include "hitlaw/measures.hpp"
#include "hitlaw/monte_carlo.hpp"
#include "hitlaw/oracle.hpp"

namespace hitlaw {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Loaders

/// Lines "i j value" for each support edge; '#' starts a comment. Edges not
/// listed get 0.
inline LocallyConstantPotential parse_potential(std::istream& in, const TransitionMatrix& base) {
  const auto a = static_cast<std::size_t>(base.size());
  Matrix values(a, a);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    long i = 0;
    long j = 0;
    std::string value;
    if (!(ss >> i)) continue;
    if (!(ss >> j >> value))
      fail(ErrorCode::ParseError, "potential line " + std::to_string(line_no) + ": expected 'i j value'");
    std::string extra;
    if (ss >> extra) fail(ErrorCode::ParseError, "potential line " + std::to_string(line_no) + ": trailing text");
    if (i < 0 || j < 0 || i >= static_cast<long>(a) || j >= static_cast<long>(a))
      fail(ErrorCode::ParseError, "potential line " + std::to_string(line_no) + ": symbol out of range");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "potential line " + std::to_string(line_no) + ": bad value '" + value + "'");
    }
    values(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
  }
  return LocallyConstantPotential(base, std::move(values));
}

/// Explicit family document: an array of {"n", "offset", "words"} entries,
/// or an object with that array under "entries".
inline FamilyDescriptor load_explicit_family(const json& doc, const TransitionMatrix& base) {
  const json& entries = doc.is_object() ? doc.at("entries") : doc;
  if (!entries.is_array()) fail(ErrorCode::ParseError, "explicit family: expected an array of entries");
  ExplicitFamily fam;
  try {
    for (const auto& e : entries) {
      for (const auto& [key, _] : e.items())
        if (key != "n" && key != "offset" && key != "words")
          fail(ErrorCode::ParseError, "explicit family: unknown key '" + key + "'");
      const int n = e.at("n").get<int>();
      ExplicitEntry entry;
      entry.offset = e.at("offset").get<int>();
      for (const auto& w : e.at("words")) entry.words.push_back(word_from_string(w.get<std::string>(), base.size()));
      if (entry.words.empty()) fail(ErrorCode::ParseError, "explicit family: entry n = " + std::to_string(n) + " has no words");
      entry.length = static_cast<int>(entry.words.front().size());
      if (!fam.entries.emplace(n, std::move(entry)).second)
        fail(ErrorCode::ParseError, "explicit family: duplicate entry n = " + std::to_string(n));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("explicit family: ") + e.what());
  }
  return FamilyDescriptor::explicit_list(base, std::move(fam));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::ConfigError, "cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

/// Header "q,t,survival,exp_reference".
inline void write_survival_csv(std::ostream& out, const SurvivalCurve& c) {
  out << "q,t,survival,exp_reference\n";
  for (int q = 0; q <= c.horizon(); ++q)
    out << q << ',' << format_double(c.t(q)) << ',' << format_double(c.values[static_cast<std::size_t>(q)]) << ','
        << format_double(std::exp(-c.t(q))) << '\n';
}

/// Header "trial,tau,x"; censored trials have empty tau and x.
inline void write_empirical_csv(std::ostream& out, const EmpiricalLaw& law) {
  out << "trial,tau,x\n";
  for (std::size_t i = 0; i < law.tau_by_trial.size(); ++i) {
    const auto t = law.tau_by_trial[i];
    out << i << ',';
    if (t != 0) out << t << ',' << format_double(law.eps * static_cast<double>(t));
    else out << ',';
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const MarkovMeasure& m) {
  json j;
  j["provenance"] = std::string(to_string(m.provenance()));
  j["pi"] = m.stationary();
  json rows = json::array();
  for (std::size_t i = 0; i < static_cast<std::size_t>(m.alphabet()); ++i) {
    const auto r = m.kernel().row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["P"] = rows;
  return j;
}

inline json to_json(const MixingProfile& p) {
  return {{"deltas", p.deltas},
          {"psi", p.psi},
          {"method", std::string(to_string(p.method))},
          {"cutoff", p.cutoff},
          {"validation_depth", p.validation_depth},
          {"max_discrepancy", p.max_discrepancy},
          {"monotone", p.monotone}};
}

inline json to_json(const LemmaReport& r, bool with_traces = true) {
  json j{{"id", r.id},
         {"kind", r.kind == LemmaKind::Identity ? "identity" : "inequality"},
         {"applicable", r.applicable},
         {"diagnostic", r.diagnostic},
         {"pass", r.pass},
         {"checked", r.checked},
         {"worst", finite_or_null(r.worst)},
         {"worst_index", r.worst_index},
         {"note", r.note}};
  if (with_traces) {
    json traces = json::array();
    for (const auto& t : r.traces) traces.push_back({t.index, t.lhs, t.rhs});
    j["traces"] = traces;
  }
  return j;
}

inline json to_json(const TrendVerdict& v) {
  json seq = json::array();
  for (const auto& [n, y] : v.sequence) seq.push_back({n, y});
  return {{"sequence", seq},
          {"verdict", std::string(to_string(v.verdict))},
          {"threshold", v.threshold},
          {"window", v.window},
          {"is_heuristic", v.is_heuristic},
          {"witness", v.witness}};
}

inline json to_json(const HypothesisReport& r) {
  json conds = json::array();
  for (const auto& c : r.conditions) {
    json j{{"id", c.id}, {"description", c.description}, {"status", std::string(to_string(c.status))}};
    if (!c.witness.empty()) j["witness"] = c.witness;
    if (c.witness_n) j["witness_n"] = *c.witness_n;
    if (c.trend) j["trend"] = to_json(*c.trend);
    if (!c.note.empty()) j["note"] = c.note;
    conds.push_back(std::move(j));
  }
  json results = json::array();
  for (const auto& x : r.results) results.push_back({{"name", x.name}, {"conditions", x.conditions}, {"applies", x.applies}});
  json j{{"subject", r.subject}, {"conditions", conds}, {"results", results}, {"exit_code", r.exit_code()}};
  if (!r.banner.empty()) j["banner"] = r.banner;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

inline json to_json(const Example2Report& r) {
  return {{"lambda_A", r.lambda_a},
          {"lambda_B", r.lambda_b},
          {"sup_phi", r.sup_phi},
          {"verbatim_holds", r.verbatim_holds},
          {"log_variant_holds", r.log_holds},
          {"note", r.note},
          {"proposition1", to_json(r.proposition1)}};
}

inline json to_json(const KsResult& k) {
  return {{"ks", k.ks}, {"sup_grid", k.sup_grid}, {"tail_bound", k.tail_bound}, {"argmax_q", k.argmax}};
}

inline json to_json(const GibbsBound& b) {
  return {{"measure", b.measure},
          {"sup_birkhoff", b.sup_birkhoff},
          {"bound", b.bound},
          {"holds", b.holds},
          {"bound_with_constant", b.bound_with_constant},
          {"holds_with_constant", b.holds_with_constant}};
}

inline json to_json(const FamilyRow& row) {
  json j{{"n", row.n}, {"eps", row.eps}, {"words", row.m}, {"eta", row.eta},
         {"regime", row.regime == ReturnRegime::Overlap ? "overlap" : "bridge"}, {"half", row.half}};
  j["nested"] = row.nested ? json(*row.nested) : json(nullptr);
  j["n_mu_half"] = row.n_mu_half ? json(*row.n_mu_half) : json(nullptr);
  return j;
}

/// Human-readable table of a hypothesis report.
inline std::string format_report(const HypothesisReport& r) {
  std::ostringstream os;
  os << r.subject << '\n';
  if (!r.banner.empty()) os << "  ! " << r.banner << '\n';
  for (const auto& c : r.conditions) {
    os << "  " << std::left << std::setw(30) << c.id << std::setw(16) << to_string(c.status) << c.description << '\n';
    if (!c.witness.empty()) os << "      witness: " << c.witness << '\n';
    if (c.trend) os << "      trend: " << to_string(c.trend->verdict) << " (heuristic)\n";
  }
  for (const auto& x : r.results) os << "  => " << x.name << (x.applies ? ": applies" : ": not established") << '\n';
  return os.str();
}

}  // namespace hitlaw
