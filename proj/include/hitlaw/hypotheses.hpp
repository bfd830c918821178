#pragma once

// Finite-range diagnostics for the hypotheses of Proposition 1, Corollary 1,
// Theorem 1 and Example 2. "-> 0" conditions get heuristic trend verdicts.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hitlaw/error.hpp"
#include "hitlaw/families.hpp"
#include "hitlaw/measures.hpp"

namespace hitlaw {

inline constexpr double kTrendThreshold = 0.1;

enum class Trend { DecreasingBelowThreshold, Increasing, Inconclusive };

inline std::string_view to_string(Trend t) {
  switch (t) {
    case Trend::DecreasingBelowThreshold: return "decreasing-below-threshold";
    case Trend::Increasing: return "increasing";
    default: return "inconclusive";
  }
}

struct TrendVerdict {
  std::vector<std::pair<int, double>> sequence;
  Trend verdict = Trend::Inconclusive;
  double threshold = kTrendThreshold;
  double window = 0.5;
  bool is_heuristic = true;
  std::string witness;  // first point that breaks the decreasing verdict
};

/// decreasing-below-threshold iff the last half (at least two points) is
/// strictly decreasing and the final value is below the threshold;
/// increasing iff the last half is nondecreasing with a net rise.
inline TrendVerdict trend_verdict(std::vector<std::pair<int, double>> seq, double threshold = kTrendThreshold) {
  TrendVerdict v;
  v.sequence = std::move(seq);
  v.threshold = threshold;
  const std::size_t k = v.sequence.size();
  if (k < 2) {
    v.witness = "fewer than two points";
    return v;
  }
  const std::size_t first = std::min(k / 2, k - 2);
  bool decreasing = true;
  bool nondecreasing = true;
  for (std::size_t i = first + 1; i < k; ++i) {
    const auto& [n0, y0] = v.sequence[i - 1];
    const auto& [n1, y1] = v.sequence[i];
    if (!(y1 < y0)) {
      if (decreasing) {
        std::ostringstream os;
        os << "value does not decrease from n=" << n0 << " (" << y0 << ") to n=" << n1 << " (" << y1 << ")";
        v.witness = os.str();
      }
      decreasing = false;
    }
    if (y1 < y0) nondecreasing = false;
  }
  const double last = v.sequence.back().second;
  if (decreasing && last < threshold) {
    v.verdict = Trend::DecreasingBelowThreshold;
  } else {
    if (decreasing) {
      std::ostringstream os;
      os << "final value " << last << " at n=" << v.sequence.back().first << " is not below " << threshold;
      v.witness = os.str();
    }
    v.verdict = nondecreasing && last > v.sequence[first].second ? Trend::Increasing : Trend::Inconclusive;
  }
  return v;
}

enum class ConditionStatus { HoldsAtRange, Fails, Unavailable };

inline std::string_view to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::HoldsAtRange: return "holds-at-range";
    case ConditionStatus::Fails: return "fails";
    default: return "unavailable";
  }
}

struct Condition {
  std::string id;
  std::string description;
  ConditionStatus status = ConditionStatus::Unavailable;
  std::string witness;
  std::optional<int> witness_n;
  std::optional<TrendVerdict> trend;
  std::string note;
};

struct ApplicableResult {
  std::string name;
  std::vector<std::string> conditions;
  bool applies = false;
};

struct HypothesisReport {
  std::string subject;
  std::vector<Condition> conditions;
  std::vector<ApplicableResult> results;
  std::string banner;  // set when the measure is outside the literal hypotheses
  std::vector<std::string> notes;

  const Condition* find(std::string_view id) const {
    for (const auto& c : conditions)
      if (c.id == id) return &c;
    return nullptr;
  }

  /// 0 if some result applies, else 2 if any condition fails, else 3.
  int exit_code() const {
    for (const auto& r : results)
      if (r.applies) return 0;
    for (const auto& c : conditions)
      if (c.status == ConditionStatus::Fails) return 2;
    return 3;
  }
};

namespace detail {

inline Condition trend_condition(std::string id, std::string description, std::vector<std::pair<int, double>> seq) {
  Condition c;
  c.id = std::move(id);
  c.description = std::move(description);
  if (seq.size() < 2) {
    c.status = ConditionStatus::Unavailable;
    c.note = "fewer than two values in range";
    if (!seq.empty()) c.trend = trend_verdict(std::move(seq));
    return c;
  }
  TrendVerdict v = trend_verdict(std::move(seq));
  c.status = v.verdict == Trend::DecreasingBelowThreshold ? ConditionStatus::HoldsAtRange : ConditionStatus::Fails;
  if (c.status == ConditionStatus::Fails) c.witness = v.witness;
  c.trend = std::move(v);
  return c;
}

inline void settle(HypothesisReport& rep) {
  for (auto& r : rep.results) {
    r.applies = !r.conditions.empty();
    for (const auto& id : r.conditions) {
      const Condition* c = rep.find(id);
      if (!c || c->status != ConditionStatus::HoldsAtRange) r.applies = false;
    }
  }
}

inline std::vector<int> range_of(const FamilyDescriptor& f, int n_min, int n_max) {
  std::vector<int> ns;
  for (int n = std::max(n_min, 1); n <= n_max; ++n)
    if (f.instantiable(n)) ns.push_back(n);
  return ns;
}

inline void require_anchor(const FamilyDescriptor& f, Anchor a, const char* what) {
  if (f.anchor() != a) fail(ErrorCode::DescriptorInvalid, std::string(what) + " needs a " + std::string(to_string(a)) + " family");
}

/// Shrinking check over consecutive indices in range.
inline Condition shrinking_condition(const FamilyDescriptor& f, const std::vector<int>& ns, NestingAlignment align,
                                     std::string id, std::string description) {
  Condition c;
  c.id = std::move(id);
  c.description = std::move(description);
  c.status = ConditionStatus::Unavailable;
  for (int n : ns) {
    if (!f.instantiable(n + 1)) continue;
    const NestingResult r = check_nested(f, n, align);
    if (!r.holds) {
      c.status = ConditionStatus::Fails;
      c.witness_n = n;
      c.witness = "word " + word_to_string(*r.witness, f.base().size()) + " of U_" + std::to_string(n + 1) +
                  " restricts outside U_" + std::to_string(n);
      return c;
    }
    c.status = ConditionStatus::HoldsAtRange;
  }
  if (c.status == ConditionStatus::Unavailable) c.note = "no consecutive pair in range";
  return c;
}

inline double measure_of_index(const FamilyDescriptor& f, const MarkovMeasure& m, int k) {
  if (k == 0) return 1.0;
  return set_measure(m, f.instantiate(k));
}

}  // namespace detail

/// eta_n >= n for every n (equivalently eta_n = n) and a trend on n eps_n.
inline HypothesisReport check_proposition1(const FamilyDescriptor& f, const MarkovMeasure& m, int n_min, int n_max) {
  detail::require_anchor(f, Anchor::OneSided, "Proposition 1");
  HypothesisReport rep;
  rep.subject = "proposition1";
  Condition eta;
  eta.id = "eta-equals-n";
  eta.description = "eta_n = n (equivalently eta_n >= n)";
  eta.status = ConditionStatus::Unavailable;
  std::vector<std::pair<int, double>> n_eps;
  for (int n : detail::range_of(f, n_min, n_max)) {
    const WindowSet u = f.instantiate(n);
    const ReturnTimeRecord rt = return_time(u);
    if (eta.status != ConditionStatus::Fails) {
      if (rt.eta < n) {
        eta.status = ConditionStatus::Fails;
        eta.witness_n = n;
        eta.witness = "eta_" + std::to_string(n) + " = " + std::to_string(rt.eta) + " via orbit segment " +
                      word_to_string(rt.configuration(), f.base().size());
      } else {
        eta.status = ConditionStatus::HoldsAtRange;
      }
    }
    n_eps.emplace_back(n, n * set_measure(m, u));
  }
  rep.conditions.push_back(std::move(eta));
  rep.conditions.push_back(detail::trend_condition("n-eps-to-zero", "n mu(U_n) -> 0", std::move(n_eps)));
  rep.results.push_back({"Proposition 1", {"eta-equals-n", "n-eps-to-zero"}, false});
  detail::settle(rep);
  return rep;
}

/// Shrinking and a trend on n mu(U_{floor(eta_n/2)}).
inline HypothesisReport check_corollary1(const FamilyDescriptor& f, const MarkovMeasure& m, int n_min, int n_max) {
  detail::require_anchor(f, Anchor::OneSided, "Corollary 1");
  HypothesisReport rep;
  rep.subject = "corollary1";
  const auto ns = detail::range_of(f, n_min, n_max);
  rep.conditions.push_back(detail::shrinking_condition(f, ns, NestingAlignment::SetInclusion, "shrinking",
                                                       "U_{n+1} subset of U_n"));
  std::vector<std::pair<int, double>> seq;
  std::string missing;
  for (int n : ns) {
    const int half = return_time(f.instantiate(n)).eta / 2;
    if (half >= 1 && f.instantiable(half))
      seq.emplace_back(n, n * set_measure(m, f.instantiate(half)));
    else
      missing += (missing.empty() ? "" : ",") + std::to_string(n);
  }
  Condition t = detail::trend_condition("n-mu-half-to-zero", "n mu(U_{floor(eta_n/2)}) -> 0", std::move(seq));
  if (!missing.empty()) t.note += (t.note.empty() ? "" : "; ") + std::string("U_{floor(eta_n/2)} outside the family for n = ") + missing;
  rep.conditions.push_back(std::move(t));
  rep.results.push_back({"Corollary 1", {"shrinking", "n-mu-half-to-zero"}, false});
  detail::settle(rep);
  return rep;
}

/// True when m is the Parry measure of its base (1e-12).
inline bool is_parry(const MarkovMeasure& m) {
  const MarkovMeasure p = parry(m.base());
  return max_abs_diff(p.kernel(), m.kernel()) <= 1e-12 &&
         max_abs_diff(std::span<const double>(p.stationary()), std::span<const double>(m.stationary())) <= 1e-12;
}

/// Theorem 1 cases for a centered family.
/// Case 1: U_{n+1} subset of U_n (set inclusion) and n mu(U_{floor(eta/2)}) -> 0.
/// Case 2: k(n) = eta_n - n - 1 >= 0 nondecreasing and n mu(U_{k(n)}) -> 0.
/// Case 3: n min_side mu(V_n) -> 0 over the prefix and suffix envelopes.
inline HypothesisReport check_theorem1(const FamilyDescriptor& f, const MarkovMeasure& m, int n_min, int n_max) {
  detail::require_anchor(f, Anchor::Centered, "Theorem 1");
  HypothesisReport rep;
  rep.subject = "theorem1";
  if (!is_parry(m))
    rep.banner = "beyond-theorem-scope: measure is not the Parry measure; the checks use only its psi-mixing";
  const auto ns = detail::range_of(f, n_min, n_max);
  std::vector<int> etas;
  for (int n : ns) etas.push_back(return_time(f.instantiate(n)).eta);

  Condition nested = detail::shrinking_condition(f, ns, NestingAlignment::SetInclusion, "case1-nested",
                                                 "sigma^{-(n+1)} U_{n+1} subset of sigma^{-n} U_n");
  const Condition literal = detail::shrinking_condition(f, ns, NestingAlignment::Literal, "nested-literal", "");
  nested.note = "literal alignment w[0,2n): " + std::string(to_string(literal.status));
  if (literal.witness_n) nested.note += " (n = " + std::to_string(*literal.witness_n) + ", " + literal.witness + ")";
  rep.conditions.push_back(std::move(nested));

  std::vector<std::pair<int, double>> half_seq;
  std::vector<std::pair<int, double>> k_seq;
  std::vector<std::pair<int, double>> env_seq;
  Condition kcond;
  kcond.id = "case2-k-nondecreasing";
  kcond.description = "k(n) = eta_n - n - 1 is >= 0 and nondecreasing";
  kcond.status = ConditionStatus::Unavailable;
  std::string missing_half;
  std::string missing_k;
  std::ostringstream decomp;
  int prev_k = -1;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const int n = ns[i];
    const int eta = etas[i];
    const int half = eta / 2;
    if (f.instantiable(half) || half == 0)
      half_seq.emplace_back(n, n * detail::measure_of_index(f, m, half));
    else
      missing_half += (missing_half.empty() ? "" : ",") + std::to_string(n);

    const int k = eta - n - 1;
    decomp << "n=" << n << ": eta=" << eta;
    if (eta - n >= 1) {
      decomp << " (k,delta) in {";
      for (int d = 1; d <= eta - n; ++d) decomp << (d > 1 ? " " : "") << "(" << eta - n - d << "," << d << ")";
      decomp << "}";
    }
    decomp << "; ";
    if (kcond.status != ConditionStatus::Fails) {
      if (k < 0) {
        kcond.status = ConditionStatus::Fails;
        kcond.witness_n = n;
        kcond.witness = "k(" + std::to_string(n) + ") = " + std::to_string(k) + " < 0 (eta = " + std::to_string(eta) + ")";
      } else if (k < prev_k) {
        kcond.status = ConditionStatus::Fails;
        kcond.witness_n = n;
        kcond.witness = "k(" + std::to_string(n) + ") = " + std::to_string(k) + " < k(previous) = " + std::to_string(prev_k);
      } else {
        kcond.status = ConditionStatus::HoldsAtRange;
      }
    }
    if (k >= 0) {
      if (k == 0 || f.instantiable(k))
        k_seq.emplace_back(n, n * detail::measure_of_index(f, m, k));
      else
        missing_k += (missing_k.empty() ? "" : ",") + std::to_string(n);
    }
    prev_k = std::max(prev_k, k);

    const WindowSet u = f.instantiate(n);
    if (half + 1 <= u.length()) {
      const double pre = set_measure(m, envelope(u, eta, EnvelopeSide::Prefix).set);
      const double suf = set_measure(m, envelope(u, eta, EnvelopeSide::Suffix).set);
      env_seq.emplace_back(n, n * std::min(pre, suf));
    }
  }
  kcond.note = "delta = 1 reading; general decompositions eta = n + k + delta: " + decomp.str();

  Condition c1 = detail::trend_condition("case1-n-mu-half-to-zero", "n mu(U_{floor(eta_n/2)}) -> 0", std::move(half_seq));
  if (!missing_half.empty()) c1.note = "U_{floor(eta_n/2)} outside the family for n = " + missing_half;
  rep.conditions.push_back(std::move(c1));
  rep.conditions.push_back(std::move(kcond));
  Condition c2 = detail::trend_condition("case2-n-mu-k-to-zero", "n mu(U_{k(n)}) -> 0", std::move(k_seq));
  if (!missing_k.empty()) c2.note = "U_{k(n)} outside the family for n = " + missing_k;
  rep.conditions.push_back(std::move(c2));
  rep.conditions.push_back(
      detail::trend_condition("case3-n-mu-envelope-to-zero", "n min(mu(V_prefix), mu(V_suffix)) -> 0", std::move(env_seq)));

  rep.results.push_back({"Theorem 1 case 1", {"case1-nested", "case1-n-mu-half-to-zero"}, false});
  rep.results.push_back({"Theorem 1 case 2", {"case2-k-nondecreasing", "case2-n-mu-k-to-zero"}, false});
  rep.results.push_back({"Theorem 1 case 3", {"case3-n-mu-envelope-to-zero"}, false});
  detail::settle(rep);
  return rep;
}

struct Example2Report {
  double lambda_a = 0.0;
  double lambda_b = 0.0;
  double sup_phi = 0.0;
  bool verbatim_holds = false;  // 3 ||phi|| < lambda_A - lambda_B
  bool log_holds = false;       // 3 ||phi|| < log lambda_A - log lambda_B
  std::string note;
  HypothesisReport proposition1;
};

inline Example2Report check_example2(const TransitionMatrix& a, std::vector<Symbol> block, Symbol entry,
                                     const LocallyConstantPotential& phi, const MarkovMeasure& m, int n_min,
                                     int n_max) {
  const FamilyDescriptor f = FamilyDescriptor::submatrix(a, block, entry);
  Example2Report r;
  r.lambda_a = perron(a, 1e-14).eigenvalue;
  r.lambda_b =
      perron(TransitionMatrix::validate(a.principal_submatrix(std::get<SubmatrixFamily>(f.kind()).block)), 1e-14)
          .eigenvalue;
  r.sup_phi = phi.sup_norm();
  r.verbatim_holds = 3.0 * r.sup_phi < r.lambda_a - r.lambda_b;
  r.log_holds = 3.0 * r.sup_phi < std::log(r.lambda_a) - std::log(r.lambda_b);
  r.note = "verbatim compares Perron eigenvalues; the log variant compares entropies; neither is asserted as the intended hypothesis";
  r.proposition1 = check_proposition1(f, m, n_min, n_max);
  return r;
}

}  // namespace hitlaw
