// Benchmark evaluation: selectivity success rates, sequence recovery by
// complex class and contact-guided decoy ranking.

#ifndef BINDERKIT_BENCH_EVAL_HPP_
#define BINDERKIT_BENCH_EVAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "../scoring/score.hpp"
#include "align.hpp"
#include "contacts.hpp"

namespace binderkit {

inline const std::vector<double>& default_selectivity_thresholds() {
  static const std::vector<double> t = {-10.0, -5.0, 0.0};
  return t;
}

struct SelectivityRate {
  double threshold = 0.0;
  std::optional<double> rate;  // absent for empty input
};

// Fraction of cases with score_on - score_off < threshold.
inline std::vector<SelectivityRate> selectivity_success(
    const std::vector<std::pair<double, double>>& scores,
    const std::vector<double>& thresholds = default_selectivity_thresholds()) {
  std::vector<SelectivityRate> out;
  for (double x : thresholds) {
    SelectivityRate r{x, std::nullopt};
    if (!scores.empty()) {
      int hit = 0;
      for (const auto& [on, off] : scores)
        hit += (on - off) < x ? 1 : 0;
      r.rate = static_cast<double>(hit) / static_cast<double>(scores.size());
    }
    out.push_back(r);
  }
  return out;
}

enum class ComplexClass { Monomer, Homodimer, Heterodimer };

inline const char* complex_class_name(ComplexClass c) {
  switch (c) {
    case ComplexClass::Monomer: return "monomer";
    case ComplexClass::Homodimer: return "homodimer";
    case ComplexClass::Heterodimer: return "heterodimer";
  }
  return "monomer";
}

inline ComplexClass parse_complex_class(std::string_view s) {
  if (s == "monomer") return ComplexClass::Monomer;
  if (s == "homodimer") return ComplexClass::Homodimer;
  if (s == "heterodimer") return ComplexClass::Heterodimer;
  fail(ErrorKind::Contract, "unknown complex class '" + std::string(s) + "'");
}

// Monomer when the binder chain has no Cα 10 Å contact with another chain;
// otherwise homodimer when some contacting partner has aligned identity
// >= `similar`, else heterodimer.
inline ComplexClass classify_complex(const Structure& s, int binder_chain, double similar = 0.9) {
  ContactSet cs = contacts(s, ContactDef::Ca10);
  std::set<int> partners;
  for (const auto& [a, b] : cs.pairs) {
    if (a.chain == binder_chain)
      partners.insert(b.chain);
    if (b.chain == binder_chain)
      partners.insert(a.chain);
  }
  if (partners.empty())
    return ComplexClass::Monomer;
  const std::vector<int> tok = s.chains[binder_chain].tokens();
  for (int c : partners)
    if (align_sequences(tok, s.chains[c].tokens()).identity >= similar)
      return ComplexClass::Homodimer;
  return ComplexClass::Heterodimer;
}

struct RecoveryCase {
  ComplexClass cls = ComplexClass::Heterodimer;
  std::vector<int> designed;
  std::vector<int> native;
  LogProbTable logp;  // per design position, 20 amino-acid log-probabilities
};

struct EvalRow {
  int n_cases = 0;
  int n_positions = 0;
  double nsr = 0.0;
  double ll = 0.0;
  double ppl = 0.0;
};

// Position-pooled NSR and native log-likelihood per class.
inline std::map<ComplexClass, EvalRow> eval_recovery(const std::vector<RecoveryCase>& cases) {
  std::map<ComplexClass, EvalRow> rows;
  std::map<ComplexClass, std::pair<long, double>> acc;  // matches, ll sum
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const RecoveryCase& c = cases[k];
    if (c.designed.size() != c.native.size() || c.logp.size() != c.native.size())
      fail(ErrorKind::Contract, "recovery case " + std::to_string(k) + ": designed/native/logp lengths " +
                                    std::to_string(c.designed.size()) + "/" + std::to_string(c.native.size()) +
                                    "/" + std::to_string(c.logp.size()) + " differ");
    EvalRow& r = rows[c.cls];
    auto& [hit, ll] = acc[c.cls];
    ++r.n_cases;
    for (std::size_t i = 0; i < c.native.size(); ++i) {
      hit += c.designed[i] == c.native[i] ? 1 : 0;
      ll += detail::table_at(c.logp, "recovery", i, c.native[i]);
      ++r.n_positions;
    }
  }
  for (auto& [cls, r] : rows) {
    const auto& [hit, ll] = acc[cls];
    if (r.n_positions > 0) {
      r.nsr = static_cast<double>(hit) / r.n_positions;
      r.ll = ll / r.n_positions;
      r.ppl = perplexity(r.ll);
    }
  }
  return rows;
}

struct DecoyScore {
  int index = 0;  // position in the input list
  std::string id;
  int score = 0;
};

// Score = top-k predicted contacts present (heavy8) between the first two
// chains of the decoy. Sorted by descending score, input order on ties.
inline std::vector<DecoyScore> rank_decoys(const std::vector<Structure>& decoys,
                                           const std::vector<ScoredContact>& predicted, int top_k) {
  const std::vector<ScoredContact> top = top_contacts(predicted, top_k);
  std::vector<DecoyScore> out;
  for (int d = 0; d < static_cast<int>(decoys.size()); ++d) {
    const Structure& s = decoys[d];
    if (s.chains.size() < 2)
      fail(ErrorKind::Contract, "decoy '" + s.id + "' has " + std::to_string(s.chains.size()) +
                                    " chain(s), need 2");
    std::set<std::pair<int, int>> realized = interface_pairs(contacts(s, ContactDef::Heavy8), 0, 1);
    DecoyScore ds{d, s.id, 0};
    for (const ScoredContact& c : top)
      ds.score += realized.count({c.i, c.j}) ? 1 : 0;
    out.push_back(ds);
  }
  std::stable_sort(out.begin(), out.end(), [](const DecoyScore& a, const DecoyScore& b) { return a.score > b.score; });
  return out;
}

} // namespace binderkit

#endif
