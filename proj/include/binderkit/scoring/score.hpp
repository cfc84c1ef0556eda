// Likelihood-based scores for designed binder sequences.
//
// With l_i = log p_i under the bound complex, l^u_i under the unbound
// binder, and M the set of binder positions that differ from wild type:
//   ll        mean over binder positions of l_i(a_i)
//   ll_global mean over complex positions of l_i(a_i)
//   ll_mt     mean over M of l_i(a_i)
//   ll_ref    mean over M of l_i(a_i) - l_i(wt_i)         (0 when M is empty)
//   ll_cd     ll - mean over binder positions of l^u_i(a_i)
//   ll_cd_ref ll_ref - mean over M of l^u_i(a_i) - l^u_i(wt_i)
// ll_mt and ll_cd_ref are absent when M is empty.

#ifndef BINDERKIT_SCORING_SCORE_HPP_
#define BINDERKIT_SCORING_SCORE_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "../decode/contrastive.hpp"

namespace binderkit {

// Row i holds log-probabilities over the 20 amino acids; an empty row marks
// a position the table does not cover.
using LogProbTable = std::vector<std::vector<double>>;

struct ScoreReport {
  double ll = 0.0;
  double ll_global = 0.0;
  std::optional<double> ll_mt;
  std::optional<double> ll_ref;
  double ll_cd = 0.0;
  std::optional<double> ll_cd_ref;
  int n_binder = 0;
  int n_complex = 0;
  int n_mutated = 0;
};

namespace detail {

inline double table_at(const LogProbTable& t, const char* name, std::size_t i, int token) {
  if (i >= t.size() || t[i].empty())
    fail(ErrorKind::Contract, std::string(name) + " table has no row for position " + std::to_string(i));
  if (token < 0 || token >= static_cast<int>(t[i].size()))
    fail(ErrorKind::Contract, std::string(name) + " table row " + std::to_string(i) + " lacks token " +
                                  std::to_string(token));
  return t[i][token];
}

} // namespace detail

// designed / wildtype: binder tokens. complex_tokens: full complex sequence
// scored against complex_logp.
inline ScoreReport score_sequence(const std::vector<int>& designed, const std::vector<int>& wildtype,
                                  const LogProbTable& bound_logp, const LogProbTable& unbound_logp,
                                  const LogProbTable& complex_logp, const std::vector<int>& complex_tokens) {
  if (designed.size() != wildtype.size())
    fail(ErrorKind::Contract, "designed length " + std::to_string(designed.size()) + " != wild-type length " +
                                  std::to_string(wildtype.size()));
  if (designed.empty())
    fail(ErrorKind::Contract, "empty binder sequence");
  ScoreReport r;
  r.n_binder = static_cast<int>(designed.size());
  r.n_complex = static_cast<int>(complex_tokens.size());
  double ll = 0, llu = 0, mt = 0, ref = 0, refu = 0;
  for (std::size_t i = 0; i < designed.size(); ++i) {
    const double l = detail::table_at(bound_logp, "bound", i, designed[i]);
    const double lu = detail::table_at(unbound_logp, "unbound", i, designed[i]);
    ll += l;
    llu += lu;
    if (designed[i] != wildtype[i]) {
      ++r.n_mutated;
      mt += l;
      ref += l - detail::table_at(bound_logp, "bound", i, wildtype[i]);
      refu += lu - detail::table_at(unbound_logp, "unbound", i, wildtype[i]);
    }
  }
  r.ll = ll / r.n_binder;
  r.ll_cd = r.ll - llu / r.n_binder;
  if (r.n_mutated > 0) {
    r.ll_mt = mt / r.n_mutated;
    r.ll_ref = ref / r.n_mutated;
    r.ll_cd_ref = *r.ll_ref - refu / r.n_mutated;
  } else {
    r.ll_ref = 0.0;
  }
  if (r.n_complex == 0)
    fail(ErrorKind::Contract, "empty complex sequence");
  double g = 0;
  for (std::size_t i = 0; i < complex_tokens.size(); ++i)
    g += detail::table_at(complex_logp, "complex", i, complex_tokens[i]);
  r.ll_global = g / r.n_complex;
  return r;
}

inline double perplexity(double mean_ll) { return std::exp(-mean_ll); }

// Teacher-forced log-probability rows for `positions` under the
// left-to-right order, with `tokens` [N] as the full sequence.
template <typename T>
LogProbTable logprob_table(RedNet<T>& model, const ComplexFeatures& f, const std::vector<int>& tokens,
                           const std::vector<int>& positions) {
  NdArray<T> logits = forward_logits(model, f, tokens, DecodingOrder::left_to_right(f.design));
  LogProbTable out;
  for (int p : positions) {
    std::vector<double> row = amino_acid_probs(logits, p);
    for (double& v : row)
      v = std::log(v);
    out.push_back(std::move(row));
  }
  return out;
}

} // namespace binderkit

#endif
