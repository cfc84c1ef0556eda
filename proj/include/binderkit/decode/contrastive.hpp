// Autoregressive sampling with optional contrast against an alternative
// context (off-target complex or unbound binder).
//
// Probabilities are the model softmax renormalized over the 20 amino acids.
// At step t with p_on, p_off:
//   l(a)  = (1 + alpha) log p_on(a) - alpha log p_off(a)
//   S_t   = {a : p_on(a) >= beta * max p_on}
//   s_t  ~ softmax over S_t of l / tau
// The emitted token is written into both contexts. Temperatures at or below
// kGreedyTau select argmax l within S_t, lowest index on ties.

#ifndef BINDERKIT_DECODE_CONTRASTIVE_HPP_
#define BINDERKIT_DECODE_CONTRASTIVE_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "../model/rednet.hpp"

namespace binderkit {

inline constexpr double kProbFloor = 1e-12;
inline constexpr double kGreedyTau = 1e-3;

enum class DecodeMode { Standard, ContrastOfftarget, ContrastUnbound };

inline const char* mode_name(DecodeMode m) {
  switch (m) {
    case DecodeMode::Standard: return "standard";
    case DecodeMode::ContrastOfftarget: return "contrast_offtarget";
    case DecodeMode::ContrastUnbound: return "contrast_unbound";
  }
  return "?";
}

inline DecodeMode parse_mode(const std::string& s) {
  if (s == "standard") return DecodeMode::Standard;
  if (s == "contrast_offtarget") return DecodeMode::ContrastOfftarget;
  if (s == "contrast_unbound") return DecodeMode::ContrastUnbound;
  fail(ErrorKind::Contract, "unknown decode mode '" + s + "'");
}

struct DecodeConfig {
  double alpha = 1.0;
  double beta = 0.9;
  double tau = 1e-3;
  std::uint64_t seed = 0;
  DecodeMode mode = DecodeMode::ContrastOfftarget;

  void validate() const {
    if (!(alpha >= 0.0))
      fail(ErrorKind::Contract, "alpha must be >= 0");
    if (!(beta >= 0.0 && beta <= 1.0))
      fail(ErrorKind::Contract, "beta must lie in [0, 1]");
    if (!(tau > 0.0))
      fail(ErrorKind::Contract, "temperature must be > 0");
  }
};

struct ContrastScores {
  std::vector<double> scores;
  bool clamped = false;  // some probability fell below kProbFloor
};

inline ContrastScores contrastive_logits(const std::vector<double>& p_on, const std::vector<double>& p_off,
                                         double alpha) {
  if (p_on.size() != p_off.size())
    fail(ErrorKind::Dimension, "probability vectors differ in length: " + std::to_string(p_on.size()) + " vs " +
                                   std::to_string(p_off.size()));
  ContrastScores out;
  out.scores.resize(p_on.size());
  for (std::size_t a = 0; a < p_on.size(); ++a) {
    double on = p_on[a], off = p_off[a];
    if (on < kProbFloor || off < kProbFloor)
      out.clamped = true;
    on = std::max(on, kProbFloor);
    off = std::max(off, kProbFloor);
    out.scores[a] = (1.0 + alpha) * std::log(on) - alpha * std::log(off);
  }
  return out;
}

// Tokens with p >= beta * max p, ascending. The argmax always qualifies.
inline std::vector<int> candidate_set(const std::vector<double>& p, double beta) {
  require(!p.empty(), "candidate_set on an empty distribution");
  const double mx = *std::max_element(p.begin(), p.end());
  std::vector<int> out;
  for (std::size_t a = 0; a < p.size(); ++a)
    if (p[a] >= beta * mx)
      out.push_back(static_cast<int>(a));
  return out;
}

// Categorical over `cand` from scores / tau; greedy one-hot at small tau.
inline std::vector<double> step_distribution(const std::vector<double>& scores, const std::vector<int>& cand,
                                             double tau) {
  std::vector<double> q(cand.size(), 0.0);
  if (tau <= kGreedyTau) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cand.size(); ++i)
      if (scores[cand[i]] > scores[cand[best]])
        best = i;
    q[best] = 1.0;
    return q;
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (int a : cand)
    mx = std::max(mx, scores[a] / tau);
  double z = 0.0;
  for (std::size_t i = 0; i < cand.size(); ++i)
    z += (q[i] = std::exp(scores[cand[i]] / tau - mx));
  for (double& v : q)
    v /= z;
  return q;
}

inline int sample_index(const std::vector<double>& q, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    acc += q[i];
    if (u < acc)
      return static_cast<int>(i);
  }
  for (std::size_t i = q.size(); i-- > 0;)
    if (q[i] > 0)
      return static_cast<int>(i);
  return 0;
}

// Model distribution over the 20 amino acids from a row of logits.
template <typename T>
std::vector<double> amino_acid_probs(const NdArray<T>& logits, int row) {
  const std::int64_t r = logits.dim(1);
  std::vector<double> p(kNumAminoAcids);
  double mx = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < kNumAminoAcids; ++a)
    mx = std::max(mx, static_cast<double>(logits[row * r + a]));
  double z = 0.0;
  for (int a = 0; a < kNumAminoAcids; ++a)
    z += (p[a] = std::exp(static_cast<double>(logits[row * r + a]) - mx));
  for (double& v : p)
    v /= z;
  return p;
}

// ---------------------------------------------------------------------------
// Contexts

// One featurized context with a running token buffer and cached encoder.
template <typename T>
class ContextState {
public:
  ContextState(RedNet<T>& model, const ComplexFeatures& f, DecodingOrder order)
      : model_(&model), f_(&f), order_(std::move(order)), tokens_(f.masked_tokens()) {
    order_.ranks(f.design);
    Tape<T> tape;
    Bound<T> P(tape, model.params);
    enc_ = encode(P, model, f).value();
  }

  std::vector<double> probs(int position) const {
    Tape<T> tape;
    Bound<T> P(tape, model_->params);
    NdArray<T> logits = decode(P, *model_, *f_, tape.constant(enc_), tokens_, order_).logits.value();
    return amino_acid_probs(logits, position);
  }
  void set(int position, int token) { tokens_[position] = token; }
  const std::vector<int>& tokens() const { return tokens_; }

private:
  RedNet<T>* model_;
  const ComplexFeatures* f_;
  DecodingOrder order_;
  std::vector<int> tokens_;
  NdArray<T> enc_;
};

struct DecodeContext {
  const ComplexFeatures* on = nullptr;
  const ComplexFeatures* off = nullptr;  // null for standard decoding
  std::vector<int> on_positions;         // L design residues of the on context
  std::vector<int> off_positions;        // matching residue in `off`, -1 when unmatched
  std::vector<int> order;                // permutation of 0..L-1

  int length() const { return static_cast<int>(on_positions.size()); }
};

// Context over the design residues of `on` in residue order. The
// alternative context, when given, is matched position by position through
// `off_positions` (default: the design residues of `off` in order).
inline DecodeContext make_context(const ComplexFeatures& on, const ComplexFeatures* off,
                                  std::optional<std::vector<int>> off_positions, std::uint64_t order_seed,
                                  bool left_to_right = false) {
  DecodeContext ctx;
  ctx.on = &on;
  ctx.off = off;
  ctx.on_positions = on.design_positions();
  const int L = ctx.length();
  if (L == 0)
    fail(ErrorKind::Contract, "no design positions to decode");
  if (off) {
    if (off_positions) {
      ctx.off_positions = *off_positions;
    } else {
      ctx.off_positions = off->design_positions();
      if (static_cast<int>(ctx.off_positions.size()) != L)
        fail(ErrorKind::Contract, "design position count differs between contexts: " + std::to_string(L) +
                                      " vs " + std::to_string(ctx.off_positions.size()));
    }
    require(static_cast<int>(ctx.off_positions.size()) == L, "position correspondence must cover L positions");
    for (int p : ctx.off_positions)
      if (p >= 0 && (p >= off->n || !off->design[p]))
        fail(ErrorKind::Contract, "alternative position " + std::to_string(p) + " is not a design residue");
  }
  ctx.order.resize(L);
  for (int i = 0; i < L; ++i)
    ctx.order[i] = i;
  if (!left_to_right) {
    Rng rng(order_seed);
    rng.shuffle(ctx.order);
  }
  return ctx;
}

struct StepTrace {
  int step = 0;
  int position = 0;  // index into the L design positions
  bool matched = true;
  bool clamped = false;
  std::vector<double> p_on, p_off;
  std::vector<double> scores;
  std::vector<int> candidates;
  std::vector<double> q;  // categorical over candidates
  int token = 0;
};

struct DecodeResult {
  std::vector<int> tokens;  // [L], design positions in residue order
  std::string sequence;
  double mean_ll = 0.0;     // mean on-context log p of emitted tokens
  int unmatched_steps = 0;
  std::vector<StepTrace> trace;
};

template <typename T>
DecodeResult contrastive_decode(RedNet<T>& model, const DecodeContext& ctx, const DecodeConfig& cfg) {
  cfg.validate();
  const int L = ctx.length();
  const bool contrast = cfg.mode != DecodeMode::Standard && ctx.off != nullptr;
  if (cfg.mode != DecodeMode::Standard && !ctx.off)
    fail(ErrorKind::Contract, std::string("mode ") + mode_name(cfg.mode) + " needs an alternative context");

  DecodingOrder on_order;
  for (int i : ctx.order)
    on_order.positions.push_back(ctx.on_positions[i]);
  ContextState<T> on(model, *ctx.on, on_order);
  std::optional<ContextState<T>> off;
  if (contrast) {
    DecodingOrder off_order;
    std::vector<std::uint8_t> used(ctx.off->n, 0);
    for (int i : ctx.order)
      if (ctx.off_positions[i] >= 0) {
        off_order.positions.push_back(ctx.off_positions[i]);
        used[ctx.off_positions[i]] = 1;
      }
    for (int p : ctx.off->design_positions())  // unmatched alternative residues stay masked, last
      if (!used[p])
        off_order.positions.push_back(p);
    off.emplace(model, *ctx.off, off_order);
  }

  Rng rng(cfg.seed);
  DecodeResult res;
  res.tokens.assign(L, kTokenMask);
  double ll = 0.0;
  for (int t = 0; t < L; ++t) {
    StepTrace st;
    st.step = t;
    st.position = ctx.order[t];
    try {
      const int pos_on = ctx.on_positions[st.position];
      st.p_on = on.probs(pos_on);
      const int pos_off = contrast ? ctx.off_positions[st.position] : -1;
      st.matched = !contrast || pos_off >= 0;
      if (contrast && pos_off >= 0) {
        st.p_off = off->probs(pos_off);
        ContrastScores cs = contrastive_logits(st.p_on, st.p_off, cfg.alpha);
        st.scores = std::move(cs.scores);
        st.clamped = cs.clamped;
      } else {
        ContrastScores cs = contrastive_logits(st.p_on, st.p_on, 0.0);
        st.scores = std::move(cs.scores);
        st.clamped = cs.clamped;
        if (contrast)
          ++res.unmatched_steps;
      }
      st.candidates = candidate_set(st.p_on, cfg.beta);
      st.q = step_distribution(st.scores, st.candidates, cfg.tau);
      st.token = st.candidates[sample_index(st.q, rng.uniform())];
      on.set(pos_on, st.token);
      if (contrast && pos_off >= 0)
        off->set(pos_off, st.token);
    } catch (const Error& e) {
      fail(ErrorKind::Model, "decoding failed at step " + std::to_string(t) + ": " + e.what());
    }
    res.tokens[st.position] = st.token;
    ll += std::log(std::max(st.p_on[st.token], kProbFloor));
    res.trace.push_back(std::move(st));
  }
  res.mean_ll = ll / L;
  res.sequence = sequence_string(res.tokens);
  return res;
}

// ---------------------------------------------------------------------------
// Affinity formulation

// Binder-only structure: every non-design chain removed.
inline Structure unbound_binder(const Structure& bound) {
  Structure s = bound;
  s.chains.clear();
  for (const Chain& c : bound.chains)
    if (c.role == ChainRole::Design)
      s.chains.push_back(c);
  if (s.chains.empty())
    fail(ErrorKind::Contract, "structure has no design chain");
  return s;
}

template <typename T>
DecodeResult decode_affinity(RedNet<T>& model, const ComplexFeatures& bound, const ComplexFeatures& unbound,
                             DecodeConfig cfg, std::uint64_t order_seed, bool left_to_right = false) {
  if (cfg.mode == DecodeMode::ContrastOfftarget)
    cfg.mode = DecodeMode::ContrastUnbound;
  DecodeContext ctx = make_context(bound, &unbound, std::nullopt, order_seed, left_to_right);
  return contrastive_decode(model, ctx, cfg);
}

} // namespace binderkit

#endif
