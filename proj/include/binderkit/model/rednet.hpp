// Encoder-decoder for fixed-backbone sequence design.
//
// Encoder: token embedding (design positions MASK) -> EGAT layers over the
// atom graph -> GAT layers over the residue k-NN graph -> LayerNorm.
//
// Decoder: two streams per position over L pre-LN attention blocks.
//   f_i  content stream, starts at e_i + Emb(token_i)
//   b_i  query stream, starts at e_i, never reads token_i
// Queries are [f; b], keys [f; e]. Key f_j is visible to query f_i when
// j == i or vis(i, j), and to query b_i when vis(i, j), where
//   vis(i, j) = j != i and (rank_j < rank_i or both are non-design)
// with rank the position in the decoding order (-1 for non-design). Keys e_j
// are always visible. Logits come from b^L, so position t depends only on
// structure, non-design tokens and design tokens earlier in the order.

#ifndef BINDERKIT_MODEL_REDNET_HPP_
#define BINDERKIT_MODEL_REDNET_HPP_

#include <optional>
#include <string>
#include <vector>

#include "features.hpp"

namespace binderkit {

// ---------------------------------------------------------------------------
// Decoding order

struct DecodingOrder {
  std::vector<int> positions;  // residue indices in decoding order

  static DecodingOrder left_to_right(const std::vector<std::uint8_t>& design) {
    DecodingOrder o;
    for (int i = 0; i < static_cast<int>(design.size()); ++i)
      if (design[i])
        o.positions.push_back(i);
    return o;
  }
  static DecodingOrder random(const std::vector<std::uint8_t>& design, std::uint64_t seed) {
    DecodingOrder o = left_to_right(design);
    Rng rng(seed);
    rng.shuffle(o.positions);
    return o;
  }

  // Rank per residue, -1 for non-design. Throws Contract unless the order is
  // a permutation of the design positions.
  std::vector<int> ranks(const std::vector<std::uint8_t>& design) const {
    const int n = static_cast<int>(design.size());
    std::vector<int> r(n, -1);
    for (int t = 0; t < static_cast<int>(positions.size()); ++t) {
      const int p = positions[t];
      if (p < 0 || p >= n || !design[p])
        fail(ErrorKind::Contract, "decoding order entry " + std::to_string(p) + " is not a design position");
      if (r[p] >= 0)
        fail(ErrorKind::Contract, "decoding order repeats position " + std::to_string(p));
      r[p] = t;
    }
    for (int i = 0; i < n; ++i)
      if (design[i] && r[i] < 0)
        fail(ErrorKind::Contract, "decoding order misses design position " + std::to_string(i));
    return r;
  }
};

// [2N,2N] visibility for queries [f; b] over keys [f; e].
inline NdArray<std::uint8_t> decoder_mask(const std::vector<int>& rank) {
  const int n = static_cast<int>(rank.size());
  NdArray<std::uint8_t> m({2 * n, 2 * n}, 0);
  auto vis = [&](int i, int j) {
    return j != i && (rank[j] < rank[i] || (rank[i] < 0 && rank[j] < 0));
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m[static_cast<std::int64_t>(i) * 2 * n + j] = (i == j || vis(i, j)) ? 1 : 0;
      m[static_cast<std::int64_t>(i) * 2 * n + n + j] = 1;
      m[static_cast<std::int64_t>(n + i) * 2 * n + j] = vis(i, j) ? 1 : 0;
      m[static_cast<std::int64_t>(n + i) * 2 * n + n + j] = 1;
    }
  return m;
}

// ---------------------------------------------------------------------------
// Model

template <typename T>
struct RedNet {
  ModelConfig config;
  ParamStore<T> params;
};

template <typename T>
RedNet<T> init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RedNet<T> m;
  m.config = cfg;
  Rng rng(seed);
  ParamStore<T>& ps = m.params;
  const int w = cfg.width, h = cfg.heads, r = cfg.vocab;
  ps.add_embedding("enc.embed", r, w, rng);
  ps.add_linear("atom.in", kAtomVocab + kResidueVocab + 1, w, rng);
  const int atom_edge_dim = RbfSpec{}.n_bins + 1 + kRelIndexClasses + 1;
  for (int l = 0; l < cfg.atom_layers; ++l) {
    const std::string pre = "atom." + std::to_string(l);
    init_egat_layer(ps, pre, w, w, atom_edge_dim, h, rng);
    ps.add_layer_norm(pre + ".norm", w);
  }
  ResidueGraph probe;
  ps.add_linear("res.edge_in", probe.edge_feature_dim(), w, rng);
  for (int l = 0; l < cfg.residue_layers; ++l)
    init_gat_layer(ps, "res." + std::to_string(l), w, w, h, rng);
  ps.add_layer_norm("enc.norm", w);

  ps.add_embedding("dec.embed", r, w, rng);
  for (int l = 0; l < cfg.decoder_layers; ++l) {
    const std::string pre = "dec." + std::to_string(l);
    ps.add_layer_norm(pre + ".ln_q", w);
    ps.add_layer_norm(pre + ".ln_k", w);
    init_pair_bias_attention(ps, pre + ".attn", w, kPairFeatureDim, h, rng);
    ps.add_layer_norm(pre + ".ln_ff", w);
    ps.add_linear(pre + ".ff1", w, 2 * w, rng);
    ps.add_linear(pre + ".ff2", 2 * w, w, rng);
  }
  ps.add_layer_norm("dec.norm", w);
  ps.add_linear("dec.out", w, r, rng);
  ps.add_linear("edge.src", w, r * r, rng);
  ps.add_linear("edge.dst", w, r * r, rng, false);
  return m;
}

struct ForwardOptions {
  bool edges = false;          // also compute edge-pair logits
  bool train = false;          // apply dropout
  std::uint64_t dropout_seed = 0;
};

template <typename T>
struct ForwardResult {
  Var<T> logits;                      // [N,R]
  std::optional<Var<T>> edge_logits;  // [N,K,R*R]
};

namespace detail {

template <typename T>
NdArray<T> as(const NdArray<double>& a) {
  return a.template cast<T>();
}

inline NdArray<int> to_index(const std::vector<int>& v) {
  NdArray<int> out({static_cast<std::int64_t>(v.size())});
  std::copy(v.begin(), v.end(), out.data.begin());
  return out;
}

} // namespace detail

// Encoder states e [N,W].
template <typename T>
Var<T> encode(Bound<T>& P, const RedNet<T>& model, const ComplexFeatures& f, const ForwardOptions& opt = {}) {
  Tape<T>& tp = P.tape();
  const ModelConfig& cfg = model.config;
  const std::int64_t n = f.n;
  DropoutSpec drop{opt.train ? cfg.dropout : 0.0, opt.dropout_seed, 0};

  Var<T> s = gather(P("enc.embed"), detail::to_index(f.masked_tokens()));
  if (cfg.atom_layers > 0 && f.atom.n_atoms > 0) {
    Var<T> k = P.linear("atom.in", tp.constant(detail::as<T>(f.atom_node)));
    Var<T> e = tp.constant(detail::as<T>(f.atom_edge));
    for (int l = 0; l < cfg.atom_layers; ++l) {
      const std::string pre = "atom." + std::to_string(l);
      Var<T> upd = egat_layer(P, pre, P.layer_norm(pre + ".norm", s), k, f.centroid, f.atom_pos, f.atom_edges, e);
      drop.stream = 100 + l;
      s = add(s, dropout(upd, drop.p, drop.seed, drop.stream));
    }
  }
  if (cfg.residue_layers > 0) {
    Var<T> p = P.linear("res.edge_in", tp.constant(detail::as<T>(f.residue_edge)));
    for (int l = 0; l < cfg.residue_layers; ++l) {
      drop.stream = 200 + 2 * l;
      s = gat_layer(P, "res." + std::to_string(l), s, p, f.residue.neighbor_index, f.residue.edge_mask, drop);
    }
  }
  (void)n;
  return P.layer_norm("enc.norm", s);
}

// Decoder over encoder states `enc`; tokens [N] hold the running sequence.
template <typename T>
ForwardResult<T> decode(Bound<T>& P, const RedNet<T>& model, const ComplexFeatures& f, Var<T> enc,
                        const std::vector<int>& tokens, const DecodingOrder& order,
                        const ForwardOptions& opt = {}) {
  Tape<T>& tp = P.tape();
  const ModelConfig& cfg = model.config;
  const std::int64_t n = f.n, w = cfg.width;
  if (static_cast<std::int64_t>(tokens.size()) != n)
    fail(ErrorKind::Dimension, "token count " + std::to_string(tokens.size()) + " != residue count " +
                                   std::to_string(n));
  for (int t : tokens)
    if (t < 0 || t >= cfg.vocab)
      fail(ErrorKind::Contract, "token " + std::to_string(t) + " outside vocabulary");
  const std::vector<int> rank = order.ranks(f.design);
  const NdArray<std::uint8_t> mask = decoder_mask(rank);
  const double p_drop = opt.train ? cfg.dropout : 0.0;

  Var<T> fs = add(enc, gather(P("dec.embed"), detail::to_index(tokens)));
  Var<T> x = concat<T>({fs, enc}, 0);  // [2N,W] = [f; b]
  Var<T> pair = tp.constant(detail::as<T>(f.pair));
  for (int l = 0; l < cfg.decoder_layers; ++l) {
    const std::string pre = "dec." + std::to_string(l);
    Var<T> bias = P.linear(pre + ".attn.bias", pair);  // [N,N,H]
    Var<T> row = concat<T>({bias, bias}, 1);
    bias = concat<T>({row, row}, 0);                     // [2N,2N,H]
    Var<T> keys = concat<T>({slice(x, 0, 0, n), enc}, 0);
    Var<T> a = pair_bias_attention(P, pre + ".attn", P.layer_norm(pre + ".ln_q", x),
                                   P.layer_norm(pre + ".ln_k", keys), bias, mask);
    x = add(x, dropout(a, p_drop, opt.dropout_seed, 300 + 2 * l));
    Var<T> ff = P.linear(pre + ".ff2", relu(P.linear(pre + ".ff1", P.layer_norm(pre + ".ln_ff", x))));
    x = add(x, dropout(ff, p_drop, opt.dropout_seed, 301 + 2 * l));
  }
  Var<T> hb = P.layer_norm("dec.norm", slice(x, 0, n, n));
  ForwardResult<T> out{P.linear("dec.out", hb), std::nullopt};
  if (opt.edges) {
    const std::int64_t rr = static_cast<std::int64_t>(cfg.vocab) * cfg.vocab;
    Var<T> src = reshape(P.linear("edge.src", hb), {n, 1, rr});
    Var<T> dst = gather(P.linear("edge.dst", hb), f.residue.neighbor_index);
    out.edge_logits = add(src, dst);
  }
  (void)w;
  return out;
}

template <typename T>
ForwardResult<T> forward(Bound<T>& P, const RedNet<T>& model, const ComplexFeatures& f,
                         const std::vector<int>& tokens, const DecodingOrder& order, const ForwardOptions& opt = {}) {
  Var<T> enc = encode(P, model, f, opt);
  return decode(P, model, f, enc, tokens, order, opt);
}

// Inference helper: [N,R] logits as plain values.
template <typename T>
NdArray<T> forward_logits(RedNet<T>& model, const ComplexFeatures& f, const std::vector<int>& tokens,
                          const DecodingOrder& order) {
  Tape<T> tape;
  Bound<T> P(tape, model.params);
  return forward(P, model, f, tokens, order).logits.value();
}

// Rows of `full` [N,R] at design positions in residue order: [N_design,R].
template <typename T>
NdArray<T> design_rows(const NdArray<T>& full, const ComplexFeatures& f) {
  const std::int64_t r = full.dim(1);
  NdArray<T> out({f.n_design(), r});
  std::int64_t row = 0;
  for (int i = 0; i < f.n; ++i)
    if (f.design[i]) {
      std::copy_n(full.data.begin() + i * r, r, out.data.begin() + row * r);
      ++row;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Loss

struct NodeMask {
  std::string name;
  std::vector<std::uint8_t> mask;  // [N]
  double weight = 1.0;
};

template <typename T>
struct LossParts {
  Var<T> total;
  double node = 0.0;
  double edge = 0.0;
};

// Per-node weights sum_m w_m [i in M_m] / |M_m|; empty masks contribute 0.
inline std::vector<double> node_loss_weights(const std::vector<NodeMask>& masks, int n) {
  std::vector<double> c(n, 0.0);
  for (const NodeMask& m : masks) {
    require(static_cast<int>(m.mask.size()) == n, "loss mask '" + m.name + "' has wrong length");
    int cnt = 0;
    for (std::uint8_t b : m.mask)
      cnt += b ? 1 : 0;
    if (cnt == 0)
      continue;
    for (int i = 0; i < n; ++i)
      if (m.mask[i])
        c[i] += m.weight / cnt;
  }
  return c;
}

// Node loss sum_m w_m mean_{i in M_m} CE(logits_i, y_i) plus lambda times the
// mean edge CE over valid edges i->j with both ends in `edge_nodes`; the
// edge class is y_i * R + y_j.
template <typename T>
LossParts<T> rednet_loss(Var<T> logits, const std::vector<int>& labels, const std::vector<NodeMask>& masks,
                         const std::optional<Var<T>>& edge_logits = std::nullopt,
                         const NdArray<int>* neighbor_index = nullptr,
                         const NdArray<std::uint8_t>* edge_mask = nullptr,
                         const std::vector<std::uint8_t>& edge_nodes = {}, double lambda_edge = 1.0) {
  Tape<T>& tp = *logits.tape;
  const std::int64_t n = logits.dim(0), r = logits.dim(1);
  if (static_cast<std::int64_t>(labels.size()) != n)
    fail(ErrorKind::Dimension, "label count does not match logits " + shape_str(logits.shape()));
  std::vector<double> c = node_loss_weights(masks, static_cast<int>(n));
  NdArray<T> cw({n});
  for (std::int64_t i = 0; i < n; ++i)
    cw[i] = static_cast<T>(c[i]);
  Var<T> nll = neg(take_last(log_softmax(logits, -1), labels));
  Var<T> node = sum_all(mul(nll, tp.constant(cw)));
  LossParts<T> out{node, static_cast<double>(node.value()[0]), 0.0};
  if (edge_logits && lambda_edge != 0.0) {
    require(neighbor_index && edge_mask, "edge loss needs neighbor index and edge mask");
    const std::int64_t k = neighbor_index->dim(1);
    const std::int64_t rr = r * r;
    std::vector<int> cls(n * k, 0);
    NdArray<T> ew({n * k}, T(0));
    int valid = 0;
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t s = 0; s < k; ++s) {
        const std::int64_t e = i * k + s;
        const int j = (*neighbor_index)[e];
        if (!(*edge_mask)[e] || edge_nodes.empty() || !edge_nodes[i] || !edge_nodes[j])
          continue;
        cls[e] = labels[i] * static_cast<int>(r) + labels[j];
        ew[e] = T(1);
        ++valid;
      }
    if (valid > 0) {
      for (T& v : ew.data)
        v /= static_cast<T>(valid);
      Var<T> lp = log_softmax(reshape(*edge_logits, {n * k, rr}), -1);
      Var<T> edge = neg(sum_all(mul(take_last(lp, cls), tp.constant(ew))));
      out.edge = static_cast<double>(edge.value()[0]);
      out.total = add(out.total, scale(edge, static_cast<T>(lambda_edge)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coordinate noise

inline Structure add_coordinate_noise(Structure s, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0))
    fail(ErrorKind::Contract, "noise sigma must be >= 0");
  if (sigma == 0.0)
    return s;
  Rng rng(seed);
  for (Chain& c : s.chains)
    for (Residue& r : c.residues)
      for (Atom& a : r.atoms)
        if (a.resolved)
          a.pos += Vec3{rng.normal(0.0, sigma), rng.normal(0.0, sigma), rng.normal(0.0, sigma)};
  return s;
}

} // namespace binderkit

#endif
