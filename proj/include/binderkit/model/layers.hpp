// Graph layers: GAT with gated pooling, attention with pairwise biases,
// equivariant graph attention over atoms, and the frame-standardized CaConv.
//
// Neighborhoods are dense [N, K] index tensors. Padding slots hold the
// sentinel index (the row count of the gathered tensor) and mask 0. A node
// whose neighborhood is fully masked receives a zero aggregate.

#ifndef BINDERKIT_MODEL_LAYERS_HPP_
#define BINDERKIT_MODEL_LAYERS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "../core/geometry.hpp"
#include "params.hpp"

namespace binderkit {

inline constexpr double kLeakySlope = 0.2;
// Squared distances enter EGAT messages in units of 100 Å².
inline constexpr double kSqDistScale = 100.0;

struct DropoutSpec {
  double p = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // base stream; layers offset it per call site
};

// Grouped edge lists (src -> dst) laid out as [n_src, k].
struct PaddedEdges {
  int n_src = 0;
  int n_dst = 0;
  int k = 1;
  NdArray<int> index;           // [n_src, k], sentinel n_dst
  NdArray<std::uint8_t> mask;   // [n_src, k]
  std::vector<int> edge_id;     // [n_src * k], -1 on padding

  std::vector<int> degree() const {
    std::vector<int> d(n_src, 0);
    for (int i = 0; i < n_src; ++i)
      for (int s = 0; s < k; ++s)
        d[i] += mask[i * k + s];
    return d;
  }
};

inline PaddedEdges pad_edges(int n_src, int n_dst, const std::vector<int>& src, const std::vector<int>& dst) {
  require(src.size() == dst.size(), "edge lists differ in length");
  std::vector<int> deg(n_src, 0);
  for (int s : src) {
    require(s >= 0 && s < n_src, "edge source out of range");
    ++deg[s];
  }
  PaddedEdges pe;
  pe.n_src = n_src;
  pe.n_dst = n_dst;
  for (int d : deg)
    pe.k = std::max(pe.k, d);
  pe.index = NdArray<int>({n_src, pe.k}, n_dst);
  pe.mask = NdArray<std::uint8_t>({n_src, pe.k}, 0);
  pe.edge_id.assign(static_cast<std::size_t>(n_src) * pe.k, -1);
  std::vector<int> fill(n_src, 0);
  for (std::size_t e = 0; e < src.size(); ++e) {
    require(dst[e] >= 0 && dst[e] < n_dst, "edge target out of range");
    const int at = src[e] * pe.k + fill[src[e]]++;
    pe.index[at] = dst[e];
    pe.mask[at] = 1;
    pe.edge_id[at] = static_cast<int>(e);
  }
  return pe;
}

// Per-edge rows [E, F] placed into [n_src, k, F], zero on padding.
template <typename T>
NdArray<T> pad_edge_rows(const PaddedEdges& pe, const NdArray<double>& rows) {
  const std::int64_t f = rows.numel() / std::max<std::int64_t>(rows.dim(0), 1);
  NdArray<T> out({pe.n_src, pe.k, f}, T(0));
  for (std::size_t slot = 0; slot < pe.edge_id.size(); ++slot)
    if (pe.edge_id[slot] >= 0)
      for (std::int64_t x = 0; x < f; ++x)
        out[static_cast<std::int64_t>(slot) * f + x] = static_cast<T>(rows[pe.edge_id[slot] * f + x]);
  return out;
}

namespace detail {

template <typename T>
NdArray<T> mask_as(const NdArray<std::uint8_t>& m, Shape shape) {
  NdArray<T> out(std::move(shape));
  require(out.numel() == m.numel(), "mask reshape mismatch");
  for (std::int64_t i = 0; i < m.numel(); ++i)
    out[i] = m[i] ? T(1) : T(0);
  return out;
}

// 1 for rows with at least one unmasked entry, shape [rows, 1...].
template <typename T>
NdArray<T> row_valid(const NdArray<std::uint8_t>& m, std::int64_t rows, Shape shape) {
  const std::int64_t k = m.numel() / std::max<std::int64_t>(rows, 1);
  NdArray<T> out(std::move(shape), T(0));
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t s = 0; s < k; ++s)
      if (m[r * k + s]) {
        out[r] = T(1);
        break;
      }
  return out;
}

template <typename T>
Var<T> mlp2(Bound<T>& P, const std::string& pre, Var<T> x) {
  return P.linear(pre + "2", relu(P.linear(pre + "1", x)));
}

} // namespace detail

// ---------------------------------------------------------------------------
// GAT layer with gated mean pooling and gated attention.

template <typename T>
void init_gat_layer(ParamStore<T>& ps, const std::string& pre, int width, int edge_dim, int heads, Rng& rng) {
  ps.add_linear(pre + ".edge", edge_dim, width, rng);
  ps.add_linear(pre + ".w_src", width, width, rng, false);
  ps.add_linear(pre + ".w_tgt", width, width, rng, false);
  ps.add_linear(pre + ".msg1", width, width, rng);
  ps.add_linear(pre + ".msg2", width, width, rng);
  ps.add_gate(pre + ".gate_pool", width, width, rng);
  ps.add_small_linear(pre + ".pool_out", width, width, rng, kGateWeightStd, std::nullopt);
  ps.add_linear(pre + ".att", width, width, rng);
  ps.add_linear(pre + ".att_a", width, heads, rng, false);
  ps.add_linear(pre + ".val", width, width, rng);
  ps.add_gate(pre + ".gate_att", width, width, rng);
  ps.add_small_linear(pre + ".att_out", width, width, rng, kGateWeightStd, std::nullopt);
  ps.add_linear(pre + ".ff1", width, 2 * width, rng);
  ps.add_linear(pre + ".ff2", 2 * width, width, rng);
}

// s [N,W]; p [N,K,P]; E [N,K] with sentinel N; M [N,K].
template <typename T>
Var<T> gat_layer(Bound<T>& P, const std::string& pre, Var<T> s, Var<T> p, const NdArray<int>& E,
                 const NdArray<std::uint8_t>& M, DropoutSpec drop = {}, NdArray<T>* attention = nullptr) {
  Tape<T>& tp = P.tape();
  const std::int64_t n = s.dim(0), w = s.dim(1), k = E.dim(1);
  if (E.dim(0) != n || M.shape != E.shape || p.dim(0) != n || p.dim(1) != k)
    fail(ErrorKind::Dimension, "gat_layer: s " + shape_str(s.shape()) + ", p " + shape_str(p.shape()) +
                                   ", E " + shape_str(E.shape) + ", M " + shape_str(M.shape));
  const std::int64_t h = P(pre + ".att_a.w").dim(1);
  const std::int64_t d = w / h;

  Var<T> m = add(add(P.linear(pre + ".edge", p), gather(P.linear(pre + ".w_src", s), E)),
                 reshape(P.linear(pre + ".w_tgt", s), {n, 1, w}));
  m = detail::mlp2(P, pre + ".msg", m);

  // Gated mean over valid neighbors.
  NdArray<T> maskf = detail::mask_as<T>(M, {n, k, 1});
  NdArray<T> inv_count({n, 1}, T(0));
  for (std::int64_t i = 0; i < n; ++i) {
    int c = 0;
    for (std::int64_t j = 0; j < k; ++j)
      c += M[i * k + j];
    inv_count[i] = c > 0 ? T(1) / T(c) : T(0);
  }
  Var<T> pooled = mul(sum(mul(m, tp.constant(maskf)), 1), tp.constant(inv_count));
  Var<T> ds = P.linear(pre + ".pool_out", mul(sigmoid(P.linear(pre + ".gate_pool", s)), pooled));

  // Gated attention over valid neighbors.
  Var<T> a = matmul(leaky_relu(P.linear(pre + ".att", m), T(kLeakySlope)), P(pre + ".att_a.w"));
  NdArray<std::uint8_t> mk = M;
  mk.shape = {n, k, 1};
  a = mul(softmax(masked_fill(a, mk), 1), tp.constant(detail::row_valid<T>(M, n, {n, 1, 1})));
  if (attention)
    *attention = a.value();
  Var<T> v = reshape(P.linear(pre + ".val", m), {n, k, h, d});
  Var<T> o = reshape(sum(mul(v, reshape(a, {n, k, h, 1})), 1), {n, w});
  ds = add(ds, P.linear(pre + ".att_out", mul(sigmoid(P.linear(pre + ".gate_att", s)), o)));

  s = add(s, dropout(ds, drop.p, drop.seed, drop.stream));
  s = add(s, dropout(detail::mlp2(P, pre + ".ff", s), drop.p, drop.seed, drop.stream + 1));
  return s;
}

// ---------------------------------------------------------------------------
// Attention with pairwise biases.

template <typename T>
void init_pair_bias_attention(ParamStore<T>& ps, const std::string& pre, int width, int pair_dim, int heads,
                              Rng& rng) {
  ps.add_linear(pre + ".q", width, width, rng, false);
  ps.add_linear(pre + ".kv", width, 2 * width, rng, false);
  ps.add_linear(pre + ".bias", pair_dim, heads, rng);
  ps.add_linear(pre + ".gate", width, width, rng);
  ps.add_linear(pre + ".out", width, width, rng, false);
}

// Queries sq [Nq,W], keys sk [Nk,W], bias [Nq,Nk,H], mask [Nq,Nk].
template <typename T>
Var<T> pair_bias_attention(Bound<T>& P, const std::string& pre, Var<T> sq, Var<T> sk, Var<T> bias,
                           const NdArray<std::uint8_t>& mask, NdArray<T>* attention = nullptr) {
  Tape<T>& tp = P.tape();
  const std::int64_t nq = sq.dim(0), nk = sk.dim(0), w = sq.dim(1);
  const std::int64_t h = bias.dim(2), d = w / h;
  if (bias.dim(0) != nq || bias.dim(1) != nk || mask.numel() != nq * nk || d * h != w)
    fail(ErrorKind::Dimension, "pair_bias_attention: queries " + shape_str(sq.shape()) + ", keys " +
                                   shape_str(sk.shape()) + ", bias " + shape_str(bias.shape()) +
                                   ", mask " + shape_str(mask.shape));
  Var<T> q = permute(reshape(P.linear(pre + ".q", sq), {nq, h, d}), {1, 0, 2});  // [H,Nq,d]
  Var<T> kv = P.linear(pre + ".kv", sk);
  Var<T> kt = permute(reshape(slice(kv, 1, 0, w), {nk, h, d}), {1, 2, 0});      // [H,d,Nk]
  Var<T> v = permute(reshape(slice(kv, 1, w, w), {nk, h, d}), {1, 0, 2});       // [H,Nk,d]
  Var<T> a = add(scale(matmul(q, kt), T(1.0 / std::sqrt(static_cast<double>(d)))),
                 permute(bias, {2, 0, 1}));
  NdArray<std::uint8_t> m3 = mask;
  m3.shape = {1, nq, nk};
  a = mul(softmax(masked_fill(a, m3), -1), tp.constant(detail::row_valid<T>(mask, nq, {1, nq, 1})));
  if (attention)
    *attention = a.value();
  Var<T> o = reshape(permute(matmul(a, v), {1, 0, 2}), {nq, w});
  o = mul(sigmoid(P.linear(pre + ".gate", sq)), o);
  return P.linear(pre + ".out", o);
}

// Self-attention form: queries and keys are s [N,W], bias projected from
// pair features p [N,N,P].
template <typename T>
Var<T> pair_bias_attention(Bound<T>& P, const std::string& pre, Var<T> s, Var<T> p,
                           const NdArray<std::uint8_t>& mask, NdArray<T>* attention = nullptr) {
  return pair_bias_attention(P, pre, s, s, P.linear(pre + ".bias", p), mask, attention);
}

// ---------------------------------------------------------------------------
// Equivariant graph attention (invariant feature stream only).

template <typename T>
void init_egat_layer(ParamStore<T>& ps, const std::string& pre, int width, int key_dim, int edge_dim, int heads,
                     Rng& rng) {
  for (const char* part : {".msg", ".val"}) {
    ps.add_linear(pre + part + "_q", width, width, rng, false);
    ps.add_linear(pre + part + "_k", key_dim, width, rng, false);
    ps.add_linear(pre + part + "_d", 1, width, rng, false);
    ps.add_linear(pre + part + "_e", edge_dim, width, rng);
  }
  ps.add_linear(pre + ".wq", width, width, rng, false);
  ps.add_linear(pre + ".wk", key_dim, width, rng, false);
  ps.add_linear(pre + ".we", width, width, rng, false);
  ps.add_linear(pre + ".wa", width, heads, rng, false);
  ps.add_linear(pre + ".out", 2 * width, width, rng);
}

// Squared centroid-to-atom distances / kSqDistScale, [N,K,1], 0 on padding.
template <typename T>
NdArray<T> egat_sq_distances(const std::vector<Vec3>& x, const std::vector<Vec3>& y, const PaddedEdges& E) {
  NdArray<T> out({E.n_src, E.k, 1}, T(0));
  for (int i = 0; i < E.n_src; ++i)
    for (int s = 0; s < E.k; ++s)
      if (E.mask[i * E.k + s])
        out[i * E.k + s] = static_cast<T>(distance_sq(y[E.index[i * E.k + s]], x[i]) / kSqDistScale);
  return out;
}

// q [N,W] centroid features, k [M,Wk] atom features, x [N] centroid and y [M]
// atom coordinates, E centroid -> atom, e [N,K,Fe] edge features.
template <typename T>
Var<T> egat_layer(Bound<T>& P, const std::string& pre, Var<T> q, Var<T> k, const std::vector<Vec3>& x,
                  const std::vector<Vec3>& y, const PaddedEdges& E, Var<T> e, NdArray<T>* attention = nullptr) {
  Tape<T>& tp = P.tape();
  const std::int64_t n = q.dim(0), w = q.dim(1), kk = E.k;
  if (E.n_src != n || E.n_dst != k.dim(0) || static_cast<std::int64_t>(x.size()) != n ||
      static_cast<std::int64_t>(y.size()) != k.dim(0) || e.dim(0) != n || e.dim(1) != kk)
    fail(ErrorKind::Dimension, "egat_layer: q " + shape_str(q.shape()) + ", k " + shape_str(k.shape()) +
                                   ", e " + shape_str(e.shape()) + ", edges [" + std::to_string(E.n_src) +
                                   "," + std::to_string(E.k) + "]");
  const std::int64_t h = P(pre + ".wa.w").dim(1), hd = w / h;
  Var<T> dij = tp.constant(egat_sq_distances<T>(x, y, E));

  // Linear([q_i || k_j || d_ij || e_ij]) evaluated blockwise.
  auto joint = [&](const std::string& part) {
    Var<T> r = reshape(P.linear(pre + part + "_q", q), {n, 1, w});
    r = add(r, gather(P.linear(pre + part + "_k", k), E.index));
    r = add(r, matmul(dij, P(pre + part + "_d.w")));
    return add(r, P.linear(pre + part + "_e", e));
  };
  Var<T> m = joint(".msg");
  Var<T> a = add(add(reshape(P.linear(pre + ".wq", q), {n, 1, w}), gather(P.linear(pre + ".wk", k), E.index)),
                 P.linear(pre + ".we", m));
  a = matmul(leaky_relu(a, T(kLeakySlope)), P(pre + ".wa.w"));  // [N,K,H]
  NdArray<std::uint8_t> mk = E.mask;
  mk.shape = {n, kk, 1};
  a = mul(softmax(masked_fill(a, mk), 1), tp.constant(detail::row_valid<T>(E.mask, n, {n, 1, 1})));
  if (attention)
    *attention = a.value();
  Var<T> v = reshape(joint(".val"), {n, kk, h, hd});
  Var<T> o = reshape(sum(mul(v, reshape(a, {n, kk, h, 1})), 1), {n, w});
  return P.linear(pre + ".out", concat<T>({q, o}, 1));
}

// ---------------------------------------------------------------------------
// CaConv: messages from frame-standardized neighbor coordinates, max pooled.

template <typename T>
void init_caconv_layer(ParamStore<T>& ps, const std::string& pre, int src_dim, int dst_dim, int edge_dim,
                       int hidden, Rng& rng) {
  ps.add_linear(pre + ".f1", src_dim + dst_dim + edge_dim + 3, hidden, rng);
  ps.add_linear(pre + ".f2", hidden, hidden, rng);
  ps.add_linear(pre + ".g1", hidden, hidden, rng);
  ps.add_linear(pre + ".g2", hidden, hidden, rng);
}

struct CaConvGeometry {
  std::vector<Vec3> src_pos;
  std::vector<Vec3> dst_pos;
  std::vector<Mat3> src_frame;             // columns are frame axes
  std::vector<std::uint8_t> frame_valid;
};

struct CaConvReport {
  std::vector<int> skipped;  // source nodes left without an update (degenerate frame)
};

// Standardized neighbor positions R_qᵀ(p_v - p_q), [Nq,K,3].
template <typename T>
NdArray<T> caconv_local_positions(const CaConvGeometry& g, const PaddedEdges& E) {
  NdArray<T> out({E.n_src, E.k, 3}, T(0));
  for (int q = 0; q < E.n_src; ++q) {
    if (!g.frame_valid[q])
      continue;
    Mat3 rt = g.src_frame[q].transposed();
    for (int s = 0; s < E.k; ++s) {
      if (!E.mask[q * E.k + s])
        continue;
      Vec3 loc = rt * (g.dst_pos[E.index[q * E.k + s]] - g.src_pos[q]);
      for (int c = 0; c < 3; ++c)
        out[(q * E.k + s) * 3 + c] = static_cast<T>(loc[c]);
    }
  }
  return out;
}

// xq [Nq,Fq] source features, xv [Nv,Fv] neighbor features, e [Nq,K,Fe].
template <typename T>
Var<T> caconv_layer(Bound<T>& P, const std::string& pre, Var<T> xq, Var<T> xv, const CaConvGeometry& geo,
                    const PaddedEdges& E, Var<T> e, CaConvReport* report = nullptr) {
  Tape<T>& tp = P.tape();
  const std::int64_t nq = xq.dim(0), kk = E.k;
  if (E.n_src != nq || E.n_dst != xv.dim(0) || e.dim(0) != nq || e.dim(1) != kk ||
      static_cast<std::int64_t>(geo.frame_valid.size()) != nq)
    fail(ErrorKind::Dimension, "caconv_layer: xq " + shape_str(xq.shape()) + ", xv " + shape_str(xv.shape()) +
                                   ", e " + shape_str(e.shape()));
  NdArray<int> self_idx({nq, kk});
  for (std::int64_t q = 0; q < nq; ++q)
    for (std::int64_t s = 0; s < kk; ++s)
      self_idx[q * kk + s] = static_cast<int>(q);
  Var<T> local = tp.constant(caconv_local_positions<T>(geo, E));
  Var<T> in = concat<T>({gather(xq, self_idx), gather(xv, E.index), e, local}, 2);
  Var<T> msg = relu(P.linear(pre + ".f2", relu(P.linear(pre + ".f1", in))));
  NdArray<std::uint8_t> mk = E.mask;
  mk.shape = {nq, kk, 1};
  Var<T> pooled = max(masked_fill(msg, mk), 1);

  NdArray<T> keep({nq, 1}, T(0));
  NdArray<T> has = detail::row_valid<T>(E.mask, nq, {nq, 1});
  for (std::int64_t q = 0; q < nq; ++q) {
    keep[q] = geo.frame_valid[q] ? has[q] : T(0);
    if (!geo.frame_valid[q] && report)
      report->skipped.push_back(static_cast<int>(q));
  }
  Var<T> keepv = tp.constant(keep);
  pooled = mul(pooled, keepv);
  Var<T> out = relu(P.linear(pre + ".g2", relu(P.linear(pre + ".g1", pooled))));
  return mul(out, keepv);
}

} // namespace binderkit

#endif
