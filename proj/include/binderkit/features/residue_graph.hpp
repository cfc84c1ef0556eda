// Residue k-NN graph with rigid-motion invariant edge features.
//
// Core atoms per residue (C = 5): N, CA, C, O, pseudo-CB. Edge features for
// the directed edge i -> j (j a neighbor of i):
//   core_rbf       [N,K,C*C*D]  RBF of |a_i - b_j| over core atom pairs (a, b)
//   core_inv_dist  [N,K,C*C]    1 / (1 + |a_i - b_j|)
//   rel_index      [N,K]        seq offset clamped to ±32 -> class 0..64,
//                               cross-chain pairs -> class 64
//   same_chain     [N,K]
//   frame_pos      [N,K,3C]     core atoms of j in the local frame of i
//   sidechain_rbf  [N,K,32*D]   RBF from pseudo-CB of i to each side-chain
//                               slot of j; zero when j is a design residue
// Missing atoms act as infinitely distant: RBF and inverse distance 0,
// frame position 0. Rows with fewer than K neighbors are padded with the
// sentinel index N and edge_mask 0.

#ifndef BINDERKIT_FEATURES_RESIDUE_GRAPH_HPP_
#define BINDERKIT_FEATURES_RESIDUE_GRAPH_HPP_

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "../core/ndarray.hpp"
#include "../structure/chain_ops.hpp"
#include "frame.hpp"
#include "knn.hpp"

namespace binderkit {

inline constexpr int kNumCoreAtoms = 5;
inline constexpr int kRelIndexClasses = 65;
inline constexpr int kMaxRelOffset = 32;
inline constexpr int kCrossChainClass = 64;

struct ResidueNode {
  int chain = 0;
  int residue = 0;
  int seq_id = 0;
  ChainRole role = ChainRole::Context;
  int aa = kTokenUnk;
  bool design = false;
};

struct ResidueGraph {
  int n = 0;
  int k = 48;
  RbfSpec rbf;
  std::vector<ResidueNode> nodes;
  std::vector<Vec3> ca;
  NdArray<int> neighbor_index;
  NdArray<std::uint8_t> edge_mask;
  NdArray<double> core_rbf;
  NdArray<double> core_inv_dist;
  NdArray<int> rel_index;
  NdArray<double> same_chain;
  NdArray<double> frame_pos;
  NdArray<double> sidechain_rbf;

  // Width of the concatenated per-edge feature vector.
  int edge_feature_dim() const {
    return kNumCoreAtoms * kNumCoreAtoms * rbf.n_bins + kNumCoreAtoms * kNumCoreAtoms +
           kRelIndexClasses + 1 + 3 * kNumCoreAtoms + kNumSidechainSlots * rbf.n_bins;
  }

  // [N,K,F] concatenation of every edge feature with rel_index one-hot.
  NdArray<double> edge_features() const {
    const int f = edge_feature_dim();
    NdArray<double> out({n, k, f}, 0.0);
    const int c2d = kNumCoreAtoms * kNumCoreAtoms * rbf.n_bins;
    const int c2 = kNumCoreAtoms * kNumCoreAtoms;
    const int scd = kNumSidechainSlots * rbf.n_bins;
    for (int e = 0; e < n * k; ++e) {
      double* dst = out.data.data() + static_cast<std::int64_t>(e) * f;
      if (!edge_mask[e])
        continue;
      std::copy_n(core_rbf.data.data() + static_cast<std::int64_t>(e) * c2d, c2d, dst);
      dst += c2d;
      std::copy_n(core_inv_dist.data.data() + static_cast<std::int64_t>(e) * c2, c2, dst);
      dst += c2;
      dst[rel_index[e]] = 1.0;
      dst += kRelIndexClasses;
      *dst++ = same_chain[e];
      std::copy_n(frame_pos.data.data() + static_cast<std::int64_t>(e) * 15, 15, dst);
      dst += 15;
      std::copy_n(sidechain_rbf.data.data() + static_cast<std::int64_t>(e) * scd, scd, dst);
    }
    return out;
  }

  std::vector<std::pair<std::string, NdArray<double>>> named_tensors() const {
    NdArray<double> idx({n, k}), mask({n, k}), rel({n, k});
    for (int e = 0; e < n * k; ++e) {
      idx[e] = neighbor_index[e];
      mask[e] = edge_mask[e];
      rel[e] = rel_index[e];
    }
    return {{"residue.neighbor_index", idx}, {"residue.edge_mask", mask},
            {"residue.core_rbf", core_rbf},   {"residue.core_inv_dist", core_inv_dist},
            {"residue.rel_index", rel},       {"residue.same_chain", same_chain},
            {"residue.frame_pos", frame_pos}, {"residue.sidechain_rbf", sidechain_rbf}};
  }
};

// Class of the offset from residue a to residue b.
inline int relative_index_class(const ResidueNode& a, const ResidueNode& b) {
  if (a.chain != b.chain)
    return kCrossChainClass;
  int off = std::clamp(b.seq_id - a.seq_id, -kMaxRelOffset, kMaxRelOffset);
  return off + kMaxRelOffset;
}

namespace detail {

struct CoreAtoms {
  std::array<std::optional<Vec3>, kNumCoreAtoms> pos;
  std::optional<LocalFrame> frame;
};

inline CoreAtoms core_atoms(const Residue& r) {
  CoreAtoms c;
  c.pos[0] = r.position("N");
  c.pos[1] = r.position("CA");
  c.pos[2] = r.position("C");
  c.pos[3] = r.position("O");
  if (c.pos[0] && c.pos[1] && c.pos[2]) {
    c.pos[4] = pseudo_cbeta(*c.pos[0], *c.pos[1], *c.pos[2]);
    try {
      c.frame = local_frame(*c.pos[0], *c.pos[1], *c.pos[2]);
    } catch (const Error&) {
      c.frame.reset();
    }
  }
  return c;
}

inline std::vector<ResidueNode> residue_nodes(const Structure& s, const std::vector<bool>& design_mask) {
  std::vector<ResidueNode> nodes;
  for (int ci = 0; ci < static_cast<int>(s.chains.size()); ++ci) {
    const Chain& ch = s.chains[ci];
    for (int ri = 0; ri < static_cast<int>(ch.residues.size()); ++ri) {
      ResidueNode nd;
      nd.chain = ci;
      nd.residue = ri;
      nd.seq_id = ch.residues[ri].seq_id;
      nd.role = ch.role;
      nd.aa = ch.residues[ri].aa;
      nodes.push_back(nd);
    }
  }
  if (!design_mask.empty()) {
    require(design_mask.size() == nodes.size(), "design mask length " +
                                                    std::to_string(design_mask.size()) +
                                                    " != residue count " +
                                                    std::to_string(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i)
      nodes[i].design = design_mask[i];
  }
  return nodes;
}

} // namespace detail

inline ResidueGraph build_residue_graph(const Structure& s, const std::vector<bool>& design_mask,
                                        const RbfSpec& spec = {}, int k = 48) {
  ResidueGraph g;
  g.rbf = spec;
  g.k = k;
  g.nodes = detail::residue_nodes(s, design_mask);
  const int n = static_cast<int>(g.nodes.size());
  g.n = n;
  if (n < 2)
    fail(ErrorKind::GraphTooSmall, "residue graph needs at least 2 residues, got " +
                                       std::to_string(n));

  std::vector<detail::CoreAtoms> core(n);
  std::vector<const Residue*> res(n);
  for (int i = 0; i < n; ++i) {
    res[i] = &s.chains[g.nodes[i].chain].residues[g.nodes[i].residue];
    core[i] = detail::core_atoms(*res[i]);
    if (!core[i].pos[1])
      fail(ErrorKind::Contract, "residue " + std::to_string(g.nodes[i].seq_id) + " in chain " +
                                    s.chains[g.nodes[i].chain].id + " has no CA");
    g.ca.push_back(*core[i].pos[1]);
  }

  // Side-chain slot positions; design residues contribute none.
  std::vector<std::array<std::optional<Vec3>, kNumSidechainSlots>> sidechain(n);
  for (int i = 0; i < n; ++i) {
    if (g.nodes[i].design)
      continue;
    for (const Atom& a : res[i]->atoms) {
      int slot = sidechain_slot(a.name);
      if (slot >= 0 && a.resolved)
        sidechain[i][slot] = a.pos;
    }
  }

  const int d = spec.n_bins;
  const int c2 = kNumCoreAtoms * kNumCoreAtoms;
  g.neighbor_index = NdArray<int>({n, k}, n);
  g.edge_mask = NdArray<std::uint8_t>({n, k}, 0);
  g.core_rbf = NdArray<double>({n, k, c2 * d}, 0.0);
  g.core_inv_dist = NdArray<double>({n, k, c2}, 0.0);
  g.rel_index = NdArray<int>({n, k}, kCrossChainClass);
  g.same_chain = NdArray<double>({n, k}, 0.0);
  g.frame_pos = NdArray<double>({n, k, 3 * kNumCoreAtoms}, 0.0);
  g.sidechain_rbf = NdArray<double>({n, k, kNumSidechainSlots * d}, 0.0);

  CellGrid grid(g.ca, {}, 10.0);
  for (int i = 0; i < n; ++i) {
    std::vector<Neighbor> nbrs = grid.knn(g.ca[i], k, i);
    for (int slot = 0; slot < static_cast<int>(nbrs.size()); ++slot) {
      const int j = nbrs[slot].index;
      const std::int64_t e = static_cast<std::int64_t>(i) * k + slot;
      g.neighbor_index[e] = j;
      g.edge_mask[e] = 1;
      g.rel_index[e] = relative_index_class(g.nodes[i], g.nodes[j]);
      g.same_chain[e] = g.nodes[i].chain == g.nodes[j].chain ? 1.0 : 0.0;
      for (int a = 0; a < kNumCoreAtoms; ++a)
        for (int b = 0; b < kNumCoreAtoms; ++b) {
          const int p = a * kNumCoreAtoms + b;
          double dist = (core[i].pos[a] && core[j].pos[b]) ? distance(*core[i].pos[a], *core[j].pos[b])
                                                           : kInf;
          rbf_encode_into(dist, spec, g.core_rbf.data.begin() + (e * c2 + p) * d);
          g.core_inv_dist[e * c2 + p] = std::isinf(dist) ? 0.0 : 1.0 / (1.0 + dist);
        }
      if (core[i].frame)
        for (int b = 0; b < kNumCoreAtoms; ++b) {
          if (!core[j].pos[b])
            continue;
          Vec3 local = core[i].frame->to_local(*core[j].pos[b]);
          for (int x = 0; x < 3; ++x)
            g.frame_pos[e * 3 * kNumCoreAtoms + 3 * b + x] = local[x];
        }
      if (core[i].pos[4])
        for (int sc = 0; sc < kNumSidechainSlots; ++sc) {
          if (!sidechain[j][sc])
            continue;
          rbf_encode_into(distance(*core[i].pos[4], *sidechain[j][sc]), spec,
                          g.sidechain_rbf.data.begin() + (e * kNumSidechainSlots + sc) * d);
        }
    }
  }
  return g;
}

} // namespace binderkit

#endif
