// Model-ready features for one complex: both graphs flattened to dense
// per-edge tensors, plus the pairwise features used by the decoder.
//
// Decoder pair features [N,N,82]: Cα–Cα RBF (16), relative index one-hot
// (65), same-chain flag (1).

#ifndef BINDERKIT_MODEL_FEATURES_HPP_
#define BINDERKIT_MODEL_FEATURES_HPP_

#include <vector>

#include "../features/atom_graph.hpp"
#include "../features/residue_graph.hpp"
#include "config.hpp"
#include "layers.hpp"

namespace binderkit {

inline constexpr int kPairFeatureDim = 16 + kRelIndexClasses + 1;

struct ComplexFeatures {
  int n = 0;
  std::vector<ResidueNode> nodes;
  std::vector<int> native;              // [N] residue tokens
  std::vector<std::uint8_t> design;     // [N]
  ResidueGraph residue;
  AtomGraph atom;
  NdArray<double> residue_edge;         // [N,K,F]
  NdArray<double> atom_node;            // [M,71]
  PaddedEdges atom_edges;               // centroid -> atom, [N,Kmax]
  NdArray<double> atom_edge;            // [N,Kmax,83]
  std::vector<Vec3> centroid;           // [N]
  std::vector<Vec3> atom_pos;           // [M]
  NdArray<double> pair;                 // [N,N,82]

  int n_design() const {
    int c = 0;
    for (std::uint8_t d : design)
      c += d;
    return c;
  }
  std::vector<int> design_positions() const {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
      if (design[i])
        out.push_back(i);
    return out;
  }
  // Tokens with every design position replaced by MASK.
  std::vector<int> masked_tokens() const {
    std::vector<int> t = native;
    for (int i = 0; i < n; ++i)
      if (design[i])
        t[i] = kTokenMask;
    return t;
  }
};

inline NdArray<double> decoder_pair_features(const std::vector<ResidueNode>& nodes, const std::vector<Vec3>& ca,
                                             const RbfSpec& spec = {}) {
  const int n = static_cast<int>(nodes.size());
  require(spec.n_bins == 16, "decoder pair features use 16 RBF bins");
  NdArray<double> out({n, n, kPairFeatureDim}, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double* row = out.data.data() + (static_cast<std::int64_t>(i) * n + j) * kPairFeatureDim;
      rbf_encode_into(distance(ca[i], ca[j]), spec, row);
      row[16 + relative_index_class(nodes[i], nodes[j])] = 1.0;
      row[kPairFeatureDim - 1] = nodes[i].chain == nodes[j].chain ? 1.0 : 0.0;
    }
  return out;
}

// An empty design mask takes the design set from chain roles.
inline ComplexFeatures featurize_complex(const Structure& s, std::vector<bool> design_mask,
                                         const ModelConfig& cfg) {
  if (design_mask.empty())
    design_mask = design_mask_from_roles(s);
  ComplexFeatures f;
  f.residue = build_residue_graph(s, design_mask, {}, cfg.k_neighbors);
  f.atom = build_atom_graph(s, design_mask, {}, cfg.atom_radius, cfg.atom_k_max);
  f.n = f.residue.n;
  f.nodes = f.residue.nodes;
  for (const ResidueNode& nd : f.nodes) {
    f.native.push_back(nd.aa);
    f.design.push_back(nd.design ? 1 : 0);
  }
  f.residue_edge = f.residue.edge_features();
  f.atom_node = f.atom.node_features();
  f.atom_edges = pad_edges(f.n, f.atom.n_atoms, f.atom.edge_src, f.atom.edge_dst);
  f.atom_edge = pad_edge_rows<double>(f.atom_edges, f.atom.edge_features());
  f.centroid = f.atom.centroids;
  for (const AtomNode& a : f.atom.atoms)
    f.atom_pos.push_back(a.pos);
  f.pair = decoder_pair_features(f.nodes, f.residue.ca);
  return f;
}

} // namespace binderkit

#endif
