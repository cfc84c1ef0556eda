// Atom graph: residue centroids (Cα) connected to nearby heavy atoms.
//
// Nodes are the expected heavy atoms of every residue (backbone plus the
// canonical side chain, plus any extra atoms present in the file). Design
// residues keep backbone atoms only, and their residue-type one-hot is the
// MASK token so no sequence information leaks through the atom stream.
// Expected atoms that are absent or unresolved become nodes with
// exists = 0 and zero coordinates; they never receive edges.
//
// Edges (centroid i -> atom a) with |Cα_i - a| <= radius, keeping the
// k_max nearest per centroid, stored grouped by centroid in ascending
// (distance, atom index) order.

#ifndef BINDERKIT_FEATURES_ATOM_GRAPH_HPP_
#define BINDERKIT_FEATURES_ATOM_GRAPH_HPP_

#include <string>
#include <utility>
#include <vector>

#include "residue_graph.hpp"

namespace binderkit {

struct AtomNode {
  int residue = 0;       // flattened residue (centroid) index
  int atom_type = kAtomUnk;
  int residue_type = kTokenUnk;
  bool exists = false;
  Vec3 pos;
};

struct AtomGraph {
  int n_residues = 0;
  int n_atoms = 0;
  int k_max = 96;
  double radius = 15.0;
  RbfSpec rbf;
  std::vector<AtomNode> atoms;
  std::vector<Vec3> centroids;          // [N,3] Cα
  std::vector<std::uint8_t> centroid_valid;
  NdArray<double> atom_type_onehot;     // [M,37]
  NdArray<double> residue_type_onehot;  // [M,33]
  NdArray<double> atom_exists;          // [M,1]
  std::vector<int> edge_src;            // centroid index, [E]
  std::vector<int> edge_dst;            // atom index, [E]
  std::vector<int> offsets;             // CSR offsets into edges, [N+1]
  NdArray<double> edge_rbf;             // [E,D]
  NdArray<double> edge_dist;            // [E,1]
  NdArray<double> edge_offset_onehot;   // [E,65]
  NdArray<double> edge_same_chain;      // [E,1]

  int n_edges() const { return static_cast<int>(edge_src.size()); }
  int degree(int centroid) const { return offsets[centroid + 1] - offsets[centroid]; }

  int node_feature_dim() const { return kAtomVocab + kResidueVocab + 1; }
  int edge_feature_dim() const { return rbf.n_bins + 1 + kRelIndexClasses + 1; }

  NdArray<double> node_features() const {
    const int f = node_feature_dim();
    NdArray<double> out({n_atoms, f}, 0.0);
    for (int a = 0; a < n_atoms; ++a) {
      double* dst = out.data.data() + static_cast<std::int64_t>(a) * f;
      std::copy_n(atom_type_onehot.data.data() + a * kAtomVocab, kAtomVocab, dst);
      std::copy_n(residue_type_onehot.data.data() + a * kResidueVocab, kResidueVocab, dst + kAtomVocab);
      dst[f - 1] = atom_exists[a];
    }
    return out;
  }

  NdArray<double> edge_features() const {
    const int f = edge_feature_dim(), d = rbf.n_bins;
    NdArray<double> out({n_edges(), f}, 0.0);
    for (int e = 0; e < n_edges(); ++e) {
      double* dst = out.data.data() + static_cast<std::int64_t>(e) * f;
      std::copy_n(edge_rbf.data.data() + static_cast<std::int64_t>(e) * d, d, dst);
      dst[d] = edge_dist[e];
      std::copy_n(edge_offset_onehot.data.data() + static_cast<std::int64_t>(e) * kRelIndexClasses,
                  kRelIndexClasses, dst + d + 1);
      dst[f - 1] = edge_same_chain[e];
    }
    return out;
  }

  std::vector<std::pair<std::string, NdArray<double>>> named_tensors() const {
    NdArray<double> src({n_edges()}), dst({n_edges()});
    for (int e = 0; e < n_edges(); ++e) {
      src[e] = edge_src[e];
      dst[e] = edge_dst[e];
    }
    NdArray<double> cpos({n_residues, 3}), apos({n_atoms, 3});
    for (int i = 0; i < n_residues; ++i)
      for (int x = 0; x < 3; ++x)
        cpos[3 * i + x] = centroids[i][x];
    for (int a = 0; a < n_atoms; ++a)
      for (int x = 0; x < 3; ++x)
        apos[3 * a + x] = atoms[a].pos[x];
    return {{"atom.atom_type", atom_type_onehot},
            {"atom.residue_type", residue_type_onehot},
            {"atom.exists", atom_exists},
            {"atom.edge_src", src},
            {"atom.edge_dst", dst},
            {"atom.edge_rbf", edge_rbf},
            {"atom.edge_dist", edge_dist},
            {"atom.edge_offset", edge_offset_onehot},
            {"atom.edge_same_chain", edge_same_chain},
            {"atom.centroid_pos", cpos},
            {"atom.atom_pos", apos}};
  }
};

inline AtomGraph build_atom_graph(const Structure& s, const std::vector<bool>& design_mask,
                                  const RbfSpec& spec = {}, double radius = 15.0, int k_max = 96) {
  AtomGraph g;
  g.rbf = spec;
  g.radius = radius;
  g.k_max = k_max;
  std::vector<ResidueNode> nodes = detail::residue_nodes(s, design_mask);
  g.n_residues = static_cast<int>(nodes.size());

  for (int i = 0; i < g.n_residues; ++i) {
    const Residue& r = s.chains[nodes[i].chain].residues[nodes[i].residue];
    auto ca = r.position("CA");
    g.centroids.push_back(ca.value_or(Vec3{}));
    g.centroid_valid.push_back(ca ? 1 : 0);

    const int res_type = nodes[i].design ? kTokenMask : r.aa;
    std::vector<std::string> names = {"N", "CA", "C", "O"};
    if (!nodes[i].design) {
      if (r.aa < kNumAminoAcids)
        for (std::string_view sc : sidechain_atoms()[r.aa])
          names.emplace_back(sc);
      for (const Atom& a : r.atoms)
        if (std::find(names.begin(), names.end(), a.name) == names.end())
          names.push_back(a.name);
    }
    for (const std::string& name : names) {
      AtomNode node;
      node.residue = i;
      node.atom_type = atom_type_index(name);
      node.residue_type = res_type;
      if (const Atom* a = r.find(name); a && a->resolved) {
        node.exists = true;
        node.pos = a->pos;
      }
      g.atoms.push_back(node);
    }
  }
  g.n_atoms = static_cast<int>(g.atoms.size());

  g.atom_type_onehot = NdArray<double>({g.n_atoms, kAtomVocab}, 0.0);
  g.residue_type_onehot = NdArray<double>({g.n_atoms, kResidueVocab}, 0.0);
  g.atom_exists = NdArray<double>({g.n_atoms, 1}, 0.0);
  std::vector<Vec3> atom_pos(g.n_atoms);
  std::vector<std::uint8_t> atom_valid(g.n_atoms);
  for (int a = 0; a < g.n_atoms; ++a) {
    const AtomNode& nd = g.atoms[a];
    g.atom_type_onehot[a * kAtomVocab + nd.atom_type] = 1.0;
    g.residue_type_onehot[a * kResidueVocab + nd.residue_type] = 1.0;
    g.atom_exists[a] = nd.exists ? 1.0 : 0.0;
    atom_pos[a] = nd.pos;
    atom_valid[a] = nd.exists ? 1 : 0;
  }

  CellGrid grid(atom_pos, atom_valid, radius / 2);
  g.offsets.push_back(0);
  for (int i = 0; i < g.n_residues; ++i) {
    if (g.centroid_valid[i]) {
      std::vector<Neighbor> hits = grid.within(g.centroids[i], radius);
      if (static_cast<int>(hits.size()) > k_max)
        hits.resize(k_max);
      for (const Neighbor& h : hits) {
        g.edge_src.push_back(i);
        g.edge_dst.push_back(h.index);
      }
    }
    g.offsets.push_back(static_cast<int>(g.edge_src.size()));
  }

  const int ne = g.n_edges(), d = spec.n_bins;
  g.edge_rbf = NdArray<double>({ne, d}, 0.0);
  g.edge_dist = NdArray<double>({ne, 1}, 0.0);
  g.edge_offset_onehot = NdArray<double>({ne, kRelIndexClasses}, 0.0);
  g.edge_same_chain = NdArray<double>({ne, 1}, 0.0);
  for (int e = 0; e < ne; ++e) {
    const int i = g.edge_src[e], a = g.edge_dst[e];
    const double dist = distance(g.centroids[i], atom_pos[a]);
    rbf_encode_into(dist, spec, g.edge_rbf.data.begin() + static_cast<std::int64_t>(e) * d);
    g.edge_dist[e] = dist;
    const ResidueNode& src = nodes[i];
    const ResidueNode& dst = nodes[g.atoms[a].residue];
    g.edge_offset_onehot[static_cast<std::int64_t>(e) * kRelIndexClasses + relative_index_class(src, dst)] = 1.0;
    g.edge_same_chain[e] = src.chain == dst.chain ? 1.0 : 0.0;
  }
  return g;
}

} // namespace binderkit

#endif
