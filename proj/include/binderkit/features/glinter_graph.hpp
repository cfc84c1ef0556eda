// Distance-cutoff residue and atom graphs for the CaConv encoder.
//
// Residue graph: nodes are residues (Cα); an edge joins i != j when
// |Cα_i - Cα_j| <= d_res. Node features:
//   aa         [L,21]  one-hot over 20 amino acids + UNK
//   pssm       [L,20]  optional external input, zero when absent
//   sasa       [L,1]   optional external input, zero when absent
//   position   [L,1]   index within chain / chain length
//   coords     [L,3]   Cα coordinates (equivariant)
//   frames     [L,9]   local reference frame, row-major (equivariant)
// Edge feature: Cα–Cα distance.
//
// Atom graph: bipartite edges residue node -> heavy atom with
// |Cα_i - atom| <= d_atom. Atom features: sasa [Na,1], chemical type
// one-hot [Na,10] (CA N C O on the backbone; C N O S H plus CB in side
// chains), parent aa one-hot [Na,21], coords [Na,3]. Edge type is 1 when the
// atom belongs to the residue of the source node.

#ifndef BINDERKIT_FEATURES_GLINTER_GRAPH_HPP_
#define BINDERKIT_FEATURES_GLINTER_GRAPH_HPP_

#include <optional>
#include <vector>

#include "residue_graph.hpp"

namespace binderkit {

inline constexpr int kGlinterAaClasses = 21;
inline constexpr int kGlinterAtomClasses = 10;

// Backbone CA N C O -> 0..3; side chain CB -> 4, then by element C N O S H -> 5..9.
inline int glinter_atom_class(std::string_view name, std::string_view element) {
  if (name == "CA") return 0;
  if (name == "N") return 1;
  if (name == "C") return 2;
  if (name == "O") return 3;
  if (name == "CB") return 4;
  if (element == "N") return 6;
  if (element == "O") return 7;
  if (element == "S") return 8;
  if (element == "H") return 9;
  return 5;
}

struct GlinterResidueGraph {
  int n = 0;
  std::vector<ResidueNode> nodes;
  NdArray<double> aa;        // [L,21]
  NdArray<double> pssm;      // [L,20]
  NdArray<double> sasa;      // [L,1]
  NdArray<double> position;  // [L,1]
  NdArray<double> coords;    // [L,3]
  NdArray<double> frames;    // [L,9]
  std::vector<std::uint8_t> frame_valid;
  std::vector<int> edge_src, edge_dst;
  NdArray<double> edge_dist;  // [E,1]

  int n_edges() const { return static_cast<int>(edge_src.size()); }
};

struct GlinterAtomGraph {
  int n_atoms = 0;
  std::vector<int> atom_residue;
  NdArray<double> sasa;        // [Na,1]
  NdArray<double> atom_class;  // [Na,10]
  NdArray<double> aa;          // [Na,21]
  NdArray<double> coords;      // [Na,3]
  std::vector<int> edge_src;   // residue node
  std::vector<int> edge_dst;   // atom node
  NdArray<double> edge_type;   // [E,1]

  int n_edges() const { return static_cast<int>(edge_src.size()); }
};

struct GlinterGraphs {
  GlinterResidueGraph residue;
  GlinterAtomGraph atom;
};

struct GlinterInputs {
  std::optional<NdArray<double>> pssm;       // [L,20]
  std::optional<NdArray<double>> sasa;       // [L,1]
  std::optional<NdArray<double>> atom_sasa;  // [Na,1]
};

inline GlinterGraphs build_glinter_graphs(const Structure& s, double d_res = 8.0,
                                          double d_atom = 8.0, const GlinterInputs& inputs = {}) {
  GlinterGraphs out;
  GlinterResidueGraph& rg = out.residue;
  rg.nodes = detail::residue_nodes(s, {});
  const int n = static_cast<int>(rg.nodes.size());
  rg.n = n;
  rg.aa = NdArray<double>({n, kGlinterAaClasses}, 0.0);
  rg.pssm = inputs.pssm ? *inputs.pssm : NdArray<double>({n, 20}, 0.0);
  rg.sasa = inputs.sasa ? *inputs.sasa : NdArray<double>({n, 1}, 0.0);
  require(rg.pssm.numel() == 20LL * n, "PSSM must be [L,20]");
  require(rg.sasa.numel() == n, "SASA must be [L,1]");
  rg.position = NdArray<double>({n, 1}, 0.0);
  rg.coords = NdArray<double>({n, 3}, 0.0);
  rg.frames = NdArray<double>({n, 9}, 0.0);
  rg.frame_valid.assign(n, 0);

  std::vector<Vec3> ca(n);
  for (int i = 0; i < n; ++i) {
    const Chain& ch = s.chains[rg.nodes[i].chain];
    const Residue& r = ch.residues[rg.nodes[i].residue];
    rg.aa[i * kGlinterAaClasses + std::min(r.aa, kTokenUnk)] = 1.0;
    rg.position[i] = static_cast<double>(rg.nodes[i].residue) / static_cast<double>(ch.size());
    auto p = r.position("CA");
    if (!p)
      fail(ErrorKind::Contract, "residue " + std::to_string(r.seq_id) + " has no CA");
    ca[i] = *p;
    for (int x = 0; x < 3; ++x)
      rg.coords[3 * i + x] = ca[i][x];
    try {
      LocalFrame f = local_frame(r);
      std::copy(f.rotation.a.begin(), f.rotation.a.end(), rg.frames.data.begin() + 9 * i);
      rg.frame_valid[i] = 1;
    } catch (const Error&) {
      rg.frame_valid[i] = 0;
    }
  }
  CellGrid grid(ca, {}, std::max(d_res, 1.0));
  std::vector<double> dists;
  for (int i = 0; i < n; ++i)
    for (const Neighbor& nb : grid.within(ca[i], d_res, i)) {
      rg.edge_src.push_back(i);
      rg.edge_dst.push_back(nb.index);
      dists.push_back(std::sqrt(nb.dist_sq));
    }
  rg.edge_dist = NdArray<double>({rg.n_edges(), 1}, std::move(dists));

  GlinterAtomGraph& ag = out.atom;
  std::vector<Vec3> atom_pos;
  std::vector<std::vector<double>> cls_rows;
  for (int i = 0; i < n; ++i) {
    const Residue& r = s.chains[rg.nodes[i].chain].residues[rg.nodes[i].residue];
    for (const Atom& a : r.atoms) {
      if (!a.resolved)
        continue;
      ag.atom_residue.push_back(i);
      atom_pos.push_back(a.pos);
      std::vector<double> row(kGlinterAtomClasses + kGlinterAaClasses, 0.0);
      row[glinter_atom_class(a.name, a.element)] = 1.0;
      row[kGlinterAtomClasses + std::min(r.aa, kTokenUnk)] = 1.0;
      cls_rows.push_back(std::move(row));
    }
  }
  const int na = static_cast<int>(atom_pos.size());
  ag.n_atoms = na;
  ag.sasa = inputs.atom_sasa ? *inputs.atom_sasa : NdArray<double>({na, 1}, 0.0);
  require(ag.sasa.numel() == na, "atom SASA must be [Na,1]");
  ag.atom_class = NdArray<double>({na, kGlinterAtomClasses}, 0.0);
  ag.aa = NdArray<double>({na, kGlinterAaClasses}, 0.0);
  ag.coords = NdArray<double>({na, 3}, 0.0);
  for (int a = 0; a < na; ++a) {
    std::copy_n(cls_rows[a].begin(), kGlinterAtomClasses, ag.atom_class.data.begin() + a * kGlinterAtomClasses);
    std::copy_n(cls_rows[a].begin() + kGlinterAtomClasses, kGlinterAaClasses,
                ag.aa.data.begin() + a * kGlinterAaClasses);
    for (int x = 0; x < 3; ++x)
      ag.coords[3 * a + x] = atom_pos[a][x];
  }
  CellGrid agrid(atom_pos, {}, std::max(d_atom, 1.0));
  std::vector<double> types;
  for (int i = 0; i < n; ++i)
    for (const Neighbor& nb : agrid.within(ca[i], d_atom)) {
      ag.edge_src.push_back(i);
      ag.edge_dst.push_back(nb.index);
      types.push_back(ag.atom_residue[nb.index] == i ? 1.0 : 0.0);
    }
  ag.edge_type = NdArray<double>({ag.n_edges(), 1}, std::move(types));
  return out;
}

} // namespace binderkit

#endif
