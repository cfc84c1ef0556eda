// CaConv inputs built from the distance-cutoff residue and atom graphs.
//
// Residue node features [L,43]: aa one-hot, PSSM, SASA, chain position.
// Atom node features [Na,32]: SASA, chemical class one-hot, parent aa one-hot.
// Edge features: Cα distance (residue graph) or same-residue flag (atom graph).

#ifndef BINDERKIT_MODEL_GLINTER_HPP_
#define BINDERKIT_MODEL_GLINTER_HPP_

#include "../features/glinter_graph.hpp"
#include "layers.hpp"

namespace binderkit {

inline constexpr int kGlinterResidueFeatures = kGlinterAaClasses + 20 + 1 + 1;
inline constexpr int kGlinterAtomFeatures = 1 + kGlinterAtomClasses + kGlinterAaClasses;

struct CaConvInputs {
  NdArray<double> src_x;   // [Nq,Fq]
  NdArray<double> dst_x;   // [Nv,Fv]
  CaConvGeometry geometry;
  PaddedEdges edges;
  NdArray<double> edge_x;  // [Nq,K,Fe]
};

namespace detail {

inline NdArray<double> hstack(const std::vector<const NdArray<double>*>& parts, std::int64_t rows) {
  std::int64_t width = 0;
  for (const auto* p : parts)
    width += p->numel() / std::max<std::int64_t>(rows, 1);
  NdArray<double> out({rows, width}, 0.0);
  std::int64_t off = 0;
  for (const auto* p : parts) {
    const std::int64_t w = p->numel() / std::max<std::int64_t>(rows, 1);
    for (std::int64_t r = 0; r < rows; ++r)
      std::copy_n(p->data.begin() + r * w, w, out.data.begin() + r * width + off);
    off += w;
  }
  return out;
}

inline std::vector<Vec3> rows_to_vec3(const NdArray<double>& a) {
  std::vector<Vec3> out(a.dim(0));
  for (std::int64_t i = 0; i < a.dim(0); ++i)
    out[i] = {a[3 * i], a[3 * i + 1], a[3 * i + 2]};
  return out;
}

} // namespace detail

inline NdArray<double> glinter_residue_features(const GlinterResidueGraph& g) {
  return detail::hstack({&g.aa, &g.pssm, &g.sasa, &g.position}, g.n);
}

inline NdArray<double> glinter_atom_features(const GlinterAtomGraph& g) {
  return detail::hstack({&g.sasa, &g.atom_class, &g.aa}, g.n_atoms);
}

inline CaConvGeometry glinter_geometry(const GlinterResidueGraph& rg, const std::vector<Vec3>& dst_pos) {
  CaConvGeometry geo;
  geo.src_pos = detail::rows_to_vec3(rg.coords);
  geo.dst_pos = dst_pos;
  geo.frame_valid = rg.frame_valid;
  for (int i = 0; i < rg.n; ++i) {
    Mat3 m;
    std::copy_n(rg.frames.data.begin() + 9 * i, 9, m.a.begin());
    geo.src_frame.push_back(m);
  }
  return geo;
}

// Residue -> residue inputs.
inline CaConvInputs glinter_residue_inputs(const GlinterGraphs& g) {
  const GlinterResidueGraph& rg = g.residue;
  CaConvInputs in;
  in.src_x = glinter_residue_features(rg);
  in.dst_x = in.src_x;
  in.geometry = glinter_geometry(rg, detail::rows_to_vec3(rg.coords));
  in.edges = pad_edges(rg.n, rg.n, rg.edge_src, rg.edge_dst);
  in.edge_x = pad_edge_rows<double>(in.edges, rg.edge_dist);
  return in;
}

// Residue -> atom inputs.
inline CaConvInputs glinter_atom_inputs(const GlinterGraphs& g) {
  const GlinterResidueGraph& rg = g.residue;
  const GlinterAtomGraph& ag = g.atom;
  CaConvInputs in;
  in.src_x = glinter_residue_features(rg);
  in.dst_x = glinter_atom_features(ag);
  in.geometry = glinter_geometry(rg, detail::rows_to_vec3(ag.coords));
  in.edges = pad_edges(rg.n, ag.n_atoms, ag.edge_src, ag.edge_dst);
  in.edge_x = pad_edge_rows<double>(in.edges, ag.edge_type);
  return in;
}

} // namespace binderkit

#endif
