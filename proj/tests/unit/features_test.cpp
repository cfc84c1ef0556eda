#include <gtest/gtest.h>

#include <map>
#include <tuple>

#include "binderkit/core/container.hpp"
#include "binderkit/core/random.hpp"
#include "binderkit/features/atom_graph.hpp"
#include "binderkit/features/glinter_graph.hpp"
#include "binderkit/features/residue_graph.hpp"
#include "binderkit/structure/synthetic.hpp"
#include "support/oracles.hpp"

using namespace binderkit;

namespace {

Structure jittered(Structure s, std::uint64_t seed, double sigma = 0.05) {
  Rng rng(seed);
  for (Chain& c : s.chains)
    for (Residue& r : c.residues)
      for (Atom& a : r.atoms)
        a.pos = a.pos + Vec3{rng.normal(0, sigma), rng.normal(0, sigma), rng.normal(0, sigma)};
  return s;
}

Structure moved(Structure s, const RigidTransform& t) {
  s.transform(t);
  return s;
}

void expect_close(const NdArray<double>& a, const NdArray<double>& b, double tol, const std::string& what) {
  ASSERT_EQ(a.shape, b.shape) << what;
  double worst = 0;
  for (std::int64_t i = 0; i < a.numel(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  EXPECT_LE(worst, tol) << what;
}

} // namespace

TEST(LocalFrame, HandExample) {
  LocalFrame f = local_frame(Vec3{-0.5, 1.3, 0}, Vec3{0, 0, 0}, Vec3{1.52, 0, 0});
  // (CA-N) x (C-CA) = (0.5,-1.3,0) x (1.52,0,0) = (0,0,1.976).
  EXPECT_NEAR(distance(f.rotation.column(0), {1, 0, 0}), 0, 1e-15);
  EXPECT_NEAR(distance(f.rotation.column(1), {0, 1, 0}), 0, 1e-15);
  EXPECT_NEAR(distance(f.rotation.column(2), {0, 0, 1}), 0, 1e-15);
  EXPECT_NEAR(f.rotation.determinant(), 1.0, 1e-12);
}

TEST(LocalFrame, OrthonormalAndEquivariant) {
  Rng rng(3);
  Chain c = synth::build_chain("A", "ACDEFGHIKLMNPQRS", "LLHHHHHHEEEELLLL");
  for (int trial = 0; trial < 20; ++trial) {
    RigidTransform t = rng.rigid(30.0);
    for (const Residue& r : c.residues) {
      LocalFrame f = local_frame(r);
      Mat3 rrt = f.rotation * f.rotation.transposed();
      for (int i = 0; i < 9; ++i)
        EXPECT_NEAR(rrt.a[i], (i % 4 == 0) ? 1.0 : 0.0, 1e-9);
      EXPECT_NEAR(f.rotation.determinant(), 1.0, 1e-9);
      Residue m = r;
      for (Atom& a : m.atoms)
        a.pos = t.apply(a.pos);
      LocalFrame g = local_frame(m);
      Mat3 expect = t.rotation * f.rotation;
      for (int i = 0; i < 9; ++i)
        EXPECT_NEAR(g.rotation.a[i], expect.a[i], 1e-9);
      EXPECT_LT(distance(g.origin, t.apply(f.origin)), 1e-9);
    }
  }
}

TEST(LocalFrame, CollinearBackboneIsDegenerate) {
  try {
    local_frame(Vec3{-1.4, 0, 0}, Vec3{0, 0, 0}, Vec3{1.5, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateFrame);
  }
}

TEST(Rbf, Examples) {
  RbfSpec spec;
  auto mu = spec.centers();
  ASSERT_EQ(mu.size(), 16u);
  EXPECT_EQ(mu.front(), 2.0);
  EXPECT_EQ(mu.back(), 22.0);
  for (int i = 1; i < 16; ++i)
    EXPECT_GT(mu[i], mu[i - 1]);

  EXPECT_EQ(rbf_encode(2.0)[0], 1.0);

  // Peak at the center nearest 12 A; pairs equidistant from 12 match.
  auto v = rbf_encode(12.0);
  int peak = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  int nearest = 0;
  for (int i = 0; i < 16; ++i)
    if (std::abs(mu[i] - 12.0) < std::abs(mu[nearest] - 12.0))
      nearest = i;
  EXPECT_EQ(peak, nearest);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (std::abs((mu[i] - 12.0) + (mu[j] - 12.0)) < 1e-12)
        EXPECT_NEAR(v[i], v[j], 1e-15);

  for (double x : rbf_encode(50.0))
    EXPECT_LT(x, std::exp(-28.0 * 28.0) + 1e-300);
}

TEST(Rbf, RangeAndMonotoneInOffset) {
  RbfSpec spec;
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    double d = rng.uniform(0.0, 25.0);
    double e = rng.uniform(0.0, 25.0);
    auto a = rbf_encode(d), b = rbf_encode(e);
    for (int i = 0; i < 16; ++i) {
      EXPECT_GT(a[i], 0.0);
      EXPECT_LE(a[i], 1.0);
      double da = std::abs(d - spec.center(i)), db = std::abs(e - spec.center(i));
      if (da < db)
        EXPECT_GE(a[i], b[i]);
    }
  }
}

TEST(ResidueGraph, ThreeResiduePadding) {
  Structure s;
  s.chains.push_back(synth::build_chain("A", "ACD", "HHH"));
  ResidueGraph g = build_residue_graph(s, {});
  ASSERT_EQ(g.neighbor_index.shape, (Shape{3, 48}));
  for (int i = 0; i < 3; ++i) {
    int real = 0;
    for (int k = 0; k < 48; ++k) {
      if (g.edge_mask[i * 48 + k]) {
        ++real;
        EXPECT_NE(g.neighbor_index[i * 48 + k], i);
      } else {
        EXPECT_EQ(g.neighbor_index[i * 48 + k], 3);
      }
    }
    EXPECT_EQ(real, 2);
    EXPECT_EQ(g.edge_mask[i * 48 + 0], 1);
    EXPECT_EQ(g.edge_mask[i * 48 + 2], 0);
  }
  EXPECT_EQ(g.edge_feature_dim(), 400 + 25 + 65 + 1 + 15 + 512);
  NdArray<double> ef = g.edge_features();
  EXPECT_EQ(ef.shape, (Shape{3, 48, g.edge_feature_dim()}));
}

TEST(ResidueGraph, TooSmall) {
  Structure s;
  s.chains.push_back(synth::build_chain("A", "A", "H"));
  try {
    build_residue_graph(s, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GraphTooSmall);
  }
}

TEST(ResidueGraph, NeighborsMatchBruteForceOn500Residues) {
  Structure s = jittered(synth::helix_bundle("BND", 25, 20, 10.0, 99, false), 1, 0.3);
  ASSERT_EQ(s.residue_count(), 500u);
  ResidueGraph g = build_residue_graph(s, {});
  auto ref = oracle::knn(g.ca, 48);
  for (int i = 0; i < g.n; ++i) {
    ASSERT_EQ(ref[i].size(), 48u);
    for (int k = 0; k < 48; ++k)
      ASSERT_EQ(g.neighbor_index[i * 48 + k], ref[i][k]) << "row " << i << " slot " << k;
  }
}

TEST(ResidueGraph, NeighborsMatchBruteForceOnSmallAndTiedSets) {
  // Integer lattice: many exact distance ties exercise the index tie-break.
  Structure s;
  Chain c = synth::build_chain("A", std::string(64, 'G'), std::string(64, 'H'), false);
  for (int i = 0; i < 64; ++i) {
    Vec3 shift = Vec3{double(i % 4) * 4.0, double((i / 4) % 4) * 4.0, double(i / 16) * 4.0} -
                 *c.residues[i].position("CA");
    for (Atom& a : c.residues[i].atoms)
      a.pos = a.pos + shift;
  }
  s.chains.push_back(c);
  for (int k : {1, 6, 48, 70}) {
    ResidueGraph g = build_residue_graph(s, {}, {}, k);
    auto ref = oracle::knn(g.ca, k);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < static_cast<int>(ref[i].size()); ++j)
        ASSERT_EQ(g.neighbor_index[i * k + j], ref[i][j]) << "k=" << k << " row " << i;
  }
}

TEST(ResidueGraph, FeatureSemantics) {
  Structure s = jittered(synth::toy_complex("TOY", 4), 2);
  std::vector<bool> mask = design_mask_from_roles(s);
  ResidueGraph g = build_residue_graph(s, mask);
  const int k = g.k;
  for (int i = 0; i < g.n; ++i)
    for (int slot = 0; slot < k; ++slot) {
      const int e = i * k + slot;
      if (!g.edge_mask[e])
        continue;
      const int j = g.neighbor_index[e];
      const ResidueNode& a = g.nodes[i];
      const ResidueNode& b = g.nodes[j];
      EXPECT_EQ(g.same_chain[e], a.chain == b.chain ? 1.0 : 0.0);
      if (a.chain != b.chain)
        EXPECT_EQ(g.rel_index[e], kCrossChainClass);
      else
        EXPECT_EQ(g.rel_index[e], std::clamp(b.seq_id - a.seq_id, -32, 32) + 32);
      // CA(i)-CA(j) pair is core pair (1,1).
      double d = distance(g.ca[i], g.ca[j]);
      EXPECT_NEAR(g.core_inv_dist[e * 25 + 6], 1.0 / (1.0 + d), 1e-12);
      // Sorted by distance.
      if (slot > 0 && g.edge_mask[e - 1])
        EXPECT_LE(distance(g.ca[i], g.ca[g.neighbor_index[e - 1]]), d);
      // Side-chain slots of design residues are zero.
      double sc = 0;
      for (int x = 0; x < kNumSidechainSlots * 16; ++x)
        sc += g.sidechain_rbf[static_cast<std::int64_t>(e) * kNumSidechainSlots * 16 + x];
      if (b.design)
        EXPECT_EQ(sc, 0.0);
      // Frame-relative CA of neighbor equals R^T (CA_j - CA_i).
      const Residue& ri = s.chains[a.chain].residues[a.residue];
      Vec3 local = local_frame(ri).to_local(g.ca[j]);
      for (int x = 0; x < 3; ++x)
        EXPECT_NEAR(g.frame_pos[e * 15 + 3 + x], local[x], 1e-12);
    }
}

TEST(ResidueGraph, MissingAtomsActInfinitelyFar) {
  Structure s = synth::toy_complex("TOY", 4);
  s.chains[0].residues[5].find("O")->resolved = false;
  ResidueGraph g = build_residue_graph(s, {});
  int checked = 0;
  for (int i = 0; i < g.n; ++i)
    for (int slot = 0; slot < g.k; ++slot) {
      const int e = i * g.k + slot;
      if (g.edge_mask[e] && g.neighbor_index[e] == 5) {
        for (int a = 0; a < 5; ++a) {
          EXPECT_EQ(g.core_inv_dist[e * 25 + a * 5 + 3], 0.0);
          for (int b = 0; b < 16; ++b)
            EXPECT_EQ(g.core_rbf[(e * 25 + a * 5 + 3) * 16 + b], 0.0);
        }
        for (int x = 0; x < 3; ++x)
          EXPECT_EQ(g.frame_pos[e * 15 + 9 + x], 0.0);
        ++checked;
      }
    }
  EXPECT_GT(checked, 0);
}

TEST(AtomGraph, DesignResiduesExposeBackboneOnly) {
  Structure s = jittered(synth::toy_complex("TOY", 8), 3);
  std::vector<bool> mask = design_mask_from_roles(s);
  AtomGraph g = build_atom_graph(s, mask);
  for (int e = 0; e < g.n_edges(); ++e) {
    const AtomNode& a = g.atoms[g.edge_dst[e]];
    if (mask[a.residue])
      EXPECT_TRUE(is_backbone_atom(kAtomNames[a.atom_type]));
  }
  for (const AtomNode& a : g.atoms)
    if (mask[a.residue]) {
      EXPECT_EQ(a.residue_type, kTokenMask);
      EXPECT_TRUE(is_backbone_atom(kAtomNames[a.atom_type]));
    }
  for (int a = 0; a < g.n_atoms; ++a) {
    double s1 = 0, s2 = 0;
    for (int t = 0; t < kAtomVocab; ++t)
      s1 += g.atom_type_onehot[a * kAtomVocab + t];
    for (int t = 0; t < kResidueVocab; ++t)
      s2 += g.residue_type_onehot[a * kResidueVocab + t];
    EXPECT_EQ(s1, 1.0);
    EXPECT_EQ(s2, 1.0);
  }
  for (int e = 0; e < g.n_edges(); ++e)
    EXPECT_LE(g.edge_dist[e], 15.0);
}

TEST(AtomGraph, BuriedDegreeCapMatchesBruteForce) {
  Structure s = jittered(synth::helix_bundle("PCK", 9, 24, 9.0, 5, true), 4);
  AtomGraph g = build_atom_graph(s, {});
  std::vector<Vec3> present;
  for (const AtomNode& a : g.atoms)
    if (a.exists)
      present.push_back(a.pos);
  int capped = 0;
  for (int i = 0; i < g.n_residues; ++i) {
    int total = oracle::count_within(present, g.centroids[i], 15.0);
    EXPECT_EQ(g.degree(i), std::min(total, 96));
    capped += total > 96;
    for (int e = g.offsets[i] + 1; e < g.offsets[i + 1]; ++e)
      EXPECT_LE(g.edge_dist[e - 1], g.edge_dist[e]);
  }
  EXPECT_GT(capped, 0);
}

TEST(AtomGraph, IsolatedResidueOnlySeesItself) {
  Structure s;
  Chain a = synth::build_chain("A", "W", "L");
  Chain b = synth::build_chain("B", "FY", "LL");
  synth::place_chain(b, {100, 0, 0}, {0, 0, 1});
  s.chains = {a, b};
  AtomGraph g = build_atom_graph(s, {});
  ASSERT_EQ(g.degree(0), static_cast<int>(s.chains[0].residues[0].atoms.size()));
  for (int e = g.offsets[0]; e < g.offsets[1]; ++e)
    EXPECT_EQ(g.atoms[g.edge_dst[e]].residue, 0);
}

TEST(AtomGraph, MissingAtomsHaveNoEdges) {
  Structure s = synth::toy_complex("TOY", 8);
  s.chains[0].residues[2].find("CB")->resolved = false;
  s.chains[0].residues[3].atoms.pop_back();
  AtomGraph g = build_atom_graph(s, {});
  int absent = 0;
  for (int a = 0; a < g.n_atoms; ++a)
    if (!g.atoms[a].exists) {
      ++absent;
      EXPECT_EQ(g.atom_exists[a], 0.0);
      for (int x = 0; x < 3; ++x)
        EXPECT_EQ(g.atoms[a].pos[x], 0.0);
    }
  EXPECT_EQ(absent, 2);
  for (int e = 0; e < g.n_edges(); ++e)
    EXPECT_TRUE(g.atoms[g.edge_dst[e]].exists);
}

TEST(GlinterGraph, CutoffSemantics) {
  for (double sep : {7.9, 8.1}) {
    Structure s;
    Chain a = synth::build_chain("A", "G", "L");
    Chain b = synth::build_chain("B", "G", "L");
    synth::transform_chain(a, {Mat3{}, Vec3{} - *a.residues[0].position("CA")});
    synth::transform_chain(b, {Mat3{}, Vec3{sep, 0, 0} - *b.residues[0].position("CA")});
    s.chains = {a, b};
    GlinterGraphs g = build_glinter_graphs(s, 8.0, 8.0);
    EXPECT_EQ(g.residue.n_edges(), sep < 8.0 ? 2 : 0) << sep;
  }
}

TEST(GlinterGraph, EdgeTypeAndPosition) {
  Structure s = synth::toy_complex("TOY", 9);
  GlinterGraphs g = build_glinter_graphs(s);
  for (int e = 0; e < g.atom.n_edges(); ++e)
    EXPECT_EQ(g.atom.edge_type[e], g.atom.atom_residue[g.atom.edge_dst[e]] == g.atom.edge_src[e] ? 1.0 : 0.0);
  // Every residue reaches its own atoms (all within 8 A of its CA).
  int own = 0;
  for (int e = 0; e < g.atom.n_edges(); ++e)
    own += g.atom.edge_type[e] == 1.0;
  EXPECT_EQ(own, g.atom.n_atoms);
  const int len_a = static_cast<int>(s.chains[0].residues.size());
  for (int i = 0; i < len_a; ++i)
    EXPECT_DOUBLE_EQ(g.residue.position[i], static_cast<double>(i) / len_a);
  const int len_b = static_cast<int>(s.chains[1].residues.size());
  EXPECT_DOUBLE_EQ(g.residue.position[len_a + 3], 3.0 / len_b);
}

TEST(GlinterGraph, OptionalInputsZeroFilledAndValidated) {
  Structure s = synth::toy_complex("TOY", 9);
  GlinterGraphs g = build_glinter_graphs(s);
  for (double v : g.residue.pssm.data)
    EXPECT_EQ(v, 0.0);
  GlinterInputs in;
  in.pssm = NdArray<double>({3, 20}, 1.0);
  EXPECT_THROW(build_glinter_graphs(s, 8, 8, in), Error);
}

TEST(Invariance, RigidMotionLeavesFeaturesUnchanged) {
  Rng rng(2024);
  std::vector<Structure> fixtures = {jittered(synth::toy_complex("T1", 1), 11),
                                     jittered(synth::toy_complex("T2", 2, 30, 40), 12),
                                     jittered(synth::helix_bundle("HB", 4, 18, 10.0, 3), 13)};
  for (const Structure& s : fixtures) {
    std::vector<bool> mask = design_mask_from_roles(s);
    ResidueGraph rg = build_residue_graph(s, mask);
    AtomGraph ag = build_atom_graph(s, mask);
    GlinterGraphs gg = build_glinter_graphs(s);
    auto rg_t = rg.named_tensors();
    auto ag_t = ag.named_tensors();
    for (int trial = 0; trial < 5; ++trial) {
      RigidTransform t = rng.rigid(40.0);
      Structure m = moved(s, t);
      auto rg2 = build_residue_graph(m, mask).named_tensors();
      auto ag2 = build_atom_graph(m, mask).named_tensors();
      for (std::size_t i = 0; i < rg_t.size(); ++i)
        expect_close(rg_t[i].second, rg2[i].second, 1e-9, rg_t[i].first);
      for (std::size_t i = 0; i < ag_t.size(); ++i)
        if (ag_t[i].first != "atom.centroid_pos" && ag_t[i].first != "atom.atom_pos")
          expect_close(ag_t[i].second, ag2[i].second, 1e-9, ag_t[i].first);
      GlinterGraphs gg2 = build_glinter_graphs(m);
      ASSERT_EQ(gg.residue.edge_src, gg2.residue.edge_src);
      ASSERT_EQ(gg.residue.edge_dst, gg2.residue.edge_dst);
      expect_close(gg.residue.edge_dist, gg2.residue.edge_dist, 1e-9, "glinter.edge_dist");
      expect_close(gg.residue.aa, gg2.residue.aa, 0.0, "glinter.aa");
      expect_close(gg.residue.position, gg2.residue.position, 0.0, "glinter.position");
      ASSERT_EQ(gg.atom.edge_dst, gg2.atom.edge_dst);
      expect_close(gg.atom.edge_type, gg2.atom.edge_type, 0.0, "glinter.edge_type");
      // Coordinates and frames are equivariant.
      for (int i = 0; i < gg.residue.n; ++i) {
        Vec3 p{gg.residue.coords[3 * i], gg.residue.coords[3 * i + 1], gg.residue.coords[3 * i + 2]};
        Vec3 q{gg2.residue.coords[3 * i], gg2.residue.coords[3 * i + 1], gg2.residue.coords[3 * i + 2]};
        EXPECT_LT(distance(t.apply(p), q), 1e-9);
      }
    }
  }
}

TEST(Invariance, ChainOrderPermutation) {
  Structure s = jittered(synth::toy_complex("T1", 6), 21);
  Structure p = s;
  std::swap(p.chains[0], p.chains[1]);
  std::vector<bool> ms = design_mask_from_roles(s), mp = design_mask_from_roles(p);
  ResidueGraph a = build_residue_graph(s, ms);
  ResidueGraph b = build_residue_graph(p, mp);
  // Canonical label of a node: (chain id, seq_id).
  auto label = [](const Structure& st, const ResidueNode& n) {
    return std::make_pair(st.chains[n.chain].id, n.seq_id);
  };
  std::map<std::pair<std::string, int>, int> b_index;
  for (int i = 0; i < b.n; ++i)
    b_index[label(p, b.nodes[i])] = i;
  NdArray<double> fa = a.edge_features(), fb = b.edge_features();
  const int f = a.edge_feature_dim();
  for (int i = 0; i < a.n; ++i) {
    int bi = b_index.at(label(s, a.nodes[i]));
    for (int slot = 0; slot < a.k; ++slot) {
      const int ea = i * a.k + slot, eb = bi * b.k + slot;
      ASSERT_EQ(a.edge_mask[ea], b.edge_mask[eb]);
      if (!a.edge_mask[ea])
        continue;
      ASSERT_EQ(label(s, a.nodes[a.neighbor_index[ea]]), label(p, b.nodes[b.neighbor_index[eb]]));
      for (int x = 0; x < f; ++x)
        ASSERT_EQ(fa[static_cast<std::int64_t>(ea) * f + x], fb[static_cast<std::int64_t>(eb) * f + x]);
    }
  }
}

TEST(Container, RoundTripAndValidation) {
  std::vector<NamedTensor> ts = {{"a", NdArray<float>({2, 3}, {1, 2, 3, 4, 5, 6})},
                                 {"scalar", NdArray<float>({}, std::vector<float>{7.5f})},
                                 {"empty", NdArray<float>({0, 4})}};
  std::string bytes = encode_container(ts);
  EXPECT_EQ(bytes.substr(0, 4), "BKTC");
  auto back = decode_container(bytes);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].name, ts[i].name);
    EXPECT_EQ(back[i].value.shape, ts[i].value.shape);
    EXPECT_EQ(back[i].value.data, ts[i].value.data);
  }
  EXPECT_EQ(find_tensor(back, "scalar")->value.data[0], 7.5f);
  EXPECT_EQ(find_tensor(back, "missing"), nullptr);
  EXPECT_THROW(decode_container(bytes.substr(0, bytes.size() - 1)), Error);
  EXPECT_THROW(decode_container(bytes + "x"), Error);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_container(bad), Error);
}
