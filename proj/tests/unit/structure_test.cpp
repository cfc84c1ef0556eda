#include <gtest/gtest.h>

#include <string>

#include "binderkit/core/random.hpp"
#include "binderkit/structure/chain_ops.hpp"
#include "binderkit/structure/io.hpp"
#include "binderkit/structure/mmcif.hpp"
#include "binderkit/structure/pdb.hpp"
#include "binderkit/structure/synthetic.hpp"

using namespace binderkit;

namespace {

std::string data_path(const std::string& name) { return std::string(BINDERKIT_TEST_DATA) + "/" + name; }

void expect_same(const Structure& a, const Structure& b, double tol) {
  ASSERT_EQ(a.chains.size(), b.chains.size());
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(a.resolution.has_value(), b.resolution.has_value());
  if (a.resolution && b.resolution)
    EXPECT_NEAR(*a.resolution, *b.resolution, 1e-9);
  for (std::size_t c = 0; c < a.chains.size(); ++c) {
    const Chain& ca = a.chains[c];
    const Chain& cb = b.chains[c];
    EXPECT_EQ(ca.id, cb.id);
    ASSERT_EQ(ca.residues.size(), cb.residues.size());
    for (std::size_t r = 0; r < ca.residues.size(); ++r) {
      const Residue& ra = ca.residues[r];
      const Residue& rb = cb.residues[r];
      EXPECT_EQ(ra.index, rb.index);
      EXPECT_EQ(ra.seq_id, rb.seq_id);
      EXPECT_EQ(ra.icode, rb.icode);
      EXPECT_EQ(ra.name, rb.name);
      EXPECT_EQ(ra.aa, rb.aa);
      ASSERT_EQ(ra.atoms.size(), rb.atoms.size());
      for (std::size_t i = 0; i < ra.atoms.size(); ++i) {
        EXPECT_EQ(ra.atoms[i].name, rb.atoms[i].name);
        EXPECT_EQ(ra.atoms[i].element, rb.atoms[i].element);
        EXPECT_EQ(ra.atoms[i].resolved, rb.atoms[i].resolved);
        EXPECT_NEAR(distance(ra.atoms[i].pos, rb.atoms[i].pos), 0.0, tol);
      }
    }
  }
}

Structure three_chain_model() {
  Structure s;
  s.id = "3CHN";
  s.method = "X-RAY DIFFRACTION";
  s.resolution = 2.1;
  Chain a = synth::build_chain("A", "MKTAYIAKQRQISFVKSHFSRQ", "LHHHHHHHHHHHHHHHHHHHHL");
  Chain b = synth::build_chain("B", "GSWEEVLKRLAEHG", "LHHHHHHHHHHHHL", true, 10);
  Chain c = synth::build_chain("C", "PEPTIDEYW", "EEEEEEEEE");
  synth::place_chain(a, {0, 0, 0}, {0, 0, 1});
  synth::place_chain(b, {10, 0, 0}, {0, 0, -1});
  synth::place_chain(c, {0, 11, 0}, {0, 0, 1});
  s.chains = {a, b, c};
  return s;
}

} // namespace

TEST(ParseStructure, MinimalPdbFixture) {
  Structure s = read_structure(data_path("tiny.pdb"));
  EXPECT_EQ(s.id, "1TNY");
  ASSERT_EQ(s.chains.size(), 1u);
  const Chain& c = s.chains[0];
  EXPECT_EQ(c.id, "A");
  ASSERT_EQ(c.residues.size(), 2u);
  EXPECT_EQ(c.sequence(), "AG");
  EXPECT_EQ(c.residues[0].atoms.size(), 5u);  // hydrogen dropped
  EXPECT_EQ(c.residues[1].atoms.size(), 4u);
  EXPECT_EQ(c.residues[0].index, 0);
  EXPECT_EQ(c.residues[1].seq_id, 2);
  ASSERT_TRUE(s.resolution.has_value());
  EXPECT_DOUBLE_EQ(*s.resolution, 1.80);
  ASSERT_TRUE(s.method.has_value());
  EXPECT_EQ(*s.method, "X-RAY DIFFRACTION");
  auto ca = c.residues[0].position("CA");
  ASSERT_TRUE(ca.has_value());
  EXPECT_DOUBLE_EQ(ca->x, 0.257);
  EXPECT_DOUBLE_EQ(ca->z, 0.692);
}

TEST(ParseStructure, AltLocKeepsHigherOccupancyThenFirstSeen) {
  Structure s = read_structure(data_path("altloc.pdb"));
  ASSERT_EQ(s.chains.size(), 1u);
  const Chain& c = s.chains[0];
  ASSERT_GE(c.residues.size(), 1u);
  const Residue& ser = c.residues[0];
  EXPECT_EQ(ser.name, "SER");
  int cb_count = 0, og_count = 0;
  for (const Atom& a : ser.atoms) {
    cb_count += a.name == "CB";
    og_count += a.name == "OG";
  }
  EXPECT_EQ(cb_count, 1);
  EXPECT_EQ(og_count, 1);
  // Equal occupancy: first seen wins.
  EXPECT_NEAR(distance(*ser.position("CB"), Vec3{1.988, -0.773, -1.199}), 0.0, 1e-12);
  // Higher occupancy wins regardless of order.
  EXPECT_NEAR(distance(*ser.position("OG"), Vec3{1.500, -2.100, -1.100}), 0.0, 1e-12);
}

TEST(ParseStructure, InsertionCodesAndModifiedResidues) {
  Structure s = read_structure(data_path("altloc.pdb"));
  const Chain& c = s.chains[0];
  ASSERT_EQ(c.residues.size(), 3u);
  EXPECT_EQ(c.residues[1].seq_id, 6);
  EXPECT_EQ(c.residues[1].icode, ' ');
  EXPECT_EQ(c.residues[1].name, "MSE");
  EXPECT_EQ(c.residues[1].aa, token_from_one_letter('M'));
  EXPECT_EQ(c.residues[2].seq_id, 6);
  EXPECT_EQ(c.residues[2].icode, 'A');
  EXPECT_EQ(c.sequence(), "SMG");
}

// Expected values from gemmi reading the same file: chains A, B, C with
// 22, 14 and 9 polymer residues and 186, 113, 81 atoms; chain D holds
// only a ligand and a water.
TEST(ParseStructure, ThreeChainMmcifMatchesReferenceParser) {
  Structure s = read_structure(data_path("three_chain.cif"));
  ASSERT_EQ(s.chains.size(), 3u);
  const char* ids[] = {"A", "B", "C"};
  const std::size_t lens[] = {22, 14, 9};
  const std::size_t atoms[] = {186, 113, 81};
  const char* seqs[] = {"MKTAYIAKQRQISFVKSHFSRQ", "GSWEEVLKRLAEHG", "PEPTIDEYW"};
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(s.chains[i].id, ids[i]);
    EXPECT_EQ(s.chains[i].residues.size(), lens[i]);
    EXPECT_EQ(s.chains[i].sequence(), seqs[i]);
    std::size_t n = 0;
    for (const Residue& r : s.chains[i].residues)
      n += r.atoms.size();
    EXPECT_EQ(n, atoms[i]);
  }
  EXPECT_EQ(s.chains[1].residues.front().seq_id, 10);
  EXPECT_EQ(s.id, "3CHN");
  Structure model = three_chain_model();
  model.resolution.reset();
  expect_same(s, model, 1e-3);
}

TEST(ParseStructure, MalformedRecordReportsLine) {
  std::string text =
      "ATOM      1  N   ALA A   1      -0.966   0.493   1.500  1.00 10.00           N\n"
      "ATOM      2  CA  ALA A   1       0.2x7   0.418   0.692  1.00 10.00           C\n";
  try {
    parse_pdb(text);
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ParseStructure, NoPolymerIsEmptyStructure) {
  std::string text = "HETATM    1  O   HOH A 101       5.000   5.000   5.000  1.00 20.00           O\nEND\n";
  try {
    parse_pdb(text);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyStructure);
  }
  try {
    parse_mmcif("data_x\n_entry.id X\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::EmptyStructure || e.kind() == ErrorKind::Parse);
  }
}

TEST(ParseStructure, FirstModelOnly) {
  std::string atom1 = "ATOM      1  CA  ALA A   1       0.000   0.000   0.000  1.00 10.00           C\n";
  std::string atom2 = "ATOM      1  CA  GLY A   1       9.000   0.000   0.000  1.00 10.00           C\n";
  Structure s = parse_pdb("MODEL        1\n" + atom1 + "ENDMDL\nMODEL        2\n" + atom2 + "ENDMDL\n");
  ASSERT_EQ(s.chains.size(), 1u);
  EXPECT_EQ(s.chains[0].sequence(), "A");
}

TEST(RoundTrip, PdbSerializeReparse) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Structure s = synth::toy_complex("RT" + std::to_string(seed), seed);
    s.resolution = 2.5;
    s.method = "X-RAY DIFFRACTION";
    s.chains[0].residues[3].atoms[1].resolved = false;
    Structure a = parse_pdb(write_pdb(s), s.id);
    Structure b = parse_pdb(write_pdb(a), s.id);
    expect_same(a, b, 0.0);
    EXPECT_FALSE(a.chains[0].residues[3].atoms[1].resolved);
    expect_same(s, a, 1e-3);
  }
}

TEST(RoundTrip, MmcifSerializeReparse) {
  Structure s = three_chain_model();
  Structure a = parse_mmcif(write_mmcif(s), s.id);
  Structure b = parse_mmcif(write_mmcif(a), s.id);
  expect_same(a, b, 0.0);
  expect_same(s, a, 1e-3);
  Structure from_file = read_structure(data_path("three_chain.cif"));
  expect_same(from_file, parse_mmcif(write_mmcif(from_file), from_file.id), 0.0);
}

TEST(RoundTrip, JsonDumpIsStable) {
  Structure s = read_structure(data_path("tiny.pdb"));
  auto j = structure_to_json(s);
  EXPECT_EQ(j["chains"][0]["sequence"], "AG");
  EXPECT_EQ(j["chains"][0]["residues"][0]["atoms"].size(), 5u);
  EXPECT_EQ(j.dump(), structure_to_json(read_structure(data_path("tiny.pdb"))).dump());
}

TEST(FilterChain, QuotedThresholdsAcceptBalancedChain) {
  Chain c = synth::build_chain("A", "ACDEFGHIKLMNPQRSTVWYACDEF", std::string(25, 'H'), false);
  ChainFilterParams p{20, 500, 0.10, 0.50};
  auto r = filter_chain(c, p);
  EXPECT_TRUE(r.accepted);
  EXPECT_TRUE(r.reasons.empty());
}

TEST(FilterChain, ShortChainRejected) {
  Chain c = synth::build_chain("A", "ACDEFGHIKL", std::string(10, 'H'), false);
  auto r = filter_chain(c);
  EXPECT_FALSE(r.accepted);
  ASSERT_EQ(r.reasons.size(), 1u);
  EXPECT_EQ(r.reasons[0], "min_len");
}

TEST(FilterChain, PolyAlanineRejected) {
  Chain c = synth::build_chain("A", std::string(100, 'A'), std::string(100, 'H'), false);
  auto r = filter_chain(c);
  EXPECT_FALSE(r.accepted);
  ASSERT_EQ(r.reasons.size(), 1u);
  EXPECT_EQ(r.reasons[0], "max_single_aa_frac");
}

TEST(FilterChain, ListsEveryViolationAndIsPure) {
  Chain c = synth::build_chain("A", "AAAAAAAAAA", std::string(10, 'H'), false);
  for (int i = 0; i < 3; ++i)
    c.residues[i].aa = kTokenUnk;
  auto r1 = filter_chain(c);
  auto r2 = filter_chain(c);
  EXPECT_EQ(r1.reasons, r2.reasons);
  EXPECT_EQ(r1.reasons, (std::vector<std::string>{"min_len", "max_unk_frac", "max_single_aa_frac"}));
}

TEST(PseudoCbeta, CloseToBuiltCbetaOverHundredResidues) {
  Rng rng(7);
  std::string seq = synth::random_sequence(rng, 100);
  for (char& ch : seq)
    if (ch == 'G')
      ch = 'A';
  std::string ss;
  for (int i = 0; i < 100; ++i)
    ss += "HHHHELLEEH"[i % 10];
  Chain c = synth::build_chain("A", seq, ss);
  double worst = 0;
  for (const Residue& r : c.residues)
    worst = std::max(worst, distance(pseudo_cbeta(r), *r.position("CB")));
  EXPECT_LT(worst, 0.3);
}

TEST(PseudoCbeta, ClosedFormCase) {
  // C placed at the ideal 111 degree N-CA-C angle in the xy-plane.
  Vec3 n{0, 0, 0}, ca{1.458, 0, 0};
  double ang = deg2rad(111.0);
  Vec3 c{1.458 - 1.525 * std::cos(ang), 1.525 * std::sin(ang), 0};
  Vec3 cb = pseudo_cbeta(n, ca, c);
  // b = (1.458,0,0), c' = C-CA lies in xy, a = b x c' = (0,0,1.458*c'.y).
  double cx = c.x - ca.x, cy = c.y;
  Vec3 expect{-0.58273431 * 0 + 0.56802827 * 1.458 - 0.54067466 * cx + 1.458,
              -0.54067466 * cy, -0.58273431 * 1.458 * cy};
  EXPECT_NEAR(distance(cb, expect), 0.0, 1e-12);
  EXPECT_NEAR(distance(cb, ca), 1.52, 0.03);
}

TEST(PseudoCbeta, RigidEquivariance) {
  Rng rng(11);
  Chain c = synth::build_chain("A", "ACDEFGHIKLMNPQRSTVWY", std::string(20, 'E'));
  for (int trial = 0; trial < 20; ++trial) {
    RigidTransform t = rng.rigid(50.0);
    Chain moved = c;
    synth::transform_chain(moved, t);
    for (std::size_t i = 0; i < c.residues.size(); ++i)
      EXPECT_LT(distance(pseudo_cbeta(moved.residues[i]), t.apply(pseudo_cbeta(c.residues[i]))), 1e-9);
  }
}

TEST(PseudoCbeta, MissingBackboneIsFrameUnavailable) {
  Residue r;
  r.atoms.push_back({"CA", "C", {0, 0, 0}});
  r.atoms.push_back({"C", "C", {1.5, 0, 0}});
  try {
    pseudo_cbeta(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FrameUnavailable);
  }
}
