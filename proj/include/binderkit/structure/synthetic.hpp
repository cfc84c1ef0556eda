// Ideal-geometry structure builder.
//
// Builds backbones from (phi, psi) with standard bond lengths and angles and
// places side chains from approximate internal coordinates. Used to generate
// deterministic toy complexes and test fixtures without external files.

#ifndef BINDERKIT_STRUCTURE_SYNTHETIC_HPP_
#define BINDERKIT_STRUCTURE_SYNTHETIC_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "../core/random.hpp"
#include "structure.hpp"

namespace binderkit::synth {

// One internal-coordinate rule: place `atom` from three reference atoms.
struct ZRule {
  std::string_view atom, a, b, c;
  double bond, angle, torsion;
};

inline const std::vector<ZRule>& sidechain_rules(int aa) {
  static const std::array<std::vector<ZRule>, kNumAminoAcids> rules = {{
    /* A */ {},
    /* C */ {{"SG", "N", "CA", "CB", 1.81, 114.0, -60}},
    /* D */ {{"CG", "N", "CA", "CB", 1.52, 113.0, -60}, {"OD1", "CA", "CB", "CG", 1.25, 119.0, 0},
             {"OD2", "CA", "CB", "CG", 1.25, 118.0, 180}},
    /* E */ {{"CG", "N", "CA", "CB", 1.52, 114.0, -60}, {"CD", "CA", "CB", "CG", 1.52, 113.0, 180},
             {"OE1", "CB", "CG", "CD", 1.25, 119.0, 0}, {"OE2", "CB", "CG", "CD", 1.25, 118.0, 180}},
    /* F */ {{"CG", "N", "CA", "CB", 1.50, 114.0, -60}, {"CD1", "CA", "CB", "CG", 1.39, 120.8, 90},
             {"CD2", "CA", "CB", "CG", 1.39, 120.8, -90}, {"CE1", "CB", "CG", "CD1", 1.39, 120.0, 180},
             {"CE2", "CB", "CG", "CD2", 1.39, 120.0, 180}, {"CZ", "CG", "CD1", "CE1", 1.39, 120.0, 0}},
    /* G */ {},
    /* H */ {{"CG", "N", "CA", "CB", 1.50, 114.0, -60}, {"ND1", "CA", "CB", "CG", 1.38, 122.7, 90},
             {"CD2", "CA", "CB", "CG", 1.36, 131.0, -90}, {"CE1", "CB", "CG", "ND1", 1.32, 109.0, 180},
             {"NE2", "CB", "CG", "CD2", 1.37, 107.0, 180}},
    /* I */ {{"CG1", "N", "CA", "CB", 1.53, 110.4, -60}, {"CG2", "N", "CA", "CB", 1.53, 110.5, 180},
             {"CD1", "CA", "CB", "CG1", 1.52, 114.0, 180}},
    /* K */ {{"CG", "N", "CA", "CB", 1.52, 114.0, -60}, {"CD", "CA", "CB", "CG", 1.52, 111.0, 180},
             {"CE", "CB", "CG", "CD", 1.52, 111.0, 180}, {"NZ", "CG", "CD", "CE", 1.49, 112.0, 180}},
    /* L */ {{"CG", "N", "CA", "CB", 1.53, 116.0, -60}, {"CD1", "CA", "CB", "CG", 1.52, 110.5, 180},
             {"CD2", "CA", "CB", "CG", 1.52, 110.5, 60}},
    /* M */ {{"CG", "N", "CA", "CB", 1.52, 114.0, -60}, {"SD", "CA", "CB", "CG", 1.81, 112.7, 180},
             {"CE", "CB", "CG", "SD", 1.79, 100.8, 70}},
    /* N */ {{"CG", "N", "CA", "CB", 1.52, 113.0, -60}, {"OD1", "CA", "CB", "CG", 1.23, 121.0, 0},
             {"ND2", "CA", "CB", "CG", 1.33, 116.0, 180}},
    /* P */ {{"CG", "N", "CA", "CB", 1.50, 104.5, 30}, {"CD", "CA", "CB", "CG", 1.50, 105.0, -35}},
    /* Q */ {{"CG", "N", "CA", "CB", 1.52, 114.0, -60}, {"CD", "CA", "CB", "CG", 1.52, 113.0, 180},
             {"OE1", "CB", "CG", "CD", 1.23, 121.0, 0}, {"NE2", "CB", "CG", "CD", 1.33, 117.0, 180}},
    /* R */ {{"CG", "N", "CA", "CB", 1.52, 114.0, -60}, {"CD", "CA", "CB", "CG", 1.52, 111.0, 180},
             {"NE", "CB", "CG", "CD", 1.46, 112.0, 180}, {"CZ", "CG", "CD", "NE", 1.33, 124.0, 180},
             {"NH1", "CD", "NE", "CZ", 1.33, 120.0, 0}, {"NH2", "CD", "NE", "CZ", 1.33, 120.0, 180}},
    /* S */ {{"OG", "N", "CA", "CB", 1.42, 111.0, -60}},
    /* T */ {{"OG1", "N", "CA", "CB", 1.43, 109.5, -60}, {"CG2", "N", "CA", "CB", 1.53, 111.0, 180}},
    /* V */ {{"CG1", "N", "CA", "CB", 1.53, 110.5, 180}, {"CG2", "N", "CA", "CB", 1.53, 110.5, -60}},
    /* W */ {{"CG", "N", "CA", "CB", 1.50, 114.0, -60}, {"CD1", "CA", "CB", "CG", 1.37, 127.0, 90},
             {"CD2", "CA", "CB", "CG", 1.43, 126.6, -90}, {"NE1", "CB", "CG", "CD1", 1.38, 110.0, 180},
             {"CE2", "CB", "CG", "CD2", 1.41, 107.3, 180}, {"CE3", "CB", "CG", "CD2", 1.40, 133.9, 0},
             {"CZ2", "CG", "CD2", "CE2", 1.40, 122.3, 180}, {"CZ3", "CG", "CD2", "CE3", 1.39, 118.8, 180},
             {"CH2", "CD2", "CE2", "CZ2", 1.37, 117.5, 0}},
    /* Y */ {{"CG", "N", "CA", "CB", 1.50, 114.0, -60}, {"CD1", "CA", "CB", "CG", 1.39, 120.8, 90},
             {"CD2", "CA", "CB", "CG", 1.39, 120.8, -90}, {"CE1", "CB", "CG", "CD1", 1.39, 120.0, 180},
             {"CE2", "CB", "CG", "CD2", 1.39, 120.0, 180}, {"CZ", "CG", "CD1", "CE1", 1.39, 120.0, 0},
             {"OH", "CD1", "CE1", "CZ", 1.38, 120.0, 180}},
  }};
  static const std::vector<ZRule> none;
  return (aa >= 0 && aa < kNumAminoAcids) ? rules[aa] : none;
}

struct Torsions {
  double phi, psi;
};

inline Torsions torsions_for(char ss) {
  switch (ss) {
    case 'H': return {-57.0, -47.0};
    case 'E': return {-120.0, 130.0};
    default: return {-70.0, 140.0};
  }
}

// Builds a chain from one-letter sequence and per-residue secondary
// structure codes (H helix, E strand, anything else loop).
inline Chain build_chain(const std::string& id, std::string_view sequence, std::string_view ss,
                         bool with_sidechains = true, int first_seq_id = 1) {
  require(!sequence.empty(), "build_chain: empty sequence");
  require(ss.empty() || ss.size() == sequence.size(), "build_chain: ss length mismatch");
  Chain chain;
  chain.id = id;
  Vec3 n{0, 0, 0};
  Vec3 ca{1.458, 0, 0};
  Vec3 c = ca + Vec3{std::cos(deg2rad(180 - 111.2)), std::sin(deg2rad(180 - 111.2)), 0} * 1.525;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    char code = ss.empty() ? 'H' : ss[i];
    Torsions tor = torsions_for(code);
    if (i > 0) {
      Torsions prev = torsions_for(ss.empty() ? 'H' : ss[i - 1]);
      Residue& last = chain.residues.back();
      Vec3 pn = *last.position("N"), pca = *last.position("CA"), pc = *last.position("C");
      n = place_atom(pn, pca, pc, 1.329, 116.2, prev.psi);
      ca = place_atom(pca, pc, n, 1.458, 121.7, 180.0);
      c = place_atom(pc, n, ca, 1.525, 111.2, tor.phi);
    }
    Residue r;
    r.index = static_cast<int>(i);
    r.seq_id = first_seq_id + static_cast<int>(i);
    r.aa = token_from_one_letter(sequence[i]);
    r.name = std::string(three_letter(r.aa));
    r.atoms.push_back({"N", "N", n});
    r.atoms.push_back({"CA", "C", ca});
    r.atoms.push_back({"C", "C", c});
    // Carbonyl O lies trans to the next N about CA-C.
    r.atoms.push_back({"O", "O", place_atom(n, ca, c, 1.231, 120.5, tor.psi + 180.0)});
    if (with_sidechains && r.aa != 5 && r.aa < kNumAminoAcids) {  // 5 = GLY
      Vec3 cb = place_atom(c, n, ca, 1.53, 110.5, -122.55);
      r.atoms.push_back({"CB", "C", cb});
      for (const ZRule& rule : sidechain_rules(r.aa)) {
        Vec3 pa = *r.position(rule.a), pb = *r.position(rule.b), pc = *r.position(rule.c);
        Vec3 p = place_atom(pa, pb, pc, rule.bond, rule.angle, rule.torsion);
        r.atoms.push_back({std::string(rule.atom), std::string(1, rule.atom[0]), p});
      }
    }
    chain.residues.push_back(std::move(r));
  }
  return chain;
}

inline void transform_chain(Chain& chain, const RigidTransform& t) {
  for (Residue& r : chain.residues)
    for (Atom& a : r.atoms)
      a.pos = t.apply(a.pos);
}

inline Vec3 ca_centroid(const Chain& chain) {
  Vec3 sum;
  for (const Residue& r : chain.residues)
    sum += *r.position("CA");
  return sum / static_cast<double>(chain.residues.size());
}

// Principal direction of the Cα trace (first to last quarter).
inline Vec3 chain_axis(const Chain& chain) {
  std::size_t n = chain.residues.size(), q = std::max<std::size_t>(1, n / 4);
  Vec3 head, tail;
  for (std::size_t i = 0; i < q; ++i) {
    head += *chain.residues[i].position("CA");
    tail += *chain.residues[n - 1 - i].position("CA");
  }
  Vec3 d = tail - head;
  return d.length() > 1e-9 ? d.normalized() : Vec3{1, 0, 0};
}

// Rotates/translates a chain so its Cα centroid lands at `center` and its
// axis aligns with `axis`.
inline void place_chain(Chain& chain, const Vec3& center, const Vec3& axis) {
  Vec3 from = chain_axis(chain), to = axis.normalized();
  Vec3 k = from.cross(to);
  double s = k.length(), cth = from.dot(to);
  Mat3 rot;
  if (s > 1e-12) {
    rot = axis_angle(k, std::atan2(s, cth));
  } else if (cth < 0) {
    Vec3 perp = from.cross(std::abs(from.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0});
    rot = axis_angle(perp, kPi);
  }
  Vec3 centroid = ca_centroid(chain);
  transform_chain(chain, {rot, center - rot * centroid});
}

inline std::string random_sequence(Rng& rng, std::size_t n) {
  std::string s(n, 'A');
  for (char& ch : s)
    ch = kOneLetter[rng.index(kNumAminoAcids)];
  return s;
}

// Parallel helices arranged on a grid in the xy-plane, axes along z.
inline Structure helix_bundle(const std::string& id, int n_helices, int helix_len,
                              double spacing, std::uint64_t seed, bool with_sidechains = true) {
  Rng rng(seed);
  Structure s;
  s.id = id;
  s.method = "SYNTHETIC";
  int side = 1;
  while (side * side < n_helices)
    ++side;
  for (int h = 0; h < n_helices; ++h) {
    std::string cid(1, static_cast<char>('A' + h % 26));
    if (h >= 26)
      cid += std::to_string(h / 26);
    Chain c = build_chain(cid, random_sequence(rng, helix_len), std::string(helix_len, 'H'),
                          with_sidechains);
    double x = (h % side) * spacing, y = (h / side) * spacing;
    place_chain(c, {x, y, 0}, {0, 0, h % 2 == 0 ? 1.0 : -1.0});
    s.chains.push_back(std::move(c));
  }
  return s;
}

// A two-chain toy complex: a helical design chain packed against a target
// helix-loop-helix. Sequences are random unless given.
inline Structure toy_complex(const std::string& id, std::uint64_t seed, int design_len = 20,
                             int target_len = 30, std::string design_seq = {},
                             std::string target_seq = {}) {
  Rng rng(seed);
  if (design_seq.empty())
    design_seq = random_sequence(rng, design_len);
  if (target_seq.empty())
    target_seq = random_sequence(rng, target_len);
  int t1 = static_cast<int>(target_seq.size()) / 2 - 2;
  std::string target_ss = std::string(t1, 'H') + "LLLL" +
                          std::string(target_seq.size() - t1 - 4, 'H');
  Structure s;
  s.id = id;
  s.method = "SYNTHETIC";
  Chain target = build_chain("A", target_seq, target_ss);
  place_chain(target, {0, 0, 0}, {0, 0, 1});
  Chain design = build_chain("B", design_seq, std::string(design_seq.size(), 'H'));
  double jitter = rng.uniform(-1.0, 1.0);
  place_chain(design, {9.5 + jitter, 0, 0}, {0, 0.2 * jitter, 1});
  target.role = ChainRole::Target;
  design.role = ChainRole::Design;
  s.chains.push_back(std::move(target));
  s.chains.push_back(std::move(design));
  return s;
}

} // namespace binderkit::synth

#endif
