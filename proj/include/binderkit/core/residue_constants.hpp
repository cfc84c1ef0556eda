// Residue and atom vocabularies.
//
// Residue tokens (33): the 20 canonical amino acids in one-letter
// alphabetical order, UNK, MASK, and 11 reserved special tokens.
// Atom types (37): the 36 heavy-atom names that occur in the canonical amino
// acids, followed by a catch-all UNK atom (which also absorbs OXT).

#ifndef BINDERKIT_CORE_RESIDUE_CONSTANTS_HPP_
#define BINDERKIT_CORE_RESIDUE_CONSTANTS_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace binderkit {

inline constexpr int kNumAminoAcids = 20;
inline constexpr int kResidueVocab = 33;
inline constexpr int kTokenUnk = 20;
inline constexpr int kTokenMask = 21;
inline constexpr int kAtomVocab = 37;
inline constexpr int kAtomUnk = 36;
inline constexpr int kNumSidechainSlots = 32;

inline constexpr std::string_view kOneLetter = "ACDEFGHIKLMNPQRSTVWY";

inline constexpr std::array<std::string_view, kNumAminoAcids> kThreeLetter = {
  "ALA", "CYS", "ASP", "GLU", "PHE", "GLY", "HIS", "ILE", "LYS", "LEU",
  "MET", "ASN", "PRO", "GLN", "ARG", "SER", "THR", "VAL", "TRP", "TYR"};

// Roster order; the first four entries are the backbone atoms.
inline constexpr std::array<std::string_view, 36> kAtomNames = {
  "N",   "CA",  "C",   "O",   "CB",  "CG",  "CG1", "CG2", "OG",  "OG1",
  "SG",  "CD",  "CD1", "CD2", "ND1", "ND2", "OD1", "OD2", "SD",  "CE",
  "CE1", "CE2", "CE3", "NE",  "NE1", "NE2", "OE1", "OE2", "CH2", "NH1",
  "NH2", "OH",  "CZ",  "CZ2", "CZ3", "NZ"};

inline constexpr int kAtomN = 0;
inline constexpr int kAtomCA = 1;
inline constexpr int kAtomC = 2;
inline constexpr int kAtomO = 3;

// Heavy side-chain atoms per residue token.
inline const std::array<std::vector<std::string_view>, kNumAminoAcids>& sidechain_atoms() {
  static const std::array<std::vector<std::string_view>, kNumAminoAcids> table = {{
    {"CB"},                                                        // A
    {"CB", "SG"},                                                  // C
    {"CB", "CG", "OD1", "OD2"},                                    // D
    {"CB", "CG", "CD", "OE1", "OE2"},                              // E
    {"CB", "CG", "CD1", "CD2", "CE1", "CE2", "CZ"},                // F
    {},                                                            // G
    {"CB", "CG", "CD2", "ND1", "CE1", "NE2"},                      // H
    {"CB", "CG1", "CG2", "CD1"},                                   // I
    {"CB", "CG", "CD", "CE", "NZ"},                                // K
    {"CB", "CG", "CD1", "CD2"},                                    // L
    {"CB", "CG", "SD", "CE"},                                      // M
    {"CB", "CG", "ND2", "OD1"},                                    // N
    {"CB", "CG", "CD"},                                            // P
    {"CB", "CG", "CD", "NE2", "OE1"},                              // Q
    {"CB", "CG", "CD", "NE", "NH1", "NH2", "CZ"},                  // R
    {"CB", "OG"},                                                  // S
    {"CB", "CG2", "OG1"},                                          // T
    {"CB", "CG1", "CG2"},                                          // V
    {"CB", "CD1", "CD2", "CG", "CE2", "CE3", "NE1", "CH2", "CZ2", "CZ3"}, // W
    {"CB", "CG", "CD1", "CD2", "CE1", "CE2", "OH", "CZ"},          // Y
  }};
  return table;
}

inline int atom_type_index(std::string_view name) {
  for (int i = 0; i < static_cast<int>(kAtomNames.size()); ++i)
    if (kAtomNames[i] == name)
      return i;
  return kAtomUnk;
}

inline bool is_backbone_atom(std::string_view name) {
  return name == "N" || name == "CA" || name == "C" || name == "O";
}

// Side-chain slot of a roster atom (0..31), or -1 for backbone/unknown.
inline int sidechain_slot(std::string_view name) {
  int idx = atom_type_index(name);
  return (idx >= 4 && idx < kAtomUnk) ? idx - 4 : -1;
}

inline int token_from_one_letter(char c) {
  auto pos = kOneLetter.find(c);
  if (pos == std::string_view::npos)
    return c == '-' ? kTokenMask : kTokenUnk;
  return static_cast<int>(pos);
}

inline char one_letter(int token) {
  if (token >= 0 && token < kNumAminoAcids)
    return kOneLetter[token];
  if (token == kTokenMask)
    return '-';
  return 'X';
}

// Modified residues that map onto a canonical parent.
inline std::string_view standard_parent(std::string_view resname) {
  if (resname == "MSE") return "MET";
  if (resname == "SEP") return "SER";
  if (resname == "TPO") return "THR";
  if (resname == "PTR") return "TYR";
  if (resname == "HYP") return "PRO";
  if (resname == "MLY") return "LYS";
  if (resname == "CSO" || resname == "CME") return "CYS";
  if (resname == "HSD" || resname == "HSE" || resname == "HIE" || resname == "HID" || resname == "HIP")
    return "HIS";
  return resname;
}

inline int token_from_three_letter(std::string_view resname) {
  std::string_view parent = standard_parent(resname);
  for (int i = 0; i < kNumAminoAcids; ++i)
    if (kThreeLetter[i] == parent)
      return i;
  return kTokenUnk;
}

inline std::string_view three_letter(int token) {
  return (token >= 0 && token < kNumAminoAcids) ? kThreeLetter[token] : std::string_view("UNK");
}

inline std::string sequence_string(const std::vector<int>& tokens) {
  std::string s;
  s.reserve(tokens.size());
  for (int t : tokens)
    s.push_back(one_letter(t));
  return s;
}

inline std::vector<int> tokens_from_string(std::string_view seq) {
  std::vector<int> out;
  out.reserve(seq.size());
  for (char c : seq)
    out.push_back(token_from_one_letter(c));
  return out;
}

} // namespace binderkit

#endif
