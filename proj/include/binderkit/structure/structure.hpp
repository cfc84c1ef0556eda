// In-memory macromolecular model: Structure > Chain > Residue > Atom.

#ifndef BINDERKIT_STRUCTURE_STRUCTURE_HPP_
#define BINDERKIT_STRUCTURE_STRUCTURE_HPP_

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "../core/error.hpp"
#include "../core/geometry.hpp"
#include "../core/residue_constants.hpp"

namespace binderkit {

struct Atom {
  std::string name;
  std::string element;
  Vec3 pos;
  bool resolved = true;
  double occupancy = 1.0;
  double b_factor = 0.0;
};

struct Residue {
  int index = 0;             // 0-based position in chain
  int seq_id = 0;            // author residue number
  char icode = ' ';          // insertion code
  std::string name;          // residue name as read (e.g. MSE)
  int aa = kTokenUnk;        // residue token
  std::vector<Atom> atoms;

  const Atom* find(std::string_view atom_name) const {
    for (const Atom& a : atoms)
      if (a.name == atom_name)
        return &a;
    return nullptr;
  }
  Atom* find(std::string_view atom_name) {
    for (Atom& a : atoms)
      if (a.name == atom_name)
        return &a;
    return nullptr;
  }
  // Position of a resolved atom, if any.
  std::optional<Vec3> position(std::string_view atom_name) const {
    const Atom* a = find(atom_name);
    if (!a || !a->resolved)
      return std::nullopt;
    return a->pos;
  }
  bool has(std::string_view atom_name) const { return position(atom_name).has_value(); }
  bool is_unknown() const { return aa == kTokenUnk; }
};

enum class ChainRole { Design, Target, Context };

inline const char* role_name(ChainRole r) {
  switch (r) {
    case ChainRole::Design: return "design";
    case ChainRole::Target: return "target";
    case ChainRole::Context: return "context";
  }
  return "context";
}

struct Chain {
  std::string id;
  std::vector<Residue> residues;
  ChainRole role = ChainRole::Context;

  std::size_t size() const { return residues.size(); }
  std::vector<int> tokens() const {
    std::vector<int> t;
    t.reserve(residues.size());
    for (const Residue& r : residues)
      t.push_back(r.aa);
    return t;
  }
  std::string sequence() const { return sequence_string(tokens()); }
};

struct Structure {
  std::string id;
  std::vector<Chain> chains;
  std::optional<double> resolution;
  std::optional<std::string> method;

  std::size_t residue_count() const {
    std::size_t n = 0;
    for (const Chain& c : chains)
      n += c.residues.size();
    return n;
  }
  const Chain* find_chain(std::string_view cid) const {
    for (const Chain& c : chains)
      if (c.id == cid)
        return &c;
    return nullptr;
  }
  Chain* find_chain(std::string_view cid) {
    for (Chain& c : chains)
      if (c.id == cid)
        return &c;
    return nullptr;
  }

  // Applies a rigid motion to every atom.
  void transform(const RigidTransform& t) {
    for (Chain& c : chains)
      for (Residue& r : c.residues)
        for (Atom& a : r.atoms)
          if (a.resolved)
            a.pos = t.apply(a.pos);
  }

  // Marks the listed chains as design chains and all others as targets.
  void set_design_chains(const std::vector<std::string>& ids) {
    for (Chain& c : chains)
      c.role = std::find(ids.begin(), ids.end(), c.id) != ids.end() ? ChainRole::Design
                                                                    : ChainRole::Target;
  }
};

// Flattened (chain, residue) index into a Structure.
struct ResidueRef {
  int chain = 0;
  int residue = 0;
  auto operator<=>(const ResidueRef&) const = default;
};

inline std::vector<ResidueRef> residue_refs(const Structure& s) {
  std::vector<ResidueRef> out;
  for (int c = 0; c < static_cast<int>(s.chains.size()); ++c)
    for (int r = 0; r < static_cast<int>(s.chains[c].residues.size()); ++r)
      out.push_back({c, r});
  return out;
}

// Per-residue design mask in flattened order from chain roles.
inline std::vector<bool> design_mask_from_roles(const Structure& s) {
  std::vector<bool> mask;
  for (const Chain& c : s.chains)
    for (std::size_t i = 0; i < c.residues.size(); ++i)
      mask.push_back(c.role == ChainRole::Design);
  return mask;
}

} // namespace binderkit

#endif
