// Assembles parsed atom records into a normalized Structure.
//
// Shared by the PDB and mmCIF readers. Normalization rules:
//  - first model only
//  - hydrogens dropped
//  - non-polymer residues dropped (HETATM whose name has no canonical parent)
//  - alternate locations: highest occupancy wins, first-seen on ties
//  - residues ordered by (seq_id, insertion code); chains in first-seen order

#ifndef BINDERKIT_STRUCTURE_BUILDER_HPP_
#define BINDERKIT_STRUCTURE_BUILDER_HPP_

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "structure.hpp"

namespace binderkit {

struct AtomRecord {
  bool hetatm = false;
  int model = 1;
  std::string chain;
  std::string resname;
  int seq_id = 0;
  char icode = ' ';
  std::string atom_name;
  std::string element;
  char altloc = ' ';
  double occupancy = 1.0;
  double b_factor = 0.0;
  Vec3 pos;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  if (s.empty())
    return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  if (s.empty())
    return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string element_from_name(std::string_view atom_name) {
  for (char c : atom_name)
    if (std::isalpha(static_cast<unsigned char>(c)))
      return std::string(1, c);
  return "X";
}

inline bool is_hydrogen(const AtomRecord& r) {
  if (!r.element.empty())
    return r.element == "H" || r.element == "D";
  return !r.atom_name.empty() && (r.atom_name[0] == 'H' || r.atom_name[0] == 'D');
}

} // namespace detail

class StructureBuilder {
public:
  void add(AtomRecord rec) {
    if (first_model_ < 0)
      first_model_ = rec.model;
    if (rec.model != first_model_)
      return;
    if (rec.element.empty())
      rec.element = detail::element_from_name(rec.atom_name);
    for (char& c : rec.element)
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (detail::is_hydrogen(rec))
      return;
    int token = token_from_three_letter(rec.resname);
    if (rec.hetatm && token == kTokenUnk)
      return;
    records_.push_back(std::move(rec));
  }

  Structure build(std::string id, std::optional<double> resolution,
                  std::optional<std::string> method) {
    Structure s;
    s.id = std::move(id);
    s.resolution = resolution;
    s.method = std::move(method);

    std::vector<std::string> chain_order;
    using ResKey = std::tuple<int, char>;
    std::map<std::string, std::map<ResKey, std::size_t>> res_index;
    struct Pending {
      Residue res;
      std::vector<double> occupancy;  // parallel to res.atoms
    };
    std::map<std::string, std::vector<Pending>> pending;

    for (const AtomRecord& r : records_) {
      if (!res_index.count(r.chain))
        chain_order.push_back(r.chain);
      auto& idx = res_index[r.chain];
      auto& list = pending[r.chain];
      ResKey key{r.seq_id, r.icode};
      auto it = idx.find(key);
      if (it == idx.end()) {
        Pending p;
        p.res.seq_id = r.seq_id;
        p.res.icode = r.icode;
        p.res.name = r.resname;
        p.res.aa = token_from_three_letter(r.resname);
        it = idx.emplace(key, list.size()).first;
        list.push_back(std::move(p));
      }
      Pending& p = list[it->second];
      Atom atom{r.atom_name, r.element, r.pos, r.occupancy > 0.0, r.occupancy, r.b_factor};
      auto existing = std::find_if(p.res.atoms.begin(), p.res.atoms.end(),
                                   [&](const Atom& a) { return a.name == r.atom_name; });
      if (existing == p.res.atoms.end()) {
        p.res.atoms.push_back(std::move(atom));
      } else if (r.occupancy > existing->occupancy) {
        // Only strictly higher occupancy displaces the first-seen altloc.
        *existing = std::move(atom);
      }
    }

    for (const std::string& cid : chain_order) {
      auto& list = pending[cid];
      std::vector<ResKey> keys;
      for (auto& [key, pos] : res_index[cid])
        keys.push_back(key);
      Chain chain;
      chain.id = cid;
      for (const ResKey& key : keys) {  // std::map iterates in (seq_id, icode) order
        Residue res = std::move(list[res_index[cid][key]].res);
        res.index = static_cast<int>(chain.residues.size());
        chain.residues.push_back(std::move(res));
      }
      if (!chain.residues.empty())
        s.chains.push_back(std::move(chain));
    }
    if (s.chains.empty())
      fail(ErrorKind::EmptyStructure, "no polymer chains in '" + s.id + "'");
    return s;
  }

private:
  int first_model_ = -1;
  std::vector<AtomRecord> records_;
};

} // namespace binderkit

#endif
