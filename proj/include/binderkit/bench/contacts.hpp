// Inter-chain residue contacts and contact-prediction metrics.
//
// heavy8: some pair of resolved heavy atoms closer than 8 Å (strict).
// ca10:   Cα–Cα distance at most 10 Å (inclusive).

#ifndef BINDERKIT_BENCH_CONTACTS_HPP_
#define BINDERKIT_BENCH_CONTACTS_HPP_

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "../features/knn.hpp"
#include "../structure/structure.hpp"

namespace binderkit {

enum class ContactDef { Heavy8, Ca10 };

inline const char* contact_def_name(ContactDef d) { return d == ContactDef::Heavy8 ? "heavy8" : "ca10"; }

inline ContactDef parse_contact_def(std::string_view s) {
  if (s == "heavy8")
    return ContactDef::Heavy8;
  if (s == "ca10")
    return ContactDef::Ca10;
  fail(ErrorKind::Contract, "unknown contact definition '" + std::string(s) + "' (heavy8|ca10)");
}

using ResiduePair = std::pair<ResidueRef, ResidueRef>;  // first < second

struct ContactSet {
  ContactDef def = ContactDef::Heavy8;
  std::set<ResiduePair> pairs;

  std::size_t size() const { return pairs.size(); }
};

inline bool is_heavy_atom(const Atom& a) {
  std::string_view e = a.element;
  if (e.empty())
    e = std::string_view(a.name).substr(0, 1);
  return e != "H" && e != "D";
}

inline ContactSet contacts(const Structure& s, ContactDef def) {
  ContactSet out;
  out.def = def;
  std::vector<Vec3> pts;
  std::vector<ResidueRef> owner;
  for (const ResidueRef& ref : residue_refs(s)) {
    const Residue& r = s.chains[ref.chain].residues[ref.residue];
    if (def == ContactDef::Ca10) {
      if (auto ca = r.position("CA")) {
        pts.push_back(*ca);
        owner.push_back(ref);
      }
      continue;
    }
    for (const Atom& a : r.atoms)
      if (a.resolved && is_heavy_atom(a)) {
        pts.push_back(a.pos);
        owner.push_back(ref);
      }
  }
  const double cutoff = def == ContactDef::Ca10 ? 10.0 : 8.0;
  CellGrid grid(pts, {}, cutoff);
  for (int i = 0; i < static_cast<int>(pts.size()); ++i)
    for (const Neighbor& nb : grid.within(pts[i], cutoff, i)) {
      const ResidueRef& a = owner[i];
      const ResidueRef& b = owner[nb.index];
      if (a.chain == b.chain || nb.index < i)
        continue;
      if (def == ContactDef::Heavy8 && !(nb.dist_sq < cutoff * cutoff))
        continue;
      out.pairs.insert(a < b ? ResiduePair{a, b} : ResiduePair{b, a});
    }
  return out;
}

// Contacts between two chains as (residue in chain_a, residue in chain_b).
inline std::set<std::pair<int, int>> interface_pairs(const ContactSet& cs, int chain_a, int chain_b) {
  std::set<std::pair<int, int>> out;
  for (const auto& [x, y] : cs.pairs) {
    if (x.chain == chain_a && y.chain == chain_b)
      out.insert({x.residue, y.residue});
    else if (x.chain == chain_b && y.chain == chain_a)
      out.insert({y.residue, x.residue});
  }
  return out;
}

inline double contact_density(std::size_t n_contacts, std::size_t len1, std::size_t len2) {
  require(len1 > 0 && len2 > 0, "contact density needs nonempty chains");
  return static_cast<double>(n_contacts) / (static_cast<double>(len1) * static_cast<double>(len2));
}

inline double contact_density(const ContactSet& cs, std::size_t len1, std::size_t len2) {
  return contact_density(cs.size(), len1, len2);
}

struct ScoredContact {
  int i = 0;  // residue in the first chain
  int j = 0;  // residue in the second chain
  double score = 0.0;
};

// Top-k selections; the L-relative ones use L = shorter chain length and
// never drop below 1.
enum class TopK { K10, K25, K50, L10, L5 };

inline int resolve_top_k(TopK k, int shorter_len) {
  switch (k) {
    case TopK::K10: return 10;
    case TopK::K25: return 25;
    case TopK::K50: return 50;
    case TopK::L10: return std::max(1, shorter_len / 10);
    case TopK::L5: return std::max(1, shorter_len / 5);
  }
  return 10;
}

inline TopK parse_top_k(std::string_view s) {
  if (s == "10") return TopK::K10;
  if (s == "25") return TopK::K25;
  if (s == "50") return TopK::K50;
  if (s == "L/10") return TopK::L10;
  if (s == "L/5") return TopK::L5;
  fail(ErrorKind::Contract, "unknown top-k '" + std::string(s) + "' (10|25|50|L/10|L/5)");
}

// Highest scores first; equal scores keep input order.
inline std::vector<ScoredContact> top_contacts(std::vector<ScoredContact> predicted, int k) {
  std::stable_sort(predicted.begin(), predicted.end(),
                   [](const ScoredContact& a, const ScoredContact& b) { return a.score > b.score; });
  if (static_cast<int>(predicted.size()) > k)
    predicted.resize(k);
  return predicted;
}

// Hits among the top k divided by k, also when fewer than k predictions or
// true contacts exist.
inline double topk_precision(const std::vector<ScoredContact>& predicted,
                             const std::set<std::pair<int, int>>& truth, int k) {
  require(k > 0, "top-k precision needs k > 0");
  int hits = 0;
  for (const ScoredContact& c : top_contacts(predicted, k))
    hits += truth.count({c.i, c.j}) ? 1 : 0;
  return static_cast<double>(hits) / k;
}

// |A ∩ B| / |A ∪ B| after mapping off-target residues onto on-target
// numbering (binder_map / target_map: off index -> on index, -1 when
// unaligned). Unmapped contacts stay in the union only. Empty union gives 0.
inline double jaccard_difficulty(const std::set<std::pair<int, int>>& on, const std::set<std::pair<int, int>>& off,
                                 const std::vector<int>* binder_map = nullptr,
                                 const std::vector<int>* target_map = nullptr) {
  auto remap = [](const std::vector<int>* m, int i) {
    if (!m)
      return i;
    return i >= 0 && i < static_cast<int>(m->size()) ? (*m)[i] : -1;
  };
  std::set<std::pair<int, int>> mapped;
  std::size_t unmapped = 0;
  for (const auto& [b, t] : off) {
    int mb = remap(binder_map, b), mt = remap(target_map, t);
    if (mb < 0 || mt < 0)
      ++unmapped;
    else
      mapped.insert({mb, mt});
  }
  std::size_t inter = 0;
  for (const auto& p : mapped)
    inter += on.count(p);
  const std::size_t uni = on.size() + mapped.size() + unmapped - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace binderkit

#endif
