// Selective-binder test set curation.
//
// 1. Chains pass the length / composition filter.
// 2. Two chains of one entry form a heterodimer when their minimum Cα–Cα
//    distance is at most 10 Å and their aligned identity is below 90%.
// 3. Chains are clustered by single linkage at aligned identity >= 90%.
//    Each cluster is a binder cluster; it is kept when its heterodimers
//    come from between 2 and 30 entries.
// 4. One heterodimer is the on-target pair (seeded pick, or pinned by entry
//    id). Every other heterodimer is an off-target candidate, rejected when
//    the target sequences are identical, or the binder alignment has
//    coverage < 0.9, identity < 0.9 or Cα RMSD > 2.5 Å.
// 5. Difficulty is the Jaccard similarity of the Cα 10 Å interface contacts
//    after mapping the off-target binder and target residues onto the
//    on-target numbering by sequence alignment. Candidates with difficulty
//    >= 0.9 are dropped and the lowest-difficulty one is kept.

#ifndef BINDERKIT_BENCH_CURATE_HPP_
#define BINDERKIT_BENCH_CURATE_HPP_

#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "../core/random.hpp"
#include "../structure/chain_ops.hpp"
#include "align.hpp"
#include "contacts.hpp"

namespace binderkit {

struct CurationParams {
  ChainFilterParams chain_filter;
  double interface_ca = 10.0;
  double max_partner_identity = 0.9;
  double cluster_identity = 0.9;
  int min_entries = 2;
  int max_entries = 30;
  double min_coverage = 0.9;
  double min_identity = 0.9;
  double max_rmsd = 2.5;
  double max_difficulty = 0.9;
  std::uint64_t seed = 0;
  std::optional<std::string> on_target_entry;
  std::optional<int> sample;  // uniform subsample of the emitted cases
};

struct ChainRef {
  int entry = 0;
  int chain = 0;
  auto operator<=>(const ChainRef&) const = default;
};

struct Heterodimer {
  ChainRef binder;
  ChainRef target;
};

struct SelectivityCase {
  int cluster = 0;
  Heterodimer on, off;
  std::vector<int> binder_map;  // off-target binder residue -> on-target binder residue
  std::vector<int> target_map;
  double identity = 0.0;
  double coverage = 0.0;
  double rmsd = 0.0;
  double difficulty = 0.0;
};

// reasons: too_few_entries, too_many_entries (cluster level, off unset);
// identical_target, low_coverage, low_identity, high_rmsd, unalignable,
// difficulty, not_lowest_difficulty (per off-target candidate).
struct Rejection {
  int cluster = 0;
  std::optional<Heterodimer> on;
  std::optional<Heterodimer> off;
  std::vector<std::string> reasons;
};

struct CurationResult {
  int n_clusters = 0;
  std::vector<std::vector<ChainRef>> clusters;
  std::vector<SelectivityCase> cases;
  std::vector<Rejection> rejections;
};

inline std::string chain_label(const std::vector<Structure>& entries, const ChainRef& c) {
  return entries[c.entry].id + ":" + entries[c.entry].chains[c.chain].id;
}

namespace detail {

inline double min_ca_distance(const Chain& a, const Chain& b) {
  double best = kInf;
  for (const Residue& ra : a.residues)
    if (auto pa = ra.position("CA"))
      for (const Residue& rb : b.residues)
        if (auto pb = rb.position("CA"))
          best = std::min(best, distance(*pa, *pb));
  return best;
}

inline std::vector<std::vector<ChainRef>> cluster_chains(const std::vector<Structure>& entries,
                                                         const std::vector<ChainRef>& chains, double cutoff) {
  const int n = static_cast<int>(chains.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::vector<int>> tokens(n);
  for (int i = 0; i < n; ++i)
    tokens[i] = entries[chains[i].entry].chains[chains[i].chain].tokens();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int a = find(i), b = find(j);
      if (a != b && align_sequences(tokens[i], tokens[j]).identity >= cutoff)
        parent[std::max(a, b)] = std::min(a, b);
    }
  std::map<int, std::vector<ChainRef>> groups;
  for (int i = 0; i < n; ++i)
    groups[find(i)].push_back(chains[i]);
  std::vector<std::vector<ChainRef>> out;
  for (auto& [root, members] : groups)
    out.push_back(std::move(members));
  return out;
}

} // namespace detail

inline CurationResult curate_selectivity_set(const std::vector<Structure>& entries, const CurationParams& p = {}) {
  CurationResult res;
  auto chain_of = [&](const ChainRef& c) -> const Chain& { return entries[c.entry].chains[c.chain]; };

  std::vector<ChainRef> kept;
  for (int e = 0; e < static_cast<int>(entries.size()); ++e)
    for (int c = 0; c < static_cast<int>(entries[e].chains.size()); ++c)
      if (filter_chain(entries[e].chains[c], p.chain_filter).accepted)
        kept.push_back({e, c});

  std::map<ChainRef, std::vector<ChainRef>> partners;
  for (std::size_t x = 0; x < kept.size(); ++x)
    for (std::size_t y = 0; y < kept.size(); ++y) {
      if (x == y || kept[x].entry != kept[y].entry)
        continue;
      const Chain& a = chain_of(kept[x]);
      const Chain& b = chain_of(kept[y]);
      if (detail::min_ca_distance(a, b) <= p.interface_ca &&
          align_sequences(a.tokens(), b.tokens()).identity < p.max_partner_identity)
        partners[kept[x]].push_back(kept[y]);
    }

  std::map<int, ContactSet> contact_cache;
  auto interface_of = [&](const Heterodimer& h) {
    auto it = contact_cache.find(h.binder.entry);
    if (it == contact_cache.end())
      it = contact_cache.emplace(h.binder.entry, contacts(entries[h.binder.entry], ContactDef::Ca10)).first;
    return interface_pairs(it->second, h.binder.chain, h.target.chain);
  };

  res.clusters = detail::cluster_chains(entries, kept, p.cluster_identity);
  res.n_clusters = static_cast<int>(res.clusters.size());
  for (int ci = 0; ci < res.n_clusters; ++ci) {
    std::vector<Heterodimer> dimers;
    std::set<int> dimer_entries;
    for (const ChainRef& b : res.clusters[ci])
      if (auto it = partners.find(b); it != partners.end())
        for (const ChainRef& t : it->second) {
          dimers.push_back({b, t});
          dimer_entries.insert(b.entry);
        }
    if (dimers.empty())
      continue;
    const int n_entries = static_cast<int>(dimer_entries.size());
    if (n_entries < p.min_entries || n_entries > p.max_entries) {
      res.rejections.push_back(
          {ci, std::nullopt, std::nullopt, {n_entries < p.min_entries ? "too_few_entries" : "too_many_entries"}});
      continue;
    }

    std::size_t on_idx = dimers.size();
    if (p.on_target_entry)
      for (std::size_t k = 0; k < dimers.size(); ++k)
        if (entries[dimers[k].binder.entry].id == *p.on_target_entry) {
          on_idx = k;
          break;
        }
    if (on_idx == dimers.size()) {
      Rng rng(splitmix64(p.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(ci + 1))));
      on_idx = rng.index(dimers.size());
    }
    const Heterodimer on = dimers[on_idx];
    const Chain& on_binder = chain_of(on.binder);
    const Chain& on_target = chain_of(on.target);
    const std::set<std::pair<int, int>> on_iface = interface_of(on);

    std::optional<SelectivityCase> best;
    std::vector<Rejection> passed;
    for (std::size_t k = 0; k < dimers.size(); ++k) {
      if (k == on_idx)
        continue;
      const Heterodimer& off = dimers[k];
      Rejection rej{ci, on, off, {}};
      const Chain& off_binder = chain_of(off.binder);
      const Chain& off_target = chain_of(off.target);
      if (on_target.tokens() == off_target.tokens())
        rej.reasons.push_back("identical_target");
      std::optional<ChainAlignment> al;
      try {
        al = align_binders(on_binder, off_binder);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Unalignable)
          throw;
        rej.reasons.push_back("unalignable");
      }
      if (al) {
        if (al->seq.coverage < p.min_coverage)
          rej.reasons.push_back("low_coverage");
        if (al->seq.identity < p.min_identity)
          rej.reasons.push_back("low_identity");
        if (al->rmsd > p.max_rmsd)
          rej.reasons.push_back("high_rmsd");
      }
      if (!rej.reasons.empty()) {
        res.rejections.push_back(std::move(rej));
        continue;
      }
      SelectivityCase sc;
      sc.cluster = ci;
      sc.on = on;
      sc.off = off;
      sc.binder_map = al->seq.b_to_a;
      sc.target_map = align_sequences(on_target.tokens(), off_target.tokens()).b_to_a;
      sc.identity = al->seq.identity;
      sc.coverage = al->seq.coverage;
      sc.rmsd = al->rmsd;
      sc.difficulty = jaccard_difficulty(on_iface, interface_of(off), &sc.binder_map, &sc.target_map);
      if (!(sc.difficulty < p.max_difficulty)) {
        rej.reasons.push_back("difficulty");
        res.rejections.push_back(std::move(rej));
        continue;
      }
      if (!best || sc.difficulty < best->difficulty) {
        if (best)
          passed.push_back({ci, on, best->off, {"not_lowest_difficulty"}});
        best = std::move(sc);
      } else {
        passed.push_back({ci, on, off, {"not_lowest_difficulty"}});
      }
    }
    for (Rejection& r : passed)
      res.rejections.push_back(std::move(r));
    if (best)
      res.cases.push_back(std::move(*best));
  }

  if (p.sample && static_cast<int>(res.cases.size()) > *p.sample) {
    Rng rng(p.seed);
    std::vector<int> idx = rng.permutation(static_cast<int>(res.cases.size()));
    idx.resize(*p.sample);
    std::sort(idx.begin(), idx.end());
    std::vector<SelectivityCase> picked;
    for (int i : idx)
      picked.push_back(std::move(res.cases[i]));
    res.cases = std::move(picked);
  }
  return res;
}

} // namespace binderkit

#endif
