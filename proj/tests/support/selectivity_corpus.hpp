// Hand-built six-entry corpus for selectivity curation.
//
// One binder cluster built around binder B (40 residues, helix):
//   ON        B            + target T0   on-target (pinned)
//   VALID     B, 2 subst.  + target T1   binder shifted 12 Å along the axis
//   SAMETGT   B, 1 subst.  + target T0   identical target
//   LOWCOV    B[8:40] + 8 new residues   coverage 32/40
//   LOWID     VALID binder + 3 subst.    35/40 identical to B, clustered
//                                        through VALID (37/40)
//   BENT      B, 1 subst., half strand   Cα RMSD far above 2.5 Å
// Every other target is a distinct random sequence.

#ifndef BINDERKIT_TESTS_SELECTIVITY_CORPUS_HPP_
#define BINDERKIT_TESTS_SELECTIVITY_CORPUS_HPP_

#include <map>
#include <string>
#include <vector>

#include "binderkit/structure/synthetic.hpp"

namespace corpus {

using namespace binderkit;

inline std::string mutate(std::string s, const std::vector<int>& pos) {
  for (int p : pos)
    s[p] = s[p] == 'W' ? 'Y' : 'W';
  return s;
}

inline Structure entry(const std::string& id, const std::string& binder, const std::string& binder_ss,
                       const std::string& target, double shift) {
  Structure s;
  s.id = id;
  s.method = "SYNTHETIC";
  Chain t = synth::build_chain("A", target, std::string(target.size(), 'H'));
  synth::place_chain(t, {0, 0, 0}, {0, 0, 1});
  Chain b = synth::build_chain("B", binder, binder_ss);
  synth::place_chain(b, {9.5, 0, shift}, {0, 0, 1});
  t.role = ChainRole::Target;
  b.role = ChainRole::Design;
  s.chains.push_back(std::move(t));
  s.chains.push_back(std::move(b));
  return s;
}

struct Planted {
  std::vector<Structure> entries;
  std::map<std::string, std::string> expected_reason;  // entry id -> reason
};

inline Planted selectivity_corpus(std::uint64_t seed = 11) {
  Rng rng(seed);
  const std::string b = synth::random_sequence(rng, 40);
  const std::string t0 = synth::random_sequence(rng, 36);
  const std::string helix(40, 'H');
  const std::string valid_b = mutate(b, {5, 30});
  Planted p;
  p.entries.push_back(entry("ON", b, helix, t0, 0.0));
  p.entries.push_back(entry("VALID", valid_b, helix, synth::random_sequence(rng, 30), 12.0));
  p.entries.push_back(entry("SAMETGT", mutate(b, {17}), helix, t0, 0.0));
  p.entries.push_back(entry("LOWCOV", b.substr(8) + synth::random_sequence(rng, 8), helix,
                            synth::random_sequence(rng, 34), 0.0));
  p.entries.push_back(entry("LOWID", mutate(valid_b, {10, 20, 35}), helix, synth::random_sequence(rng, 33), 0.0));
  p.entries.push_back(entry("BENT", mutate(b, {2}), std::string(20, 'H') + std::string(20, 'E'),
                            synth::random_sequence(rng, 35), 0.0));
  p.expected_reason = {{"SAMETGT", "identical_target"},
                       {"LOWCOV", "low_coverage"},
                       {"LOWID", "low_identity"},
                       {"BENT", "high_rmsd"}};
  return p;
}

} // namespace corpus

#endif
