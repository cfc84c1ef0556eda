// Chain quality filtering and ideal-geometry pseudo-Cβ.

#ifndef BINDERKIT_STRUCTURE_CHAIN_OPS_HPP_
#define BINDERKIT_STRUCTURE_CHAIN_OPS_HPP_

#include <array>
#include <string>
#include <vector>

#include "structure.hpp"

namespace binderkit {

struct ChainFilterParams {
  std::size_t min_len = 20;
  std::size_t max_len = 500;
  double max_unk_frac = 0.10;
  double max_single_aa_frac = 0.50;
};

struct ChainFilterResult {
  bool accepted = true;
  std::vector<std::string> reasons;  // "min_len", "max_len", "max_unk_frac", "max_single_aa_frac"
};

// Length bounds are inclusive; the fractions must stay strictly below
// their thresholds.
inline ChainFilterResult filter_chain(const Chain& chain, const ChainFilterParams& p = {}) {
  ChainFilterResult res;
  std::size_t n = chain.residues.size();
  if (n < p.min_len)
    res.reasons.push_back("min_len");
  if (n > p.max_len)
    res.reasons.push_back("max_len");
  if (n > 0) {
    std::array<std::size_t, kResidueVocab> counts{};
    for (const Residue& r : chain.residues)
      ++counts[r.aa];
    double unk = static_cast<double>(counts[kTokenUnk]) / n;
    if (unk >= p.max_unk_frac)
      res.reasons.push_back("max_unk_frac");
    std::size_t top = 0;
    for (int t = 0; t < kNumAminoAcids; ++t)
      top = std::max(top, counts[t]);
    if (static_cast<double>(top) / n > p.max_single_aa_frac)
      res.reasons.push_back("max_single_aa_frac");
  }
  res.accepted = res.reasons.empty();
  return res;
}

// Cβ = -0.58273431·a + 0.56802827·b - 0.54067466·c + Cα with b = Cα-N,
// c = C-Cα, a = b×c. Applied to glycine as well.
inline Vec3 pseudo_cbeta(const Vec3& n, const Vec3& ca, const Vec3& c) {
  Vec3 b = ca - n;
  Vec3 cc = c - ca;
  Vec3 a = b.cross(cc);
  return a * -0.58273431 + b * 0.56802827 - cc * 0.54067466 + ca;
}

inline Vec3 pseudo_cbeta(const Residue& r) {
  auto n = r.position("N");
  auto ca = r.position("CA");
  auto c = r.position("C");
  if (!n || !ca || !c)
    fail(ErrorKind::FrameUnavailable,
         "residue " + std::to_string(r.seq_id) + " " + r.name + " lacks N/CA/C");
  return pseudo_cbeta(*n, *ca, *c);
}

} // namespace binderkit

#endif
