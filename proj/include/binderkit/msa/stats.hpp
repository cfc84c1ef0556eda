// MSA diversity statistics: Meff, Henikoff weights and paired-MSA counts.

#ifndef BINDERKIT_MSA_STATS_HPP_
#define BINDERKIT_MSA_STATS_HPP_

#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "pairing.hpp"

namespace binderkit {

inline constexpr double kMeffIdentity = 0.65;

// Number of single-linkage clusters: rows join when their aligned identity
// (over columns non-gap in both) is at least `cutoff`.
inline int meff(const std::vector<std::string>& rows, double cutoff = kMeffIdentity) {
  const int n = static_cast<int>(rows.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  int clusters = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int a = find(i), b = find(j);
      if (a == b)
        continue;
      if (aligned_identity(rows[i], rows[j]) >= cutoff) {
        parent[b] = a;
        --clusters;
      }
    }
  return clusters;
}

inline int meff(const MsaBlock& m, double cutoff = kMeffIdentity) {
  m.validate();
  return meff(m.sequences(), cutoff);
}

// Position-based weights: in each column with r distinct symbols (the gap
// counts as a symbol), a row whose symbol occurs k times gets 1/(k r). Row
// weights are the column sums normalized to total 1.
inline std::vector<double> henikoff_weights(const std::vector<std::string>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> w(n, 0.0);
  if (n == 0)
    return w;
  const std::size_t width = rows[0].size();
  for (const std::string& r : rows)
    require(r.size() == width, "Henikoff weights need rows of equal aligned length");
  for (std::size_t c = 0; c < width; ++c) {
    int count[256] = {};
    int distinct = 0;
    for (const std::string& r : rows)
      if (count[static_cast<unsigned char>(r[c])]++ == 0)
        ++distinct;
    for (std::size_t i = 0; i < n; ++i)
      w[i] += 1.0 / (static_cast<double>(count[static_cast<unsigned char>(rows[i][c])]) * distinct);
  }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w)
    x = total > 0 ? x / total : 1.0 / static_cast<double>(n);
  return w;
}

inline std::vector<double> henikoff_weights(const MsaBlock& m) {
  m.validate();
  return henikoff_weights(m.sequences());
}

struct MsaStats {
  int n_species = 0;  // distinct tags over non-query rows
  int depth = 0;      // rows including the query
  int meff = 0;
};

inline MsaStats msa_stats(const PairedMsa& p, double cutoff = kMeffIdentity) {
  MsaStats s;
  std::set<std::string> species;
  for (std::size_t i = 1; i < p.rows.size(); ++i)
    if (!p.rows[i].species.empty())
      species.insert(p.rows[i].species);
  s.n_species = static_cast<int>(species.size());
  s.depth = p.depth();
  s.meff = meff(p.sequences(), cutoff);
  return s;
}

} // namespace binderkit

#endif
