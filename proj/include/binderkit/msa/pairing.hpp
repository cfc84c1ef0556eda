// Paired MSAs for complexes: column-attention pairing, phylogeny pairing
// and block-diagonal concatenation.
//
// Pairing by scores: hits are grouped by species; each group is sorted by
// descending score (ties by row index) and rank-k hits of the two sides are
// concatenated. Output rows are the query pair, then rank 0 pairs for every
// shared species, then rank 1, and so on; species within a rank follow
// their first appearance in the first MSA. Untagged hits are dropped.

#ifndef BINDERKIT_MSA_PAIRING_HPP_
#define BINDERKIT_MSA_PAIRING_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "../core/container.hpp"
#include "../core/ndarray.hpp"
#include "msa.hpp"

namespace binderkit {

// Column attention maps A_lhc, each [N,N], one per (layer, head, column).
struct AttentionStack {
  int n = 0;
  std::vector<NdArray<double>> maps;
};

enum class Aggregation { Sum, Mean };

struct PairedRow {
  std::string aligned;
  int row1 = -1;  // source row in the first MSA, -1 for all gaps
  int row2 = -1;
  std::string species;
  int rank = -1;  // -1 for the query and block-diagonal rows
};

struct PairedMsa {
  int width1 = 0;
  int width2 = 0;
  std::vector<PairedRow> rows;

  int depth() const { return static_cast<int>(rows.size()); }
  std::vector<std::string> sequences() const {
    std::vector<std::string> out;
    for (const PairedRow& r : rows)
      out.push_back(r.aligned);
    return out;
  }
};

// Largest deviation of any row sum from 1 across the stack.
inline double max_row_stochastic_error(const AttentionStack& st) {
  double worst = 0.0;
  for (const NdArray<double>& a : st.maps)
    for (int i = 0; i < st.n; ++i) {
      double s = 0.0;
      for (int j = 0; j < st.n; ++j)
        s += a[static_cast<std::int64_t>(i) * st.n + j];
      worst = std::max(worst, std::abs(s - 1.0));
    }
  return worst;
}

// Accepts one tensor of shape [..., N, N] or any number of [N, N] tensors
// (for example named "l0.h3.c17"). Row-stochastic deviations above 1e-4
// are reported through `warnings`, not rejected.
inline AttentionStack attention_from_container(const std::vector<NamedTensor>& ts,
                                               std::vector<std::string>* warnings = nullptr) {
  AttentionStack st;
  for (const NamedTensor& t : ts) {
    const Shape& s = t.value.shape;
    if (s.size() < 2 || s[s.size() - 1] != s[s.size() - 2])
      fail(ErrorKind::Contract, "attention tensor '" + t.name + "' has shape " + shape_str(s) +
                                    ", expected [..., N, N]");
    const int n = static_cast<int>(s.back());
    if (st.n == 0)
      st.n = n;
    if (n != st.n)
      fail(ErrorKind::Contract, "attention tensor '" + t.name + "' has N = " + std::to_string(n) +
                                    ", earlier tensors have N = " + std::to_string(st.n));
    const std::int64_t nn = static_cast<std::int64_t>(n) * n;
    for (std::int64_t off = 0; off < t.value.numel(); off += nn) {
      NdArray<double> m({n, n});
      for (std::int64_t k = 0; k < nn; ++k)
        m[k] = t.value[off + k];
      st.maps.push_back(std::move(m));
    }
  }
  if (st.maps.empty())
    fail(ErrorKind::Contract, "attention container holds no matrices");
  if (warnings) {
    double err = max_row_stochastic_error(st);
    if (err > 1e-4)
      warnings->push_back("attention rows deviate from stochastic by up to " + std::to_string(err));
  }
  return st;
}

inline AttentionStack read_attention(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings = nullptr) {
  return attention_from_container(decode_container(read_file(path)), warnings);
}

// S = AGG over maps of (A + A^T).
inline NdArray<double> similarity_from_attention(const AttentionStack& st, Aggregation agg = Aggregation::Sum) {
  const int n = st.n;
  if (st.maps.empty())
    fail(ErrorKind::Contract, "attention stack is empty");
  NdArray<double> s({n, n}, 0.0);
  for (std::size_t m = 0; m < st.maps.size(); ++m) {
    const NdArray<double>& a = st.maps[m];
    if (a.shape != Shape{n, n})
      fail(ErrorKind::Contract, "attention map " + std::to_string(m) + " has shape " + shape_str(a.shape) +
                                    ", expected [" + std::to_string(n) + ", " + std::to_string(n) + "]");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s[static_cast<std::int64_t>(i) * n + j] +=
            a[static_cast<std::int64_t>(i) * n + j] + a[static_cast<std::int64_t>(j) * n + i];
  }
  if (agg == Aggregation::Mean)
    for (double& v : s.data)
      v /= static_cast<double>(st.maps.size());
  return s;
}

// Row 0 of S; the query's self entry is excluded by the pairing functions.
inline std::vector<double> query_similarity(const NdArray<double>& s) {
  require(s.rank() == 2 && s.shape[0] == s.shape[1] && s.shape[0] > 0, "similarity must be square");
  return std::vector<double>(s.data.begin(), s.data.begin() + s.shape[1]);
}

namespace detail {

struct SpeciesGroups {
  std::vector<std::string> order;
  std::map<std::string, std::vector<int>> members;
};

inline SpeciesGroups group_by_species(const MsaBlock& m, const std::vector<double>& score) {
  SpeciesGroups g;
  for (int i = 1; i < m.depth(); ++i) {
    const auto& sp = m.rows[i].species;
    if (!sp)
      continue;
    auto [it, inserted] = g.members.try_emplace(*sp);
    if (inserted)
      g.order.push_back(*sp);
    it->second.push_back(i);
  }
  for (auto& [sp, rows] : g.members)
    std::stable_sort(rows.begin(), rows.end(), [&](int a, int b) { return score[a] > score[b]; });
  return g;
}

inline PairedRow query_pair(const MsaBlock& m1, const MsaBlock& m2) {
  PairedRow q;
  q.aligned = m1.query().aligned + m2.query().aligned;
  q.row1 = 0;
  q.row2 = 0;
  q.species = m1.query().species.value_or("");
  return q;
}

} // namespace detail

// score1/score2 hold one value per row of m1/m2 (row 0 ignored).
inline PairedMsa pair_by_scores(const MsaBlock& m1, const std::vector<double>& score1, const MsaBlock& m2,
                                const std::vector<double>& score2) {
  m1.validate();
  m2.validate();
  require(static_cast<int>(score1.size()) == m1.depth(),
          "first score vector has " + std::to_string(score1.size()) + " entries for " +
              std::to_string(m1.depth()) + " rows");
  require(static_cast<int>(score2.size()) == m2.depth(),
          "second score vector has " + std::to_string(score2.size()) + " entries for " +
              std::to_string(m2.depth()) + " rows");
  PairedMsa out{m1.width(), m2.width(), {detail::query_pair(m1, m2)}};
  detail::SpeciesGroups g1 = detail::group_by_species(m1, score1);
  detail::SpeciesGroups g2 = detail::group_by_species(m2, score2);
  std::vector<std::string> shared;
  std::size_t max_rank = 0;
  for (const std::string& sp : g1.order)
    if (auto it = g2.members.find(sp); it != g2.members.end()) {
      shared.push_back(sp);
      max_rank = std::max(max_rank, std::min(g1.members[sp].size(), it->second.size()));
    }
  for (std::size_t k = 0; k < max_rank; ++k)
    for (const std::string& sp : shared) {
      const auto& a = g1.members[sp];
      const auto& b = g2.members[sp];
      if (k >= a.size() || k >= b.size())
        continue;
      PairedRow r;
      r.row1 = a[k];
      r.row2 = b[k];
      r.aligned = m1.rows[a[k]].aligned + m2.rows[b[k]].aligned;
      r.species = sp;
      r.rank = static_cast<int>(k);
      out.rows.push_back(std::move(r));
    }
  return out;
}

// Ranks hits by the query row of each MSA's attention similarity.
inline PairedMsa pair_by_attention(const MsaBlock& m1, const NdArray<double>& s1, const MsaBlock& m2,
                                   const NdArray<double>& s2) {
  require(s1.rank() == 2 && s1.shape[0] == m1.depth(),
          "first similarity is " + shape_str(s1.shape) + " for " + std::to_string(m1.depth()) + " rows");
  require(s2.rank() == 2 && s2.shape[0] == m2.depth(),
          "second similarity is " + shape_str(s2.shape) + " for " + std::to_string(m2.depth()) + " rows");
  return pair_by_scores(m1, query_similarity(s1), m2, query_similarity(s2));
}

inline std::vector<double> identity_to_query(const MsaBlock& m) {
  std::vector<double> out(m.depth());
  for (int i = 0; i < m.depth(); ++i)
    out[i] = aligned_identity(m.query().aligned, m.rows[i].aligned);
  return out;
}

inline PairedMsa pair_phylogeny(const MsaBlock& m1, const MsaBlock& m2) {
  m1.validate();
  m2.validate();
  return pair_by_scores(m1, identity_to_query(m1), m2, identity_to_query(m2));
}

// Hits of the first MSA padded right with gaps, then hits of the second
// padded left.
inline PairedMsa block_diagonalize(const MsaBlock& m1, const MsaBlock& m2) {
  m1.validate();
  m2.validate();
  PairedMsa out{m1.width(), m2.width(), {detail::query_pair(m1, m2)}};
  const std::string pad1(m1.width(), kGap), pad2(m2.width(), kGap);
  for (int i = 1; i < m1.depth(); ++i) {
    PairedRow r;
    r.row1 = i;
    r.aligned = m1.rows[i].aligned + pad2;
    r.species = m1.rows[i].species.value_or("");
    out.rows.push_back(std::move(r));
  }
  for (int i = 1; i < m2.depth(); ++i) {
    PairedRow r;
    r.row2 = i;
    r.aligned = pad1 + m2.rows[i].aligned;
    r.species = m2.rows[i].species.value_or("");
    out.rows.push_back(std::move(r));
  }
  return out;
}

// A3M with a "#<width1>,<width2>" first line; provenance lives in headers.
inline std::string write_paired_a3m(const PairedMsa& p) {
  std::string out = "#" + std::to_string(p.width1) + "," + std::to_string(p.width2) + "\n";
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const PairedRow& r = p.rows[i];
    out += ">" + std::string(i == 0 ? "query" : "pair_" + std::to_string(i)) + " row1=" + std::to_string(r.row1) +
           " row2=" + std::to_string(r.row2) + " species=" + (r.species.empty() ? "-" : r.species) +
           " rank=" + std::to_string(r.rank) + "\n" + r.aligned + "\n";
  }
  return out;
}

} // namespace binderkit

#endif
