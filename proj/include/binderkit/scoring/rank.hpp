// Rank agreement between model scores and measured affinities.
//
// Spearman rho: Pearson correlation of average ranks. Kendall tau-b with
// tie correction. NDCG: items ordered by score (descending), gain
// 2^rel - 1 with rel the affinity min-max normalized to [0, 1], discount
// log2(rank + 1).

#ifndef BINDERKIT_SCORING_RANK_HPP_
#define BINDERKIT_SCORING_RANK_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "../core/error.hpp"

namespace binderkit {

struct NdcgConfig {
  bool higher_is_better = true;  // false when lower affinity values bind tighter
  std::optional<int> k;          // cutoff; all items when empty
};

struct RankMetrics {
  std::optional<double> spearman;
  std::optional<double> kendall;
  std::optional<double> ndcg;
  int n = 0;
};

// 1-based average ranks.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]])
      ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0)
    return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(average_ranks(a), average_ranks(b));
}

namespace detail {

// Merge sort of v[lo, hi) counting inversions (strictly greater before).
inline long long merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2)
    return 0;
  const std::size_t mid = (lo + hi) / 2;
  long long inv = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid)
    buf[k++] = v[i++];
  while (j < hi)
    buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return inv;
}

inline long long tied_pairs(const std::vector<double>& sorted) {
  long long t = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i])
      ++j;
    const long long c = static_cast<long long>(j - i);
    t += c * (c - 1) / 2;
    i = j;
  }
  return t;
}

} // namespace detail

// Kendall tau-b in O(n log n) (Knight's algorithm).
inline std::optional<double> kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return a[x] < a[y] || (a[x] == a[y] && b[x] < b[y]);
  });
  const long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
  long long n1 = 0, n3 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && a[idx[j]] == a[idx[i]])
      ++j;
    const long long c = static_cast<long long>(j - i);
    n1 += c * (c - 1) / 2;
    for (std::size_t p = i; p < j;) {
      std::size_t q = p;
      while (q < j && b[idx[q]] == b[idx[p]])
        ++q;
      const long long d = static_cast<long long>(q - p);
      n3 += d * (d - 1) / 2;
      p = q;
    }
    i = j;
  }
  std::vector<double> bv(n), buf(n);
  for (std::size_t i = 0; i < n; ++i)
    bv[i] = b[idx[i]];
  const long long swaps = detail::merge_count(bv, buf, 0, n);
  const long long n2 = detail::tied_pairs(bv);
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  if (denom == 0)
    return std::nullopt;
  return static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps) / denom;
}

inline std::optional<double> ndcg(const std::vector<double>& scores, const std::vector<double>& affinity,
                                  const NdcgConfig& cfg = {}) {
  const std::size_t n = scores.size();
  auto [lo, hi] = std::minmax_element(affinity.begin(), affinity.end());
  if (n == 0 || *hi == *lo)
    return std::nullopt;
  std::vector<double> gain(n);
  for (std::size_t i = 0; i < n; ++i) {
    double rel = (affinity[i] - *lo) / (*hi - *lo);
    if (!cfg.higher_is_better)
      rel = 1.0 - rel;
    gain[i] = std::exp2(rel) - 1.0;
  }
  const std::size_t k = cfg.k ? std::min<std::size_t>(n, static_cast<std::size_t>(*cfg.k)) : n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> ideal = gain;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double dcg = 0, idcg = 0;
  for (std::size_t r = 0; r < k; ++r) {
    const double disc = 1.0 / std::log2(static_cast<double>(r) + 2.0);
    dcg += gain[order[r]] * disc;
    idcg += ideal[r] * disc;
  }
  if (idcg == 0)
    return std::nullopt;
  return dcg / idcg;
}

inline RankMetrics rank_metrics(const std::vector<std::pair<double, double>>& pairs, const NdcgConfig& cfg = {}) {
  if (pairs.size() < 2)
    fail(ErrorKind::Contract, "rank metrics need at least 2 pairs, got " + std::to_string(pairs.size()));
  std::vector<double> s, a;
  for (const auto& [x, y] : pairs) {
    s.push_back(x);
    a.push_back(y);
  }
  RankMetrics m;
  m.n = static_cast<int>(pairs.size());
  m.spearman = spearman(s, a);
  m.kendall = kendall_tau_b(s, a);
  m.ndcg = ndcg(s, a, cfg);
  return m;
}

} // namespace binderkit

#endif
