// Binder chain alignment: global sequence alignment followed by Kabsch
// superposition of the matched Cα atoms.
//
// Scoring is match 1, mismatch 0, gap -1 (linear). Traceback prefers the
// diagonal, then a gap in the second chain, then a gap in the first.
// identity = identical aligned pairs / aligned pairs
// coverage = aligned pairs / length of the shorter chain

#ifndef BINDERKIT_BENCH_ALIGN_HPP_
#define BINDERKIT_BENCH_ALIGN_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "../structure/structure.hpp"

namespace binderkit {

inline constexpr int kAlignMatch = 1;
inline constexpr int kAlignMismatch = 0;
inline constexpr int kAlignGap = -1;

struct SequenceAlignment {
  std::vector<int> a_to_b;  // -1 where a residue is unaligned
  std::vector<int> b_to_a;
  int aligned = 0;
  int identical = 0;
  int score = 0;
  double identity = 0.0;
  double coverage = 0.0;
};

inline SequenceAlignment align_sequences(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  std::vector<int> dp(static_cast<std::size_t>(n + 1) * (m + 1));
  auto at = [&](int i, int j) -> int& { return dp[static_cast<std::size_t>(i) * (m + 1) + j]; };
  for (int i = 0; i <= n; ++i)
    at(i, 0) = i * kAlignGap;
  for (int j = 0; j <= m; ++j)
    at(0, j) = j * kAlignGap;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= m; ++j)
      at(i, j) = std::max({at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? kAlignMatch : kAlignMismatch),
                           at(i - 1, j) + kAlignGap, at(i, j - 1) + kAlignGap});
  SequenceAlignment out;
  out.score = at(n, m);
  out.a_to_b.assign(n, -1);
  out.b_to_a.assign(m, -1);
  int i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        at(i, j) == at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? kAlignMatch : kAlignMismatch)) {
      out.a_to_b[i - 1] = j - 1;
      out.b_to_a[j - 1] = i - 1;
      ++out.aligned;
      out.identical += a[i - 1] == b[j - 1];
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + kAlignGap) {
      --i;
    } else {
      --j;
    }
  }
  const int shorter = std::min(n, m);
  out.identity = out.aligned == 0 ? 0.0 : static_cast<double>(out.identical) / out.aligned;
  out.coverage = shorter == 0 ? 0.0 : static_cast<double>(out.aligned) / shorter;
  return out;
}

struct Superposition {
  RigidTransform transform;  // maps the mobile points onto the reference
  double rmsd = 0.0;
};

// Least-squares rigid superposition of `mobile` onto `reference`.
inline Superposition kabsch(const std::vector<Vec3>& mobile, const std::vector<Vec3>& reference) {
  require(mobile.size() == reference.size() && !mobile.empty(), "Kabsch needs two equal nonempty point sets");
  const std::size_t n = mobile.size();
  Eigen::Vector3d cm = Eigen::Vector3d::Zero(), cr = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    cm += Eigen::Vector3d(mobile[k].x, mobile[k].y, mobile[k].z);
    cr += Eigen::Vector3d(reference[k].x, reference[k].y, reference[k].z);
  }
  cm /= static_cast<double>(n);
  cr /= static_cast<double>(n);
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < n; ++k)
    h += (Eigen::Vector3d(mobile[k].x, mobile[k].y, mobile[k].z) - cm) *
         (Eigen::Vector3d(reference[k].x, reference[k].y, reference[k].z) - cr).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  Eigen::Vector3d t = cr - r * cm;
  Superposition out;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      out.transform.rotation.a[3 * row + col] = r(row, col);
  out.transform.translation = {t.x(), t.y(), t.z()};
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    ss += distance_sq(out.transform.apply(mobile[k]), reference[k]);
  out.rmsd = std::sqrt(ss / static_cast<double>(n));
  return out;
}

struct ChainAlignment {
  SequenceAlignment seq;
  int superposed = 0;  // aligned pairs with both Cα resolved
  double rmsd = 0.0;
};

inline ChainAlignment align_binders(const Chain& a, const Chain& b) {
  if (a.residues.empty() || b.residues.empty())
    fail(ErrorKind::Unalignable, "cannot align empty chain (" + a.id + " has " + std::to_string(a.size()) +
                                     " residues, " + b.id + " has " + std::to_string(b.size()) + ")");
  ChainAlignment out;
  out.seq = align_sequences(a.tokens(), b.tokens());
  std::vector<Vec3> pa, pb;
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    const int j = out.seq.a_to_b[i];
    if (j < 0)
      continue;
    auto ca = a.residues[i].position("CA");
    auto cb = b.residues[j].position("CA");
    if (ca && cb) {
      pa.push_back(*ca);
      pb.push_back(*cb);
    }
  }
  if (pa.empty())
    fail(ErrorKind::Unalignable, "chains " + a.id + " and " + b.id + " share no aligned residue with a resolved CA");
  out.superposed = static_cast<int>(pa.size());
  out.rmsd = kabsch(pb, pa).rmsd;
  return out;
}

} // namespace binderkit

#endif
