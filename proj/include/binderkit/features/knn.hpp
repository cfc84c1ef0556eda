// k-nearest-neighbor and radius queries over point sets.
//
// Results are ordered by (squared distance, index) ascending.

#ifndef BINDERKIT_FEATURES_KNN_HPP_
#define BINDERKIT_FEATURES_KNN_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "../core/geometry.hpp"

namespace binderkit {

struct Neighbor {
  double dist_sq;
  int index;
  bool operator<(const Neighbor& o) const {
    return dist_sq < o.dist_sq || (dist_sq == o.dist_sq && index < o.index);
  }
};

// Uniform cell grid over finite points. Points flagged invalid are skipped.
class CellGrid {
public:
  CellGrid(std::span<const Vec3> points, std::span<const std::uint8_t> valid, double cell_size)
    : points_(points), cell_(cell_size) {
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
      if (!valid.empty() && !valid[i])
        continue;
      cells_[key(cell_of(points[i]))].push_back(i);
      auto c = cell_of(points[i]);
      for (int d = 0; d < 3; ++d) {
        lo_[d] = std::min(lo_[d], c[d]);
        hi_[d] = std::max(hi_[d], c[d]);
      }
    }
  }

  // k nearest valid points to `q`, excluding index `self`.
  std::vector<Neighbor> knn(const Vec3& q, int k, int self = -1) const {
    std::vector<Neighbor> found;
    if (k <= 0 || cells_.empty())
      return found;
    auto c = cell_of(q);
    int max_ring = 0;
    for (int d = 0; d < 3; ++d)
      max_ring = std::max({max_ring, std::abs(c[d] - lo_[d]), std::abs(hi_[d] - c[d])});
    for (int ring = 0; ring <= max_ring; ++ring) {
      visit_ring(c, ring, [&](int i) {
        if (i != self)
          found.push_back({distance_sq(q, points_[i]), i});
      });
      // Unvisited points are at least ring*cell away from q.
      if (static_cast<int>(found.size()) >= k) {
        std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
        double kth = found[k - 1].dist_sq;
        double bound = ring * cell_;
        if (kth < bound * bound)
          break;
      }
    }
    std::sort(found.begin(), found.end());
    if (static_cast<int>(found.size()) > k)
      found.resize(k);
    return found;
  }

  // All valid points within `radius` (inclusive), sorted.
  std::vector<Neighbor> within(const Vec3& q, double radius, int self = -1) const {
    std::vector<Neighbor> found;
    auto c = cell_of(q);
    int rings = static_cast<int>(std::ceil(radius / cell_)) + 1;
    double r2 = radius * radius;
    for (int ring = 0; ring <= rings; ++ring)
      visit_ring(c, ring, [&](int i) {
        double d2 = distance_sq(q, points_[i]);
        if (i != self && d2 <= r2)
          found.push_back({d2, i});
      });
    std::sort(found.begin(), found.end());
    return found;
  }

private:
  using Cell = std::array<int, 3>;

  Cell cell_of(const Vec3& p) const {
    return {static_cast<int>(std::floor(p.x / cell_)), static_cast<int>(std::floor(p.y / cell_)),
            static_cast<int>(std::floor(p.z / cell_))};
  }
  static std::int64_t key(const Cell& c) {
    return (static_cast<std::int64_t>(c[0]) & 0x1FFFFF) |
           ((static_cast<std::int64_t>(c[1]) & 0x1FFFFF) << 21) |
           ((static_cast<std::int64_t>(c[2]) & 0x1FFFFF) << 42);
  }

  template <typename F>
  void visit_ring(const Cell& c, int ring, F&& f) const {
    for (int dx = -ring; dx <= ring; ++dx)
      for (int dy = -ring; dy <= ring; ++dy)
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring)
            continue;
          auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end())
            continue;
          for (int i : it->second)
            f(i);
        }
  }

  std::span<const Vec3> points_;
  double cell_;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
  Cell lo_{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
           std::numeric_limits<int>::max()};
  Cell hi_{std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
           std::numeric_limits<int>::min()};
};

} // namespace binderkit

#endif
