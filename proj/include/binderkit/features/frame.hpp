// Cα-centered local reference frames and radial basis encodings.

#ifndef BINDERKIT_FEATURES_FRAME_HPP_
#define BINDERKIT_FEATURES_FRAME_HPP_

#include <cmath>
#include <vector>

#include "../structure/structure.hpp"

namespace binderkit {

// Columns of `rotation` are the frame axes in global coordinates.
struct LocalFrame {
  Vec3 origin;
  Mat3 rotation;

  // Global point expressed in this frame: Rᵀ(p - origin).
  Vec3 to_local(const Vec3& p) const { return rotation.transposed() * (p - origin); }
  Vec3 to_global(const Vec3& p) const { return rotation * p + origin; }
};

// x along Cα→C, z along (Cα-N)×(C-Cα), y = z×x.
inline LocalFrame local_frame(const Vec3& n, const Vec3& ca, const Vec3& c) {
  Vec3 x = c - ca;
  Vec3 z = (ca - n).cross(c - ca);
  if (z.length() < 1e-8 || x.length() < 1e-8)
    fail(ErrorKind::DegenerateFrame, "collinear N, CA, C");
  x = x.normalized();
  z = z.normalized();
  Vec3 y = z.cross(x);
  return {ca, Mat3::from_columns(x, y, z)};
}

inline LocalFrame local_frame(const Residue& r) {
  auto n = r.position("N");
  auto ca = r.position("CA");
  auto c = r.position("C");
  if (!n || !ca || !c)
    fail(ErrorKind::FrameUnavailable,
         "residue " + std::to_string(r.seq_id) + " " + r.name + " lacks N/CA/C");
  return local_frame(*n, *ca, *c);
}

struct RbfSpec {
  int n_bins = 16;
  double min_center = 2.0;
  double max_center = 22.0;

  double center(int i) const {
    return n_bins == 1 ? min_center
                       : min_center + (max_center - min_center) * i / (n_bins - 1);
  }
  std::vector<double> centers() const {
    std::vector<double> mu(n_bins);
    for (int i = 0; i < n_bins; ++i)
      mu[i] = center(i);
    return mu;
  }
};

// φᵢ(d) = exp(-(d - μᵢ)²); an infinite distance encodes as all zeros.
template <typename OutIt>
inline void rbf_encode_into(double d, const RbfSpec& spec, OutIt out) {
  for (int i = 0; i < spec.n_bins; ++i) {
    double diff = d - spec.center(i);
    *out++ = std::isinf(d) ? 0.0 : std::exp(-diff * diff);
  }
}

inline std::vector<double> rbf_encode(double d, const RbfSpec& spec = {}) {
  std::vector<double> v(spec.n_bins);
  rbf_encode_into(d, spec, v.begin());
  return v;
}

} // namespace binderkit

#endif
