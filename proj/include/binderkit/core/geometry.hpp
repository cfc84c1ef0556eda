// Small fixed-size linear algebra for coordinates: Vec3, Mat3, rigid motions.

#ifndef BINDERKIT_CORE_GEOMETRY_HPP_
#define BINDERKIT_CORE_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <limits>

namespace binderkit {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  bool operator==(const Vec3& o) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double length_sq() const { return dot(*this); }
  double length() const { return std::sqrt(length_sq()); }
  Vec3 normalized() const { return *this / length(); }
  bool is_finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance_sq(const Vec3& a, const Vec3& b) { return (a - b).length_sq(); }
inline double distance(const Vec3& a, const Vec3& b) { return (a - b).length(); }

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> a{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }
  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 m;
    m.a = {c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z};
    return m;
  }

  double& operator()(int r, int c) { return a[3 * r + c]; }
  double operator()(int r, int c) const { return a[3 * r + c]; }

  Vec3 column(int c) const { return {a[c], a[3 + c], a[6 + c]}; }
  Vec3 row(int r) const { return {a[3 * r], a[3 * r + 1], a[3 * r + 2]}; }

  Vec3 operator*(const Vec3& v) const {
    return {row(0).dot(v), row(1).dot(v), row(2).dot(v)};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        m(r, c) = row(r).dot(o.column(c));
    return m;
  }
  Mat3 transposed() const {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        m(r, c) = (*this)(c, r);
    return m;
  }
  double determinant() const {
    return row(0).dot(row(1).cross(row(2)));
  }
};

// x -> rotation * x + translation
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

// Rotation about a unit axis by angle (radians).
inline Mat3 axis_angle(const Vec3& axis, double angle) {
  Vec3 u = axis.normalized();
  double c = std::cos(angle), s = std::sin(angle), t = 1 - c;
  Mat3 m;
  m.a = {t * u.x * u.x + c,       t * u.x * u.y - s * u.z, t * u.x * u.z + s * u.y,
         t * u.x * u.y + s * u.z, t * u.y * u.y + c,       t * u.y * u.z - s * u.x,
         t * u.x * u.z - s * u.y, t * u.y * u.z + s * u.x, t * u.z * u.z + c};
  return m;
}

// Rotation from a unit quaternion (w, x, y, z); input is normalized first.
inline Mat3 quaternion_rotation(double w, double x, double y, double z) {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n; x /= n; y /= n; z /= n;
  Mat3 m;
  m.a = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
         2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  return m;
}

inline constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double d) { return d * kPi / 180.0; }

// Places atom d given a, b, c such that |cd| = bond, angle(b,c,d) = angle
// and dihedral(a,b,c,d) = torsion (angles in degrees).
inline Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c,
                       double bond, double angle_deg, double torsion_deg) {
  double angle = deg2rad(angle_deg), torsion = deg2rad(torsion_deg);
  Vec3 bc = (c - b).normalized();
  Vec3 n = (b - a).cross(bc).normalized();
  Vec3 m = n.cross(bc);
  Vec3 d2{-bond * std::cos(angle), bond * std::sin(angle) * std::cos(torsion),
          bond * std::sin(angle) * std::sin(torsion)};
  return c + bc * d2.x + m * d2.y + n * d2.z;
}

inline double dihedral_deg(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  Vec3 b0 = a - b, b1 = (c - b).normalized(), b2 = d - c;
  Vec3 v = b0 - b1 * b0.dot(b1);
  Vec3 w = b2 - b1 * b2.dot(b1);
  double x = v.dot(w);
  double y = b1.cross(v).dot(w);
  return std::atan2(y, x) * 180.0 / kPi;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace binderkit

#endif
