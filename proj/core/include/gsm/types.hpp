#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

namespace gsm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

using Face = Eigen::Vector3i;

// Quaternions are stored as (w, x, y, z) everywhere, including file formats.

inline Vec4 quat_identity() { return Vec4(1.0, 0.0, 0.0, 0.0); }

inline Vec4 quat_multiply(const Vec4& a, const Vec4& b) {
  return Vec4(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
              a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
              a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
              a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]);
}

// Adjoint of quat_multiply(p, q) in q for fixed p: returns L(p)^T * g.
inline Vec4 quat_multiply_left_adjoint(const Vec4& p, const Vec4& g) {
  return Vec4(p[0] * g[0] + p[1] * g[1] + p[2] * g[2] + p[3] * g[3],
              -p[1] * g[0] + p[0] * g[1] + p[3] * g[2] - p[2] * g[3],
              -p[2] * g[0] - p[3] * g[1] + p[0] * g[2] + p[1] * g[3],
              -p[3] * g[0] + p[2] * g[1] - p[1] * g[2] + p[0] * g[3]);
}

// Rotation matrix from the unit-quaternion formula, applied verbatim to the
// given components (no internal normalization; the backward pass mirrors it).
inline Mat3 quat_to_rotmat(const Vec4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

// d(sum_ij dR_ij * R_ij(q)) / dq for the formula above.
inline Vec4 quat_to_rotmat_backward(const Vec4& q, const Mat3& dR) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Vec4 dq;
  dq[0] = 2.0 * (-z * dR(0, 1) + y * dR(0, 2) + z * dR(1, 0) - x * dR(1, 2) -
                 y * dR(2, 0) + x * dR(2, 1));
  dq[1] = 2.0 * (y * dR(0, 1) + z * dR(0, 2) + y * dR(1, 0) - 2.0 * x * dR(1, 1) -
                 w * dR(1, 2) + z * dR(2, 0) + w * dR(2, 1) - 2.0 * x * dR(2, 2));
  dq[2] = 2.0 * (-2.0 * y * dR(0, 0) + x * dR(0, 1) + w * dR(0, 2) + x * dR(1, 0) +
                 z * dR(1, 2) - w * dR(2, 0) + z * dR(2, 1) - 2.0 * y * dR(2, 2));
  dq[3] = 2.0 * (-2.0 * z * dR(0, 0) - w * dR(0, 1) + x * dR(0, 2) + w * dR(1, 0) -
                 2.0 * z * dR(1, 1) + y * dR(1, 2) + x * dR(2, 0) + y * dR(2, 1));
  return dq;
}

inline Vec4 quat_from_axis_angle(const Vec3& aa) {
  const double angle = aa.norm();
  if (angle < 1e-12) return quat_identity();
  const Vec3 axis = aa / angle;
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return Vec4(std::cos(h), s * axis[0], s * axis[1], s * axis[2]);
}

inline Vec4 quat_from_rotmat(const Mat3& r) {
  Vec4 q;
  const double trace = r.trace();
  if (trace > 0.0) {
    const double s = std::sqrt(trace + 1.0) * 2.0;
    q = Vec4(0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
             (r(1, 0) - r(0, 1)) / s);
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q = Vec4((r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
             (r(0, 2) + r(2, 0)) / s);
  } else if (r(1, 1) > r(2, 2)) {
    const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q = Vec4((r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
             (r(1, 2) + r(2, 1)) / s);
  } else {
    const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q = Vec4((r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
             (r(1, 2) + r(2, 1)) / s, 0.25 * s);
  }
  return q / q.norm();
}

// Overflow-safe normalization; callers decide what to do with near-zero input.
inline bool quat_normalize_robust(Vec4& q, double min_norm = 1e-8) {
  const double m = q.cwiseAbs().maxCoeff();
  if (m == 0.0) return false;
  const Vec4 scaled = q / m;
  const double n = scaled.norm();  // in [1, 2]
  if (m < min_norm / n) return false;
  q = scaled / n;
  return true;
}

}  // namespace gsm
