#pragma once

#include "gsm/types.hpp"

#include <cmath>
#include <stdexcept>

namespace gsm {

// Pinhole camera, computer-vision convention: x right, y down, z forward.
// Pixel (ix, iy) covers [ix, ix+1) x [iy, iy+1); its center is (ix+.5, iy+.5).
struct Camera {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 translation = Vec3::Zero();
  double near = 0.01;

  Vec3 to_view(const Vec3& p) const { return rotation * p + translation; }
  Vec2 project_view(const Vec3& v) const {
    return Vec2(fx * v[0] / v[2] + cx, fy * v[1] / v[2] + cy);
  }

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::runtime_error("camera: focal lengths must be positive");
    if (!(near > 0.0)) throw std::runtime_error("camera: near plane must be positive");
    if (width <= 0 || height <= 0) throw std::runtime_error("camera: image size must be positive");
    const Mat3 rtr = rotation.transpose() * rotation;
    if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
      throw std::runtime_error("camera: rotation is not orthonormal");
  }
};

struct PixelRect {
  int x0 = 0, y0 = 0;
  int width = 0, height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
};

// Camera at `eye` looking at `target`, vertical field of view in radians.
inline Camera make_lookat_camera(const Vec3& eye, const Vec3& target,
                                 const Vec3& up, double vertical_fov,
                                 int width, int height) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fy = 0.5 * height / std::tan(0.5 * vertical_fov);
  cam.fx = cam.fy;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  const Vec3 fwd = (target - eye).normalized();
  Vec3 right = fwd.cross(up).normalized();
  const Vec3 down = fwd.cross(right);
  Mat3 r;
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = fwd;
  cam.rotation = r;
  cam.translation = -(r * eye);
  return cam;
}

}  // namespace gsm
