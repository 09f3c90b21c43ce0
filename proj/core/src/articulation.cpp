#include "gsm/articulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gsm {

std::vector<Vec3> shape_displacement(const RigBundle& rig,
                                     std::span<const double> shape_coeffs) {
  std::vector<Vec3> disp(rig.mesh.vertices.size(), Vec3::Zero());
  if (shape_coeffs.empty()) return disp;
  if (shape_coeffs.size() != rig.shape_basis.size())
    throw std::runtime_error("shape coefficients do not match the shape basis");
  for (size_t k = 0; k < shape_coeffs.size(); ++k) {
    const double beta = shape_coeffs[k];
    if (beta == 0.0) continue;
    const auto& column = rig.shape_basis[k];
    for (size_t v = 0; v < disp.size(); ++v) disp[v] += beta * column[v];
  }
  return disp;
}

std::vector<Vec3> regress_joints(const RigBundle& rig,
                                 std::span<const double> shape_coeffs) {
  std::vector<Vec3> joints(rig.joints.size());
  for (size_t j = 0; j < joints.size(); ++j) joints[j] = rig.joints[j].rest;
  if (shape_coeffs.empty()) return joints;

  const std::vector<Vec3> disp = shape_displacement(rig, shape_coeffs);
  std::vector<Vec3> offset(joints.size(), Vec3::Zero());
  std::vector<double> total_weight(joints.size(), 0.0);
  for (size_t v = 0; v < rig.weights.size(); ++v) {
    for (const auto& w : rig.weights[v]) {
      offset[w.joint] += w.weight * disp[v];
      total_weight[w.joint] += w.weight;
    }
  }
  for (size_t j = 0; j < joints.size(); ++j)
    if (total_weight[j] > 0.0) joints[j] += offset[j] / total_weight[j];
  return joints;
}

JointTransforms forward_kinematics(const RigBundle& rig, const Pose& pose) {
  const size_t n = rig.joints.size();
  if (pose.joint_rotations.size() != n)
    throw std::runtime_error("forward_kinematics: pose covers a different joint count");
  for (const auto& r : pose.joint_rotations)
    if (!r.allFinite())
      throw std::runtime_error("forward_kinematics: non-finite joint rotation");

  const std::vector<Vec3> rest = regress_joints(rig, pose.shape_coeffs);

  JointTransforms out;
  out.world_rotation.resize(n);
  out.world_translation.resize(n);
  out.skin_translation.resize(n);
  for (size_t j = 0; j < n; ++j) {
    const Vec4 local_q = quat_from_axis_angle(pose.joint_rotations[j]);
    const int parent = rig.joints[j].parent;
    if (parent < 0) {
      out.world_rotation[j] = local_q;
      out.world_translation[j] = pose.root_translation + rest[j];
    } else {
      const Vec3 offset = rest[j] - rest[parent];
      out.world_rotation[j] = quat_multiply(out.world_rotation[parent], local_q);
      out.world_translation[j] =
          out.world_translation[parent] +
          quat_to_rotmat(out.world_rotation[parent]) * offset;
    }
  }
  for (size_t j = 0; j < n; ++j)
    out.skin_translation[j] =
        out.world_translation[j] - quat_to_rotmat(out.world_rotation[j]) * rest[j];
  return out;
}

std::vector<Vec3> skin_vertices(std::span<const Vec3> vertices,
                                const JointTransforms& transforms,
                                const std::vector<std::vector<VertexWeight>>& weights) {
  if (weights.size() != vertices.size())
    throw std::runtime_error("skin_vertices: weights do not cover every vertex");
  std::vector<Mat3> rot(transforms.size());
  for (size_t j = 0; j < transforms.size(); ++j)
    rot[j] = quat_to_rotmat(transforms.world_rotation[j]);

  std::vector<Vec3> out(vertices.size());
  for (size_t v = 0; v < vertices.size(); ++v) {
    Vec3 acc = Vec3::Zero();
    for (const auto& w : weights[v])
      acc += w.weight * (rot[w.joint] * vertices[v] + transforms.skin_translation[w.joint]);
    out[v] = acc;
  }
  return out;
}

namespace {

// Highest-weight joint, ties to the lower index.
int dominant_joint(const std::vector<VertexWeight>& weights) {
  int best = -1;
  double best_w = -std::numeric_limits<double>::infinity();
  for (const auto& w : weights) {
    if (w.weight > best_w || (w.weight == best_w && w.joint < best)) {
      best_w = w.weight;
      best = w.joint;
    }
  }
  return best;
}

constexpr double kQuatBlendMin = 1e-8;

}  // namespace

std::vector<Vec4> vertex_quaternions(const JointTransforms& transforms,
                                     const std::vector<std::vector<VertexWeight>>& weights) {
  std::vector<Vec4> out(weights.size());
  for (size_t v = 0; v < weights.size(); ++v) {
    const int ref = dominant_joint(weights[v]);
    if (ref < 0) {
      out[v] = quat_identity();
      continue;
    }
    const Vec4& ref_q = transforms.world_rotation[ref];
    Vec4 blend = Vec4::Zero();
    for (const auto& w : weights[v]) {
      Vec4 q = transforms.world_rotation[w.joint];
      if (q.dot(ref_q) < 0.0) q = -q;
      blend += w.weight * q;
    }
    if (!quat_normalize_robust(blend, kQuatBlendMin)) blend = ref_q;
    out[v] = blend;
  }
  return out;
}

ShellStack pose_shell_stack(const ShellStack& stack, const RigBundle& rig,
                            const Pose& pose, const JointTransforms& transforms) {
  const std::vector<Vec3> disp = shape_displacement(rig, pose.shape_coeffs);
  ShellStack out = stack;
  std::vector<Vec3> shaped(rig.mesh.vertices.size());
  for (auto& shell : out.shells) {
    for (size_t v = 0; v < shell.vertices.size(); ++v)
      shaped[v] = shell.vertices[v] + disp[v];
    shell.vertices = skin_vertices(shaped, transforms, rig.weights);
  }
  return out;
}

std::vector<Vec3> anchor_positions(const ShellStack& stack,
                                   const GaussianAnchors& anchors) {
  std::vector<Vec3> out(anchors.size());
  for (size_t i = 0; i < anchors.size(); ++i) {
    const Mesh& shell = stack.shells[anchors.shell_index[i]];
    const auto& face = shell.faces[anchors.face_index[i]];
    const Vec3& b = anchors.barycentric[i];
    out[i] = b[0] * shell.vertices[face[0]] + b[1] * shell.vertices[face[1]] +
             b[2] * shell.vertices[face[2]];
  }
  return out;
}

std::vector<Vec4> anchor_quaternions(const GaussianAnchors& anchors,
                                     const ShellStack& stack,
                                     const std::vector<Vec4>& vertex_quats) {
  std::vector<Vec4> out(anchors.size());
  for (size_t i = 0; i < anchors.size(); ++i) {
    const Mesh& shell = stack.shells[anchors.shell_index[i]];
    const auto& face = shell.faces[anchors.face_index[i]];
    const Vec3& b = anchors.barycentric[i];
    // Align to the corner with the largest barycentric weight.
    int ref = 0;
    if (b[1] > b[ref]) ref = 1;
    if (b[2] > b[ref]) ref = 2;
    const Vec4& ref_q = vertex_quats[face[ref]];
    Vec4 blend = Vec4::Zero();
    for (int k = 0; k < 3; ++k) {
      Vec4 q = vertex_quats[face[k]];
      if (q.dot(ref_q) < 0.0) q = -q;
      blend += b[k] * q;
    }
    if (!quat_normalize_robust(blend, kQuatBlendMin)) blend = ref_q;
    out[i] = blend;
  }
  return out;
}

PosedGaussians deform_gaussians(const GaussianAnchors& anchors,
                                const ShellStack& posed_stack,
                                const std::vector<Vec4>& vertex_quats,
                                const GaussianParams& canonical) {
  if (canonical.size() != anchors.size())
    throw std::runtime_error("deform_gaussians: parameter count mismatch");
  PosedGaussians out;
  out.position = anchor_positions(posed_stack, anchors);
  const std::vector<Vec4> blended = anchor_quaternions(anchors, posed_stack, vertex_quats);
  out.rotation.resize(anchors.size());
  for (size_t i = 0; i < anchors.size(); ++i)
    out.rotation[i] = quat_multiply(blended[i], canonical.rotation[i]);
  return out;
}

PixelRect part_crop(const RigBundle& rig, const Pose& pose,
                    const Camera& camera, const std::string& part_name,
                    double margin) {
  camera.validate();
  const auto it = rig.parts.find(part_name);
  if (it == rig.parts.end()) {
    std::ostringstream msg;
    msg << "part_crop: unknown part \"" << part_name << "\"";
    throw std::runtime_error(msg.str());
  }
  const JointTransforms transforms = forward_kinematics(rig, pose);

  double min_x = std::numeric_limits<double>::infinity();
  double max_x = -min_x, min_y = min_x, max_y = -min_x;
  bool any_visible = false;
  for (int j : it->second) {
    const Vec3 view = camera.to_view(transforms.world_translation[j]);
    if (view[2] <= camera.near) continue;
    const Vec2 px = camera.project_view(view);
    min_x = std::min(min_x, px[0]);
    max_x = std::max(max_x, px[0]);
    min_y = std::min(min_y, px[1]);
    max_y = std::max(max_y, px[1]);
    any_visible = true;
  }
  if (!any_visible) return PixelRect{};

  const double cx = 0.5 * (min_x + max_x);
  const double cy = 0.5 * (min_y + max_y);
  const double side = std::max(max_x - min_x, max_y - min_y) * (1.0 + margin);
  double lo_x = cx - 0.5 * side, hi_x = cx + 0.5 * side;
  double lo_y = cy - 0.5 * side, hi_y = cy + 0.5 * side;

  int x0 = static_cast<int>(std::floor(lo_x));
  int x1 = static_cast<int>(std::ceil(hi_x));
  int y0 = static_cast<int>(std::floor(lo_y));
  int y1 = static_cast<int>(std::ceil(hi_y));
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  x0 = std::clamp(x0, 0, camera.width);
  x1 = std::clamp(x1, 0, camera.width);
  y0 = std::clamp(y0, 0, camera.height);
  y1 = std::clamp(y1, 0, camera.height);

  PixelRect rect;
  rect.x0 = x0;
  rect.y0 = y0;
  rect.width = x1 - x0;
  rect.height = y1 - y0;
  return rect;
}

}  // namespace gsm
