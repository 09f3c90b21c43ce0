#pragma once

#include "gsm/camera.hpp"
#include "gsm/mesh.hpp"
#include "gsm/shell_texture.hpp"
#include "gsm/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace gsm {

// Per-joint axis-angle rotations (radians) plus a root translation and
// optional shape coefficients.
struct Pose {
  std::vector<Vec3> joint_rotations;
  Vec3 root_translation = Vec3::Zero();
  std::vector<double> shape_coeffs;

  static Pose rest(const RigBundle& rig) {
    Pose p;
    p.joint_rotations.assign(rig.joints.size(), Vec3::Zero());
    return p;
  }
};

// World transforms per joint plus the rest-relative skinning transforms.
// The skinning map is v' = R * v + t with R the joint's world rotation.
struct JointTransforms {
  std::vector<Vec4> world_rotation;     // unit quaternions
  std::vector<Vec3> world_translation;
  std::vector<Vec3> skin_translation;   // world_t - R * rest_position

  size_t size() const { return world_rotation.size(); }
};

struct PosedGaussians {
  std::vector<Vec3> position;
  std::vector<Vec4> rotation;  // unit quaternions
};

// Rest joints displaced by re-averaging shape-displaced vertices with the
// skinning weights. Empty coefficients return the stored rest joints.
std::vector<Vec3> regress_joints(const RigBundle& rig,
                                 std::span<const double> shape_coeffs);

// Per-vertex displacement from the shape basis; empty coefficients give zero.
std::vector<Vec3> shape_displacement(const RigBundle& rig,
                                     std::span<const double> shape_coeffs);

JointTransforms forward_kinematics(const RigBundle& rig, const Pose& pose);

// Linear blend skinning of one vertex array with the rig's sparse weights.
std::vector<Vec3> skin_vertices(std::span<const Vec3> vertices,
                                const JointTransforms& transforms,
                                const std::vector<std::vector<VertexWeight>>& weights);

// Weight-blended joint rotations per vertex, hemisphere-aligned to the
// highest-weight joint and normalized.
std::vector<Vec4> vertex_quaternions(const JointTransforms& transforms,
                                     const std::vector<std::vector<VertexWeight>>& weights);

// Applies shape displacement and skinning to every shell (shells share the
// template's weights by vertex index).
ShellStack pose_shell_stack(const ShellStack& stack, const RigBundle& rig,
                            const Pose& pose, const JointTransforms& transforms);

// Anchor positions on a (possibly posed) stack: barycentric interpolation of
// the anchor triangle.
std::vector<Vec3> anchor_positions(const ShellStack& stack,
                                   const GaussianAnchors& anchors);

// Barycentric blend of the vertex quaternion field at each anchor,
// hemisphere-aligned and normalized; exposed so callers can reuse it across
// canonical rotations.
std::vector<Vec4> anchor_quaternions(const GaussianAnchors& anchors,
                                     const ShellStack& stack,
                                     const std::vector<Vec4>& vertex_quats);

// New position = interpolated posed triangle; new rotation = blended vertex
// quaternion composed with the canonical rotation. Scales are untouched.
PosedGaussians deform_gaussians(const GaussianAnchors& anchors,
                                const ShellStack& posed_stack,
                                const std::vector<Vec4>& vertex_quats,
                                const GaussianParams& canonical);

// Square pixel rectangle around the part's posed joints projected into the
// image, expanded by (1 + margin) and clamped to the image bounds. Empty if
// every joint is behind the camera.
PixelRect part_crop(const RigBundle& rig, const Pose& pose,
                    const Camera& camera, const std::string& part_name,
                    double margin);

}  // namespace gsm
