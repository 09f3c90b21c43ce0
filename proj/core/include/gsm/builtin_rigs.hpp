#pragma once

#include "gsm/mesh.hpp"

namespace gsm {

// Procedural humanoid test figure (~9 units tall, 16 joints): ellipsoid body
// parts, per-part UV islands, smooth two-joint skinning on the limbs, and
// part groups covering every joint. Deterministic.
RigBundle make_humanoid_rig();

// Single-joint UV sphere rig (weight 1 on the root everywhere).
RigBundle make_sphere_rig(int rings, int segments, double radius);

// UV sphere mesh alone (no rig).
Mesh make_uv_sphere(int rings, int segments, double radius,
                    const Vec3& center = Vec3::Zero());

}  // namespace gsm
