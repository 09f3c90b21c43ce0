#pragma once

#include "gsm/articulation.hpp"
#include "gsm/camera.hpp"
#include "gsm/image.hpp"
#include "gsm/mesh.hpp"
#include "gsm/shell_texture.hpp"

#include <string>
#include <vector>

namespace gsm {

// Rig bundle: JSON document with mesh arrays, joints, sparse weights as
// (vertex, joint, weight) triples, optional shape basis and named parts.
RigBundle load_rig_bundle(const std::string& path);
void save_rig_bundle(const RigBundle& rig, const std::string& path);

// Wavefront-style text geometry: v / vt / f records, f with v or v/vt corners.
Mesh load_mesh_obj(const std::string& path);

// Texture stack, bit-exact: magic "GSTX", u32 version=1, u32 N,H,W,C(=11),
// N*H*W*C little-endian float32 (shell-major, row-major, channel-last),
// then N*H*W mask bytes (0/1).
ShellTextureStack load_texture_stack(const std::string& path);
void save_texture_stack(const ShellTextureStack& stack, const std::string& path);

// Shell stack: magic "GSHL", u32 version=1, u32 n_shells, base_index,
// n_vertices, n_faces, n_uvs, f64 adjacent_offset, faces, uv_faces (u32
// triples), uvs (f64 pairs), then per shell n_vertices f64 triples.
ShellStack load_shell_stack(const std::string& path);
void save_shell_stack(const ShellStack& stack, const std::string& path);

// Raw float image dump: magic "GSIM", u32 H, W, C, little-endian float32.
Image load_image_gsim(const std::string& path);
void save_image_gsim(const Image& image, const std::string& path);

// 8-bit RGBA PNG; color is clamped to [0,1] and sRGB-encoded, alpha linear.
void save_image_png(const Image& color, const Image& alpha,
                    const std::string& path);

// In-memory PNG encoding (identical bytes to save_image_png).
std::vector<unsigned char> encode_png(const Image& color, const Image& alpha);

std::vector<Camera> load_cameras(const std::string& path);
void save_cameras(const std::vector<Camera>& cameras, const std::string& path);

// Pose sequence: JSON with optional shape coefficients (shared by all frames)
// and per-frame joint-name-keyed axis-angle triples plus a root translation.
// Unknown joint names are an error naming the joint.
std::vector<Pose> load_pose_sequence(const std::string& path,
                                     const RigBundle& rig);
void save_pose_sequence(const std::vector<Pose>& poses, const RigBundle& rig,
                        const std::string& path);

}  // namespace gsm
