#pragma once

#include "gsm/mesh.hpp"
#include "gsm/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gsm {

// Per-Gaussian anchoring on the shell stack. Positions are always derived
// from (shell, face, barycentric); anchors never change after sampling.
struct GaussianAnchors {
  std::vector<int> shell_index;
  std::vector<int> face_index;
  std::vector<Vec3> barycentric;
  std::vector<Vec2> uv;  // cached barycentric interpolation of the UV face

  size_t size() const { return shell_index.size(); }
};

// Boolean H x W map in texture space.
struct BoolMap {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  BoolMap() = default;
  BoolMap(int h, int w, bool fill = false)
      : height(h), width(w),
        data(static_cast<size_t>(h) * w, fill ? 1 : 0) {}
  uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
};

// Raw (pre-activation) N x H x W x 11 parameter maps plus the UV-coverage
// mask. Channel order: [color:3, opacity:1, scale:3, rotation:4]; rotation is
// (w, x, y, z).
struct ShellTextureStack {
  static constexpr int kChannels = 11;
  static constexpr int kColorChannel = 0;
  static constexpr int kOpacityChannel = 3;
  static constexpr int kScaleChannel = 4;
  static constexpr int kRotationChannel = 7;

  int n_shells = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;    // shell-major, row-major, channel-last
  std::vector<uint8_t> mask;   // n_shells * height * width

  ShellTextureStack() = default;
  ShellTextureStack(int n, int h, int w)
      : n_shells(n), height(h), width(w),
        data(static_cast<size_t>(n) * h * w * kChannels, 0.0),
        mask(static_cast<size_t>(n) * h * w, 0) {}

  size_t texel_offset(int shell, int y, int x) const {
    return ((static_cast<size_t>(shell) * height + y) * width + x) * kChannels;
  }
  double& at(int shell, int y, int x, int c) {
    return data[texel_offset(shell, y, x) + c];
  }
  double at(int shell, int y, int x, int c) const {
    return data[texel_offset(shell, y, x) + c];
  }
  uint8_t& mask_at(int shell, int y, int x) {
    return mask[(static_cast<size_t>(shell) * height + y) * width + x];
  }
  uint8_t mask_at(int shell, int y, int x) const {
    return mask[(static_cast<size_t>(shell) * height + y) * width + x];
  }
  bool same_shape(const ShellTextureStack& o) const {
    return n_shells == o.n_shells && height == o.height && width == o.width;
  }
};

// Activated per-Gaussian parameters, ready for rendering.
struct GaussianParams {
  std::vector<Vec3> color;
  std::vector<double> opacity;   // strictly inside (0, 1)
  std::vector<Vec3> scale;       // within [s_min, s_max]
  std::vector<Vec4> rotation;    // unit quaternions (w, x, y, z)

  size_t size() const { return opacity.size(); }
};

struct ActivationConfig {
  double eps_color = 1e-3;  // widened sigmoid: (1+2e)*sigmoid(x) - e
  double s_min = 1e-4;
  double s_max = 1.0;

  void validate() const;  // s_min must be positive and below s_max
};

using RawFeatures = std::vector<std::array<double, ShellTextureStack::kChannels>>;

// Area-proportional largest-remainder allocation per shell and triangle with
// uniform (square-root warped) barycentric placement. Reproducible bit-for-bit
// from the seed.
GaussianAnchors sample_gaussians(const ShellStack& stack, int total_count,
                                 uint64_t seed);

// Deterministic largest-remainder allocation of `count` samples proportional
// to `areas`; exposed so tests can check sampling against it directly.
std::vector<int> largest_remainder_allocation(const std::vector<double>& areas,
                                              int count);

// Barycentric interpolation of the face's UV vertices; throws on a
// zero-area UV triangle, naming the face.
Vec2 anchor_to_uv(const Mesh& mesh, int face_index, const Vec3& barycentric);

// True where the texel center lies inside at least one UV triangle.
// Texel centers are ((x+0.5)/W, (y+0.5)/H); ties on shared edges resolve by a
// top-left fill rule (v axis pointing down).
BoolMap texel_mask(const RigBundle& rig, int height, int width);

// Bilinear lookup on the anchor's shell layer, texel centers at half-integer
// coordinates, border-clamped.
RawFeatures lookup_features(const ShellTextureStack& textures,
                            const GaussianAnchors& anchors);

// Adjoint of lookup_features: scatters per-Gaussian gradients back to the four
// contributing texels of each anchor. `texture_grad` must be data-shaped.
void lookup_features_adjoint(const ShellTextureStack& textures,
                             const GaussianAnchors& anchors,
                             const RawFeatures& feature_grads,
                             std::vector<double>& texture_grad);

GaussianParams apply_activations(const RawFeatures& raw,
                                 const ActivationConfig& config);

// Chains per-parameter gradients back through the activations.
// Clamped/fallback branches receive zero gradient.
RawFeatures apply_activations_backward(const RawFeatures& raw,
                                       const ActivationConfig& config,
                                       const std::vector<Vec3>& d_color,
                                       const std::vector<double>& d_opacity,
                                       const std::vector<Vec3>& d_scale,
                                       const std::vector<Vec4>& d_rotation);

// Exchanges texel values inside `region` across all shells and channels.
std::pair<ShellTextureStack, ShellTextureStack> swap_region(
    const ShellTextureStack& a, const ShellTextureStack& b,
    const BoolMap& region);

// Texels covered by UV triangles whose vertices all belong to the selected
// parts (vertex membership by dominant skinning weight).
BoolMap region_from_parts(const RigBundle& rig,
                          const std::vector<std::string>& part_names,
                          int height, int width);

}  // namespace gsm
