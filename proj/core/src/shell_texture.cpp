#include "gsm/shell_texture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gsm {

namespace {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

// [0,1) double from the standardized mt19937_64 stream; avoids the
// implementation-defined uniform_real_distribution.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Keeps opacity strictly inside (0,1) even for saturated inputs; the clamped
// region gets zero gradient like any other clamp.
constexpr double kOpacityMargin = 1e-7;

struct EdgeFunction {
  double a, b, c;  // E(p) = a * u + b * v + c
  bool inclusive;
};

// Top-left fill rule with the v axis pointing down: an edge owns its points
// when it is horizontal going +u (top) or strictly descending in v (left).
bool edge_inclusive(const Vec2& from, const Vec2& to) {
  if (from[1] == to[1]) return to[0] > from[0];
  return from[1] > to[1];
}

}  // namespace

void ActivationConfig::validate() const {
  if (!(s_min > 0.0) || !(s_min < s_max))
    throw std::runtime_error("activations: require 0 < s_min < s_max");
}

std::vector<int> largest_remainder_allocation(const std::vector<double>& areas,
                                              int count) {
  const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
  if (!(total > 0.0))
    throw std::runtime_error("sample_gaussians: mesh has zero total area");
  const size_t n = areas.size();
  std::vector<int> alloc(n, 0);
  std::vector<std::pair<double, size_t>> remainders(n);
  int assigned = 0;
  for (size_t i = 0; i < n; ++i) {
    const double quota = count * (areas[i] / total);
    alloc[i] = static_cast<int>(std::floor(quota));
    assigned += alloc[i];
    remainders[i] = {quota - alloc[i], i};
  }
  // Descending remainder, ties to the lower index.
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& lhs, const auto& rhs) {
              if (lhs.first != rhs.first) return lhs.first > rhs.first;
              return lhs.second < rhs.second;
            });
  for (int k = 0; k < count - assigned; ++k)
    ++alloc[remainders[static_cast<size_t>(k) % n].second];
  return alloc;
}

GaussianAnchors sample_gaussians(const ShellStack& stack, int total_count,
                                 uint64_t seed) {
  const int n_shells = stack.count();
  if (n_shells == 0) throw std::runtime_error("sample_gaussians: empty shell stack");
  if (total_count < n_shells)
    throw std::runtime_error("sample_gaussians: need at least one Gaussian per shell");

  GaussianAnchors anchors;
  anchors.shell_index.reserve(total_count);
  anchors.face_index.reserve(total_count);
  anchors.barycentric.reserve(total_count);
  anchors.uv.reserve(total_count);

  const int per_shell = total_count / n_shells;
  const int remainder = total_count % n_shells;
  std::mt19937_64 rng(seed);

  for (int s = 0; s < n_shells; ++s) {
    const Mesh& shell = stack.shells[s];
    const int count = per_shell + (s < remainder ? 1 : 0);
    std::vector<double> areas(shell.faces.size());
    for (size_t f = 0; f < shell.faces.size(); ++f) {
      const auto& face = shell.faces[f];
      areas[f] = triangle_area(shell.vertices[face[0]], shell.vertices[face[1]],
                               shell.vertices[face[2]]);
    }
    const std::vector<int> alloc = largest_remainder_allocation(areas, count);
    for (size_t f = 0; f < alloc.size(); ++f) {
      for (int k = 0; k < alloc[f]; ++k) {
        const double u1 = next_unit(rng);
        const double u2 = next_unit(rng);
        const double su = std::sqrt(u1);
        const Vec3 bary(1.0 - su, su * (1.0 - u2), su * u2);
        anchors.shell_index.push_back(s);
        anchors.face_index.push_back(static_cast<int>(f));
        anchors.barycentric.push_back(bary);
        anchors.uv.push_back(anchor_to_uv(shell, static_cast<int>(f), bary));
      }
    }
  }
  return anchors;
}

Vec2 anchor_to_uv(const Mesh& mesh, int face_index, const Vec3& barycentric) {
  if (face_index < 0 || static_cast<size_t>(face_index) >= mesh.uv_faces.size())
    throw std::runtime_error("anchor_to_uv: face index out of range");
  const auto& uvf = mesh.uv_faces[face_index];
  const Vec2& a = mesh.uvs[uvf[0]];
  const Vec2& b = mesh.uvs[uvf[1]];
  const Vec2& c = mesh.uvs[uvf[2]];
  const Vec2 e1 = b - a;
  const Vec2 e2 = c - a;
  if (e1[0] * e2[1] - e1[1] * e2[0] == 0.0) {
    std::ostringstream msg;
    msg << "anchor_to_uv: degenerate UV triangle at face " << face_index;
    throw std::runtime_error(msg.str());
  }
  return barycentric[0] * a + barycentric[1] * b + barycentric[2] * c;
}

namespace {

void rasterize_uv_triangle(BoolMap& map, Vec2 a, Vec2 b, Vec2 c) {
  // Orient counter-clockwise in (u, v); skip zero-area triangles.
  const double area2 = (b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0];
  if (area2 == 0.0) return;
  if (area2 < 0.0) std::swap(b, c);

  const Vec2 corners[3] = {a, b, c};
  EdgeFunction edges[3];
  for (int k = 0; k < 3; ++k) {
    const Vec2& from = corners[k];
    const Vec2& to = corners[(k + 1) % 3];
    // E(p) = cross(to - from, p - from) >= 0 inside (CCW).
    edges[k].a = -(to[1] - from[1]);
    edges[k].b = to[0] - from[0];
    edges[k].c = (to[1] - from[1]) * from[0] - (to[0] - from[0]) * from[1];
    edges[k].inclusive = edge_inclusive(from, to);
  }

  const double min_u = std::min({a[0], b[0], c[0]});
  const double max_u = std::max({a[0], b[0], c[0]});
  const double min_v = std::min({a[1], b[1], c[1]});
  const double max_v = std::max({a[1], b[1], c[1]});
  const int x0 = std::max(0, static_cast<int>(std::floor(min_u * map.width - 0.5)));
  const int x1 = std::min(map.width - 1, static_cast<int>(std::ceil(max_u * map.width - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(min_v * map.height - 0.5)));
  const int y1 = std::min(map.height - 1, static_cast<int>(std::ceil(max_v * map.height - 0.5)));

  for (int y = y0; y <= y1; ++y) {
    const double v = (y + 0.5) / map.height;
    for (int x = x0; x <= x1; ++x) {
      const double u = (x + 0.5) / map.width;
      bool inside = true;
      for (const auto& e : edges) {
        const double value = e.a * u + e.b * v + e.c;
        if (value < 0.0 || (value == 0.0 && !e.inclusive)) {
          inside = false;
          break;
        }
      }
      if (inside) map.at(y, x) = 1;
    }
  }
}

}  // namespace

BoolMap texel_mask(const RigBundle& rig, int height, int width) {
  if (height <= 0 || width <= 0)
    throw std::runtime_error("texel_mask: texture dimensions must be positive");
  BoolMap map(height, width);
  for (const auto& uvf : rig.mesh.uv_faces)
    rasterize_uv_triangle(map, rig.mesh.uvs[uvf[0]], rig.mesh.uvs[uvf[1]],
                          rig.mesh.uvs[uvf[2]]);
  return map;
}

namespace {

struct BilinearTaps {
  int x0, x1, y0, y1;
  double wx, wy;  // weight of the (x1, y1) side
};

BilinearTaps bilinear_taps(const Vec2& uv, int width, int height) {
  const double x = uv[0] * width - 0.5;
  const double y = uv[1] * height - 0.5;
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  BilinearTaps taps;
  taps.wx = x - fx;
  taps.wy = y - fy;
  const auto clamp_x = [width](double v) {
    return std::clamp(static_cast<int>(v), 0, width - 1);
  };
  const auto clamp_y = [height](double v) {
    return std::clamp(static_cast<int>(v), 0, height - 1);
  };
  taps.x0 = clamp_x(fx);
  taps.x1 = clamp_x(fx + 1.0);
  taps.y0 = clamp_y(fy);
  taps.y1 = clamp_y(fy + 1.0);
  return taps;
}

}  // namespace

RawFeatures lookup_features(const ShellTextureStack& textures,
                            const GaussianAnchors& anchors) {
  RawFeatures out(anchors.size());
  for (size_t i = 0; i < anchors.size(); ++i) {
    const int shell = anchors.shell_index[i];
    if (shell < 0 || shell >= textures.n_shells) {
      std::ostringstream msg;
      msg << "lookup_features: shell index " << shell << " outside stack of "
          << textures.n_shells;
      throw std::runtime_error(msg.str());
    }
    const BilinearTaps t = bilinear_taps(anchors.uv[i], textures.width, textures.height);
    const double w00 = (1.0 - t.wx) * (1.0 - t.wy);
    const double w10 = t.wx * (1.0 - t.wy);
    const double w01 = (1.0 - t.wx) * t.wy;
    const double w11 = t.wx * t.wy;
    const double* p00 = textures.data.data() + textures.texel_offset(shell, t.y0, t.x0);
    const double* p10 = textures.data.data() + textures.texel_offset(shell, t.y0, t.x1);
    const double* p01 = textures.data.data() + textures.texel_offset(shell, t.y1, t.x0);
    const double* p11 = textures.data.data() + textures.texel_offset(shell, t.y1, t.x1);
    for (int c = 0; c < ShellTextureStack::kChannels; ++c)
      out[i][c] = w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c];
  }
  return out;
}

void lookup_features_adjoint(const ShellTextureStack& textures,
                             const GaussianAnchors& anchors,
                             const RawFeatures& feature_grads,
                             std::vector<double>& texture_grad) {
  if (feature_grads.size() != anchors.size())
    throw std::runtime_error("lookup_features_adjoint: gradient count mismatch");
  if (texture_grad.size() != textures.data.size())
    throw std::runtime_error("lookup_features_adjoint: texture gradient shape mismatch");
  for (size_t i = 0; i < anchors.size(); ++i) {
    const int shell = anchors.shell_index[i];
    const BilinearTaps t = bilinear_taps(anchors.uv[i], textures.width, textures.height);
    const double w00 = (1.0 - t.wx) * (1.0 - t.wy);
    const double w10 = t.wx * (1.0 - t.wy);
    const double w01 = (1.0 - t.wx) * t.wy;
    const double w11 = t.wx * t.wy;
    double* g00 = texture_grad.data() + textures.texel_offset(shell, t.y0, t.x0);
    double* g10 = texture_grad.data() + textures.texel_offset(shell, t.y0, t.x1);
    double* g01 = texture_grad.data() + textures.texel_offset(shell, t.y1, t.x0);
    double* g11 = texture_grad.data() + textures.texel_offset(shell, t.y1, t.x1);
    for (int c = 0; c < ShellTextureStack::kChannels; ++c) {
      const double g = feature_grads[i][c];
      g00[c] += w00 * g;
      g10[c] += w10 * g;
      g01[c] += w01 * g;
      g11[c] += w11 * g;
    }
  }
}

GaussianParams apply_activations(const RawFeatures& raw,
                                 const ActivationConfig& config) {
  config.validate();
  const double ln_min = std::log(config.s_min);
  const double ln_max = std::log(config.s_max);
  GaussianParams params;
  const size_t n = raw.size();
  params.color.resize(n);
  params.opacity.resize(n);
  params.scale.resize(n);
  params.rotation.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& f = raw[i];
    for (int c = 0; c < 3; ++c)
      params.color[i][c] =
          (1.0 + 2.0 * config.eps_color) * sigmoid(f[ShellTextureStack::kColorChannel + c]) -
          config.eps_color;
    params.opacity[i] = std::clamp(sigmoid(f[ShellTextureStack::kOpacityChannel]),
                                   kOpacityMargin, 1.0 - kOpacityMargin);
    for (int c = 0; c < 3; ++c)
      params.scale[i][c] = std::exp(
          std::clamp(f[ShellTextureStack::kScaleChannel + c], ln_min, ln_max));
    Vec4 q(f[ShellTextureStack::kRotationChannel + 0],
           f[ShellTextureStack::kRotationChannel + 1],
           f[ShellTextureStack::kRotationChannel + 2],
           f[ShellTextureStack::kRotationChannel + 3]);
    if (!quat_normalize_robust(q)) q = quat_identity();
    params.rotation[i] = q;
  }
  return params;
}

RawFeatures apply_activations_backward(const RawFeatures& raw,
                                       const ActivationConfig& config,
                                       const std::vector<Vec3>& d_color,
                                       const std::vector<double>& d_opacity,
                                       const std::vector<Vec3>& d_scale,
                                       const std::vector<Vec4>& d_rotation) {
  config.validate();
  const double ln_min = std::log(config.s_min);
  const double ln_max = std::log(config.s_max);
  const size_t n = raw.size();
  if (d_color.size() != n || d_opacity.size() != n || d_scale.size() != n ||
      d_rotation.size() != n)
    throw std::runtime_error("apply_activations_backward: gradient size mismatch");

  RawFeatures out(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& f = raw[i];
    auto& g = out[i];
    for (int c = 0; c < 3; ++c) {
      const double s = sigmoid(f[ShellTextureStack::kColorChannel + c]);
      g[ShellTextureStack::kColorChannel + c] =
          d_color[i][c] * (1.0 + 2.0 * config.eps_color) * s * (1.0 - s);
    }
    {
      const double s = sigmoid(f[ShellTextureStack::kOpacityChannel]);
      const bool clamped = s <= kOpacityMargin || s >= 1.0 - kOpacityMargin;
      g[ShellTextureStack::kOpacityChannel] =
          clamped ? 0.0 : d_opacity[i] * s * (1.0 - s);
    }
    for (int c = 0; c < 3; ++c) {
      const double x = f[ShellTextureStack::kScaleChannel + c];
      const bool inside = x > ln_min && x < ln_max;
      g[ShellTextureStack::kScaleChannel + c] =
          inside ? d_scale[i][c] * std::exp(x) : 0.0;
    }
    Vec4 q(f[ShellTextureStack::kRotationChannel + 0],
           f[ShellTextureStack::kRotationChannel + 1],
           f[ShellTextureStack::kRotationChannel + 2],
           f[ShellTextureStack::kRotationChannel + 3]);
    Vec4 unit = q;
    if (quat_normalize_robust(unit)) {
      const double norm = q.norm();
      const Vec4 dq = (d_rotation[i] - unit * unit.dot(d_rotation[i])) / norm;
      for (int c = 0; c < 4; ++c)
        g[ShellTextureStack::kRotationChannel + c] = dq[c];
    } else {
      for (int c = 0; c < 4; ++c) g[ShellTextureStack::kRotationChannel + c] = 0.0;
    }
  }
  return out;
}

std::pair<ShellTextureStack, ShellTextureStack> swap_region(
    const ShellTextureStack& a, const ShellTextureStack& b,
    const BoolMap& region) {
  if (!a.same_shape(b))
    throw std::runtime_error("swap_region: texture stacks differ in shape");
  if (region.height != a.height || region.width != a.width)
    throw std::runtime_error("swap_region: region dimensions mismatch");
  ShellTextureStack out_a = a;
  ShellTextureStack out_b = b;
  for (int s = 0; s < a.n_shells; ++s) {
    for (int y = 0; y < a.height; ++y) {
      for (int x = 0; x < a.width; ++x) {
        if (!region.at(y, x)) continue;
        const size_t off = a.texel_offset(s, y, x);
        for (int c = 0; c < ShellTextureStack::kChannels; ++c)
          std::swap(out_a.data[off + c], out_b.data[off + c]);
      }
    }
  }
  return {std::move(out_a), std::move(out_b)};
}

BoolMap region_from_parts(const RigBundle& rig,
                          const std::vector<std::string>& part_names,
                          int height, int width) {
  std::vector<uint8_t> joint_selected(rig.joints.size(), 0);
  for (const auto& name : part_names) {
    const auto it = rig.parts.find(name);
    if (it == rig.parts.end()) {
      std::ostringstream msg;
      msg << "region_from_parts: unknown part \"" << name << "\"";
      throw std::runtime_error(msg.str());
    }
    for (int j : it->second) joint_selected[j] = 1;
  }

  // Vertex membership by dominant skinning weight; ties pick the lower joint.
  std::vector<uint8_t> vertex_selected(rig.mesh.vertices.size(), 0);
  for (size_t v = 0; v < rig.weights.size(); ++v) {
    int best = -1;
    double best_w = -1.0;
    for (const auto& w : rig.weights[v]) {
      if (w.weight > best_w || (w.weight == best_w && w.joint < best)) {
        best_w = w.weight;
        best = w.joint;
      }
    }
    if (best >= 0 && joint_selected[best]) vertex_selected[v] = 1;
  }

  BoolMap map(height, width);
  for (size_t f = 0; f < rig.mesh.faces.size(); ++f) {
    const auto& face = rig.mesh.faces[f];
    if (!vertex_selected[face[0]] || !vertex_selected[face[1]] ||
        !vertex_selected[face[2]])
      continue;
    const auto& uvf = rig.mesh.uv_faces[f];
    rasterize_uv_triangle(map, rig.mesh.uvs[uvf[0]], rig.mesh.uvs[uvf[1]],
                          rig.mesh.uvs[uvf[2]]);
  }
  return map;
}

}  // namespace gsm
