#pragma once

#include "gsm/camera.hpp"
#include "gsm/image.hpp"
#include "gsm/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gsm {

// Numerical conventions of the rasterizer. The support rule (a Gaussian
// contributes to a pixel only when the pixel center lies within its extent
// radius and the evaluated alpha reaches alpha_min) is part of the compositing
// definition, so the tiled and reference paths agree exactly.
struct RasterSettings {
  double alpha_clamp = 0.99;
  double alpha_min = 1.0 / 255.0;
  double transmittance_min = 1e-4;
  double extent_sigma = 3.0;
  double lowpass = 0.3;  // px^2 added to the 2D covariance diagonal
  int tile_size = 16;
};

struct RenderOptions {
  bool alpha_only = false;
  std::optional<std::vector<int>> shell_filter;   // keep these shells only
  std::optional<std::vector<int>> gaussian_mask;  // keep these ids only
  int threads = 1;                                // 0 = hardware concurrency
  RasterSettings raster;
};

// Scene of activated Gaussians; the id of a Gaussian is its index.
struct SplatScene {
  std::vector<Vec3> position;
  std::vector<Vec4> rotation;  // unit quaternions (w, x, y, z)
  std::vector<Vec3> scale;
  std::vector<double> opacity;
  std::vector<Vec3> color;
  std::vector<int> shell;      // optional per-Gaussian shell index

  size_t size() const { return position.size(); }
  void validate() const;
};

// Sigma = R * diag(s)^2 * R^T.
Mat3 compose_covariance(const Vec3& scale, const Vec4& rotation);

struct ProjectedGaussian {
  Vec2 mean = Vec2::Zero();   // pixels
  Mat2 cov = Mat2::Zero();    // pixels^2, low-pass included
  Mat2 conic = Mat2::Zero();  // inverse of cov
  double depth = 0.0;         // view-space z
  double radius = 0.0;        // extent_sigma * sqrt(largest eigenvalue)
};

// EWA perspective projection: 2D covariance J W Sigma W^T J^T plus low-pass.
// Returns nullopt when the Gaussian is behind the near plane or its extent
// misses the image.
std::optional<ProjectedGaussian> project_gaussian(const Camera& camera,
                                                  const Vec3& position,
                                                  const Mat3& cov3d,
                                                  const RasterSettings& settings = {});

struct RenderOutput {
  Image color;          // H x W x 3, composited over the background
  Image alpha;          // H x W, exactly 1 - transmittance
  Image transmittance;  // H x W terminal transmittance

  // Retained state for render_backward.
  struct Internals {
    Camera camera;
    RenderOptions options;
    Vec3 background = Vec3::Zero();
    bool tiled = false;                  // reference outputs cannot backprop
    std::vector<int> visible_index;      // scene index per projected Gaussian
    std::vector<ProjectedGaussian> projected;
    std::vector<Mat23> view_jacobian;    // per projected Gaussian
    std::vector<int> sorted;             // projected indices, depth-then-id
    int tiles_x = 0, tiles_y = 0;
    std::vector<int> tile_offsets;       // CSR over sorted entries
    std::vector<int> tile_entries;       // projected indices per tile, sorted
    std::vector<int> n_contrib;          // per pixel, composited count
    uint64_t scene_fingerprint = 0;
    size_t scene_size = 0;
  };
  Internals internals;
};

// Depth-sorted, tile-parallel alpha blending. Bit-identical output for any
// thread count. alpha_only renders with all colors = 1 over a black
// background.
RenderOutput render(const Camera& camera, const SplatScene& scene,
                    const Vec3& background, const RenderOptions& options = {});

// Independent compositing oracle: per pixel, walks every projected Gaussian
// in sorted order with the same mathematical rules. No tiling. Intended for
// scenes up to ~10^4 Gaussians.
RenderOutput render_reference(const Camera& camera, const SplatScene& scene,
                              const Vec3& background,
                              const RenderOptions& options = {});

struct SceneGradients {
  std::vector<Vec3> color;
  std::vector<double> opacity;
  std::vector<Vec3> scale;
  std::vector<Vec4> rotation;
};

// Exact adjoint of render with respect to color, opacity, scale and rotation.
// Positions carry no gradient by design. Clamped or skipped branches get zero
// gradient, matching the forward rule.
SceneGradients render_backward(const RenderOutput& output,
                               const SplatScene& scene,
                               const Image& d_color, const Image& d_alpha);

uint64_t scene_fingerprint(const SplatScene& scene);

}  // namespace gsm
