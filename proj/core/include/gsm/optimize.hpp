#pragma once

#include "gsm/articulation.hpp"
#include "gsm/camera.hpp"
#include "gsm/image.hpp"
#include "gsm/render.hpp"
#include "gsm/shell_texture.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gsm {

// Exact nearest-neighbor distance per point via a uniform spatial hash grid.
// Throws on duplicate points, naming the pair.
std::vector<double> nearest_neighbor_distances(std::span<const Vec3> points);

// Mean log nearest-neighbor distance. The log distances are summed in sorted
// order so the result is exactly permutation-invariant.
double compute_s_ref(std::span<const Vec3> points);

struct ScalingRegResult {
  double loss = 0.0;
  std::vector<double> grad;  // stack-shaped; nonzero only on scale channels
};

// Mean squared deviation of the raw scale channels from s_ref over masked
// texels. Empty mask gives zero loss and gradient.
ScalingRegResult scaling_reg(const ShellTextureStack& textures, double s_ref);

struct PhotometricResult {
  double loss = 0.0;
  Image d_color;
  Image d_alpha;
};

// Mean squared color error plus lambda_mask * mean squared alpha error,
// with exact adjoints.
PhotometricResult photometric_loss(const RenderOutput& rendered,
                                   const Image& target_color,
                                   const Image& target_alpha,
                                   double lambda_mask);

// Moment accumulators shaped like the flattened parameter vector.
struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
};

// Bias-corrected adaptive moment step; param -= lr * m_hat / (sqrt(v_hat) + 1e-8).
// Throws on non-finite gradients, locating the offending texel.
void optimizer_step(ShellTextureStack& params, std::span<const double> grads,
                    OptimizerState& state, double lr, double beta1,
                    double beta2);

struct FitConfig {
  int iterations = 2000;
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double lambda_scale = 0.1;
  double lambda_mask = 1.0;
  std::vector<Camera> cameras;
  std::vector<Image> target_color;  // H x W x 3, linear
  std::vector<Image> target_alpha;  // H x W
  std::vector<Pose> poses;          // optional, one per view; empty = canonical
  uint64_t seed = 0;
  int log_interval = 100;
  int texture_height = 256;
  int texture_width = 256;
  int threads = 1;
  // Called every log_interval iterations with the current raw textures.
  std::function<void(int, const ShellTextureStack&)> checkpoint = nullptr;

  void validate(const RigBundle& rig) const;
};

struct FitTraceRow {
  int iteration = 0;
  double photometric = 0.0;
  double scale_reg = 0.0;  // already weighted by lambda_scale
  double total = 0.0;
};

struct FitResult {
  ShellTextureStack textures;  // raw values
  std::vector<FitTraceRow> trace;
  double s_ref = 0.0;
  ActivationConfig activations;
};

// Initializes the raw texture stack (color 0, opacity 0, scale s_ref,
// rotation identity), then iterates lookup -> activations -> (optional
// deform) -> render -> losses -> backward -> optimizer step.
FitResult fit(const RigBundle& rig, const ShellStack& stack,
              const GaussianAnchors& anchors, const FitConfig& config);

// Activation bounds used by fit and by the CLI render path: the scale clamp
// upper bound tracks the sampling density via s_ref.
ActivationConfig default_activations_for(double s_ref);

double psnr(const Image& a, const Image& b);

}  // namespace gsm
